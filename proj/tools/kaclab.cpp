#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kaclab/cli.hpp"
#include "kaclab/parallel.hpp"

namespace {

struct GlobalOptions {
  std::string config;
  std::string preset;
  std::string out;
  int threads = 0;
  std::vector<std::string> set;
};

void add_common(CLI::App* app, GlobalOptions& g) {
  app->add_option("--config", g.config, "Scenario file (INI, or JSON if it starts with '{')");
  app->add_option("--preset", g.preset, "Built-in scenario used as the base config")
      ->check(CLI::IsMember(kaclab::preset_names()));
  app->add_option("--out", g.out, "Output directory (fallbacks: config run.out, $KACLAB_OUT, ./kaclab-out)");
  app->add_option("--threads", g.threads, "Worker threads, 0 for all cores; results do not depend on it")
      ->check(CLI::NonNegativeNumber);
  app->add_option("--set", g.set, "Override a field, e.g. --set kernel.s=0.3 (repeatable)");
}

kaclab::RunConfig build_config(const GlobalOptions& g) {
  kaclab::RunConfig cfg = g.preset.empty() ? kaclab::RunConfig{} : kaclab::preset(g.preset);
  if (!g.config.empty()) {
    cfg = kaclab::load_config(g.config, cfg);
    std::filesystem::path in = cfg.reduce3d.input;
    if (!in.empty() && in.is_relative()) cfg.reduce3d.input = (std::filesystem::path(g.config).parent_path() / in).string();
  }
  if (!g.set.empty()) {
    kaclab::detail::FlatConfig flat;
    for (const auto& kv : g.set) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) kaclab::fail(kaclab::ErrorCode::ConfigError, "--set expects key=value, got '" + kv + "'");
      flat.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg = kaclab::detail::apply_flat(flat, cfg);
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kaclab: spectral solver and diagnostics for the non-cutoff Kac equation"};
  app.require_subcommand(1);
  GlobalOptions g;

  auto* simulate = app.add_subcommand("simulate", "Evolve a scenario and write trajectory, monitors and Gevrey diagnostics");
  add_common(simulate, g);

  std::vector<std::string> probe_ids;
  auto* probe = app.add_subcommand("probe", "Sample inequality probes and write one report per id");
  add_common(probe, g);
  probe->add_option("ids", probe_ids, "Probe ids, or 'all' (default: probe.ids from the config)");

  std::string reduce_input;
  auto* reduce = app.add_subcommand("reduce3d", "Project a radial 3D profile to 1D and check the kernel reduction");
  add_common(reduce, g);
  reduce->add_option("--input", reduce_input, "Radial profile CSV with header r,g");

  std::string diag_input;
  auto* diag = app.add_subcommand("diag", "Diagnostics on a trajectory");
  diag->require_subcommand(1);
  auto* gevrey = diag->add_subcommand("gevrey", "Gevrey radius fit and a-priori tracker");
  add_common(gevrey, g);
  gevrey->add_option("--input", diag_input, "Output directory of an earlier simulate run (default: simulate now)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kaclab::kExitConfig;
  }

  kaclab::set_thread_count(g.threads);
  std::filesystem::path out_dir = g.out;
  try {
    kaclab::RunConfig cfg = build_config(g);
    out_dir = kaclab::resolve_out_dir(g.out, cfg);
    if (simulate->parsed()) return kaclab::run_simulate(cfg, out_dir);
    if (probe->parsed()) {
      auto ids = probe_ids.empty() ? cfg.probe.ids : probe_ids;
      return kaclab::run_probe(cfg, ids, out_dir);
    }
    if (reduce->parsed()) return kaclab::run_reduce3d(cfg, reduce_input, out_dir);
    if (gevrey->parsed()) return kaclab::run_diag_gevrey(cfg, diag_input, out_dir);
  } catch (const kaclab::Error& e) {
    return kaclab::report_error(e, out_dir);
  } catch (const std::exception& e) {
    return kaclab::report_error(kaclab::Error(kaclab::ErrorCode::IoError, e.what()), out_dir);
  }
  return kaclab::kExitConfig;
}
