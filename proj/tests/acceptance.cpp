// Acceptance scenarios: one PASS/FAIL line per criterion; exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>

#include "kaclab/cli.hpp"

using namespace kaclab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Outcome equilibrium() {
  set_thread_count(1);
  auto t0 = std::chrono::steady_clock::now();
  GridSpec g{20.0, 256, 10.0};
  KernelSpec k;
  auto rule = QuadratureRule::make(k, 1e-9);
  auto rhs = bobylev_rhs(init_from_profile(Gaussian{1.0, 1.0, 0.0}, g), k, rule);
  double sup = 0.0;
  for (double x : rhs.values) sup = std::max(sup, std::abs(x));
  double secs = seconds_since(t0);
  set_thread_count(0);
  return {sup <= 1e-8 && secs < 5.0, fmt("sup|Q| = %.3g, %.2f s", sup, secs)};
}

Outcome conservation() {
  RunConfig c = preset("indicator-gevrey");
  c.integrator.T = 1.0;
  Trajectory tr = detail::simulate_config(c);
  double dm = 0, de = 0, worst_h = -INFINITY;
  for (size_t i = 0; i < tr.times.size(); ++i) {
    dm = std::max(dm, std::abs(tr.mass[i] - tr.mass[0]) / tr.mass[0]);
    de = std::max(de, std::abs(tr.energy[i] - tr.energy[0]) / tr.energy[0]);
    worst_h = std::max(worst_h, tr.entropy[i] - tr.entropy[0]);
  }
  return {dm <= 1e-10 && de <= 1e-6 && worst_h <= 1e-6,
          fmt("mass drift %.2g, energy drift %.2g, max H(t)-H(0) %.2g", dm, de, worst_h)};
}

Outcome moment_rate() {
  const double s = 0.25;
  const double oracle = 2.0 / ((1.0 - s) * (2.0 - s));  // 4∫₀¹ u^{1−2s}(1−u²) du after u = sin θ
  std::string msg;
  bool ok = true;
  for (const char* name : {"indicator", "two_bump"}) {
    RunConfig c;
    c.kernel.s = s;
    c.initial.profile = name;
    c.integrator.T = 1.0;
    c.integrator.outputs = 21;
    c.diagnostics.entropy = false;
    MomentFit f = moment_track(detail::simulate_config(c));
    double rel = std::abs(f.lambda - oracle) / oracle;
    ok = ok && rel <= 0.01 && f.r_squared > 0.999;
    msg += std::string(name) + fmt(" rel %.2g R2 %.8f; ", rel, f.r_squared);
  }
  return {ok, msg + fmt("oracle %.10f", oracle)};
}

Outcome gevrey_smoothing() {
  std::vector<std::vector<GevreyFitPoint>> fits;
  for (int n : {256, 512}) {
    RunConfig c = preset("indicator-gevrey");
    c.grid.n = n;
    c.diagnostics.entropy = false;
    fits.push_back(gevrey_fit(detail::simulate_config(c), c.diagnostics.s_prime));
  }
  const auto& a = fits[0];
  const auto& b = fits[1];
  bool ok = a.size() == b.size() && std::abs(a[0].c) <= 1e-3;
  double worst_drop = 0.0, worst_grid = 0.0, min_c = INFINITY;
  for (size_t k = 1; k < a.size(); ++k) {
    min_c = std::min(min_c, a[k].c);
    ok = ok && a[k].c > 0.0 && b[k].c > 0.0;
    double slack = a[k].c_stderr + a[k - 1].c_stderr;
    worst_drop = std::max(worst_drop, a[k - 1].c - a[k].c - slack);
    worst_grid = std::max(worst_grid, std::abs(a[k].c - b[k].c) / std::abs(b[k].c));
  }
  ok = ok && worst_drop <= 0.0 && worst_grid <= 0.1;
  return {ok, fmt("c(0) = %.2g, min c(t>0) = %.3g, grid deviation %.3g", a[0].c, min_c, worst_grid) +
                  fmt(", worst drop beyond stderr %.2g", worst_drop)};
}

Outcome probes() {
  RunConfig c;
  ProbeConfig pc = probe_config(c);
  bool ok = pc.symbol_samples >= 10000 && pc.random_pairs >= 20;
  std::string msg;
  for (const auto& id : probe_ids()) {
    ProbeReport r = run_probe(id, pc);
    ok = ok && r.passed() && r.violations == 0 && !r.constants.empty();
    if (!r.passed()) msg += id + " failed; ";
  }
  return {ok, msg + std::to_string(probe_ids().size()) + " probes run"};
}

Outcome brute_force() {
  GridSpec g{12.0, 48, 10.0};
  KernelSpec k;
  auto rule = QuadratureRule::make(k, 1e-11);
  BruteForceGrid bg{10.0, 161};
  detail::SampleRng rng(12345);
  auto draw = [&] {
    std::vector<Packet> parts;
    for (int i = 0; i < 3; ++i) parts.push_back({rng.uniform(-1.0, 1.0), rng.uniform(0.0, 4.0), rng.uniform(0.8, 1.5)});
    return detail::state_from(g, [parts](double x) {
      double s = 0;
      for (const auto& p : parts) s += profile_transform(p, x);
      return s;
    });
  };
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    auto f = draw(), gg = draw(), h = draw();
    double a = weak_pairing(f, gg, h, k, rule);
    double b = weak_pairing_physical(f, gg, h, k, rule, bg);
    worst = std::max(worst, std::abs(a - b) / std::abs(b));
  }
  return {worst <= 1e-6, fmt("worst relative difference %.3g over 10 triples", worst)};
}

Outcome radial() {
  const double C = std::pow(2 * kPi, -1.5);
  auto gauss = sample_radial([&](double r) { return C * std::exp(-0.5 * r * r); }, 12.0, 2401);
  auto fg = project_to_kac(gauss, 10.0, 2001);
  double eg = 0.0;
  for (int k = 0; k < fg.m(); ++k)
    eg = std::max(eg, std::abs(fg.values[k] - std::exp(-0.5 * fg.v(k) * fg.v(k)) / std::sqrt(2 * kPi)));

  RadialProfile3D ball;
  for (int i = 0; i <= 100; ++i) ball.r.push_back(i / 100.0), ball.g.push_back(1.0);
  for (int i = 100; i <= 200; ++i) ball.r.push_back(i / 100.0), ball.g.push_back(0.0);
  auto fb = project_to_kac(ball, 2.0, 4001);
  double eb = 0.0;
  for (int k = 0; k < fb.m(); ++k)
    eb = std::max(eb, std::abs(fb.values[k] - kPi * std::max(1.0 - fb.v(k) * fb.v(k), 0.0)));

  double emom = 0.0;
  for (auto* p : {&gauss, &ball}) {
    auto f = project_to_kac(*p, p == &gauss ? 10.0 : 2.0, p == &gauss ? 2001 : 4001);
    auto m = kac_moments(f);
    emom = std::max({emom, std::abs(m.mass - p->mass()) / p->mass(),
                     std::abs(m.energy - p->energy3d() / 3.0) / (p->energy3d() / 3.0)});
  }

  auto shells = sample_radial(
      [&](double r) {
        double e = std::exp(-0.5 * r * r);
        return (0.5 / 3.0) * C * r * r * e + (0.5 / 945.0) * C * std::pow(r, 8) * e;
      },
      12.0, 2401);
  double resid = 0.0;
  Kernel3D b{Kernel3DShape::exact_power, 1.0, 0.25};
  for (auto* p : {&gauss, &shells}) resid = std::max(resid, rhs_consistency(*p, b, GridSpec{20.0, 256, 12.0}).residual);

  bool ok = eg <= 1e-8 && eb <= 1e-8 && emom <= 1e-8 && resid <= 1e-6;
  return {ok, fmt("gaussian %.2g, ball %.2g, moments %.2g", eg, eb, emom) + fmt(", RHS residual %.2g", resid)};
}

bool same_tree(const fs::path& a, const fs::path& b, std::string& why) {
  size_t count = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    auto rel = fs::relative(e.path(), a);
    if (!fs::exists(b / rel) || read_file(e.path()) != read_file(b / rel)) {
      why = rel.string() + " differs";
      return false;
    }
    ++count;
  }
  for (const auto& e : fs::recursive_directory_iterator(b))
    if (e.is_regular_file()) --count;
  if (count != 0) {
    why = "file sets differ";
    return false;
  }
  return true;
}

Outcome determinism() {
  fs::path root = fs::temp_directory_path() / "kaclab_acceptance_threads";
  fs::remove_all(root);
  RunConfig sim = preset("indicator-gevrey");
  RunConfig prb;
  prb.probe.symbol_samples = 2000;
  std::string why;
  bool ok = true;
  for (int threads : {1, 8}) {
    set_thread_count(threads);
    auto dir = root / ("t" + std::to_string(threads));
    ok = ok && run_simulate(sim, dir / "simulate") == kExitOk;
    ok = ok && run_probe(prb, {"all"}, dir / "probe") == kExitOk;
  }
  set_thread_count(0);
  ok = ok && same_tree(root / "t1", root / "t8", why);
  return {ok, ok ? "simulate and probe outputs byte-identical" : why};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 equilibrium fixed point", equilibrium},
      {"2 conservation and entropy", conservation},
      {"3 fourth-moment relaxation rate", moment_rate},
      {"4 Gevrey smoothing", gevrey_smoothing},
      {"5 inequality probes", probes},
      {"6 brute-force pairing", brute_force},
      {"7 radial reduction", radial},
      {"8 thread determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s criterion %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
