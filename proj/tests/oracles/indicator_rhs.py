# Bobylev right-hand side of the unit indicator (s = 0.25) at grid points
# j*dxi of the n = 256, xi_max = 20 grid, from the exact transform sin(xi)/xi.
import mpmath as mp
mp.mp.dps = 30
s = mp.mpf('0.25')
def sinc(x): return mp.mpf(1) if x == 0 else mp.sin(x)/x
def R(xi):
    f = lambda t: mp.cos(t)/mp.sin(t)**(1+2*s) * (sinc(xi*mp.sin(t))*sinc(xi*mp.cos(t)) - sinc(xi))
    return 2*mp.quad(f, [0, mp.mpf(10)**-8, mp.mpf(10)**-4, mp.mpf(10)**-2, 0.1, 0.5, 1, mp.pi/2], maxdegree=10)
d = mp.mpf(20)/255
for j in [1, 2, 17, 50]:
    print(j, mp.nstr(R(j*d), 15))
