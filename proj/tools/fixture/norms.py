# SPDX-License-Identifier: Apache-2.0
"""Coefficients and scaled Petersson norms for the scanned forms.

usage: python3 norms.py found_9.0_46.0.json maass_norms.json
"""
import json
import math
import sys

import numpy as np
from scipy.integrate import quad

from hejhal import kscaled, solve


def coeffs_full(R, p, Y, nmax):
    M = max(nmax + 6, int(math.ceil((R + 3*R**(1/3) + 32)/(2*math.pi*Y))))
    return solve(R, p, Y=Y, M=M, Q=M + 12)[0]

def norm_scaled(R, p, c, ngl=80):
    n = np.arange(1, len(c) + 1)
    # y >= 1 by Parseval
    up = 0.0
    for k, ck in zip(n, c):
        if abs(ck) < 1e-300: continue
        a = 2*math.pi*k
        f = lambda t: kscaled(R, np.array([t]))[0]**2/t
        tail = 0.0
        b = a
        while True:
            nb = b + max(2.0, 0.25*R)
            v = quad(f, b, nb, limit=400, epsabs=1e-16, epsrel=1e-13)[0]
            tail += v; b = nb
            if b > R + 60 and abs(v) < 1e-18: break
        up += 2*ck*ck*tail
    # lower strip: 2 * int_0^{1/2} dx int_{sqrt(1-x^2)}^1 |u|^2 dy/y^2
    gx, gw = np.polynomial.legendre.leggauss(ngl)
    xs = 0.25*gx + 0.25; wx = 0.25*gw
    cs = np.cos if p == 0 else np.sin
    low = 0.0
    for x, w in zip(xs, wx):
        ya = math.sqrt(1 - x*x)
        ys = 0.5*(1 - ya)*gx + 0.5*(1 + ya); wy = 0.5*(1 - ya)*gw
        Kv = kscaled(R, (2*math.pi*np.outer(ys, n)).ravel()).reshape(len(ys), len(n))*np.sqrt(ys)[:, None]
        u = 2*(Kv @ (c*cs(2*math.pi*n*x)))
        low += 2*w*np.sum(wy*u*u/ys**2)
    return up + low, up, low

if __name__ == "__main__":
    d = json.load(open(sys.argv[1])); d.sort(key=lambda r: r['R'])
    out = []
    for r in d:
        R, p = r['R'], r['parity']
        nmax = int((R + 45)/(2*math.pi*math.sqrt(3)/2)) + 1
        Ya = min(0.84, (R + 4)/(2*math.pi*13))
        c = coeffs_full(R, p, Ya, nmax)[:nmax]
        cb = coeffs_full(R, p, 0.85*Ya, nmax)[:nmax]
        N1, up, low = norm_scaled(R, p, c, ngl=50)
        N2 = norm_scaled(R, p, cb, ngl=70)[0]
        w = 2.0/((1 + math.exp(-2*math.pi*R))*N1)   # |rho(1)|^2 / cosh(pi R)
        rel = abs(N1 - N2)/N1
        print("%.12f %d nmax=%d norm=%.14e rel=%.1e w=%.12f cmax_diff=%.1e" % (R, p, nmax, N1, rel, w, np.max(np.abs(c-cb))), flush=True)
        out.append(dict(R=R, parity=p, c=list(c[:12]), norm_scaled=N1, rel=rel, w=w))
    json.dump(out, open(sys.argv[2], "w"))
