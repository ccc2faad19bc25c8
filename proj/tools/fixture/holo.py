# SPDX-License-Identifier: Apache-2.0
"""Hecke eigenforms for SL(2,Z) of weight 12..26 from E4, E6 and Delta, with Petersson norms.

usage: python3 holo.py  -> holo.json
"""
import json
import math
from fractions import Fraction

import numpy as np
from scipy.special import gamma, gammaincc

N = 60
def sigma(k, n): return sum(d**k for d in range(1, n+1) if n % d == 0)
def mul(a, b):
    c = [0]*N
    for i, x in enumerate(a):
        if x == 0: continue
        for j in range(N - i): c[i+j] += x*b[j]
    return c
E4 = [1] + [240*sigma(3, n) for n in range(1, N)]
E6 = [1] + [-504*sigma(5, n) for n in range(1, N)]
E43 = mul(mul(E4, E4), E4); E62 = mul(E6, E6)
D = [Fraction(x - y, 1728) for x, y in zip(E43, E62)]
D = [int(x) for x in D]
assert D[1] == 1 and D[2] == -24
def E(w):
    # weight w Eisenstein-type product of E4^a E6^b
    for a in range(0, w//4 + 1):
        if (w - 4*a) % 6 == 0:
            r = [1] + [0]*(N-1)
            for _ in range(a): r = mul(r, E4)
            for _ in range((w - 4*a)//6): r = mul(r, E6)
            return r
    raise ValueError
forms = []
for w in (12, 16, 18, 20, 22, 26):
    f = mul(D, E(w - 12)) if w > 12 else D
    forms.append((w, [float(x) for x in f]))
# weight 24: basis Delta^2, Delta*E4^3, Hecke T2 eigenbasis
b1 = mul(D, E43); b2 = mul(D, D)
def T2(f, k=24):
    return [f[2*n] + (2**(k-1)*f[n//2] if n % 2 == 0 else 0) for n in range(N//2)]
# express T2 b in basis via coefficients at n=1,2: b1=(1,*) , b2=(0,1)
M = np.zeros((2, 2))
for j, b in enumerate((b1, b2)):
    t = T2(b)
    # t = c1*b1 + c2*b2 : c1 = t[1], c2 = t[2] - c1*b1[2]
    c1 = t[1]; c2 = t[2] - c1*b1[2]
    M[:, j] = (c1, c2)
ev, vec = np.linalg.eig(M)
for i in range(2):
    v = vec[:, i]/vec[0, i]
    f = [v[0]*x + v[1]*y for x, y in zip(b1, b2)]
    forms.append((24, f))
def petersson(w, a, ngl=60):
    a = np.array(a[:N//2], float); n = np.arange(len(a))
    up = 0.0
    for k in range(1, len(a)):
        # int_1^inf e^{-4 pi k y} y^{w-2} dy
        s = w - 1; lam = 4*math.pi*k
        up += a[k]**2*gamma(s)*gammaincc(s, lam)/lam**s
    gx, gw = np.polynomial.legendre.leggauss(ngl)
    xs = 0.25*gx + 0.25; wx = 0.25*gw
    low = 0.0
    for x, wxx in zip(xs, wx):
        ya = math.sqrt(1 - x*x)
        ys = 0.5*(1 - ya)*gx + 0.5*(1 + ya); wy = 0.5*(1 - ya)*gw
        q = np.exp(2j*math.pi*np.outer(x + 1j*ys, n[1:]))
        f = q @ a[1:]
        low += 2*wxx*np.sum(wy*np.abs(f)**2*ys**(w - 2))
    return up + low
out = []
for w, f in forms:
    k = w//2
    P = petersson(w, f); P2 = petersson(w, f, 90)
    t = [f[n]/n**((w - 1)/2) for n in range(1, 11)]
    rho2 = 1.0/P
    varrho2 = math.gamma(2*k)/(2**(4*k)*math.pi**(2*k + 1))*rho2
    print(w, "%.15e rel %.1e varrho2 %.6e t2 %.6f" % (P, abs(P - P2)/P, varrho2, t[1]))
    out.append(dict(k=k, petersson=P, t=t))
json.dump(out, open('holo.json', 'w'), indent=1)
