# SPDX-License-Identifier: Apache-2.0
"""Hejhal collocation for even/odd Maass cusp forms on PSL(2,Z)."""
import math

import numpy as np

def kscaled(R, x):
    """exp(pi R/2) K_{iR}(x) for an array x > 0 (absolute accuracy ~1e-14)."""
    x = np.asarray(x, float)
    out = np.empty_like(x)
    near = x < 1.3*R
    if near.any():
        xs = x[near]
        eps = min(0.5, 3.0/max(R, 1.0))
        phi = -(np.pi/2 - eps)
        S = np.arccosh(max(1.0, (R*eps + 40)/(xs.min()*np.sin(eps))))
        h = 0.6/(R + xs.max())
        s = np.arange(-S, S + h, h)
        t = s + 1j*phi
        e1 = np.exp(-1j*R*t + np.pi*R/2)
        ct = np.cosh(t)
        out[near] = 0.5*h*(np.exp(-np.outer(xs, ct)) @ e1).real
    if (~near).any():
        xs = x[~near]
        S = np.arccosh(max(1.0, (40 + xs.min())/xs.min()))+1
        h = 0.6/(R + 1)
        s = np.arange(0, S + h, h)
        w = np.full(s.shape, h); w[0] = h/2
        vals = np.exp(-np.outer(xs, np.cosh(s)) + np.pi*R/2) @ (w*np.cos(R*s))
        out[~near] = vals
    return out

def pullback(x, y):
    for _ in range(100):
        x = x - math.floor(x + 0.5)
        r = x*x + y*y
        if r >= 1 - 1e-15: return x, y
        x, y = -x/r, y/r
    raise RuntimeError

def params(R):
    Y = 0.84
    M = int(math.ceil((R + 3*R**(1/3) + 32)/(2*math.pi*Y)))
    Q = M + 12
    return Y, M, Q

def system(R, parity, Y, M, Q):
    m = np.arange(1 - Q, Q + 1)
    xm = (m - 0.5)/(2*Q)
    pts = np.array([pullback(x, Y) for x in xm])
    xs, ys = pts[:, 0], pts[:, 1]
    l = np.arange(1, M + 1)
    arg = 2*np.pi*np.outer(ys, l)
    Kv = kscaled(R, arg.ravel()).reshape(arg.shape)*np.sqrt(ys)[:, None]
    cs = np.cos if parity == 0 else np.sin
    A = Kv*cs(2*np.pi*np.outer(xs, l))            # (2Q, M)
    B = cs(2*np.pi*np.outer(l, xm))               # (M, 2Q)
    V = (B @ A)/Q
    V -= np.diag(np.sqrt(Y)*kscaled(R, 2*np.pi*l*Y))
    return V

def solve(R, parity, Y=None, M=None, Q=None):
    Y0, M0, Q0 = params(R)
    Y = Y or Y0; M = M or M0; Q = Q or Q0
    V = system(R, parity, Y, M, Q)
    c = np.linalg.solve(V[1:, 1:], -V[1:, 0])
    c = np.concatenate([[1.0], c])
    return c, V[0] @ c

def resid(R, parity):
    return solve(R, parity)[1]

if __name__ == "__main__":
    for R in [9.53369526135, 12.17300832468, 13.77975135189]:
        for p in (0, 1):
            c1, r1 = solve(R, p)
            c2, r2 = solve(R, p, Y=0.80)
            print(R, p, r1, c1[1:4], c2[1:4])
