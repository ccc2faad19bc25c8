# SPDX-License-Identifier: Apache-2.0
"""Scan [lo, hi) for eigenvalues by sign changes of the Hejhal residual.

usage: python3 scan.py LO HI STEP  -> found_LO_HI.json
"""
import json
import math
import sys
import time

import numpy as np
from scipy.optimize import brentq

from hejhal import resid, solve

def coeffs(R, p, Y):
    M = int(math.ceil((R + 3*R**(1/3) + 32)/(2*math.pi*Y)))
    return solve(R, p, Y=Y, M=M, Q=M+12)[0]
lo, hi, step = float(sys.argv[1]), float(sys.argv[2]), float(sys.argv[3])
found = []
t0 = time.time()
for p in (0, 1):
    Rs = np.arange(lo, hi, step)
    rs = np.array([resid(R, p) for R in Rs])
    for i in range(len(Rs) - 1):
        if rs[i]*rs[i+1] < 0:
            R = brentq(lambda r: resid(r, p), Rs[i], Rs[i+1], xtol=1e-14)
            if abs(resid(R, p)) > 1e-8: continue  # pole
            Ya = min(0.84, (R + 4)/(2*math.pi*13)); Yb = 0.85*Ya
            c1 = coeffs(R, p, Ya); c2 = coeffs(R, p, Yb)
            agree = np.max(np.abs(c1[1:12] - c2[1:12]))
            hecke = max(abs(c1[1]*c1[2] - c1[5]), abs(c1[1]**2 - 1 - c1[3]), abs(c1[1]*c1[4]-c1[9]))
            ok = agree < 1e-7 and hecke < 1e-7
            print("%.12f parity=%d agree=%.1e hecke=%.1e %s" % (R, p, agree, hecke, "" if ok else "REJECT"), flush=True)
            if ok: found.append(dict(R=R, parity=p, c=list(c1[:12]), agree=agree, hecke=hecke))
print("time", time.time() - t0, file=sys.stderr)
json.dump(found, open("found_%s_%s.json" % (lo, hi), "w"))
