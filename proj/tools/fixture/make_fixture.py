# SPDX-License-Identifier: Apache-2.0
"""Write data/maass_sl2z.{csv,manifest} and data/holomorphic_sl2z.csv.

usage: python3 make_fixture.py OUTDIR   (reads maass_norms.json and holo.json)
The structured copy comes from the C++ writer, so both formats hold identical doubles:
    psl2-dataset convert OUTDIR/maass_sl2z.csv OUTDIR/maass_sl2z.json
"""
import json
import os
import sys

out = sys.argv[1] if len(sys.argv) > 1 else "data"
forms = json.load(open("maass_norms.json"))
forms.sort(key=lambda r: r["R"])
holo = json.load(open("holo.json"))

def fmt(v):
    return "%.15e" % v

rows = []
for f in forms:
    c = f["c"]
    rows.append(dict(kappa=f["R"], epsilon=1 if f["parity"] == 0 else -1,
                     norm_sq_rho1=f["w"], t=[c[n - 1] for n in range(2, 11)]))

with open(os.path.join(out, "maass_sl2z.csv"), "w") as fh:
    fh.write("kappa,epsilon,norm_sq_rho1," + ",".join("t%d" % n for n in range(2, 11)) + "\n")
    for r in rows:
        fh.write(",".join([fmt(r["kappa"]), str(r["epsilon"]), fmt(r["norm_sq_rho1"])] + [fmt(v) for v in r["t"]]) + "\n")

with open(os.path.join(out, "holomorphic_sl2z.csv"), "w") as fh:
    fh.write("k,norm_sq_rho1," + ",".join("t%d" % n for n in range(2, 11)) + "\n")
    for h in sorted(holo, key=lambda h: (h["k"], h["t"][1])):
        fh.write(",".join([str(h["k"]), fmt(1.0/h["petersson"])] + [fmt(v) for v in h["t"][1:10]]) + "\n")

kmax = max(r["kappa"] for r in rows)
manifest = {
    "source": "own Hejhal-method computation (tools/fixture); Petersson norms by Parseval plus 2D Gauss-Legendre on the fundamental domain",
    "N": 10,
    "kappa_max": kmax,
    "complete_below": 46.0,
    "precision": 1e-8,
    "normalization_tag": "cosh_normalized",
    "holomorphic_normalization_tag": "petersson_inverse",
    "holomorphic_file": "holomorphic_sl2z.csv",
    "holomorphic_weight_max": 26,
}
with open(os.path.join(out, "maass_sl2z.manifest"), "w") as fh:
    for k, v in manifest.items():
        fh.write("%s=%s\n" % (k, repr(v) if isinstance(v, float) else v))

print(len(rows), "forms,", len(holo), "holomorphic; kappa_max", kmax)
