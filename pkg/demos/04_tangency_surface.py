"""The saddle-node locus in the (eps, r) plane and the equilibrium surface.

Each P below the cutoff defines one tangency point (eps(P), r(P)); the
feasible part of this curve bounds the region with three equilibria. The
surface samples r(P, eps) for 3-D plotting.
"""
import argparse
import os

import numpy as np

from vaxadapt import make_example2, surface, tangency_curve
from vaxadapt.serialize import write_surface_csv, write_tangency_csv

parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
parser.add_argument("--outdir", default="demo_out")
args = parser.parse_args()
os.makedirs(args.outdir, exist_ok=True)

curve = make_example2()
P = np.linspace(1e-4, curve.p_star - 1e-4, 4000)
tc = tangency_curve(curve, P)
feas = tc.feasible()
print(f"{len(tc)} tangency points, {len(feas)} feasible, {tc.skipped} skipped (singular)")
if feas:
    cusp = min(feas, key=lambda t: t.r)
    print(f"lowest feasible fold: r = {cusp.r:.6f} at eps = {cusp.eps:.6f}, P = {cusp.P:.6f}")
with open(os.path.join(args.outdir, "example2_tangency.csv"), "w", newline="") as fh:
    write_tangency_csv(tc, fh)

S = surface(curve, np.linspace(1e-3, curve.p_star - 1e-3, 150), np.linspace(0, 1, 51))
with open(os.path.join(args.outdir, "example2_surface.csv"), "w", newline="") as fh:
    write_surface_csv(S, fh)
print(f"{len(S)} surface samples written")
