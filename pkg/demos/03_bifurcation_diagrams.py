"""Bifurcation diagrams for example 2: sweep r at fixed eps and eps at fixed r.

Writes one CSV per sweep (solver points) plus the detected saddle-node
events; plot P against the swept parameter, coloured by class.
"""
import argparse
import os

import numpy as np

from vaxadapt import make_example2, sweep_eps, sweep_r
from vaxadapt.serialize import write_diagram_csv, write_events_csv

parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
parser.add_argument("--outdir", default="demo_out")
parser.add_argument("--n", type=int, default=200, help="sweep grid size")
args = parser.parse_args()
os.makedirs(args.outdir, exist_ok=True)

curve = make_example2()
sweeps = [("r", e, sweep_r(curve, e, np.linspace(0, 1, args.n + 2)[1:-1])) for e in (0.078, 0.188)]
sweeps += [("eps", r, sweep_eps(curve, r, np.linspace(0, 1, args.n))) for r in (0.67, 0.909)]

for axis, fixed, d in sweeps:
    stem = os.path.join(args.outdir, f"example2_sweep_{axis}_{fixed}")
    with open(stem + ".csv", "w", newline="") as fh:
        write_diagram_csv(d, fh)
    with open(stem + "_events.csv", "w", newline="") as fh:
        write_events_csv(d, fh)
    most = max(c for _, c in d.counts)
    print(f"sweep {axis} at {'eps' if axis == 'r' else 'r'} = {fixed}: up to {most} equilibria")
    for ev in d.events:
        print(f"    {ev.kind:6s} at {axis} = {ev.param:.8f}, P = {ev.P:.8f}")
