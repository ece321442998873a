"""Equilibria of the adaptive dynamics for the three built-in curves.

For each curve we validate the standing assumptions, list every equilibrium
at one (r, eps) setting, cross-check against the brute-force scan, and follow
one trajectory to its stable point.
"""
import argparse

from vaxadapt import (ModelParams, find_all, integrate, make_convex_test, make_example1, make_example2,
                      oracle_scan, validate)

parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
parser.add_argument("--r", type=float, default=0.909)
parser.add_argument("--eps", type=float, default=0.188)
parser.add_argument("--P0", type=float, default=0.5)
args = parser.parse_args()

params = ModelParams(args.r, args.eps)
for curve in (make_example1(), make_example2(), make_convex_test()):
    rep = validate(curve)
    print(f"== {curve.label}: assumptions {'hold' if rep.passed else 'FAIL ' + str(rep.failures())}")
    eqs = find_all(curve, params)
    for e in eqs:
        print(f"   P = {e.P:.12f}  f'(P) = {e.f_prime:+.4e}  {e.classification}")
    oracle = oracle_scan(curve, params)
    print(f"   oracle agrees: {len(oracle) == eqs.n_crossings}")
    tr = integrate(curve, params, args.P0, t_end=40.0, dt=1e-2)
    print(f"   trajectory from P0 = {args.P0}: P(40) = {tr.final:.10f}")
