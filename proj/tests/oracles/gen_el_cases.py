#!/usr/bin/env python3
"""Freezes primal empirical-likelihood values for random micro-datasets.

Each observation keeps its own mass, extra mass may sit on any corner of the
support box, and the program is solved with a conic solver. MELE value ranges
come from a linear program over the corner masses with the data masses fixed.
Output: tests/data/el_primal_cases.json
"""

import itertools
import json
import pathlib

import cvxpy as cp
import numpy as np
from scipy.optimize import linprog

SOLVER_OPTS = dict(tol_gap_abs=1e-11, tol_gap_rel=1e-11, tol_feas=1e-11, max_iter=500)


def corners(bounds):
    axes = [sorted({lo, hi}) for lo, hi in bounds]
    out = []
    for w in itertools.product(*axes):
        for r in (0.0, 1.0):
            out.append((np.array(w), r))
    return out


def primal(w, r, bounds, value=None, diff=None):
    n, l = w.shape
    verts = corners(bounds)
    W = np.array([c[0] for c in verts])
    R = np.array([c[1] for c in verts])
    p = cp.Variable(n, nonneg=True)
    q = cp.Variable(len(verts), nonneg=True)
    cons = [cp.sum(p) + cp.sum(q) == 1]
    for j in range(l):
        cons.append(w[:, j] @ p + W[:, j] @ q == 1)
    if value is not None:
        for j in range(l):
            cons.append((w[:, j] * r) @ p + (W[:, j] * R) @ q == value[j])
    if diff is not None:
        cons.append(((w[:, 1] - w[:, 0]) * r) @ p + ((W[:, 1] - W[:, 0]) * R) @ q == diff)
    prob = cp.Problem(cp.Maximize(cp.sum(cp.log(p))), cons)
    prob.solve(solver="CLARABEL", **SOLVER_OPTS)
    if prob.status not in ("optimal",):
        raise RuntimeError(prob.status)
    return prob.value + n * np.log(n), p.value, W, R


def mele_box(w, r, bounds):
    n, l = w.shape
    loglik, p, W, R = primal(w, r, bounds)
    p = np.maximum(p, 0.0)
    rest = 1.0 - p.sum()
    A = np.vstack([np.ones(len(W)), W.T])
    b = np.concatenate([[rest], 1.0 - w.T @ p])
    lo, hi = [], []
    for j in range(l):
        base = (w[:, j] * r) @ p
        cost = W[:, j] * R
        res_min = linprog(cost, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
        res_max = linprog(-cost, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
        if res_min.status != 0 or res_max.status != 0:
            raise RuntimeError("linprog failed")
        lo.append(base + res_min.fun)
        hi.append(base - res_max.fun)
    return loglik, lo, hi


def main():
    rng = np.random.default_rng(20240601)
    cases = []
    while len(cases) < 50:
        l = 1 if len(cases) < 20 else 2
        n = int(rng.integers(2, 6))
        bounds = [(float(np.round(rng.uniform(0.0, 0.8), 3)), float(np.round(rng.uniform(1.2, 4.0), 3)))
                  for _ in range(l)]
        w = np.array([[np.round(rng.uniform(lo, hi), 4) for lo, hi in bounds] for _ in range(n)])
        r = np.array([float(rng.integers(0, 2)) if rng.uniform() < 0.7 else np.round(rng.uniform(), 4)
                      for _ in range(n)])
        if n >= 3 and rng.uniform() < 0.2:
            w[1], r[1] = w[0], r[0]
        try:
            loglik, lo, hi = mele_box(w, r, bounds)
            values = []
            for _ in range(3):
                v = [float(np.round(rng.uniform(0.05, 0.95), 4)) for _ in range(l)]
                values.append({"v": v, "loglik": primal(w, r, bounds, value=v)[0]})
            diffs = []
            if l == 2:
                for _ in range(3):
                    d = float(np.round(rng.uniform(-0.8, 0.8), 4))
                    diffs.append({"d": d, "loglik": primal(w, r, bounds, diff=d)[0]})
        except RuntimeError:
            continue
        cases.append({"weights": w.tolist(), "rewards": r.tolist(), "bounds": bounds,
                      "mele": {"loglik": loglik, "lo": lo, "hi": hi},
                      "values": values, "diffs": diffs})
    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "el_primal_cases.json"
    out.write_text(json.dumps(cases, indent=1) + "\n")
    print(f"wrote {len(cases)} cases to {out}")


if __name__ == "__main__":
    main()
