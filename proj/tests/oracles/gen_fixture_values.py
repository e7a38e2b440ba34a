#!/usr/bin/env python3
"""Primal reference values for the hand-built fixtures used in the unit tests."""

import numpy as np
from scipy.optimize import brentq

from gen_el_cases import mele_box, primal

ONE_W = np.array([[0.5], [1.5]])
ONE_R = np.array([1.0, 0.0])
ONE_B = [(0.0, 2.0)]

TWO_W = np.array([[0.5, 1.2], [1.5, 0.8], [1.0, 1.6]])
TWO_R = np.array([1.0, 0.0, 1.0])
TWO_B = [(0.0, 2.0), (0.0, 2.0)]


def main():
    print("one-policy fixture")
    loglik, lo, hi = mele_box(ONE_W, ONE_R, ONE_B)
    print(f"  mele loglik {loglik:.12f} box {lo[0]:.12f} {hi[0]:.12f}")
    for v in (0.1, 0.25, 0.5, 0.9):
        print(f"  log_el({v}) = {primal(ONE_W, ONE_R, ONE_B, value=[v])[0]:.12f}")
    f = lambda v: primal(ONE_W, ONE_R, ONE_B, value=[v])[0] - (loglik - 1.0)
    print(f"  superlevel log c = 1: [{brentq(f, 0.02, 0.25, xtol=1e-12):.10f}, "
          f"{brentq(f, 0.25, 0.98, xtol=1e-12):.10f}]")

    print("two-policy fixture")
    loglik, lo, hi = mele_box(TWO_W, TWO_R, TWO_B)
    print(f"  mele loglik {loglik:.12f} lo {lo} hi {hi}")
    for v in ((0.5, 0.7), (0.3, 0.9), (0.6, 0.6)):
        print(f"  log_el({v}) = {primal(TWO_W, TWO_R, TWO_B, value=list(v))[0]:.12f}")
    for d in (-0.2, 0.0, 0.2, 0.5):
        print(f"  log_el_diff({d}) = {primal(TWO_W, TWO_R, TWO_B, diff=d)[0]:.12f}")


if __name__ == "__main__":
    main()
