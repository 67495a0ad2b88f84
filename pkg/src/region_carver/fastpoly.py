"""Vectorized batch evaluation of groups of sparse polynomials.

The solvers evaluate the same fixed polynomials at millions of points, so
terms of a whole group are packed into flat numpy arrays once and evaluated
with a single power/product/segment-sum pass per call.
"""

from __future__ import annotations

import numpy as np

from .polynomial import Polynomial


class PolyBlock:
    """A fixed list of polynomials evaluated together at one point."""

    def __init__(self, polys: list[Polynomial], n: int):
        self.n = n
        self.count = len(polys)
        exps: list[tuple[int, ...]] = []
        coefs: list[float] = []
        starts: list[int] = []
        for p in polys:
            starts.append(len(coefs))
            if p.terms:
                for e, c in p.terms.items():
                    exps.append(e)
                    coefs.append(c)
            else:
                exps.append((0,) * n)
                coefs.append(0.0)
        self.exps = np.asarray(exps, dtype=np.int64)
        self.coefs = np.asarray(coefs, dtype=np.float64)
        self.starts = np.asarray(starts, dtype=np.intp)
        # columns where every exponent is zero contribute nothing
        self.active = np.flatnonzero(self.exps.max(axis=0) > 0)

    def eval(self, x: np.ndarray) -> np.ndarray:
        """Values of all polynomials at x (real or complex, shape (n,))."""
        if self.active.size:
            powers = x[self.active][None, :] ** self.exps[:, self.active]
            terms = self.coefs * powers.prod(axis=1)
        else:
            terms = self.coefs.astype(x.dtype) if x.dtype.kind == "c" else self.coefs
        return np.add.reduceat(terms, self.starts)

    def eval_abs(self, x: np.ndarray) -> np.ndarray:
        """Sum of absolute term values: a backward-error scale per polynomial."""
        ax = np.abs(x)
        if self.active.size:
            powers = ax[self.active][None, :] ** self.exps[:, self.active]
            terms = np.abs(self.coefs) * powers.prod(axis=1)
        else:
            terms = np.abs(self.coefs)
        return np.add.reduceat(terms, self.starts)


def derivative_block(polys: list[Polynomial], n: int) -> PolyBlock:
    """Block of all first partials, row-major: d poly_i / d x_j."""
    derivs = [p.differentiate(j) for p in polys for j in range(n)]
    return PolyBlock(derivs, n)
