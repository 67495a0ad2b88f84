"""Morse function for an arrangement complement: product of the |f_i|^{s_i}
over a positive random quadric power, handled throughout in log form.

The log form is what every downstream computation consumes: within a region
the plain function is a positive multiple of its exponential, so critical
points, indices and integral curves agree while overflow of high-degree
products is avoided.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import OnHypersurfaceError
from .fastpoly import PolyBlock
from .polynomial import Arrangement, Polynomial, constant, variable

HYPERSURFACE_FLOOR = 1e-12


@dataclass(frozen=True)
class LogGradient:
    """Value, gradient and (optional) Hessian of log g at a real point."""

    value: float
    grad: np.ndarray
    hessian: np.ndarray | None = None


@dataclass(frozen=True)
class MorseFunction:
    """The arrangement together with the random positive quadric and exponents."""

    arrangement: Arrangement
    q: Polynomial
    s: tuple[int, ...]
    t: int
    rng_seed: int

    def __post_init__(self):
        arr = self.arrangement
        if len(self.s) != arr.k:
            raise ValueError("exponent vector length must equal the number of polynomials")
        if any(si < 1 for si in self.s) or self.t < 1:
            raise ValueError("exponents must be positive integers")
        weighted = sum(si * di for si, di in zip(self.s, arr.degrees()))
        if weighted >= 2 * self.t:
            raise ValueError(
                f"exponents violate the decay condition: sum s_i*deg(f_i) = "
                f"{weighted} must be < 2t = {2 * self.t}"
            )

    @property
    def n(self) -> int:
        return self.arrangement.n

    @property
    def k(self) -> int:
        return self.arrangement.k

    @cached_property
    def _all_polys(self) -> list[Polynomial]:
        return list(self.arrangement.polys) + [self.q]

    @cached_property
    def _degrees(self) -> np.ndarray:
        return np.array([max(int(p.degree()), 0) for p in self._all_polys])

    @cached_property
    def _coef_scales(self) -> np.ndarray:
        # floors are relative to each polynomial's own coefficient magnitude
        return np.array(
            [max(abs(c) for c in p.terms.values()) for p in self._all_polys]
        )

    @cached_property
    def _weights(self) -> np.ndarray:
        # numerator exponents followed by the (negative) denominator exponent
        return np.array([float(si) for si in self.s] + [-float(self.t)])

    @cached_property
    def _vals(self) -> PolyBlock:
        return PolyBlock(self._all_polys, self.n)

    @cached_property
    def _grads(self) -> PolyBlock:
        n = self.n
        return PolyBlock([p.differentiate(j) for p in self._all_polys for j in range(n)], n)

    @cached_property
    def _hessians(self) -> PolyBlock:
        n = self.n
        polys = [
            p.differentiate(i).differentiate(j)
            for p in self._all_polys
            for i in range(n)
            for j in range(i, n)
        ]
        return PolyBlock(polys, n)

    def poly_values(self, x: np.ndarray) -> np.ndarray:
        """Raw values (f_1(x), ..., f_k(x), q(x)) without the floor check."""
        return self._vals.eval(np.asarray(x, dtype=np.float64))


def build_morse_function(
    arr: Arrangement,
    seed: int,
    s: tuple[int, ...] | list[int] | None = None,
    t: int | None = None,
) -> MorseFunction:
    """Draw the seeded positive quadric and fix exponents.

    The quadric is a sum of n+1 squared affine forms with standard Gaussian
    coefficients plus the constant 4, hence strictly positive with margin.
    If omitted, every numerator exponent is 1 and the denominator exponent is
    the smallest integer making the whole function decay at infinity.
    """
    degrees = arr.degrees()
    s = tuple(int(v) for v in s) if s is not None else (1,) * arr.k
    if len(s) != arr.k:
        raise ValueError("exponent vector length must equal the number of polynomials")
    if t is None:
        t = sum(si * di for si, di in zip(s, degrees)) // 2 + 1
    rng = np.random.default_rng(seed)
    coefs = rng.standard_normal((arr.n + 1, arr.n + 1))
    q = constant(arr.n, 4.0)
    for row in coefs:
        form = constant(arr.n, row[0])
        for i in range(arr.n):
            form = form + variable(arr.n, i) * row[i + 1]
        q = q + form * form
    return MorseFunction(arrangement=arr, q=q, s=s, t=int(t), rng_seed=seed)


def eval_log_g(m: MorseFunction, x, want_hessian: bool = False) -> LogGradient:
    """Value, gradient and optionally Hessian of log g at a real point.

    Raises OnHypersurfaceError when some |f_i(x)| falls below the relative
    floor; the caller is responsible for staying inside the complement.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (m.n,):
        raise ValueError(f"point has shape {x.shape}, expected ({m.n},)")
    vals = m._vals.eval(x)
    check_off_hypersurfaces(m, x, vals)

    w = m._weights
    value = float(np.dot(w, np.log(np.abs(vals))))
    grads = m._grads.eval(x).reshape(m.k + 1, m.n)
    ratio = grads / vals[:, None]
    grad = ratio.T @ w

    hessian = None
    if want_hessian:
        n = m.n
        iu = np.triu_indices(n)
        hvals = m._hessians.eval(x).reshape(m.k + 1, -1)
        hessian = np.zeros((n, n))
        for idx in range(m.k + 1):
            hp = np.zeros((n, n))
            hp[iu] = hvals[idx]
            hp.T[iu] = hvals[idx]
            hessian += w[idx] * (hp / vals[idx] - np.outer(ratio[idx], ratio[idx]))
    return LogGradient(value=value, grad=grad, hessian=hessian)


def check_off_hypersurfaces(m: MorseFunction, x: np.ndarray, vals: np.ndarray | None = None) -> np.ndarray:
    """Closeness test against every arrangement hypersurface.

    "Close" means the value has cancelled to twelve digits relative to the
    magnitudes of the individual terms, which stays meaningful whatever the
    coefficient and coordinate scales are.
    """
    if vals is None:
        vals = m._vals.eval(x)
    scale = m._vals.eval_abs(x)[: m.k] + 1e-300
    bad = np.flatnonzero(np.abs(vals[: m.k]) < HYPERSURFACE_FLOOR * scale)
    if bad.size:
        raise OnHypersurfaceError(
            f"point is within floor distance of hypersurface index {int(bad[0])}"
        )
    return vals
