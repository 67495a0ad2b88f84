"""Ascending gradient flow of the log Morse function.

Trajectories are integrated with an embedded Dormand-Prince 5(4) pair until
the gradient norm collapses, then finished with a few Newton steps and
matched against the known critical points.  A trajectory never leaves its
region: the sign vector is checked at every accepted step and a step that
would cross a hypersurface is rejected.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FlowBreakdownError, OnHypersurfaceError
from .homotopy import CriticalPoint
from .morse import HYPERSURFACE_FLOOR, MorseFunction, eval_log_g

RTOL = 1e-8
ATOL = 1e-10
GRAD_TRIGGER = 1e-7
MATCH_TOL = 1e-5
STEP_BUDGET = 1_000_000

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_ERR = _B5 - _B4


def fast_sigma(m: MorseFunction, x: np.ndarray) -> tuple[int, ...] | None:
    """Sign vector via the compiled evaluator; None when too close to a zero set."""
    vals = m._vals.eval(x)[: m.k]
    scale = m._vals.eval_abs(x)[: m.k] + 1e-300
    if np.any(np.abs(vals) < HYPERSURFACE_FLOOR * scale):
        return None
    return tuple(1 if v > 0 else -1 for v in vals)


@dataclass(frozen=True)
class FlowResult:
    """Outcome of one trajectory: the matched critical point, if any."""

    limit_index: int | None
    trajectory_len: int
    final_grad_norm: float
    limit_point: np.ndarray | None = None

    @property
    def matched(self) -> bool:
        return self.limit_index is not None


def _newton_polish(m: MorseFunction, x: np.ndarray, max_iter: int = 15):
    """A few Newton steps on the gradient system; None when they go astray."""
    budget = 0.05 * (1.0 + np.linalg.norm(x))
    y = x.copy()
    moved = 0.0
    for _ in range(max_iter):
        lg = eval_log_g(m, y, want_hessian=True)
        gn = float(np.linalg.norm(lg.grad))
        if gn < 1e-10:
            return y
        try:
            step = np.linalg.solve(lg.hessian, -lg.grad)
        except np.linalg.LinAlgError:
            return None
        moved += float(np.linalg.norm(step))
        if moved > budget or not np.all(np.isfinite(step)):
            return None
        y = y + step
    lg = eval_log_g(m, y)
    return y if float(np.linalg.norm(lg.grad)) < 1e-9 else None


def _match(crit: list[CriticalPoint], y: np.ndarray) -> int | None:
    best, best_d = None, np.inf
    for i, c in enumerate(crit):
        d = float(np.linalg.norm(c.x - y))
        if d < best_d:
            best, best_d = i, d
    if best is not None and best_d < MATCH_TOL * (1.0 + np.linalg.norm(crit[best].x)):
        return best
    return None


def flow_to_critical_point(
    m: MorseFunction,
    x0,
    crit: list[CriticalPoint],
    step_budget: int = STEP_BUDGET,
) -> FlowResult:
    """Integrate the ascending flow from x0 and identify its limit.

    Raises FlowBreakdownError when the trajectory is forced against a
    hypersurface; returns an unmatched result when the step budget runs out.
    """
    if not crit:
        raise ValueError("no critical points to match against")
    x = np.asarray(x0, dtype=np.float64).copy()
    sigma0 = fast_sigma(m, x)
    if sigma0 is None:
        raise OnHypersurfaceError("flow start point is too close to a hypersurface")
    lg = eval_log_g(m, x)
    value0 = lg.value
    start_norm = float(np.linalg.norm(x))

    def try_finish(y, grad_norm, steps):
        polished = _newton_polish(m, y)
        if polished is None:
            return None
        idx = _match(crit, polished)
        if idx is None:
            return None
        target = crit[idx]
        within_start = np.linalg.norm(np.asarray(x0, dtype=float) - target.x) < (
            MATCH_TOL * (1.0 + np.linalg.norm(target.x))
        )
        if not within_start and not target.log_g > value0:
            return None
        return FlowResult(idx, steps, grad_norm, polished)

    k = np.empty((7, m.n))
    k[0] = lg.grad
    grad_norm = float(np.linalg.norm(k[0]))
    h = min(1e-3 * (1.0 + np.linalg.norm(x)) / (1.0 + grad_norm), 1e3)
    armed = grad_norm >= 10 * GRAD_TRIGGER
    shrink_fails = 0
    stalled = 0
    polish_attempts = 0

    for step in range(1, step_budget + 1):
        # primary finish trigger: the gradient has collapsed
        if armed and grad_norm < GRAD_TRIGGER:
            result = try_finish(x, grad_norm, step)
            if result is not None:
                return result
            armed = False
        # fallback trigger: the trajectory has stopped moving, which happens
        # when the integrator orbits a maximum inside its own tolerance band
        # without pushing the gradient under the primary threshold
        if stalled >= 5:
            stalled = 0
            polish_attempts += 1
            result = try_finish(x, grad_norm, step)
            if result is not None:
                return result
            if polish_attempts >= 100:
                return FlowResult(None, step, grad_norm, None)

        rejected = False
        try:
            for i in range(1, 7):
                xi = x + h * (k[:i].T @ _A[i])
                k[i] = eval_log_g(m, xi).grad
            x_new = x + h * (k.T @ _B5)
            err_vec = h * (k.T @ _ERR)
            scale = ATOL + RTOL * np.maximum(np.abs(x), np.abs(x_new))
            err = float(np.sqrt(np.mean((err_vec / scale) ** 2)))
        except OnHypersurfaceError:
            rejected = True
            err = np.inf

        if not rejected and err <= 1.0 and np.all(np.isfinite(x_new)):
            if fast_sigma(m, x_new) == sigma0:
                move = float(np.linalg.norm(x_new - x))
                stalled = stalled + 1 if move < 1e-8 * (1.0 + np.linalg.norm(x)) else 0
                x = x_new
                k[0] = k[6]  # first-same-as-last stage
                grad_norm = float(np.linalg.norm(k[0]))
                if grad_norm >= 10 * GRAD_TRIGGER:
                    armed = True
                h *= min(5.0, max(0.2, 0.9 * err ** -0.2 if err > 0 else 5.0))
                shrink_fails = 0
                continue
            rejected = True

        h *= 0.5 if rejected else max(0.2, 0.9 * err ** -0.2)
        shrink_fails += 1
        if h < 1e-14 * (1.0 + np.linalg.norm(x)) or shrink_fails > 200:
            raise FlowBreakdownError(
                "trajectory pinned against a hypersurface "
                f"(|x| = {np.linalg.norm(x):.3e}, start |x| = {start_norm:.3e})"
            )

    return FlowResult(None, step_budget, grad_norm, None)
