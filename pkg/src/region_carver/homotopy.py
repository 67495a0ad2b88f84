"""Complex critical points of the log Morse function.

The rational critical equations are cleared of denominators into polynomial
form and every isolated solution is found with a straight-line total-degree
homotopy: deterministic path count, no stopping heuristic.  Endpoints are
Newton-refined, extraneous solutions created by the clearing are discarded,
and the survivors are checked against the generating-function degree bound.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .eigen import jacobi_eigh, normalize_sign
from .errors import AmbiguousSignError, RegenerateQError, SolverFailureError
from .fastpoly import PolyBlock
from .morse import HYPERSURFACE_FLOOR, MorseFunction, eval_log_g
from .polynomial import Arrangement, Polynomial, product

EXTRANEOUS_FLOOR = 1e-9
REALNESS_TOL = 1e-8
DEDUP_TOL = 1e-6
DEGENERACY_FLOOR = 1e-8
TRACK_TOL = 1e-10
MIN_STEP = 1e-14
MAX_STEP = 0.1
# a projective endpoint with leading coordinate below this is at infinity
INFINITY_COORD = 1e-10
PATH_FAILURE_BUDGET = 0.05


@dataclass(frozen=True)
class CriticalSystem:
    """Cleared-denominator polynomial form of the critical equations."""

    equations: tuple[Polynomial, ...]
    bezout: int
    source: MorseFunction


@dataclass
class PathTrackRecord:
    start: np.ndarray
    end: np.ndarray | None
    status: str  # converged | diverged | failed
    steps: int
    newton_residual: float
    # where tracking stopped, kept for the retracking heuristics
    final_x: np.ndarray | None = None
    final_tau: float = 0.0


@dataclass(frozen=True)
class CriticalPoint:
    """A real nondegenerate critical point with its Morse data."""

    x: np.ndarray
    log_g: float
    index: int
    eigenvalues: np.ndarray
    unstable_eigenvectors: tuple[np.ndarray, ...]
    sigma: tuple[int, ...]


@dataclass(frozen=True)
class MLDegreeBound:
    degrees: tuple[int, ...]
    n: int
    bound: int


def ml_degree_bound(degrees, n: int) -> MLDegreeBound:
    """Exact coefficient of z^n in (1-z)^n / (prod(1 - d_i z) * (1 - 2z)).

    Computed by integer truncated power series, so the result carries no
    floating-point error.
    """
    degrees = tuple(int(d) for d in degrees)
    if any(d < 1 for d in degrees):
        raise ValueError("degrees must be positive")
    numerator = [(-1) ** j * math.comb(n, j) for j in range(n + 1)]
    denominator = [1]
    for d in list(degrees) + [2]:
        denominator = _poly_mul_trunc(denominator, [1, -d], n)
    series = [0] * (n + 1)
    for m in range(n + 1):
        acc = numerator[m] if m < len(numerator) else 0
        for j in range(1, min(m, len(denominator) - 1) + 1):
            acc -= denominator[j] * series[m - j]
        series[m] = acc
    return MLDegreeBound(degrees=degrees, n=n, bound=series[n])


def _poly_mul_trunc(a: list[int], b: list[int], order: int) -> list[int]:
    out = [0] * (order + 1)
    for i, ai in enumerate(a[: order + 1]):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            if i + j <= order:
                out[i + j] += ai * bj
    return out


def assemble_critical_system(m: MorseFunction) -> CriticalSystem:
    """Expand the gradient-vanishing conditions into n polynomials.

    Equation i is the gradient component multiplied through by q and every
    f_j, so its zero set adds the loci where some f_j or q vanishes; those
    extraneous solutions are filtered after tracking.
    """
    arr = m.arrangement
    n, k = arr.n, arr.k
    polys = list(arr.polys)
    # prefix/suffix products give each "product with one factor removed"
    prefix = [None] * (k + 1)
    prefix[0] = product([], n)
    for j in range(k):
        prefix[j + 1] = prefix[j] * polys[j]
    suffix = [None] * (k + 1)
    suffix[k] = product([], n)
    for j in range(k - 1, -1, -1):
        suffix[j] = polys[j] * suffix[j + 1]
    full = prefix[k]

    equations = []
    for i in range(n):
        eq = (-float(m.t)) * m.q.differentiate(i) * full
        for j in range(k):
            eq = eq + float(m.s[j]) * polys[j].differentiate(i) * m.q * (prefix[j] * suffix[j + 1])
        if eq.is_zero():
            raise RegenerateQError("critical equation vanished identically")
        equations.append(eq)
    bezout = 1
    for eq in equations:
        bezout *= int(eq.degree())
    return CriticalSystem(equations=tuple(equations), bezout=bezout, source=m)


# ---------------------------------------------------------------------------
# Total-degree path tracking
# ---------------------------------------------------------------------------


class _TrackedSystem:
    """Equilibrated target system with compiled value/Jacobian blocks.

    Badly mixed coefficient magnitudes (the probe-hyperplane systems mix
    O(delta) and O(1) terms and have solutions out at O(1/delta)) derail
    tracking, so the variables are rescaled x_i = s_i * v_i with log-scales
    chosen by least squares to flatten the coefficient magnitudes.  All
    tracking happens in v; ``to_original`` maps endpoints back.
    """

    def __init__(self, equations: tuple[Polynomial, ...]):
        self.n = len(equations)
        self.var_scale = _equilibration_scales(equations, self.n)
        scaled = []
        for eq in equations:
            terms = {
                e: c * float(np.prod(self.var_scale**np.asarray(e)))
                for e, c in eq.terms.items()
            }
            top = max(abs(c) for c in terms.values())
            scaled.append(Polynomial(eq.n, {e: c / top for e, c in terms.items()}))
        self.equations = scaled
        self.degrees = np.array([int(eq.degree()) for eq in self.equations])
        self.values = PolyBlock(self.equations, self.n)
        self.jac = PolyBlock(
            [eq.differentiate(j) for eq in self.equations for j in range(self.n)],
            self.n,
        )
        # homogeneous form for projective tracking: solutions of any magnitude
        # stay well-scaled on the unit sphere of C^{n+1}
        hom = [eq.homogenize() for eq in self.equations]
        self.hvalues = PolyBlock(hom, self.n + 1)
        self.hjac = PolyBlock(
            [heq.differentiate(j) for heq in hom for j in range(self.n + 1)],
            self.n + 1,
        )

    def to_original(self, v: np.ndarray) -> np.ndarray:
        return self.var_scale * v

    def from_original(self, x: np.ndarray) -> np.ndarray:
        return x / self.var_scale

    def F(self, x: np.ndarray) -> np.ndarray:
        return self.values.eval(x)

    def J(self, x: np.ndarray) -> np.ndarray:
        return self.jac.eval(x).reshape(self.n, self.n)

    def HF(self, X: np.ndarray) -> np.ndarray:
        return self.hvalues.eval(X)

    def HJ(self, X: np.ndarray) -> np.ndarray:
        return self.hjac.eval(X).reshape(self.n, self.n + 1)

    def residual(self, x: np.ndarray, fx: np.ndarray | None = None) -> float:
        """Backward-error style residual: |F_i| over the term magnitude scale."""
        if fx is None:
            fx = self.F(x)
        scale = 1.0 + self.values.eval_abs(x)
        return float(np.max(np.abs(fx) / scale))

    def hresidual(self, X: np.ndarray, fx: np.ndarray | None = None) -> float:
        """Backward-relative residual of the homogenized system."""
        if fx is None:
            fx = self.HF(X)
        scale = self.hvalues.eval_abs(X) + 1e-300
        return float(np.max(np.abs(fx) / scale))


def _equilibration_scales(equations, n: int) -> np.ndarray:
    """Least-squares variable scales flattening coefficient magnitudes.

    Minimizes the spread of log|c| + e . log(s) + r_j over all terms of all
    equations in the free per-variable scales s and per-equation factors r_j.
    """
    rows = []
    rhs = []
    for j, eq in enumerate(equations):
        for e, c in eq.terms.items():
            row = np.zeros(n + len(equations))
            row[:n] = e
            row[n + j] = 1.0
            rows.append(row)
            rhs.append(-np.log(abs(c)))
    A = np.asarray(rows)
    b = np.asarray(rhs)
    solution, *_ = np.linalg.lstsq(A, b, rcond=None)
    log_scale = np.clip(solution[:n], -23.0, 23.0)
    return np.exp(log_scale)


@np.errstate(over="ignore", invalid="ignore", divide="ignore")
def _refine(system: _TrackedSystem, x: np.ndarray, max_iter: int = 12) -> tuple[np.ndarray, float]:
    """Newton-polish an endpoint on the scaled target system."""
    best_x, best_res = x, system.residual(x)
    for _ in range(max_iter):
        if best_res < 1e-14:
            break
        try:
            step = np.linalg.solve(system.J(best_x), -system.F(best_x))
        except np.linalg.LinAlgError:
            break
        candidate = best_x + step
        if not np.all(np.isfinite(candidate)):
            break
        res = system.residual(candidate)
        if res >= best_res:
            break
        best_x, best_res = candidate, res
    return best_x, best_res


def _refine_projective(
    system: _TrackedSystem, X: np.ndarray, max_iter: int = 15
) -> tuple[np.ndarray, float]:
    """Bordered Newton on the homogenized target system, on the unit sphere."""
    best_X = X / np.linalg.norm(X)
    best_res = system.hresidual(best_X)
    for _ in range(max_iter):
        if best_res < 1e-15:
            break
        M = np.vstack([system.HJ(best_X), np.conj(best_X)])
        rhs = np.concatenate([-system.HF(best_X), [0.0]])
        try:
            step = np.linalg.solve(M, rhs)
        except np.linalg.LinAlgError:
            break
        candidate = best_X + step
        if not np.all(np.isfinite(candidate.view(np.float64))):
            break
        candidate = candidate / np.linalg.norm(candidate)
        res = system.hresidual(candidate)
        if res >= best_res:
            break
        best_X, best_res = candidate, res
    return best_X, best_res


@np.errstate(over="ignore", invalid="ignore", divide="ignore")
def _track_path(
    system: _TrackedSystem,
    start: np.ndarray,
    gamma: complex,
    start_constants: np.ndarray,
    tol: float = TRACK_TOL,
    max_step: float = MAX_STEP,
    leash_factor: float = 0.5,
) -> PathTrackRecord:
    """Track one solution path of the straight-line homotopy from 0 to 1.

    The homotopy is tracked in projective space: points live on the unit
    sphere of C^{n+1} and the tangent/Newton systems are bordered with the
    conjugate of the current point.  This keeps solutions of any magnitude
    equally well conditioned; endpoints with a tiny leading coordinate are
    the solutions at infinity.  RK4 predictor, at most three Newton
    corrections per step, multiplicative step control.
    """
    n = system.n
    D = system.degrees

    def start_vals(X):
        return X[1:] ** D - start_constants * X[0] ** D

    def start_jac(X):
        js = np.zeros((n, n + 1), dtype=np.complex128)
        js[:, 0] = -start_constants * D * X[0] ** (D - 1)
        js[np.arange(n), np.arange(1, n + 1)] = D * X[1:] ** (D - 1)
        return js

    def homotopy(X, tau):
        return (1.0 - tau) * gamma * start_vals(X) + tau * system.HF(X)

    def homotopy_jac(X, tau):
        return (1.0 - tau) * gamma * start_jac(X) + tau * system.HJ(X)

    def bordered_solve(X, tau, rhs_top):
        M = np.vstack([homotopy_jac(X, tau), np.conj(X)])
        return np.linalg.solve(M, np.concatenate([rhs_top, [0.0]]))

    def rhs(X, tau):
        # tangent from d/dtau H(X(tau), tau) = 0, moving orthogonally to X
        return bordered_solve(X, tau, gamma * start_vals(X) - system.HF(X))

    def h_residual(X, tau, hval):
        scale = (1.0 - tau) * (
            np.abs(X[1:]) ** D + np.abs(start_constants) * np.abs(X[0]) ** D
        ) + tau * system.hvalues.eval_abs(X) + 1e-300
        return np.max(np.abs(hval) / scale)

    X = np.concatenate([[1.0 + 0.0j], start.astype(np.complex128)])
    X = X / np.linalg.norm(X)
    tau = 0.0
    h = min(0.05, max_step)
    steps = 0
    consecutive = 0
    max_steps = 20_000
    history: list[tuple[float, float]] = []  # (log(1-tau), log|X_0|) at accepts

    def finish(status, steps, residual=float("inf")):
        x0 = X[0]
        affine = X[1:] / x0 if abs(x0) > 1e-300 else None
        return PathTrackRecord(start, None, status, steps, residual, affine, tau)

    def heading_to_infinity() -> bool:
        # valuation estimate: |X_0| ~ C (1-tau)^alpha with alpha > 0 means the
        # affine point blows up; slow blowups stall before X_0 becomes tiny
        if abs(X[0]) < 1e-6:
            return True
        if len(history) < 3:
            return False
        u_old, v_old = history[0]
        u_new, v_new = history[-1]
        if u_old - u_new < 2.0:
            return False
        alpha = (v_old - v_new) / (u_old - u_new)
        return alpha > 0.02

    while tau < 1.0 and steps < max_steps:
        steps += 1
        h = min(h, 1.0 - tau)
        ok = False
        try:
            k1 = rhs(X, tau)
            k2 = rhs(X + 0.5 * h * k1, tau + 0.5 * h)
            k3 = rhs(X + 0.5 * h * k2, tau + 0.5 * h)
            k4 = rhs(X + h * k3, tau + h)
            Xp = X + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            if np.all(np.isfinite(Xp.view(np.float64))):
                tau_next = tau + h
                predicted = Xp
                for it in range(4):
                    hval = homotopy(Xp, tau_next)
                    if h_residual(Xp, tau_next, hval) < tol:
                        ok = True
                        break
                    if it == 3:
                        break
                    Xp = Xp + bordered_solve(Xp, tau_next, -hval)
                    if not np.all(np.isfinite(Xp.view(np.float64))):
                        break
                # corrector must stay in the predictor's neighborhood, else the
                # step likely hopped onto a nearby path
                if ok:
                    drift = np.linalg.norm(Xp - predicted)
                    leash = leash_factor * np.linalg.norm(predicted - X) + 1e-10
                    if drift > leash:
                        ok = False
        except np.linalg.LinAlgError:
            ok = False

        if ok:
            X = Xp / np.linalg.norm(Xp)
            tau = tau_next
            if tau < 1.0 and abs(X[0]) > 1e-300:
                u = np.log(1.0 - tau)
                # checkpoint every half e-fold of 1-tau so the valuation fit
                # spans the whole approach, not just the last few crawl steps
                if not history or u < history[-1][0] - 0.5:
                    history.append((u, np.log(abs(X[0]))))
                    if len(history) > 24:
                        history.pop(0)
            consecutive += 1
            if consecutive >= 4:
                h = min(h * 1.5, max_step)
                consecutive = 0
        else:
            h *= 0.5
            consecutive = 0
            if h < MIN_STEP:
                if heading_to_infinity():
                    return finish("diverged", steps)
                return finish("failed", steps)

    if tau < 1.0:
        return finish("failed", steps)

    X, hres = _refine_projective(system, X)
    if hres >= TRACK_TOL:
        return finish("failed", steps, hres)
    if abs(X[0]) < INFINITY_COORD:
        return finish("diverged", steps, hres)
    affine = X[1:] / X[0]
    # a final affine polish sharpens well-conditioned endpoints
    refined, res = _refine(system, affine)
    if res < TRACK_TOL:
        return PathTrackRecord(start, refined, "converged", steps, res, refined, 1.0)
    return PathTrackRecord(
        start, affine, "converged", steps, system.residual(affine), affine, 1.0
    )


def solve_critical_points(
    cs: CriticalSystem, seed: int
) -> tuple[list[np.ndarray], list[PathTrackRecord]]:
    """All isolated complex solutions of the cleared critical system.

    Tracks the full Bezout count of paths from a random total-degree start
    system, refines and deduplicates endpoints, and discards artifacts of
    denominator clearing.  The returned list is canonically sorted, so the
    output does not depend on path evaluation order.
    """
    system = _TrackedSystem(cs.equations)
    n = system.n
    rng = np.random.default_rng([seed & 0x7FFFFFFF, 0x5EED])
    gamma = complex(np.exp(2j * np.pi * rng.uniform()))
    radii = rng.uniform(0.5, 1.5, size=n)
    angles = rng.uniform(0.0, 2.0 * np.pi, size=n)
    start_constants = radii * np.exp(1j * angles)

    D = system.degrees
    base_roots = [
        start_constants[i] ** (1.0 / D[i])
        * np.exp(2j * np.pi * np.arange(D[i]) / D[i])
        for i in range(n)
    ]
    records: list[PathTrackRecord] = []
    for combo in itertools.product(*base_roots):
        start = np.array(combo, dtype=np.complex128)
        records.append(_track_path(system, start, gamma, start_constants))
    assert len(records) == cs.bezout

    # Retrack suspicious paths with tighter control.  A nonsingular isolated
    # target solution is the endpoint of exactly one path, so several paths
    # claiming the same genuine solution mean one of them jumped tracks; an
    # endgame stall at moderate norm usually means the same thing.
    for attempt, (tol, step, leash) in enumerate(
        [(1e-12, 0.02, 0.25), (1e-13, 0.004, 0.1)]
    ):
        suspicious = _suspicious_paths(cs.source, system, records)
        if not suspicious:
            break
        for i in suspicious:
            records[i] = _track_path(
                system, records[i].start, gamma, start_constants,
                tol=tol, max_step=step, leash_factor=leash,
            )

    # stalls pinned against the singular clearing loci are expected sinks of
    # excess paths, not tracking failures
    for r in records:
        if r.status == "failed" and r.final_x is not None:
            norm = np.linalg.norm(r.final_x)
            if np.isfinite(norm) and _on_clearing_locus(
                cs.source, system.to_original(r.final_x)
            ):
                r.status = "diverged"

    n_failed = sum(1 for r in records if r.status == "failed")
    if n_failed > PATH_FAILURE_BUDGET * len(records):
        err = SolverFailureError(f"{n_failed} of {len(records)} paths failed")
        err.records = records
        raise err

    endpoints = [r for r in records if r.status == "converged"]
    survivors = _dedup(endpoints)
    survivors = [
        r for r in survivors
        if not _is_extraneous(cs.source, system.to_original(r.end))
    ]

    # constants contribute a factor 1 to the generating function, same as absent
    bound = ml_degree_bound(
        [d for d in cs.source.arrangement.degrees() if d >= 1], n
    ).bound
    if len(survivors) > bound:
        raise RegenerateQError(
            f"found {len(survivors)} solutions above the degree bound {bound}"
        )
    for r in survivors:
        jac = system.J(r.end)
        sv = np.linalg.svd(jac, compute_uv=False)
        if sv[-1] < 1e-12 * max(sv[0], 1.0):
            raise RegenerateQError("singular Jacobian at a refined solution")

    points = [system.to_original(r.end) for r in survivors]
    for r in records:
        # expose all diagnostic coordinates in the problem's own variables
        if r.end is not None:
            r.end = system.to_original(r.end)
        if r.final_x is not None:
            r.final_x = system.to_original(r.final_x)
        r.start = system.to_original(r.start)
    return points, records


def _suspicious_paths(
    m: MorseFunction, system: _TrackedSystem, records: list[PathTrackRecord]
) -> list[int]:
    """Indices of paths that may have jumped onto a neighboring track."""
    converged = [(i, r) for i, r in enumerate(records) if r.status == "converged"]
    claims: dict[int, list[int]] = {}
    reps: list[np.ndarray] = []
    for i, r in converged:
        for j, rep in enumerate(reps):
            if np.linalg.norm(r.end - rep) < DEDUP_TOL * (1.0 + np.linalg.norm(rep)):
                claims[j].append(i)
                break
        else:
            reps.append(r.end)
            claims[len(reps) - 1] = [i]
    out = []
    for j, members in claims.items():
        if len(members) > 1 and not _is_extraneous(m, system.to_original(reps[j])):
            out.extend(members)
    for i, r in enumerate(records):
        if r.status != "converged" and r.final_x is not None:
            norm = np.linalg.norm(r.final_x)
            # stalls heading into the singular clearing loci are expected and
            # cheap to recognize; everything else deserves a careful retrack
            if (
                np.isfinite(norm)
                and norm < 1e8
                and r.final_tau > 0.5
                and not _on_clearing_locus(m, system.to_original(r.final_x))
            ):
                out.append(i)
    return sorted(set(out))


def _canonical_key(x: np.ndarray):
    return tuple(
        (round(float(np.real(c)), 9), round(float(np.imag(c)), 9)) for c in x
    )


def _dedup(records: list[PathTrackRecord]) -> list[PathTrackRecord]:
    records = sorted(records, key=lambda r: _canonical_key(r.end))
    m = len(records)
    parent = list(range(m))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(m):
        for j in range(i + 1, m):
            xi, xj = records[i].end, records[j].end
            tol = DEDUP_TOL * (1.0 + max(np.linalg.norm(xi), np.linalg.norm(xj)))
            if np.linalg.norm(xi - xj) < tol:
                parent[find(i)] = find(j)
    groups: dict[int, list[PathTrackRecord]] = {}
    for i, r in enumerate(records):
        groups.setdefault(find(i), []).append(r)
    best = [min(g, key=lambda r: r.newton_residual) for g in groups.values()]
    return sorted(best, key=lambda r: _canonical_key(r.end))


def _on_clearing_locus(m: MorseFunction, x: np.ndarray) -> bool:
    """True when some factor or the denominator has cancelled to nothing."""
    vals = m._vals.eval(x)
    scale = m._vals.eval_abs(x) + 1e-300
    return bool(np.any(np.abs(vals) < EXTRANEOUS_FLOOR * scale))


def _rational_gradient(m: MorseFunction, x: np.ndarray):
    vals = m._vals.eval(x)
    grads = m._grads.eval(x).reshape(m.k + 1, m.n)
    ratio = grads / vals[:, None]
    return ratio.T @ m._weights, ratio


def _rational_hessian(m: MorseFunction, x: np.ndarray, ratio: np.ndarray) -> np.ndarray:
    n = m.n
    vals = m._vals.eval(x)
    iu = np.triu_indices(n)
    hvals = m._hessians.eval(x).reshape(m.k + 1, -1)
    hessian = np.zeros((n, n), dtype=np.complex128)
    for idx in range(m.k + 1):
        hp = np.zeros((n, n), dtype=np.complex128)
        hp[iu] = hvals[idx]
        hp.T[iu] = hvals[idx]
        hessian += m._weights[idx] * (
            hp / vals[idx] - np.outer(ratio[idx], ratio[idx])
        )
    return hessian


@np.errstate(over="ignore", invalid="ignore", divide="ignore")
def _is_extraneous(m: MorseFunction, x: np.ndarray) -> bool:
    """True when the endpoint is an artifact of denominator clearing.

    Three tests of increasing strength.  Value cancellation catches points
    sitting on the cleared loci.  The rational gradient catches Newton
    stalls near those loci.  Finally the point must be a genuine attractor
    of Newton on the rational system itself: near-infinity artifacts pass
    the residual tests with values that only look converged, but Newton
    throws them across the sky.
    """
    if _on_clearing_locus(m, x):
        return True
    residual, ratio = _rational_gradient(m, x)
    scale = 1.0 + np.abs(ratio.T) @ np.abs(m._weights)
    rel = np.abs(residual) / scale
    if not np.all(np.isfinite(rel)) or np.max(rel) > 1e-6:
        return True
    # rational Newton must stay put
    y = x.astype(np.complex128)
    budget = 1e-6 * (1.0 + np.linalg.norm(x))
    moved = 0.0
    for _ in range(3):
        grad, ratio = _rational_gradient(m, y)
        try:
            step = np.linalg.solve(_rational_hessian(m, y, ratio), -grad)
        except np.linalg.LinAlgError:
            return True
        if not np.all(np.isfinite(step.view(np.float64))):
            return True
        moved += float(np.linalg.norm(step))
        if moved > budget:
            return True
        y = y + step
    return False


def is_real_point(x: np.ndarray) -> bool:
    return float(np.max(np.abs(np.imag(x)))) < REALNESS_TOL * (
        1.0 + float(np.linalg.norm(x))
    )


def sign_vector(arr: Arrangement, x) -> tuple[int, ...]:
    """Componentwise signs of the arrangement polynomials at a real point."""
    x = np.asarray(x, dtype=np.float64)
    sigma = []
    for p in arr.polys:
        v = p.evaluate(x)
        scale = sum(
            abs(c) * float(np.prod(np.abs(x) ** np.asarray(e)))
            for e, c in p.terms.items()
        )
        if abs(v) < HYPERSURFACE_FLOOR * (scale + 1e-300):
            raise AmbiguousSignError("evaluation too close to zero for a sign")
        sigma.append(1 if v > 0 else -1)
    return tuple(sigma)


def classify_critical_point(m: MorseFunction, x) -> CriticalPoint:
    """Morse data at a real critical point: index, eigenpairs, sign vector.

    The Hessian of the log function is eigendecomposed with cyclic Jacobi
    rotations; an eigenvalue below the degeneracy floor means the random
    quadric failed to make the function Morse and the caller should redraw.
    """
    x = np.asarray(x, dtype=np.float64)
    lg = eval_log_g(m, x, want_hessian=True)
    grad_norm = float(np.linalg.norm(lg.grad))
    if grad_norm > 1e-8 * (1.0 + float(np.linalg.norm(x))):
        raise ValueError(f"point is not critical: |grad| = {grad_norm:.3e}")
    eigenvalues, vectors = jacobi_eigh(lg.hessian)
    spectral_radius = float(np.max(np.abs(eigenvalues)))
    if float(np.min(np.abs(eigenvalues))) < DEGENERACY_FLOOR * spectral_radius:
        raise RegenerateQError("degenerate Hessian at a critical point")
    positive = eigenvalues > 0
    unstable = tuple(
        normalize_sign(vectors[:, i] / np.linalg.norm(vectors[:, i]))
        for i in range(len(eigenvalues))
        if positive[i]
    )
    return CriticalPoint(
        x=x,
        log_g=lg.value,
        index=int(np.count_nonzero(positive)),
        eigenvalues=eigenvalues,
        unstable_eigenvectors=unstable,
        sigma=sign_vector(m.arrangement, x),
    )
