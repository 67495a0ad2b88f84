"""Projective fusion and boundedness classification.

Unbounded regions meet the hyperplane at infinity; which of them join up in
projective space is decided by computing the regions of the arrangement
restricted to that hyperplane (a recursive call in one dimension less),
shooting rays through a representative of each such region, and flowing from
far out on both ends of the ray.  Boundedness additionally probes the two
hyperplanes where the first coordinate equals plus or minus 1/delta: regions
reached from those slabs but never certified from infinity stay "undecided".
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .errors import (
    FlowBreakdownError,
    OnHypersurfaceError,
    RegenerateQError,
    RegionCarverError,
    RootFindingError,
    SolverFailureError,
)
from .flow import flow_to_critical_point
from .homotopy import assemble_critical_system, is_real_point, solve_critical_points
from .morse import MorseFunction
from .polynomial import Arrangement, Polynomial, product
from .regions import RegionsResult, compute_regions

DEFAULT_DELTA = 1e-5
REPRESENTATIVE_FLOOR = 1e-6


# ---------------------------------------------------------------------------
# Univariate roots (Aberth-Ehrlich)
# ---------------------------------------------------------------------------


def roots_of_univariate(p: Polynomial, max_sweeps: int = 200) -> np.ndarray:
    """All complex roots of a nonzero univariate polynomial.

    Simultaneous Aberth-Ehrlich iteration from perturbed-circle starting
    points.  A root is accepted when its residual is small relative to the
    coefficient magnitude at that point or its correction has gone stationary
    (the latter covers clustered/multiple roots, which converge linearly).
    """
    if p.n != 1:
        raise ValueError("polynomial is not univariate")
    if p.is_zero():
        raise ValueError("zero polynomial has no well-defined root set")
    degree = int(p.degree())
    coefs = np.zeros(degree + 1)
    for e, c in p.terms.items():
        coefs[e[0]] = c
    if degree == 0:
        return np.zeros(0, dtype=np.complex128)
    coefs = coefs / coefs[degree]

    radius = 1.0 + float(np.max(np.abs(coefs[:-1])))
    angles = 2.0 * np.pi * np.arange(degree) / degree + 0.7
    z = 0.6 * radius * np.exp(1j * angles)

    powers = np.arange(degree + 1)
    deriv = coefs[1:] * powers[1:]

    def val(zz):
        return np.polyval(coefs[::-1], zz)

    def dval(zz):
        return np.polyval(deriv[::-1], zz)

    def coef_scale(zz):
        return np.polyval(np.abs(coefs[::-1]), np.abs(zz)) + np.abs(coefs[0]) + 1e-300

    converged = np.zeros(degree, dtype=bool)
    for _ in range(max_sweeps):
        if converged.all():
            break
        pv = val(z)
        small = np.abs(pv) < 1e-10 * coef_scale(z)
        converged |= small
        dv = dval(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = pv / dv
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            repulsion = np.sum(1.0 / diff, axis=1) - 1.0
            w = newton / (1.0 - newton * repulsion)
        w = np.where(np.isfinite(w), w, 0.5 * newton)
        w = np.where(np.isfinite(w), w, 0.0)
        stationary = np.abs(w) < 1e-12 * (1.0 + np.abs(z))
        converged |= stationary
        z = np.where(converged, z, z - w)
    else:
        if not converged.all():
            residuals = np.abs(val(z)) / coef_scale(z)
            if np.max(residuals[~converged]) > 1e-6:
                raise RootFindingError(
                    f"root iteration left {int((~converged).sum())} of {degree} "
                    "roots unconverged"
                )
    return z


def cluster_roots(roots: np.ndarray, tol: float = 1e-6) -> list[list[complex]]:
    """Group near-identical roots; each group's size is its multiplicity."""
    remaining = sorted(roots, key=lambda r: (round(r.real, 9), round(r.imag, 9)))
    clusters: list[list[complex]] = []
    for r in remaining:
        for cluster in clusters:
            if abs(r - cluster[0]) < tol * (1.0 + abs(cluster[0])):
                cluster.append(r)
                break
        else:
            clusters.append([r])
    return clusters


# ---------------------------------------------------------------------------
# The hyperplane at infinity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InfinityRepresentative:
    """A sampled point of one region at infinity, with its ray data."""

    point: np.ndarray  # chart coordinates, length n-1
    infinity_region: int
    ray_bound: float  # largest |root| along the ray through (1, point)
    lam: float


@dataclass
class ProjectiveFusion:
    """Partition of the affine region ids into projective regions."""

    groups: list[tuple[int, ...]]
    infinity_representatives: list[InfinityRepresentative]
    visited: set[int] = field(default_factory=set)
    incomplete: bool = False
    warnings: list[str] = field(default_factory=list)

    @property
    def n_projective(self) -> int:
        return len(self.groups)


@dataclass
class BoundednessReport:
    """Status per affine region id: bounded, unbounded, or undecided."""

    statuses: dict[int, str]
    delta: float
    diagnostics: dict[str, Any] = field(default_factory=dict)


def _derive_seed(seed: int, salt: int) -> int:
    return (seed * 1_000_003 + salt) & 0x7FFFFFFF


def _restrict_to_infinity(arr: Arrangement) -> tuple[list[Polynomial], list[str]]:
    """Chart restrictions of the homogenized arrangement, constants dropped."""
    kept: list[Polynomial] = []
    warnings: list[str] = []
    for i, f in enumerate(arr.polys):
        r = f.homogenize().restrict_chart()
        if r.is_zero():
            warnings.append(
                f"factor {i} vanishes identically on the chart at infinity; dropped"
            )
        elif not r.is_constant():
            kept.append(r)
    return kept, warnings


def _representatives_at_infinity(
    res: RegionsResult, seed: int
) -> tuple[list[InfinityRepresentative], list[str], bool]:
    """One index-0 sample per region of the arrangement at infinity."""
    arr = res.arrangement
    warnings: list[str] = []
    incomplete = False
    kept, warn = _restrict_to_infinity(arr)
    warnings.extend(warn)

    if arr.n == 1 or not kept:
        # no hypersurfaces at infinity on this chart: one region, any point
        return (
            [_make_representative(arr, np.zeros(arr.n - 1), 0)],
            warnings,
            incomplete,
        )

    sub = Arrangement(n=arr.n - 1, polys=tuple(kept))
    sub_result = compute_regions(sub, _derive_seed(seed, 0x1F1), )
    reps: list[InfinityRepresentative] = []
    for region in sub_result.regions:
        chosen = None
        for point in region.points:
            if point.index != 0:
                continue
            if _representative_ok(kept, point.x):
                chosen = point.x
                break
        if chosen is None:
            incomplete = True
            warnings.append(
                f"all candidates in infinity region {region.id} sit too close to "
                "the infinity hypersurfaces; fusion may be incomplete"
            )
            continue
        reps.append(_make_representative(arr, chosen, region.id))
    return reps, warnings, incomplete


def _representative_ok(kept: list[Polynomial], point: np.ndarray) -> bool:
    norm = float(np.linalg.norm(point))
    for r in kept:
        d = max(int(r.degree()), 0)
        if abs(r.evaluate(point)) < REPRESENTATIVE_FLOOR * (1.0 + norm**d):
            return False
    return True


def _make_representative(
    arr: Arrangement, point: np.ndarray, region_id: int
) -> InfinityRepresentative:
    direction = np.concatenate(([1.0], point))
    bound = 0.0
    for f in arr.polys:
        ray = f.restrict_ray(direction)
        if ray.is_zero() or ray.is_constant():
            continue
        roots = roots_of_univariate(ray)
        if roots.size:
            bound = max(bound, float(np.max(np.abs(roots))))
    lam = 2.0 * (1.0 + bound)
    return InfinityRepresentative(
        point=point, infinity_region=region_id, ray_bound=bound, lam=lam
    )


def _flow_from(res: RegionsResult, start: np.ndarray) -> int | None:
    """Region id reached by the ascending flow from a start point, if any."""
    try:
        outcome = flow_to_critical_point(res.morse, start, res.critical_points)
    except (FlowBreakdownError, OnHypersurfaceError):
        return None
    if not outcome.matched:
        return None
    return res.region_of_member(outcome.limit_index).id


def _infinity_visits(
    res: RegionsResult, seed: int
) -> tuple[ProjectiveFusion, dict[int, int]]:
    """Run the at-infinity ray flows once; shared by fusion and boundedness."""
    reps, warnings, incomplete = _representatives_at_infinity(res, seed)
    parent = {r.id: r.id for r in res.regions}

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    visited: set[int] = set()
    for rep in reps:
        direction = np.concatenate(([1.0], rep.point))
        hits: list[int] = []
        for sign in (1.0, -1.0):
            start = sign * rep.lam * direction
            region_id = _flow_from(res, start)
            if region_id is None:
                incomplete = True
                warnings.append(
                    f"ray flow from infinity region {rep.infinity_region} "
                    f"(sign {int(sign)}) did not settle"
                )
                continue
            visited.add(region_id)
            hits.append(region_id)
        if len(hits) == 2:
            parent[find(hits[0])] = find(hits[1])

    groups: dict[int, list[int]] = {}
    for r in res.regions:
        groups.setdefault(find(r.id), []).append(r.id)
    fusion = ProjectiveFusion(
        groups=sorted(tuple(sorted(g)) for g in groups.values()),
        infinity_representatives=reps,
        visited=visited,
        incomplete=incomplete,
        warnings=warnings,
    )
    return fusion, parent


def compute_projective_regions(res: RegionsResult, seed: int | None = None) -> ProjectiveFusion:
    """Fuse affine regions that join up across the hyperplane at infinity."""
    if seed is None:
        seed = res.morse.rng_seed
    fusion, _ = _infinity_visits(res, seed)
    res.projective = fusion
    return fusion


# ---------------------------------------------------------------------------
# Boundedness
# ---------------------------------------------------------------------------


def classify_boundedness(
    res: RegionsResult,
    delta: float = DEFAULT_DELTA,
    fusion: ProjectiveFusion | None = None,
    seed: int | None = None,
) -> BoundednessReport:
    """Three-way split of the regions: bounded, unbounded, undecided.

    A region certified from the hyperplane at infinity is unbounded.  A
    region reached only from the probe hyperplanes (first coordinate at
    plus/minus 1/delta) extends beyond the probe box yet could not be
    certified at infinity, so it is left undecided; the same applies to sign
    classes whose probe flows broke down.  Everything else is bounded,
    provided its critical points lie inside the box.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if seed is None:
        seed = res.morse.rng_seed
    if fusion is None:
        fusion = res.projective or compute_projective_regions(res, seed)

    unbounded = set(fusion.visited)
    slab_visited: set[int] = set()
    tainted_sigmas: set[tuple[int, ...]] = set()
    diagnostics: dict[str, Any] = {"slab_points": 0, "slab_flows_failed": 0,
                                   "warnings": list(fusion.warnings)}
    solve_failed = False

    for side in (1.0, -1.0):
        try:
            points, sigmas = _slab_critical_points(res.morse, delta, side, seed)
        except (RegenerateQError, SolverFailureError, RegionCarverError) as err:
            solve_failed = True
            diagnostics["warnings"].append(
                f"probe hyperplane solve failed on side {int(side)}: {err}"
            )
            continue
        diagnostics["slab_points"] += len(points)
        for w, sigma in zip(points, sigmas):
            outcome = _slab_flow(res, delta, side, w)
            if outcome is None:
                diagnostics["slab_flows_failed"] += 1
                tainted_sigmas.add(sigma)
            else:
                slab_visited.add(outcome)

    statuses: dict[int, str] = {}
    box = 1.0 / delta
    for region in res.regions:
        if region.id in unbounded:
            statuses[region.id] = "unbounded"
        elif solve_failed:
            statuses[region.id] = "undecided"
        elif region.id in slab_visited or region.sigma in tainted_sigmas:
            statuses[region.id] = "undecided"
        elif all(abs(p.x[0]) < box for p in region.points):
            statuses[region.id] = "bounded"
        else:
            statuses[region.id] = "undecided"

    res.regions = [
        replace(region, boundedness=statuses[region.id]) for region in res.regions
    ]
    return BoundednessReport(statuses=statuses, delta=delta, diagnostics=diagnostics)


def _chart_critical_points(
    morse: MorseFunction, x0: float, x1: float, seed: int
) -> list[np.ndarray]:
    """Real critical points of the restriction to the chart (x0, x1) fixed."""
    arr = morse.arrangement
    restricted: list[Polynomial] = []
    s_kept: list[int] = []
    for j, f in enumerate(arr.polys):
        h = f.homogenize().substitute({0: x0, 1: x1})
        if h.is_constant():
            if h.constant_value() == 0.0:
                raise RegionCarverError(
                    f"factor {j} vanishes identically on the probe hyperplane"
                )
        else:
            restricted.append(h)
            s_kept.append(morse.s[j])
    q_restricted = morse.q.homogenize().substitute({0: x0, 1: x1})

    if not restricted:
        return [_quadric_minimum(q_restricted)]
    sub = Arrangement(n=arr.n - 1, polys=tuple(restricted))
    sub_morse = MorseFunction(
        arrangement=sub,
        q=q_restricted,
        s=tuple(s_kept),
        t=morse.t,
        rng_seed=seed,
    )
    system = assemble_critical_system(sub_morse)
    solutions, _ = solve_critical_points(system, _derive_seed(seed, 0x51AB))
    return [np.real(p) for p in solutions if is_real_point(p)]


def _slab_critical_points(
    morse: MorseFunction, delta: float, side: float, seed: int
) -> tuple[list[np.ndarray], list[tuple[int, ...]]]:
    """Critical points of the Morse function restricted to one probe plane.

    Works in direction coordinates w with x = (side/delta, w/delta): the
    restriction of the homogenized f to (x0, x1) = (delta, side).  Regions
    tangent to the hyperplane at infinity put restricted critical points out
    at scale 1/delta, so the same plane is solved a second time in the
    zoomed chart (x0, x1) = (delta^2, side*delta) and the solution sets are
    merged.
    """
    arr = morse.arrangement
    restricted: list[Polynomial] = []
    signs_of_dropped: list[tuple[int, float]] = []
    for j, f in enumerate(arr.polys):
        h = f.homogenize().substitute({0: delta, 1: side})
        if h.is_constant():
            value = h.constant_value()
            if value == 0.0:
                raise RegionCarverError(
                    f"factor {j} vanishes identically on the probe hyperplane"
                )
            signs_of_dropped.append((j, value))
        else:
            restricted.append(h)

    points = list(_chart_critical_points(morse, delta, side, seed))
    if arr.n >= 2:
        zoomed = _chart_critical_points(morse, delta * delta, side * delta, seed)
        for u in zoomed:
            w = u / delta
            if all(
                np.linalg.norm(w - p) > 1e-6 * (1.0 + np.linalg.norm(p))
                for p in points
            ):
                points.append(w)

    kept_iter: list[Polynomial] = list(restricted)
    out_points: list[np.ndarray] = []
    out_sigmas: list[tuple[int, ...]] = []
    for w in points:
        sigma: list[int] = [0] * arr.k
        for j, value in signs_of_dropped:
            sigma[j] = 1 if value > 0 else -1
        ok = True
        it = iter(kept_iter)
        norm = float(np.linalg.norm(w))
        for j in range(arr.k):
            if sigma[j] != 0:
                continue
            h = next(it)
            value = h.evaluate(w)
            d = max(int(h.degree()), 0)
            if abs(value) < REPRESENTATIVE_FLOOR * (1.0 + norm**d):
                ok = False
                break
            sigma[j] = 1 if value > 0 else -1
        if ok:
            out_points.append(np.asarray(w, dtype=np.float64))
            out_sigmas.append(tuple(sigma))
    return out_points, out_sigmas


def _quadric_minimum(q: Polynomial) -> np.ndarray:
    """Minimizer of a positive-definite quadric, by one linear solve."""
    n = q.n
    A = np.zeros((n, n))
    b = np.zeros(n)
    for e, c in q.terms.items():
        idx = [i for i, k in enumerate(e) for _ in range(k)]
        if sum(e) == 2:
            i, j = idx
            A[i, j] += c
            A[j, i] += c
        elif sum(e) == 1:
            b[idx[0]] += c
    return np.linalg.solve(A, -b)


def _slab_flow(res: RegionsResult, delta: float, side: float, w: np.ndarray) -> int | None:
    """Flow from just inside the probe plane toward the critical set."""
    direction = np.concatenate(([side], w))
    admissible = 0.0
    ceiling = 1.0 / delta
    for f in res.arrangement.polys:
        ray = f.restrict_ray(direction)
        if ray.is_zero() or ray.is_constant():
            continue
        roots = roots_of_univariate(ray)
        for r in roots:
            if abs(r.imag) < 1e-9 * (1.0 + abs(r)) and 0.0 < r.real < ceiling * (1 - 1e-9):
                admissible = max(admissible, r.real)
    if admissible > 0.0:
        lam = float(np.sqrt(admissible * ceiling))
    else:
        lam = 0.5 * ceiling
    return _flow_from(res, lam * direction)
