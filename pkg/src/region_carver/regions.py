"""Region enumeration: group critical points by sign vector, connect them by
gradient trajectories, and read regions off the connected components.

Within one sign class, a single local maximum means every critical point
belongs to the same region and no trajectories are needed.  Otherwise each
saddle is flowed along its unstable directions and the limits become graph
edges; components of that graph are exactly the regions carrying the sign
class, and the index counts of a component give its Euler characteristic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import FlowBreakdownError, OnHypersurfaceError, RegenerateQError
from .flow import FlowResult, flow_to_critical_point
from .homotopy import (
    CriticalPoint,
    assemble_critical_system,
    classify_critical_point,
    is_real_point,
    ml_degree_bound,
    sign_vector,
    solve_critical_points,
)
from .morse import MorseFunction, build_morse_function
from .polynomial import Arrangement, Polynomial

EDGE_PERTURBATION = 1e-3
DISTINCT_VALUE_TOL = 1e-9
MAX_SEED_RETRIES = 5


@dataclass(frozen=True)
class Region:
    """One connected component of the arrangement complement."""

    id: int
    sigma: tuple[int, ...]
    members: tuple[int, ...]
    points: tuple[CriticalPoint, ...]
    mu: tuple[int, ...]
    chi: int
    boundedness: str = "unknown"

    def sigma_string(self) -> str:
        return "".join("+" if s > 0 else "-" for s in self.sigma)

    def max_log_g(self) -> float:
        return self.points[0].log_g


@dataclass
class RegionsResult:
    """All regions plus the data needed to answer follow-up queries."""

    regions: list[Region]
    morse: MorseFunction
    critical_points: list[CriticalPoint]
    complex_points: list[np.ndarray]
    diagnostics: dict[str, Any] = field(default_factory=dict)
    projective: Any = None

    @property
    def arrangement(self) -> Arrangement:
        return self.morse.arrangement

    def region_of_member(self, member_id: int) -> Region:
        for region in self.regions:
            if member_id in region.members:
                return region
        raise KeyError(f"critical point {member_id} not assigned to any region")


def euler_characteristic(mu) -> int:
    """Alternating sum of the index counts."""
    return int(sum((-1) ** i * int(c) for i, c in enumerate(mu)))


def critical_points_of(region: Region) -> list[CriticalPoint]:
    """Member critical points, best (highest log g) first."""
    return list(region.points)


def compute_regions(
    arr: Arrangement,
    seed: int,
    s: tuple[int, ...] | None = None,
    t: int | None = None,
    q: Polynomial | None = None,
    flow_budget: int = 1_000_000,
    max_retries: int = MAX_SEED_RETRIES,
) -> RegionsResult:
    """Enumerate all regions of the complement of the arrangement.

    Retries with consecutive seeds when the random quadric turns out to be
    non-generic (degenerate Hessians, coinciding critical values, singular
    endpoints).  Passing an explicit ``q`` disables both the random draw and
    the retry loop.
    """
    attempts = 1 if q is not None else max_retries
    last_error: Exception | None = None
    for attempt in range(attempts):
        try:
            return _compute_regions_once(
                arr, seed + attempt, s=s, t=t, q=q, flow_budget=flow_budget,
                retries_used=attempt,
            )
        except RegenerateQError as err:
            last_error = err
    raise RegenerateQError(
        f"no generic quadric found after {attempts} seeds: {last_error}"
    )


def _compute_regions_once(
    arr: Arrangement,
    seed: int,
    s,
    t,
    q,
    flow_budget: int,
    retries_used: int,
) -> RegionsResult:
    if q is not None:
        s_eff = tuple(int(v) for v in s) if s is not None else (1,) * arr.k
        if t is None:
            degrees = arr.degrees()
            t = sum(si * di for si, di in zip(s_eff, degrees)) // 2 + 1
        morse = MorseFunction(arrangement=arr, q=q, s=s_eff, t=int(t), rng_seed=seed)
    else:
        morse = build_morse_function(arr, seed, s=s, t=t)

    system = assemble_critical_system(morse)
    complex_points, records = solve_critical_points(system, seed)

    crit: list[CriticalPoint] = []
    for p in complex_points:
        if is_real_point(p):
            crit.append(classify_critical_point(morse, np.real(p)))
    if not crit:
        raise RegenerateQError("no real critical points found")

    values = sorted(c.log_g for c in crit)
    for a, b in zip(values, values[1:]):
        if abs(b - a) <= DISTINCT_VALUE_TOL:
            raise RegenerateQError("two critical values coincide")

    flow_stats = {"flows": 0, "unmatched": 0, "breakdowns": 0}
    warnings: list[str] = []
    components = _build_sign_class_graphs(morse, crit, flow_budget, flow_stats, warnings)

    regions = _assemble_regions(arr, crit, components)
    bound = ml_degree_bound([d for d in arr.degrees() if d >= 1], arr.n).bound
    if len(regions) > bound:
        raise RegenerateQError(
            f"{len(regions)} regions exceed the critical-point bound {bound}"
        )

    status_counts: dict[str, int] = {}
    for r in records:
        status_counts[r.status] = status_counts.get(r.status, 0) + 1
    diagnostics = {
        "seed": seed,
        "retries": retries_used,
        "bezout_paths": len(records),
        "path_status": status_counts,
        "max_newton_residual": max(
            (r.newton_residual for r in records if r.status == "converged"),
            default=0.0,
        ),
        "n_complex_critical_points": len(complex_points),
        "n_real_critical_points": len(crit),
        "ml_degree_bound": bound,
        "flow": flow_stats,
        "incomplete_graph": flow_stats["unmatched"] > 0 or flow_stats["breakdowns"] > 0,
        "warnings": warnings,
    }
    return RegionsResult(
        regions=regions,
        morse=morse,
        critical_points=crit,
        complex_points=complex_points,
        diagnostics=diagnostics,
    )


def _build_sign_class_graphs(
    morse: MorseFunction,
    crit: list[CriticalPoint],
    flow_budget: int,
    flow_stats: dict,
    warnings: list[str],
) -> list[list[int]]:
    """Connected components over all sign classes, as lists of point ids."""
    groups: dict[tuple[int, ...], list[int]] = {}
    for i, c in enumerate(crit):
        groups.setdefault(c.sigma, []).append(i)

    parent = list(range(len(crit)))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a: int, b: int) -> None:
        parent[find(a)] = find(b)

    for sigma in sorted(groups):
        members = groups[sigma]
        index0 = [i for i in members if crit[i].index == 0]
        if not index0:
            raise RegenerateQError(
                "sign class without a local maximum: solver output incomplete"
            )
        if len(index0) == 1:
            for i in members:
                if i != index0[0]:
                    union(i, index0[0])
            continue
        for i in members:
            point = crit[i]
            if point.index == 0:
                continue
            # saddles flow along both unstable directions; higher-index
            # points along the strongest single one
            directions = [1.0, -1.0] if point.index == 1 else [1.0]
            v = point.unstable_eigenvectors[0]
            eps = EDGE_PERTURBATION * (1.0 + np.linalg.norm(point.x))
            for direction in directions:
                flow_stats["flows"] += 1
                try:
                    result = flow_to_critical_point(
                        morse, point.x + direction * eps * v, crit,
                        step_budget=flow_budget,
                    )
                except (FlowBreakdownError, OnHypersurfaceError) as err:
                    flow_stats["breakdowns"] += 1
                    warnings.append(f"flow breakdown at point {i}: {err}")
                    continue
                if not result.matched:
                    flow_stats["unmatched"] += 1
                    warnings.append(f"flow from point {i} exhausted its budget")
                    continue
                j = result.limit_index
                if crit[j].sigma != sigma:
                    flow_stats["breakdowns"] += 1
                    warnings.append(
                        f"flow from point {i} crossed into another sign class"
                    )
                    continue
                union(i, j)

    components: dict[int, list[int]] = {}
    for i in range(len(crit)):
        components.setdefault(find(i), []).append(i)
    return list(components.values())


def _assemble_regions(
    arr: Arrangement, crit: list[CriticalPoint], components: list[list[int]]
) -> list[Region]:
    drafts = []
    for members in components:
        sigma = crit[members[0]].sigma
        if any(crit[i].sigma != sigma for i in members):
            raise RegenerateQError("mixed sign vectors in one graph component")
        mu = [0] * (arr.n + 1)
        for i in members:
            mu[crit[i].index] += 1
        if mu[0] < 1:
            raise RegenerateQError("region without a local maximum")
        points = tuple(
            sorted((crit[i] for i in members), key=lambda c: -c.log_g)
        )
        ordered_members = tuple(
            sorted(members, key=lambda i: -crit[i].log_g)
        )
        drafts.append((sigma, ordered_members, points, tuple(mu)))

    drafts.sort(key=lambda d: (d[0], -d[2][0].log_g))
    return [
        Region(
            id=idx,
            sigma=sigma,
            members=members,
            points=points,
            mu=mu,
            chi=euler_characteristic(mu),
        )
        for idx, (sigma, members, points, mu) in enumerate(drafts)
    ]


def membership(res: RegionsResult, p) -> Region:
    """The region containing a given off-hypersurface point."""
    p = np.asarray(p, dtype=np.float64)
    sigma = sign_vector(res.arrangement, p)
    result: FlowResult = flow_to_critical_point(res.morse, p, res.critical_points)
    if not result.matched:
        raise FlowBreakdownError("trajectory from the query point did not settle")
    region = res.region_of_member(result.limit_index)
    if region.sigma != sigma:
        raise FlowBreakdownError(
            "trajectory left the sign class of the query point"
        )
    return region
