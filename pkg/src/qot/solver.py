"""Minimum covers of a target universe by parallel measurement settings.

A setting covers an element of the universe when it is qubit-wise
compatible with it. Since each setting fixes one axis per qubit, it covers
exactly one full-weight assignment on every target subset; that structure
drives all of the array code below.
"""
from __future__ import annotations

import itertools
import math
import os
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .pauli import AXES, Axis, Setting, qwc_compatible
from .targets import CoverUniverse, TargetSpec, expand_universe

METHODS = (
    "exact",
    "greedy-density",
    "greedy-enum",
    "chain-periodic",
    "bipartite-coloring",
    "baseline-binary",
    "baseline-ternary",
    "naive",
)
OPTIMALITY = ("proven", "unknown", "not-applicable")

DEFAULT_CANDIDATE_CAP = 3**10
DEFAULT_TIME_LIMIT = 60.0


class CandidateCapError(ValueError):
    """The 3**n candidate space is larger than the configured cap."""


class NonBipartiteError(ValueError):
    pass


class CoverError(AssertionError):
    """A schedule that should cover its universe does not."""


def default_candidate_cap() -> int:
    return int(os.environ.get("QOT_CANDIDATE_CAP", DEFAULT_CANDIDATE_CAP))


@dataclass(frozen=True)
class Schedule:
    n: int
    settings: tuple[Setting, ...]
    method: str
    seed: int | None = None
    optimal: str = "not-applicable"
    target_hash: str = ""

    def __post_init__(self):
        settings = tuple(s if isinstance(s, Setting) else Setting.from_string(s) for s in self.settings)
        if not settings:
            raise ValueError("a schedule needs at least one setting")
        if len(set(settings)) != len(settings):
            raise ValueError("schedule settings must be distinct")
        for s in settings:
            if s.n != self.n:
                raise ValueError(f"setting {s} has length {s.n}, expected {self.n}")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.optimal not in OPTIMALITY:
            raise ValueError(f"unknown optimality flag {self.optimal!r}")
        object.__setattr__(self, "settings", settings)

    def __len__(self) -> int:
        return len(self.settings)

    @property
    def strings(self) -> list[str]:
        return [str(s) for s in self.settings]

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "method": self.method,
            "seed": self.seed,
            "optimal": self.optimal,
            "target_hash": self.target_hash,
            "settings": self.strings,
        }

    @classmethod
    def from_json(cls, data: dict) -> "Schedule":
        seed = data.get("seed")
        return cls(
            n=int(data["n"]),
            settings=tuple(Setting.from_string(s) for s in data["settings"]),
            method=str(data["method"]),
            seed=None if seed is None else int(seed),
            optimal=str(data.get("optimal", "not-applicable")),
            target_hash=str(data.get("target_hash", "")),
        )


@dataclass(frozen=True)
class CoverReport:
    covered: bool
    uncovered_elements: list


@dataclass
class CoverInstance:
    universe: CoverUniverse
    candidate_cap: int = field(default_factory=default_candidate_cap)
    time_limit: float = DEFAULT_TIME_LIMIT

    def __post_init__(self):
        if len(self.universe) == 0:
            raise ValueError("empty cover universe")
        if self.candidate_cap < 1:
            raise ValueError("candidate_cap must be >= 1")

    @classmethod
    def from_spec(cls, spec: TargetSpec, **kw) -> "CoverInstance":
        return cls(expand_universe(spec), **kw)

    @property
    def n(self) -> int:
        return self.universe.n


def verify_cover(schedule: Schedule, universe: CoverUniverse) -> CoverReport:
    if schedule.n != universe.n:
        raise ValueError(f"schedule has n={schedule.n}, universe has n={universe.n}")
    uncovered = [o for o in universe.elements if not any(qwc_compatible(o, g) for g in schedule.settings)]
    return CoverReport(not uncovered, uncovered)


def _checked(schedule: Schedule, universe: CoverUniverse) -> Schedule:
    report = verify_cover(schedule, universe)
    if not report.covered:
        raise CoverError(f"{schedule.method} left {len(report.uncovered_elements)} elements uncovered")
    return schedule


# ---------------------------------------------------------------- arrays


class _Arrays:
    """Flat integer views of a universe for the kernels."""

    def __init__(self, universe: CoverUniverse):
        self.n = n = universe.n
        self.subsets = universe.subsets
        self.offsets = np.array(universe.offsets, dtype=np.int64)
        self.sizes = np.array([3 ** len(s) for s in universe.subsets], dtype=np.int32)
        self.E = E = len(universe.elements)
        self.elem_m = np.array([o.weight for o in universe.elements], dtype=np.int32)
        self.elem_subset = np.repeat(np.arange(len(self.subsets), dtype=np.int32), self.sizes)
        per_q: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for e, o in enumerate(universe.elements):
            for q, a in o.terms:
                per_q[q].append((e, int(a)))
        self.q_ptr = np.zeros(n + 1, dtype=np.int64)
        self.q_ptr[1:] = np.cumsum([len(x) for x in per_q])
        flat = [p for x in per_q for p in x]
        self.q_elems = np.array([e for e, _ in flat], dtype=np.int32)
        self.q_axis = np.array([a for _, a in flat], dtype=np.int8)
        self.wscale = max(int(self.elem_m.max()) - 1, 0) if E else 0

    def ids_of(self, axes: np.ndarray) -> np.ndarray:
        """Element ids covered by each row of an ``(C, n)`` axis array."""
        axes = np.atleast_2d(axes).astype(np.int64)
        out = np.empty((axes.shape[0], len(self.subsets)), dtype=np.int32)
        for i, s in enumerate(self.subsets):
            idx = np.zeros(axes.shape[0], dtype=np.int64)
            for q in s:
                idx = idx * 3 + axes[:, q]
            out[:, i] = self.offsets[i] + idx
        return out


def _all_settings(n: int) -> np.ndarray:
    """All 3**n settings as rows, in lexicographic string order."""
    return np.array(list(itertools.product(range(3), repeat=n)), dtype=np.int8).reshape(-1, n)


def _to_setting(row) -> Setting:
    return Setting(tuple(Axis(int(a)) for a in row))


def _schedule(rows, universe: CoverUniverse, method: str, seed=None, optimal="not-applicable") -> Schedule:
    sched = Schedule(universe.n, tuple(_to_setting(r) for r in rows), method, seed, optimal, universe.digest())
    return _checked(sched, universe)


def _check_cap(instance: CoverInstance) -> None:
    if 3**instance.n > instance.candidate_cap:
        raise CandidateCapError(
            f"3^{instance.n} = {3 ** instance.n} candidate settings exceeds cap {instance.candidate_cap}"
        )


# ---------------------------------------------------------------- greedy


def _density_run(arr: _Arrays, noise_rng) -> list[np.ndarray]:
    covered = np.zeros(arr.E, dtype=np.uint8)
    rows = []
    remaining = arr.E
    zero = np.zeros(arr.n)
    while remaining:
        if noise_rng is None:
            noise = zero
        else:
            # jitter up to a fifth of the mean uncovered degree
            mean_deg = remaining * arr.elem_m.mean() / arr.n
            noise = noise_rng.uniform(0.0, 0.2 * mean_deg + 1.0, arr.n)
        axes = kernels.density_setting(
            arr.n, arr.q_ptr, arr.q_elems, arr.q_axis, arr.elem_m, covered, noise, arr.wscale
        )
        ids = arr.ids_of(axes)[0]
        fresh = ids[covered[ids] == 0]
        if fresh.size == 0:
            # cannot happen with positive weights, kept as a guard
            e = int(np.flatnonzero(covered == 0)[0])
            s = int(arr.elem_subset[e])
            digits = np.base_repr(e - int(arr.offsets[s]), 3).zfill(len(arr.subsets[s]))
            for q, d in zip(arr.subsets[s], digits):
                axes[q] = int(d)
            ids = arr.ids_of(axes)[0]
            fresh = ids[covered[ids] == 0]
        covered[fresh] = 1
        remaining -= len(np.unique(fresh))
        rows.append(np.asarray(axes, dtype=np.int8))
    return rows


def greedy_density(instance: CoverInstance, seed: int = 0, restarts: int = 8, workers: int = 1) -> Schedule:
    """Density greedy over settings, no candidate enumeration.

    Restart 0 uses the plain degree order; restart ``r > 0`` jitters the
    qubit order with a generator seeded by ``(seed, r)``. The smallest
    schedule wins, ties going to the lexicographically smallest setting list.
    """
    arr = _Arrays(instance.universe)
    restarts = max(int(restarts), 1)

    def run(r):
        rng = None if r == 0 else np.random.default_rng([int(seed), r])
        rows = _density_run(arr, rng)
        return len(rows), ["".join(Axis(int(a)).name for a in row) for row in rows]

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(run, range(restarts)))
    else:
        results = [run(r) for r in range(restarts)]
    _, best = min(results)
    sched = Schedule(
        instance.n, tuple(Setting.from_string(s) for s in best), "greedy-density", int(seed), "unknown",
        instance.universe.digest(),
    )
    return _checked(sched, instance.universe)


def _candidates(arr: _Arrays, dedup: bool = True):
    rows = _all_settings(arr.n)
    ids = arr.ids_of(rows)
    if dedup:
        # same footprint -> keep the lexicographically smallest setting
        _, first = np.unique(ids, axis=0, return_index=True)
        keep = np.sort(first)
        rows, ids = rows[keep], ids[keep]
    return rows, ids


def _greedy_enum_rows(arr: _Arrays, rows: np.ndarray, ids: np.ndarray) -> list[int]:
    covered = np.zeros(arr.E, dtype=np.uint8)
    picked = []
    while not covered.all():
        gains = kernels.count_gains(ids, covered)
        c = int(np.argmax(gains))  # first maximum = lexicographically smallest
        picked.append(c)
        covered[ids[c]] = 1
    return picked


def greedy_enum(instance: CoverInstance) -> Schedule:
    _check_cap(instance)
    arr = _Arrays(instance.universe)
    rows, ids = _candidates(arr)
    picked = _greedy_enum_rows(arr, rows, ids)
    return _schedule(rows[picked], instance.universe, "greedy-enum", optimal="unknown")


# ---------------------------------------------------------------- exact


def lower_bound(universe: CoverUniverse) -> int:
    """Size of a greedy set of pairwise co-incompatible elements.

    No single setting covers two elements that disagree on a shared qubit,
    so such a set needs one setting per member.
    """
    if len(universe) == 0:
        return 0
    floor = 3 ** max(len(s) for s in universe.subsets)
    order = sorted(range(len(universe)), key=lambda e: (-universe.elements[e].weight, e))
    packed: list[dict] = []
    for e in order:
        terms = dict(universe.elements[e].terms)
        if all(any(q in other and other[q] != a for q, a in terms.items()) for other in packed):
            packed.append(terms)
    return max(floor, len(packed))


def exact_bnb(instance: CoverInstance) -> Schedule:
    """Branch and bound on the binary covering program.

    The incumbent comes from ``greedy_enum``; if the search finishes inside
    ``time_limit`` the result is flagged ``proven``, otherwise the best
    schedule found so far is returned flagged ``unknown``.
    """
    _check_cap(instance)
    universe = instance.universe
    arr = _Arrays(universe)
    rows, ids = _candidates(arr)
    incumbent = _greedy_enum_rows(arr, rows, ids)
    lb = lower_bound(universe)
    if len(incumbent) <= lb:
        return _schedule(rows[incumbent], universe, "exact", optimal="proven")

    flat = ids.ravel()
    order = np.argsort(flat, kind="stable")
    e_cands = (order // ids.shape[1]).astype(np.int32)
    e_ptr = np.zeros(arr.E + 1, dtype=np.int64)
    e_ptr[1:] = np.cumsum(np.bincount(flat, minlength=arr.E))
    best, complete, _ = kernels.bnb_search(
        ids, arr.elem_subset, arr.sizes, e_ptr, e_cands, len(incumbent), float(instance.time_limit)
    )
    picked = incumbent if best is None else best
    return _schedule(rows[picked], universe, "exact", optimal="proven" if complete else "unknown")


# ---------------------------------------------------------------- constructions


def chain_periodic(n: int, k: int) -> Schedule:
    """``3**k`` settings repeating an assignment with period ``k``."""
    from .targets import chain_windows

    spec = chain_windows(n, k)
    settings = []
    for word in itertools.product(AXES, repeat=k):
        settings.append(Setting(tuple(word[q % k] for q in range(n))))
    sched = Schedule(n, tuple(settings), "chain-periodic", None, "proven", spec.digest())
    return _checked(sched, expand_universe(spec))


def two_coloring(n: int, edges) -> list[int]:
    adj: list[list[int]] = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    color = [-1] * n
    for root in range(n):
        if color[root] >= 0:
            continue
        color[root] = 0
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if color[v] < 0:
                    color[v] = 1 - color[u]
                    queue.append(v)
                elif color[v] == color[u]:
                    raise NonBipartiteError(
                        f"pair graph has an odd cycle through qubits {u} and {v}; use the greedy or exact solver"
                    )
    return color


def bipartite_coloring(spec: TargetSpec) -> Schedule:
    """Nine settings for any pair graph that is bipartite."""
    if any(len(s) != 2 for s in spec.subsets):
        raise ValueError("bipartite_coloring needs a spec made of qubit pairs")
    color = two_coloring(spec.n, spec.subsets)
    settings = [
        Setting(tuple(p if c == 0 else q for c in color)) for p, q in itertools.product(AXES, repeat=2)
    ]
    optimal = "proven" if spec.subsets else "not-applicable"
    sched = Schedule(spec.n, tuple(settings), "bipartite-coloring", None, optimal, spec.digest())
    return _checked(sched, expand_universe(spec))


def solve(spec: TargetSpec, method: str, seed: int = 0, restarts: int = 8, workers: int = 1, **kw) -> Schedule:
    """Dispatch by method name; used by the command line and the comparison table."""
    from . import baselines

    if method == "exact":
        return exact_bnb(CoverInstance.from_spec(spec, **kw))
    if method in ("greedy", "greedy-density"):
        return greedy_density(CoverInstance.from_spec(spec, **kw), seed, restarts, workers)
    if method == "greedy-enum":
        return greedy_enum(CoverInstance.from_spec(spec, **kw))
    if method in ("chain", "chain-periodic"):
        k = spec.max_locality
        if spec.subsets != chain_windows_subsets(spec.n, k):
            raise ValueError("chain method needs a chain:k topology")
        return chain_periodic(spec.n, k)
    if method in ("bipartite", "bipartite-coloring"):
        return bipartite_coloring(spec)
    if method in ("baseline-binary", "baseline-ternary"):
        if spec.max_locality > 2:
            raise ValueError(f"{method} only covers 2-RDMs, topology has locality {spec.max_locality}")
        build = baselines.binary_hash_pairs if method == "baseline-binary" else baselines.ternary_hash_pairs
        sched = build(spec.n)
        return _checked(
            Schedule(sched.n, sched.settings, sched.method, None, sched.optimal, spec.digest()),
            expand_universe(spec),
        )
    if method == "naive":
        return baselines.naive_per_rdm(spec)
    raise ValueError(f"unknown method {method!r}")


def chain_windows_subsets(n: int, k: int):
    return tuple(tuple(range(i, i + k)) for i in range(n - k + 1))
