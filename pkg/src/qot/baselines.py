"""Prior-art schedules used for comparison."""
from __future__ import annotations

import itertools

from .pauli import AXES, Axis, Setting
from .solver import Schedule, _checked
from .targets import TargetSpec, all_k_subsets, expand_universe


def naive_count(spec: TargetSpec) -> int:
    """Settings used when every subset is measured on its own (before dedup)."""
    return sum(3 ** len(s) for s in spec.subsets)


def naive_per_rdm(spec: TargetSpec) -> Schedule:
    """One setting per subset assignment, other qubits padded with Z."""
    settings: dict[Setting, None] = {}
    for s in spec.subsets:
        for word in itertools.product(AXES, repeat=len(s)):
            axes = [Axis.Z] * spec.n
            for q, a in zip(s, word):
                axes[q] = a
            settings.setdefault(Setting(tuple(axes)), None)
    sched = Schedule(spec.n, tuple(settings), "naive", None, "not-applicable", spec.digest())
    return _checked(sched, expand_universe(spec))


def _digits(i: int, base: int, width: int) -> list[int]:
    out = []
    for _ in range(width):
        out.append(i % base)
        i //= base
    return out


def _ceil_log(n: int, base: int) -> int:
    t, reach = 0, 1
    while reach < n:
        reach *= base
        t += 1
    return t


def _uniform(n: int) -> list[Setting]:
    return [Setting((a,) * n) for a in AXES]


def binary_hash_pairs(n: int) -> Schedule:
    """``3 + 6*ceil(log2 n)`` settings splitting qubits by each index bit."""
    if n < 2:
        raise ValueError("need n >= 2")
    width = _ceil_log(n, 2)
    bits = [_digits(q, 2, width) for q in range(n)]
    settings = _uniform(n)
    for t in range(width):
        for p, q in itertools.permutations(AXES, 2):
            settings.append(Setting(tuple(q if bits[i][t] else p for i in range(n))))
    spec = all_k_subsets(n, 2)
    return _checked(Schedule(n, tuple(settings), "baseline-binary", None, "not-applicable", spec.digest()),
                    expand_universe(spec))


def ternary_hash_pairs(n: int) -> Schedule:
    """``3 + 6*ceil(log3 n)`` settings mapping each base-3 index digit to an axis."""
    if n < 2:
        raise ValueError("need n >= 2")
    width = _ceil_log(n, 3)
    trits = [_digits(q, 3, width) for q in range(n)]
    settings = _uniform(n)
    for t in range(width):
        for perm in itertools.permutations(AXES):
            settings.append(Setting(tuple(perm[trits[i][t]] for i in range(n))))
    spec = all_k_subsets(n, 2)
    return _checked(Schedule(n, tuple(settings), "baseline-ternary", None, "not-applicable", spec.digest()),
                    expand_universe(spec))
