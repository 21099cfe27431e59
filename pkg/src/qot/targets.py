"""Target qubit subsets and their cover universes."""
from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .pauli import AXES, LocalObservable


@dataclass(frozen=True)
class TargetSpec:
    n: int
    subsets: tuple[tuple[int, ...], ...]
    topology_tag: str = "custom"

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"system size must be >= 2, got {self.n}")
        subsets = tuple(tuple(int(q) for q in s) for s in self.subsets)
        seen = set()
        for s in subsets:
            if not s:
                raise ValueError("empty subset in target spec")
            if list(s) != sorted(set(s)):
                raise ValueError(f"subset {list(s)} must be sorted with unique entries")
            if s[0] < 0 or s[-1] >= self.n:
                raise ValueError(f"subset {list(s)} out of range for n={self.n}")
            if s in seen:
                raise ValueError(f"duplicate subset {list(s)}")
            seen.add(s)
        object.__setattr__(self, "subsets", subsets)

    @property
    def max_locality(self) -> int:
        return max((len(s) for s in self.subsets), default=0)

    def to_json(self) -> dict:
        return {"n": self.n, "subsets": [list(s) for s in self.subsets], "topology_tag": self.topology_tag}

    @classmethod
    def from_json(cls, data: dict) -> "TargetSpec":
        return cls(int(data["n"]), tuple(tuple(s) for s in data["subsets"]), str(data.get("topology_tag", "custom")))

    @classmethod
    def load(cls, path) -> "TargetSpec":
        return cls.from_json(json.loads(Path(path).read_text()))

    def digest(self) -> str:
        """Stable hex digest of the n and subset list (the tag is ignored)."""
        return target_digest(self.n, self.subsets)


def target_digest(n: int, subsets) -> str:
    payload = json.dumps({"n": n, "subsets": [list(s) for s in subsets]}, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def all_k_subsets(n: int, k: int) -> TargetSpec:
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    return TargetSpec(n, tuple(itertools.combinations(range(n), k)), f"all:{k}")


def chain_windows(n: int, k: int) -> TargetSpec:
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    return TargetSpec(n, tuple(tuple(range(i, i + k)) for i in range(n - k + 1)), f"chain:{k}")


def lattice_edges(rows: int, cols: int) -> TargetSpec:
    if rows < 1 or cols < 1 or rows * cols < 2:
        raise ValueError(f"degenerate {rows}x{cols} lattice")
    edges = []
    for r in range(rows):
        for c in range(cols):
            q = r * cols + c
            if c + 1 < cols:
                edges.append((q, q + 1))
            if r + 1 < rows:
                edges.append((q, q + cols))
    return TargetSpec(rows * cols, tuple(sorted(edges)), f"lattice:{rows}x{cols}")


def mixed_spec(parts: Sequence[TargetSpec]) -> TargetSpec:
    """Union of several specs; subsets contained in a larger one are dropped."""
    if not parts:
        raise ValueError("mixed_spec needs at least one part")
    n = parts[0].n
    if any(p.n != n for p in parts):
        raise ValueError("all parts of a mixed spec must share n")
    union = []
    seen = set()
    for p in parts:
        for s in p.subsets:
            if s not in seen:
                seen.add(s)
                union.append(s)
    sets = [frozenset(s) for s in union]
    kept = [s for s, fs in zip(union, sets) if not any(fs < other for other in sets)]
    tag = "mixed:" + "+".join(p.topology_tag for p in parts)
    return TargetSpec(n, tuple(kept), tag)


@dataclass(frozen=True)
class CoverUniverse:
    """Full-weight axis assignments on every target subset.

    ``elements`` is grouped by subset: subset ``i`` owns the slice
    ``offsets[i]:offsets[i] + 3**len(subset)`` and the assignment with
    base-3 digits ``(a_0, ..., a_{m-1})`` (first qubit most significant)
    sits at ``offsets[i] + sum(a_j * 3**(m-1-j))``.
    """

    n: int
    subsets: tuple[tuple[int, ...], ...]
    elements: tuple[LocalObservable, ...]
    offsets: tuple[int, ...]
    element_index: dict = field(compare=False, repr=False)

    def __len__(self) -> int:
        return len(self.elements)

    def digest(self) -> str:
        return target_digest(self.n, self.subsets)


def expand_universe(spec: TargetSpec) -> CoverUniverse:
    elements: list[LocalObservable] = []
    offsets = []
    index: dict[LocalObservable, int] = {}
    for s in spec.subsets:
        offsets.append(len(elements))
        for axes in itertools.product(AXES, repeat=len(s)):
            o = LocalObservable(tuple(zip(s, axes)))
            # distinct subsets give distinct supports, so this never collides
            if o in index:
                raise AssertionError(f"duplicate universe element {o}")
            index[o] = len(elements)
            elements.append(o)
    return CoverUniverse(spec.n, spec.subsets, tuple(elements), tuple(offsets), index)


def parse_topology(text: str, n: int | None = None) -> TargetSpec:
    """Parse ``all:k``, ``chain:k``, ``lattice:RxC``, ``custom:<path>`` or ``mixed:<p1,p2>``."""
    kind, _, arg = text.partition(":")
    if not arg:
        raise ValueError(f"malformed topology {text!r}")
    if kind in ("all", "chain"):
        if n is None:
            raise ValueError(f"topology {text!r} needs --n")
        k = int(arg)
        return all_k_subsets(n, k) if kind == "all" else chain_windows(n, k)
    if kind == "lattice":
        r, _, c = arg.lower().partition("x")
        spec = lattice_edges(int(r), int(c))
    elif kind == "custom":
        spec = TargetSpec.load(arg)
    elif kind == "mixed":
        spec = mixed_spec([TargetSpec.load(p) for p in arg.split(",")])
    else:
        raise ValueError(f"unknown topology kind {kind!r}")
    if n is not None and spec.n != n:
        raise ValueError(f"topology {text!r} has n={spec.n} but --n {n} was given")
    return spec
