"""Pauli axes, parallel measurement settings and qubit-wise commutativity.

Qubits are indexed from 0. The identity is never stored as an axis: a Pauli
word with identities is represented by a smaller support.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence


class Axis(enum.IntEnum):
    X = 0
    Y = 1
    Z = 2

    def __str__(self) -> str:
        return self.name


AXES = (Axis.X, Axis.Y, Axis.Z)


def _axis(a) -> Axis:
    if isinstance(a, Axis):
        return a
    if isinstance(a, str):
        try:
            return Axis[a.upper()]
        except KeyError:
            raise ValueError(f"unknown Pauli axis {a!r}") from None
    return Axis(int(a))


@dataclass(frozen=True, order=True)
class Setting:
    """One basis choice per qubit, measured in parallel."""

    axes: tuple[Axis, ...]

    def __post_init__(self):
        axes = tuple(_axis(a) for a in self.axes)
        if len(axes) < 1:
            raise ValueError("a setting needs at least one qubit")
        object.__setattr__(self, "axes", axes)

    @classmethod
    def from_string(cls, text: str) -> "Setting":
        return cls(tuple(_axis(c) for c in text.strip()))

    @property
    def n(self) -> int:
        return len(self.axes)

    def __len__(self) -> int:
        return len(self.axes)

    def __str__(self) -> str:
        return "".join(a.name for a in self.axes)

    def __repr__(self) -> str:
        return f"Setting({str(self)!r})"


@dataclass(frozen=True, order=True)
class LocalObservable:
    """A Pauli word on a sparse support, as sorted ``(qubit, axis)`` pairs."""

    terms: tuple[tuple[int, Axis], ...]

    def __post_init__(self):
        terms = tuple(sorted((int(q), _axis(a)) for q, a in self.terms))
        if not terms:
            raise ValueError("a local observable needs at least one term")
        qubits = [q for q, _ in terms]
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"duplicate qubit in observable {terms}")
        if qubits[0] < 0:
            raise ValueError("qubit indices must be non-negative")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def from_pairs(cls, qubits: Iterable[int], axes: Iterable) -> "LocalObservable":
        return cls(tuple(zip(qubits, axes)))

    @classmethod
    def from_string(cls, text: str) -> "LocalObservable":
        """Parse ``"X0 Y1"``."""
        terms = []
        for tok in text.split():
            terms.append((int(tok[1:]), _axis(tok[0])))
        return cls(tuple(terms))

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(q for q, _ in self.terms)

    @property
    def axes(self) -> tuple[Axis, ...]:
        return tuple(a for _, a in self.terms)

    @property
    def weight(self) -> int:
        return len(self.terms)

    def __str__(self) -> str:
        return " ".join(f"{a.name}{q}" for q, a in self.terms)

    def __repr__(self) -> str:
        return f"LocalObservable({str(self)!r})"


def qwc_compatible(o: LocalObservable, g: Setting) -> bool:
    """True iff ``g`` measures ``o``, i.e. their axes agree on o's support."""
    n = len(g.axes)
    for q, a in o.terms:
        if q >= n:
            raise IndexError(f"observable {o} references qubit {q} but setting has {n} qubits")
        if g.axes[q] != a:
            return False
    return True


def restrict(g: Setting, subset: Sequence[int]) -> LocalObservable:
    if len(subset) == 0:
        raise ValueError("subset must be nonempty")
    if len(set(subset)) != len(subset):
        raise ValueError(f"duplicate indices in subset {list(subset)}")
    for q in subset:
        if not 0 <= q < g.n:
            raise IndexError(f"qubit {q} out of range for {g.n}-qubit setting")
    return LocalObservable(tuple((q, g.axes[q]) for q in subset))
