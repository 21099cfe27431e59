"""RDM estimates from parallel measurement records, and scheme metrics.

Expectation values are averaged uniformly over every schedule setting that
is qubit-wise compatible with the word. The one-shot distance ``d`` of a
subset satisfies ``d**2 = sum_w (1 - <w>**2) / Lambda[w]`` over the
non-identity Pauli words ``w`` on the subset, where ``Lambda[w]`` is the
fraction of settings compatible with ``w``; reconstruction error scales as
``d / sqrt(M)`` for ``M`` total shots split evenly across settings.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .pauli import AXES, Axis, LocalObservable, qwc_compatible
from .sim import MeasurementRecord
from .solver import Schedule, verify_cover
from .targets import TargetSpec, expand_universe

PAULI = {
    Axis.X: np.array([[0, 1], [1, 0]], dtype=complex),
    Axis.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    Axis.Z: np.array([[1, 0], [0, -1]], dtype=complex),
}
_I2 = np.eye(2, dtype=complex)
_YY = np.kron(PAULI[Axis.Y], PAULI[Axis.Y])
RANK_CUTOFF = 1e-13


class UncoveredObservableError(ValueError):
    """No schedule setting measures a required observable."""


class UnverifiedScheduleError(ValueError):
    pass


def words_on(subset: Sequence[int]):
    """All ``4**m - 1`` non-identity Pauli words supported inside ``subset``."""
    subset = tuple(subset)
    for r in range(1, len(subset) + 1):
        for support in itertools.combinations(subset, r):
            for axes in itertools.product(AXES, repeat=r):
                yield LocalObservable(tuple(zip(support, axes)))


@dataclass
class ExpectationTable:
    n: int
    values: dict = field(default_factory=dict)
    n_compatible: dict = field(default_factory=dict)

    def __getitem__(self, o: LocalObservable) -> float:
        return self.values[o]

    def __contains__(self, o) -> bool:
        return o in self.values

    def __len__(self) -> int:
        return len(self.values)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "observables": [
                {"word": str(o), "value": float(self.values[o]), "n_compatible": int(self.n_compatible.get(o, 0))}
                for o in sorted(self.values)
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "ExpectationTable":
        table = cls(int(data["n"]))
        for row in data["observables"]:
            o = LocalObservable.from_string(row["word"])
            table.values[o] = float(row["value"])
            table.n_compatible[o] = int(row.get("n_compatible", 0))
        return table


def _bits(n: int) -> np.ndarray:
    l = np.arange(2**n)
    return np.stack([(l >> (n - 1 - q)) & 1 for q in range(n)], axis=1)


def estimate_expectations(records: Sequence[MeasurementRecord], schedule: Schedule,
                          spec: TargetSpec) -> ExpectationTable:
    if len(records) != len(schedule.settings):
        raise ValueError(f"{len(records)} records for {len(schedule.settings)} settings")
    for rec, g in zip(records, schedule.settings):
        if rec.setting != g:
            raise ValueError(f"record for {rec.setting} does not match schedule setting {g}")
    if schedule.n != spec.n:
        raise ValueError("schedule and target spec disagree on n")
    n = spec.n
    words = sorted({w for s in spec.subsets for w in words_on(s)})
    supports = sorted({w.support for w in words})
    col = {t: i for i, t in enumerate(supports)}
    bits = _bits(n)
    signs = np.stack([1 - 2 * (bits[:, list(t)].sum(axis=1) % 2) for t in supports], axis=1).astype(float)
    probs = np.stack([rec.probabilities() for rec in records])
    parity = probs @ signs  # (settings, supports)
    table = ExpectationTable(n)
    for w in words:
        hits = [j for j, g in enumerate(schedule.settings) if qwc_compatible(w, g)]
        if not hits:
            raise UncoveredObservableError(f"no setting measures {w}")
        value = float(np.mean(parity[hits, col[w.support]]))
        table.values[w] = min(1.0, max(-1.0, value))
        table.n_compatible[w] = len(hits)
    return table


@dataclass(frozen=True, eq=False)
class RdmEstimate:
    subset: tuple[int, ...]
    matrix: np.ndarray
    projected: bool = False

    def to_json(self) -> dict:
        return {
            "subset": list(self.subset),
            "matrix_re": self.matrix.real.tolist(),
            "matrix_im": self.matrix.imag.tolist(),
            "projected": self.projected,
        }

    @classmethod
    def from_json(cls, data: dict) -> "RdmEstimate":
        m = np.asarray(data["matrix_re"], dtype=float) + 1j * np.asarray(data["matrix_im"], dtype=float)
        return cls(tuple(data["subset"]), m, bool(data["projected"]))


def pauli_matrix(o: LocalObservable, subset: Sequence[int]) -> np.ndarray:
    terms = dict(o.terms)
    out = np.ones((1, 1), dtype=complex)
    for q in subset:
        out = np.kron(out, PAULI[terms[q]] if q in terms else _I2)
    return out


def assemble_rdm(subset: Sequence[int], table: ExpectationTable) -> RdmEstimate:
    subset = tuple(subset)
    dim = 2 ** len(subset)
    rho = np.eye(dim, dtype=complex)
    for w in words_on(subset):
        if w not in table:
            raise KeyError(f"expectation table has no entry for {w}")
        rho += table[w] * pauli_matrix(w, subset)
    rho /= dim
    return RdmEstimate(subset, (rho + rho.conj().T) / 2, False)


def project_psd(est: RdmEstimate) -> RdmEstimate:
    """Clip negative eigenvalues and renormalize the trace to 1."""
    m = (est.matrix + est.matrix.conj().T) / 2
    w, v = np.linalg.eigh(m)
    w = np.clip(w, 0.0, None)
    if w.sum() <= 0:
        raise ValueError("estimate has no positive spectrum left after clipping")
    w /= w.sum()
    out = (v * w) @ v.conj().T
    return RdmEstimate(est.subset, (out + out.conj().T) / 2, True)


def lambda_of(schedule: Schedule, o: LocalObservable) -> float:
    hits = sum(1 for g in schedule.settings if qwc_compatible(o, g))
    return hits / len(schedule.settings)


def one_shot_d(schedule: Schedule, table: ExpectationTable, subset: Sequence[int]) -> float:
    d2 = 0.0
    for w in words_on(subset):
        lam = lambda_of(schedule, w)
        if lam == 0:
            raise UncoveredObservableError(f"schedule never measures {w}")
        d2 += (1.0 - table[w] ** 2) / lam
    return float(np.sqrt(max(d2, 0.0)))


@dataclass(frozen=True)
class SampleRatio:
    worst_ratio: float
    mean_ratio: float
    per_subset: list  # (subset, d_a, d_b)

    def to_json(self) -> dict:
        return {
            "worst_ratio": self.worst_ratio,
            "mean_ratio": self.mean_ratio,
            "per_subset": [{"subset": list(s), "d_a": a, "d_b": b} for s, a, b in self.per_subset],
        }


def sample_ratio(sched_a: Schedule, sched_b: Schedule, table: ExpectationTable, spec: TargetSpec) -> SampleRatio:
    """Shots scheme ``a`` needs relative to scheme ``b`` for equal error."""
    universe = expand_universe(spec)
    for sched in (sched_a, sched_b):
        if not verify_cover(sched, universe).covered:
            raise UnverifiedScheduleError(f"{sched.method} schedule does not cover the targets")
    rows = [(s, one_shot_d(sched_a, table, s), one_shot_d(sched_b, table, s)) for s in spec.subsets]
    da = np.array([r[1] for r in rows])
    db = np.array([r[2] for r in rows])
    return SampleRatio(float((da.max() / db.max()) ** 2), float((da.mean() / db.mean()) ** 2), rows)


def _check_state(rho: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    if np.abs(rho - rho.conj().T).max() > tol:
        raise ValueError("density matrix is not Hermitian")
    rho = (rho + rho.conj().T) / 2
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise ValueError("density matrix is not positive semidefinite; project it first")
    return rho


def _sqrtm_psd(rho: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(rho)
    w = np.where(w > RANK_CUTOFF * max(w.sum(), 1.0), w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """Uhlmann fidelity ``(tr sqrt(sqrt(a) b sqrt(a)))**2``."""
    a, b = _check_state(a), _check_state(b)
    if a.shape != b.shape:
        raise ValueError("density matrices differ in dimension")
    ra = _sqrtm_psd(a)
    m = ra @ b @ ra
    ev = np.linalg.eigvalsh((m + m.conj().T) / 2)
    ev = np.where(ev > RANK_CUTOFF, ev, 0.0)
    return float(min(1.0, np.sqrt(ev).sum() ** 2))


def concurrence(rho: np.ndarray) -> float:
    """Two-qubit concurrence from the spin-flipped spectrum.

    The square roots of the eigenvalues of ``rho @ flip(rho)`` are taken as
    the singular values of ``B^dagger @ flip(B)`` with ``rho = B B^dagger``.
    Spectral weight of ``rho`` below ``RANK_CUTOFF`` is dropped first: the
    square root would otherwise lift ~1e-17 rounding noise to ~1e-9.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"concurrence needs a 4x4 density matrix, got {rho.shape}")
    rho = _check_state(rho)
    w, v = np.linalg.eigh(rho)
    w = np.where(w > RANK_CUTOFF * w.sum(), w, 0.0)
    b = v * np.sqrt(w)
    lam = np.linalg.svd(b.conj().T @ (_YY @ b.conj()), compute_uv=False)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))
