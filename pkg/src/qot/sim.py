"""Small statevector engine: test states, Pauli-basis readout, exact RDMs.

Amplitude index convention: qubit 0 is the most significant bit, so the
bitstring of basis index ``l`` read left to right gives qubits 0..n-1.

Readout rotations map the +1 eigenvector of the measured axis to ``|0>``:
X is read after ``H``; Y after ``H S^dagger``; Z is read directly. Outcome
bit 0 therefore means eigenvalue +1.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.stats import unitary_group

from .pauli import Axis, Setting

DEFAULT_SIM_CAP = 14

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_SDG = np.array([[1, 0], [0, -1j]], dtype=complex)
READOUT = {
    Axis.X: _H,
    Axis.Y: _H @ _SDG,
    Axis.Z: np.eye(2, dtype=complex),
}


def sim_cap() -> int:
    return int(os.environ.get("QOT_SIM_CAP", DEFAULT_SIM_CAP))


@dataclass(frozen=True, eq=False)
class StateVector:
    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if self.n < 1 or self.n > sim_cap():
            raise ValueError(f"n={self.n} outside simulator range 1..{sim_cap()}")
        if amps.size != 2**self.n:
            raise ValueError(f"expected {2 ** self.n} amplitudes, got {amps.size}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1) > 1e-12:
            raise ValueError(f"state is not normalized (norm {norm})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.n)


def _normalized(n: int, amps) -> StateVector:
    amps = np.asarray(amps, dtype=complex)
    norm = np.linalg.norm(amps)
    if norm == 0:
        raise ValueError("zero vector cannot be normalized")
    return StateVector(n, amps / norm)


def _basis(n: int, bitstrings: Sequence[str]) -> StateVector:
    amps = np.zeros(2**n, dtype=complex)
    for b in bitstrings:
        amps[int(b, 2)] = 1
    return _normalized(n, amps)


def load_amplitudes(path) -> np.ndarray:
    """Read ``{"re": [...], "im": [...]}``, ``[[re, im], ...]`` or a real list."""
    data = json.loads(Path(path).read_text())
    if isinstance(data, dict):
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data.get("im", np.zeros_like(re)), dtype=float)
        return re + 1j * im
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 2:
        return arr[:, 0] + 1j * arr[:, 1]
    return arr.astype(complex)


def make_state(name: str, n: int, path=None) -> StateVector:
    if name == "zero":
        return _basis(n, ["0" * n])
    if name == "ghz":
        return _basis(n, ["0" * n, "1" * n])
    if name == "w":
        return _basis(n, ["0" * i + "1" + "0" * (n - i - 1) for i in range(n)])
    if name == "psi4":
        if n != 4:
            raise ValueError("psi4 is a four-qubit state")
        return _basis(4, ["0000", "1111", "0101", "1010", "0110"])
    if name in ("custom", "custom-file"):
        if path is None:
            raise ValueError("custom state needs a file path")
        amps = load_amplitudes(path)
        if amps.size != 2**n:
            raise ValueError(f"custom state has {amps.size} amplitudes, expected {2 ** n}")
        return _normalized(n, amps)
    raise ValueError(f"unknown state {name!r}")


def apply_single_qubit(state: StateVector, ops: Sequence[np.ndarray]) -> StateVector:
    """Apply ``ops[q]`` to every qubit ``q``."""
    psi = state.tensor()
    for q, u in enumerate(ops):
        psi = np.moveaxis(np.tensordot(u, psi, axes=([1], [q])), 0, q)
    amps = psi.reshape(-1)
    return StateVector(state.n, amps / np.linalg.norm(amps))


def apply_local_random(state: StateVector, seed: int) -> StateVector:
    """Independent Haar-random unitary on each qubit."""
    rng = np.random.default_rng(seed)
    ops = [unitary_group.rvs(2, random_state=rng) for _ in range(state.n)]
    return apply_single_qubit(state, ops)


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    setting: Setting
    mode: str
    distribution: np.ndarray | None = None
    counts: dict | None = None
    shots: int | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.mode == "exact":
            p = np.asarray(self.distribution, dtype=float)
            if p.size != 2**self.setting.n:
                raise ValueError("distribution length does not match setting width")
            if abs(p.sum() - 1) > 1e-9 or (p < 0).any():
                raise ValueError("distribution is not a probability vector")
            object.__setattr__(self, "distribution", p)
        elif self.mode == "sampled":
            if self.counts is None or self.shots is None:
                raise ValueError("sampled record needs counts and shots")
            if self.shots < 1:
                raise ValueError("shots must be >= 1")
            n = self.setting.n
            for b, c in self.counts.items():
                if len(b) != n or set(b) - {"0", "1"} or c < 0:
                    raise ValueError(f"bad count entry {b!r}: {c}")
            if sum(self.counts.values()) != self.shots:
                raise ValueError("counts do not add up to shots")
        else:
            raise ValueError(f"unknown record mode {self.mode!r}")

    def probabilities(self) -> np.ndarray:
        """Outcome frequencies as a length ``2**n`` vector."""
        if self.mode == "exact":
            return self.distribution
        p = np.zeros(2**self.setting.n)
        for b, c in self.counts.items():
            p[int(b, 2)] += c
        return p / self.shots

    def to_json(self) -> dict:
        return {
            "setting": str(self.setting),
            "mode": self.mode,
            "distribution": None if self.distribution is None else [float(x) for x in self.distribution],
            "counts": None if self.counts is None else {b: int(self.counts[b]) for b in sorted(self.counts)},
            "shots": self.shots,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, data: dict) -> "MeasurementRecord":
        dist = data.get("distribution")
        return cls(
            setting=Setting.from_string(data["setting"]),
            mode=data["mode"],
            distribution=None if dist is None else np.asarray(dist, dtype=float),
            counts=None if data.get("counts") is None else {str(k): int(v) for k, v in data["counts"].items()},
            shots=data.get("shots"),
            seed=data.get("seed"),
        )


def outcome_distribution(state: StateVector, setting: Setting) -> np.ndarray:
    if setting.n != state.n:
        raise ValueError(f"setting has {setting.n} qubits, state has {state.n}")
    rotated = apply_single_qubit(state, [READOUT[a] for a in setting.axes])
    p = np.abs(rotated.amplitudes) ** 2
    return p / p.sum()


def measure_setting(state: StateVector, setting: Setting, mode: str = "exact", shots: int = 0,
                    seed: int = 0) -> MeasurementRecord:
    p = outcome_distribution(state, setting)
    if mode == "exact":
        return MeasurementRecord(setting, "exact", distribution=p)
    if mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")
    if shots < 1:
        raise ValueError("sampled mode needs shots >= 1")
    draws = np.random.default_rng(seed).multinomial(shots, p)
    counts = {format(i, f"0{state.n}b"): int(c) for i, c in enumerate(draws) if c}
    return MeasurementRecord(setting, "sampled", counts=counts, shots=int(shots), seed=int(seed))


def rdm_oracle(state: StateVector, subset: Sequence[int]) -> np.ndarray:
    """Reduced density matrix on ``subset`` (first listed qubit most significant)."""
    subset = list(subset)
    if not subset or len(set(subset)) != len(subset) or min(subset) < 0 or max(subset) >= state.n:
        raise ValueError(f"invalid subset {subset} for n={state.n}")
    rest = [q for q in range(state.n) if q not in subset]
    psi = np.transpose(state.tensor(), subset + rest).reshape(2 ** len(subset), -1)
    rho = psi @ psi.conj().T
    return (rho + rho.conj().T) / 2
