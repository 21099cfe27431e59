import json

import numpy as np
import pytest

from qot.pauli import Setting
from qot.sim import (
    MeasurementRecord,
    StateVector,
    apply_local_random,
    make_state,
    measure_setting,
    outcome_distribution,
    rdm_oracle,
)

S = Setting.from_string


def test_psi4_amplitudes():
    psi = make_state("psi4", 4).amplitudes
    support = {int(b, 2) for b in ("0000", "1111", "0101", "1010", "0110")}
    for i, a in enumerate(psi):
        assert a == pytest.approx(1 / np.sqrt(5) if i in support else 0, abs=1e-15)


def test_ghz_and_w():
    ghz = make_state("ghz", 3).amplitudes
    assert ghz[0] == pytest.approx(2**-0.5) and ghz[7] == pytest.approx(2**-0.5)
    w = make_state("w", 4).amplitudes
    assert np.allclose(w[[8, 4, 2, 1]], 0.5) and np.isclose(np.abs(w).sum(), 2.0)


def test_state_errors(tmp_path):
    with pytest.raises(ValueError):
        make_state("psi4", 5)
    path = tmp_path / "zero.json"
    path.write_text(json.dumps([0, 0, 0, 0]))
    with pytest.raises(ValueError):
        make_state("custom", 2, path)
    with pytest.raises(ValueError):
        StateVector(2, np.array([1, 1, 0, 0], dtype=complex))


def test_custom_state_formats(tmp_path):
    a = tmp_path / "a.json"
    a.write_text(json.dumps({"re": [1, 0, 0, 1], "im": [0, 0, 0, 0]}))
    b = tmp_path / "b.json"
    b.write_text(json.dumps([[1, 0], [0, 0], [0, 0], [0, 1]]))
    sa, sb = make_state("custom", 2, a), make_state("custom", 2, b)
    assert np.allclose(sa.amplitudes, np.array([1, 0, 0, 1]) / np.sqrt(2))
    assert np.allclose(sb.amplitudes, np.array([1, 0, 0, 1j]) / np.sqrt(2))


def test_local_random_determinism_and_spectra():
    ghz = make_state("ghz", 4)
    a, b = apply_local_random(ghz, 7), apply_local_random(ghz, 7)
    assert np.array_equal(a.amplitudes, b.amplitudes)
    assert abs(np.linalg.norm(a.amplitudes) - 1) < 1e-12
    for q in range(4):
        assert np.allclose(np.linalg.eigvalsh(rdm_oracle(a, [q])), np.linalg.eigvalsh(rdm_oracle(ghz, [q])), atol=1e-12)
    prod = apply_local_random(make_state("zero", 4), 0)
    for q in range(4):
        rho = rdm_oracle(prod, [q])
        assert np.trace(rho @ rho).real == pytest.approx(1, abs=1e-12)


def test_measure_examples():
    zero = make_state("zero", 1)
    assert np.allclose(measure_setting(zero, S("Z")).distribution, [1, 0])
    plus = StateVector(1, np.array([1, 1]) / np.sqrt(2))
    assert np.allclose(measure_setting(plus, S("X")).distribution, [1, 0], atol=1e-15)
    plus_i = StateVector(1, np.array([1, 1j]) / np.sqrt(2))
    assert np.allclose(measure_setting(plus_i, S("Y")).distribution, [1, 0], atol=1e-15)


def test_ghz_xx_even_parity():
    # brute force: <XX> on (|00>+|11>)/sqrt2 via explicit operator
    ghz = make_state("ghz", 2)
    X = np.array([[0, 1], [1, 0]])
    xx = np.vdot(ghz.amplitudes, np.kron(X, X) @ ghz.amplitudes).real
    p = measure_setting(ghz, S("XX")).distribution
    even = p[0] + p[3]
    assert xx == pytest.approx(1) and even == pytest.approx(1, abs=1e-12)


def test_readout_matches_pauli_expectations():
    rng = np.random.default_rng(1)
    v = rng.normal(size=8) + 1j * rng.normal(size=8)
    st = StateVector(3, v / np.linalg.norm(v))
    paulis = {"X": np.array([[0, 1], [1, 0]]), "Y": np.array([[0, -1j], [1j, 0]]), "Z": np.diag([1, -1])}
    for word in ("XYZ", "YYX", "ZXY"):
        op = np.kron(np.kron(paulis[word[0]], paulis[word[1]]), paulis[word[2]])
        direct = np.vdot(st.amplitudes, op @ st.amplitudes).real
        p = outcome_distribution(st, S(word))
        parity = np.array([(-1) ** bin(i).count("1") for i in range(8)])
        assert p @ parity == pytest.approx(direct, abs=1e-12)


def test_exact_distribution_normalized():
    rng = np.random.default_rng(2)
    st = apply_local_random(make_state("w", 5), 3)
    for _ in range(10):
        g = Setting(tuple(rng.integers(0, 3, 5)))
        p = measure_setting(st, g).distribution
        assert (p >= 0).all() and abs(p.sum() - 1) < 1e-12


def test_sampled_counts_and_convergence():
    st = apply_local_random(make_state("psi4", 4), 5)
    g = S("XYZX")
    exact = measure_setting(st, g).distribution
    for shots, seed in ((10_000, 1), (40_000, 2)):
        rec = measure_setting(st, g, "sampled", shots, seed)
        assert sum(rec.counts.values()) == shots
        tv = 0.5 * np.abs(rec.probabilities() - exact).sum()
        assert tv <= 5 / np.sqrt(shots)
    again = measure_setting(st, g, "sampled", 10_000, 1)
    assert again.counts == measure_setting(st, g, "sampled", 10_000, 1).counts


def test_measure_errors():
    st = make_state("ghz", 3)
    with pytest.raises(ValueError):
        measure_setting(st, S("XX"))
    with pytest.raises(ValueError):
        measure_setting(st, S("XXX"), "sampled", 0)


def test_record_json_round_trip():
    st = make_state("w", 3)
    for rec in (measure_setting(st, S("XYZ")), measure_setting(st, S("ZZX"), "sampled", 100, 9)):
        back = MeasurementRecord.from_json(json.loads(json.dumps(rec.to_json())))
        assert back.setting == rec.setting and back.mode == rec.mode
        assert np.allclose(back.probabilities(), rec.probabilities())


def test_record_validation():
    with pytest.raises(ValueError):
        MeasurementRecord(S("Z"), "sampled", counts={"0": 3}, shots=4)
    with pytest.raises(ValueError):
        MeasurementRecord(S("Z"), "exact", distribution=np.array([0.7, 0.7]))


def test_rdm_oracle_examples():
    assert np.allclose(rdm_oracle(make_state("ghz", 4), [0, 1]), np.diag([0.5, 0, 0, 0.5]))
    with pytest.raises(ValueError):
        rdm_oracle(make_state("ghz", 4), [0, 4])


def test_rdm_oracle_properties_and_composition():
    st = apply_local_random(make_state("psi4", 4), 11)
    for s in ([0, 1], [1, 3], [0, 2, 3]):
        rho = rdm_oracle(st, s)
        assert np.allclose(rho, rho.conj().T, atol=1e-12)
        assert np.trace(rho).real == pytest.approx(1, abs=1e-12)
        assert np.linalg.eigvalsh(rho).min() > -1e-10
    pair = rdm_oracle(st, [1, 3]).reshape(2, 2, 2, 2)
    assert np.allclose(np.einsum("ajbj->ab", pair), rdm_oracle(st, [1]), atol=1e-12)
    assert np.allclose(np.einsum("iaib->ab", pair), rdm_oracle(st, [3]), atol=1e-12)


def test_sim_cap(monkeypatch):
    monkeypatch.setenv("QOT_SIM_CAP", "3")
    with pytest.raises(ValueError):
        make_state("ghz", 4)
