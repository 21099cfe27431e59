import itertools
import random

import numpy as np
import pytest
from scipy.optimize import Bounds, LinearConstraint, milp

from qot import kernels
from qot.baselines import binary_hash_pairs, naive_count
from qot.pauli import Setting, qwc_compatible
from qot.solver import (
    CandidateCapError,
    CoverInstance,
    NonBipartiteError,
    Schedule,
    _Arrays,
    _candidates,
    bipartite_coloring,
    chain_periodic,
    exact_bnb,
    greedy_density,
    greedy_enum,
    lower_bound,
    verify_cover,
)
from qot.targets import TargetSpec, all_k_subsets, chain_windows, expand_universe, lattice_edges

# Optimum for the headline (4, 2) instance.
FIG1_SCHEDULE = ["XXXX", "XYYY", "XZZZ", "YXYZ", "YYZX", "YZXY", "ZXZY", "ZYXZ", "ZZYX"]


def sched(strings, spec, method="exact"):
    return Schedule(spec.n, tuple(Setting.from_string(s) for s in strings), method, target_hash=spec.digest())


def milp_optimum(spec):
    """Independent oracle: dense A matrix solved as a 0/1 program by HiGHS."""
    u = expand_universe(spec)
    cands = [Setting(axes) for axes in itertools.product(range(3), repeat=spec.n)]
    A = np.array([[qwc_compatible(o, g) for g in cands] for o in u.elements], dtype=float)
    res = milp(np.ones(len(cands)), constraints=LinearConstraint(A, lb=1), integrality=np.ones(len(cands)),
               bounds=Bounds(0, 1))
    assert res.success
    return round(res.fun)


def test_verify_cover_examples():
    spec = all_k_subsets(4, 2)
    u = expand_universe(spec)
    assert verify_cover(sched(FIG1_SCHEDULE, spec), u).covered
    report = verify_cover(sched(["XXXX"], spec), u)
    assert not report.covered and len(report.uncovered_elements) == 48


def test_verify_cover_size_mismatch():
    with pytest.raises(ValueError):
        verify_cover(sched(["XXX"], TargetSpec(3, ((0,),))), expand_universe(all_k_subsets(4, 2)))


def test_schedule_validation():
    with pytest.raises(ValueError):
        Schedule(2, (), "exact")
    with pytest.raises(ValueError):
        Schedule(2, (Setting.from_string("XX"), Setting.from_string("XX")), "exact")
    with pytest.raises(ValueError):
        Schedule(2, (Setting.from_string("XXX"),), "exact")
    with pytest.raises(ValueError):
        Schedule(2, (Setting.from_string("XX"),), "magic")


def test_schedule_json_round_trip():
    s = exact_bnb(CoverInstance.from_spec(all_k_subsets(4, 2)))
    assert Schedule.from_json(s.to_json()) == s


# ---------------------------------------------------------------- exact


def test_exact_headline():
    s = exact_bnb(CoverInstance.from_spec(all_k_subsets(4, 2)))
    assert len(s) == 9 and s.optimal == "proven"


def test_exact_single_pair():
    s = exact_bnb(CoverInstance.from_spec(TargetSpec(2, ((0, 1),))))
    assert len(s) == 9 and s.optimal == "proven"
    assert sorted(s.strings) == ["".join(p) for p in itertools.product("XYZ", repeat=2)]


def test_five_qubit_pairs_optimum_by_milp():
    # 11 is also the known size of the smallest strength-2 ternary covering array on 5 columns
    assert milp_optimum(all_k_subsets(5, 2)) == 11


@pytest.mark.skipif(kernels.BACKEND != "cython", reason="proof needs the compiled search within the time limit")
def test_exact_five_qubit_pairs():
    inst = CoverInstance.from_spec(all_k_subsets(5, 2))
    s = exact_bnb(inst)
    assert s.optimal == "proven"
    assert len(s) == 11
    assert 9 <= len(s) <= len(greedy_enum(inst))


def test_exact_timeout_is_honest():
    s = exact_bnb(CoverInstance.from_spec(all_k_subsets(6, 2), time_limit=0.2))
    assert s.optimal == "unknown"
    assert verify_cover(s, expand_universe(all_k_subsets(6, 2))).covered


def test_exact_cap():
    with pytest.raises(CandidateCapError):
        exact_bnb(CoverInstance.from_spec(all_k_subsets(11, 2)))
    with pytest.raises(CandidateCapError):
        greedy_enum(CoverInstance.from_spec(all_k_subsets(4, 2), candidate_cap=80))


def test_exact_cap_env(monkeypatch):
    monkeypatch.setenv("QOT_CANDIDATE_CAP", "10")
    with pytest.raises(CandidateCapError):
        exact_bnb(CoverInstance.from_spec(all_k_subsets(3, 2)))


def _random_spec(rng, n_range=(3, 5)):
    n = rng.randint(*n_range)
    subsets = set()
    for _ in range(rng.randint(1, 5)):
        subsets.add(tuple(sorted(rng.sample(range(n), rng.choice([1, 2, 2, 3])))))
    return TargetSpec(n, tuple(sorted(subsets)))


def test_exact_matches_milp_oracle():
    rng = random.Random(11)
    specs = [_random_spec(rng, (3, 4)) for _ in range(12)] + [all_k_subsets(4, 2), lattice_edges(2, 2)]
    for spec in specs:
        s = exact_bnb(CoverInstance.from_spec(spec, time_limit=30))
        assert s.optimal == "proven"
        assert len(s) == milp_optimum(spec), spec


def test_proven_optimal_is_minimal():
    rng = random.Random(3)
    for spec in [all_k_subsets(4, 2)] + [_random_spec(rng) for _ in range(6)]:
        s = exact_bnb(CoverInstance.from_spec(spec, time_limit=30))
        assert s.optimal == "proven"
        u = expand_universe(spec)
        for i in range(len(s)):
            if len(s) == 1:
                break
            rest = s.settings[:i] + s.settings[i + 1:]
            assert not verify_cover(Schedule(spec.n, rest, "exact"), u).covered


# ---------------------------------------------------------------- lower bound


def test_lower_bound_examples():
    assert lower_bound(expand_universe(all_k_subsets(4, 2))) == 9
    for n in (3, 6, 9):
        assert lower_bound(expand_universe(chain_windows(n, 3))) == 27
    assert lower_bound(expand_universe(TargetSpec(3, ((1,),)))) == 3


def test_lower_bound_below_milp():
    rng = random.Random(8)
    for _ in range(8):
        spec = _random_spec(rng, (3, 4))
        assert lower_bound(expand_universe(spec)) <= milp_optimum(spec)


# ---------------------------------------------------------------- greedy


def test_greedy_enum_examples():
    s = greedy_enum(CoverInstance.from_spec(all_k_subsets(4, 2)))
    assert len(s) <= 15
    assert len(greedy_enum(CoverInstance.from_spec(TargetSpec(2, ((0, 1),))))) == 9
    # frozen regression value
    assert len(greedy_enum(CoverInstance.from_spec(chain_windows(5, 2)))) == 9


def test_greedy_density_small():
    s = greedy_density(CoverInstance.from_spec(all_k_subsets(4, 2)), seed=0, restarts=8)
    assert 9 <= len(s) <= 15
    assert s.seed == 0 and s.method == "greedy-density"


@pytest.mark.parametrize("n", range(2, 13))
def test_greedy_density_chain(n):
    s = greedy_density(CoverInstance.from_spec(chain_windows(n, 2)), seed=0, restarts=8)
    assert len(s) >= 9


def test_greedy_density_six_pairs():
    s = greedy_density(CoverInstance.from_spec(all_k_subsets(6, 2)), seed=0, restarts=32)
    assert len(s) < len(binary_hash_pairs(6)) == 21
    assert len(s) == 13  # frozen regression value


def test_greedy_density_deterministic():
    inst = CoverInstance.from_spec(all_k_subsets(7, 2))
    a = greedy_density(inst, seed=4, restarts=6, workers=1)
    b = greedy_density(inst, seed=4, restarts=6, workers=1)
    c = greedy_density(inst, seed=4, restarts=6, workers=3)
    assert a == b == c


def test_greedy_density_beyond_candidate_cap():
    # no enumeration, so n above the exact cap is fine
    spec = all_k_subsets(14, 2)
    s = greedy_density(CoverInstance.from_spec(spec), seed=0, restarts=2)
    assert len(s) < len(binary_hash_pairs(14))


def test_sandwich_small():
    rng = random.Random(21)
    for _ in range(10):
        spec = _random_spec(rng)
        inst = CoverInstance.from_spec(spec, time_limit=30)
        e, g = exact_bnb(inst), greedy_enum(inst)
        assert lower_bound(inst.universe) <= len(e) <= len(g) <= naive_count(spec)
        if len(e) == lower_bound(inst.universe):
            assert e.optimal == "proven"


# ---------------------------------------------------------------- constructions


@pytest.mark.parametrize("n, k, size", [(12, 2, 9), (5, 3, 27), (2, 2, 9)])
def test_chain_periodic(n, k, size):
    s = chain_periodic(n, k)
    assert len(s) == size == lower_bound(expand_universe(chain_windows(n, k)))
    assert s.optimal == "proven"
    if n == k == 2:
        assert sorted(s.strings) == ["".join(p) for p in itertools.product("XYZ", repeat=2)]


def test_bipartite_lattice_and_chain():
    for spec in (lattice_edges(3, 3), chain_windows(7, 2)):
        s = bipartite_coloring(spec)
        assert len(s) == 9 and s.optimal == "proven"
        assert verify_cover(s, expand_universe(spec)).covered


def test_bipartite_rejects_triangle():
    with pytest.raises(NonBipartiteError, match="odd cycle"):
        bipartite_coloring(TargetSpec(3, ((0, 1), (0, 2), (1, 2))))


# ---------------------------------------------------------------- kernels


def _kernel_instances():
    rng = random.Random(2)
    specs = [all_k_subsets(4, 2), all_k_subsets(4, 3), chain_windows(6, 3), lattice_edges(2, 3)]
    specs += [_random_spec(rng, (3, 6)) for _ in range(6)]
    return specs


@pytest.mark.skipif(kernels.compiled_backend is None, reason="compiled kernels not built")
def test_compiled_kernels_match_python():
    py, cy = kernels.python_backend, kernels.compiled_backend
    nrng = np.random.default_rng(0)
    for spec in _kernel_instances():
        arr = _Arrays(expand_universe(spec))
        covered = (nrng.random(arr.E) < 0.4).astype(np.uint8)
        noise = nrng.uniform(0, 3, arr.n)
        args = (arr.n, arr.q_ptr, arr.q_elems, arr.q_axis, arr.elem_m, covered, noise, arr.wscale)
        assert np.array_equal(py.density_setting(*args), cy.density_setting(*args))
        rows, ids = _candidates(arr)
        assert np.array_equal(py.count_gains(ids, covered), cy.count_gains(ids, covered))
        flat = ids.ravel()
        e_cands = (np.argsort(flat, kind="stable") // ids.shape[1]).astype(np.int32)
        e_ptr = np.concatenate([[0], np.cumsum(np.bincount(flat, minlength=arr.E))]).astype(np.int64)
        for start in (len(rows), 40):
            a = py.bnb_search(ids, arr.elem_subset, arr.sizes, e_ptr, e_cands, start, 30.0)
            b = cy.bnb_search(ids, arr.elem_subset, arr.sizes, e_ptr, e_cands, start, 30.0)
            assert a == b, spec
