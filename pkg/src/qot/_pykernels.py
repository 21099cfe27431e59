"""Pure-Python kernels. Reference semantics for ``_ckernels.pyx``."""
from __future__ import annotations

import time

import numpy as np

NAME = "python"


def density_setting(n, q_ptr, q_elems, q_axis, elem_m, covered, noise, wscale):
    """Build one setting by expected-coverage greedy.

    An uncovered element with ``u`` unassigned support qubits is worth
    ``3**-u``; scores are kept as integers scaled by ``3**wscale``.
    """
    E = len(elem_m)
    unassigned = [int(m) for m in elem_m]
    conflict = [False] * E
    degree = [0] * n
    for q in range(n):
        for i in range(q_ptr[q], q_ptr[q + 1]):
            if not covered[q_elems[i]]:
                degree[q] += 1
    order = sorted(range(n), key=lambda q: (-(degree[q] + noise[q]), q))
    pow3 = [3 ** i for i in range(wscale + 1)]
    axes = np.zeros(n, dtype=np.int8)
    for q in order:
        score = [0, 0, 0]
        for i in range(q_ptr[q], q_ptr[q + 1]):
            e = q_elems[i]
            if covered[e] or conflict[e]:
                continue
            score[q_axis[i]] += pow3[wscale - unassigned[e] + 1]
        best = 0
        for a in (1, 2):
            if score[a] > score[best]:
                best = a
        axes[q] = best
        for i in range(q_ptr[q], q_ptr[q + 1]):
            e = q_elems[i]
            if q_axis[i] == best:
                unassigned[e] -= 1
            else:
                conflict[e] = True
    return axes


def count_gains(cand_ids, covered):
    """Number of still-uncovered elements each candidate would cover."""
    return (covered[cand_ids] == 0).sum(axis=1).astype(np.int32)


def bnb_search(cand_ids, elem_subset, subset_sizes, e_ptr, e_cands, best_size, time_limit):
    """Exact set cover by branch and bound.

    Every candidate covers exactly one element per subset, so after picking
    ``t`` settings a subset with ``r`` uncovered elements still needs ``r``
    more; the largest such ``r`` is a valid bound, as is the uncovered count
    divided by the number of subsets that still have work.

    Returns ``(best_choice or None, complete, nodes)``.
    """
    C, S = cand_ids.shape
    E = len(elem_subset)
    cand_ids = cand_ids.tolist()
    elem_subset = elem_subset.tolist()
    e_ptr = e_ptr.tolist()
    e_cands = e_cands.tolist()
    cover_cnt = [0] * E
    unc_sub = [int(x) for x in subset_sizes]
    avail = [e_ptr[e + 1] - e_ptr[e] for e in range(E)]
    excluded = [False] * C
    chosen: list[int] = []
    state = {"U": E, "best": None, "best_size": int(best_size), "nodes": 0, "timeout": False}
    deadline = time.perf_counter() + time_limit

    def choose(c):
        for e in cand_ids[c]:
            if cover_cnt[e] == 0:
                state["U"] -= 1
                unc_sub[elem_subset[e]] -= 1
            cover_cnt[e] += 1

    def unchoose(c):
        for e in cand_ids[c]:
            cover_cnt[e] -= 1
            if cover_cnt[e] == 0:
                state["U"] += 1
                unc_sub[elem_subset[e]] += 1

    def gain(c):
        return sum(1 for e in cand_ids[c] if cover_cnt[e] == 0)

    def node(depth):
        state["nodes"] += 1
        if state["nodes"] & 1023 == 0 and time.perf_counter() > deadline:
            state["timeout"] = True
        if state["timeout"]:
            return
        U = state["U"]
        if U == 0:
            state["best"] = list(chosen)
            state["best_size"] = depth
            return
        active = 0
        maxunc = 0
        for r in unc_sub:
            if r:
                active += 1
                if r > maxunc:
                    maxunc = r
        lb = max(-(-U // active), maxunc)
        if depth + lb >= state["best_size"]:
            return
        pick = -1
        fewest = C + 1
        for e in range(E):
            if cover_cnt[e] == 0 and avail[e] < fewest:
                fewest = avail[e]
                pick = e
                if fewest == 0:
                    return
        branch = [c for c in e_cands[e_ptr[pick]:e_ptr[pick + 1]] if not excluded[c]]
        branch.sort(key=lambda c: (-gain(c), c))
        done = []
        for c in branch:
            chosen.append(c)
            choose(c)
            node(depth + 1)
            unchoose(c)
            chosen.pop()
            excluded[c] = True
            for e in cand_ids[c]:
                avail[e] -= 1
            done.append(c)
            if state["timeout"] or depth + lb >= state["best_size"]:
                break
        for c in done:
            excluded[c] = False
            for e in cand_ids[c]:
                avail[e] += 1

    node(0)
    return state["best"], not state["timeout"], state["nodes"]
