import itertools
import math

import numpy as np
import pytest

from rmqlab.errors import IncompleteDataError, ParameterError
from rmqlab.instance import (
    RegularVector,
    RmqInstance,
    brute_force_solve,
    default_m,
    evaluate_instance,
    plant_instance,
)
from rmqlab.polymethod import (
    PolyMethodParams,
    amr_count,
    amr_vectors,
    default_params,
    evaluate_from_coefficients,
    exact_partial_parities,
    parity_count,
    polymethod_solve,
    ragged_from_instance,
    random_subsystem,
    regular_mobius_interpolate,
    regular_parity_count,
    search_via_decision,
    z_block_count,
)


def unique_instances(l, w, count, start=0, m=None):
    m = m or default_m(l, w)
    out, seed = [], start
    while len(out) < count:
        inst = plant_instance(l, w, m, seed)
        seed += 1
        if len(brute_force_solve(inst)) == 1:
            out.append(inst)
    return out


def unsat(inst):
    return inst.with_polys(np.ones(1, np.uint8))


def amr_bits(v, l):
    x = np.zeros(l * len(v), np.uint8)
    for i, p in enumerate(v):
        if p:
            x[i * l + p - 1] = 1
    return x


def test_params_validation():
    with pytest.raises(ParameterError):
        PolyMethodParams(0.1, 3).check()
    with pytest.raises(ParameterError):
        PolyMethodParams(0.6, 2).check()
    default_params(4).check()
    assert default_params(5).l_prime == 4
    assert default_params(4).repetitions(3) == 15 and default_params(4).repetitions(10) == 21
    assert z_block_count(0.01, 5) == 1 and z_block_count(0.99, 5) == 4


def test_random_subsystem_keeps_solutions():
    inst = plant_instance(3, 4, 8, 2)
    for seed in range(30):
        for k in (1, 3, 7):
            polys = random_subsystem(inst, k, seed)
            assert len(polys) == k
            assert all(p(inst.planted.to_bits()) == 0 for p in polys)


def test_random_subsystem_k1_is_nonzero_combination():
    inst = plant_instance(3, 3, 5, 0)
    for seed in range(20):
        (p,) = random_subsystem(inst, 1, seed)
        assert p.constant or p.linear.any() or p.quad.any()


def test_random_subsystem_k_too_large():
    inst = plant_instance(3, 3, 5, 0)
    with pytest.raises(ParameterError):
        random_subsystem(inst, 5, 0)


def test_random_subsystem_filters_non_solutions():
    inst = plant_instance(2, 4, 10, 1)
    xs = [v for v in itertools.product(range(1, 3), repeat=4)
          if evaluate_instance(inst, RegularVector(2, 4, v).to_bits()).any()]
    x = RegularVector(2, 4, xs[0]).to_bits()
    k, N = 4, 10_000
    hits = sum(all(p(x) == 0 for p in random_subsystem(inst, k, s)) for s in range(N))
    m = inst.m
    p = (2 ** (m - k) - 1) / (2**m - 1)
    assert abs(hits - N * p) < 3 * math.sqrt(N * p * (1 - p))
    assert abs(p - 2**-k) < 2e-3


def test_mobius_constant_one():
    evals = {v: 1 for v in amr_vectors(3, 2, 2)}
    coeffs = regular_mobius_interpolate(evals, 3, 2, 2)
    assert coeffs[(0, 0)] == 1
    assert sum(coeffs.values()) == 1


def test_mobius_single_cross_monomial():
    evals = {v: int(v == (1, 2)) for v in amr_vectors(2, 2, 2)}
    coeffs = regular_mobius_interpolate(evals, 2, 2, 2)
    assert {v for v, a in coeffs.items() if a} == {(1, 2)}


def test_mobius_missing_evaluation():
    evals = {v: 0 for v in amr_vectors(2, 2, 2)}
    del evals[(2, 1)]
    with pytest.raises(IncompleteDataError) as exc:
        regular_mobius_interpolate(evals, 2, 2, 2)
    assert exc.value.missing == (2, 1)


@pytest.mark.parametrize("l", [2, 4])
def test_mobius_reconstructs_random_low_degree(l):
    rng = np.random.default_rng(l)
    w, d = 3, 2
    for _ in range(20):
        # random function as a sum of at-most-regular monomials of degree <= d
        monos = [v for v in amr_vectors(l, w, d) if rng.random() < 0.3]

        def f(x):
            return sum(all(x[i] == p for i, p in enumerate(mv) if p) for mv in monos) & 1

        evals = {v: f(v) for v in amr_vectors(l, w, d)}
        table = evaluate_from_coefficients(regular_mobius_interpolate(evals, l, w, d), l, w)
        for v in itertools.product(range(1, l + 1), repeat=w):
            assert table[v] == f(v)


def test_mobius_reconstructs_random_quadratic():
    for seed in range(10):
        inst = plant_instance(2, 3, 1, seed)
        evals = {v: int(evaluate_instance(inst, amr_bits(v, 2))[0]) for v in amr_vectors(2, 3, 2)}
        table = evaluate_from_coefficients(regular_mobius_interpolate(evals, 2, 3, 2), 2, 3)
        for v in itertools.product((1, 2), repeat=3):
            assert table[v] == evaluate_instance(inst, amr_bits(v, 2))[0]


def test_amr_count_matches_enumeration():
    for l, w, d in [(2, 3, 2), (4, 3, 1), (3, 4, 4)]:
        assert len(list(amr_vectors(l, w, d))) == amr_count(l, w, d)


def test_identifying_polynomial_is_one_on_solutions():
    inst = plant_instance(2, 5, 4, 3)
    sols = brute_force_solve(inst)
    for seed in range(50):
        polys = random_subsystem(inst, 3, seed)
        for s in sols:
            assert all(p(s.to_bits()) == 0 for p in polys)


def test_partial_sum_degree_bound():
    # G(y) = sum over regular z of prod(1 + R_i(y, z)) has degree <= 2k - n_z
    l, w, n_z, k = 2, 5, 2, 3
    inst = plant_instance(l, w, 6, 7)
    wy = w - n_z
    for seed in range(10):
        polys = random_subsystem(inst, k, seed)
        evals = {}
        for y in itertools.product(range(l + 1), repeat=wy):
            acc = 0
            for z in itertools.product(range(1, l + 1), repeat=n_z):
                x = amr_bits(y + z, l)
                acc ^= int(all(p(x) == 0 for p in polys))
            evals[y] = acc
        coeffs = regular_mobius_interpolate(evals, l, wy, wy)
        top = max((sum(1 for p in v if p) for v, a in coeffs.items() if a), default=-1)
        assert top <= 2 * k - n_z


def test_parity_trace_bookkeeping():
    inst = plant_instance(2, 6, 10, 4)
    rag = ragged_from_instance(inst)
    tr = parity_count(rag, 0.3, 3, 1, k=3)
    wy = 6 - tr.n_z
    assert tr.d_G == 2 * 3 - tr.n_z
    assert tr.evaluations == amr_count(2, wy, tr.d_G) * 2**tr.n_z * 3


def test_regular_parity_unique_and_unsat():
    inst = unique_instances(4, 3, 1)[0]
    assert regular_parity_count(inst, default_params(4, seed=inst.seed, t=15)) == 1
    assert regular_parity_count(unsat(inst), default_params(4, seed=inst.seed, t=15)) == 0


def test_regular_parity_error_rate():
    # one draw errs on a given y with probability about 1 - (1 - 2^-k)^4 ~ 0.23 (k = 4,
    # four z values), so 15-fold majority errs per y with ~0.006 and per call with ~0.1
    calls = wrong = 0
    for inst in unique_instances(4, 3, 30):
        p = default_params(4, seed=inst.seed, t=15)
        wrong += regular_parity_count(inst, p) != 1
        wrong += regular_parity_count(unsat(inst), p) != 0
        calls += 2
    assert wrong / calls <= 0.2


def test_single_repetition_success_rate():
    # fraction of regular y whose single-draw partial parity is right, averaged over 200 runs
    l, w = 2, 6
    params = default_params(l)
    right = total = 0
    for seed in range(200):
        inst = plant_instance(l, w, default_m(l, w), seed)
        rag = ragged_from_instance(inst)
        tr = parity_count(rag, params.gamma, 1, seed)
        truth = exact_partial_parities(rag, tr.n_z)
        right += int((tr.per_rep[0] == truth).sum())
        total += truth.size
    assert right / total >= 0.75


def test_search_recovers_planted():
    for inst in unique_instances(2, 5, 5):
        stats = {}
        sol = search_via_decision(inst, default_params(2, seed=inst.seed, t=61), stats)
        assert sol == inst.planted
        assert stats["calls"] <= inst.w * inst.l


def test_search_unsat_returns_none():
    inst = unsat(plant_instance(2, 5, 6, 0))
    assert search_via_decision(inst, default_params(2, t=31)) is None


def test_polymethod_solve_report():
    inst = unique_instances(4, 3, 1)[0]
    rep = polymethod_solve(inst, default_params(4, seed=1, t=31))
    assert rep.method == "polymethod"
    assert rep.solutions == [inst.planted]
    assert rep.calls <= inst.w * inst.l
