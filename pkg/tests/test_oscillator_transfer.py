import cmath

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import l_operator_loop
from vertexsos.errors import GuardExceeded, RootOfUnity
from vertexsos.oscillator_transfer import (
    LOperatorParams,
    TransferPlan,
    build_q_oscillator,
    convergence_probe,
    factor_sequence,
    finite_volume_transfer,
    l_operator,
    l_operator_blocks,
    monodromy_with_field,
    ordered_product,
    transfer_commutator,
)
from vertexsos.tensor_core import permute_factors

ULP = np.finfo(float).eps


def random_params(rng):
    return LOperatorParams(
        xi=rng.uniform(0.2, 1.5),
        s=rng.uniform(-1, 2),
        s_i=rng.uniform(-1, 1),
        s_j=rng.uniform(-1, 1),
    )


# ---- oscillator ---------------------------------------------------------


def test_oscillator_n1():
    o = build_q_oscillator(1, 0.6)
    assert np.array_equal(o.D, np.diag([0, 1]))
    assert np.array_equal(o.QD, np.diag([1, 0.6]))
    assert np.count_nonzero(o.A) == 1 and o.A[0, 1] == 1


@pytest.mark.parametrize("q", [0.5, 0.7, 0.9, 1.3])
@pytest.mark.parametrize("n_max", range(1, 9))
def test_oscillator_commutation(n_max, q):
    o = build_q_oscillator(n_max, q)
    C = o.A @ o.Adag - q * o.Adag @ o.A - np.eye(n_max + 1)
    C[n_max, n_max] = 0
    assert np.abs(C).max() <= 8 * ULP * max(1.0, q**n_max)


def test_oscillator_conjugation_dyadic_exact():
    # q = 1/2 keeps every power and product exact
    for n in range(1, 17):
        o = build_q_oscillator(n, 0.5)
        assert np.array_equal(o.QD @ o.A @ o.QDinv, o.A / 0.5)


@pytest.mark.parametrize("q", [0.7, 0.9, 1.3])
def test_oscillator_conjugation_to_ulp(q):
    for n in range(1, 17):
        o = build_q_oscillator(n, q)
        lhs = o.QD @ o.A @ o.QDinv
        ref = o.A / q
        assert np.all(np.abs(lhs - ref) <= 4 * ULP * np.abs(ref))


def test_oscillator_guards():
    with pytest.raises(ValueError):
        build_q_oscillator(0, 0.5)
    with pytest.raises(GuardExceeded):
        build_q_oscillator(17, 0.5)
    with pytest.raises(RootOfUnity):
        build_q_oscillator(3, -1)


# ---- L-operator ---------------------------------------------------------


def test_block_31_zero_random():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = int(rng.integers(1, 4))
        osc = build_q_oscillator(n, rng.uniform(0.3, 1.6))
        blocks = l_operator_blocks(osc, random_params(rng))
        assert not blocks[2][0].any()


def test_q_one_diagonal_blocks():
    osc = build_q_oscillator(2, 1.0)
    b = l_operator_blocks(osc, LOperatorParams(xi=1.0))
    assert np.array_equal(b[0][0], np.eye(9))
    assert np.array_equal(b[2][2], np.eye(9))


def test_l_operator_trivial_point_exact():
    osc = build_q_oscillator(1, 1.0)
    L = l_operator(osc, LOperatorParams(xi=1.0))
    assert np.array_equal(L, l_operator_loop(1, 1.0, 1.0, 0, 0, 0))


@pytest.mark.parametrize("seed", range(5))
def test_l_operator_vs_loop_oracle(seed):
    rng = np.random.default_rng(seed)
    q = rng.uniform(0.4, 1.4)
    p = random_params(rng)
    osc = build_q_oscillator(2, q)
    L = l_operator(osc, p)
    ref = l_operator_loop(2, q, p.xi.real, p.s, p.s_i, p.s_j)
    assert np.allclose(L, ref, rtol=1e-13, atol=1e-13)


def test_swap_slots_is_fock_transposition():
    osc = build_q_oscillator(2, 0.7)
    p = LOperatorParams(xi=0.5, s=1, s_i=0.2, s_j=0.1)
    L = l_operator(osc, p)
    Ls = l_operator(osc, p, swap_slots=True)
    assert np.array_equal(permute_factors(Ls, (3, 3, 3), (0, 2, 1)), L)


def test_xi_zero_negative_exponent_rejected():
    with pytest.raises(ValueError):
        LOperatorParams(xi=0, s=0.5, s_i=1.0)


# ---- products -----------------------------------------------------------


def test_single_factor_product():
    p = LOperatorParams(xi=0.4, s=1, s_i=0.3, s_j=0.2)
    plan = TransferPlan(0, 0, n_max=1, q=0.5)
    T, tr = finite_volume_transfer(plan, p)
    osc = build_q_oscillator(1, 0.5)
    expect = cmath.exp(0.5**-2 * 0.4) * l_operator(osc, p)
    assert np.array_equal(T, expect)
    assert tr == np.trace(expect)


def test_four_factor_oracle():
    q, xi = 0.6, 0.45
    p = LOperatorParams(xi=xi, s=1.2, s_i=0.3, s_j=-0.2)
    plan = TransferPlan(1, 1, n_max=1, q=q)
    T, _ = finite_volume_transfer(plan, p)
    L = l_operator_loop(1, q, xi, 1.2, 0.3, -0.2)
    P = np.zeros_like(L)
    # swap the two Fock slots by explicit index relabelling
    for a in range(3):
        for ni in range(2):
            for nj in range(2):
                for b in range(3):
                    for mi in range(2):
                        for mj in range(2):
                            P[a * 4 + nj * 2 + ni, b * 4 + mj * 2 + mi] = L[a * 4 + ni * 2 + nj, b * 4 + mi * 2 + mj]
    c = cmath.exp(q**-2 * xi**1.2)
    expect = (c * L) @ (c * P) @ (c * L) @ (c * P)
    assert np.allclose(T, expect, rtol=1e-13, atol=1e-13 * np.abs(expect).max())


def test_trace_cyclic():
    rng = np.random.default_rng(7)
    p = random_params(rng)
    plan = TransferPlan(1, 2, n_max=2, q=0.7)
    factors = factor_sequence(plan, p)
    tr0 = np.trace(ordered_product(factors))
    for k in range(1, len(factors)):
        tr = np.trace(ordered_product(factors[k:] + factors[:k]))
        assert abs(tr - tr0) <= 1e-12 * abs(tr0)


def test_factor_guard():
    with pytest.raises(GuardExceeded):
        factor_sequence(TransferPlan(64, 64), LOperatorParams())


def test_plan_validation():
    with pytest.raises(ValueError):
        TransferPlan(-1, 0)
    with pytest.raises(ValueError):
        TransferPlan(2, 0, v_prime=(1, 2))


def test_monodromy_zero_field():
    p = LOperatorParams(xi=0.4, s=1)
    plan = TransferPlan(1, 0)
    assert np.array_equal(monodromy_with_field(plan, p), finite_volume_transfer(plan, p)[0])


def test_monodromy_field_two_factors():
    p = LOperatorParams(xi=0.4, s=1, s_i=0.3)
    T0 = monodromy_with_field(TransferPlan(0, 1), p)
    TH = monodromy_with_field(TransferPlan(0, 1, H=0.5), p)
    assert np.abs(TH - np.e * T0).max() <= 1e-13 * max(1.0, np.abs(T0).max())


@settings(max_examples=25, deadline=None)
@given(st.floats(-1, 1), st.integers(0, 2), st.integers(0, 2))
def test_monodromy_field_identity(H, M, N):
    p = LOperatorParams(xi=0.3, s=1, s_i=0.2, s_j=0.1)
    F = (M + 1) * (N + 1)
    T0 = monodromy_with_field(TransferPlan(M, N), p)
    TH = monodromy_with_field(TransferPlan(M, N, H=H), p)
    assert np.abs(TH - np.exp(H * F) * T0).max() <= 1e-13 * max(1.0, np.abs(TH).max())


def test_monodromy_constant_alpha():
    p = LOperatorParams(xi=0.3, s=1)
    c = 0.25
    plan = TransferPlan(1, 1, alpha=lambda i, j, k: c)
    T0 = finite_volume_transfer(TransferPlan(1, 1), p)[0]
    got = monodromy_with_field(plan, p)
    # each factor carries diag(e^c, e^c, e^c) on the auxiliary space
    D = np.kron(np.diag([np.exp(c)] * 3), np.eye(4))
    expect = np.eye(12, dtype=complex)
    for F in factor_sequence(TransferPlan(1, 1), p):
        expect = expect @ (D @ F)
    assert np.allclose(got, expect, rtol=1e-13, atol=1e-13 * np.abs(expect).max())
    assert not np.array_equal(got, T0)


def test_convergence_probe_shape_and_constant():
    p = LOperatorParams(xi=0.2, s=1)
    plan = TransferPlan(1, 1)
    rep = convergence_probe([plan, plan, plan], p)
    assert len(rep) == 3
    assert rep[0]["difference"] is None
    assert rep[1]["difference"] == 0 and rep[2]["difference"] == 0


def test_convergence_probe_regression():
    # q inside the unit disc and small xi; differences frozen from a run
    p = LOperatorParams(xi=0.1, s=1, s_i=0.3, s_j=0.2)
    plans = [TransferPlan(m, 0, q=0.5) for m in range(4)]
    diffs = [e["difference"] for e in convergence_probe(plans, p)[1:]]
    assert all(b < a for a, b in zip(diffs, diffs[1:]))
    assert diffs == pytest.approx([0.35493964866350813, 0.22132318972186518, 0.15675215503140452], rel=1e-10)


def test_commutator_reported():
    plan = TransferPlan(1, 1)
    c = transfer_commutator(plan, LOperatorParams(xi=0.4, s=1), LOperatorParams(xi=0.8, s=1))
    assert np.isfinite(c) and c >= 0
    assert transfer_commutator(plan, LOperatorParams(xi=0.4, s=1), LOperatorParams(xi=0.4, s=1)) == 0
