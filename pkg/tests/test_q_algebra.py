import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vertexsos.errors import MissingGenerator, RootOfUnity, SingularDenominator
from vertexsos.q_algebra import (
    GE_DELTA,
    K,
    LE_DELTA,
    SIM_DELTA,
    WINDOWED,
    FactorSpec,
    GeneratorRep,
    QParams,
    TruncationSpec,
    compose_universal_r,
    fundamental_rep,
    k_matrix,
    q_exponential,
    q_factorial,
    q_integer,
    r11_function,
    sl3_rep,
    t_ratio,
    universal_r_factor,
    universal_r_factors,
    window_exponent,
    windowed_factor,
)


def series_oracle(X, q, n_max):
    """Plain power series with factorials built from explicit q-integer sums."""
    out = np.eye(X.shape[0], dtype=complex)
    P = np.eye(X.shape[0], dtype=complex)
    fact = 1.0
    for n in range(1, n_max + 1):
        P = P @ X
        fact *= sum(q**k for k in range(n))
        out = out + P / fact
    return out


# ---- q-numbers ----------------------------------------------------------


def test_q_integer_small():
    assert q_integer(0, 0.5) == 0
    assert q_integer(3, 2) == 7


def test_q_factorial_examples():
    assert q_factorial(0, 0.3) == 1
    assert q_factorial(2, 2) == 3
    assert abs(q_factorial(3, 1 + 1e-6) - 6) <= 1e-4
    with pytest.raises(ValueError):
        q_factorial(-1, 0.5)


@pytest.mark.parametrize("eps", [1e-3, 1e-4])
@pytest.mark.parametrize("n", range(1, 11))
def test_q_factorial_classical_limit(n, eps):
    f = math.factorial(n)
    assert abs(q_factorial(n, 1 + eps) - f) / f <= 10 * n * n * eps


def test_root_of_unity_rejected():
    with pytest.raises(RootOfUnity):
        q_factorial(4, -1)
    with pytest.raises(RootOfUnity):
        QParams(q=1.0)
    with pytest.raises(RootOfUnity):
        q_exponential(0.5, np.exp(2j * np.pi / 3), 5)


def test_q_exponential_trivial():
    assert q_exponential(0.0, 0.5, 10) == 1
    assert np.array_equal(q_exponential(np.zeros((3, 3)), 0.5, 10), np.eye(3))
    assert q_exponential(0.7, 0.5, 1) == 1.7


def test_q_exponential_nilpotent_exact():
    X = np.array([[0, 2.5 - 1j], [0, 0]])
    for n in (1, 2, 7, 64):
        assert np.array_equal(q_exponential(X, 0.37, n), np.eye(2) + X)


@pytest.mark.parametrize("z", [0.3, 1.0, 2.0])
@pytest.mark.parametrize("eps", [1e-3, 1e-4])
def test_q_exponential_classical_limit(z, eps):
    assert abs(q_exponential(z, 1 + eps, 64) - math.exp(z)) <= 50 * eps


def test_q_exponential_matrix_vs_series():
    rng = np.random.default_rng(1)
    X = 0.3 * rng.normal(size=(3, 3))
    got = q_exponential(X, 0.8, 30)
    assert np.allclose(got, series_oracle(X, 0.8, 30), rtol=1e-13, atol=1e-14)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 3), st.floats(0.05, 0.95))
def test_q_exponential_partial_sums_nondecreasing(z, q):
    sums = [q_exponential(z, q, n).real for n in range(20)]
    assert all(b >= a for a, b in zip(sums, sums[1:]))


# ---- K matrix -----------------------------------------------------------


def test_k_matrix_hbar_zero_identity():
    assert np.array_equal(k_matrix(fundamental_rep(), QParams(0.6, 0.0)), np.eye(4))


def test_k_matrix_diagonal_example():
    hb = 0.3
    K2 = k_matrix(fundamental_rep(), QParams(0.6, hb))
    expect = np.diag(np.exp([hb, -hb, -hb, hb]))
    assert np.allclose(K2, expect, rtol=1e-14, atol=0)


def test_k_matrix_random_diagonal_oracle():
    rng = np.random.default_rng(2)
    d1, d2 = rng.normal(size=3), rng.normal(size=3)
    b = rng.normal(size=(2, 2))
    rep = GeneratorRep(dim=3, roots=[], rank=2, h={1: np.diag(d1), 2: np.diag(d2)})
    rep = rep.with_coefficients(b={(i + 1, j + 1): b[i, j] for i in range(2) for j in range(2)})
    hb = 0.4
    got = k_matrix(rep, QParams(0.6, hb))
    d = (d1, d2)
    expect = np.zeros(9)
    for x in range(3):
        for y in range(3):
            expect[3 * x + y] = math.exp(hb * sum(b[i, j] * d[i][x] * d[j][y] for i in range(2) for j in range(2)))
    assert np.allclose(np.diag(got), expect, rtol=1e-13, atol=0)
    assert np.count_nonzero(got - np.diag(np.diag(got))) == 0


@settings(max_examples=30, deadline=None)
@given(st.floats(-2, 2))
def test_k_matrix_inverse_pair(hb):
    rep = sl3_rep()
    P = k_matrix(rep, QParams(0.6, hb)) @ k_matrix(rep, QParams(0.6, -hb))
    assert np.abs(P - np.eye(9)).max() <= 1e-12


# ---- universal R factors ------------------------------------------------


@pytest.mark.parametrize("kind", [LE_DELTA, SIM_DELTA, GE_DELTA])
@pytest.mark.parametrize("rep", [fundamental_rep(), sl3_rep()], ids=["fund", "sl3"])
def test_empty_truncation_identity(kind, rep):
    trunc = TruncationSpec(n_max=10, m_max=-1, r=1)
    out = universal_r_factor(FactorSpec(kind), rep, trunc, QParams(0.6, 0.4))
    assert np.array_equal(out, np.eye(rep.dim**2))


def test_empty_window_identity():
    rep = fundamental_rep()
    out = windowed_factor(FactorSpec(WINDOWED, window=(3, 2)), rep, TruncationSpec(m_max=2), QParams(0.6))
    assert np.array_equal(out, np.eye(4))


def test_single_root_factor():
    rep = fundamental_rep()
    qp = QParams(0.6)
    out = universal_r_factor(FactorSpec(LE_DELTA), rep, TruncationSpec(n_max=20, m_max=0), qp)
    E = np.array([[0, 1], [0, 0]])
    expect = np.eye(4) + (0.6 - 1 / 0.6) * np.kron(E, E.T)
    assert np.array_equal(out, expect)


@pytest.mark.parametrize("kind", [LE_DELTA, GE_DELTA])
def test_sl3_factor_loop_oracle(kind):
    z, q = 0.7, 0.6
    rep = sl3_rep(z=z)
    out = universal_r_factor(FactorSpec(kind), rep, TruncationSpec(n_max=20, m_max=1), QParams(q))
    units = {"a1": (0, 1), "a2": (1, 2), "a1+a2": (0, 2)}
    expect = np.eye(9, dtype=complex)
    for gamma in ("a1", "a2", "a1+a2"):
        i, j = units[gamma]
        E = np.zeros((3, 3))
        E[i, j] = 1
        for m in (0, 1):
            if kind == LE_DELTA:
                e, f = z**m * E, E.T
            else:
                e, f = z ** (m + 1) * E.T, E
            expect = expect @ series_oracle((q - 1 / q) * np.kron(e, f), q, 20)
    assert np.allclose(out, expect, rtol=0, atol=1e-13)


@pytest.mark.parametrize("rep", [fundamental_rep(), sl3_rep()], ids=["fund", "sl3"])
def test_compose_empty_truncation(rep):
    trunc = TruncationSpec(n_max=10, m_max=-1, r=rep.rank)
    assert np.array_equal(compose_universal_r(rep, trunc, QParams(0.6, 0.0)), np.eye(rep.dim**2))
    qp = QParams(0.6, 0.35)
    diff = compose_universal_r(rep, trunc, qp) - k_matrix(rep, qp, trunc.r)
    assert np.abs(diff).max() <= 1e-13


@pytest.mark.parametrize("m_max", [0, 1, 2])
def test_compose_is_product_of_factors(m_max):
    rep = sl3_rep(z=0.8)
    trunc = TruncationSpec(n_max=12, m_max=m_max, r=2)
    qp = QParams(0.7, 0.2)
    f = universal_r_factors(rep, trunc, qp)
    prod = f[LE_DELTA] @ (f[SIM_DELTA] @ (f[GE_DELTA] @ f[K]))
    assert np.abs(compose_universal_r(rep, trunc, qp) - prod).max() <= 1e-13


def test_window_one_to_r_is_sim_delta():
    rep = sl3_rep(z=0.9)
    trunc = TruncationSpec(n_max=12, m_max=2, r=2)
    qp = QParams(0.7)
    sim = universal_r_factor(FactorSpec(SIM_DELTA), rep, trunc, qp)
    win = windowed_factor(FactorSpec(WINDOWED, window=(1, 2)), rep, trunc, qp)
    assert np.array_equal(sim, win)


def test_window_difference():
    rep = fundamental_rep()
    trunc = TruncationSpec(m_max=2, r=3)
    full = window_exponent(FactorSpec(WINDOWED, window=(2, 4)), rep, trunc)
    part = window_exponent(FactorSpec(WINDOWED, window=(2, 3)), rep, trunc)
    expect = np.zeros((4, 4), dtype=complex)
    for m in (1, 2):
        for kp in (1, 2, 3):
            e, f = rep.imag_pair(m, 4, kp)
            expect += np.kron(e, f)
    assert np.array_equal(full - part, expect)


def test_window_exponent_additive_exactly():
    rng = np.random.default_rng(3)
    rep = sl3_rep(z=0.5)
    u = {(m, i, j): float(rng.integers(-4, 5)) for m in range(1, 4) for i in range(1, 9) for j in range(1, 9)}
    beta = {(i, j): float(rng.integers(-4, 5)) for i in range(1, 9) for j in range(1, 9)}
    rep = rep.with_coefficients(u=u, beta=beta)
    trunc = TruncationSpec(m_max=3, r=4)
    for _ in range(50):
        lo = int(rng.integers(1, 8))
        hi = int(rng.integers(lo, 9))
        mid = int(rng.integers(lo - 1, hi + 1))
        family = "imaginary" if rng.random() < 0.5 else "cartan"

        def ex(a, b):
            return window_exponent(FactorSpec(WINDOWED, window=(a, b), family=family), rep, trunc)

        assert np.array_equal(ex(lo, hi), ex(lo, mid) + ex(mid + 1, hi))


def test_windowed_plus_one_and_q_exp():
    rep = fundamental_rep()
    trunc = TruncationSpec(n_max=30, m_max=1, r=1)
    qp = QParams(0.7)
    plain = windowed_factor(FactorSpec(WINDOWED, window=(1, 1)), rep, trunc, qp)
    plus = windowed_factor(FactorSpec(WINDOWED, window=(1, 1), plus_one=True), rep, trunc, qp)
    assert np.array_equal(plus - plain, np.eye(4))
    qe = windowed_factor(FactorSpec(WINDOWED, window=(1, 1), q_exp=True), rep, trunc, qp)
    X = (0.7 - 1 / 0.7) * window_exponent(FactorSpec(WINDOWED, window=(1, 1)), rep, trunc)
    assert np.allclose(qe, series_oracle(X, 0.7, 30), atol=1e-14)


def test_missing_generator():
    rep = fundamental_rep(m_levels=1)
    with pytest.raises(MissingGenerator):
        universal_r_factor(FactorSpec(LE_DELTA), rep, TruncationSpec(m_max=3), QParams(0.6))


def test_factor_spec_validation():
    with pytest.raises(ValueError):
        FactorSpec("NOPE")
    with pytest.raises(ValueError):
        TruncationSpec(n_max=65)
    with pytest.raises(ValueError):
        TruncationSpec(m_max=-2)


def test_r11_function_default_matches_compose():
    rep = fundamental_rep()
    trunc = TruncationSpec(n_max=10, m_max=1, r=1)
    qp = QParams(0.6, 0.3)
    r11 = r11_function(rep, trunc, qp)
    assert r11(1.0) == compose_universal_r(rep, trunc, qp)[0, 0]


# ---- ratio --------------------------------------------------------------


def test_t_ratio_identity():
    I = np.eye(3)
    assert np.allclose(t_ratio(I, I, I, I, I, I), I, atol=0)


def test_t_ratio_singular():
    I = np.eye(2)
    with pytest.raises(SingularDenominator):
        t_ratio(I, I, I, I, -I, I)


def test_t_ratio_diagonal_oracle():
    rng = np.random.default_rng(4)
    d = rng.uniform(0.5, 2, size=(6, 4))
    got = t_ratio(*(np.diag(x) for x in d))
    t1, t2, t3, t2p, t3p, t4 = d
    expect = t1 * (t2 * t3 + 1) / (t2p * t3p + 1) * t4
    assert np.allclose(np.diag(got), expect, rtol=1e-13, atol=0)
