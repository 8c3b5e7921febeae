"""q-combinatorics and truncated universal R-matrix factors.

Generator tables
----------------
A :class:`GeneratorRep` carries concrete matrices for

* real-root vectors ``e[(label, m)]``, ``f[(label, m)]`` where ``label`` is a
  positive root name (``"a1"``, ``"a1+a2"``) for the ``gamma + m delta`` family
  or ``"d-" + name`` for the ``delta - gamma + m delta`` family;
* imaginary-root vectors ``e_im[(m, k)]``, ``f_im[(m, k)]`` for ``m >= 1`` and
  index ``k >= 1``;
* Cartan elements ``h[k]``.

Coefficients ``s``, ``u``, ``b``, ``beta`` are looked up with default 1.

Factor conventions
------------------
* ``LE_DELTA`` / ``GE_DELTA``: ordered product over roots (in the rep's
  order) and, inside each root, ``m = 0 .. m_max`` of
  ``exp_q[(q - 1/q) s^{-1}_{m,root} e (x) f]``.
* ``SIM_DELTA``: ``exp[(q - 1/q) sum_{m=1..m_max} sum_{i,j=1..r} u_{m,ij} e_im (x) f_im]``.
* ``K``: ``exp[hbar sum_{i,j=1..r} b_ij h_i (x) h_j]``.
* ``WINDOWED``: the imaginary (or Cartan) double sum with the first index
  restricted to ``lo..hi`` and the second running over ``1..r`` (Cartan
  family: second index ``!= `` first).  ``window=(1, r)`` reproduces
  ``SIM_DELTA``.  ``plus_one`` adds the identity after exponentiation.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from .errors import MissingGenerator, RootOfUnity, SingularDenominator, SingularMatrix
from .tensor_core import as_operator, mat_inverse

MAX_SERIES_ORDER = 64
ROOT_OF_UNITY_ATOL = 1e-14


@dataclass(frozen=True)
class QParams:
    q: complex
    hbar: float = 0.0
    order: int = MAX_SERIES_ORDER

    def __post_init__(self):
        q = complex(self.q)
        if q == 0:
            raise ValueError("q must be nonzero")
        object.__setattr__(self, "q", q)
        _check_q(q, self.order)

    @property
    def qmq(self):
        """``q - 1/q``."""
        return self.q - 1.0 / self.q


@dataclass(frozen=True)
class TruncationSpec:
    n_max: int = 20
    m_max: int = 0
    r: int = 1

    def __post_init__(self):
        if not 0 <= self.n_max <= MAX_SERIES_ORDER:
            raise ValueError(f"series order must lie in 0..{MAX_SERIES_ORDER}")
        if self.m_max < -1:
            raise ValueError("m_max must be >= -1")
        if self.r < 1:
            raise ValueError("rank bound r must be positive")


def _check_q(q, n):
    for i in range(1, n + 1):
        if abs(1 - q**i) <= ROOT_OF_UNITY_ATOL:
            raise RootOfUnity(f"1 - q^{i} vanishes for q = {q}")


def q_integer(n, q) -> complex:
    """``[n]_q = (1 - q^n) / (1 - q)`` evaluated as ``1 + q + ... + q^{n-1}``."""
    return sum(q**k for k in range(n)) if n > 0 else 0.0


def q_factorial(n: int, q) -> complex:
    """``prod_{i<=n} (1 - q^i) / (1 - q)^n``; 1 for ``n = 0``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    q = complex(q)
    _check_q(q, n)
    out = 1.0 + 0j
    for i in range(1, n + 1):
        out *= q_integer(i, q)
    return out


def q_exponential(X, q, n_max: int):
    """Partial sum ``sum_{n=0}^{n_max} X^n / [n]_q!`` for a scalar or square matrix."""
    q = complex(q)
    _check_q(q, n_max)
    if np.ndim(X) == 0:
        z = complex(X)
        term, total, fact = 1.0 + 0j, 1.0 + 0j, 1.0 + 0j
        for n in range(1, n_max + 1):
            term *= z
            fact *= q_integer(n, q)
            total += term / fact
        return total
    X = as_operator(X)
    ident = np.eye(X.shape[0], dtype=complex)
    total = ident.copy()
    power = ident
    fact = 1.0 + 0j
    for n in range(1, n_max + 1):
        power = power @ X
        if not power.any():
            break
        fact *= q_integer(n, q)
        total = total + power / fact
    return total


# --------------------------------------------------------------------------
# generator representations


@dataclass
class GeneratorRep:
    dim: int
    roots: list
    rank: int
    e: dict = field(default_factory=dict)
    f: dict = field(default_factory=dict)
    e_im: dict = field(default_factory=dict)
    f_im: dict = field(default_factory=dict)
    h: dict = field(default_factory=dict)
    s: dict = field(default_factory=dict)
    u: dict = field(default_factory=dict)
    b: dict = field(default_factory=dict)
    beta: dict = field(default_factory=dict)
    name: str = "custom"

    def _get(self, table, key, what):
        try:
            return table[key]
        except KeyError:
            raise MissingGenerator(f"{self.name} rep has no {what}{key}") from None

    def real_pair(self, label, m):
        return self._get(self.e, (label, m), "e"), self._get(self.f, (label, m), "f")

    def imag_pair(self, m, k, kp):
        return self._get(self.e_im, (m, k), "e_im"), self._get(self.f_im, (m, kp), "f_im")

    def cartan(self, k):
        return self._get(self.h, k, "h")

    def s_coef(self, m, label):
        return self.s.get((m, label), 1.0)

    def u_coef(self, m, i, j):
        return self.u.get((m, i, j), 1.0)

    def b_coef(self, i, j):
        return self.b.get((i, j), 1.0)

    def beta_coef(self, i, j):
        return self.beta.get((i, j), 1.0)

    def with_coefficients(self, **tables):
        return replace(self, **{k: dict(v) for k, v in tables.items()})


def _unit(n, i, j):
    E = np.zeros((n, n), dtype=complex)
    E[i, j] = 1.0
    return E


def _populate(rep, raising, cartan, z, m_levels, k_levels):
    """Fill the tables of ``rep`` from simple data.

    ``e_{gamma+m delta} = z^m E_gamma``, ``f_{gamma+m delta} = F_gamma``,
    ``e_{delta-gamma+m delta} = z^{m+1} F_gamma``, ``f_{delta-gamma+m delta} = E_gamma``;
    imaginary vectors and Cartan elements of index ``k`` reuse
    ``h_{((k-1) mod rank) + 1}`` scaled by ``z^m``.
    """
    for label, E in raising.items():
        F = E.T.copy()
        for m in range(m_levels + 1):
            rep.e[(label, m)] = z**m * E
            rep.f[(label, m)] = F
            rep.e[("d-" + label, m)] = z ** (m + 1) * F
            rep.f[("d-" + label, m)] = E.copy()
    for k in range(1, k_levels + 1):
        hk = cartan[(k - 1) % len(cartan)]
        rep.h[k] = hk
        for m in range(1, m_levels + 1):
            rep.e_im[(m, k)] = z**m * hk
            rep.f_im[(m, k)] = hk
    return rep


def fundamental_rep(z=1.0, m_levels=4, k_levels=8) -> GeneratorRep:
    """Two-dimensional rep: ``E = E_01``, ``F = E_10``, ``h = diag(1, -1)``."""
    rep = GeneratorRep(dim=2, roots=["a1"], rank=1, name="fundamental2")
    raising = {"a1": _unit(2, 0, 1)}
    cartan = [np.diag([1.0, -1.0]).astype(complex)]
    return _populate(rep, raising, cartan, z, m_levels, k_levels)


def sl3_rep(z=1.0, m_levels=4, k_levels=8) -> GeneratorRep:
    """Three-dimensional rep with simple roots ``a1``, ``a2`` and ``a1+a2``."""
    rep = GeneratorRep(dim=3, roots=["a1", "a2", "a1+a2"], rank=2, name="sl3")
    raising = {"a1": _unit(3, 0, 1), "a2": _unit(3, 1, 2), "a1+a2": _unit(3, 0, 2)}
    cartan = [np.diag([1.0, -1.0, 0.0]).astype(complex), np.diag([0.0, 1.0, -1.0]).astype(complex)]
    return _populate(rep, raising, cartan, z, m_levels, k_levels)


BUILTIN_REPS = {"fundamental2": fundamental_rep, "sl3": sl3_rep}


# --------------------------------------------------------------------------
# factors

LE_DELTA, SIM_DELTA, GE_DELTA, K, WINDOWED = "LE_DELTA", "SIM_DELTA", "GE_DELTA", "K", "WINDOWED"


@dataclass(frozen=True)
class FactorSpec:
    kind: str
    window: tuple = (1, 1)
    plus_one: bool = False
    family: str = "imaginary"
    q_exp: bool = False

    def __post_init__(self):
        if self.kind not in (LE_DELTA, SIM_DELTA, GE_DELTA, K, WINDOWED):
            raise ValueError(f"unknown factor kind {self.kind!r}")
        if self.family not in ("imaginary", "cartan"):
            raise ValueError("family must be 'imaginary' or 'cartan'")
        object.__setattr__(self, "window", tuple(int(x) for x in self.window))

    @property
    def empty(self):
        lo, hi = self.window
        return lo > hi


def _eye2(rep):
    return np.eye(rep.dim * rep.dim, dtype=complex)


def k_matrix(rep: GeneratorRep, qp: QParams, r=None) -> np.ndarray:
    r = rep.rank if r is None else r
    X = np.zeros((rep.dim**2,) * 2, dtype=complex)
    for i in range(1, r + 1):
        for j in range(1, r + 1):
            X += rep.b_coef(i, j) * np.kron(rep.cartan(i), rep.cartan(j))
    return scipy.linalg.expm(qp.hbar * X)


def window_exponent(spec: FactorSpec, rep: GeneratorRep, trunc: TruncationSpec) -> np.ndarray:
    """Bare double sum of a windowed factor, before the ``q - 1/q`` or ``hbar`` prefactor."""
    lo, hi = spec.window
    X = np.zeros((rep.dim**2,) * 2, dtype=complex)
    if spec.family == "imaginary":
        for m in range(1, trunc.m_max + 1):
            for k in range(lo, hi + 1):
                for kp in range(1, trunc.r + 1):
                    e, f = rep.imag_pair(m, k, kp)
                    X += rep.u_coef(m, k, kp) * np.kron(e, f)
    else:
        for k in range(lo, hi + 1):
            for kp in range(1, trunc.r + 1):
                if kp == k:
                    continue
                X += rep.beta_coef(k, kp) * np.kron(rep.cartan(k), rep.cartan(kp))
    return X


def windowed_factor(spec: FactorSpec, rep, trunc, qp) -> np.ndarray:
    if spec.empty:
        return _eye2(rep)
    X = window_exponent(spec, rep, trunc)
    pref = qp.qmq if spec.family == "imaginary" else qp.hbar
    if spec.q_exp:
        out = q_exponential(pref * X, qp.q, trunc.n_max)
    else:
        out = scipy.linalg.expm(pref * X)
    if spec.plus_one:
        out = out + _eye2(rep)
    return out


def universal_r_factor(spec: FactorSpec, rep, trunc, qp) -> np.ndarray:
    if spec.kind == K:
        return k_matrix(rep, qp, trunc.r)
    if spec.kind == WINDOWED:
        return windowed_factor(spec, rep, trunc, qp)
    if spec.kind == SIM_DELTA:
        if trunc.m_max < 1:
            return _eye2(rep)
        sim = FactorSpec(WINDOWED, window=(1, trunc.r), family="imaginary")
        return scipy.linalg.expm(qp.qmq * window_exponent(sim, rep, trunc))
    prefix = "" if spec.kind == LE_DELTA else "d-"
    out = _eye2(rep)
    for gamma in rep.roots:
        label = prefix + gamma
        for m in range(trunc.m_max + 1):
            e, f = rep.real_pair(label, m)
            arg = qp.qmq / rep.s_coef(m, label) * np.kron(e, f)
            out = out @ q_exponential(arg, qp.q, trunc.n_max)
    return out


def universal_r_factors(rep, trunc, qp) -> dict:
    return {
        kind: universal_r_factor(FactorSpec(kind), rep, trunc, qp)
        for kind in (LE_DELTA, SIM_DELTA, GE_DELTA, K)
    }


def compose_universal_r(rep, trunc, qp) -> np.ndarray:
    fac = universal_r_factors(rep, trunc, qp)
    return fac[LE_DELTA] @ fac[SIM_DELTA] @ fac[GE_DELTA] @ fac[K]


def r11_function(rep, trunc, qp):
    """``x -> R[0, 0]`` of the composed R-matrix with every ``u_{m,ij}`` set to ``x``."""

    def r11(x):
        u = {
            (m, i, j): x
            for m in range(1, trunc.m_max + 1)
            for i in range(1, trunc.r + 1)
            for j in range(1, trunc.r + 1)
        }
        return complex(compose_universal_r(rep.with_coefficients(u=u), trunc, qp)[0, 0])

    return r11


def t_ratio(T1, T2, T3, T2p, T3p, T4) -> np.ndarray:
    """``T1 (T2 T3 + I) (T2' T3' + I)^{-1} T4``."""
    T1, T2, T3, T2p, T3p, T4 = (as_operator(T) for T in (T1, T2, T3, T2p, T3p, T4))
    ident = np.eye(T1.shape[0], dtype=complex)
    try:
        den_inv = mat_inverse(T2p @ T3p + ident)
    except SingularMatrix as exc:
        raise SingularDenominator(f"T2' T3' + I is singular: {exc}") from None
    return T1 @ (T2 @ T3 + ident) @ den_inv @ T4

