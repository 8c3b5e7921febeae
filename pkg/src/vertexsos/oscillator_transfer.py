"""Truncated q-oscillators, the 3x3 operator-valued L-operator and its
finite-volume products.

The L-operator acts on ``C^3 (x) F (x) F`` where ``F`` is the Fock space
``|0>, ..., |n_max>``; operators carrying index ``i`` act on one Fock slot and
those carrying ``j`` on the other.  Factors are placed in the ordered product
``prod_{j=0..M} prod_{k=0..N}`` (``j``-major, ``k`` ascending).  For a factor
with odd ``k`` the two Fock slots swap roles, which realises the alternating
slot indicator on the lattice.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import GuardExceeded, RootOfUnity
from .q_algebra import q_integer
from .tensor_core import frobenius_norm, permute_factors

MAX_FOCK_CUTOFF = 16
MAX_FACTORS = 4096


@dataclass(frozen=True)
class QOscillatorRep:
    n_max: int
    q: complex
    A: np.ndarray
    Adag: np.ndarray
    D: np.ndarray
    QD: np.ndarray
    QDinv: np.ndarray

    @property
    def dim(self):
        return self.n_max + 1

    def q_power(self, exponent_diag):
        """``q^X`` for a diagonal exponent given by its diagonal entries."""
        return np.diag(self.q ** np.asarray(exponent_diag, dtype=complex))


def build_q_oscillator(n_max: int, q) -> QOscillatorRep:
    """``A|n> = [n]_q |n-1>``, ``Adag|n> = |n+1>`` (top state annihilated)."""
    if n_max < 1:
        raise ValueError("Fock cutoff must be >= 1")
    if n_max > MAX_FOCK_CUTOFF:
        raise GuardExceeded(f"Fock cutoff {n_max} exceeds {MAX_FOCK_CUTOFF}")
    q = complex(q)
    if q == 0:
        raise ValueError("q must be nonzero")
    dim = n_max + 1
    A = np.zeros((dim, dim), dtype=complex)
    Adag = np.zeros((dim, dim), dtype=complex)
    for n in range(1, dim):
        qn = q_integer(n, q)
        if qn == 0:
            raise RootOfUnity(f"[{n}]_q vanishes for q = {q}")
        A[n - 1, n] = qn
        Adag[n, n - 1] = 1.0
    levels = np.arange(dim)
    return QOscillatorRep(
        n_max=n_max,
        q=q,
        A=A,
        Adag=Adag,
        D=np.diag(levels).astype(complex),
        QD=np.diag(q ** levels.astype(complex)),
        QDinv=np.diag(q ** (-levels.astype(complex))),
    )


@dataclass(frozen=True)
class LOperatorParams:
    xi: complex = 1.0
    s: float = 0.0
    s_i: float = 0.0
    s_j: float = 0.0
    lambda3: Callable = field(default=lambda x: x, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "xi", complex(self.xi))
        if self.xi == 0 and min(self.s, self.s - self.s_i, self.s - self.s_j, self.s_i, self.s_j) < 0:
            raise ValueError("xi = 0 with a negative exponent")

    def xi_pow(self, e):
        if e == 0:
            return 1.0 + 0j
        return cmath.exp(e * cmath.log(self.xi))


def _site_ops(osc: QOscillatorRep):
    one = np.eye(osc.dim, dtype=complex)
    lev = np.arange(osc.dim)
    zeros = np.zeros(osc.dim)
    Di = np.add.outer(lev, zeros).ravel()  # D acting on slot 1, as a diagonal
    Dj = np.add.outer(zeros, lev).ravel()
    return {
        "a_i": np.kron(osc.A, one),
        "a_j": np.kron(one, osc.A),
        "ad_i": np.kron(osc.Adag, one),
        "ad_j": np.kron(one, osc.Adag),
        "Di": Di,
        "Dj": Dj,
    }


def l_operator_blocks(osc: QOscillatorRep, p: LOperatorParams) -> list:
    """The nine ``(n_max+1)^2``-dimensional blocks, row-major."""
    ops = _site_ops(osc)
    q = osc.q
    qp = osc.q_power
    Di, Dj = ops["Di"], ops["Dj"]
    a_i, a_j, ad_i, ad_j = ops["a_i"], ops["a_j"], ops["ad_i"], ops["ad_j"]
    xp = p.xi_pow
    zero = np.zeros((osc.dim**2,) * 2, dtype=complex)
    return [
        [
            qp(Di),
            q**-2 * a_i @ qp(-Di - Dj) * xp(p.s - p.s_i),
            a_i @ a_j @ qp(-Di - 3 * Dj) * xp(p.s - p.s_i - p.s_j),
        ],
        [
            ad_i @ qp(Di) * xp(p.s_i),
            qp(-Di + Dj) - q**-2 * qp(Di - Dj) * xp(p.s),
            -a_j @ qp(Di - 3 * Dj) * xp(p.s - p.s_j),
        ],
        [zero, ad_j @ qp(Dj) * xp(p.s_j), qp(-Dj)],
    ]


def l_operator(osc: QOscillatorRep, p: LOperatorParams, swap_slots=False) -> np.ndarray:
    """Assembled operator on ``C^3 (x) F (x) F`` (auxiliary index most significant)."""
    L = np.block(l_operator_blocks(osc, p))
    if swap_slots:
        L = permute_factors(L, (3, osc.dim, osc.dim), (0, 2, 1))
    return L


@dataclass(frozen=True)
class TransferPlan:
    M: int
    N: int
    n_max: int = 1
    q: complex = 0.5
    H: float = 0.0
    u: Sequence = ()
    v_prime: Sequence = ()
    w_pp: Sequence = ()
    alpha: Callable = field(default=None, compare=False, repr=False)
    i: int = 0
    site_params: Callable = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.M < 0 or self.N < 0:
            raise ValueError("volume bounds must be nonnegative")
        for name, need in (("v_prime", self.M + 1), ("w_pp", self.N + 1)):
            seq = getattr(self, name)
            if seq and len(seq) < need:
                raise ValueError(f"{name} must cover {need} sites")

    @property
    def n_factors(self):
        return (self.M + 1) * (self.N + 1)

    def sites(self):
        return [(j, k) for j in range(self.M + 1) for k in range(self.N + 1)]


def _factor(osc, plan, p, j, k):
    sp = plan.site_params(j, k, p) if plan.site_params is not None else p
    scalar = cmath.exp(sp.lambda3(osc.q**-2 * sp.xi_pow(sp.s)))
    return scalar * l_operator(osc, sp, swap_slots=bool(k % 2))


def factor_sequence(plan: TransferPlan, p: LOperatorParams) -> list:
    if plan.n_factors > MAX_FACTORS:
        raise GuardExceeded(f"{plan.n_factors} factors exceed {MAX_FACTORS}")
    osc = build_q_oscillator(plan.n_max, plan.q)
    return [_factor(osc, plan, p, j, k) for j, k in plan.sites()]


def ordered_product(factors) -> np.ndarray:
    out = factors[0]
    for F in factors[1:]:
        out = out @ F
    return out


def finite_volume_transfer(plan: TransferPlan, p: LOperatorParams):
    """Ordered product of prefactored L-operators and its full trace."""
    T = ordered_product(factor_sequence(plan, p))
    return T, complex(np.trace(T))


def monodromy_with_field(plan: TransferPlan, p: LOperatorParams) -> np.ndarray:
    """As :func:`finite_volume_transfer` with each factor dressed by
    ``diag(e^{alpha+H}, e^{alpha+H}, e^{alpha+H})`` on the auxiliary space.

    ``plan.alpha(i, j, k)`` is the per-site phase (0 when unset).
    """
    # the dressing is scalar on the auxiliary space, so it commutes through
    # the product and is accumulated in a single exponential
    if plan.alpha is None:
        total = plan.H * plan.n_factors
    else:
        total = math.fsum(plan.alpha(plan.i, j, k) + plan.H for j, k in plan.sites())
    T = ordered_product(factor_sequence(plan, p))
    return T if total == 0 else cmath.exp(total) * T


def transfer_commutator(plan: TransferPlan, p1: LOperatorParams, p2: LOperatorParams) -> float:
    """``||[T(p1), T(p2)]||_F`` relative to ``||T(p1)|| ||T(p2)||``; measured, never assumed zero."""
    T1, _ = finite_volume_transfer(plan, p1)
    T2, _ = finite_volume_transfer(plan, p2)
    scale = frobenius_norm(T1) * frobenius_norm(T2)
    return frobenius_norm(T1 @ T2 - T2 @ T1) / scale if scale else 0.0


def convergence_probe(plans: Sequence[TransferPlan], p: LOperatorParams) -> list:
    """Normalised traces and successive differences for growing volumes.

    Each product is scaled to unit Frobenius norm; ``difference`` is the
    Frobenius distance to the previous normalised product (``None`` first).
    """
    report = []
    prev = None
    for plan in plans:
        T, tr = finite_volume_transfer(plan, p)
        nrm = frobenius_norm(T)
        Tn = T / nrm if nrm else T
        entry = {
            "M": plan.M,
            "N": plan.N,
            "trace": tr,
            "normalized_trace": complex(np.trace(Tn)),
            "difference": None if prev is None or prev.shape != Tn.shape else frobenius_norm(Tn - prev),
        }
        report.append(entry)
        prev = Tn
    return report
