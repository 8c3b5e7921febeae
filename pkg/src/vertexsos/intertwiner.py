"""Vertex-to-SOS intertwining relations for the 20V (d=3) and reduced 6V (d=2) cases.

Heights live on the integers; one lattice step changes the height by an
element of ``STEPS[d]``.  An intertwining vector is attached to each oriented
height edge ``(a, b)`` and spectral slot ``'u'`` or ``'v'``; its component
index is the step taken, so the vector for edge ``(a, b)`` has the pinned
component ``STEPS[d].index(b - a)``.

For the two-step paths ``a -> b -> c`` starting at a base height ``a`` the
path matrix ``Phi(s, t)`` has one column per path, namely
``psi(s)^a_b (x) psi(t)^b_c``.  The intertwining relation then reads

    R Phi(u, v) = Phi(v, u) W

where ``W`` only couples paths with the same endpoint ``c`` (the sum over the
intermediate height ``b'``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    DimensionError,
    NonConvergence,
    RankDeficient,
    ZeroC1,
    ZeroComponent,
    ZeroDenominator,
)
from .tensor_core import as_operator, as_tensor, frobenius_norm

STEPS = {2: (1, -1), 3: (1, 0, -1)}
COMPONENTS = ("beta", "gamma", "Z")
MONOTONE_SLACK = 1e-14


# ---------------------------------------------------------------- relation system

# component pairings of the nine groups: (site l, site l+1) on the left and
# on the right.  The displayed fourth group repeats (beta, beta) on the left
# while its right side is (gamma, beta); the consistent pairing is used and
# the display is kept as a note.
_DISPLAY_PAIRS = (
    ((0, 0), (0, 0)),
    ((0, 1), (0, 1)),
    ((0, 2), (0, 2)),
    ((1, 0), (1, 0)),
    ((1, 1), (1, 1)),
    ((1, 2), (1, 2)),
    ((2, 0), (2, 0)),
    ((2, 1), (2, 1)),
    ((2, 2), (2, 2)),
)
_DISPLAY_NOTES = {4: "displayed left side reads beta_l beta_{l+1}; read as gamma_l beta_{l+1}"}

AS_DISPLAYED = "as-displayed"
FULL = "full"


@dataclass(frozen=True)
class RelationGroup:
    index: int
    lhs: tuple  # components at (l, l+1), spectral slots (u, v)
    rhs: tuple  # components at (l, l+1), spectral slots (v, u)
    entries: tuple  # (i, j) entry labels, or path columns in full mode
    note: str = ""

    @property
    def n_relations(self):
        return len(self.entries)


@dataclass(frozen=True)
class RelationSystem:
    R: np.ndarray
    d: int
    mode: str
    u: complex
    v: complex
    groups: tuple

    @property
    def n_groups(self):
        return len(self.groups)

    @property
    def n_relations(self):
        return sum(g.n_relations for g in self.groups)

    def evaluate_display(self, X: dict, W) -> np.ndarray:
        """Residuals of the 16-fold relations.

        ``X`` maps ``('l', 'u')``, ``('l', 'v')``, ``('l+1', 'u')`` and
        ``('l+1', 'v')`` to 3-vectors ``(beta, gamma, Z)``; ``W`` supplies
        at least the leading 4x4 block.
        """
        if self.mode != AS_DISPLAYED:
            raise DimensionError("evaluate_display needs an as-displayed system")
        W = as_tensor(W)
        xs = {k: as_tensor(v, (3,)) for k, v in X.items()}
        out = []
        for g in self.groups:
            (s, t), (sp, tp) = g.lhs, g.rhs
            left = xs[("l", "u")][s] * xs[("l+1", "v")][t]
            right = xs[("l", "v")][sp] * xs[("l+1", "u")][tp]
            for i, j in g.entries:
                out.append(self.R[i, j] * left - right * W[i, j])
        return np.array(out)

    def evaluate_full(self, psi: dict, W, base_height=0) -> np.ndarray:
        """Residuals of ``R Phi(u, v) - Phi(v, u) W``, one per (group, path)."""
        if self.mode != FULL:
            raise DimensionError("evaluate_full needs a full system")
        layout = PathLayout(self.d, base_height)
        F = self.R @ layout.phi(psi, "u", "v") - layout.phi(psi, "v", "u") @ as_tensor(W)
        return np.array([F[g.index - 1, p] for g in self.groups for p in g.entries])


def build_relation_system(R, u=0.0, v=0.0, mode=FULL) -> RelationSystem:
    """Enumerate the componentwise relations of the intertwining system.

    ``as-displayed``: nine groups, each expanded over the 4x4 entry labels
    ``(i, j)`` (needs d = 3).  ``full``: one group per component pair
    ``(s, t)`` with one relation per path column, ``d^4`` in all.
    """
    R = as_operator(R)
    d = int(round(np.sqrt(R.shape[0])))
    if d * d != R.shape[0] or d not in STEPS:
        raise DimensionError(f"R must be 4x4 or 9x9, got {R.shape}")
    if mode == AS_DISPLAYED:
        if d != 3:
            raise DimensionError("the as-displayed system is defined for d = 3")
        entries = tuple((i, j) for i in range(4) for j in range(4))
        groups = tuple(
            RelationGroup(n + 1, lhs, rhs, entries, _DISPLAY_NOTES.get(n + 1, ""))
            for n, (lhs, rhs) in enumerate(_DISPLAY_PAIRS)
        )
    elif mode == FULL:
        cols = tuple(range(d * d))
        groups = tuple(
            RelationGroup(s * d + t + 1, (s, t), (s, t), cols)
            for s in range(d)
            for t in range(d)
        )
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return RelationSystem(R, d, mode, complex(u), complex(v), groups)


# ---------------------------------------------------------------- sequence identifications


def _product(c1, site1, c2, site2):
    return ((c1, site1, "v"), (c2, site2, "u"))


SEQUENCE_DOMAIN = tuple(_product(s, "l", t, "l+1") for s in COMPONENTS for t in COMPONENTS)


def identify(product):
    """``x(v) y(u) -> y(v) x(u)``: entry labels swap, spectral slots stay."""
    (c1, s1, p1), (c2, s2, p2) = product
    return ((c2, s2, p1), (c1, s1, p2))


def sequence_identifications() -> dict:
    """The nine pairings ``x_l(v) y_{l+1}(u) <-> y_{l+1}(v) x_l(u)``."""
    return {p: identify(p) for p in SEQUENCE_DOMAIN}


# ---------------------------------------------------------------- paths and residuals


class PathLayout:
    """Two-step height paths from a base height."""

    def __init__(self, d, base_height=0):
        if d not in STEPS:
            raise DimensionError(f"no step set for d = {d}")
        self.d = d
        self.a = int(base_height)
        self.steps = STEPS[d]
        self.paths = []
        self.edges = []  # (x, y, step index)
        for k1 in range(d):
            for k2 in range(d):
                b = self.a + self.steps[k1]
                c = b + self.steps[k2]
                self.paths.append((self.a, b, c))
                for e in ((self.a, b, k1), (b, c, k2)):
                    if e not in self.edges:
                        self.edges.append(e)
        ends = [p[2] for p in self.paths]
        self.mask = np.array([[ends[p] == ends[q] for q in range(d * d)] for p in range(d * d)])

    def step_index(self, x, y):
        return self.steps.index(y - x)

    def vector_ids(self):
        return [(x, y, t) for t in ("u", "v") for (x, y, _) in self.edges]

    def phi(self, psi, s, t) -> np.ndarray:
        cols = [np.kron(psi[(a, b, s)], psi[(b, c, t)]) for a, b, c in self.paths]
        return np.array(cols).T

    def alternatives(self, p):
        """Paths sharing the endpoint of path ``p`` (the ``b'`` range)."""
        return [q for q in range(len(self.paths)) if self.mask[q, p]]


def intertwining_residual(R, psi_u_ab, psi_v_bc, psi_v_ab_list, psi_u_bc_list, W) -> float:
    """``|| R (psi(u)^a_b (x) psi(v)^b_c) - sum_b' W_b' psi(v)^a_b' (x) psi(u)^b'_c ||``.

    ``W`` is one weight per ``b'`` (a scalar is accepted for a single ``b'``).
    """
    R = as_operator(R)
    if len(psi_v_ab_list) == 0 or len(psi_v_ab_list) != len(psi_u_bc_list):
        raise DimensionError("need matching, nonempty b' lists")
    weights = np.atleast_1d(as_tensor(W))
    if weights.shape != (len(psi_v_ab_list),):
        raise DimensionError(f"{weights.shape[0]} weights for {len(psi_v_ab_list)} intermediate heights")
    lhs = R @ np.kron(as_tensor(psi_u_ab), as_tensor(psi_v_bc))
    if lhs.shape[0] != R.shape[0]:
        raise DimensionError("vector sizes do not match R")
    rhs = np.zeros_like(lhs)
    for wb, x, y in zip(weights, psi_v_ab_list, psi_u_bc_list):
        rhs = rhs + wb * np.kron(as_tensor(x), as_tensor(y))
    return frobenius_norm(lhs - rhs)


def solution_residual(R, psi: dict, W, layout: PathLayout) -> float:
    """Combine the per-path residuals (root of the sum of squares)."""
    W = as_tensor(W)
    total = 0.0
    for p, (a, b, c) in enumerate(layout.paths):
        alts = layout.alternatives(p)
        r = intertwining_residual(
            R,
            psi[(a, b, "u")],
            psi[(b, c, "v")],
            [psi[(layout.paths[q][0], layout.paths[q][1], "v")] for q in alts],
            [psi[(layout.paths[q][1], layout.paths[q][2], "u")] for q in alts],
            [W[q, p] for q in alts],
        )
        total += r * r
    return float(np.sqrt(total))


# ---------------------------------------------------------------- solutions


@dataclass(frozen=True)
class IntertwinerGauge:
    pins: tuple  # ((vector id, component, value), ...)

    def __post_init__(self):
        if len(self.pins) < 3:
            raise ValueError("a gauge needs at least 3 pins")

    @classmethod
    def step_gauge(cls, layout: PathLayout):
        """Pin the step component of every edge vector to 1."""
        return cls(tuple((vid, layout.step_index(vid[0], vid[1]), 1.0) for vid in layout.vector_ids()))

    @classmethod
    def theorem_gauge(cls):
        return cls((("ab'", 0, 1.0), ("ab'", 1, 1.0), ("b'c", 0, 1.0), ("b'c", 2, 1.0)))


# the three weight values and the height-move triples they are attached to,
# as offsets from l; each value is listed under both displayed forms
THEOREM_TRIPLES = (
    ("C1", (((2, 1), (1, 1), (0, 1)), ((1, 0), (0, 0), (-1, 0)))),
    ("C2", (((-1, 0), (0, 0), (1, 0)), ((0, -1), (-1, -1), (0, -1)))),
    ("C3", (((-2, 1), (-1, -1), (0, 1)), ((-1, 0), (0, 0), (1, 0)))),
)


@dataclass(frozen=True)
class SOSWeightMatrix:
    mode: str  # "FULL" or "THEOREM"
    values: object  # ndarray for FULL, dict name -> complex for THEOREM
    l: int = 0

    def __post_init__(self):
        if self.mode == "THEOREM" and self.values["C1"] == 0:
            raise ZeroC1("C1 must be nonzero")

    def triples(self):
        """THEOREM mode: list of (name, absolute height forms, value)."""
        out = []
        for name, forms in THEOREM_TRIPLES:
            absolute = [[[self.l + x, self.l + y] for x, y in form] for form in forms]
            out.append((name, absolute, self.values[name]))
        return out


def _cx(z):
    z = complex(z)
    return [z.real, z.imag]


def _cx_array(a):
    a = np.asarray(a, dtype=complex)
    if a.ndim == 0:
        return _cx(a)
    return [_cx_array(x) for x in a]


@dataclass
class IntertwinerSolution:
    psi_ab: object
    psi_bc: object
    W: SOSWeightMatrix
    residual: float | None  # None for the closed form; see theorem_relation_residual
    method: str  # NUMERIC or THEOREM
    gauge: IntertwinerGauge
    heights: dict
    reduction_map: str | None = None
    history: list = field(default_factory=list)
    psi: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        if self.method == "THEOREM":
            psi_ab, psi_bc = _cx_array(self.psi_ab), _cx_array(self.psi_bc)
            W_values = [{"name": n, "forms": f, "value": _cx(v)} for n, f, v in self.W.triples()]
        else:
            psi_ab = {f"{a},{b},{t}": _cx_array(x) for (a, b, t), x in self.psi_ab.items()}
            psi_bc = {f"{a},{b},{t}": _cx_array(x) for (a, b, t), x in self.psi_bc.items()}
            W_values = _cx_array(self.W.values)
        return {
            "psi_ab": psi_ab,
            "psi_bc": psi_bc,
            "W_mode": self.W.mode,
            "W_values": W_values,
            "residual": self.residual,
            "method": self.method,
            "gauge": [[str(vid) if not isinstance(vid, str) else vid, c, _cx(val)] for vid, c, val in self.gauge.pins],
            "heights": self.heights,
            "reduction_map": self.reduction_map,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


# ---------------------------------------------------------------- numeric solver


def _initial_psi(layout, gauge):
    psi = {}
    for vid in layout.vector_ids():
        x = np.full(layout.d, 0.5, dtype=complex)
        # without a pin on the step component the all-equal start is degenerate
        x[layout.step_index(vid[0], vid[1])] = 1.0
        psi[vid] = x
    for vid, comp, val in gauge.pins:
        if vid not in psi:
            raise DimensionError(f"gauge pins unknown vector {vid}")
        psi[vid][comp] = val
    return psi


def _w_step(R, psi, layout):
    d2 = layout.d**2
    L = R @ layout.phi(psi, "u", "v")
    P = layout.phi(psi, "v", "u")
    W = np.zeros((d2, d2), dtype=complex)
    for p in range(d2):
        S = layout.alternatives(p)
        w, _, rank, _ = np.linalg.lstsq(P[:, S], L[:, p], rcond=None)
        if rank < len(S):
            raise RankDeficient(f"W block for path {layout.paths[p]} has rank {rank} < {len(S)}", block=("W", p))
        # one step of iterative refinement
        w = w + np.linalg.lstsq(P[:, S], L[:, p] - P[:, S] @ w, rcond=None)[0]
        W[S, p] = w
    return W


def _psi_step(R, psi, W, layout, slot, pinned):
    free = [(vid, i) for vid in layout.vector_ids() if vid[2] == slot for i in range(layout.d) if (vid, i) not in pinned]
    if not free:
        return

    def residual_of(theta):
        for (vid, i), th in zip(free, theta):
            psi[vid][i] = th
        return (R @ layout.phi(psi, "u", "v") - layout.phi(psi, "v", "u") @ W).ravel()

    n = len(free)
    theta0 = np.array([psi[vid][i] for vid, i in free])
    base = residual_of(np.zeros(n))
    # the residual is affine in the entries of one slot; solve for a correction
    # to the current values so an exact solution stays put
    A = np.array([residual_of(np.eye(n)[j]) - base for j in range(n)]).T
    r0 = residual_of(theta0)
    delta, *_ = np.linalg.lstsq(A, -r0, rcond=None)
    residual_of(theta0 + delta)


def _numeric_solution(R, psi, W, layout, gauge, u, v, history):
    copy = {k: x.copy() for k, x in psi.items()}
    return IntertwinerSolution(
        psi_ab={k: x for k, x in copy.items() if k[0] == layout.a},
        psi_bc={k: x for k, x in copy.items() if k[0] != layout.a},
        W=SOSWeightMatrix("FULL", W.copy()),
        residual=solution_residual(R, copy, W, layout),
        method="NUMERIC",
        gauge=gauge,
        heights={"a": layout.a, "paths": [list(p) for p in layout.paths], "u": _cx(u), "v": _cx(v)},
        history=list(history),
        psi=copy,
    )


def solve_intertwiner_numeric(R, u=0.0, v=0.0, gauge=None, tol=1e-12, max_iter=500, base_height=0):
    """Alternating least squares for ``R Phi(u, v) = Phi(v, u) W``.

    Each sweep solves exactly for ``W`` (column by column over the
    same-endpoint paths), then for the free entries of the ``u`` vectors,
    then of the ``v`` vectors; each block is linear so the residual never
    increases.  Stops once the residual is below ``tol`` or changes by less
    than ``tol``; raises :class:`NonConvergence` when it settles above
    ``100 tol``.
    """
    R = as_operator(R)
    if tol <= 0:
        raise ValueError("tol must be positive")
    d = int(round(np.sqrt(R.shape[0])))
    if d * d != R.shape[0] or d not in STEPS:
        raise DimensionError(f"R must be 4x4 or 9x9, got {R.shape}")
    layout = PathLayout(d, base_height)
    gauge = gauge or IntertwinerGauge.step_gauge(layout)
    pinned = {(vid, c) for vid, c, _ in gauge.pins}
    psi = _initial_psi(layout, gauge)
    history = []
    W = None
    for _ in range(max_iter):
        W = _w_step(R, psi, layout)
        _psi_step(R, psi, W, layout, "u", pinned)
        _psi_step(R, psi, W, layout, "v", pinned)
        # same quantity as solution_residual, evaluated as one matrix norm
        res = frobenius_norm(R @ layout.phi(psi, "u", "v") - layout.phi(psi, "v", "u") @ W)
        prev = history[-1] if history else None
        history.append(res)
        if res <= tol or (prev is not None and abs(prev - res) < tol):
            break
    sol = _numeric_solution(R, psi, W, layout, gauge, u, v, history)
    if sol.residual > 100 * tol:
        raise NonConvergence(
            f"residual {sol.residual:.3e} after {len(history)} sweeps", partial=sol
        )
    return sol


def is_monotone(history, slack=MONOTONE_SLACK) -> bool:
    return all(b <= a + slack for a, b in zip(history, history[1:]))


# ---------------------------------------------------------------- closed form

REDUCTIONS = {
    "first": lambda x: x[0],
    "sum": lambda x: sum(x),
    "mean": lambda x: sum(x) / len(x),
}


def reduce_parameter(x, reduction):
    if np.ndim(x) == 0:
        return complex(x)
    try:
        fn = REDUCTIONS[reduction]
    except KeyError:
        raise ValueError(f"unknown reduction {reduction!r}") from None
    return complex(fn(list(np.ravel(x))))


def theorem_weights(u, R11_of: Callable, s):
    """``(C1, C2, C3)`` for spectral argument ``u`` and shift ``s = l + w``."""
    C1 = complex(R11_of(u)) + 1
    if C1 == 0:
        raise ZeroC1(f"C1 = R11({u}) + 1 vanishes")
    den = complex(R11_of(s))
    if den == 0:
        raise ZeroDenominator(f"R11({s}) = 0")
    return C1, _quotient(R11_of(u + s), den), _quotient(R11_of(u * (1 + s)), den)


def _quotient(num, den):
    # complex division (numpy's in particular) does not always return 1 for x / x
    num = complex(num)
    return 1.0 + 0j if num == den else num / den


def theorem_vectors(C1):
    """Gauge-fixed vectors ``[1, 1, C1]`` and ``[1, 1/C1, 1]``."""
    C1 = complex(C1)
    if C1 == 0:
        raise ZeroC1("C1 must be nonzero")
    return np.array([1, 1, C1], dtype=complex), np.array([1, 1 / C1, 1], dtype=complex)


def theorem_solution(l, u, R11_of: Callable, w_aux=0.0, reduction="first") -> IntertwinerSolution:
    """Closed-form weights and vectors.

    ``l`` and ``w_aux`` may be scalars or real vectors; vectors are reduced
    to scalars with ``reduction`` before entering the weight arguments.
    """
    lr = reduce_parameter(l, reduction)
    wr = reduce_parameter(w_aux, reduction)
    s = lr + wr
    C1, C2, C3 = theorem_weights(complex(u), R11_of, s)
    psi_ab, psi_bc = theorem_vectors(C1)
    l_int = int(round(lr.real))
    return IntertwinerSolution(
        psi_ab=psi_ab,
        psi_bc=psi_bc,
        W=SOSWeightMatrix("THEOREM", {"C1": C1, "C2": C2, "C3": C3}, l=l_int),
        residual=None,
        method="THEOREM",
        gauge=IntertwinerGauge.theorem_gauge(),
        heights={"a": l_int, "b'": l_int + 1, "c": l_int + 2, "u": _cx(u), "shift": _cx(s)},
        reduction_map=reduction if np.ndim(l) or np.ndim(w_aux) else None,
    )


def theorem_relation_residual(l, u, v, R11_of: Callable, w_aux=0.0, reduction="first") -> dict:
    """Evaluate the nine component relations on the closed-form data.

    The vectors at ``u`` and ``v`` come from :func:`theorem_solution` at
    those arguments; the relation coefficient is ``R11(u - v)`` and the
    weight is ``C1`` at ``u - v``.  Reported only.
    """
    su = theorem_solution(l, u, R11_of, w_aux, reduction)
    sv = theorem_solution(l, v, R11_of, w_aux, reduction)
    sd = theorem_solution(l, u - v, R11_of, w_aux, reduction)
    R1 = R11_of(u - v)
    W1 = sd.W.values["C1"]
    X = {("l", "u"): su.psi_ab, ("l+1", "u"): su.psi_bc, ("l", "v"): sv.psi_ab, ("l+1", "v"): sv.psi_bc}
    per = []
    for (s, t), (sp, tp) in _DISPLAY_PAIRS:
        lhs = R1 * X[("l", "u")][s] * X[("l+1", "v")][t]
        rhs = X[("l", "v")][sp] * X[("l+1", "u")][tp] * W1
        per.append(abs(lhs - rhs))
    return {"relations": per, "residual": float(np.sqrt(sum(r * r for r in per))), "C1": W1, "R1": complex(R1)}


def star_gamma_beta(T1, T2, T3, T2p, T3p):
    """``*_gamma = T1 (T2 T3 + 1) / (T2' T3' + 1)`` and its reciprocal ``*_beta``."""
    den = T2p * T3p + 1
    if den == 0:
        raise ZeroDenominator("T2' T3' + 1 = 0")
    g = T1 * (T2 * T3 + 1) / den
    if g == 0:
        raise ZeroDenominator("*_gamma = 0 has no reciprocal")
    return g, 1 / g


# ---------------------------------------------------------------- ratio chains


@dataclass(frozen=True)
class ComponentVector:
    beta: complex
    gamma: complex
    Z: complex
    site: int = 0
    spectral: complex = 0.0

    def __post_init__(self):
        for name in ("beta", "gamma", "Z"):
            val = complex(getattr(self, name))
            if not np.isfinite(val):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, val)

    def __getitem__(self, name):
        return getattr(self, name)


# (numerator factors, denominator factors); a factor is (component, site offset, slot)
TWO_PARAMETER_CHAIN = (
    ((("beta", 0, "v"),), (("beta", 1, "u"),)),
    ((("gamma", 0, "u"), ("beta", 1, "v")), (("beta", 0, "u"), ("gamma", 1, "v"))),
    ((("Z", 0, "u"), ("beta", 1, "v")), (("beta", 0, "u"), ("Z", 1, "v"))),
    ((("Z", 0, "u"), ("gamma", 1, "v")), (("gamma", 0, "u"), ("Z", 1, "v"))),
    ((("beta", 0, "u"), ("gamma", 1, "v")), (("gamma", 0, "u"), ("beta", 1, "v"))),
)
# the inserted third-parameter factor of each form (None for the first)
THREE_PARAMETER_INSERT = (None, ("Z", 1, "w"), ("gamma", 2, "w"), ("beta", 2, "w"), ("Z", 2, "w"))


def _ratio(components, num, den):
    top = 1.0 + 0j
    bottom = 1.0 + 0j
    for comp, off, slot in num:
        top *= components[(off, slot)][comp]
    for comp, off, slot in den:
        val = components[(off, slot)][comp]
        if val == 0:
            raise ZeroComponent(f"{comp} at site l+{off}, slot {slot} is zero")
        bottom *= val
    return top / bottom


def relation_chain_check(components: dict, t_value) -> dict:
    """Ratio identities ``ratio = tau * ratio`` before and after inserting a third parameter.

    ``components`` maps ``(site offset, slot)`` (offsets 0..2, slots
    ``'u'``, ``'v'``, ``'w'``) to :class:`ComponentVector`.  Each entry of
    the report holds the two-parameter ratio, its three-parameter form, the
    identity discrepancy ``|ratio - tau ratio|`` and the change caused by
    the inserted factor.
    """
    tau = complex(t_value)
    rows = []
    for (num, den), extra in zip(TWO_PARAMETER_CHAIN, THREE_PARAMETER_INSERT):
        two = _ratio(components, num, den)
        if extra is None:
            three = two
        else:
            three = _ratio(components, num + (extra,), den + (extra,))
        rows.append(
            {
                "ratio": two,
                "ratio_three": three,
                "discrepancy": abs(two - tau * two),
                "discrepancy_three": abs(three - tau * three),
                "insertion_change": abs(three - two),
            }
        )
    return {"t_value": tau, "identities": rows}
