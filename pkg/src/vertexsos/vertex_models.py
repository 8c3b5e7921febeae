"""Six- and twenty-vertex weight systems, measures and partition functions.

Lattice conventions
-------------------
A patch is a rectangular grid of vertices ``(r, c)``.  Each vertex is crossed
by lines running in fixed directions: ``h = (0, 1)`` and ``v = (1, 0)`` on the
square lattice, plus ``d = (1, 1)`` on the triangular lattice (oblique
coordinates).  Every line through a vertex contributes two half-edges: the
*incoming* half (from the neighbour at ``-dir``) and the *outgoing* half (to
the neighbour at ``+dir``).  An edge state is ``+1`` when the arrow points
along the line's positive direction and ``-1`` otherwise, so the arrow on the
incoming half points into the vertex iff its state is ``+1`` and the arrow on
the outgoing half points in iff its state is ``-1``.

Six-vertex classes (states listed as ``left, right, bottom, top`` i.e.
``h_in, h_out, v_in, v_out``)::

    a1 (+ + + +)   a2 (- - - -)   b1 (+ + - -)
    b2 (- - + +)   c1 (+ - - +)   c2 (- + + -)

This matches the R-matrix ``R[(h_out, v_out), (h_in, v_in)]`` with basis
index ``0 <-> +1`` and ``1 <-> -1``.

Twenty-vertex classes: each of the three lines is ``through+`` (``++``),
``through-`` (``--``), ``sink`` (``+-``, both arrows in) or ``source``
(``-+``).  The 20 ice-rule patterns fall into orbits under cyclic relabelling
of the lines ``h -> v -> d`` plus global reversal of the all-through
patterns::

    w0  all three lines through with equal signs            (2 patterns)
    w1  all through, two + and one -                        (3)
    w6  all through, one + and two -                        (3)
    w2  sink at line i, source at line i+1, through +       (3)
    w3  sink at line i, source at line i+1, through -       (3)
    w4  sink at line i, source at line i-1, through +       (3)
    w5  sink at line i, source at line i-1, through -       (3)

The table is returned by :func:`twenty_vertex_class_table` and can be
replaced wholesale by passing ``class_table`` to the weight functions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .errors import (
    DegenerateWeights,
    DimensionError,
    GuardExceeded,
    PatchTooLarge,
    UnclassifiablePattern,
    ZeroPartitionFunction,
)
from .tensor_core import as_operator, embed_two_site, frobenius_norm

ENUMERATION_LIMIT_BITS = 24
TRANSFER_LIMIT = 2**12

SQUARE_DIRS = ((0, 1), (1, 0))
TRIANGULAR_DIRS = ((0, 1), (1, 0), (1, 1))


# --------------------------------------------------------------------------
# weights


@dataclass(frozen=True)
class FieldParams:
    a: float = 1.0
    b: float = 1.0
    c: float = 1.0
    H: float = 0.0
    V: float = 0.0
    lam: float = 1.0

    def __post_init__(self):
        if min(self.a, self.b, self.c) < 0:
            raise ValueError("bare weights a, b, c must be nonnegative")
        if self.lam < 1:
            raise ValueError("c-asymmetry lambda must be >= 1")


@dataclass(frozen=True)
class SixVertexWeights:
    a1: float
    a2: float
    b1: float
    b2: float
    c1: float
    c2: float

    def __post_init__(self):
        if min(self.as_tuple()) < 0:
            raise ValueError("six-vertex weights must be nonnegative")

    def as_tuple(self):
        return (self.a1, self.a2, self.b1, self.b2, self.c1, self.c2)

    def scaled(self, t):
        return SixVertexWeights(*(t * w for w in self.as_tuple()))


@dataclass(frozen=True)
class TwentyVertexWeights:
    a: tuple
    b: tuple
    c: tuple

    def __post_init__(self):
        for name in ("a", "b", "c"):
            trip = tuple(float(x) for x in getattr(self, name))
            if len(trip) != 3:
                raise ValueError(f"{name} must have three entries")
            if min(trip) < 0:
                raise ValueError(f"{name} weights must be nonnegative")
            object.__setattr__(self, name, trip)

    @property
    def w(self):
        (a1, a2, a3), (b1, b2, b3), (c1, c2, c3) = self.a, self.b, self.c
        return (
            a1 * a2 * a3,
            b1 * a2 * b3,
            b1 * a2 * c3,
            a1 * b2 * b3 + c1 * c2 * c3,
            c1 * a2 * a3,
            b1 * c2 * a3,
            b1 * b2 * a3,
        )

    def scaled(self, t):
        return TwentyVertexWeights(*(tuple(t * x for x in trip) for trip in (self.a, self.b, self.c)))


def weights_from_fields(p: FieldParams) -> SixVertexWeights:
    return SixVertexWeights(
        a1=p.a * math.exp(p.H + p.V),
        a2=p.a * math.exp(-p.H - p.V),
        b1=p.b * math.exp(p.H - p.V),
        b2=p.b * math.exp(-p.H + p.V),
        c1=p.c * p.lam,
        c2=p.c / p.lam,
    )


def disorder_parameter(w: SixVertexWeights) -> float:
    """``(a1 a2 + b1 b2 - c1 c2) / (2 sqrt(a1 a2 b1 b2))``."""
    den = w.a1 * w.a2 * w.b1 * w.b2
    if den <= 0:
        raise DegenerateWeights("disorder parameter needs a1*a2*b1*b2 > 0")
    return (w.a1 * w.a2 + w.b1 * w.b2 - w.c1 * w.c2) / (2.0 * math.sqrt(den))


def twenty_vertex_weights(a, b, c) -> TwentyVertexWeights:
    return TwentyVertexWeights(tuple(a), tuple(b), tuple(c))


def six_vertex_r_matrix(p: FieldParams) -> np.ndarray:
    R = np.zeros((4, 4), dtype=complex)
    R[0, 0] = p.a * math.exp(p.H + p.V)
    R[1, 1] = p.b * math.exp(p.H - p.V)
    R[1, 2] = R[2, 1] = p.c
    R[2, 2] = p.b * math.exp(-p.H + p.V)
    R[3, 3] = p.a * math.exp(-p.H - p.V)
    return R


def symmetric_r_builder(eta: float, H: float = 0.0, V: float = 0.0):
    """Spectral family ``a = sinh(eta+u), b = sinh u, c = sinh eta`` (optionally field-dressed)."""

    def build(u):
        return six_vertex_r_matrix_complex(np.sinh(eta + u), np.sinh(u), np.sinh(eta), H, V)

    return build


def six_vertex_r_matrix_complex(a, b, c, H=0.0, V=0.0) -> np.ndarray:
    """Same layout as :func:`six_vertex_r_matrix` without the sign restrictions."""
    R = np.zeros((4, 4), dtype=complex)
    R[0, 0] = a * np.exp(H + V)
    R[1, 1] = b * np.exp(H - V)
    R[1, 2] = R[2, 1] = c
    R[2, 2] = b * np.exp(-H + V)
    R[3, 3] = a * np.exp(-H - V)
    return R


def yang_baxter_residual(Rof: Callable, u, v) -> float:
    """``|| R12(u) R13(u+v) R23(v) - R23(v) R13(u+v) R12(u) ||_F``."""
    Ru, Ruv, Rv = (as_operator(Rof(x)) for x in (u, u + v, v))
    if not (Ru.shape == Ruv.shape == Rv.shape):
        raise DimensionError("R builder returned operators of different sizes")
    d = math.isqrt(Ru.shape[0])
    if d * d != Ru.shape[0]:
        raise DimensionError(f"R of size {Ru.shape[0]} is not d^2 x d^2")
    R12 = embed_two_site(Ru, d, (0, 1))
    R13 = embed_two_site(Ruv, d, (0, 2))
    R23 = embed_two_site(Rv, d, (1, 2))
    return frobenius_norm(R12 @ R13 @ R23 - R23 @ R13 @ R12)


# --------------------------------------------------------------------------
# lattice patches


@dataclass(frozen=True)
class LatticePatch:
    """Grid patch of the square (valence 4) or triangular (valence 6) lattice.

    ``kind`` is one of ``square-torus``, ``square-open``, ``triangular-torus``,
    ``triangular-open``.  Open patches carry a boundary stub on every
    half-edge leaving the grid; ``fixed`` pins stub (or any edge) states by
    edge index.
    """

    kind: str
    M: int
    N: int
    fixed: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("square-torus", "square-open", "triangular-torus", "triangular-open"):
            raise ValueError(f"unknown patch kind {self.kind!r}")
        if self.M < 1 or self.N < 1:
            raise ValueError("patch dimensions must be >= 1")
        object.__setattr__(self, "fixed", dict(self.fixed))
        for e, s in self.fixed.items():
            if s not in (1, -1):
                raise ValueError(f"fixed edge {e} state must be +1 or -1")
        edges, vertices = _build_graph(self.kind, self.M, self.N)
        object.__setattr__(self, "_edges", edges)
        object.__setattr__(self, "_vertices", vertices)
        for e in self.fixed:
            if not 0 <= e < len(edges):
                raise ValueError(f"fixed edge index {e} out of range")

    @property
    def valence(self):
        return 4 if self.kind.startswith("square") else 6

    @property
    def periodic(self):
        return self.kind.endswith("torus")

    @property
    def edges(self):
        """Edge descriptors ``(tail, head, dir)``; a ``None`` endpoint is a stub."""
        return self._edges

    @property
    def vertices(self):
        """Per vertex: ``((r, c), ((in_edge, out_edge) for each line))``."""
        return self._vertices

    @property
    def n_edges(self):
        return len(self._edges)

    @property
    def n_vertices(self):
        return len(self._vertices)


def single_vertex_patch(valence=4) -> LatticePatch:
    return LatticePatch("square-open" if valence == 4 else "triangular-open", 1, 1)


def domain_wall_patch(n) -> LatticePatch:
    """``n x n`` square patch with domain-wall boundary: horizontal stubs point
    in on the left and right, vertical stubs point out at the bottom and top."""
    patch = LatticePatch("square-open", n, n)
    fixed = {}
    for e, (tail, head, d) in enumerate(patch.edges):
        if tail is None or head is None:
            inward = head is not None
            if d == (0, 1):
                # arrow into the grid
                fixed[e] = 1 if inward else -1
            else:
                fixed[e] = -1 if inward else 1
    return LatticePatch("square-open", n, n, fixed)


def _build_graph(kind, M, N):
    dirs = SQUARE_DIRS if kind.startswith("square") else TRIANGULAR_DIRS
    periodic = kind.endswith("torus")
    edges = []
    index = {}

    def inside(r, c):
        return 0 <= r < M and 0 <= c < N

    for r in range(M):
        for c in range(N):
            for d in dirs:
                pr, pc = r - d[0], c - d[1]
                if not periodic and not inside(pr, pc):
                    index[("stub-in", (r, c), d)] = len(edges)
                    edges.append((None, (r, c), d))
                nr, nc = r + d[0], c + d[1]
                if periodic:
                    head = (nr % M, nc % N)
                elif inside(nr, nc):
                    head = (nr, nc)
                else:
                    head = None
                index[("out", (r, c), d)] = len(edges)
                edges.append(((r, c), head, d))

    vertices = []
    for r in range(M):
        for c in range(N):
            lines = []
            for d in dirs:
                pr, pc = r - d[0], c - d[1]
                if periodic:
                    e_in = index[("out", (pr % M, pc % N), d)]
                elif inside(pr, pc):
                    e_in = index[("out", (pr, pc), d)]
                else:
                    e_in = index[("stub-in", (r, c), d)]
                lines.append((e_in, index[("out", (r, c), d)]))
            vertices.append(((r, c), tuple(lines)))
    return tuple(edges), tuple(vertices)


def in_count(states):
    """Number of arrows pointing into a vertex given its ``(in, out)`` line states."""
    return sum((s_in == 1) + (s_out == -1) for s_in, s_out in states)


# --------------------------------------------------------------------------
# vertex classification

SIX_VERTEX_CLASSES = {
    ((1, 1), (1, 1)): 0,  # a1
    ((-1, -1), (-1, -1)): 1,  # a2
    ((1, 1), (-1, -1)): 2,  # b1
    ((-1, -1), (1, 1)): 3,  # b2
    ((1, -1), (-1, 1)): 4,  # c1
    ((-1, 1), (1, -1)): 5,  # c2
}
SIX_VERTEX_NAMES = ("a1", "a2", "b1", "b2", "c1", "c2")

_LINE_KIND = {(1, 1): "T+", (-1, -1): "T-", (1, -1): "sink", (-1, 1): "source"}


def pattern_key(lines) -> str:
    """Compact string for a vertex pattern, e.g. ``'+-|++|--'``."""
    sym = {1: "+", -1: "-"}
    return "|".join(sym[a] + sym[b] for a, b in lines)


def twenty_vertex_class_table() -> dict:
    """Default map from the 20 ice-rule patterns to weight classes ``0..6``."""
    table = {}
    states = ((1, 1), (-1, -1), (1, -1), (-1, 1))
    for lines in itertools.product(states, repeat=3):
        if in_count(lines) != 3:
            continue
        kinds = [_LINE_KIND[s] for s in lines]
        if all(k.startswith("T") for k in kinds):
            plus = kinds.count("T+")
            cls = {3: 0, 0: 0, 2: 1, 1: 6}[plus]
        else:
            i = kinds.index("sink")
            j = kinds.index("source")
            through = next(k for k in kinds if k.startswith("T"))
            chiral = (j - i) % 3 == 1
            cls = {(True, "T+"): 2, (True, "T-"): 3, (False, "T+"): 4, (False, "T-"): 5}[
                (chiral, through)
            ]
        table[pattern_key(lines)] = cls
    return table


_DEFAULT_20V_TABLE = twenty_vertex_class_table()


def vertex_class(lines, valence, class_table=None) -> int:
    if valence == 4:
        key = tuple(tuple(x) for x in lines)
        if key not in SIX_VERTEX_CLASSES:
            raise UnclassifiablePattern(f"pattern {pattern_key(lines)} violates the ice rule")
        return SIX_VERTEX_CLASSES[key]
    table = _DEFAULT_20V_TABLE if class_table is None else class_table
    key = pattern_key(lines)
    if key not in table:
        raise UnclassifiablePattern(f"pattern {key} has no weight class")
    return table[key]


def _class_weights(patch, weights):
    if patch.valence == 4:
        if not isinstance(weights, SixVertexWeights):
            raise DimensionError("valence-4 patches need SixVertexWeights")
        return weights.as_tuple()
    if not isinstance(weights, TwentyVertexWeights):
        raise DimensionError("valence-6 patches need TwentyVertexWeights")
    return weights.w


# --------------------------------------------------------------------------
# enumeration and measures


def enumerate_configs(patch: LatticePatch) -> list:
    """All ice-rule configurations as tuples of edge states.

    Depth-first over edge indices with state order ``+1`` before ``-1``, so
    the output is lexicographic in edge index.  A vertex is checked as soon
    as its last incident edge is assigned.
    """
    free = patch.n_edges - len(patch.fixed)
    if free > ENUMERATION_LIMIT_BITS:
        raise PatchTooLarge(f"2^{free} raw states exceed the 2^{ENUMERATION_LIMIT_BITS} guard")
    n = patch.n_edges
    half = patch.valence // 2
    # vertices keyed by the largest edge index they touch
    ready = [[] for _ in range(n)]
    for _, lines in patch.vertices:
        last = max(e for pair in lines for e in pair)
        ready[last].append(lines)
    choices = [((patch.fixed[e],) if e in patch.fixed else (1, -1)) for e in range(n)]
    state = [0] * n
    out = []

    def dfs(e):
        if e == n:
            out.append(tuple(state))
            return
        for s in choices[e]:
            state[e] = s
            ok = True
            for lines in ready[e]:
                if in_count([(state[i], state[o]) for i, o in lines]) != half:
                    ok = False
                    break
            if ok:
                dfs(e + 1)
        state[e] = 0

    dfs(0)
    return out


def _vertex_lines(cfg, lines):
    return tuple((cfg[i], cfg[o]) for i, o in lines)


def config_weight(cfg, patch: LatticePatch, weights, class_table=None) -> float:
    cw = _class_weights(patch, weights)
    if len(cfg) != patch.n_edges:
        raise DimensionError(f"config has {len(cfg)} edges, patch has {patch.n_edges}")
    w = 1.0
    for _, lines in patch.vertices:
        w *= cw[vertex_class(_vertex_lines(cfg, lines), patch.valence, class_table)]
    return w


def partition_function_bruteforce(patch: LatticePatch, weights, class_table=None) -> float:
    configs = enumerate_configs(patch)
    return math.fsum(config_weight(c, patch, weights, class_table) for c in configs)


def config_probability(cfg, patch: LatticePatch, weights, class_table=None, Z=None) -> float:
    if Z is None:
        Z = partition_function_bruteforce(patch, weights, class_table)
    if Z <= 0:
        raise ZeroPartitionFunction("partition function vanishes on this patch")
    return config_weight(cfg, patch, weights, class_table) / Z


def local_weight_tensor(weights: SixVertexWeights) -> np.ndarray:
    """``L[h_in, h_out, v_in, v_out]`` with index ``0 <-> +1``, ``1 <-> -1``."""
    L = np.zeros((2, 2, 2, 2))
    cw = weights.as_tuple()
    to_idx = {1: 0, -1: 1}
    for ((hi, ho), (vi, vo)), cls in SIX_VERTEX_CLASSES.items():
        L[to_idx[hi], to_idx[ho], to_idx[vi], to_idx[vo]] = cw[cls]
    return L


def row_transfer_matrix(N: int, weights: SixVertexWeights) -> np.ndarray:
    """Periodic row transfer matrix ``T[v_in, v_out]`` of width ``N``."""
    if 2**N > TRANSFER_LIMIT:
        raise GuardExceeded(f"transfer dimension 2^{N} exceeds {TRANSFER_LIMIT}")
    L = local_weight_tensor(weights)
    A = L  # (h_first, h_cur, in, out)
    for _ in range(N - 1):
        A = np.einsum("abio,bcjp->acijop", A, L)
        s = A.shape
        A = A.reshape(s[0], s[1], s[2] * s[3], s[4] * s[5])
    return np.einsum("aaio->io", A)


def partition_function_transfer(patch: LatticePatch, weights: SixVertexWeights) -> float:
    if patch.kind != "square-torus":
        raise DimensionError("transfer-matrix path is defined for square tori only")
    T = row_transfer_matrix(patch.N, weights)
    return float(np.trace(np.linalg.matrix_power(T, patch.M)))


def configs_to_json(configs) -> list:
    return [list(c) for c in configs]
