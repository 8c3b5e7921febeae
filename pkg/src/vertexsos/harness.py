"""Command dispatch and report emission."""

from __future__ import annotations

import json
import logging
import math
import os
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, config_digest, config_to_dict
from .errors import DimensionError, NonConvergence, OutputError, VertexSOSError
from .intertwiner import (
    build_relation_system,
    is_monotone,
    reduce_parameter,
    solve_intertwiner_numeric,
    theorem_relation_residual,
    theorem_solution,
    theorem_weights,
)
from .oscillator_transfer import (
    LOperatorParams,
    TransferPlan,
    convergence_probe,
    finite_volume_transfer,
    monodromy_with_field,
    transfer_commutator,
)
from .q_algebra import BUILTIN_REPS, QParams, TruncationSpec, compose_universal_r, k_matrix, r11_function
from .tensor_core import as_operator, frobenius_norm
from .vertex_models import (
    FieldParams,
    LatticePatch,
    SixVertexWeights,
    disorder_parameter,
    partition_function_bruteforce,
    partition_function_transfer,
    symmetric_r_builder,
    twenty_vertex_class_table,
    twenty_vertex_weights,
    weights_from_fields,
    yang_baxter_residual,
)

log = logging.getLogger("vertexsos")

RNG_NAME = "numpy.random.Philox"
MATRIX_HEADER = ("i", "j", "re", "im")


@dataclass
class RunReport:
    command: str
    digest: str
    config: dict
    seed: int
    results: dict = field(default_factory=dict)
    matrix: np.ndarray | None = None
    sweep_header: tuple = ()
    sweep_rows: list = field(default_factory=list)
    status: str = "ok"
    error: dict | None = None
    wall_time: float = 0.0
    version: str = __version__

    def to_json(self, matrix_ref=None, sweep_ref=None) -> dict:
        return {
            "command": self.command,
            "digest": self.digest,
            "config": self.config,
            "seed": self.seed,
            "rng": RNG_NAME,
            "status": self.status,
            "error": self.error,
            "results": jsonable(self.results),
            "outputs": {"matrix_csv": matrix_ref, "sweep_csv": sweep_ref},
            "version": self.version,
            "wall_time": self.wall_time,
        }


def jsonable(obj):
    """Complex numbers become ``[re, im]``; arrays become nested lists."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


# ---------------------------------------------------------------- commands


def _ybe(cfg: RunConfig, rng, rep: RunReport):
    c = cfg.ybe
    if c.builder == "identity":
        Rof = lambda u: np.eye(4, dtype=complex)  # noqa: E731
    elif c.builder == "symmetric":
        Rof = symmetric_r_builder(c.eta)
    else:
        Rof = symmetric_r_builder(c.eta, c.H, c.V)
    draws = rng.uniform(c.u_low, c.u_high, size=(c.n_draws, 2))
    residuals = [yang_baxter_residual(Rof, u, v) for u, v in draws]
    rep.results = {
        "builder": c.builder,
        "draws": draws.tolist(),
        "residuals": residuals,
        "max_residual": max(residuals) if residuals else 0.0,
    }
    rep.sweep_header = ("u", "v", "residual")
    rep.sweep_rows = [(u, v, r) for (u, v), r in zip(draws.tolist(), residuals)]


def _six_vertex_weights(p):
    if p.fields is not None:
        f = p.fields
        return weights_from_fields(FieldParams(f.a, f.b, f.c, f.H, f.V, f.lam))
    return SixVertexWeights(*p.weights)


def _partition(cfg: RunConfig, rng, rep: RunReport):
    p = cfg.partition
    patch = LatticePatch(p.kind, p.M, p.N)
    if p.model == "6V":
        if patch.valence != 4:
            raise DimensionError("the 6V model lives on square patches")
        w = _six_vertex_weights(p)
        wdict = dict(zip(("a1", "a2", "b1", "b2", "c1", "c2"), w.as_tuple()))
    else:
        if patch.valence != 6:
            raise DimensionError("the 20V model lives on triangular patches")
        w = twenty_vertex_weights(p.a20, p.b20, p.c20)
        wdict = {"w": list(w.w), "class_table": p.class_table or twenty_vertex_class_table()}
    table = dict(p.class_table) if p.class_table is not None and p.model == "20V" else None
    Z_bf = partition_function_bruteforce(patch, w, table)
    res = {"patch": {"kind": p.kind, "M": p.M, "N": p.N, "edges": patch.n_edges}, "weights": wdict, "Z_bruteforce": Z_bf}
    if p.kind == "square-torus":
        Z_tm = partition_function_transfer(patch, w)
        res["Z_transfer"] = Z_tm
        res["relative_difference"] = abs(Z_bf - Z_tm) / abs(Z_bf) if Z_bf else abs(Z_tm)
    rep.results = res


def _explicit_matrix(entries):
    return as_operator([[complex(re, im) for re, im in row] for row in entries])


def _r11_of(t, qr):
    if t.r11 == "zero":
        return lambda x: 0.0
    if t.r11 == "linear":
        return lambda x: complex(x)
    rep = BUILTIN_REPS[qr.rep](qr.z)
    return r11_function(rep, TruncationSpec(qr.n_max, qr.m_max, qr.r), QParams(qr.q, qr.hbar))


def _intertwine(cfg: RunConfig, rng, rep: RunReport):
    c = cfg.intertwine
    if c.method == "theorem":
        t = c.theorem
        R11 = _r11_of(t, c.qr)
        l = t.l if len(t.l) > 1 else t.l[0]
        w = t.w_aux if len(t.w_aux) > 1 else t.w_aux[0]
        sol = theorem_solution(l, t.u, R11, w, t.reduction)
        nine = theorem_relation_residual(l, t.u, t.v, R11, w, t.reduction)
        rep.results = {"solution": sol.to_json(), "relation_residuals": nine["relations"], "relation_residual": nine["residual"]}
        return
    if c.r_matrix == "identity":
        R = c.scale * np.eye(c.d * c.d, dtype=complex)
    elif c.r_matrix == "symmetric6v":
        if c.d != 2:
            raise DimensionError("the symmetric 6V R-matrix has d = 2")
        R = c.scale * symmetric_r_builder(c.eta)(c.x)
    else:
        if c.entries is None:
            raise DimensionError("r_matrix 'explicit' needs entries")
        R = _explicit_matrix(c.entries)
    system = build_relation_system(R, c.x, 0.0)
    try:
        sol = solve_intertwiner_numeric(R, c.x, 0.0, tol=c.tol, max_iter=c.max_iter, base_height=c.base_height)
    except NonConvergence as exc:
        rep.results = {"partial": exc.partial.to_json() if exc.partial is not None else None}
        raise
    rep.results = {
        "solution": sol.to_json(),
        "iterations": len(sol.history),
        "history": sol.history,
        "monotone": is_monotone(sol.history),
        "relation_groups": system.n_groups,
        "relations": system.n_relations,
    }
    rep.matrix = sol.W.values


def _qr(cfg: RunConfig, rng, rep: RunReport):
    c = cfg.qr
    grep = BUILTIN_REPS[c.rep](c.z)
    trunc = TruncationSpec(c.n_max, c.m_max, c.r)
    qp = QParams(c.q, c.hbar)
    R = compose_universal_r(grep, trunc, qp)
    rep.results = {
        "rep": c.rep,
        "dim": R.shape[0],
        "R11": complex(R[0, 0]),
        "norm": frobenius_norm(R),
        "distance_to_K": frobenius_norm(R - k_matrix(grep, qp, trunc.r)),
    }
    rep.matrix = R


def _lparams(c, xi=None):
    return LOperatorParams(xi=c.xi if xi is None else xi, s=c.s, s_i=c.s_i, s_j=c.s_j)


def _plan(c, M, N, H=0.0):
    alpha = (lambda i, j, k: c.alpha) if c.alpha else None
    return TransferPlan(M=M, N=N, n_max=c.n_max, q=c.q, H=H, alpha=alpha)


def _transfer(cfg: RunConfig, rng, rep: RunReport):
    c = cfg.transfer
    p = _lparams(c)
    plan = _plan(c, c.M, c.N, c.H)
    T, tr = finite_volume_transfer(plan, p)
    Mf = monodromy_with_field(plan, p)
    probe = convergence_probe([_plan(c, k, k) for k in c.probe_sizes], p)
    rep.results = {
        "dim": T.shape[0],
        "factors": plan.n_factors,
        "trace": tr,
        "monodromy_trace": complex(np.trace(Mf)),
        "convergence": probe,
        "commutator_xi_pair": [c.xi, 2 * c.xi],
        "commutator": transfer_commutator(_plan(c, c.M, c.N), p, _lparams(c, 2 * c.xi)),
    }
    rep.matrix = Mf
    rep.sweep_header = ("M", "N", "normalized_trace_re", "normalized_trace_im", "difference")
    rep.sweep_rows = [
        (e["M"], e["N"], e["normalized_trace"].real, e["normalized_trace"].imag, "" if e["difference"] is None else e["difference"])
        for e in probe
    ]


def _plot(cfg: RunConfig, rng, rep: RunReport):
    c = cfg.plot
    grid = np.linspace(c.start, c.stop, c.count) if c.count else np.array([])
    if c.sweep == "disorder_vs_H":
        f = c.fields
        rep.sweep_header = ("H", "Delta")
        rows = []
        for H in grid:
            w = weights_from_fields(FieldParams(f.a, f.b, f.c, float(H), f.V, f.lam))
            rows.append((float(H), disorder_parameter(w)))
    else:
        t = c.theorem
        R11 = _r11_of(t, c.qr)
        s = reduce_parameter(t.l, t.reduction) + reduce_parameter(t.w_aux, t.reduction)
        rep.sweep_header = ("u", "C1_re", "C1_im", "C2_re", "C2_im", "C3_re", "C3_im")
        rows = []
        for u in grid:
            C1, C2, C3 = theorem_weights(complex(u), R11, complex(s))
            rows.append((float(u), C1.real, C1.imag, C2.real, C2.imag, C3.real, C3.imag))
    rep.sweep_rows = rows
    rep.results = {"sweep": c.sweep, "points": len(rows)}


DISPATCH = {
    "YBE_CHECK": _ybe,
    "PARTITION": _partition,
    "INTERTWINE": _intertwine,
    "QR_COMPOSE": _qr,
    "TRANSFER": _transfer,
    "PLOT_DATA": _plot,
}


def run_command(cfg: RunConfig) -> RunReport:
    """Run one command.  Module errors propagate; the partially filled report
    is attached to the exception as ``exc.report``."""
    cfg_dict = config_to_dict(cfg)
    rep = RunReport(command=cfg.command, digest=config_digest(cfg_dict), config=cfg_dict, seed=cfg.seed)
    rng = make_rng(cfg.seed)
    t0 = time.perf_counter()
    log.info("running %s (digest %s)", cfg.command, rep.digest[:12])
    try:
        DISPATCH[cfg.command](cfg, rng, rep)
    except VertexSOSError as exc:
        rep.status = "error"
        rep.error = {"type": type(exc).__name__, "message": str(exc), "exit_code": exc.exit_code}
        rep.wall_time = time.perf_counter() - t0
        exc.report = rep
        raise
    rep.wall_time = time.perf_counter() - t0
    return rep


# ---------------------------------------------------------------- output


def atomic_write(path, text: str):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise OutputError(path, exc.strerror or str(exc)) from None


def _fmt(x):
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return repr(float(x))


def matrix_to_csv(M) -> str:
    """Rows ``i,j,re,im`` sorted by ``i`` then ``j``; shortest round-trip floats."""
    M = np.asarray(M, dtype=complex)
    lines = [",".join(MATRIX_HEADER)]
    for i in range(M.shape[0]):
        for j in range(M.shape[1]):
            z = M[i, j]
            lines.append(f"{i},{j},{_fmt(z.real)},{_fmt(z.imag)}")
    return "\n".join(lines) + "\n"


def csv_to_matrix(text: str) -> np.ndarray:
    rows = text.strip().splitlines()
    if not rows or tuple(rows[0].split(",")) != MATRIX_HEADER:
        raise ValueError("not a matrix CSV")
    entries = [r.split(",") for r in rows[1:]]
    n = 1 + max(int(e[0]) for e in entries) if entries else 0
    m = 1 + max(int(e[1]) for e in entries) if entries else 0
    M = np.zeros((n, m), dtype=complex)
    for i, j, re, im in entries:
        M[int(i), int(j)] = complex(float(re), float(im))
    return M


def sweep_to_csv(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(_fmt(x) for x in row) for row in rows]
    return "\n".join(lines) + "\n"


def report_to_text(report: RunReport, matrix_ref=None, sweep_ref=None) -> str:
    return json.dumps(report.to_json(matrix_ref, sweep_ref), sort_keys=True, indent=2) + "\n"


def emit_outputs(report: RunReport, out_dir) -> dict:
    """Write the JSON report plus matrix and sweep CSVs when present."""
    out_dir = Path(out_dir)
    names = report.config["output"]
    written = {}
    matrix_ref = sweep_ref = None
    if report.matrix is not None:
        matrix_ref = names["matrix_csv"]
        atomic_write(out_dir / matrix_ref, matrix_to_csv(report.matrix))
        written["matrix_csv"] = out_dir / matrix_ref
    if report.sweep_header:
        sweep_ref = names["sweep_csv"]
        atomic_write(out_dir / sweep_ref, sweep_to_csv(report.sweep_header, report.sweep_rows))
        written["sweep_csv"] = out_dir / sweep_ref
    atomic_write(out_dir / names["report"], report_to_text(report, matrix_ref, sweep_ref))
    written["report"] = out_dir / names["report"]
    return written
