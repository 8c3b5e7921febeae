"""``vertexsos <command> --config <path> [--out <dir>] [--seed <n>]``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .config import COMMANDS, parse_config
from .errors import OutputError, SchemaError, VertexSOSError
from .harness import emit_outputs, run_command

LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


def _setup_logging():
    name = os.environ.get("VERTEXSOS_LOG", "error").lower()
    logging.basicConfig(
        level=LOG_LEVELS.get(name, logging.ERROR),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def build_parser():
    ap = argparse.ArgumentParser(prog="vertexsos", description=__doc__)
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, type=Path)
    ap.add_argument("--out", type=Path, default=Path("."))
    ap.add_argument("--seed", type=int, default=None)
    return ap


def main(argv=None) -> int:
    _setup_logging()
    log = logging.getLogger("vertexsos")
    args = build_parser().parse_args(argv)
    try:
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as exc:
            raise SchemaError(f"cannot read config {args.config}: {exc.strerror}") from None
        cfg = parse_config(text)
        if cfg.command != args.command:
            raise SchemaError(f"config command {cfg.command} does not match {args.command}", ("command",))
        if args.seed is not None:
            if args.seed < 0:
                raise SchemaError("seed must be nonnegative", ("seed",))
            cfg = cfg.model_copy(update={"seed": args.seed})
        try:
            report = run_command(cfg)
        except VertexSOSError as exc:
            partial = getattr(exc, "report", None)
            if partial is not None:
                emit_outputs(partial, args.out)
            raise
        written = emit_outputs(report, args.out)
        log.info("wrote %s", ", ".join(str(p) for p in written.values()))
        return 0
    except OutputError as exc:
        print(f"vertexsos: output error: {exc}", file=sys.stderr)
        return exc.exit_code
    except VertexSOSError as exc:
        print(f"vertexsos: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        # invalid parameter combinations caught by model constructors
        print(f"vertexsos: invalid parameter: {exc}", file=sys.stderr)
        return SchemaError.exit_code


if __name__ == "__main__":
    sys.exit(main())
