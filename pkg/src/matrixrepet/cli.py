"""Command line client for the measurement service.

All subcommands build an HTTP request and send it either to an
in-process app instance (default) or to a remote server (--server).
Machine-readable JSON goes to stdout, human-readable summaries to
stderr.  Exit codes: 0 ok, 1 attractor reported invalid by `verify`,
2 input/format problem, 3 inconclusive search, 4 invalid attractor
where a valid one was required, 5 unexpected failure.
"""

from __future__ import annotations

import argparse
import base64
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import MatrixFormatError
from .matrix import Matrix, load_matrix, save_matrix

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_FORMAT = 2
EXIT_INCONCLUSIVE = 3
EXIT_BAD_ATTRACTOR = 4
EXIT_UNEXPECTED = 5

_CODE_EXITS = {
    "format": EXIT_FORMAT,
    "inconclusive": EXIT_INCONCLUSIVE,
    "invalid_attractor": EXIT_BAD_ATTRACTOR,
}

# printable alphabet used when writing small-sigma matrices as text
_TEXT_SYMBOLS = "0123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"


class ClientError(Exception):
    def __init__(self, exit_code: int, message: str):
        super().__init__(message)
        self.exit_code = exit_code


class Client:
    """POST helper over either the in-process app or a remote base URL."""

    def __init__(self, server: str | None):
        if server:
            import httpx

            self._client = httpx.Client(base_url=server, timeout=600.0)
        else:
            import warnings

            with warnings.catch_warnings():
                # starlette warns about its httpx-based TestClient; harmless here
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service import app

            self._client = TestClient(app)

    def post(self, path: str, payload: dict) -> dict:
        resp = self._client.post(path, json=payload)
        if resp.status_code == 200:
            return resp.json()
        try:
            detail = resp.json().get("detail")
        except ValueError:
            detail = None
        if isinstance(detail, dict) and "code" in detail:
            code = detail["code"]
            raise ClientError(
                _CODE_EXITS.get(code, EXIT_UNEXPECTED), detail.get("message", code)
            )
        raise ClientError(EXIT_FORMAT, f"request rejected ({resp.status_code}): {detail}")


def _matrix_payload(path: str, fmt: str) -> dict:
    m = load_matrix(path, fmt)
    return {"rows": m.rows, "cols": m.cols, "cells": m.data.ravel().tolist()}


def _load_attractor_file(path: str) -> list[list[int]]:
    positions = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        parts = body.split()
        if len(parts) != 2:
            raise MatrixFormatError(f"{path}:{lineno}: expected 'row col', got {line!r}")
        try:
            positions.append([int(parts[0]), int(parts[1])])
        except ValueError as exc:
            raise MatrixFormatError(f"{path}:{lineno}: non-integer position") from exc
    # an empty file is the empty attractor: let the checks report it
    return positions


def _payload_matrix(payload: dict) -> Matrix:
    arr = np.array(payload["cells"], dtype=np.int64).reshape(payload["rows"], payload["cols"])
    return Matrix(arr)


def _write_matrix(m: Matrix, path: str, fmt: str):
    if fmt == "auto":
        fmt = "raw" if Path(path).suffix.lower() in (".bin", ".raw") else "text"
    if fmt == "text" and int(m.data.min()) < 33:
        # symbols like 0..sigma-1 are not printable; remap onto a printable table
        if int(m.data.max()) >= len(_TEXT_SYMBOLS):
            raise MatrixFormatError(
                f"alphabet too large to remap to text ({m.sigma} symbols); use --format raw"
            )
        lut = np.array([ord(c) for c in _TEXT_SYMBOLS], dtype=np.int64)
        m = Matrix(lut[m.data])
        print(
            "note: symbols remapped onto 0-9a-zA-Z for the text format", file=sys.stderr
        )
    save_matrix(m, path, fmt)


def _emit(report: dict, args, human_lines=()):
    if args.no_timing:
        report.pop("timing_ms", None)
    sys.stdout.write(json.dumps(report, sort_keys=True, separators=(",", ":")) + "\n")
    for line in human_lines:
        print(line, file=sys.stderr)


def _seed_arg(args) -> int | None:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("MATRIXREPET_SEED")
    return int(env) if env else None


def cmd_delta(client: Client, args) -> int:
    payload = {
        "matrix": _matrix_payload(args.matrix, args.format),
        "method": args.method,
        "threads": args.threads,
        "paranoid": args.paranoid,
        "seed": _seed_arg(args),
    }
    report = client.post("/delta", payload)
    profile = report["output"]["profile"]
    if args.profile_out:
        Path(args.profile_out).write_text(json.dumps(profile, sort_keys=True, indent=2) + "\n")
    frac = profile["delta2d"]
    human = [
        f"delta2d = {frac['num']}/{frac['den']} (~{frac['num'] / frac['den']:.4f})"
        f" attained at k={profile['argmax_k']}",
        f"d_k for k=1..{profile['n']}: {profile['d']}",
    ]
    _emit(report, args, human)
    return EXIT_OK


def cmd_gamma(client: Client, args) -> int:
    payload = {
        "matrix": _matrix_payload(args.matrix, args.format),
        "mode": args.mode,
        "allow_large": args.allow_large,
        "seed": _seed_arg(args),
    }
    if args.budget is not None:
        payload["budget"] = args.budget
    report = client.post("/gamma", payload)
    out = report["output"]
    _emit(report, args, [f"gamma ({out['mode']}) = {out['size']}: {out['positions']}"])
    return EXIT_OK


def cmd_verify(client: Client, args) -> int:
    payload = {
        "matrix": _matrix_payload(args.matrix, args.format),
        "positions": _load_attractor_file(args.attractor),
        "seed": _seed_arg(args),
    }
    report = client.post("/verify", payload)
    out = report["output"]
    if out["valid"]:
        _emit(report, args, ["attractor is valid"])
        return EXIT_OK
    w = out["witness"]
    _emit(
        report,
        args,
        [f"INVALID: no occurrence of the distinct {w['k']}x{w['k']} submatrix at {w['anchor']} is covered"],
    )
    return EXIT_INVALID


def cmd_reduce(client: Client, args) -> int:
    s = args.string
    if s.startswith("@"):
        s = Path(s[1:]).read_text().rstrip("\n")
    report = client.post("/reduce", {"s": s})
    m = _payload_matrix(report["output"]["matrix"])
    _write_matrix(m, args.out, args.format)
    report["output"] = {"matrix_file": args.out, "rows": m.rows, "cols": m.cols}
    _emit(report, args, [f"wrote {m.rows}x{m.cols} matrix to {args.out}"])
    return EXIT_OK


def cmd_gen(client: Client, args) -> int:
    payload = {
        "family": args.family,
        "n": args.n,
        "sigma": args.sigma,
        "seed": args.rng_seed,
    }
    if args.perm:
        payload["perm"] = [int(x) for x in args.perm.split(",")]
    report = client.post("/gen", payload)
    out = report["output"]
    human = []
    if "matrix" in out:
        m = _payload_matrix(out["matrix"])
        if args.out:
            _write_matrix(m, args.out, args.format)
            report["output"] = {"matrix_file": args.out, "rows": m.rows, "cols": m.cols}
            human.append(f"wrote {m.rows}x{m.cols} matrix to {args.out}")
        else:
            human.append(f"generated {m.rows}x{m.cols} matrix (pass -o to save)")
    else:
        if args.out:
            Path(args.out).write_text(out["w"] + "\n" + out["wb"] + "\n")
            human.append(f"wrote w and wb to {args.out}")
        human.append(f"w  = {out['w']}")
        human.append(f"wb = {out['wb']}")
    _emit(report, args, human)
    return EXIT_OK


def cmd_build(client: Client, args) -> int:
    if args.shallow and args.attractor:
        raise ClientError(EXIT_FORMAT, "--shallow cannot be combined with --attractor")
    payload = {
        "matrix": _matrix_payload(args.matrix, args.format),
        "k": args.k,
        "shallow": args.shallow,
        "seed": _seed_arg(args),
    }
    if args.leaf is not None:
        payload["leaf_side"] = args.leaf
    if args.attractor:
        payload["attractor"] = _load_attractor_file(args.attractor)
    report = client.post("/build", payload)
    blob = base64.b64decode(report["output"]["tree"])
    Path(args.out).write_bytes(blob)
    stats = report["output"]["stats"]
    report["output"] = {"tree_file": args.out, "bytes": len(blob), "stats": stats}
    human = [f"wrote {len(blob)} bytes to {args.out}"] + _stats_lines(stats)
    _emit(report, args, human)
    return EXIT_OK


def _tree_b64(path: str) -> str:
    return base64.b64encode(Path(path).read_bytes()).decode("ascii")


def cmd_access(client: Client, args) -> int:
    report = client.post("/access", {"tree": _tree_b64(args.tree), "i": args.i, "j": args.j})
    out = report["output"]
    _emit(
        report,
        args,
        [f"M[{args.i}][{args.j}] = {out['symbol']} (visits per level: {out['visits_per_level']})"],
    )
    return EXIT_OK


def _stats_lines(stats: dict) -> list[str]:
    lines = [
        f"origin={stats['origin']} k={stats['k']} leaf={stats['leaf_side']}"
        f" n={stats['source_side']} padded={stats['padded_side']}",
        "level  side  marked  unmarked  leaves",
    ]
    for no, lvl in enumerate(stats["levels"], start=1):
        lines.append(
            f"{no:>5}  {lvl['side']:>4}  {lvl['marked']:>6}  {lvl['unmarked']:>8}  {lvl['leaves']:>6}"
        )
    lines.append(
        f"nodes={stats['total_nodes']} pointers={stats['pointer_count']}"
        f" explicit_cells={stats['explicit_cells']} est_bits={stats['estimated_bits']}"
    )
    return lines


def cmd_stats(client: Client, args) -> int:
    report = client.post("/stats", {"tree": _tree_b64(args.tree)})
    stats = report["output"]["stats"]
    if args.json:
        sys.stdout.write(json.dumps(stats, sort_keys=True, separators=(",", ":")) + "\n")
        return EXIT_OK
    _emit(report, args, _stats_lines(stats))
    return EXIT_OK


def cmd_bench(client: Client, args) -> int:
    payload = {
        "family": args.family,
        "sizes": [int(s) for s in args.sizes.split(",")],
        "sigma": args.sigma,
        "seed": args.rng_seed,
        "k": args.k,
    }
    if args.leaf is not None:
        payload["leaf_side"] = args.leaf
    report = client.post("/bench", payload)
    rows = report["output"]["rows"]
    cols = ["n", "delta2d", "gamma_greedy", "max_marked_per_level", "total_nodes"]
    sys.stdout.write(",".join(cols) + "\n")
    for row in rows:
        sys.stdout.write(",".join(str(row[c]) for c in cols) + "\n")
    print(f"benched {len(rows)} sizes of family {args.family}", file=sys.stderr)
    return EXIT_OK


def cmd_serve(client: Client, args) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="matrixrepet",
        description="2D repetitiveness measures (delta2d, gamma2d) and block trees",
    )
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--server", help="use a remote service instead of running in-process")
    p.add_argument("--seed", type=int, help="fingerprint seed (or env MATRIXREPET_SEED)")
    p.add_argument("--threads", type=int, default=1, help="worker threads for naive counting")
    p.add_argument("--paranoid", action="store_true", help="re-check hash equalities cell by cell")
    p.add_argument("--no-timing", action="store_true", help="omit timings for reproducible output")

    # the same flags are accepted after the subcommand; SUPPRESS keeps a
    # flag given before the subcommand from being clobbered by defaults
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--server", default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS)
    common.add_argument("--paranoid", action="store_true", default=argparse.SUPPRESS)
    common.add_argument("--no-timing", action="store_true", default=argparse.SUPPRESS)

    sub = p.add_subparsers(dest="cmd", required=True)

    fmt_kw = {"choices": ["auto", "text", "raw"], "default": "auto"}

    sp = sub.add_parser("delta", parents=[common], help="distinct-square profile and delta2d")
    sp.add_argument("matrix")
    sp.add_argument("--method", choices=["fast", "naive"], default="fast")
    sp.add_argument("--format", **fmt_kw)
    sp.add_argument("--profile-out", help="also write the profile JSON to this file")
    sp.set_defaults(fn=cmd_delta)

    sp = sub.add_parser("gamma", parents=[common], help="attractor search (exact or greedy)")
    sp.add_argument("matrix")
    sp.add_argument("--mode", choices=["exact", "greedy"], default="greedy")
    sp.add_argument("--budget", type=int, help="node budget for the exact search")
    sp.add_argument("--allow-large", action="store_true", help="lift the exact-size guard")
    sp.add_argument("--format", **fmt_kw)
    sp.set_defaults(fn=cmd_gamma)

    sp = sub.add_parser("verify", parents=[common], help="check an attractor (exit 1 if invalid)")
    sp.add_argument("matrix")
    sp.add_argument("--attractor", required=True, help="file of 1-based 'row col' lines")
    sp.add_argument("--format", **fmt_kw)
    sp.set_defaults(fn=cmd_verify)

    sp = sub.add_parser("reduce", parents=[common], help="string S -> matrix R^S (every row equals S)")
    sp.add_argument("string", help="literal string, or @file to read it")
    sp.add_argument("-o", "--out", required=True)
    sp.add_argument("--format", **fmt_kw)
    sp.set_defaults(fn=cmd_reduce)

    sp = sub.add_parser("gen", parents=[common], help="generate example families")
    sp.add_argument("family", choices=["separation", "permuted", "random", "rs", "nonmono"])
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--sigma", type=int, default=2)
    sp.add_argument("--rng-seed", type=int, default=0)
    sp.add_argument("--perm", help="comma-separated 1-based block order (permuted family)")
    sp.add_argument("-o", "--out")
    sp.add_argument("--format", **fmt_kw)
    sp.set_defaults(fn=cmd_gen)

    sp = sub.add_parser("build", parents=[common], help="build a block tree")
    sp.add_argument("matrix")
    sp.add_argument("-o", "--out", required=True)
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--leaf", type=int, help="explicit-leaf side (default k)")
    sp.add_argument("--shallow", action="store_true", help="first division sized by delta2d")
    sp.add_argument("--attractor", help="build the attractor variant from this positions file")
    sp.add_argument("--format", **fmt_kw)
    sp.set_defaults(fn=cmd_build)

    sp = sub.add_parser("access", parents=[common], help="read one cell from a tree file")
    sp.add_argument("tree")
    sp.add_argument("i", type=int)
    sp.add_argument("j", type=int)
    sp.set_defaults(fn=cmd_access)

    sp = sub.add_parser("stats", parents=[common], help="per-level statistics of a tree file")
    sp.add_argument("tree")
    sp.add_argument("--json", action="store_true", help="print the bare stats object")
    sp.set_defaults(fn=cmd_stats)

    sp = sub.add_parser("bench", parents=[common], help="measure families across sizes, CSV on stdout")
    sp.add_argument("--family", required=True, choices=["separation", "permuted", "random", "rs", "nonmono"])
    sp.add_argument("--sizes", required=True, help="comma-separated side lengths")
    sp.add_argument("--sigma", type=int, default=2)
    sp.add_argument("--rng-seed", type=int, default=0)
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--leaf", type=int)
    sp.set_defaults(fn=cmd_bench)

    sp = sub.add_parser("serve", parents=[common], help="run the HTTP service")
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8000)
    sp.set_defaults(fn=cmd_serve)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        client = None if args.cmd == "serve" else Client(args.server)
        return args.fn(client, args)
    except ClientError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except MatrixFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except Exception as exc:  # pragma: no cover - safety net
        print(f"unexpected error: {exc}", file=sys.stderr)
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
