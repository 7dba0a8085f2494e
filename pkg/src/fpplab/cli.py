"""Command-line front end.

The CLI owns no experiment logic: every subcommand builds a request,
sends it through the HTTP API (in-process by default, a remote server
with --server), and prints the returned report document as JSON on
standard output.  Progress notes go to standard error.  Exit codes:
0 success, 1 assertion failure in the results, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Any, Optional

from . import __version__, reports


def _eprint(*parts: Any) -> None:
    print(*parts, file=sys.stderr)


def _env_threads() -> Optional[int]:
    raw = os.environ.get("FPP_THREADS")
    if raw is None or raw == "":
        return None
    try:
        value = int(raw)
    except ValueError:
        raise SystemExit(f"fpplab: FPP_THREADS must be an integer, got {raw!r}")
    return value if value >= 1 else None


def _dist_arg(raw: str) -> str:
    """Inline JSON, or @path to read the document from a file."""
    if raw.startswith("@"):
        with open(raw[1:], "r", encoding="utf-8") as fh:
            return fh.read()
    return raw


def _float_grid(raw: str) -> list[float]:
    return [float(tok) for tok in raw.split(",") if tok.strip() != ""]


def _int_grid(raw: str) -> list[int]:
    return [int(tok) for tok in raw.split(",") if tok.strip() != ""]


class ApiClient:
    """POSTs request bodies either to a live server or to the app in-process."""

    def __init__(self, server: Optional[str]):
        if server:
            import httpx

            self._client = httpx.Client(base_url=server, timeout=600.0)
        else:
            import warnings

            with warnings.catch_warnings():
                # the shipped starlette flags its own httpx-backed TestClient
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service import create_app

            self._client = TestClient(create_app(), raise_server_exceptions=False)

    def post(self, path: str, body: dict) -> tuple[int, Any]:
        response = self._client.post(path, json=body)
        try:
            payload = response.json()
        except ValueError:
            payload = {"detail": response.text}
        return response.status_code, payload


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fpplab",
        description="Passage-time bounds, path censuses, and oriented-percolation experiments.",
    )
    parser.add_argument("--version", action="version", version=f"fpplab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--server", default=None, help="base URL of a running server (default: in-process)")
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--threads", type=int, default=None, help="worker threads (default: FPP_THREADS or serial)")
    common.add_argument("--csv", default=None, metavar="PATH", help="also write tabular results as CSV")
    common.add_argument("--verbose", action="store_true")

    p = sub.add_parser("bounds", parents=[common], help="tertile bounds for a weight distribution")
    p.add_argument("--dist", required=True, help="mixture JSON or @file")
    p.add_argument("--d", type=int, default=None, help="also report the d-dimensional variant")
    p.add_argument("--pc-d", type=float, default=None, dest="pc_d")

    p = sub.add_parser("estimate", parents=[common], help="Monte Carlo time-constant estimate")
    p.add_argument("--dist", required=True, help="mixture JSON or @file")
    p.add_argument("--n", default="200", help="comma-separated size grid (default 200)")
    p.add_argument("--replicates", type=int, default=20)
    p.add_argument("--margin-factor", type=float, default=0.25, dest="margin_factor")

    p = sub.add_parser("counterexample", parents=[common], help="light/heavy mixture separation experiment")
    p.add_argument("--dist", default=None, help="mixture JSON or @file (default: canonical two-atom mixture)")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--replicates", type=int, default=30)

    p = sub.add_parser("median-suite", parents=[common], help="trend tables for pinned-median families")
    p.add_argument("--k-grid", default="1,10,100", dest="k_grid")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--replicates", type=int, default=10)

    p = sub.add_parser("saw", parents=[common], help="self-avoiding-walk counts, censuses, bound chains")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--count", type=int, default=None, metavar="N", help="exact walk count c_N")
    mode.add_argument("--census", action="store_true", help="heavy-edge census of one seeded field")
    mode.add_argument("--bound", action="store_true", help="expected-count bound chain")
    mode.add_argument("--witness", action="store_true", help="passage lower bound on a zero-census field")
    p.add_argument("--dist", default=None, help="mixture JSON or @file (census, witness)")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--threshold", type=float, default=None, help="heavy-edge weight threshold (census, witness)")
    p.add_argument("--p", type=float, default=2.0 / 3.0, help="heavy-edge probability (bound)")
    p.add_argument("--beta", type=float, default=5.0, help="exponential tilt (bound)")

    p = sub.add_parser("opc", parents=[common], help="oriented-percolation experiments")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--survival", action="store_true", help="survival frequency at one p")
    mode.add_argument("--scan", action="store_true", help="survival across a p grid, with level crossing")
    mode.add_argument("--probe", action="store_true", help="oriented-route frequencies across a slack grid")
    p.add_argument("--p", type=float, default=None, help="open probability (survival)")
    p.add_argument("--p-grid", default=None, dest="p_grid", help="comma-separated p values (scan)")
    p.add_argument("--m-grid", default=None, dest="m_grid", help="comma-separated slack values (probe)")
    p.add_argument("--depth", type=int, default=200)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--level", type=float, default=0.5)
    p.add_argument("--n", type=int, default=200, help="route length (probe)")
    p.add_argument("--dist", default=None, help="mixture JSON or @file (probe)")

    sub.add_parser("selftest", parents=[common], help="run the full invariant suite")

    p = sub.add_parser("serve", help="run the HTTP server")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


_CE_DOC = '{"mix": [{"w": 0.6666666666666666, "point": 1.0}, {"w": 0.3333333333333333, "point": 3888.0}]}'


def _build_request(args: argparse.Namespace) -> tuple[str, dict, Optional[str]]:
    """Map parsed flags to (endpoint path, body, csv kind)."""
    threads = args.threads if args.threads is not None else _env_threads()
    if args.command == "bounds":
        body: dict = {"dist": _dist_arg(args.dist)}
        if args.d is not None:
            body["d"] = args.d
        if args.pc_d is not None:
            body["pc_d"] = args.pc_d
        return "/api/bounds", body, None
    if args.command == "estimate":
        body = {
            "dist": _dist_arg(args.dist),
            "n_grid": _int_grid(args.n),
            "replicates": args.replicates,
            "margin_factor": args.margin_factor,
            "seed": args.seed,
            "threads": threads,
            "verbose": args.verbose,
        }
        return "/api/estimate", body, "estimates"
    if args.command == "counterexample":
        body = {
            "dist": _dist_arg(args.dist) if args.dist else _CE_DOC,
            "n": args.n,
            "replicates": args.replicates,
            "seed": args.seed,
            "threads": threads,
        }
        return "/api/counterexample", body, None
    if args.command == "median-suite":
        body = {
            "k_grid": _int_grid(args.k_grid),
            "n": args.n,
            "replicates": args.replicates,
            "seed": args.seed,
            "threads": threads,
        }
        return "/api/median-suite", body, "median_suite"
    if args.command == "saw":
        if args.count is not None:
            return "/api/saw/count", {"n": args.count}, None
        if args.bound:
            body = {"delta": args.delta, "p": args.p, "beta": args.beta}
            if args.n is not None:
                body["n"] = args.n
            return "/api/saw/bound", body, None
        if args.dist is None or args.threshold is None:
            raise SystemExit("fpplab saw: --census/--witness need --dist and --threshold")
        body = {
            "dist": _dist_arg(args.dist),
            "delta": args.delta,
            "threshold": args.threshold,
            "seed": args.seed,
        }
        if args.n is not None:
            body["n"] = args.n
        return ("/api/saw/census" if args.census else "/api/saw/witness"), body, None
    if args.command == "opc":
        if args.survival:
            if args.p is None:
                raise SystemExit("fpplab opc: --survival needs --p")
            body = {"p": args.p, "depth": args.depth, "trials": args.trials, "seed": args.seed}
            return "/api/opc/survival", body, "scan"
        if args.scan:
            if args.p_grid is None:
                raise SystemExit("fpplab opc: --scan needs --p-grid")
            body = {
                "p_grid": _float_grid(args.p_grid),
                "depth": args.depth,
                "trials": args.trials,
                "level": args.level,
                "seed": args.seed,
            }
            return "/api/opc/scan", body, "scan"
        if args.m_grid is None:
            raise SystemExit("fpplab opc: --probe needs --m-grid")
        body = {
            "dist": _dist_arg(args.dist) if args.dist else _CE_DOC,
            "n": args.n,
            "M_grid": _float_grid(args.m_grid),
            "trials": args.trials,
            "seed": args.seed,
        }
        return "/api/opc/probe", body, "probe"
    if args.command == "selftest":
        return "/api/selftest", {}, None
    raise SystemExit(f"fpplab: unknown command {args.command!r}")


def _csv_rows(kind: str, results: dict) -> list[dict]:
    if kind == "estimates":
        return [
            {
                "n": row["n"],
                "replicates": row["replicates"],
                "mean": row["mean"],
                "stderr": row["stderr"],
                "ci_lo": row["ci95"][0],
                "ci_hi": row["ci95"][1],
            }
            for row in results["estimates"]
        ]
    if kind == "scan":
        rows = results["rows"] if "rows" in results else [results]
        return [
            {key: row[key] for key in ("p", "depth", "trials", "successes", "frequency", "stderr")}
            for row in rows
        ]
    if kind == "probe":
        return [
            {
                key: row[key]
                for key in ("M", "freq_A", "freq_A_prime", "freq_AA", "stderr_A", "stderr_AA")
            }
            for row in results["rows"]
        ]
    if kind == "median_suite":
        out = []
        for family in ("family_A", "family_B"):
            for row in results[family]["rows"]:
                out.append(
                    {
                        "family": family[-1],
                        "k": row["k"],
                        "n": row["n"],
                        "replicates": row["replicates"],
                        "mean": row["mean"],
                        "stderr": row["stderr"],
                    }
                )
        return out
    raise SystemExit(f"fpplab: no CSV form for {kind!r}")


def _results_verdict(results: Any) -> bool:
    """False when the report carries a failed assertion."""
    if not isinstance(results, dict):
        return True
    if results.get("ok") is False:
        return False
    if results.get("holds") is False:
        return False
    return True


def _serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    _eprint(f"[fpplab] serving on http://{args.host}:{args.port}")
    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return int(code) if isinstance(code, int) else (0 if code is None else 2)

    if args.command == "serve":
        return _serve(args)

    try:
        path, body, csv_kind = _build_request(args)
    except SystemExit as exc:
        if isinstance(exc.code, str):
            _eprint(exc.code)
            return 2
        raise
    except OSError as exc:
        _eprint(f"fpplab: {exc}")
        return 2

    if args.verbose:
        _eprint(f"[fpplab] POST {path} {'(in-process)' if not args.server else args.server}")
    try:
        client = ApiClient(args.server)
        status, payload = client.post(path, body)
    except Exception as exc:
        _eprint(f"fpplab: request failed: {exc}")
        return 2

    if status == 422 or status == 400:
        detail = payload.get("detail", payload) if isinstance(payload, dict) else payload
        _eprint(f"fpplab: invalid request: {json.dumps(detail) if not isinstance(detail, str) else detail}")
        return 2
    if status != 200:
        _eprint(f"fpplab: server error {status}: {payload}")
        return 1

    print(json.dumps(payload, indent=2))
    results = payload.get("results", {}) if isinstance(payload, dict) else {}

    if args.csv is not None:
        if csv_kind is None:
            _eprint(f"fpplab: {args.command} has no CSV form")
            return 2
        text = reports.csv_for(csv_kind, _csv_rows(csv_kind, results))
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(text)
        if args.verbose:
            _eprint(f"[fpplab] wrote {args.csv}")

    if not _results_verdict(results):
        _eprint("[fpplab] assertion failed; see results")
        return 1
    wall = payload.get("wall_time_seconds") if isinstance(payload, dict) else None
    if args.verbose and wall is not None:
        _eprint(f"[fpplab] done in {wall:.2f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
