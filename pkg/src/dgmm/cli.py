"""Command-line front door.

The CLI is a thin client of the HTTP service: every subcommand assembles a
JSON request and posts it either to a remote service (--url) or to an
in-process instance of the same application. Artifacts returned inline
(CSV bodies) are written under --out.

Exit codes: 0 pass/success, 2 indeterminate, 3 fail, 4 input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

EXIT_OK = 0
EXIT_INDETERMINATE = 2
EXIT_FAIL = 3
EXIT_INPUT = 4


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="dgmm",
        description="Interfacial-energy toolkit for the two-well"
        " gradient model")
    ap.add_argument("--config", type=Path, default=None,
                    help="JSON file merged into the request body")
    ap.add_argument("--out", type=Path, default=None,
                    help="directory for response artifacts")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=None,
                    help="cap BLAS/OpenMP thread pools")
    ap.add_argument("--url", default=None,
                    help="remote service base URL (default: in-process)")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_potential_flags(p):
        p.add_argument("--kind", default="w0",
                       choices=["w0", "scaled", "ripple", "registry"])
        p.add_argument("--factor", type=float, default=None)
        p.add_argument("--sigma", type=float, default=None)
        p.add_argument("--potential-seed", type=int, default=None)
        p.add_argument("--name", default=None)
        p.add_argument("--well", default="0,1",
                       help="well vector a as 'a1,a2'")

    pot = sub.add_parser("potential", help="potential checks")
    pot_sub = pot.add_subparsers(dest="action", required=True)
    chk = pot_sub.add_parser("check", help="growth and perturbation checks")
    add_potential_flags(chk)
    chk.add_argument("--alpha", type=float, default=0.25)

    geo = sub.add_parser("geodesic", help="well-to-well geodesic distance")
    add_potential_flags(geo)
    geo.add_argument("--n-points", type=int, default=201)
    geo.add_argument("--no-refine", action="store_true")
    geo.add_argument("--curve", action="store_true",
                     help="include the geodesic curve CSV")

    pr = sub.add_parser("profile1d", help="1D transition profile constant")
    add_potential_flags(pr)
    pr.add_argument("--half-len", type=float, default=6.0)
    pr.add_argument("--n-points", type=int, default=600)
    pr.add_argument("--profile", action="store_true",
                    help="include the profile CSV")

    ce = sub.add_parser("cell2d", help="2D periodic cell constant")
    add_potential_flags(ce)
    ce.add_argument("--grid", type=int, default=64)
    ce.add_argument("--field", action="store_true",
                    help="include the minimizing field CSV")

    gl = sub.add_parser("glue", help="gluing constructions")
    add_potential_flags(gl)
    gl.add_argument("--construct", required=True,
                    choices=["translate", "midpoint", "combined", "recovery"])
    gl.add_argument("--param", action="append", default=[],
                    metavar="KEY=VALUE", help="construction parameter")

    ve = sub.add_parser("verify", help="hypothesis verification")
    add_potential_flags(ve)
    ve.add_argument("--grid", type=int, default=64)
    ve.add_argument("--skip-cell", action="store_true")

    sub.add_parser("sweep", help="run a sweep matrix from --config")
    return ap


def _potential_body(args) -> dict:
    a = [float(v) for v in args.well.split(",")]
    body = {"kind": args.kind, "a": a}
    if args.factor is not None:
        body["factor"] = args.factor
    if args.sigma is not None:
        body["sigma"] = args.sigma
    if args.potential_seed is not None:
        body["seed"] = args.potential_seed
    if args.name is not None:
        body["name"] = args.name
    return body


def _parse_params(pairs) -> dict:
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise ValueError(f"--param expects KEY=VALUE, got {pair!r}")
        key, val = pair.split("=", 1)
        try:
            out[key] = json.loads(val)
        except json.JSONDecodeError:
            out[key] = val
    return out


class Client:
    """POSTs to a remote service or to an in-process application."""

    def __init__(self, url: str | None):
        if url:
            import httpx
            self._client = httpx.Client(base_url=url, timeout=600.0)
        else:
            import warnings
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient
            from .service import create_app
            self._client = TestClient(create_app())

    def post(self, path: str, body: dict) -> tuple[int, dict]:
        resp = self._client.post(path, json=body)
        try:
            payload = resp.json()
        except Exception:
            payload = {"error": "BadResponse", "message": resp.text}
        return resp.status_code, payload


def _write_artifacts(payload: dict, out: Path | None) -> dict:
    """Strip inline CSV bodies into files under --out; return the summary."""
    if out is None:
        return payload
    out.mkdir(parents=True, exist_ok=True)
    summary = {}
    for key, val in payload.items():
        if key.endswith("_csv") and isinstance(val, str):
            name = key[:-4] + ".csv"
            (out / name).write_text(val)
            summary[key] = str(out / name)
        elif key == "files" and isinstance(val, dict):
            written = []
            for fname, text in val.items():
                (out / fname).write_text(text)
                written.append(str(out / fname))
            summary["files"] = written
        else:
            summary[key] = val
    (out / "report.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True, default=str) + "\n")
    return summary


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    if args.threads is not None:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS"):
            os.environ[var] = str(args.threads)

    extra = {}
    if args.config is not None:
        try:
            extra = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return EXIT_INPUT

    try:
        path, body = _assemble(args, extra)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    client = Client(args.url)
    status, payload = client.post(path, body)
    if status >= 400:
        print(json.dumps(payload, indent=2, default=str), file=sys.stderr)
        return EXIT_INPUT if status in (400, 422) else EXIT_FAIL

    summary = _write_artifacts(payload, args.out)
    print(json.dumps(summary, indent=2, sort_keys=True, default=str))

    if args.command == "verify":
        verdict = payload.get("verdict")
        if verdict == "pass":
            return EXIT_OK
        if verdict == "indeterminate":
            return EXIT_INDETERMINATE
        return EXIT_FAIL
    if args.command == "sweep":
        failures = payload.get("manifest", {}).get("failures", [])
        return EXIT_FAIL if failures else EXIT_OK
    return EXIT_OK


def _assemble(args, extra: dict) -> tuple[str, dict]:
    cmd = args.command
    if cmd == "potential":
        body = {"potential": _potential_body(args), "alpha": args.alpha,
                "seed": args.seed}
        body.update(extra)
        return "/potential/check", body
    if cmd == "geodesic":
        body = {"potential": _potential_body(args),
                "n_points": args.n_points, "refine": not args.no_refine,
                "include_curve": args.curve}
        body.update(extra)
        return "/geodesic", body
    if cmd == "profile1d":
        body = {"potential": _potential_body(args),
                "half_len": args.half_len, "n_points": args.n_points,
                "include_profile": args.profile}
        body.update(extra)
        return "/profile1d", body
    if cmd == "cell2d":
        body = {"potential": _potential_body(args), "grid": args.grid,
                "include_field": args.field}
        body.update(extra)
        return "/cell2d", body
    if cmd == "glue":
        body = {"potential": _potential_body(args),
                "construction": args.construct,
                "params": _parse_params(args.param), "seed": args.seed}
        if extra:
            body["params"] = {**extra.get("params", {}), **body["params"]}
        return "/glue", body
    if cmd == "verify":
        body = {"potential": _potential_body(args), "grid": args.grid,
                "skip_cell": args.skip_cell}
        body.update(extra)
        return "/verify", body
    if cmd == "sweep":
        return "/sweep", {"config": extra, "seed": args.seed}
    raise ValueError(f"unknown command {cmd!r}")


if __name__ == "__main__":
    sys.exit(main())
