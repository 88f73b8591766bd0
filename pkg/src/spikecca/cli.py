"""Command-line front end.

Commands are thin clients of the HTTP service: by default the service
app runs in-process (no socket), and --server points the same commands
at a remote instance.  Dataset parsing happens client-side; all math
happens behind the service contract.

Exit codes: 0 success, 2 usage or model-domain error, 3 data or shape
error, 4 numerical or rank-deficiency error, 5 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import warnings

import numpy as np

from .errors import SpikeCCAError

SEED_ENV_VAR = "SPIKECCA_SEED"

_EXIT_CODES = {
    "usage": 2,
    "model_domain": 2,
    "data_shape": 3,
    "rank_deficiency": 4,
    "numerical": 4,
    "config": 5,
}


class _CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _fail(message: str, category: str = "usage") -> _CliError:
    return _CliError(message, _EXIT_CODES.get(category, 2))


# ----------------------------------------------------------------------
# service client
# ----------------------------------------------------------------------

def _make_client(server: str):
    import httpx

    if server:
        return httpx.Client(base_url=server.rstrip("/"), timeout=None)
    # In-process ASGI client; the TestClient name is starlette's, but it
    # is simply a synchronous httpx client bound to the app.
    warnings.filterwarnings("ignore", message=".*httpx2.*")
    from fastapi.testclient import TestClient

    from .service import create_app

    return TestClient(create_app())


def _call(client, method: str, path: str, payload=None) -> dict:
    resp = client.request(method, path, json=payload)
    if resp.status_code == 200:
        return resp.json()
    try:
        body = resp.json()
    except ValueError:
        raise _fail(f"service error {resp.status_code}: {resp.text}", "numerical")
    if "error" in body:
        category = body["error"].get("category", "error")
        message = body["error"].get("message", "")
        raise _fail(f"{category}: {message}", category)
    # pydantic request validation
    raise _fail(f"invalid request: {json.dumps(body.get('detail', body))}", "usage")


# ----------------------------------------------------------------------
# dataset parsing
# ----------------------------------------------------------------------

def _parse_columns(spec: str, header: list, width: int) -> list:
    """Column selector: comma list of indices, inclusive ranges (a-b),
    or header names."""
    out = []
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        if header and part in header:
            out.append(header.index(part))
            continue
        if "-" in part and not part.lstrip("-").isdigit():
            lo, _, hi = part.partition("-")
            try:
                lo_i, hi_i = int(lo), int(hi)
            except ValueError:
                raise _fail(f"bad column range {part!r}", "data_shape")
            if lo_i > hi_i:
                raise _fail(f"empty column range {part!r}", "data_shape")
            out.extend(range(lo_i, hi_i + 1))
            continue
        try:
            out.append(int(part))
        except ValueError:
            raise _fail(f"unknown column {part!r}", "data_shape")
    bad = [i for i in out if not (0 <= i < width)]
    if bad:
        raise _fail(f"column indices {bad} out of range for width {width}", "data_shape")
    if len(set(out)) != len(out):
        raise _fail(f"duplicate columns in {spec!r}", "data_shape")
    return out


def _read_table(path: str, delimiter: str, has_header: bool):
    """Read a delimited numeric table; returns (header or [], matrix)."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [row for row in csv.reader(fh, delimiter=delimiter) if row]
    except OSError as exc:
        raise _fail(f"cannot read {path}: {exc}", "data_shape")
    if not rows:
        raise _fail(f"{path} is empty", "data_shape")
    header = [c.strip() for c in rows[0]] if has_header else []
    body = rows[1:] if has_header else rows
    if not body:
        raise _fail(f"{path} has no data rows", "data_shape")
    width = len(body[0])
    data = np.empty((len(body), width))
    for i, row in enumerate(body):
        if len(row) != width:
            raise _fail(f"{path} row {i + 1}: expected {width} fields, got {len(row)}",
                        "data_shape")
        for j, cell in enumerate(row):
            cell = cell.strip()
            if cell == "":
                raise _fail(f"{path} row {i + 1}: missing value in column {j}",
                            "data_shape")
            try:
                data[i, j] = float(cell)
            except ValueError:
                raise _fail(f"{path} row {i + 1}: non-numeric value {cell!r}",
                            "data_shape")
    return header, data


def _load_blocks(args) -> tuple:
    """Return (x, y) with variables in rows, observations in columns."""
    if args.spectrum:
        raise AssertionError("caller handles spectrum input")
    delim = args.delimiter
    if args.x_file or args.y_file:
        if not (args.x_file and args.y_file):
            raise _fail("--x-file and --y-file must be given together")
        _, x = _read_table(args.x_file, delim, args.header)
        _, y = _read_table(args.y_file, delim, args.header)
        if not args.transpose:
            x, y = x.T, y.T
        return x, y
    if not args.data:
        raise _fail("provide --data (with column split) or --x-file/--y-file")
    header, table = _read_table(args.data, delim, args.header)
    if args.transpose:
        table = table.T
        header = []
    width = table.shape[1]
    if args.x_cols and args.y_cols:
        xi = _parse_columns(args.x_cols, header, width)
        yi = _parse_columns(args.y_cols, header, width)
    elif args.x_cols:
        xi = _parse_columns(args.x_cols, header, width)
        yi = [j for j in range(width) if j not in set(xi)]
    elif args.y_cols:
        yi = _parse_columns(args.y_cols, header, width)
        xi = [j for j in range(width) if j not in set(yi)]
    else:
        raise _fail("single-file input needs --x-cols and/or --y-cols")
    if set(xi) & set(yi):
        raise _fail("x and y column sets overlap", "data_shape")
    if not xi or not yi:
        raise _fail("both blocks need at least one column", "data_shape")
    return table[:, xi].T, table[:, yi].T


# ----------------------------------------------------------------------
# commands
# ----------------------------------------------------------------------

def _cmd_lsd(args, client) -> int:
    payload = {"c1": args.c1, "c2": args.c2, "grid_points": args.grid or 0}
    body = _call(client, "POST", "/api/lsd", payload)
    if args.json:
        print(json.dumps(body, indent=2))
        return 0
    print(f"c1 = {body['c1']:.6f}  c2 = {body['c2']:.6f}")
    print(f"d_minus = {body['d_minus']:.6f}  d_plus = {body['d_plus']:.6f}")
    print(f"r_c = {body['r_c']:.6f}  xi_tw = {body['xi_tw']:.6f}")
    if args.grid:
        print("x,density")
        for x, f in zip(body["grid_x"], body["grid_density"]):
            print(f"{x:.8f},{f:.8f}")
    return 0


def _read_spectrum_file(path: str) -> list:
    try:
        with open(path, encoding="utf-8") as fh:
            values = [float(tok) for tok in fh.read().split()]
    except OSError as exc:
        raise _fail(f"cannot read {path}: {exc}", "data_shape")
    except ValueError as exc:
        raise _fail(f"{path}: {exc}", "data_shape")
    if not values:
        raise _fail(f"{path} holds no eigenvalues", "data_shape")
    return values


def _cmd_estimate(args, client) -> int:
    payload = {"alpha": args.alpha, "epsilon": args.epsilon}
    if args.spectrum:
        if args.p is None or args.q is None or args.n is None:
            raise _fail("--spectrum needs --p, --q, and --n (effective)")
        payload.update(eigenvalues=_read_spectrum_file(args.spectrum),
                       p=args.p, q=args.q, n=args.n)
    else:
        x, y = _load_blocks(args)
        payload.update(x=x.tolist(), y=y.tolist(), center=not args.no_center)
    body = _call(client, "POST", "/api/estimate", payload)
    if args.json:
        print(json.dumps(body, indent=2))
        return 0
    con = body["constants"]
    est = body["estimate"]
    print(f"p = {body['p']}, q = {body['q']}, effective n = {body['effective_n']}")
    print(f"d_plus = {con['d_plus']:.6f}  r_c = {con['r_c']:.6f}  "
          f"epsilon_n = {con['epsilon_n']:.6f}")
    lam = ", ".join(f"{v:.4f}" for v in body["eigenvalues"][:8])
    more = " ..." if len(body["eigenvalues"]) > 8 else ""
    print(f"eigenvalues: {lam}{more}")
    for rep in body["reports"]:
        verdict = "reject" if rep["reject"] else "retain"
        p_part = "" if rep["p_value"] is None else f", p = {rep['p_value']:.3g}"
        print(f"test {rep['name']}: statistic {rep['statistic']:.4f} vs "
              f"quantile {rep['quantile']:.4f} at alpha {rep['alpha']:g} "
              f"-> {verdict}{p_part}")
    if est["k_hat"] == 0:
        print("no evidence of correlation (k_hat = 0)")
    else:
        print(f"k_hat = {est['k_hat']}")
        for i, (r, rho) in enumerate(zip(est["r_hat"], est["rho_hat"]), start=1):
            flag = "  (clamped)" if est["clamp_flags"][i - 1] else ""
            print(f"  r_hat_{i} = {r:.4f}  rho_hat_{i} = {rho:.4f}{flag}")
        groups = [g for g in est["groups"] if len(g) > 1]
        if groups:
            print("multiplicity groups: " + ", ".join(str(g) for g in groups))
    return 0


def _cmd_study(args, client) -> int:
    if (args.preset is None) == (args.config is None):
        raise _fail("pass exactly one of --preset or --config")
    payload = {"seed": args.seed, "reps": args.reps,
               "workers": args.workers, "alpha": args.alpha}
    if args.preset:
        payload["preset"] = args.preset
    else:
        try:
            with open(args.config, encoding="utf-8") as fh:
                payload["config"] = json.load(fh)
        except OSError as exc:
            raise _fail(f"cannot read config: {exc}", "config")
        except json.JSONDecodeError as exc:
            raise _fail(f"config is not valid JSON: {exc}", "config")
    body = _call(client, "POST", "/api/study", payload)
    if args.json:
        print(json.dumps(body, indent=2))
        return 0
    prefix = args.prefix or args.preset or body["study"]
    out_dir = args.out_dir or "."
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{prefix}.csv")
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(body["csv"])
    summary_path = os.path.join(out_dir, f"{prefix}_summary.txt")
    with open(summary_path, "w", encoding="utf-8") as fh:
        fh.write(body["summary"] + "\n")
    written = [csv_path, summary_path]
    if body.get("histograms"):
        hist_path = os.path.join(out_dir, f"{prefix}_histograms.json")
        with open(hist_path, "w", encoding="utf-8") as fh:
            json.dump(body["histograms"], fh)
        written.append(hist_path)
    print(body["summary"])
    print("wrote " + ", ".join(written))
    return 0


def _cmd_presets(args, client) -> int:
    from .presets import available_presets

    if args.json:
        print(json.dumps(list(available_presets()), indent=2))
    else:
        for name in available_presets():
            print(name)
    return 0


def _cmd_serve(args, client) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="info")
    return 0


# ----------------------------------------------------------------------
# argument parsing
# ----------------------------------------------------------------------

def _env_seed():
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise _fail(f"{SEED_ENV_VAR} must be an integer, got {raw!r}", "config")


def _add_common(parser):
    parser.add_argument("--server", default=None,
                        help="base URL of a running service (default: in-process)")
    parser.add_argument("--seed", type=int, default=None,
                        help=f"root seed (default: ${SEED_ENV_VAR} when set)")
    parser.add_argument("--json", action="store_true",
                        help="print the full JSON response")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spikecca",
        description="Spiked canonical correlation analysis: spectral formulas, "
                    "estimation pipeline, and replication studies.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_lsd = sub.add_parser("lsd", help="limiting-spectrum constants and density")
    p_lsd.add_argument("--c1", type=float, required=True, help="dimension ratio p/n")
    p_lsd.add_argument("--c2", type=float, required=True, help="dimension ratio q/n")
    p_lsd.add_argument("--grid", type=int, default=0,
                       help="emit a density table on an N-point grid")
    _add_common(p_lsd)
    p_lsd.set_defaults(func=_cmd_lsd)

    p_est = sub.add_parser("estimate", help="run the estimation pipeline on a dataset")
    p_est.add_argument("--data", help="CSV with both blocks (rows = observations)")
    p_est.add_argument("--x-cols", help="columns of the x block (indices, ranges, names)")
    p_est.add_argument("--y-cols", help="columns of the y block")
    p_est.add_argument("--x-file", help="CSV holding only the x block")
    p_est.add_argument("--y-file", help="CSV holding only the y block")
    p_est.add_argument("--delimiter", default=",", help="field delimiter (default ,)")
    p_est.add_argument("--header", action="store_true", help="first row is a header")
    p_est.add_argument("--transpose", action="store_true",
                       help="rows are variables instead of observations")
    p_est.add_argument("--no-center", action="store_true",
                       help="data is already centered; skip centering")
    p_est.add_argument("--spectrum", help="file of eigenvalues instead of raw data")
    p_est.add_argument("--p", type=int, help="x dimension (with --spectrum)")
    p_est.add_argument("--q", type=int, help="y dimension (with --spectrum)")
    p_est.add_argument("--n", type=int, help="effective sample size (with --spectrum)")
    p_est.add_argument("--alpha", type=float, default=0.05, help="test level")
    p_est.add_argument("--epsilon", type=float, default=None,
                       help="detection threshold offset (default log log n / n^(2/3))")
    _add_common(p_est)
    p_est.set_defaults(func=_cmd_estimate)

    for name in ("study", "simulate"):
        p_st = sub.add_parser(name, help="run a replication study")
        p_st.add_argument("--preset", help="named preset (see `spikecca presets`)")
        p_st.add_argument("--config", help="JSON study configuration file")
        p_st.add_argument("--reps", type=int, default=None, help="override replication count")
        p_st.add_argument("--workers", type=int, default=None, help="worker threads")
        p_st.add_argument("--alpha", type=float, default=None, help="test level")
        p_st.add_argument("--out-dir", default=None, help="output directory (default .)")
        p_st.add_argument("--prefix", default=None, help="output file prefix")
        _add_common(p_st)
        p_st.set_defaults(func=_cmd_study)

    p_pre = sub.add_parser("presets", help="list available study presets")
    _add_common(p_pre)
    p_pre.set_defaults(func=_cmd_presets)

    p_srv = sub.add_parser("serve", help="run the HTTP service")
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--port", type=int, default=8000)
    _add_common(p_srv)
    p_srv.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.seed is None:
            args.seed = _env_seed()
        client = None if args.command == "serve" else _make_client(args.server)
        try:
            return args.func(args, client)
        finally:
            if client is not None:
                client.close()
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except SpikeCCAError as exc:
        print(f"error: {exc.category}: {exc}", file=sys.stderr)
        return _EXIT_CODES.get(exc.category, 2)


if __name__ == "__main__":
    sys.exit(main())
