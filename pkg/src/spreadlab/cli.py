"""Command-line client for the spreadlab service.

Subcommands mirror the service endpoints: simulate, parity-sweep, analyze,
ingest (plus serve, which runs the HTTP server). By default requests go to an
in-process copy of the service over an ASGI transport; pass --server URL to
target a running instance instead. The client only moves bytes: every CSV in
a response is written under --out unchanged, so reruns with the same config
and seed are byte-identical.

Parameter precedence is flags > config file > defaults. The config file is
INI-style, one section per subcommand, keys named like the long flags.
"""

from __future__ import annotations

import argparse
import asyncio
import configparser
import json
import sys
from pathlib import Path

import httpx

PROG = "spreadlab"

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_DIVERGED = 3

DEFAULTS: dict[str, dict] = {
    "simulate": {
        "pi": 1.0 / 3.0,
        "k": 2.0,
        "mechanism": "uniform",
        "alpha": None,
        "cancel_rate": 1e-2,
        "steps": 100_000,
        "warmup": 10_000,
        "seed": 0,
        "window": 10_000,
        "initial_depth": 10,
        "spread_ceiling": None,
        "export_tape": False,
        "export_events": False,
        "tape_tick_size": 0.01,
        "out": "out",
    },
    "parity-sweep": {
        "means": "1.5,2,3,4,6,8",
        "mechanisms": "uniform,nonuniform",
        "alpha": 0.7,
        "n_samples": 1_000_000,
        "seed": 0,
        "spread_dist": "geometric",
        "threads": 1,
        "out": "out",
    },
    "analyze": {
        "events": None,
        "estimators": "all",
        "min_count": 50,
        "delta_s_spread": None,
        "relax_delta": 2,
        "relax_max_lag": 1000,
        "acf_max_lag": 200,
        "out": "out",
    },
    "ingest": {
        "quotes": None,
        "tick_size": 0.01,
        "tolerance": 1e-6,
        "lenient": False,
        "out": "out",
    },
    "serve": {"host": "127.0.0.1", "port": 8000},
}

# coercion targets for values arriving as strings from the config file
TYPES: dict[str, type] = {
    "pi": float, "k": float, "alpha": float, "cancel_rate": float,
    "steps": int, "warmup": int, "seed": int, "window": int,
    "initial_depth": int, "spread_ceiling": int, "export_tape": bool,
    "export_events": bool, "tape_tick_size": float, "means": str,
    "mechanisms": str, "n_samples": int, "spread_dist": str, "threads": int,
    "events": str, "estimators": str, "min_count": int, "delta_s_spread": int,
    "relax_delta": int, "relax_max_lag": int, "acf_max_lag": int,
    "quotes": str, "tick_size": float, "tolerance": float, "lenient": bool,
    "out": str, "host": str, "port": int, "mechanism": str,
}


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_ERROR):
        super().__init__(message)
        self.code = code


class ServiceClient:
    """Tiny HTTP client; in-process ASGI unless a server URL is given."""

    def __init__(self, server: str | None = None):
        self.server = server

    def post(self, path: str, payload: dict) -> dict:
        return self._request("POST", path, json=payload)

    def get(self, path: str, params: dict | None = None) -> dict:
        return self._request("GET", path, params=params)

    def _request(self, method: str, path: str, **kwargs) -> dict:
        async def go():
            if self.server:
                async with httpx.AsyncClient(
                    base_url=self.server, timeout=None
                ) as client:
                    return await client.request(method, path, **kwargs)
            from .service import create_app

            transport = httpx.ASGITransport(app=create_app())
            async with httpx.AsyncClient(
                transport=transport, base_url="http://spreadlab.internal", timeout=None
            ) as client:
                return await client.request(method, path, **kwargs)

        try:
            response = asyncio.run(go())
        except httpx.HTTPError as exc:
            raise CliError(f"service unreachable: {exc}") from exc
        if response.status_code >= 400:
            try:
                detail = response.json().get("detail", response.text)
            except json.JSONDecodeError:
                detail = response.text
            raise CliError(f"service error ({response.status_code}): {detail}")
        return response.json()


def _coerce(key: str, raw: str):
    target = TYPES.get(key, str)
    if target is bool:
        lowered = raw.strip().lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise CliError(f"config value {key} = {raw!r} is not a boolean")
    try:
        return target(raw)
    except ValueError as exc:
        raise CliError(f"config value {key} = {raw!r}: {exc}") from exc


def load_config(path: str | None, section: str) -> dict:
    if path is None:
        return {}
    file = Path(path)
    if not file.exists():
        raise CliError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    parser.read(file)
    if not parser.has_section(section):
        return {}
    allowed = DEFAULTS[section]
    values = {}
    for key, raw in parser.items(section):
        key = key.replace("-", "_")
        if key not in allowed:
            raise CliError(f"unknown config key {key!r} in section [{section}]")
        values[key] = _coerce(key, raw)
    return values


def effective_params(subcommand: str, args: argparse.Namespace) -> dict:
    params = {k: v for k, v in DEFAULTS[subcommand].items()}
    params.update(load_config(getattr(args, "config", None), subcommand))
    for key, value in vars(args).items():
        if key in params:
            params[key] = value
    return params


def print_effective(subcommand: str, params: dict) -> None:
    print(f"# {subcommand} effective configuration")
    for key, value in params.items():
        print(f"# {key} = {value}")


def _mechanism_payload(name: str, alpha) -> dict:
    payload = {"kind": name}
    if name == "nonuniform":
        if alpha is None:
            raise CliError("--mechanism nonuniform requires --alpha")
        payload["alpha"] = alpha
    return payload


def _write(out_dir: Path, name: str, text: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    target = out_dir / name
    target.write_text(text)
    return target


def cmd_simulate(args: argparse.Namespace, client: ServiceClient) -> int:
    params = effective_params("simulate", args)
    print_effective("simulate", params)
    payload = {
        "pi": params["pi"],
        "k": params["k"],
        "mechanism": _mechanism_payload(params["mechanism"], params["alpha"]),
        "cancel_rate": params["cancel_rate"],
        "steps": params["steps"],
        "warmup": params["warmup"],
        "seed": params["seed"],
        "window": params["window"],
        "initial_depth": params["initial_depth"],
        "spread_ceiling": params["spread_ceiling"],
        "include_trajectory": True,
        "include_quote_tape": params["export_tape"],
        "include_events": params["export_events"],
        "tape_tick_size": params["tape_tick_size"],
    }
    result = client.post("/simulate", payload)
    out_dir = Path(params["out"])
    summary = result["summary"]
    lines = [f"# {k} = {v}" for k, v in result["config"].items()]
    lines += [f"{k} = {v}" for k, v in summary.items()]
    _write(out_dir, "summary.txt", "\n".join(lines) + "\n")
    _write(out_dir, "trajectory.csv", result["trajectory_csv"])
    if result.get("quote_tape_csv"):
        _write(out_dir, "quotes.csv", result["quote_tape_csv"])
    if result.get("events_csv"):
        _write(out_dir, "events.csv", result["events_csv"])
    print(f"wrote {out_dir}/trajectory.csv ({summary['n_records']} records)")
    if summary["diverged"]:
        print(
            "divergence: spread exceeded the ceiling after "
            f"{summary['steps_executed']} steps; trajectory truncated",
            file=sys.stderr,
        )
        return EXIT_DIVERGED
    return EXIT_OK


def cmd_parity_sweep(args: argparse.Namespace, client: ServiceClient) -> int:
    params = effective_params("parity-sweep", args)
    print_effective("parity-sweep", params)
    means = [float(x) for x in str(params["means"]).split(",") if x.strip()]
    mech_names = [m.strip() for m in str(params["mechanisms"]).split(",") if m.strip()]
    payload = {
        "means": means,
        "mechanisms": [_mechanism_payload(m, params["alpha"]) for m in mech_names],
        "n_samples": params["n_samples"],
        "seed": params["seed"],
        "spread_dist": params["spread_dist"],
        "threads": params["threads"],
    }
    result = client.post("/parity-sweep", payload)
    out_dir = Path(params["out"])
    _write(out_dir, "parity_sweep.csv", result["csv"])
    print(f"wrote {out_dir}/parity_sweep.csv ({len(result['rows'])} rows)")
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace, client: ServiceClient) -> int:
    params = effective_params("analyze", args)
    print_effective("analyze", params)
    if not params["events"]:
        raise CliError("--events PATH is required")
    events_path = Path(params["events"])
    if not events_path.exists():
        raise CliError(f"events file not found: {events_path}")
    payload = {
        "events_csv": events_path.read_text(),
        "estimators": [e.strip() for e in str(params["estimators"]).split(",") if e.strip()],
        "min_count": params["min_count"],
        "delta_s_spread": params["delta_s_spread"],
        "relax_delta": params["relax_delta"],
        "relax_max_lag": params["relax_max_lag"],
        "acf_max_lag": params["acf_max_lag"],
    }
    result = client.post("/analyze", payload)
    out_dir = Path(params["out"])
    for name, csv_text in result["outputs"].items():
        _write(out_dir, f"{name}.csv", csv_text)
    for note in result["notes"]:
        print(f"note: {note}", file=sys.stderr)
    print(f"wrote {len(result['outputs'])} estimator file(s) under {out_dir}/")
    return EXIT_OK


def cmd_ingest(args: argparse.Namespace, client: ServiceClient) -> int:
    params = effective_params("ingest", args)
    print_effective("ingest", params)
    if not params["quotes"]:
        raise CliError("--quotes PATH is required")
    quotes_path = Path(params["quotes"])
    if not quotes_path.exists():
        raise CliError(f"quotes file not found: {quotes_path}")
    payload = {
        "quotes_csv": quotes_path.read_text(),
        "tick_size": params["tick_size"],
        "tolerance": params["tolerance"],
        "strict": not params["lenient"],
    }
    result = client.post("/ingest", payload)
    out_dir = Path(params["out"])
    _write(out_dir, "events.csv", result["events_csv"])
    for key, value in result["metadata"].items():
        print(f"{key} = {value}")
    print(f"wrote {out_dir}/events.csv")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace, client: ServiceClient) -> int:
    import uvicorn

    params = effective_params("serve", args)
    uvicorn.run("spreadlab.service:app", host=params["host"], port=params["port"])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Discrete-tick order book simulation lab (thin service client)",
    )
    parser.add_argument("--server", default=None, help="URL of a running service; default runs in-process")
    parser.add_argument("--config", default=None, help="INI config file, one section per subcommand")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    S = argparse.SUPPRESS

    sim = sub.add_parser("simulate", help="run one simulation and export the trajectory")
    sim.add_argument("--pi", type=float, default=S)
    sim.add_argument("--k", type=float, default=S)
    sim.add_argument("--mechanism", choices=["uniform", "nonuniform"], default=S)
    sim.add_argument("--alpha", type=float, default=S)
    sim.add_argument("--cancel-rate", dest="cancel_rate", type=float, default=S)
    sim.add_argument("--steps", type=int, default=S)
    sim.add_argument("--warmup", type=int, default=S)
    sim.add_argument("--seed", type=int, default=S)
    sim.add_argument("--window", type=int, default=S)
    sim.add_argument("--initial-depth", dest="initial_depth", type=int, default=S)
    sim.add_argument("--spread-ceiling", dest="spread_ceiling", type=int, default=S)
    sim.add_argument("--export-tape", dest="export_tape", action="store_true", default=S)
    sim.add_argument("--export-events", dest="export_events", action="store_true", default=S)
    sim.add_argument("--tape-tick-size", dest="tape_tick_size", type=float, default=S)
    sim.add_argument("--out", default=S)
    sim.set_defaults(func=cmd_simulate)

    sw = sub.add_parser("parity-sweep", help="odd-fraction asymmetry over virtual stocks")
    sw.add_argument("--means", default=S, help="comma-separated mean spreads")
    sw.add_argument("--mechanisms", default=S, help="comma-separated mechanism names")
    sw.add_argument("--alpha", type=float, default=S)
    sw.add_argument("--n-samples", dest="n_samples", type=int, default=S)
    sw.add_argument("--seed", type=int, default=S)
    sw.add_argument("--spread-dist", dest="spread_dist", choices=["geometric", "poisson"], default=S)
    sw.add_argument("--threads", type=int, default=S)
    sw.add_argument("--out", default=S)
    sw.set_defaults(func=cmd_parity_sweep)

    an = sub.add_parser("analyze", help="run estimators over an event CSV")
    an.add_argument("--events", default=S, help="event CSV path (t,s_pre,s_post,kind[,mid])")
    an.add_argument("--estimators", default=S, help="comma-separated names or 'all'")
    an.add_argument("--min-count", dest="min_count", type=int, default=S)
    an.add_argument("--delta-s-spread", dest="delta_s_spread", type=int, default=S)
    an.add_argument("--relax-delta", dest="relax_delta", type=int, default=S)
    an.add_argument("--relax-max-lag", dest="relax_max_lag", type=int, default=S)
    an.add_argument("--acf-max-lag", dest="acf_max_lag", type=int, default=S)
    an.add_argument("--out", default=S)
    an.set_defaults(func=cmd_analyze)

    ing = sub.add_parser("ingest", help="classify a quote tape into an event CSV")
    ing.add_argument("--quotes", default=S, help="quote tape CSV path (timestamp,bid,ask[,day])")
    ing.add_argument("--tick-size", dest="tick_size", type=float, default=S)
    ing.add_argument("--tolerance", type=float, default=S)
    ing.add_argument("--lenient", action="store_true", default=S)
    ing.add_argument("--out", default=S)
    ing.set_defaults(func=cmd_ingest)

    srv = sub.add_parser("serve", help="run the HTTP service")
    srv.add_argument("--host", default=S)
    srv.add_argument("--port", type=int, default=S)
    srv.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    client = ServiceClient(args.server)
    try:
        return args.func(args, client)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
