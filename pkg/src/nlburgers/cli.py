"""Command line interface.

Subcommands:

  run     one simulation; writes timeseries.csv, snapshot_<t>.csv files and
          run.json into the output directory.  With --server URL the run
          executes on a service instance and the same files are written
          locally from the response (floats round-trip JSON exactly, so the
          artifacts are byte-identical to an in-process run).
  sweep   fan a run out over several values of one config key, each run in
          its own subdirectory, optionally across worker processes.
  serve   start the HTTP service.

Exit codes: 0 reached_t_final, 2 blowup_suspected, 3 under_resolved,
1 error (including max_steps and bad configuration).
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Mapping, Sequence

from . import __version__
from .config import ConfigError, RunConfig, parse_config, preset_names
from .initial import InitialSpecError
from .integrator import IntegrationError
from .runner import execute
from .service.schemas import RunResponse

CSV_HEADER = "t,linf_p,linf_dxp,h0,h1,h2,a0,a1,energy_E,energy_F,energy_G,tail_fraction,dt"

#: run flags that map 1:1 onto config keys (dest name == key).
_VALUE_FLAGS = (
    ("--model", str, "model kind: general, alpha0, alpha1, alpha2, full_system"),
    ("--alpha", float, "nonlocality order in [0, 2]"),
    ("--beta", float, "drift coefficient (> -1)"),
    ("--epsilon", float, "scale separation parameter (> 0)"),
    ("--n-modes", int, "number of spatial nodes (even, >= 8)"),
    ("--t-final", float, "integration end time"),
    ("--rtol", float, "relative step tolerance"),
    ("--atol", float, "absolute step tolerance"),
    ("--dt-init", float, "initial step size"),
    ("--dt-max", float, "step size ceiling"),
    ("--initial", str, 'initial datum, e.g. "sine:-2,4" or "chirp:-6,4"'),
    ("--preset", str, f"bundled scenario: {', '.join(preset_names())}"),
    ("--output-every", float, "diagnostics/snapshot cadence in time units"),
    ("--output-dir", str, "directory for output files"),
    ("--seed", int, "seed echoed into run.json (randomized tooling)"),
)


def _fmt(x: float) -> str:
    return "%.17g" % x


def write_outputs(response: RunResponse, output_dir: str | Path) -> Path:
    """Write timeseries.csv, per-instant snapshots, and run.json."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)

    lines = [CSV_HEADER]
    for r in response.timeseries:
        lines.append(
            ",".join(
                _fmt(v)
                for v in (
                    r.t,
                    r.linf_p,
                    r.linf_dxp,
                    r.h0,
                    r.h1,
                    r.h2,
                    r.a0,
                    r.a1,
                    r.energy_E,
                    r.energy_F,
                    r.energy_G,
                    r.tail_fraction,
                    r.dt,
                )
            )
        )
    (out / "timeseries.csv").write_text("\n".join(lines) + "\n")

    for snap in response.snapshots:
        rows = ["x,p"]
        rows.extend(f"{_fmt(x)},{_fmt(p)}" for x, p in zip(snap.x, snap.p))
        (out / f"snapshot_{snap.t:.6f}.csv").write_text("\n".join(rows) + "\n")

    meta = {
        "config": response.config,
        "termination": response.termination.model_dump(),
        "exit_code": response.exit_code,
        "wall_time_s": response.wall_time_s,
        "version": response.version,
    }
    (out / "run.json").write_text(json.dumps(meta, indent=2) + "\n")
    return out


def _collect_flags(args: argparse.Namespace) -> dict[str, Any]:
    flags: dict[str, Any] = {}
    for opt, _type, _help in _VALUE_FLAGS:
        key = opt.lstrip("-").replace("-", "_")
        value = getattr(args, key)
        if value is not None:
            flags[key] = value
    if args.no_dealias:
        flags["dealias"] = False
    return flags


def _run_local(config: RunConfig) -> RunResponse:
    result = execute(config)
    return RunResponse.from_result(result, __version__)


def _run_remote(config: RunConfig, server: str) -> RunResponse:
    import httpx

    payload = {
        k: v
        for k, v in config.to_dict().items()
        if k != "output_dir" and v is not None
    }
    resp = httpx.post(f"{server.rstrip('/')}/runs", json=payload, timeout=None)
    if resp.status_code != 200:
        raise RuntimeError(f"server returned {resp.status_code}: {resp.text}")
    return RunResponse.model_validate(resp.json())


def _execute_and_write(
    config_path: str | None, flags: Mapping[str, Any], server: str | None
) -> int:
    config = parse_config(config_path, flags)
    response = _run_remote(config, server) if server else _run_local(config)
    out = write_outputs(response, config.output_dir)
    term = response.termination
    last = response.timeseries[-1]
    print(
        f"{term.status} at t={_fmt(term.time)} "
        f"({term.n_accepted} steps, {term.n_rejected} rejected)"
    )
    if term.message:
        print(term.message)
    print(f"final |p|_inf={last.linf_p:.6g}  |dx p|_inf={last.linf_dxp:.6g}")
    print(
        f"wrote {len(response.timeseries)} rows, "
        f"{len(response.snapshots)} snapshots -> {out}"
    )
    return response.exit_code


def _sweep_worker(job: tuple[str | None, dict[str, Any]]) -> int:
    config_path, flags = job
    return _execute_and_write(config_path, flags, None)


def _parse_sweep_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text  # bare strings (e.g. model names)


def _cmd_run(args: argparse.Namespace) -> int:
    return _execute_and_write(args.config, _collect_flags(args), args.server)


def _cmd_sweep(args: argparse.Namespace) -> int:
    base_flags = _collect_flags(args)
    values = [_parse_sweep_value(v) for v in args.values.split(",") if v]
    if not values:
        raise ConfigError("sweep needs at least one value")
    base_out = Path(base_flags.pop("output_dir", "nlburgers-sweep"))

    jobs = []
    for value in values:
        flags = dict(base_flags)
        flags[args.param] = value
        flags["output_dir"] = str(base_out / f"{args.param}={value}")
        # Validate up front so a typo fails before any worker starts.
        parse_config(args.config, flags)
        jobs.append((args.config, flags))

    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            codes = list(pool.map(_sweep_worker, jobs))
    else:
        codes = [_sweep_worker(job) for job in jobs]

    for value, code in zip(values, codes):
        print(f"{args.param}={value}: exit {code}")
    return max(codes, default=0)


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    for opt, typ, help_text in _VALUE_FLAGS:
        parser.add_argument(opt, type=typ, default=None, help=help_text)
    parser.add_argument(
        "--no-dealias",
        action="store_true",
        help="disable the 2/3-rule filter around quadratic products",
    )
    parser.add_argument(
        "--config", default=None, metavar="PATH", help="JSON config file"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlburgers",
        description="Pseudo-spectral solver for a nonlocal Burgers equation "
        "with diffusive and dispersive terms.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one simulation and write outputs")
    _add_run_flags(run)
    run.add_argument(
        "--server",
        default=None,
        metavar="URL",
        help="execute on a service instance instead of in-process",
    )
    run.set_defaults(handler=_cmd_run)

    sweep = sub.add_parser(
        "sweep", help="run one config over several values of a single key"
    )
    _add_run_flags(sweep)
    sweep.add_argument("--param", required=True, help="config key to vary")
    sweep.add_argument(
        "--values", required=True, help="comma-separated values for --param"
    )
    sweep.add_argument(
        "--workers", type=int, default=1, help="parallel worker processes"
    )
    sweep.set_defaults(handler=_cmd_sweep)

    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(handler=_cmd_serve)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ConfigError, InitialSpecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except IntegrationError as exc:
        print(f"error: integration aborted: {exc}", file=sys.stderr)
        return 1
    except (RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
