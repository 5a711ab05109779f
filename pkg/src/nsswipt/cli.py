"""
Command-line client.

By default requests are handled in-process; with ``--server URL`` the same
request models are posted to a running service instead. Exit codes: 0 on
success, 1 when a solve is infeasible or the solver fails, 2 on usage or
configuration errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ConfigurationError
from .service import handlers, schemas

EXIT_OK, EXIT_INFEASIBLE, EXIT_USAGE = 0, 1, 2


class _Remote:
    """Posts request models to a running service."""

    def __init__(self, url: str):
        import httpx

        self.client = httpx.Client(base_url=url.rstrip("/"), timeout=None)

    def _call(self, method, path, model, body=None):
        r = self.client.request(method, path,
                                json=None if body is None else body.model_dump())
        if r.status_code in (404, 422):
            detail = r.json().get("detail")
            raise ConfigurationError(detail if isinstance(detail, str) else str(detail))
        r.raise_for_status()
        data = r.json()
        return [model(**d) for d in data] if isinstance(data, list) else model(**data)

    def list_scenarios(self):
        return self._call("GET", "/scenarios", schemas.ScenarioInfo)

    def run_scenario(self, req):
        return self._call("POST", "/scenarios/run", schemas.ScenarioRunResponse, req)

    def solve_one(self, req):
        return self._call("POST", "/solve", schemas.SolveResponse, req)

    def complexity(self, req):
        return self._call("POST", "/complexity", schemas.ComplexityResponse, req)


def _common(p: argparse.ArgumentParser, suppress: bool):
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--seed", type=int, default=d, help="base seed for all randomness")
    p.add_argument("--trials", type=int, default=d, help="Monte Carlo trials per cell")
    p.add_argument("--out", default=d, help="write output here instead of stdout")
    p.add_argument("--format", choices=("csv", "plotdata"), default=d)
    p.add_argument("--tol", type=float, default=d, help="SDP tolerance")
    p.add_argument("--server", default=d, help="service URL; in-process when omitted")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nsswipt", description=__doc__.strip().splitlines()[0])
    _common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("list-scenarios", help="show built-in scenarios")
    _common(p, True)

    p = sub.add_parser("run-scenario", help="run a named scenario or a scenario file")
    p.add_argument("scenario", help="built-in name or path to a scenario INI file")
    p.add_argument("--dB", action="store_true", help="report watt metrics in dBm")
    p.add_argument("--workers", type=int, default=None)
    _common(p, True)

    p = sub.add_parser("solve", help="one channel draw, one method")
    p.add_argument("--config", help="system INI file; defaults when omitted")
    p.add_argument("--method", default="alg1",
                   choices=("alg1", "p24", "p22", "alg2", "benchmark", "benchmark_no_v"))
    p.add_argument("--waveform", choices=("gaussian", "dsw"), default=None)
    _common(p, True)

    p = sub.add_parser("complexity-table", help="operation counts and reductions")
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--KI", type=int, required=True)
    p.add_argument("--KE", type=int, required=True)
    p.add_argument("--rI", type=int, default=None)
    p.add_argument("--rE", type=int, default=None)
    _common(p, True)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    return parser


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _solve_text(resp: schemas.SolveResponse) -> str:
    lines = [resp.record.rstrip("\n")]
    if resp.feasible:
        lines.append(f"eval total_power {resp.total_power!r}")
        lines.append(f"eval worst_capacity {resp.worst_capacity!r}")
        lines.append("eval capacity " + " ".join(repr(c) for c in resp.capacity))
        lines.append(f"eval total_rf_power {resp.total_rf_power!r}")
        if resp.total_dc_power is not None:
            lines.append(f"eval total_dc_power {resp.total_dc_power!r}")
    return "\n".join(lines) + "\n"


def _dispatch(args, api) -> int:
    if args.command == "list-scenarios":
        lines = [f"{s.name}\t{s.description}" for s in api.list_scenarios()]
        _emit("\n".join(lines) + "\n", args.out)
        return EXIT_OK

    if args.command == "run-scenario":
        path = Path(args.scenario)
        req = schemas.ScenarioRunRequest(
            seed=args.seed, trials=args.trials, format=args.format or "csv", to_dB=args.dB,
            workers=args.workers,
            **({"scenario_file": path.read_text(encoding="utf-8")} if path.is_file()
               else {"name": args.scenario}))
        _emit(api.run_scenario(req).content, args.out)
        return EXIT_OK

    if args.command == "solve":
        text = None
        if args.config:
            try:
                text = Path(args.config).read_text(encoding="utf-8")
            except OSError as exc:
                raise ConfigurationError(f"cannot read config: {exc}") from exc
        resp = api.solve_one(schemas.SolveRequest(config=text, method=args.method,
                                                  seed=args.seed, tol=args.tol,
                                                  waveform=args.waveform))
        _emit(_solve_text(resp), args.out)
        if not resp.feasible:
            print(f"infeasible: {resp.reason}", file=sys.stderr)
            return EXIT_INFEASIBLE
        return EXIT_OK

    if args.command == "complexity-table":
        resp = api.complexity(schemas.ComplexityRequest(M=args.M, K_I=args.KI, K_E=args.KE,
                                                        r_I=args.rI, r_E=args.rE))
        _emit(resp.csv, args.out)
        return EXIT_OK

    if args.command == "serve":
        import uvicorn

        uvicorn.run("nsswipt.service.app:app", host=args.host, port=args.port)
        return EXIT_OK
    return EXIT_USAGE


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    api = _Remote(args.server) if args.server else handlers
    try:
        return _dispatch(args, api)
    except (ConfigurationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
