"""Command-line client for the test pipeline.

Subcommands mirror the service endpoints one to one; by default they run
the service handlers in process, and with ``--server URL`` they post the
same request to a running instance instead.  Either way the files
written under ``--out`` are byte-identical for a given config and seed.

Exit codes: 0 the command ran (and, for tests, the null hypothesis was
accepted), 2 a test ran and rejected the null hypothesis, 1 an error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, ExperimentConfig, load_config, resolve_data_path
from .reporting import read_series_csv, write_csv, write_json, write_series_csv
from .service import handlers
from .service import schemas as sm

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_REJECTED = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="synindep",
        description="Finite-sample independence tests for synchronously driven linear systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = {
        "simulate": "generate system data from a config and write one CSV per system",
        "test-iid": "run the known-parameter independence test on data files",
        "test-robust": "run the unknown-parameter test over confidence regions",
        "sps-region": "export the per-system parameter confidence regions",
        "power-curve": "estimate rejection rates along a config sweep",
        "selftest": "run the built-in hand-value checks",
    }
    for name, help_text in specs.items():
        cmd = sub.add_parser(name, help=help_text)
        if name != "selftest":
            cmd.add_argument("--config", required=True, help="path to the JSON config")
        cmd.add_argument("--out", default=".", help="output directory (created if missing)")
        cmd.add_argument("--seed", type=int, default=None, help="master seed override")
        cmd.add_argument(
            "--threads", type=int, default=1, help="worker count; affects speed only"
        )
        cmd.add_argument("--server", default=None, help="base URL of a running service")
    return parser


def _call(args, path: str, request, response_model, handler):
    if args.server:
        import httpx

        url = args.server.rstrip("/") + path
        payload = None if request is None else request.model_dump(mode="json")
        reply = httpx.post(url, json=payload, timeout=None)
        if reply.status_code >= 400:
            raise RuntimeError(f"{url} returned {reply.status_code}: {reply.text}")
        return response_model.model_validate(reply.json())
    if request is None:
        return handler(threads=args.threads)
    return handler(request, threads=args.threads)


def _load(args) -> tuple[ExperimentConfig, int]:
    cfg = load_config(args.config)
    seed = cfg.seed if args.seed is None else args.seed
    return cfg, seed


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _read_data(args, cfg: ExperimentConfig) -> sm.TwoSystemData:
    cfg.require("data")
    u, y = read_series_csv(resolve_data_path(args.config, cfg.data.y))
    v, z = read_series_csv(resolve_data_path(args.config, cfg.data.z))
    return sm.TwoSystemData(
        y=sm.SeriesPairModel(input=u.tolist(), output=y.tolist()),
        z=sm.SeriesPairModel(input=v.tolist(), output=z.tolist()),
    )


def _cmd_simulate(args) -> int:
    cfg, seed = _load(args)
    cfg.require("generator", "n")
    req = sm.SimulateRequest(
        systems=cfg.systems, generator=cfg.generator, input=cfg.input, n=cfg.n, seed=seed
    )
    resp = _call(args, "/simulate", req, sm.SimulateResponse, handlers.handle_simulate)
    out = _out_dir(args)
    write_series_csv(out / "system_y.csv", resp.y.input, resp.y.output)
    write_series_csv(out / "system_z.csv", resp.z.input, resp.z.output)
    print(f"wrote {out / 'system_y.csv'} and {out / 'system_z.csv'} (n={cfg.n}, seed={seed})")
    return EXIT_OK


def _cmd_test_iid(args) -> int:
    cfg, seed = _load(args)
    req = sm.IidTestRequest(
        systems=cfg.systems,
        data=_read_data(args, cfg),
        estimator=cfg.test.estimator,
        rank=cfg.test.rank,
        seed=seed,
    )
    resp = _call(args, "/test/iid", req, sm.TestResponse, handlers.handle_test_iid)
    out = _out_dir(args)
    write_json(out / "report.json", resp.report)
    rep = resp.report
    verdict = "reject" if resp.reject else "accept"
    print(
        f"{verdict}: rank {rep['rank']} of m={rep['m']} (threshold r={rep['r']}, "
        f"level {rep['alpha']:.4g}); report at {out / 'report.json'}"
    )
    return EXIT_REJECTED if resp.reject else EXIT_OK


def _field_rows(report: dict) -> list[tuple] | None:
    rf = report["rank_field"]
    if len(rf["theta_axes"]) != 1 or len(rf["gamma_axes"]) != 1:
        return None
    t_axis, g_axis = rf["theta_axes"][0], rf["gamma_axes"][0]
    rows = []
    for i, rank_row in enumerate(rf["ranks"]):
        for j, rank in enumerate(rank_row):
            if rank is not None:
                rows.append((t_axis[i], g_axis[j], rank, rf["ref_values"][i][j]))
    return rows


def _cmd_test_robust(args) -> int:
    cfg, seed = _load(args)
    req = sm.RobustTestRequest(
        systems=cfg.systems,
        data=_read_data(args, cfg),
        estimator=cfg.test.estimator,
        robust=cfg.test.robust,
        seed=seed,
    )
    resp = _call(args, "/test/robust", req, sm.TestResponse, handlers.handle_test_robust)
    out = _out_dir(args)
    write_json(out / "report.json", resp.report)
    rows = _field_rows(resp.report)
    if rows is not None:
        write_csv(out / "rank_field.csv", ["theta", "gamma", "rank", "ref_value"], rows)
    rep = resp.report
    decision = rep["decision"]
    verdict = "reject" if resp.reject else "accept"
    note = " (vacuous region)" if decision["vacuous"] else ""
    print(
        f"{verdict}{note}: max rank {decision['max_rank']} vs threshold r={rep['r']} "
        f"(certified level {rep['certified_level']:.4g}); report at {out / 'report.json'}"
    )
    return EXIT_REJECTED if resp.reject else EXIT_OK


def _cmd_sps_region(args) -> int:
    cfg, seed = _load(args)
    data = _read_data(args, cfg)
    out = _out_dir(args)
    for name, series, structure, grid in (
        ("y", data.y, cfg.systems.y.structure, cfg.test.robust.grid_y),
        ("z", data.z, cfg.systems.z.structure, cfg.test.robust.grid_z),
    ):
        req = sm.SpsRegionRequest(
            structure=structure,
            data=series,
            grid=grid,
            sps=cfg.test.robust.sps,
            system=name,
            seed=seed,
        )
        resp = _call(args, "/sps/region", req, sm.SpsRegionResponse, handlers.handle_sps_region)
        write_json(out / f"sps_region_{name}.json", resp.region)
        mask = resp.region["mask"]
        accepted = sum(_count_true(mask))
        print(f"system {name}: {accepted} accepted grid points -> {out / f'sps_region_{name}.json'}")
    return EXIT_OK


def _count_true(mask) -> list[int]:
    if isinstance(mask, list):
        out: list[int] = []
        for item in mask:
            out.extend(_count_true(item))
        return out
    return [int(bool(mask))]


def _cmd_power_curve(args) -> int:
    cfg, seed = _load(args)
    cfg.require("generator", "n", "monte_carlo")
    req = sm.PowerCurveRequest(
        systems=cfg.systems,
        generator=cfg.generator,
        input=cfg.input,
        n=cfg.n,
        test=cfg.test,
        monte_carlo=cfg.monte_carlo,
        seed=seed,
    )
    resp = _call(args, "/power-curve", req, sm.PowerCurveResponse, handlers.handle_power_curve)
    out = _out_dir(args)
    curve = resp.curve
    rows = [
        (v, p, h, curve["trials"], curve["seed"])
        for v, p, h in zip(curve["sweep"], curve["power"], curve["ci_halfwidth"])
    ]
    write_csv(out / "power_curve.csv", ["sweep", "power", "ci_halfwidth", "trials", "seed"], rows)
    write_json(out / "power_curve.json", curve)
    print(
        f"power curve over {curve['sweep_variable']} x {len(rows)} values, "
        f"{curve['trials']} trials each -> {out / 'power_curve.csv'}"
    )
    return EXIT_OK


def _cmd_selftest(args) -> int:
    resp = _call(args, "/selftest", None, sm.SelftestResponse, handlers.handle_selftest)
    for chk in resp.checks:
        mark = "ok  " if chk["passed"] else "FAIL"
        print(f"{mark} {chk['name']}: {chk['detail']}")
    print("selftest " + ("passed" if resp.passed else "FAILED"))
    return EXIT_OK if resp.passed else EXIT_ERROR


_COMMANDS = {
    "simulate": _cmd_simulate,
    "test-iid": _cmd_test_iid,
    "test-robust": _cmd_test_robust,
    "sps-region": _cmd_sps_region,
    "power-curve": _cmd_power_curve,
    "selftest": _cmd_selftest,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
