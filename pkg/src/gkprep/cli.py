"""Command-line front end: rate/mc/figure/sweep subcommands.

Scalars go to stdout as JSON (sorted keys, full-precision floats); sweeps
and figure recipes write CSV files with the schema
``param...,value,std_err,status`` at 17 significant digits.  Exit codes:
0 success, 2 usage or validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .analysis import (
    AmbiguousCrossingError,
    CrossingQuery,
    CurveTable,
    SweepSpec,
    critical_ancilla_spread,
    optimal_bias,
    run_sweep,
)
from .distributions import (
    NoiseParams,
    pauli_rate_ideal,
    pauli_rate_physical_report,
)
from .lattice import TruncationError
from .montecarlo import Mode, ShotConfig, run_tally
from .repetition import (
    QuadratureConfig,
    QuadratureError,
    failure_rate,
    failure_rate_no_gkp_ec,
    overall_failure_biased,
)
from .wigner import GkpEnvelope, GridSpec, grid_to_binary, grid_to_csv, wigner_physical_zero

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

NUMERICAL_ERRORS = (QuadratureError, TruncationError, AmbiguousCrossingError)


def _emit_json(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, sort_keys=True)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _single_row_csv(params: dict[str, float], value: float, path: str) -> None:
    columns = list(params) + ["value", "std_err", "status"]
    rows = (tuple(params.values()) + (value, "", "ok"),)
    CurveTable(columns=tuple(columns), rows=rows).to_csv(path)


def _quadrature_config(args) -> QuadratureConfig:
    return QuadratureConfig(
        nodes_per_dim=args.nodes, method=args.method, window_neighbors=args.neighbors
    )


def cmd_rate(args) -> int:
    cfg = _quadrature_config(args)
    quantity = args.quantity
    payload: dict = {"quantity": quantity, "delta": args.delta}
    if quantity == "px":
        value = pauli_rate_ideal(args.delta)
    elif quantity == "pf":
        report = pauli_rate_physical_report(NoiseParams(args.delta, args.delta_tilde))
        value = report["value"]
        payload.update(
            delta_tilde=args.delta_tilde,
            two_cell=report["two_cell"],
            two_cell_difference=report["difference"],
        )
    elif quantity in ("pfrep", "pfrep-noec"):
        if args.n is None:
            raise ValueError(f"--n is required for {quantity}")
        params = NoiseParams(args.delta, args.delta_tilde)
        fn = failure_rate if quantity == "pfrep" else failure_rate_no_gkp_ec
        breakdown = fn(args.n, params, cfg)
        value = breakdown.total
        payload.update(
            n=args.n,
            delta_tilde=args.delta_tilde,
            breakdown={label: v for label, v in breakdown.per_case},
        )
    elif quantity == "pfail":
        if args.n is None:
            raise ValueError("--n is required for pfail")
        params = NoiseParams(args.delta, args.delta_tilde, r=args.r)
        value = overall_failure_biased(args.n, params, cfg)
        payload.update(n=args.n, delta_tilde=args.delta_tilde, r=args.r)
    else:
        raise ValueError(f"unknown quantity {quantity!r}")
    payload["value"] = value

    if args.out:
        params_out = {k: payload[k] for k in ("delta", "delta_tilde", "n", "r") if k in payload}
        _single_row_csv(params_out, value, args.out)
    _emit_json(payload, None)
    return EXIT_OK


def cmd_mc(args) -> int:
    workers = args.workers
    cap = os.environ.get("GKPREP_MAX_WORKERS")
    if cap is not None:
        workers = min(workers, max(int(cap), 1))
    params = NoiseParams(args.delta, args.delta_tilde, r=args.r)
    cfg = ShotConfig(
        n=args.n,
        params=params,
        shots=args.shots,
        seed=args.seed,
        mode=Mode.BIASED_FULL if args.mode == "biased" else Mode.POSITION_ONLY,
        gkp_ec=not args.no_gkp_ec,
    )
    trace_fh = open(args.trace, "w") if args.trace else None

    def trace(first_shot: int, out: dict) -> None:
        n_rows = len(out["failed"])
        for i in range(n_rows):
            record = {
                "shot": first_shot + i,
                "u": out["u"][i].tolist(),
                "u_resid": out["u_resid"][i].tolist(),
                "alpha": out["alpha"][i].tolist(),
                "syndromes": ["PZ" if b else "NPZ" for b in out["syndromes"][i]],
                "true_pattern": [int(b) for b in out["true_pattern"][i]],
                "inferred_pattern": [int(b) for b in out["inferred_pattern"][i]],
                "position_failed": bool(out["position_failed"][i]),
                "momentum_failed": bool(out["momentum_failed"][i]),
            }
            trace_fh.write(json.dumps(record, sort_keys=True) + "\n")

    try:
        tally = run_tally(cfg, partitions=workers, trace=trace if trace_fh else None)
    finally:
        if trace_fh:
            trace_fh.close()

    payload = {
        "rate": tally.rate,
        "std_err": tally.std_err,
        "failures": tally.failures,
        "shots": tally.shots,
        "seed": args.seed,
        "breakdown": tally.breakdown,
    }
    _emit_json(payload, args.out)
    return EXIT_OK


def _sweep_to_files(spec: SweepSpec, path: str, cfg: QuadratureConfig) -> None:
    run_sweep(spec, cfg).to_csv(path)


def cmd_figure(args) -> int:
    outdir = args.outdir
    os.makedirs(outdir, exist_ok=True)
    cfg = QuadratureConfig()
    fig = args.id

    def path(name: str) -> str:
        return os.path.join(outdir, name)

    if fig == "fig1":
        delta = 0.25
        for tag, r in (("r1", 1.0), ("rsqrt2", math.sqrt(2.0))):
            env = GkpEnvelope(delta=r * delta, kappa=delta / r)
            span = 2.0 * math.sqrt(math.pi)
            spec = GridSpec((-span, span), (-span, span), 129, 129)
            grid = wigner_physical_zero(env, spec)
            grid_to_csv(grid, path(f"fig1_{tag}.csv"))
            grid_to_binary(grid, path(f"fig1_{tag}.bin"))
    elif fig == "fig4":
        deltas = tuple(np.linspace(0.1, 1.0, 50))
        spec = SweepSpec("px", (("delta", deltas),))
        _sweep_to_files(spec, path("fig4_px.csv"), cfg)
    elif fig == "fig5":
        dts = tuple(np.linspace(0.02, 0.6, 40))
        for delta in (0.3, 0.4, 0.5, 0.6):
            spec = SweepSpec("pf", (("delta_tilde", dts),), {"delta": delta})
            _sweep_to_files(spec, path(f"fig5_delta{delta}.csv"), cfg)
    elif fig == "fig6":
        dts = tuple(np.linspace(0.02, 0.5, 60))
        _sweep_to_files(
            SweepSpec("pf", (("delta_tilde", dts),), {"delta": 0.5}),
            path("fig6_pf.csv"), cfg,
        )
        _sweep_to_files(
            SweepSpec("pfrep", (("delta_tilde", dts),), {"delta": 0.5, "n": 3}),
            path("fig6_p3rep.csv"), cfg,
        )
    elif fig == "fig8":
        dts = tuple(np.linspace(0.02, 0.5, 60))
        for n in (3, 5, 7, 9):
            spec = SweepSpec("pfrep", (("delta_tilde", dts),), {"delta": 0.5, "n": n})
            _sweep_to_files(spec, path(f"fig8_n{n}.csv"), cfg)
    elif fig == "fig9":
        deltas = (0.3, 0.4, 0.5, 0.6)
        for n, m in ((5, 3), (7, 5), (9, 7)):
            spec = SweepSpec("delta_nm", (("delta", deltas),), {"n": n, "m": m})
            _sweep_to_files(spec, path(f"fig9_{n}{m}.csv"), cfg)
    elif fig == "fig10":
        dts = tuple(np.linspace(0.02, 0.5, 30))
        for n in (3, 5, 7, 9):
            _sweep_to_files(
                SweepSpec("pfrep", (("delta_tilde", dts),), {"delta": 0.5, "n": n}),
                path(f"fig10_ec_n{n}.csv"), cfg,
            )
            _sweep_to_files(
                SweepSpec("pfrep_noec", (("delta_tilde", dts),), {"delta": 0.5, "n": n}),
                path(f"fig10_noec_n{n}.csv"), cfg,
            )
    elif fig == "fig11":
        rs = tuple(np.linspace(1.0, 5.0, 40))
        for n in (3, 5, 7, 9):
            spec = SweepSpec(
                "pfail", (("r", rs),), {"delta": 0.5, "delta_tilde": 0.0, "n": n}
            )
            _sweep_to_files(spec, path(f"fig11_n{n}.csv"), cfg)
    else:
        raise ValueError(f"unknown figure id {fig!r}")
    return EXIT_OK


_RUNFILE_KEYS = {"schema_version", "sweep", "mc", "crossing", "optimal_bias", "engine"}


def _load_runfile(path: str) -> dict:
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ValueError("run file must be a JSON object")
    unknown = set(doc) - _RUNFILE_KEYS
    if unknown:
        raise ValueError(f"unknown run-file fields: {sorted(unknown)}")
    if doc.get("schema_version") != 1:
        raise ValueError("run file must declare schema_version = 1")
    kinds = [k for k in ("sweep", "mc", "crossing", "optimal_bias") if k in doc]
    if len(kinds) != 1:
        raise ValueError("run file must contain exactly one of sweep/mc/crossing/optimal_bias")
    return doc


def cmd_sweep(args) -> int:
    doc = _load_runfile(args.spec)
    engine = doc.get("engine", {})
    cfg = QuadratureConfig(**engine) if engine else QuadratureConfig()

    if "sweep" in doc:
        body = dict(doc["sweep"])
        output = body.pop("output", None) or args.out
        if output is None:
            raise ValueError("sweep requires an output path")
        spec = SweepSpec(
            quantity=body.pop("quantity"),
            axes=tuple((name, tuple(values)) for name, values in body.pop("axes")),
            fixed=body.pop("fixed", {}),
        )
        if body:
            raise ValueError(f"unknown sweep fields: {sorted(body)}")
        run_sweep(spec, cfg).to_csv(output)
        return EXIT_OK
    if "mc" in doc:
        body = dict(doc["mc"])
        output = body.pop("output", None) or args.out
        params = NoiseParams(
            body.pop("delta"),
            body.pop("delta_tilde", 0.0),
            r=body.pop("r", 1.0),
        )
        cfg_mc = ShotConfig(
            n=body.pop("n"),
            params=params,
            shots=body.pop("shots"),
            seed=body.pop("seed", 0),
            mode=Mode.BIASED_FULL if body.pop("mode", "position") == "biased" else Mode.POSITION_ONLY,
            gkp_ec=body.pop("gkp_ec", True),
        )
        if body:
            raise ValueError(f"unknown mc fields: {sorted(body)}")
        tally = run_tally(cfg_mc)
        _emit_json(
            {
                "rate": tally.rate,
                "std_err": tally.std_err,
                "failures": tally.failures,
                "shots": tally.shots,
                "breakdown": tally.breakdown,
            },
            output,
        )
        return EXIT_OK
    if "crossing" in doc:
        body = dict(doc["crossing"])
        output = body.pop("output", None) or args.out
        query = CrossingQuery(
            delta=body.pop("delta"),
            left_size=body.pop("left_size"),
            right_size=body.pop("right_size"),
            bracket=tuple(body.pop("bracket", (0.05, 0.6))),
            tol=body.pop("tol", 1e-4),
        )
        if body:
            raise ValueError(f"unknown crossing fields: {sorted(body)}")
        result = critical_ancilla_spread(query, cfg)
        _emit_json({"status": result.status, "value": result.value}, output)
        return EXIT_OK
    body = dict(doc["optimal_bias"])
    output = body.pop("output", None) or args.out
    opt = optimal_bias(
        body.pop("n"),
        body.pop("delta"),
        body.pop("delta_tilde", 0.0),
        tuple(body.pop("r_bracket", (1.0, 6.0))),
        cfg,
    )
    if body:
        raise ValueError(f"unknown optimal_bias fields: {sorted(body)}")
    _emit_json(
        {
            "r_opt": opt.r_opt,
            "p_min": opt.p_min,
            "unimodal": opt.unimodal,
            "interior": opt.interior,
        },
        output,
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gkprep",
        description="Logical error rates of GKP repetition codes under biased noise",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    rate = sub.add_parser("rate", help="analytic rates by quadrature")
    rate.add_argument(
        "--quantity",
        required=True,
        choices=["px", "pf", "pfrep", "pfrep-noec", "pfail"],
    )
    rate.add_argument("--n", type=int)
    rate.add_argument("--delta", type=float, required=True)
    rate.add_argument("--delta-tilde", type=float, default=0.0, dest="delta_tilde")
    rate.add_argument("--r", type=float, default=1.0)
    rate.add_argument("--method", choices=["factorized", "tensor"], default="factorized")
    rate.add_argument("--nodes", type=int, default=64)
    rate.add_argument("--neighbors", type=int, default=0)
    rate.add_argument("--out")
    rate.set_defaults(func=cmd_rate)

    mc = sub.add_parser("mc", help="Monte Carlo of the EC circuit")
    mc.add_argument("--n", type=int, required=True)
    mc.add_argument("--delta", type=float, required=True)
    mc.add_argument("--delta-tilde", type=float, default=0.0, dest="delta_tilde")
    mc.add_argument("--r", type=float, default=1.0)
    mc.add_argument("--shots", type=int, required=True)
    mc.add_argument("--seed", type=int, default=0)
    mc.add_argument("--mode", choices=["position", "biased"], default="position")
    mc.add_argument("--no-gkp-ec", action="store_true")
    mc.add_argument("--workers", type=int, default=1)
    mc.add_argument("--out")
    mc.add_argument("--trace")
    mc.set_defaults(func=cmd_mc)

    figure = sub.add_parser("figure", help="canned sweep recipes")
    figure.add_argument(
        "--id",
        required=True,
        choices=["fig1", "fig4", "fig5", "fig6", "fig8", "fig9", "fig10", "fig11"],
    )
    figure.add_argument("--outdir", required=True)
    figure.set_defaults(func=cmd_figure)

    sweep = sub.add_parser("sweep", help="run a declarative run file")
    sweep.add_argument("--spec", required=True)
    sweep.add_argument("--out")
    sweep.set_defaults(func=cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
