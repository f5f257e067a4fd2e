"""Command-line entry point.

Exit codes: 0 success, 1 configuration or usage error, 2 runtime error.
Diagnostics go to stderr; results go to files under the config's output dir.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (SteadyStateInputs, kronecker_neglect_gap, mean_square_step_bound, mean_step_bound,
                       mode_convergence_factors, non_contracting_modes, steady_state_msd,
                       taylor_validity_warning, weighted_operator)
from .complexity import complexity_report
from .config import config_to_dict, load_config
from .errors import ConfigError, DegenerateOperatorError, GSPError, InstabilityError
from .noise import BernoulliGaussian, Gaussian
from .results import write_curve_csv, write_json, write_prediction_csv

log = logging.getLogger("gsphqc")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _scenario_info(sc) -> dict:
    return {"node_count": sc.basis.node_count, "freq_set": list(sc.basis.freq_set),
            "sampling_indices": list(sc.ds.indices)}


def _out_dir(cfg) -> Path:
    d = cfg.output_path
    d.mkdir(parents=True, exist_ok=True)
    return d


def cmd_run(args) -> int:
    from .experiments import build_scenario, curve_summary, run_trials

    cfg = load_config(args.config)
    sc = build_scenario(cfg)
    curves = run_trials(cfg, sc, workers=args.workers)
    out = _out_dir(cfg)
    summary = {"config": config_to_dict(cfg), "scenario": _scenario_info(sc), "algorithms": {}}
    for name, curve in curves.items():
        write_curve_csv(out / f"curve_{name}.csv", curve)
        summary["algorithms"][name] = curve_summary(curve)
        log.info("%s: steady state %.3f dB", name, summary["algorithms"][name]["steady_state_db"])
    write_json(out / "summary.json", summary)
    return EXIT_OK


def cmd_sweep(args) -> int:
    from .experiments import build_scenario, parameter_sweep

    cfg = load_config(args.config)
    if cfg.sweep is None:
        raise ConfigError("sweep needs a 'sweep' block")
    sc = build_scenario(cfg)
    points = parameter_sweep(cfg, scenario=sc, workers=args.workers)
    out = _out_dir(cfg)
    rows = [{"tau": p.tau, "mu": p.mu, "steady_state_linear": p.steady_state_linear,
             "steady_state_db": p.steady_state_db, "unstable": p.unstable,
             "crossing_iteration": p.crossing, "reason": p.reason} for p in points]
    with open(out / "sweep.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("tau,mu,steady_state_db,steady_state_linear,unstable,crossing_iteration\n")
        for r in rows:
            cells = [r["tau"], r["mu"], r["steady_state_db"], r["steady_state_linear"]]
            fh.write(",".join("" if c is None else repr(float(c)) for c in cells)
                     + f",{int(r['unstable'])},{'' if r['crossing_iteration'] is None else r['crossing_iteration']}\n")
    write_json(out / "sweep.json", {"algorithm": cfg.sweep.algorithm, "points": rows})
    for r in rows:
        if r["unstable"]:
            log.warning("tau=%s mu=%s flagged unstable: %s", r["tau"], r["mu"], r["reason"])
    return EXIT_OK


def _analyze_algorithm(sc, spec, noise) -> dict:
    rep = {"kind": spec.kind, "mu": spec.mu, "warnings": []}
    op = weighted_operator(sc.basis, sc.ds)
    if spec.kind == "NLMS":
        rep["warnings"].append("NLMS is normalised; bounds below are for the unnormalised operator")
    try:
        mb, msb = mean_step_bound(op), mean_square_step_bound(op)
    except DegenerateOperatorError as exc:
        rep["warnings"].append(str(exc))
        return rep
    factors = mode_convergence_factors(op, spec.mu)
    rep.update({
        "lambda_max": op.lambda_max,
        "operator_eigenvalues": op.eigenvalues,
        "mean_step_bound": mb,
        "mean_square_step_bound": msb,
        "mode_factors": factors,
        "non_contracting_modes": int(np.sum(non_contracting_modes(factors))),
        "kronecker_gap": kronecker_neglect_gap(op, spec.mu),
        "instability_warning": bool(spec.mu >= msb),
    })
    if spec.mu >= msb:
        rep["warnings"].append(f"mu={spec.mu:g} >= mean-square step bound {msb:.6g}")
    if spec.mu >= mb:
        rep["warnings"].append(f"mu={spec.mu:g} >= mean step bound {mb:.6g}: mean error diverges")
    tau = {"HQC": spec.tau, "LMS": 0.0}.get(spec.kind)
    if tau is None or not isinstance(noise, (BernoulliGaussian, Gaussian)):
        rep["msd_prediction"] = None
        rep["msd_prediction_note"] = "closed form available for HQC and LMS under Gaussian-mixture noise only"
        return rep
    rep["validity_warning"] = taylor_validity_warning(tau, noise) if tau > 0 else False
    if rep["validity_warning"]:
        rep["warnings"].append(f"tau * E[w^2] > 0.1: second-order weight expansion unreliable")
    try:
        p = steady_state_msd(SteadyStateInputs(spec.mu, tau, noise, sc.basis, sc.ds))
        rep["msd_prediction"] = {"linear": p.msd_linear, "db": p.msd_db, "weight_factor": p.weight_factor}
    except (InstabilityError, DegenerateOperatorError) as exc:
        rep["msd_prediction"] = None
        rep["warnings"].append(str(exc))
    return rep


def cmd_analyze(args) -> int:
    from .experiments import build_scenario

    cfg = load_config(args.config)
    sc = build_scenario(cfg)
    report = {"scenario": _scenario_info(sc), "algorithms": {}}
    for spec in cfg.algorithms:
        rep = _analyze_algorithm(sc, spec, cfg.noise)
        for w in rep["warnings"]:
            log.warning("%s: %s", spec.name, w)
        report["algorithms"][spec.name] = rep
    write_json(_out_dir(cfg) / "analysis.json", report)
    return EXIT_OK


def cmd_predict(args) -> int:
    from .experiments import build_scenario, predict_series

    cfg = load_config(args.config)
    sc = build_scenario(cfg)
    est = predict_series(cfg, sc)
    out = _out_dir(cfg)
    for name, e in est.items():
        write_prediction_csv(out / f"prediction_{name}.csv", sc.node_ids, sc.series, e)
    return EXIT_OK


def cmd_complexity(args) -> int:
    rep = complexity_report(args.n, args.f, args.s, args.baseline).as_dict()
    if args.out:
        write_json(args.out, rep)
    else:
        import json
        sys.stdout.write(json.dumps(rep, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = load_config(args.config)
    if cfg.data_path is not None and not cfg.data_path.is_file():
        raise ConfigError(f"dataset {cfg.data_path} does not exist")
    print(f"{args.config}: ok", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gsphqc", description="Adaptive graph-signal estimation experiments.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    for name, fn, hlp in (("run", cmd_run, "learning curves for every configured algorithm"),
                          ("sweep", cmd_sweep, "steady-state MSD over a tau/mu grid"),
                          ("analyze", cmd_analyze, "step bounds and closed-form MSD report"),
                          ("predict", cmd_predict, "track a station time series"),
                          ("validate-config", cmd_validate, "check a config file")):
        sp = sub.add_parser(name, help=hlp)
        sp.add_argument("config", help="experiment config JSON")
        if name in ("run", "sweep"):
            sp.add_argument("--workers", type=int, default=None, help="trial worker processes")
        sp.set_defaults(func=fn)
    sp = sub.add_parser("complexity", help="per-iteration operation counts")
    sp.add_argument("--n", type=int, required=True, help="node count N")
    sp.add_argument("--f", type=int, required=True, help="frequency-set size F")
    sp.add_argument("--s", type=int, required=True, help="sampling-set size S")
    sp.add_argument("--baseline", default="LOG", help="algorithm used as 100%% (default LOG)")
    sp.add_argument("--out", help="write the JSON report here instead of stdout")
    sp.set_defaults(func=cmd_complexity)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GSPError, ArithmeticError, OSError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
