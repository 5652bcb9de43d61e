"""Command-line interface.

Subcommands: ``equiv`` (print cutoff sums, no sampling), ``grushin-verify``
(identity suite), ``mc`` (single-matrix Monte Carlo), ``sweep``
(size-asymptotic runs), ``field`` (log-potential grid), ``probe-noise``
(noise-model diagnostics).  Flag overrides always win over config-file
values.  Exit status: 0 on success, 2 on verification failure, 3 on
configuration errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from .ensembles import parse_matrix_arg, realize, spectrum_of
from .equivalents import CONVENTIONS, ParameterError, bpz_equivalent, deterministic_equivalent, n_star
from .experiments import (
    ConfigError,
    ExperimentConfig,
    ZGrid,
    log_potential_field,
    read_config,
    run_grushin_suite,
    run_theorem1,
    run_theorem2,
    write_results,
)
from .noise import NOISE_KINDS, anti_concentration_probe, markov_tail_check, norm_growth_probe, substream_seed

EXIT_OK = 0
EXIT_VERIFY = 2
EXIT_CONFIG = 3

PARAM_FLAGS = ("alpha", "delta", "gamma", "eta", "tau", "nu_target", "headroom")


def _add_common(parser: argparse.ArgumentParser, with_matrix: bool = True) -> None:
    parser.add_argument("--config", help="JSON experiment config; flags override its values")
    parser.add_argument("--seed", type=int, help="64-bit root seed")
    parser.add_argument("--out", help="output path prefix for CSV/JSON artifacts")
    parser.add_argument("--trials", type=int, help="number of noise draws")
    parser.add_argument("--workers", type=int, default=None,
                        help="thread pool size (default: $LOGDET_EQUIV_WORKERS or 1); output is worker-count independent")
    if with_matrix:
        parser.add_argument("--matrix", help="matrix spec: jordan | zero | diag:2x190,0x10 | bidiag:a,b | file:PATH")
        parser.add_argument("--n", type=int, help="matrix size")
        parser.add_argument("--shift", help="complex shift z; the realized matrix is z*I - A")
        parser.add_argument("--model", choices=NOISE_KINDS, help="noise model")
    parser.add_argument("--alpha", help="singular-value cutoff in (0,1], or 'auto'")
    parser.add_argument("--delta", type=float, help="noise amplitude")
    parser.add_argument("--gamma", type=float, help="noise-scale exponent (delta = N^-gamma in sweep mode)")
    parser.add_argument("--eta", type=float, help="cutoff-index exponent")
    parser.add_argument("--tau", type=float, help="tail parameter")
    parser.add_argument("--nu-target", dest="nu_target", type=float, help="deflation-rate budget for auto alpha")
    parser.add_argument("--headroom", type=float, help="fraction of the admissible delta ceiling to allow")
    parser.add_argument("--convention", choices=CONVENTIONS, help="cutoff-sum index convention")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="logdet-equiv",
        description="Deterministic equivalents for log-determinants of noisily perturbed matrices.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("equiv", help="print cutoff sums and parameters for a matrix, no sampling")
    _add_common(p)

    p = sub.add_parser("grushin-verify", help="run the block-algebra identity suite")
    _add_common(p)

    p = sub.add_parser("mc", help="single-matrix Monte Carlo against the cutoff sum")
    _add_common(p)
    p.add_argument("--probe-eps", action="store_true", default=None,
                   help="measure the anti-concentration failure rate alongside the run")

    p = sub.add_parser("sweep", help="size sweep with delta = N^-gamma")
    _add_common(p)
    p.add_argument("--n-list", dest="n_list", help="comma-separated ascending sizes, e.g. 100,200,400")

    p = sub.add_parser("field", help="log-potential field over a z-grid")
    _add_common(p)
    p.add_argument("--re-min", type=float, dest="re_min")
    p.add_argument("--re-max", type=float, dest="re_max")
    p.add_argument("--im-min", type=float, dest="im_min")
    p.add_argument("--im-max", type=float, dest="im_max")
    p.add_argument("--steps", type=int)

    p = sub.add_parser("probe-noise", help="norm growth, tail, and anti-concentration probes")
    _add_common(p)
    p.add_argument("--n-list", dest="n_list", help="sizes for the norm-growth fit, e.g. 50,100,200")
    p.add_argument("--tau-list", dest="tau_list", help="tail parameters, e.g. 2,5,10")
    p.add_argument("--beta-list", dest="beta_list", help="anti-concentration exponents, e.g. 0.5,1,2")

    return parser


def _resolve_workers(args) -> int:
    if args.workers is not None:
        workers = args.workers
    else:
        raw = os.environ.get("LOGDET_EQUIV_WORKERS", "1")
        try:
            workers = int(raw)
        except ValueError as exc:
            raise ConfigError(f"LOGDET_EQUIV_WORKERS must be an integer, got {raw!r}") from exc
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")
    return workers


def _parse_shift(text):
    if text is None:
        return None
    try:
        return complex(text.replace(" ", ""))
    except ValueError as exc:
        raise ConfigError(f"cannot parse shift {text!r} as a complex number") from exc


def _parse_number_list(text, kind=float):
    return tuple(kind(part) for part in text.split(",") if part.strip())


def _resolve_config(args, mode: str) -> ExperimentConfig:
    """Merge config file (if any) with flag overrides and force ``mode``."""
    if args.config:
        config = read_config(args.config)
    else:
        if not getattr(args, "matrix", None) or not getattr(args, "n", None):
            raise ConfigError("without --config, both --matrix and --n are required")
        config = ExperimentConfig(
            matrix=parse_matrix_arg(args.matrix, args.n, _parse_shift(getattr(args, "shift", None))),
            model=getattr(args, "model", None) or "complex_ginibre",
            mode="single",
        )

    changes = {}
    if args.config and getattr(args, "matrix", None):
        size = args.n if getattr(args, "n", None) else config.matrix.n
        changes["matrix"] = parse_matrix_arg(args.matrix, size, _parse_shift(getattr(args, "shift", None)))
    elif args.config and getattr(args, "n", None):
        changes["matrix"] = config.matrix.with_size(args.n)
    if getattr(args, "model", None) and args.config:
        changes["model"] = args.model
    if args.trials is not None:
        changes["trials"] = args.trials
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.out is not None:
        changes["output"] = args.out
    if getattr(args, "convention", None):
        changes["convention"] = args.convention
    if getattr(args, "probe_eps", None) is not None:
        changes["probe_eps"] = args.probe_eps

    param_changes = {}
    for name in PARAM_FLAGS:
        value = getattr(args, name, None)
        if value is None:
            continue
        if name == "alpha":
            param_changes["alpha"] = value if value == "auto" else float(value)
        else:
            param_changes[name] = float(value)
    if param_changes:
        changes["params"] = replace(config.params, **param_changes)

    if mode == "sweep":
        changes["mode"] = "sweep"
        if getattr(args, "n_list", None):
            changes["n_list"] = _parse_number_list(args.n_list, int)
        elif not config.n_list:
            raise ConfigError("sweep needs --n-list or a config with N_list")
    elif mode == "field":
        changes["mode"] = "field"
        grid_flags = {k: getattr(args, k) for k in ("re_min", "re_max", "im_min", "im_max", "steps")}
        if any(v is not None for v in grid_flags.values()):
            base = config.z_grid
            merged = {
                k: (grid_flags[k] if grid_flags[k] is not None else getattr(base, k, None))
                for k in grid_flags
            }
            missing = [k for k, v in merged.items() if v is None]
            if missing:
                raise ConfigError(f"field mode is missing grid values: {missing}")
            changes["z_grid"] = ZGrid(**merged)
        elif config.z_grid is None:
            raise ConfigError("field needs z-grid flags or a config with z_grid")
    else:
        changes["mode"] = "single"
        if config.n_list:
            changes["n_list"] = ()
        if config.z_grid is not None:
            changes["z_grid"] = None

    try:
        return replace(config, **changes) if changes else config
    except (ConfigError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _print_kv(pairs) -> None:
    for key, value in pairs:
        print(f"{key} = {_fmt(value)}")


def _fmt(value) -> str:
    if value is None:
        return "unavailable"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _cmd_equiv(args) -> int:
    config = _resolve_config(args, "single")
    spec = config.matrix
    singvals = spectrum_of(spec)
    params = config.params.resolve(singvals, spec.n)
    rhs = deterministic_equivalent(singvals, params.alpha)
    cutoff_index = n_star(singvals, params.gamma, params.eta)
    _print_kv(
        [
            ("matrix", f"{spec.kind} N={spec.n}" + (f" shift={spec.shift}" if spec.shift is not None else "")),
            ("alpha", params.alpha),
            ("M", params.m),
            ("nu_N", params.nu_n),
            ("rhs", rhs),
            (f"N_star(gamma={params.gamma}, eta={params.eta})", cutoff_index),
            ("bpz_inclusive", bpz_equivalent(singvals, cutoff_index, "inclusive")),
            ("bpz_drop_all_small", bpz_equivalent(singvals, cutoff_index, "drop_all_small")),
        ]
    )
    return EXIT_OK


def _cmd_grushin_verify(args) -> int:
    config = _resolve_config(args, "single")
    checks, summary = run_grushin_suite(config, workers=_resolve_workers(args))
    _print_kv(
        [
            ("checks_total", summary["checks_total"]),
            ("checks_failed", summary["checks_failed"]),
            ("alpha", summary["alpha"]),
            ("M", summary["M"]),
            ("delta", summary["delta"]),
            ("ok", summary["ok"]),
        ]
    )
    if config.output:
        for path in write_results(checks, config.output, summary):
            print(f"wrote {path}")
    if not summary["ok"]:
        for failing in summary["failing"]:
            print(f"FAILED {failing['check']}: lhs={_fmt(failing['lhs'])} rhs={_fmt(failing['rhs'])}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def _cmd_mc(args) -> int:
    config = _resolve_config(args, "single")
    records, summary = run_theorem2(config, workers=_resolve_workers(args))
    _print_kv(
        [
            ("N", summary["N"]),
            ("model", summary["model"]),
            ("trials", summary["trials"]),
            ("alpha", summary["alpha"]),
            ("M", summary["M"]),
            ("delta", summary["delta"]),
            ("outside_theorem", summary["outside_theorem"]),
            ("rhs", summary["rhs"]),
            ("error_bound", summary["error_bound"]),
            ("success_frequency", summary["success_frequency"]),
            ("floor_partial", summary["floor_partial"]),
            ("eps_hat", summary["eps_hat"]),
            ("error_median", summary["error"]["median"]),
            ("error_q95", summary["error"]["q95"]),
        ]
    )
    if config.output:
        for path in write_results(records, config.output, summary):
            print(f"wrote {path}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    config = _resolve_config(args, "sweep")
    records, summary = run_theorem1(config, workers=_resolve_workers(args))
    print(f"convention = {summary['convention']}, gamma = {summary['gamma']}, eta = {summary['eta']}")
    for step in summary["per_N"]:
        print(
            f"N={step['N']} N*={step['N_star']} delta={_fmt(step['delta'])} rhs={_fmt(step['rhs'])} "
            f"median_error={_fmt(step['error_median'])} flagged={step['flagged_infinite_rhs']}"
        )
    _print_kv(
        [
            ("flagged_steps", summary["flagged_steps"]),
            ("medians_strictly_decreasing", summary["medians_strictly_decreasing"]),
        ]
    )
    if config.output:
        for path in write_results(records, config.output, summary):
            print(f"wrote {path}")
    return EXIT_OK


def _cmd_field(args) -> int:
    config = _resolve_config(args, "field")
    points, summary = log_potential_field(config, workers=_resolve_workers(args))
    _print_kv(
        [
            ("N", summary["N"]),
            ("points", summary["points"]),
            ("trials", summary["trials"]),
            ("delta", summary["delta"]),
            ("mean_abs_gap", summary["mean_abs_gap"]),
            ("max_abs_gap", summary["max_abs_gap"]),
        ]
    )
    if config.output:
        for path in write_results(points, config.output, summary):
            print(f"wrote {path}")
    return EXIT_OK


def _cmd_probe_noise(args) -> int:
    model = getattr(args, "model", None) or "complex_ginibre"
    n = getattr(args, "n", None) or 200
    trials = args.trials if args.trials is not None else 200
    seed = args.seed if args.seed is not None else 0
    sizes = _parse_number_list(args.n_list, int) if args.n_list else (50, 100, 200)
    taus = _parse_number_list(args.tau_list) if args.tau_list else (2.0, 5.0, 10.0)
    betas = _parse_number_list(args.beta_list) if args.beta_list else (0.5, 1.0, 2.0)

    growth = norm_growth_probe(model, sizes, min(trials, 50), substream_seed(seed, 0))
    markov = markov_tail_check(model, n, trials, taus, seed=substream_seed(seed, 1))
    if getattr(args, "matrix", None):
        d = realize(parse_matrix_arg(args.matrix, n, _parse_shift(getattr(args, "shift", None))))
    else:
        d = np.zeros((n, n), dtype=np.complex128)
    anti = anti_concentration_probe(d, model, trials, betas, substream_seed(seed, 2))

    print(f"model = {model}")
    print(f"kappa1_hat = {_fmt(growth.kappa1_hat)} (sizes {list(sizes)}, intercept {_fmt(growth.intercept)})")
    ok = True
    for tail in markov.summary["tails"]:
        status = "pass" if tail["pass"] else "FAIL"
        ok = ok and tail["pass"]
        print(
            f"tail tau={_fmt(tail['tau'])}: empirical={_fmt(tail['empirical'])} "
            f"bound={_fmt(tail['bound'])} ({status})"
        )
    for freq in anti.summary["frequencies"]:
        print(f"s_min <= N^-{freq['beta']}: frequency={_fmt(freq['frequency'])}")
    if args.out:
        summary = {
            "model": model,
            "growth": growth.summary,
            "markov": markov.summary,
            "anti_concentration": anti.summary,
        }
        for path in write_results([*growth.per_n, markov, anti], args.out, summary):
            print(f"wrote {path}")
    return EXIT_OK if ok else EXIT_VERIFY


_COMMANDS = {
    "equiv": _cmd_equiv,
    "grushin-verify": _cmd_grushin_verify,
    "mc": _cmd_mc,
    "sweep": _cmd_sweep,
    "field": _cmd_field,
    "probe-noise": _cmd_probe_noise,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, ParameterError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
