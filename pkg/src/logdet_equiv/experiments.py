"""Monte Carlo harness: run the equivalence experiments and persist results.

Modes
-----
single
    One matrix, one noise amplitude: per-trial comparison of
    ``(1/N) log |det (A + delta G)|`` against the cutoff sum, with error
    budgets (:func:`run_theorem2`), plus the identity-verification suite
    (:func:`run_grushin_suite`).
sweep
    The size-asymptotic comparison across ``N_list`` with ``delta = N**-gamma``
    and the ``N*`` cutoff (:func:`run_theorem1`).
field
    The log-potential map ``z -> (1/N) log |det (z I - A + delta G)|`` over a
    rectangular grid (:func:`log_potential_field`).

Reproducibility: trial ``k`` of work unit ``b`` (sweep step or grid point;
0 in single mode) always draws from ``substream_seed(seed, b, k)``, so output
is byte-identical for any worker count and a one-point field run coincides
with a single-mode run on the shifted matrix, stream for stream.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .ensembles import MatrixSpec, realize, spectrum_of
from .equivalents import (
    CONVENTIONS,
    EquivalenceParams,
    ParameterError,
    admissible_delta_range,
    auto_alpha,
    bpz_equivalent,
    count_below,
    deterministic_equivalent,
    error_budget,
    n_star,
)
from .grushin import (
    CheckRecord,
    build_grushin,
    grushin_det_identity,
    interlacing_check,
    invert_perturbed,
    neumann_tail_bound,
    norm_estimates,
    perturbation_drift_bound,
    perturbed_norm_estimates,
    schur_logdet,
    assemble,
)
from .linalg import log_abs_det, operator_norm, smallest_singular_value
from .noise import NOISE_KINDS, anti_concentration_probe, sample, substream_seed

__all__ = [
    "ConfigError",
    "ZGrid",
    "ParamConfig",
    "ExperimentConfig",
    "TrialRecord",
    "FieldPoint",
    "RECORD_COLUMNS",
    "FIELD_COLUMNS",
    "PROBE_COLUMNS",
    "run_theorem2",
    "run_theorem1",
    "run_grushin_suite",
    "log_potential_field",
    "write_results",
    "read_config",
    "write_config",
    "config_to_dict",
    "config_from_dict",
]

RECORD_COLUMNS = (
    "trial",
    "seed_used",
    "N",
    "delta",
    "alpha",
    "M",
    "lhs",
    "rhs",
    "error",
    "error_bound",
    "within_budget",
    "norm_G",
    "s_min_perturbed",
    "contraction",
)
FIELD_COLUMNS = ("re_z", "im_z", "rhs", "lhs_mean", "lhs_sd", "trials")
PROBE_COLUMNS = ("model", "N", "trial", "stat_name", "value")

# Substream block reserved for the optional anti-concentration probe, far
# outside the range of sweep/grid block indices.
EPS_PROBE_BLOCK = 0xFFFFFFFF


class ConfigError(ValueError):
    """The experiment configuration is malformed or infeasible."""


@dataclass(frozen=True)
class ZGrid:
    """Rectangular grid in the complex plane with ``steps`` points per axis."""

    re_min: float
    re_max: float
    im_min: float
    im_max: float
    steps: int

    def __post_init__(self):
        if self.steps < 1:
            raise ConfigError(f"z_grid steps must be >= 1, got {self.steps}")
        if self.re_max < self.re_min or self.im_max < self.im_min:
            raise ConfigError("z_grid bounds must satisfy re_min <= re_max and im_min <= im_max")

    def points(self) -> list[complex]:
        """Grid points in row-major order: imaginary axis outer, real inner."""
        res = np.linspace(self.re_min, self.re_max, self.steps)
        ims = np.linspace(self.im_min, self.im_max, self.steps)
        return [complex(r, i) for i in ims for r in res]


@dataclass(frozen=True)
class ParamConfig:
    """Declarative parameter block; ``alpha`` may be the string ``"auto"``.

    ``resolve`` turns it into concrete :class:`EquivalenceParams` for one
    spectrum: an explicit cutoff gets its deflation count measured, an auto
    cutoff is searched subject to ``nu_target``.
    """

    alpha: float | str = "auto"
    nu_target: float = 0.5
    gamma: float = 1.0
    eta: float = 0.01
    delta: float = 0.0
    tau: float = 10.0
    kappa1: float = 0.5
    kappa2: float = 0.0
    beta: float = 2.0
    L: float = 2.0
    C: float = 1.0
    headroom: float = 0.1

    def __post_init__(self):
        if isinstance(self.alpha, str) and self.alpha != "auto":
            raise ConfigError(f"alpha must be a number or 'auto', got {self.alpha!r}")

    def resolve(self, singvals, n: int) -> EquivalenceParams:
        if self.alpha == "auto":
            found = auto_alpha(singvals, self.nu_target, self.L, self.C)
            if found is None:
                raise ConfigError(
                    "auto cutoff search failed: no alpha in [C*N^-L, 1] keeps the "
                    f"deflation count within nu_target = {self.nu_target}"
                )
            alpha, m = found
        else:
            alpha = float(self.alpha)
            m = count_below(singvals, alpha)
        nu_n = m * math.log(n) / n if n >= 2 else 0.0
        return EquivalenceParams(
            alpha=alpha,
            m=m,
            nu_n=nu_n,
            gamma=self.gamma,
            eta=self.eta,
            delta=self.delta,
            tau=self.tau,
            kappa1=self.kappa1,
            kappa2=self.kappa2,
            beta=self.beta,
            L=self.L,
            C=self.C,
            headroom=self.headroom,
        )


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: matrix, noise model, parameters, and a mode."""

    matrix: MatrixSpec
    model: str
    params: ParamConfig = field(default_factory=ParamConfig)
    trials: int = 100
    seed: int = 0
    mode: str = "single"
    n_list: tuple = ()
    z_grid: ZGrid | None = None
    output: str | None = None
    convention: str = "inclusive"
    probe_eps: bool = False

    def __post_init__(self):
        if self.model not in NOISE_KINDS:
            raise ConfigError(f"unknown noise model {self.model!r}; choose from {NOISE_KINDS}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.mode not in ("single", "sweep", "field"):
            raise ConfigError(f"mode must be one of single/sweep/field, got {self.mode!r}")
        if self.convention not in CONVENTIONS:
            raise ConfigError(f"unknown convention {self.convention!r}; choose from {CONVENTIONS}")
        if self.mode == "sweep":
            if not self.n_list:
                raise ConfigError("sweep mode needs a nonempty N_list")
            sizes = [int(n) for n in self.n_list]
            if any(b <= a for a, b in zip(sizes, sizes[1:])):
                raise ConfigError("N_list must be strictly ascending")
        elif self.n_list:
            raise ConfigError(f"N_list is only meaningful in sweep mode, not {self.mode!r}")
        if self.mode == "field":
            if self.z_grid is None:
                raise ConfigError("field mode needs a z_grid")
            if self.matrix.shift is not None:
                raise ConfigError("field mode applies its own shift; the matrix spec must be unshifted")
        elif self.z_grid is not None:
            raise ConfigError(f"z_grid is only meaningful in field mode, not {self.mode!r}")


@dataclass(frozen=True)
class TrialRecord:
    """One noise draw compared against the deterministic equivalent.

    ``within_budget`` is None in sweep mode, where no finite-N budget is
    claimed; there the ``m`` field carries ``N*`` and ``alpha``,
    ``error_bound``, ``contraction`` are NaN.
    """

    trial: int
    seed_used: int
    n: int
    delta: float
    alpha: float
    m: int
    lhs: float
    rhs: float
    error: float
    error_bound: float
    within_budget: bool | None
    norm_g: float
    s_min_perturbed: float
    contraction: float

    def row(self) -> tuple:
        return (
            self.trial,
            self.seed_used,
            self.n,
            self.delta,
            self.alpha,
            self.m,
            self.lhs,
            self.rhs,
            self.error,
            self.error_bound,
            self.within_budget,
            self.norm_g,
            self.s_min_perturbed,
            self.contraction,
        )


@dataclass(frozen=True)
class FieldPoint:
    """Log-potential statistics at one grid point."""

    re_z: float
    im_z: float
    rhs: float
    lhs_mean: float
    lhs_sd: float
    trials: int

    def row(self) -> tuple:
        return (self.re_z, self.im_z, self.rhs, self.lhs_mean, self.lhs_sd, self.trials)


def _map_indexed(fn, count: int, workers: int) -> list:
    """Apply ``fn`` to 0..count-1, optionally on a thread pool, order preserved."""
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, range(count)))
    return [fn(k) for k in range(count)]


def _quantile_block(values) -> dict:
    v = np.asarray(values, dtype=float)
    finite = v[np.isfinite(v)]
    block = {
        "median": float(np.median(v)) if v.size else None,
        "q05": float(np.quantile(finite, 0.05)) if finite.size else None,
        "q95": float(np.quantile(finite, 0.95)) if finite.size else None,
        "max": float(v.max()) if v.size else None,
        "nonfinite": int(np.count_nonzero(~np.isfinite(v))),
    }
    return block


def run_theorem2(config: ExperimentConfig, workers: int = 1):
    """Single-matrix Monte Carlo comparison against the cutoff sum.

    Returns ``(records, summary)``.  The summary reports the empirical
    success frequency P(error <= budget) next to the partial probability
    floor ``1 - 1/tau``; the anti-concentration failure rate ``eps_hat``
    is measured only when ``config.probe_eps`` is set (None = unavailable,
    making the full floor unavailable too).
    """
    if config.mode != "single":
        raise ConfigError(f"run_theorem2 needs mode 'single', got {config.mode!r}")
    a = realize(config.matrix)
    n = int(config.matrix.n)
    singvals = spectrum_of(config.matrix)
    try:
        params = config.params.resolve(singvals, n)
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc
    if params.delta > 0:
        lo, hi = admissible_delta_range(params.alpha, params.gamma, params.kappa1, params.tau, n, params.headroom)
        if lo > hi:
            raise ConfigError(
                f"admissible delta window is empty: [{lo:.4g}, {hi:.4g}]; raise gamma or loosen alpha/tau"
            )
        if not lo * (1 - 1e-12) <= params.delta <= hi * (1 + 1e-12):
            raise ConfigError(f"delta = {params.delta:.4g} outside the admissible window [{lo:.4g}, {hi:.4g}]")
    rhs = deterministic_equivalent(singvals, params.alpha)

    eps_hat = None
    if config.probe_eps and params.delta > 0:
        probe = anti_concentration_probe(
            a,
            config.model,
            config.trials,
            [params.beta],
            substream_seed(config.seed, EPS_PROBE_BLOCK),
            delta=params.delta,
            gamma=params.gamma,
        )
        eps_hat = probe.summary["rescaled_frequencies"][0]["frequency"]
    try:
        budget = error_budget(params, n, eps_n=eps_hat or 0.0)
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc

    delta = params.delta

    def one(k: int) -> TrialRecord:
        sub = substream_seed(config.seed, 0, k)
        g = sample(config.model, n, sub)
        norm_g = operator_norm(g)
        a_delta = a + delta * g
        lhs = log_abs_det(a_delta) / n
        error = abs(lhs - rhs)
        return TrialRecord(
            trial=k,
            seed_used=sub,
            n=n,
            delta=delta,
            alpha=params.alpha,
            m=params.m,
            lhs=lhs,
            rhs=rhs,
            error=error,
            error_bound=budget.error_bound,
            within_budget=bool(error <= budget.error_bound),
            norm_g=norm_g,
            s_min_perturbed=smallest_singular_value(a_delta),
            contraction=delta * norm_g / params.alpha,
        )

    records = _map_indexed(one, config.trials, workers)
    errors = [r.error for r in records]
    summary = {
        "mode": "single",
        "N": n,
        "model": config.model,
        "trials": config.trials,
        "alpha": params.alpha,
        "M": params.m,
        "nu_N": params.nu_n,
        "delta": delta,
        "tau": params.tau,
        "C": params.C,
        "outside_theorem": params.outside_theorem(),
        "rhs": rhs,
        "error_bound": budget.error_bound,
        "success_frequency": float(np.mean([r.within_budget for r in records])),
        "floor_partial": 1.0 - 1.0 / params.tau,
        "eps_hat": eps_hat,
        "floor_full": (1.0 - budget.failure_prob) if eps_hat is not None else None,
        "error": _quantile_block(errors),
        "lhs": _quantile_block([r.lhs for r in records]),
        "config": config_to_dict(config),
    }
    return records, summary


def run_theorem1(
    config: ExperimentConfig,
    gamma: float | None = None,
    eta: float | None = None,
    convention: str | None = None,
    workers: int = 1,
):
    """Size sweep with ``delta = N**-gamma`` and the ``N*`` cutoff.

    Explicit ``gamma``/``eta``/``convention`` arguments override the config.
    Sweep steps whose right side is ``-inf`` (possible under the inclusive
    convention on exactly singular spectra) are recorded and flagged, and
    excluded from the cross-N error trend with an explicit count.
    """
    if config.mode != "sweep":
        raise ConfigError(f"run_theorem1 needs mode 'sweep', got {config.mode!r}")
    gamma = config.params.gamma if gamma is None else float(gamma)
    eta = config.params.eta if eta is None else float(eta)
    convention = config.convention if convention is None else convention
    if convention not in CONVENTIONS:
        raise ConfigError(f"unknown convention {convention!r}; choose from {CONVENTIONS}")
    if gamma <= 0.5:
        raise ConfigError(f"the size sweep needs gamma > 1/2, got {gamma}")
    if eta <= 0:
        raise ConfigError(f"eta must be positive, got {eta}")

    records: list[TrialRecord] = []
    per_n = []
    for block, n in enumerate(int(x) for x in config.n_list):
        try:
            spec_n = config.matrix.with_size(n)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        a = realize(spec_n)
        singvals = spectrum_of(spec_n)
        delta = float(n) ** (-gamma)
        cutoff_index = n_star(singvals, gamma, eta)
        rhs = bpz_equivalent(singvals, cutoff_index, convention)
        rhs_by_convention = {c: bpz_equivalent(singvals, cutoff_index, c) for c in CONVENTIONS}

        def one(k: int, a=a, n=n, delta=delta, rhs=rhs, block=block, cutoff_index=cutoff_index) -> TrialRecord:
            sub = substream_seed(config.seed, block, k)
            g = sample(config.model, n, sub)
            norm_g = operator_norm(g)
            a_delta = a + delta * g
            lhs = log_abs_det(a_delta) / n
            return TrialRecord(
                trial=k,
                seed_used=sub,
                n=n,
                delta=delta,
                alpha=float("nan"),
                m=cutoff_index,
                lhs=lhs,
                rhs=rhs,
                error=abs(lhs - rhs),
                error_bound=float("nan"),
                within_budget=None,
                norm_g=norm_g,
                s_min_perturbed=smallest_singular_value(a_delta),
                contraction=float("nan"),
            )

        step_records = _map_indexed(one, config.trials, workers)
        records.extend(step_records)
        flagged = not math.isfinite(rhs)
        step_errors = [r.error for r in step_records]
        per_n.append(
            {
                "N": n,
                "N_star": cutoff_index,
                "delta": delta,
                "rhs": rhs,
                "rhs_inclusive": rhs_by_convention["inclusive"],
                "rhs_drop_all_small": rhs_by_convention["drop_all_small"],
                "flagged_infinite_rhs": flagged,
                "error_median": None if flagged else float(np.median(step_errors)),
                "error": _quantile_block(step_errors),
            }
        )
    medians = [p["error_median"] for p in per_n if not p["flagged_infinite_rhs"]]
    summary = {
        "mode": "sweep",
        "model": config.model,
        "convention": convention,
        "gamma": gamma,
        "eta": eta,
        "trials": config.trials,
        "per_N": per_n,
        "flagged_steps": int(sum(p["flagged_infinite_rhs"] for p in per_n)),
        "error_medians": medians,
        "medians_strictly_decreasing": (
            bool(all(b < a for a, b in zip(medians, medians[1:]))) if len(medians) >= 2 else None
        ),
        "config": config_to_dict(config),
    }
    return records, summary


def run_grushin_suite(config: ExperimentConfig, workers: int = 1, n_terms: int = 25):
    """Run every block-algebra identity and bound on the configured matrix.

    Static checks (determinant identity, two-sided inverse, unperturbed norm
    estimates) run once; per-trial checks (Schur identity, interlacing,
    drift and perturbed norm bounds, Neumann-direct agreement) run on each
    sampled perturbation.  Bounds that assume the contraction regime are
    skipped, not failed, for trials where ``delta * ||G|| / alpha > 1/2``.

    Returns ``(checks, summary)``: each check is a JSON-ready dict
    ``{check, n, lhs, rhs, bound, pass, trial}``.
    """
    if config.mode != "single":
        raise ConfigError(f"run_grushin_suite needs mode 'single', got {config.mode!r}")
    a = realize(config.matrix)
    n = int(config.matrix.n)
    singvals = spectrum_of(config.matrix)
    try:
        params = config.params.resolve(singvals, n)
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc
    sys, blocks = build_grushin(a, params.m)
    # count_below puts alpha in [t_m, t_{m+1}) by construction, the window
    # the unperturbed norm estimates require.
    alpha = params.alpha

    checks: list[dict] = []

    def add(record: CheckRecord, trial: int | None = None) -> None:
        entry = record.as_dict()
        entry["trial"] = trial
        checks.append(entry)

    lhs, rhs = grushin_det_identity(sys)
    identical_inf = math.isinf(lhs) and math.isinf(rhs) and (lhs < 0) == (rhs < 0)
    add(CheckRecord("det_identity", None, lhs, rhs, 1e-8 * n, bool(identical_inf or abs(lhs - rhs) <= 1e-8 * n)))

    assembled = assemble(sys)
    inverse = blocks.assembled()
    eye = np.eye(n + params.m)
    tol = 1e-10 * (n + params.m)
    right_defect = float(np.abs(assembled @ inverse - eye).max())
    left_defect = float(np.abs(inverse @ assembled - eye).max())
    add(CheckRecord("two_sided_inverse_right", None, right_defect, 0.0, tol, right_defect <= tol))
    add(CheckRecord("two_sided_inverse_left", None, left_defect, 0.0, tol, left_defect <= tol))
    for record in norm_estimates(sys, blocks, alpha):
        add(record)

    delta = params.delta

    def one(k: int) -> list:
        sub = substream_seed(config.seed, 0, k)
        g = sample(config.model, n, sub)
        pert = invert_perturbed(sys, g, delta, "direct", alpha=alpha)
        out = []
        l, r = schur_logdet(sys, pert)
        same_inf = math.isinf(l) and math.isinf(r) and (l < 0) == (r < 0)
        out.append(CheckRecord("schur_identity", None, l, r, 1e-7 * n, bool(same_inf or abs(l - r) <= 1e-7 * n)))
        out.extend(interlacing_check(sys, pert))
        if pert.within_contraction:
            drift, bound = perturbation_drift_bound(sys, pert)
            out.append(CheckRecord("drift_bound", None, drift, bound, 1e-10, drift <= bound + 1e-10))
            out.extend(perturbed_norm_estimates(pert))
            approx = invert_perturbed(sys, g, delta, "neumann", alpha=alpha, n_terms=n_terms)
            diff = max(
                float(np.abs(approx.blocks.e - pert.blocks.e).max()),
                float(np.abs(approx.blocks.e_plus - pert.blocks.e_plus).max() if params.m else 0.0),
                float(np.abs(approx.blocks.e_minus - pert.blocks.e_minus).max() if params.m else 0.0),
                float(np.abs(approx.blocks.e_minus_plus - pert.blocks.e_minus_plus).max() if params.m else 0.0),
            )
            tail = max(neumann_tail_bound(pert.contraction, alpha, n_terms), 1e-9)
            out.append(CheckRecord("neumann_agreement", None, diff, tail, 0.0, diff <= tail))
        return out

    for k, trial_records in enumerate(_map_indexed(one, config.trials, workers)):
        for record in trial_records:
            add(record, trial=k)

    failed = [c for c in checks if not c["pass"]]
    worst: dict = {}
    for c in checks:
        name = c["check"]
        excess = c["lhs"] - c["rhs"]
        if name not in worst or excess > worst[name]:
            worst[name] = excess
    summary = {
        "mode": "grushin_suite",
        "N": n,
        "model": config.model,
        "trials": config.trials,
        "alpha": alpha,
        "M": params.m,
        "delta": delta,
        "checks_total": len(checks),
        "checks_failed": len(failed),
        "ok": not failed,
        "worst_excess": worst,
        "failing": failed[:20],
        "config": config_to_dict(config),
    }
    return checks, summary


def log_potential_field(config: ExperimentConfig, workers: int = 1):
    """Evaluate the log-potential field over the configured z-grid.

    For each grid point ``z`` the matrix ``z I - A`` gets its own cutoff
    resolution (fresh ``alpha`` when auto) and its own noise substreams, so
    one grid point reproduces a single-mode run on the shifted matrix.
    """
    if config.mode != "field":
        raise ConfigError(f"log_potential_field needs mode 'field', got {config.mode!r}")
    base = realize(config.matrix)
    n = int(config.matrix.n)
    eye = np.eye(n, dtype=np.complex128)
    delta = config.params.delta
    points = config.z_grid.points()
    field_points: list[FieldPoint] = []
    for p, z in enumerate(points):
        a_z = z * eye - base
        singvals = spectrum_of(replace(config.matrix, shift=z))
        try:
            params = config.params.resolve(singvals, n)
        except (ParameterError, ConfigError) as exc:
            raise ConfigError(f"grid point {z}: {exc}") from exc
        rhs = deterministic_equivalent(singvals, params.alpha)

        def one(k: int, a_z=a_z, p=p) -> float:
            sub = substream_seed(config.seed, p, k)
            g = sample(config.model, n, sub)
            return log_abs_det(a_z + delta * g) / n

        values = np.array(_map_indexed(one, config.trials, workers))
        field_points.append(
            FieldPoint(
                re_z=float(z.real),
                im_z=float(z.imag),
                rhs=rhs,
                lhs_mean=float(values.mean()),
                lhs_sd=float(values.std(ddof=1)) if values.size > 1 else 0.0,
                trials=config.trials,
            )
        )
    gaps = [abs(fp.lhs_mean - fp.rhs) for fp in field_points if math.isfinite(fp.lhs_mean)]
    summary = {
        "mode": "field",
        "N": n,
        "model": config.model,
        "trials": config.trials,
        "delta": delta,
        "points": len(field_points),
        "steps": config.z_grid.steps,
        "mean_abs_gap": float(np.mean(gaps)) if gaps else None,
        "max_abs_gap": float(np.max(gaps)) if gaps else None,
        "config": config_to_dict(config),
    }
    return field_points, summary


# ---------------------------------------------------------------------------
# serialization


def _fmt_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _jsonable(obj):
    """Make summaries JSON-clean: plain types, non-finite floats as strings."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    return obj


def _write_csv(path: str, header, rows) -> None:
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt_cell(v) for v in row])


def _write_json(path: str, payload) -> None:
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(payload), fh, indent=2)
        fh.write("\n")


def write_results(records, path_prefix: str, summary=None) -> list[str]:
    """Persist a record batch (and optional summary) under a path prefix.

    Trial records go to ``{prefix}_records.csv``, field points to
    ``{prefix}_field.csv``, check dicts to ``{prefix}_checks.json``, probe
    results to ``{prefix}_probes.csv``; the summary, when given, to
    ``{prefix}_summary.json``.  An empty record list writes a header-only
    records CSV.  Returns the written paths.
    """
    prefix = str(path_prefix)
    written: list[str] = []
    records = list(records)
    if records and isinstance(records[0], FieldPoint):
        path = f"{prefix}_field.csv"
        _write_csv(path, FIELD_COLUMNS, (r.row() for r in records))
        written.append(path)
    elif records and isinstance(records[0], dict) and "check" in records[0]:
        path = f"{prefix}_checks.json"
        _write_json(path, records)
        written.append(path)
    elif records and hasattr(records[0], "csv_rows"):
        path = f"{prefix}_probes.csv"
        _write_csv(path, PROBE_COLUMNS, (row for r in records for row in r.csv_rows()))
        written.append(path)
    else:
        path = f"{prefix}_records.csv"
        _write_csv(path, RECORD_COLUMNS, (r.row() for r in records))
        written.append(path)
    if summary is not None:
        path = f"{prefix}_summary.json"
        _write_json(path, summary)
        written.append(path)
    return written


_MATRIX_KEYS = {"kind", "n", "a", "b", "diag", "path", "shift"}
_PARAM_KEYS = {
    "alpha",
    "nu_target",
    "gamma",
    "eta",
    "delta",
    "tau",
    "kappa1",
    "kappa2",
    "beta",
    "L",
    "C",
    "headroom",
}
_GRID_KEYS = {"re_min", "re_max", "im_min", "im_max", "steps"}
_CONFIG_KEYS = {
    "matrix",
    "model",
    "params",
    "trials",
    "seed",
    "mode",
    "N_list",
    "z_grid",
    "output",
    "convention",
    "probe_eps",
}


def _complex_to_json(z):
    if z is None:
        return None
    z = complex(z)
    return [z.real, z.imag]


def _complex_from_json(value, where: str) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", ""))
        except ValueError as exc:
            raise ConfigError(f"{where}: cannot parse {value!r} as a complex number") from exc
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ConfigError(f"{where}: expected a number, 're+imj' string, or [re, im] pair, got {value!r}")


def config_to_dict(config: ExperimentConfig) -> dict:
    spec = config.matrix
    matrix = {"kind": spec.kind, "n": spec.n}
    if spec.kind == "bidiagonal_toeplitz":
        matrix["a"] = _complex_to_json(spec.a)
        matrix["b"] = _complex_to_json(spec.b)
    if spec.kind == "diagonal":
        matrix["diag"] = [[_complex_to_json(v), int(c)] for v, c in spec.diag]
    if spec.kind == "custom":
        matrix["path"] = spec.path
    if spec.shift is not None:
        matrix["shift"] = _complex_to_json(spec.shift)
    p = config.params
    params = {
        "alpha": p.alpha,
        "nu_target": p.nu_target,
        "gamma": p.gamma,
        "eta": p.eta,
        "delta": p.delta,
        "tau": p.tau,
        "kappa1": p.kappa1,
        "kappa2": p.kappa2,
        "beta": p.beta,
        "L": p.L,
        "C": p.C,
        "headroom": p.headroom,
    }
    out = {
        "matrix": matrix,
        "model": config.model,
        "params": params,
        "trials": config.trials,
        "seed": config.seed,
        "mode": config.mode,
        "convention": config.convention,
        "probe_eps": config.probe_eps,
    }
    if config.n_list:
        out["N_list"] = [int(n) for n in config.n_list]
    if config.z_grid is not None:
        g = config.z_grid
        out["z_grid"] = {
            "re_min": g.re_min,
            "re_max": g.re_max,
            "im_min": g.im_min,
            "im_max": g.im_max,
            "steps": g.steps,
        }
    if config.output is not None:
        out["output"] = config.output
    return out


def _matrix_from_dict(d: dict) -> MatrixSpec:
    if not isinstance(d, dict):
        raise ConfigError(f"matrix: expected an object, got {type(d).__name__}")
    unknown = set(d) - _MATRIX_KEYS
    if unknown:
        raise ConfigError(f"matrix: unknown keys {sorted(unknown)}")
    if "kind" not in d or "n" not in d:
        raise ConfigError("matrix: 'kind' and 'n' are required")
    kwargs = {"kind": d["kind"], "n": int(d["n"])}
    if "a" in d:
        kwargs["a"] = _complex_from_json(d["a"], "matrix.a")
    if "b" in d:
        kwargs["b"] = _complex_from_json(d["b"], "matrix.b")
    if "diag" in d:
        entries = []
        for item in d["diag"]:
            if not isinstance(item, (list, tuple)) or len(item) != 2:
                raise ConfigError(f"matrix.diag: expected [value, count] pairs, got {item!r}")
            entries.append((_complex_from_json(item[0], "matrix.diag"), int(item[1])))
        kwargs["diag"] = tuple(entries)
    if "path" in d:
        kwargs["path"] = d["path"]
    if d.get("shift") is not None:
        kwargs["shift"] = _complex_from_json(d["shift"], "matrix.shift")
    try:
        return MatrixSpec(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"matrix: {exc}") from exc


def _params_from_dict(d: dict) -> ParamConfig:
    if not isinstance(d, dict):
        raise ConfigError(f"params: expected an object, got {type(d).__name__}")
    unknown = set(d) - _PARAM_KEYS
    if unknown:
        raise ConfigError(f"params: unknown keys {sorted(unknown)}")
    kwargs = {}
    for key, value in d.items():
        if key == "alpha" and isinstance(value, str):
            kwargs[key] = value
        else:
            kwargs[key] = float(value)
    try:
        return ParamConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"params: {exc}") from exc


def config_from_dict(d: dict) -> ExperimentConfig:
    if not isinstance(d, dict):
        raise ConfigError(f"config: expected an object, got {type(d).__name__}")
    unknown = set(d) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"config: unknown keys {sorted(unknown)}")
    for required in ("matrix", "model"):
        if required not in d:
            raise ConfigError(f"config: {required!r} is required")
    kwargs = {
        "matrix": _matrix_from_dict(d["matrix"]),
        "model": d["model"],
        "params": _params_from_dict(d.get("params", {})),
    }
    if "trials" in d:
        kwargs["trials"] = int(d["trials"])
    if "seed" in d:
        kwargs["seed"] = int(d["seed"])
    if "mode" in d:
        kwargs["mode"] = d["mode"]
    if "N_list" in d:
        kwargs["n_list"] = tuple(int(n) for n in d["N_list"])
    if d.get("z_grid") is not None:
        g = d["z_grid"]
        unknown = set(g) - _GRID_KEYS
        if unknown:
            raise ConfigError(f"z_grid: unknown keys {sorted(unknown)}")
        missing = _GRID_KEYS - set(g)
        if missing:
            raise ConfigError(f"z_grid: missing keys {sorted(missing)}")
        kwargs["z_grid"] = ZGrid(
            re_min=float(g["re_min"]),
            re_max=float(g["re_max"]),
            im_min=float(g["im_min"]),
            im_max=float(g["im_max"]),
            steps=int(g["steps"]),
        )
    if "output" in d:
        kwargs["output"] = d["output"]
    if "convention" in d:
        kwargs["convention"] = d["convention"]
    if "probe_eps" in d:
        kwargs["probe_eps"] = bool(d["probe_eps"])
    return ExperimentConfig(**kwargs)


def read_config(path) -> ExperimentConfig:
    """Load and validate a JSON experiment config."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return config_from_dict(payload)


def write_config(config: ExperimentConfig, path) -> None:
    _write_json(path, config_to_dict(config))
