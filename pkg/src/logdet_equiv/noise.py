"""Seedable noise ensembles and empirical probes of their regularity.

Every built-in model is normalized to zero mean and unit variance per entry
(``E|g_ij|^2 = 1``) so noise amplitudes are comparable across models.  The
probes measure the three properties the perturbation theory consumes: the
operator-norm growth exponent ``kappa1``, Markov-type norm tails in ``tau``,
and anti-concentration of the smallest singular value of ``D + G``.

Reproducibility contract: every trial draws from its own substream derived
by hashing the root seed with a counter key, so results do not depend on
execution order or worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix, operator_norm, smallest_singular_value

__all__ = [
    "NOISE_KINDS",
    "ProbeResult",
    "NormGrowthFit",
    "substream_seed",
    "sample",
    "fit_growth",
    "norm_growth_probe",
    "markov_tail_check",
    "anti_concentration_probe",
]

NOISE_KINDS = ("complex_ginibre", "real_gaussian", "rademacher_complex", "uniform_complex")


def _check_kind(model: str) -> str:
    if model not in NOISE_KINDS:
        raise ValueError(f"unknown noise model {model!r}; choose from {NOISE_KINDS}")
    return model


def substream_seed(seed: int, *key: int) -> int:
    """Derive an independent 64-bit subseed from a root seed and a key path."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def sample(model: str, n: int, seed: int) -> np.ndarray:
    """Draw one ``n x n`` noise matrix; a pure function of ``(model, n, seed)``.

    complex_ginibre: ``(x + iy)/sqrt(2)`` with independent standard normals.
    real_gaussian: standard normals (stored complex for uniformity).
    rademacher_complex: ``(s1 + i s2)/sqrt(2)`` with independent signs.
    uniform_complex: uniform on the disk of radius ``sqrt(2)``.
    """
    _check_kind(model)
    n = int(n)
    if n < 1:
        raise ValueError(f"matrix size must be >= 1, got {n}")
    rng = np.random.default_rng(int(seed))
    if model == "complex_ginibre":
        re = rng.standard_normal((n, n))
        im = rng.standard_normal((n, n))
        return (re + 1j * im) / math.sqrt(2.0)
    if model == "real_gaussian":
        return rng.standard_normal((n, n)).astype(np.complex128)
    if model == "rademacher_complex":
        re = 2.0 * rng.integers(0, 2, size=(n, n)) - 1.0
        im = 2.0 * rng.integers(0, 2, size=(n, n)) - 1.0
        return (re + 1j * im) / math.sqrt(2.0)
    # uniform_complex: radius sqrt(2)*sqrt(U) makes E|g|^2 = 2*E[U] = 1
    radius = math.sqrt(2.0) * np.sqrt(rng.random((n, n)))
    angle = 2.0 * math.pi * rng.random((n, n))
    return radius * np.exp(1j * angle)


def _quantiles(values: np.ndarray) -> dict:
    qs = np.quantile(values, [0.05, 0.25, 0.5, 0.75, 0.95])
    return {"q05": float(qs[0]), "q25": float(qs[1]), "q50": float(qs[2]), "q75": float(qs[3]), "q95": float(qs[4])}


def _base_summary(values) -> dict:
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return {"mean": None, "quantiles": None}
    return {"mean": float(v.mean()), "quantiles": _quantiles(v)}


@dataclass(frozen=True)
class ProbeResult:
    """Per-trial statistics plus a summary for one probe at one size."""

    model: str
    n: int
    trials: int
    stat_name: str
    values: tuple
    summary: dict

    def csv_rows(self):
        """Rows (model, N, trial, stat_name, value), one per trial."""
        for k, v in enumerate(self.values):
            yield (self.model, self.n, k, self.stat_name, v)

    def as_dict(self) -> dict:
        return {
            "model": self.model,
            "N": self.n,
            "trials": self.trials,
            "stat_name": self.stat_name,
            "values": list(self.values),
            "summary": self.summary,
        }


@dataclass(frozen=True)
class NormGrowthFit:
    """Least-squares fit of ``log mean ||G||`` against ``log N``.

    Wraps one :class:`ProbeResult` per matrix size (each satisfying the
    one-size/one-stat shape) together with the fitted growth exponent.
    """

    per_n: tuple
    kappa1_hat: float
    intercept: float
    residuals: tuple

    @property
    def summary(self) -> dict:
        return {
            "kappa1_hat": self.kappa1_hat,
            "intercept": self.intercept,
            "residuals": list(self.residuals),
            "sizes": [r.n for r in self.per_n],
            "mean_norms": [r.summary["mean"] for r in self.per_n],
        }

    def csv_rows(self):
        for result in self.per_n:
            yield from result.csv_rows()

    def as_dict(self) -> dict:
        return {"per_n": [r.as_dict() for r in self.per_n], **self.summary}


def fit_growth(n_list, mean_norms) -> tuple[float, float, tuple]:
    """Slope, intercept, residuals of ``log mean`` vs ``log N``."""
    logs_n = np.log(np.asarray(n_list, dtype=float))
    logs_m = np.log(np.asarray(mean_norms, dtype=float))
    slope, intercept = np.polyfit(logs_n, logs_m, 1)
    residuals = logs_m - (intercept + slope * logs_n)
    return float(slope), float(intercept), tuple(float(r) for r in residuals)


def norm_growth_probe(model: str, n_list, trials: int, seed: int) -> NormGrowthFit:
    """Estimate the norm-growth exponent ``kappa1`` across sizes."""
    _check_kind(model)
    sizes = [int(n) for n in n_list]
    if len(sizes) < 2:
        raise ValueError("need at least two matrix sizes to fit a growth exponent")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("matrix sizes must be strictly ascending")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    per_n = []
    for block, n in enumerate(sizes):
        values = tuple(
            operator_norm(sample(model, n, substream_seed(seed, block, k))) for k in range(trials)
        )
        per_n.append(ProbeResult(model, n, trials, "operator_norm", values, _base_summary(values)))
    slope, intercept, residuals = fit_growth(sizes, [r.summary["mean"] for r in per_n])
    return NormGrowthFit(per_n=tuple(per_n), kappa1_hat=slope, intercept=intercept, residuals=residuals)


def markov_tail_check(model: str, n: int, trials: int, tau_list, seed: int = 0, kappa1: float = 0.5) -> ProbeResult:
    """Empirical norm tails against the Markov bound ``P(||G|| > c N^k1 tau) <= 1/tau``.

    The scale ``c`` is calibrated from the same sample as the empirical
    mean ``||G|| / N^kappa1``, making the bound exactly Markov's inequality
    in disguise; it must hold for any distribution, so each tau gets a
    pass flag at three binomial standard errors.
    """
    _check_kind(model)
    if trials < 100:
        raise ValueError("tail estimates need at least 100 trials")
    taus = [float(t) for t in tau_list]
    if any(t <= 0 for t in taus):
        raise ValueError("tau values must be positive")
    norms = np.array([operator_norm(sample(model, n, substream_seed(seed, 0, k))) for k in range(trials)])
    mean_norm = float(norms.mean())
    c_hat = mean_norm / float(n) ** kappa1
    checks = []
    for tau in taus:
        bound = 1.0 / tau
        empirical = float(np.mean(norms > mean_norm * tau))
        se = math.sqrt(bound * (1.0 - bound) / trials) if bound < 1.0 else 0.0
        checks.append(
            {
                "tau": tau,
                "empirical": empirical,
                "bound": bound,
                "se": se,
                "pass": bool(empirical <= bound + 3.0 * se),
            }
        )
    summary = dict(_base_summary(norms))
    summary.update({"c_hat": c_hat, "kappa1": kappa1, "tails": checks})
    return ProbeResult(model, int(n), int(trials), "operator_norm", tuple(float(x) for x in norms), summary)


def anti_concentration_probe(
    d,
    model: str,
    trials: int,
    beta_list,
    seed: int,
    delta: float | None = None,
    gamma: float | None = None,
) -> ProbeResult:
    """Frequency of abnormally small ``s_min(D + G)`` over noise draws.

    For each ``beta`` reports the empirical frequency of
    ``s_min(D + G) <= N**-beta``.  When both ``delta`` and ``gamma`` are
    given (with ``delta >= N**-gamma``), also reports the rescaled variant:
    the frequency of ``s_min(D + delta G) <= N**-(gamma + beta)``.

    ``trials = 0`` is legal and yields undefined (None) frequencies.
    """
    d = as_matrix(d)
    if d.shape[0] != d.shape[1]:
        raise ValueError(f"D must be square, got shape {d.shape}")
    _check_kind(model)
    n = d.shape[0]
    betas = [float(b) for b in beta_list]
    rescaled = delta is not None or gamma is not None
    if rescaled:
        if delta is None or gamma is None:
            raise ValueError("the rescaled variant needs both delta and gamma")
        if delta < float(n) ** (-gamma):
            raise ValueError(f"rescaled variant assumes delta >= N^-gamma = {float(n) ** (-gamma):.3g}")
    if trials == 0:
        summary = {"mean": None, "quantiles": None, "frequencies": None, "rescaled_frequencies": None}
        return ProbeResult(model, n, 0, "smallest_singular_value", (), summary)
    smin = np.empty(trials)
    smin_rescaled = np.empty(trials) if rescaled else None
    for k in range(trials):
        g = sample(model, n, substream_seed(seed, 0, k))
        smin[k] = smallest_singular_value(d + g)
        if rescaled:
            smin_rescaled[k] = smallest_singular_value(d + delta * g)
    frequencies = [
        {"beta": b, "threshold": float(n) ** (-b), "frequency": float(np.mean(smin <= float(n) ** (-b)))}
        for b in betas
    ]
    rescaled_frequencies = None
    if rescaled:
        rescaled_frequencies = [
            {
                "beta": b,
                "threshold": float(n) ** (-(gamma + b)),
                "frequency": float(np.mean(smin_rescaled <= float(n) ** (-(gamma + b)))),
            }
            for b in betas
        ]
    summary = dict(_base_summary(smin))
    summary.update({"frequencies": frequencies, "rescaled_frequencies": rescaled_frequencies})
    return ProbeResult(model, n, int(trials), "smallest_singular_value", tuple(float(x) for x in smin), summary)
