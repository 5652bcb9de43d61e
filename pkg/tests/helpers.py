"""Shared generators for the test suite.

Random instances are derived from the package's own seeded sampler so every
test is reproducible; "random" below always means "pseudorandom from a fixed
root seed".
"""

import numpy as np

from logdet_equiv import build_grushin, invert_perturbed, operator_norm, sample, substream_seed


def gaussian_matrix(n, seed, key=0):
    """One complex-Ginibre test matrix, deterministic in (n, seed, key)."""
    return sample("complex_ginibre", int(n), substream_seed(int(seed), 777, int(key)))


def grushin_instance(seed, n_max=20, m_max=6, min_retained=0.05, min_m=0):
    """A random deflated system with a safe gap: t_{m+1} >= min_retained.

    Sizes and deflation counts are drawn uniformly (n in [2, n_max],
    m in [min_m, min(m_max, n-1)]); draws whose first retained singular
    value falls below ``min_retained`` are rejected and redrawn.
    """
    for attempt in range(500):
        key = substream_seed(int(seed), 99, attempt)
        rng = np.random.default_rng(key)
        n = int(rng.integers(max(2, min_m + 1), n_max + 1))
        m = int(rng.integers(min_m, min(m_max, n - 1) + 1))
        a = sample("complex_ginibre", n, substream_seed(key, 1))
        sys, blocks = build_grushin(a, m)
        if float(sys.svd.t[m]) >= min_retained:
            return sys, blocks
    raise RuntimeError("no admissible instance in 500 attempts")


def midpoint_alpha(sys):
    """The centre of the admissible cutoff window [t_m, t_{m+1}]."""
    t = sys.svd.t
    if sys.m == 0:
        return 0.5 * float(t[0])
    return 0.5 * (float(t[sys.m - 1]) + float(t[sys.m]))


def perturbed_instance(seed, contraction=0.3, method="direct", **kwargs):
    """(sys, blocks, pert) with delta tuned to hit ``contraction`` exactly."""
    sys, blocks = grushin_instance(seed, **kwargs)
    g = gaussian_matrix(sys.n, seed, key=12345)
    alpha = midpoint_alpha(sys)
    delta = contraction * alpha / operator_norm(g)
    pert = invert_perturbed(sys, g, delta, method, alpha=alpha)
    return sys, blocks, pert
