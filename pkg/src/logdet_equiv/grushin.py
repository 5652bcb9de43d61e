"""Grushin augmentation of a square matrix around its smallest singular values.

Deflating the ``m`` smallest singular directions of ``A`` produces the
``(n + m) x (n + m)`` block system::

    P = [[ A,   R_minus ],          R_plus  = sum_i  delta_i e_i^*   (m x n)
         [ R_plus,   0  ]]          R_minus = sum_i  f_i delta_i^*   (n x m)

which is invertible whenever the retained singular values ``t_{m+1} <= ...``
are positive, with closed-form inverse blocks::

    E          = sum_{i>m} (1/t_i) e_i f_i^*      "inverse off the deflated space"
    E_plus     = sum_{i<=m} e_i delta_i^*
    E_minus    = sum_{i<=m} delta_i f_i^*
    E_minus_plus = -diag(t_1, ..., t_m)

Everything here treats that construction as executable algebra: building the
blocks, inverting the noisy variant ``A + delta G`` both directly and by a
Neumann series, and checking the determinant/Schur identities and norm
bounds the blocks satisfy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import (
    DimensionError,
    NumericalError,
    SvdFactorization,
    as_matrix,
    log_abs_det,
    operator_norm,
    svd_paired,
)

__all__ = [
    "DeflationError",
    "ContractionError",
    "CheckRecord",
    "GrushinSystem",
    "InverseBlocks",
    "PerturbedSystem",
    "build_grushin",
    "inverse_blocks",
    "assemble",
    "assemble_perturbed",
    "grushin_det_identity",
    "invert_perturbed",
    "default_alpha",
    "schur_logdet",
    "perturbation_drift_bound",
    "interlacing_check",
    "norm_estimates",
    "perturbed_norm_estimates",
    "neumann_tail_bound",
]


class DeflationError(ValueError):
    """The first retained singular value is zero, so the system is singular."""


class ContractionError(ValueError):
    """The Neumann series does not contract for these parameters."""


@dataclass(frozen=True)
class CheckRecord:
    """One verified inequality or identity.

    ``check`` names the relation, ``n`` is an optional index (singular value
    rank, trial, ...), ``lhs``/``rhs`` are the two sides as evaluated, and
    ``bound`` is the slack that was allowed on top of ``rhs``.
    """

    check: str
    n: int | None
    lhs: float
    rhs: float
    bound: float
    passed: bool

    @property
    def excess(self) -> float:
        """How far the left side exceeded the right (negative = comfortable)."""
        return self.lhs - self.rhs

    def as_dict(self) -> dict:
        return {
            "check": self.check,
            "n": self.n,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "bound": self.bound,
            "pass": self.passed,
        }


def _leq(check: str, n: int | None, lhs: float, rhs: float, slack: float) -> CheckRecord:
    return CheckRecord(check, n, float(lhs), float(rhs), slack, bool(lhs <= rhs + slack))


def _eq(check: str, n: int | None, lhs: float, rhs: float, slack: float) -> CheckRecord:
    return CheckRecord(check, n, float(lhs), float(rhs), slack, bool(abs(lhs - rhs) <= slack))


@dataclass(frozen=True)
class GrushinSystem:
    """A matrix together with its deflation data."""

    a: np.ndarray
    m: int
    r_plus: np.ndarray
    r_minus: np.ndarray
    svd: SvdFactorization

    @property
    def n(self) -> int:
        return int(self.a.shape[0])

    @property
    def retained(self) -> np.ndarray:
        """Singular values kept out of the deflated space (ascending)."""
        return self.svd.t[self.m:]

    @property
    def deflated(self) -> np.ndarray:
        """The m smallest singular values (ascending)."""
        return self.svd.t[: self.m]


@dataclass(frozen=True)
class InverseBlocks:
    """Blocks of the inverse of an assembled system."""

    e: np.ndarray
    e_plus: np.ndarray
    e_minus: np.ndarray
    e_minus_plus: np.ndarray

    def assembled(self) -> np.ndarray:
        return np.block([[self.e, self.e_plus], [self.e_minus, self.e_minus_plus]])


@dataclass(frozen=True)
class PerturbedSystem:
    """Inverse blocks of the assembled system for ``A + delta G``."""

    base: GrushinSystem
    g: np.ndarray
    delta: float
    alpha: float
    blocks: InverseBlocks
    norm_g: float
    contraction: float

    @property
    def within_contraction(self) -> bool:
        """Whether ``delta * ||G|| / alpha <= 1/2`` (Neumann regime)."""
        return self.contraction <= 0.5

    @property
    def a_delta(self) -> np.ndarray:
        return self.base.a + self.delta * self.g


def build_grushin(a, m: int) -> tuple[GrushinSystem, InverseBlocks]:
    """Deflate the ``m`` smallest singular directions of ``a``.

    Returns the augmented system and the closed-form inverse blocks of its
    assembled matrix.

    Raises
    ------
    DeflationError
        If ``t_{m+1} = 0`` (the deflation does not cover the kernel).
    DimensionError
        If ``m`` is outside ``[0, n]`` or ``a`` is not square.
    """
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if not isinstance(m, (int, np.integer)) or isinstance(m, bool):
        raise DimensionError(f"deflation count must be an integer, got {m!r}")
    if not 0 <= m <= n:
        raise DimensionError(f"deflation count must lie in [0, {n}], got {m}")
    svd = svd_paired(a)
    if m < n and svd.t[m] == 0.0:
        raise DeflationError(
            f"retained singular value t_{m + 1} is exactly zero; "
            f"a deflation count of {m} leaves the system singular"
        )
    e_lo = svd.e[:, :m]
    f_lo = svd.f[:, :m]
    sys = GrushinSystem(
        a=a,
        m=int(m),
        r_plus=np.ascontiguousarray(e_lo.conj().T),
        r_minus=np.ascontiguousarray(f_lo),
        svd=svd,
    )
    return sys, inverse_blocks(sys)


def inverse_blocks(sys: GrushinSystem) -> InverseBlocks:
    """Closed-form inverse blocks of :func:`assemble`, straight from the SVD."""
    svd, m = sys.svd, sys.m
    t_hi = svd.t[m:]
    e_blk = (svd.e[:, m:] / t_hi) @ svd.f[:, m:].conj().T
    return InverseBlocks(
        e=e_blk,
        e_plus=svd.e[:, :m].copy(),
        e_minus=np.ascontiguousarray(svd.f[:, :m].conj().T),
        e_minus_plus=-np.diag(svd.t[:m]).astype(np.complex128),
    )


def assemble(sys: GrushinSystem) -> np.ndarray:
    """The ``(n + m) x (n + m)`` block matrix ``[[A, R_minus], [R_plus, 0]]``."""
    zero = np.zeros((sys.m, sys.m), dtype=np.complex128)
    return np.block([[sys.a, sys.r_minus], [sys.r_plus, zero]])


def assemble_perturbed(pert: PerturbedSystem) -> np.ndarray:
    """Same block layout with ``A`` replaced by ``A + delta G``."""
    sys = pert.base
    zero = np.zeros((sys.m, sys.m), dtype=np.complex128)
    return np.block([[pert.a_delta, sys.r_minus], [sys.r_plus, zero]])


def grushin_det_identity(sys: GrushinSystem) -> tuple[float, float]:
    """Both sides of ``2 log |det P| = sum_{i>m} 2 log t_i``.

    The identity says the assembled system forgets the deflated singular
    values entirely: ``|det P|^2`` equals the product of the retained
    ``t_i^2``.  Returns ``(lhs, rhs)``; both are ``-inf`` when a retained
    singular value vanishes.
    """
    lhs = 2.0 * log_abs_det(assemble(sys))
    t_hi = sys.retained
    if t_hi.size and float(t_hi[0]) == 0.0:
        rhs = float("-inf")
    else:
        rhs = 2.0 * math.fsum(math.log(float(t)) for t in t_hi)
    return lhs, rhs


def default_alpha(sys: GrushinSystem) -> float:
    """Natural cutoff attached to the deflation: ``t_{m+1}`` (``inf`` if m = n)."""
    return float(sys.svd.t[sys.m]) if sys.m < sys.n else math.inf


def invert_perturbed(
    sys: GrushinSystem,
    g,
    delta: float,
    method: str = "direct",
    *,
    alpha: float | None = None,
    n_terms: int = 30,
) -> PerturbedSystem:
    """Invert the assembled system of ``A + delta G``.

    Parameters
    ----------
    method : {"direct", "neumann"}
        ``direct`` inverts the assembled ``(n+m) x (n+m)`` matrix densely.
        ``neumann`` expands around the unperturbed blocks::

            E^d          = sum_k (-delta)^k E (G E)^k
            E^d_plus     = sum_k (-delta)^k (E G)^k E_plus
            E^d_minus    = sum_k (-delta)^k E_minus (G E)^k
            E^d_minus_plus = E_minus_plus
                           + sum_{k>=1} (-delta)^k E_minus (G E)^{k-1} G E_plus

        and requires the contraction ``delta ||G|| / alpha <= 1/2``.
    alpha : float, optional
        Cutoff used for the contraction ratio.  Defaults to ``t_{m+1}``
        (the natural scale of ``1/||E||``); ``inf`` when ``m = n``.
    n_terms : int
        Highest power of ``delta`` retained by the Neumann expansion.

    Raises
    ------
    ContractionError
        If ``method="neumann"`` and the contraction exceeds 1/2.
    NumericalError
        If ``method="direct"`` and the assembled matrix is singular.
    """
    g = as_matrix(g)
    if g.shape != sys.a.shape:
        raise DimensionError(f"perturbation shape {g.shape} does not match matrix shape {sys.a.shape}")
    delta = float(delta)
    if delta < 0 or not math.isfinite(delta):
        raise ValueError(f"delta must be finite and >= 0, got {delta}")
    if alpha is None:
        alpha = default_alpha(sys)
    alpha = float(alpha)
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    norm_g = operator_norm(g)
    contraction = 0.0 if delta == 0.0 else delta * norm_g / alpha

    n, m = sys.n, sys.m
    if method == "direct":
        zero = np.zeros((m, m), dtype=np.complex128)
        p = np.block([[sys.a + delta * g, sys.r_minus], [sys.r_plus, zero]])
        try:
            inv = np.linalg.inv(p)
        except np.linalg.LinAlgError as exc:
            raise NumericalError("assembled perturbed system is singular") from exc
        blocks = InverseBlocks(
            e=np.ascontiguousarray(inv[:n, :n]),
            e_plus=np.ascontiguousarray(inv[:n, n:]),
            e_minus=np.ascontiguousarray(inv[n:, :n]),
            e_minus_plus=np.ascontiguousarray(inv[n:, n:]),
        )
    elif method == "neumann":
        if contraction > 0.5:
            raise ContractionError(
                f"delta * ||G|| / alpha = {contraction:.4g} exceeds 1/2; the Neumann series need not converge"
            )
        blocks = _neumann_blocks(sys, g, delta, n_terms)
    else:
        raise ValueError(f"unknown inversion method {method!r}; use 'direct' or 'neumann'")

    return PerturbedSystem(
        base=sys,
        g=g,
        delta=delta,
        alpha=alpha,
        blocks=blocks,
        norm_g=norm_g,
        contraction=float(contraction),
    )


def _neumann_blocks(sys: GrushinSystem, g: np.ndarray, delta: float, n_terms: int) -> InverseBlocks:
    base = inverse_blocks(sys)
    if delta == 0.0 or n_terms == 0:
        # Empty series: the perturbed blocks are exactly the unperturbed ones.
        return base
    ge = g @ base.e
    g_eplus = g @ base.e_plus
    e_acc = base.e.copy()
    eplus_acc = base.e_plus.copy()
    eminus_acc = base.e_minus.copy()
    corner_acc = base.e_minus_plus.copy()
    power = np.eye(sys.n, dtype=np.complex128)  # (G E)^{k-1}
    coef = 1.0
    for _ in range(n_terms):
        coef *= -delta
        nxt = power @ ge  # (G E)^k
        e_acc += coef * (base.e @ nxt)
        eminus_acc += coef * (base.e_minus @ nxt)
        mid = power @ g_eplus  # (G E)^{k-1} G E_plus
        eplus_acc += coef * (base.e @ mid)
        corner_acc += coef * (base.e_minus @ mid)
        power = nxt
    return InverseBlocks(e=e_acc, e_plus=eplus_acc, e_minus=eminus_acc, e_minus_plus=corner_acc)


def neumann_tail_bound(contraction: float, alpha: float, n_terms: int) -> float:
    """Geometric bound on the truncation error of the Neumann blocks.

    With ratio ``q = delta ||G|| / alpha <= 1/2``, every discarded term of
    order ``k > n_terms`` is bounded by ``q^k`` times the relevant block
    scale (at most ``2/alpha`` for ``E``, 2 for the mixed blocks, and
    ``alpha`` for the corner); summing the geometric tail gives a factor
    ``q^{n_terms+1} / (1 - q)``.
    """
    q = float(contraction)
    if q >= 1.0:
        return math.inf
    scale = max(2.0 / alpha, 2.0, alpha)
    return q ** (n_terms + 1) / (1.0 - q) * scale


def _check_pairing(sys: GrushinSystem, pert: PerturbedSystem) -> None:
    if pert.base is not sys and (pert.base.m != sys.m or pert.base.a.shape != sys.a.shape):
        raise ValueError("perturbed system does not belong to the given Grushin system")


def schur_logdet(sys: GrushinSystem, pert: PerturbedSystem) -> tuple[float, float]:
    """Both sides of ``log |det (A + delta G)| = log |det P^d| + log |det E^d_minus_plus|``.

    The right side is the Schur-complement factorization through the
    assembled system; ``-inf`` values propagate (a singular corner forces a
    singular ``A + delta G`` and vice versa).
    """
    _check_pairing(sys, pert)
    lhs = log_abs_det(pert.a_delta)
    rhs = log_abs_det(assemble_perturbed(pert)) + log_abs_det(pert.blocks.e_minus_plus)
    return lhs, rhs


def perturbation_drift_bound(sys: GrushinSystem, pert: PerturbedSystem) -> tuple[float, float]:
    """Observed and guaranteed drift of ``(1/n) log |det P|`` under the noise.

    Returns ``(drift, bound)`` where ``drift = |(1/n)(log|det P^d| - log|det P|)``
    and ``bound = 2 delta ||G|| / alpha``, valid in the contraction regime.
    """
    _check_pairing(sys, pert)
    lhs = log_abs_det(assemble_perturbed(pert))
    base = log_abs_det(assemble(sys))
    drift = abs(lhs - base) / sys.n
    bound = 2.0 * pert.contraction
    return float(drift), float(bound)


def interlacing_check(sys: GrushinSystem, pert: PerturbedSystem, slack: float = 1e-9) -> list[CheckRecord]:
    """Two-sided control of the small singular values of ``A + delta G``.

    For each ``i <= m``, the ``i``-th smallest singular value of the full
    matrix is squeezed by the corner block::

        t_i(Ed_mp) / (||Ed|| t_i(Ed_mp) + ||Ed_minus|| ||Ed_plus||)
            <= t_i(A + delta G) <= ||R_plus|| ||R_minus|| t_i(Ed_mp)

    and, because the injections here are isometries, the upper bound also
    holds with constant 1.  Returns one record per inequality per index.
    """
    _check_pairing(sys, pert)
    m = sys.m
    if m == 0:
        return []
    t_full = np.linalg.svd(pert.a_delta, compute_uv=False)[::-1]  # ascending
    corner = pert.blocks.e_minus_plus
    t_corner = np.linalg.svd(corner, compute_uv=False)[::-1]
    norm_e = operator_norm(pert.blocks.e)
    norm_eplus = operator_norm(pert.blocks.e_plus)
    norm_eminus = operator_norm(pert.blocks.e_minus)
    norm_r = operator_norm(sys.r_plus) * operator_norm(sys.r_minus)
    records: list[CheckRecord] = []
    for i in range(m):
        tc = float(t_corner[i])
        ta = float(t_full[i])
        denom = norm_e * tc + norm_eminus * norm_eplus
        lower = tc / denom if denom > 0 else 0.0
        records.append(_leq("interlacing_lower", i + 1, lower, ta, slack))
        records.append(_leq("interlacing_upper", i + 1, ta, norm_r * tc, slack))
        records.append(_leq("interlacing_isometric", i + 1, ta, tc, slack))
    return records


def norm_estimates(sys: GrushinSystem, blocks: InverseBlocks, alpha: float, slack: float = 1e-12) -> list[CheckRecord]:
    """Norm bounds on the unperturbed inverse blocks at a cutoff ``alpha``.

    Requires ``t_m <= alpha <= t_{m+1}``; then ``||E|| <= 1/alpha``,
    ``||E_plus|| = ||E_minus|| = 1`` (when ``m >= 1``) and
    ``||E_minus_plus|| <= alpha``.
    """
    t, m, n = sys.svd.t, sys.m, sys.n
    lo = float(t[m - 1]) if m >= 1 else 0.0
    hi = float(t[m]) if m < n else math.inf
    if not lo <= alpha <= hi:
        raise ValueError(f"alpha = {alpha} outside the deflation window [{lo}, {hi}]")
    records = [
        _leq("norm_e", None, operator_norm(blocks.e), 1.0 / alpha if alpha > 0 else math.inf, slack),
        _leq("norm_e_minus_plus", None, operator_norm(blocks.e_minus_plus), alpha, slack),
    ]
    if m >= 1:
        records.append(_eq("norm_e_plus", None, operator_norm(blocks.e_plus), 1.0, slack))
        records.append(_eq("norm_e_minus", None, operator_norm(blocks.e_minus), 1.0, slack))
    return records


def perturbed_norm_estimates(pert: PerturbedSystem, slack: float = 1e-12) -> list[CheckRecord]:
    """Norm bounds on the perturbed blocks, valid in the contraction regime.

    ``||E^d|| <= 2/alpha``, ``||E^d_plus|| <= 2``, ``||E^d_minus|| <= 2``,
    and the corner moves by at most ``2 delta ||G||`` (itself at most
    ``alpha`` when the contraction holds).
    """
    if not pert.within_contraction:
        raise ContractionError(
            f"perturbed norm bounds assume delta * ||G|| / alpha <= 1/2, got {pert.contraction:.4g}"
        )
    base = inverse_blocks(pert.base)
    alpha = pert.alpha
    corner_move = operator_norm(pert.blocks.e_minus_plus - base.e_minus_plus)
    records = [
        _leq("perturbed_norm_e", None, operator_norm(pert.blocks.e), 2.0 / alpha, slack),
        _leq("perturbed_norm_e_plus", None, operator_norm(pert.blocks.e_plus), 2.0, slack),
        _leq("perturbed_norm_e_minus", None, operator_norm(pert.blocks.e_minus), 2.0, slack),
        _leq("corner_drift", None, corner_move, 2.0 * pert.delta * pert.norm_g, slack),
    ]
    if math.isfinite(alpha):
        records.append(_leq("corner_drift_alpha", None, corner_move, alpha, slack))
    return records
