"""Dense complex linear algebra primitives.

Everything downstream works with one factorization shape: singular values
sorted *ascending* together with paired orthonormal systems ``(e_i, f_i)``
satisfying ``A e_i = t_i f_i`` and ``A^* f_i = t_i e_i``.  Determinants are
only ever handled in the log domain so that magnitudes like ``exp(+-1e6)``
never overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DimensionError",
    "NumericalError",
    "SvdFactorization",
    "as_matrix",
    "svd_paired",
    "svd_tolerance",
    "log_abs_det",
    "operator_norm",
    "smallest_singular_value",
]


class DimensionError(ValueError):
    """Input has the wrong shape for the requested operation."""


class NumericalError(RuntimeError):
    """A dense factorization failed to converge."""


def as_matrix(a) -> np.ndarray:
    """Coerce array-like input to a dense, finite, complex128 matrix.

    Raises
    ------
    DimensionError
        If the input is not 2-d or has a zero-length axis.
    ValueError
        If any entry is NaN or infinite.
    """
    m = np.ascontiguousarray(np.asarray(a, dtype=np.complex128))
    if m.ndim != 2:
        raise DimensionError(f"expected a 2-d matrix, got ndim={m.ndim}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionError(f"matrix must be at least 1x1, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise ValueError("matrix entries must be finite")
    return m


def _require_square(a: np.ndarray) -> np.ndarray:
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class SvdFactorization:
    """Singular value decomposition with ascending values and paired vectors.

    Attributes
    ----------
    t : (n,) float array
        Singular values sorted ascending: ``t[0] <= t[1] <= ...``.
    e : (n, n) complex array
        Right singular vectors as columns; ``e[:, i]`` pairs with ``t[i]``.
    f : (n, n) complex array
        Left singular vectors as columns, phased so that
        ``A @ e[:, i] == t[i] * f[:, i]`` (and hence
        ``A.conj().T @ f[:, i] == t[i] * e[:, i]``).
    """

    t: np.ndarray
    e: np.ndarray
    f: np.ndarray

    @property
    def n(self) -> int:
        return int(self.t.shape[0])

    @property
    def descending(self) -> np.ndarray:
        """Singular values in the conventional descending order."""
        return self.t[::-1]

    def pairing_residuals(self, a) -> dict:
        """Worst-case residuals of the defining relations against ``a``.

        Returns a dict with keys ``right`` (``max_i ||A e_i - t_i f_i||``),
        ``left`` (adjoint pairing), ``reconstruction`` (operator-norm defect
        of ``sum_i t_i f_i e_i^*``), ``gram_e`` and ``gram_f`` (orthonormality
        defects).
        """
        a = np.asarray(a, dtype=np.complex128)
        eye = np.eye(self.n)
        right = float(np.linalg.norm(a @ self.e - self.f * self.t, axis=0).max())
        left = float(np.linalg.norm(a.conj().T @ self.f - self.e * self.t, axis=0).max())
        recon = operator_norm((self.f * self.t) @ self.e.conj().T - a)
        gram_e = float(np.abs(self.e.conj().T @ self.e - eye).max())
        gram_f = float(np.abs(self.f.conj().T @ self.f - eye).max())
        return {
            "right": right,
            "left": left,
            "reconstruction": recon,
            "gram_e": gram_e,
            "gram_f": gram_f,
        }

    def verify(self, a, tol: float | None = None) -> None:
        """Raise :class:`NumericalError` if any pairing residual exceeds ``tol``."""
        if tol is None:
            tol = svd_tolerance(a)
        res = self.pairing_residuals(a)
        bad = {k: v for k, v in res.items() if v > tol}
        if bad:
            raise NumericalError(f"SVD pairing residuals exceed {tol:.3g}: {bad}")


def svd_tolerance(a) -> float:
    """Default residual tolerance for a paired SVD of ``a``."""
    return 1e-10 * max(1.0, operator_norm(a))


def svd_paired(a) -> SvdFactorization:
    """Factor a square matrix into ascending singular values and paired vectors.

    The returned systems satisfy ``A e_i = t_i f_i`` with ``t_i >= 0``;
    any residual unit phase from the backend factorization is absorbed
    into ``f`` so that the pairing holds exactly (up to roundoff), not
    just up to sign.
    """
    a = _require_square(as_matrix(a))
    try:
        u, s, vh = np.linalg.svd(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge on a {a.shape[0]}x{a.shape[1]} matrix") from exc
    t = np.ascontiguousarray(s[::-1])
    e = np.ascontiguousarray(vh.conj().T[:, ::-1])
    f = np.ascontiguousarray(u[:, ::-1])
    # Absorb any unit phase into f: replace f_i by (proj/|proj|) f_i where
    # proj = <f_i, A e_i>; for t_i = 0 the pairing is 0 = 0 and f_i is kept.
    proj = np.einsum("ij,ij->j", f.conj(), a @ e)
    mag = np.abs(proj)
    safe = np.where(mag > 0.0, mag, 1.0)
    phase = np.where(mag > 0.0, proj / safe, 1.0)
    return SvdFactorization(t=t, e=e, f=f * phase[np.newaxis, :])


def log_abs_det(a) -> float:
    """``log |det A|`` computed in the log domain.

    Returns ``-inf`` for a singular matrix and ``0.0`` for the empty
    (0 x 0) matrix, whose determinant is 1.  Never overflows: a diagonal
    matrix with entries ``exp(+-500)`` at n = 2000 yields ``+-1e6`` exactly.
    """
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] == 0:
        return 0.0
    sign, logdet = np.linalg.slogdet(a)
    if sign == 0:
        return float("-inf")
    return float(logdet)


def operator_norm(a) -> float:
    """Largest singular value; 0.0 for an empty block."""
    a = np.asarray(a, dtype=np.complex128)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def smallest_singular_value(a) -> float:
    """Smallest singular value; 0.0 for an empty block."""
    a = np.asarray(a, dtype=np.complex128)
    if a.size == 0:
        return 0.0
    try:
        s = np.linalg.svd(a, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("SVD did not converge while computing s_min") from exc
    return float(s[-1])
