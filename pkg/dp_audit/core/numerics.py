"""
Special functions and small dense linear algebra.

Standard normal CDF and quantile, Laurent-Massart chi-square thresholds,
SPD validation, extreme eigenvalues, Cholesky factors and quadratic forms.
All functions are pure.
"""

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg, special

from .errors import DomainError, NotSpdError, ShapeError

SYMMETRY_RTOL = 1e-12


@dataclass(frozen=True)
class EigenRange:
    """Smallest and largest eigenvalue of a symmetric matrix."""

    lambda_min: float
    lambda_max: float

    def __post_init__(self) -> None:
        if self.lambda_min > self.lambda_max:
            raise DomainError("lambda_min must not exceed lambda_max")


@dataclass(frozen=True, eq=False)
class SpdMatrix:
    """
    Validated symmetric positive definite matrix.

    Construction checks symmetry to relative tolerance 1e-12 and then
    attempts a Cholesky factorization; the factor is kept for sampling.
    """

    entries: NDArray[np.float64]
    lower: NDArray[np.float64] = field(repr=False)

    @classmethod
    def from_array(cls, values: ArrayLike) -> "SpdMatrix":
        matrix = np.array(values, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ShapeError(
                f"expected a square matrix, got shape {matrix.shape}"
            )
        if matrix.shape[0] == 0:
            raise ShapeError("matrix must have dimension at least 1")
        if not np.all(np.isfinite(matrix)):
            raise NotSpdError("non-finite", "matrix has non-finite entries")

        scale = float(np.max(np.abs(matrix)))
        asymmetry = float(np.max(np.abs(matrix - matrix.T)))
        if asymmetry > SYMMETRY_RTOL * max(scale, np.finfo(float).tiny):
            raise NotSpdError(
                "asymmetry",
                f"max |M - M^T| = {asymmetry:.3e} exceeds "
                f"{SYMMETRY_RTOL:g} relative to max |M| = {scale:.3e}",
            )
        matrix = 0.5 * (matrix + matrix.T)
        try:
            lower = linalg.cholesky(matrix, lower=True)
        except linalg.LinAlgError as e:
            raise NotSpdError("non-positive pivot", str(e)) from e

        matrix.setflags(write=False)
        lower.setflags(write=False)
        return cls(entries=matrix, lower=lower)

    @classmethod
    def identity(cls, dim: int) -> "SpdMatrix":
        return cls.from_array(np.eye(dim))

    @classmethod
    def diagonal(cls, values: ArrayLike) -> "SpdMatrix":
        return cls.from_array(np.diag(np.asarray(values, dtype=np.float64)))

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.entries, np.eye(self.dim)))

    def describe(self) -> str:
        """Short descriptor used in report provenance."""
        if self.is_identity():
            return "identity"
        if np.count_nonzero(self.entries - np.diag(np.diag(self.entries))):
            return "full"
        return "diagonal"

    def inverse(self) -> NDArray[np.float64]:
        inv = linalg.cho_solve((self.lower, True), np.eye(self.dim))
        return np.asarray(0.5 * (inv + inv.T))


SpdLike = Union[SpdMatrix, ArrayLike]


def as_spd(value: SpdLike) -> SpdMatrix:
    """Return value as a validated SpdMatrix."""
    if isinstance(value, SpdMatrix):
        return value
    return SpdMatrix.from_array(value)


def std_normal_cdf(x: float) -> float:
    """Standard normal CDF Phi(x)."""
    if not math.isfinite(x):
        raise DomainError(f"std_normal_cdf requires a finite input, got {x}")
    return float(special.ndtr(x))


def std_normal_cdf_array(values: ArrayLike) -> NDArray[np.float64]:
    """Vectorized Phi over finite values."""
    arr = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise DomainError("std_normal_cdf requires finite inputs")
    return np.asarray(special.ndtr(arr), dtype=np.float64)


def std_normal_quantile(q: float) -> float:
    """Inverse of the standard normal CDF on (0, 1)."""
    if not 0.0 < q < 1.0:
        raise DomainError(f"quantile level must lie in (0, 1), got {q}")
    return float(special.ndtri(q))


def chi_square_tail_thresholds(p: int, t: float) -> tuple[float, float]:
    """
    Laurent-Massart thresholds for the squared norm of a standard Gaussian
    vector in dimension p.

    Returns (max(0, p - 2 sqrt(pt)), p + 2 sqrt(pt) + 2t). Each side is
    violated with probability at most exp(-t).
    """
    if p < 1:
        raise DomainError(f"dimension must be at least 1, got {p}")
    if not t >= 0.0 or not math.isfinite(t):
        raise DomainError(f"t must be finite and nonnegative, got {t}")
    root = 2.0 * math.sqrt(p * t)
    return max(0.0, p - root), p + root + 2.0 * t


def eigen_range(matrix: SpdLike) -> EigenRange:
    """Extreme eigenvalues of an SPD matrix."""
    spd = as_spd(matrix)
    if spd.is_identity():
        return EigenRange(1.0, 1.0)
    eigenvalues = linalg.eigvalsh(spd.entries, check_finite=False)
    return EigenRange(float(eigenvalues[0]), float(eigenvalues[-1]))


def cholesky_factor(matrix: SpdLike) -> NDArray[np.float64]:
    """Lower-triangular L with L L^T = M."""
    return np.array(as_spd(matrix).lower)


def quadratic_form(x: ArrayLike, matrix: SpdLike) -> float:
    """x^T M x for an SPD matrix M."""
    spd = as_spd(matrix)
    vec = np.asarray(x, dtype=np.float64)
    if vec.shape != (spd.dim,):
        raise ShapeError(
            f"vector of shape {vec.shape} does not match matrix "
            f"dimension {spd.dim}"
        )
    return max(0.0, float(vec @ spd.entries @ vec))


def quadratic_forms(rows: NDArray[np.float64], matrix: SpdMatrix) -> NDArray:
    """Row-wise x_i^T M x_i for a 2-D array of vectors."""
    if rows.ndim != 2 or rows.shape[1] != matrix.dim:
        raise ShapeError(
            f"rows of shape {rows.shape} do not match matrix "
            f"dimension {matrix.dim}"
        )
    if matrix.is_identity():
        values = np.einsum("ij,ij->i", rows, rows)
    else:
        values = np.einsum("ij,jk,ik->i", rows, matrix.entries, rows)
    return np.maximum(values, 0.0)
