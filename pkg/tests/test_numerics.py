"""
Tests for the special functions and small linear algebra helpers.
"""

import math

import numpy as np
import pytest

from dp_audit.core.errors import DomainError, NotSpdError, ShapeError
from dp_audit.core.numerics import (
    EigenRange,
    SpdMatrix,
    chi_square_tail_thresholds,
    cholesky_factor,
    eigen_range,
    quadratic_form,
    std_normal_cdf,
    std_normal_cdf_array,
    std_normal_quantile,
)


def random_spd(rng: np.random.Generator, p: int) -> np.ndarray:
    a = rng.standard_normal((p, p))
    return a @ a.T + 0.1 * np.eye(p)


class TestNormalCdf:
    """Test cases for the standard normal CDF and quantile."""

    @pytest.mark.parametrize(
        "x, expected",
        [
            (0.0, 0.5),
            (-1.0, 0.15865525393145707),
            (3.0, 0.9986501019683699),
        ],
    )
    def test_known_values(self, x: float, expected: float) -> None:
        """Test CDF values against reference integrals."""
        assert std_normal_cdf(x) == pytest.approx(expected, abs=1e-14)

    def test_symmetry(self) -> None:
        """Test that Phi(x) + Phi(-x) = 1 on random inputs."""
        x = np.random.default_rng(0).uniform(-8.0, 8.0, 1000)
        total = std_normal_cdf_array(x) + std_normal_cdf_array(-x)
        np.testing.assert_allclose(total, 1.0, atol=1e-13)

    def test_non_finite_rejected(self) -> None:
        """Test that non-finite inputs raise a domain error."""
        with pytest.raises(DomainError):
            std_normal_cdf(math.inf)
        with pytest.raises(DomainError):
            std_normal_cdf_array([0.0, math.nan])

    @pytest.mark.parametrize(
        "q, expected",
        [
            (0.5, 0.0),
            (0.975, 1.959963984540054),
            (0.15865525393145707, -1.0),
        ],
    )
    def test_quantile_values(self, q: float, expected: float) -> None:
        """Test quantiles against inverted CDF values."""
        assert std_normal_quantile(q) == pytest.approx(expected, abs=1e-9)

    def test_quantile_inverts_cdf(self) -> None:
        """Test that quantile(cdf(x)) = x on [-6, 6]."""
        for x in np.linspace(-6.0, 6.0, 49):
            q = std_normal_cdf(float(x))
            assert std_normal_quantile(q) == pytest.approx(x, abs=1e-9)

    @pytest.mark.parametrize("q", [0.0, 1.0, -0.1, 1.5])
    def test_quantile_domain(self, q: float) -> None:
        """Test that levels outside (0, 1) are rejected."""
        with pytest.raises(DomainError):
            std_normal_quantile(q)


class TestChiSquareThresholds:
    """Test cases for the Laurent-Massart thresholds."""

    def test_zero_t(self) -> None:
        """Test that both thresholds equal p at t = 0."""
        assert chi_square_tail_thresholds(5, 0.0) == (5.0, 5.0)

    def test_lower_clamped(self) -> None:
        """Test that 4 - 2 sqrt(4) is clamped to exactly 0."""
        assert chi_square_tail_thresholds(4, 1.0) == (0.0, 10.0)

    def test_direct_evaluation(self) -> None:
        """Test the thresholds at p = 10, t = ln 2."""
        t = math.log(2.0)
        lower, upper = chi_square_tail_thresholds(10, t)
        assert lower == pytest.approx(10 - 2 * math.sqrt(10 * t))
        assert upper == pytest.approx(10 + 2 * math.sqrt(10 * t) + 2 * t)
        assert lower == pytest.approx(4.733, abs=1e-3)
        assert upper == pytest.approx(16.653, abs=1e-3)

    def test_invalid_arguments(self) -> None:
        """Test that p = 0 and negative t are rejected."""
        with pytest.raises(DomainError):
            chi_square_tail_thresholds(0, 1.0)
        with pytest.raises(DomainError):
            chi_square_tail_thresholds(3, -1.0)

    @pytest.mark.slow
    @pytest.mark.parametrize("p", [2, 10, 50])
    def test_tails_are_conservative(self, p: int) -> None:
        """Test that Gaussian squared norms leave the band at most zeta."""
        zeta = 0.05
        lower, upper = chi_square_tail_thresholds(p, math.log(2.0 / zeta))
        rng = np.random.default_rng(p)
        squared = np.sum(rng.standard_normal((100_000, p)) ** 2, axis=1)
        outside = np.mean((squared < lower) | (squared > upper))
        assert outside <= zeta


class TestSpdMatrix:
    """Test cases for SPD validation and eigenvalues."""

    def test_asymmetry_rejected(self) -> None:
        """Test that asymmetric input names the failing condition."""
        with pytest.raises(NotSpdError) as exc_info:
            SpdMatrix.from_array([[1.0, 0.5], [0.0, 1.0]])
        assert exc_info.value.condition == "asymmetry"

    def test_non_positive_pivot_rejected(self) -> None:
        """Test that an indefinite matrix fails at Cholesky."""
        with pytest.raises(NotSpdError) as exc_info:
            SpdMatrix.from_array([[1.0, 2.0], [2.0, 1.0]])
        assert exc_info.value.condition == "non-positive pivot"

    def test_non_square_rejected(self) -> None:
        """Test that non-square input raises a shape error."""
        with pytest.raises(ShapeError):
            SpdMatrix.from_array(np.ones((2, 3)))

    def test_entries_are_read_only(self) -> None:
        """Test that a validated matrix cannot be mutated."""
        spd = SpdMatrix.identity(2)
        with pytest.raises(ValueError):
            spd.entries[0, 0] = 5.0

    def test_describe(self) -> None:
        """Test the provenance descriptor."""
        assert SpdMatrix.identity(3).describe() == "identity"
        assert SpdMatrix.diagonal([1.0, 2.0]).describe() == "diagonal"
        full = SpdMatrix.from_array([[2.0, 1.0], [1.0, 2.0]])
        assert full.describe() == "full"

    @pytest.mark.parametrize(
        "matrix, expected",
        [
            (np.eye(7), (1.0, 1.0)),
            (np.diag([0.25, 4.0]), (0.25, 4.0)),
            (np.array([[2.0, 1.0], [1.0, 2.0]]), (1.0, 3.0)),
        ],
    )
    def test_eigen_range(self, matrix: np.ndarray, expected: tuple) -> None:
        """Test extreme eigenvalues of small matrices."""
        result = eigen_range(matrix)
        assert result.lambda_min == pytest.approx(expected[0], rel=1e-10)
        assert result.lambda_max == pytest.approx(expected[1], rel=1e-10)

    def test_eigen_range_ordering(self) -> None:
        """Test that EigenRange rejects an inverted pair."""
        with pytest.raises(DomainError):
            EigenRange(2.0, 1.0)

    @pytest.mark.parametrize(
        "matrix, expected",
        [
            (np.eye(3), np.eye(3)),
            (np.diag([4.0, 9.0]), np.diag([2.0, 3.0])),
            (
                np.array([[4.0, 2.0], [2.0, 5.0]]),
                np.array([[2.0, 0.0], [1.0, 2.0]]),
            ),
        ],
    )
    def test_cholesky_factor(
        self, matrix: np.ndarray, expected: np.ndarray
    ) -> None:
        """Test the lower-triangular factor and its reconstruction."""
        lower = cholesky_factor(matrix)
        np.testing.assert_allclose(lower, expected, atol=1e-12)
        np.testing.assert_allclose(
            lower @ lower.T, matrix, atol=1e-10 * np.max(np.abs(matrix))
        )


class TestQuadraticForm:
    """Test cases for x^T M x."""

    def test_known_values(self) -> None:
        """Test direct expansions."""
        assert quadratic_form([1.0, 0.0], np.eye(2)) == 1.0
        assert quadratic_form([1.0, 1.0], [[2.0, 1.0], [1.0, 2.0]]) == 6.0
        assert quadratic_form([0.0, 0.0], [[2.0, 1.0], [1.0, 2.0]]) == 0.0

    def test_dimension_mismatch(self) -> None:
        """Test that mismatched dimensions raise a shape error."""
        with pytest.raises(ShapeError):
            quadratic_form([1.0, 2.0, 3.0], np.eye(2))

    def test_rayleigh_bounds(self) -> None:
        """Test lambda_min |x|^2 <= x^T M x <= lambda_max |x|^2."""
        rng = np.random.default_rng(3)
        for _ in range(100):
            p = int(rng.integers(1, 13))
            spd = SpdMatrix.from_array(random_spd(rng, p))
            x = rng.standard_normal(p)
            spectrum = eigen_range(spd)
            value = quadratic_form(x, spd)
            squared = float(x @ x)
            assert value >= spectrum.lambda_min * squared * (1 - 1e-9)
            assert value <= spectrum.lambda_max * squared * (1 + 1e-9)
