"""
Closed-form expectations and high-probability bounds under perturbation.

Everything is driven by the angular margins alpha_i of the non-private
model: a private model classifies example i correctly with probability
Phi(alpha_i / sigma), independently of the dimension. With sigma = 0 the
mechanism is deterministic and every expectation falls back to its
empirical counterpart.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import special

from ..core.errors import DegenerateGroupError, DomainError, ShapeError
from ..core.logging import get_logger
from ..core.numerics import chi_square_tail_thresholds, eigen_range
from ..models.dataset import LabeledDataset
from ..models.linear import (
    LinearModel,
    angular_margin,
    angular_margins,
    individual_fairness_constant,
    predict_labels,
)
from ..privacy.mechanism import NoiseSpec
from .measures import FairnessMeasure

logger = get_logger(__name__)

ACCURACY_RANGE = (0.0, 1.0)
FAIRNESS_RANGE = (-1.0, 1.0)

Target = Union[int, str]


def _check_zeta(zeta: float) -> None:
    if not 0.0 < zeta < 1.0:
        raise DomainError(f"zeta must lie in (0, 1), got {zeta}")


@dataclass(frozen=True, eq=False)
class MarginProfile:
    """
    Angular margins and correctness of a model on a dataset.

    Margins depend on Sigma but not on sigma, so one profile serves a whole
    sweep over noise levels.
    """

    margins: NDArray[np.float64]
    correct: NDArray[np.bool_]

    @classmethod
    def build(
        cls, model: LinearModel, noise: NoiseSpec, dataset: LabeledDataset
    ) -> "MarginProfile":
        noise.check_model(model)
        covariance = (
            None if noise.covariance.is_identity() else noise.covariance
        )
        alpha = angular_margins(
            model, dataset.features, dataset.labels, covariance
        )
        correct = predict_labels(model, dataset.features) == dataset.labels
        return cls(margins=alpha, correct=correct)

    def _select(self, indices: Optional[NDArray[np.intp]]) -> slice | NDArray:
        if indices is None:
            return slice(None)
        if indices.size == 0:
            raise DegenerateGroupError("group view is empty")
        return indices

    def empirical_accuracy(
        self, indices: Optional[NDArray[np.intp]] = None
    ) -> float:
        return float(np.mean(self.correct[self._select(indices)]))

    def expected_accuracy(
        self, sigma: float, indices: Optional[NDArray[np.intp]] = None
    ) -> float:
        if sigma == 0.0:
            return self.empirical_accuracy(indices)
        alpha = self.margins[self._select(indices)]
        return float(np.mean(special.ndtr(alpha / sigma)))

    def accuracy_variance(
        self, sigma: float, indices: Optional[NDArray[np.intp]] = None
    ) -> float:
        """
        Mean over all ordered pairs (i, j), i = j included, of
        Phi(min(a_i, a_j)/sigma) Phi(-max(a_i, a_j)/sigma).

        After sorting, pair (i < j) contributes up_i * down_j, so the double
        sum reduces to a prefix sum.
        """
        alpha = self.margins[self._select(indices)]
        if sigma == 0.0:
            return 0.0
        scaled = np.sort(alpha) / sigma
        up = special.ndtr(scaled)
        down = special.ndtr(-scaled)
        before = np.cumsum(up) - up
        total = float(np.sum(up * down) + 2.0 * np.sum(down * before))
        return total / float(alpha.size) ** 2

    def disagreement_probabilities(self, sigma: float) -> NDArray[np.float64]:
        if sigma == 0.0:
            return np.zeros_like(self.margins)
        return np.asarray(special.ndtr(-np.abs(self.margins) / sigma))

    def group_expected_accuracies(
        self, sigma: float, measure: FairnessMeasure
    ) -> NDArray[np.float64]:
        return np.array(
            [self.expected_accuracy(sigma, g.indices) for g in measure.groups]
        )

    def group_empirical_accuracies(
        self, measure: FairnessMeasure
    ) -> NDArray[np.float64]:
        return np.array(
            [self.empirical_accuracy(g.indices) for g in measure.groups]
        )

    def fairness_variance(
        self, sigma: float, measure: FairnessMeasure, k: Target
    ) -> float:
        row = measure.coefficients[measure.target_index(k)]
        total = 0.0
        for coefficient, group in zip(row, measure.groups):
            if coefficient != 0.0:
                variance = self.accuracy_variance(sigma, group.indices)
                total += abs(coefficient) * math.sqrt(variance)
        return total**2


def empirical_accuracy(model: LinearModel, dataset: LabeledDataset) -> float:
    """Fraction of examples whose predicted label equals the true label."""
    return float(
        np.mean(predict_labels(model, dataset.features) == dataset.labels)
    )


def empirical_fairness(
    model: LinearModel,
    dataset: LabeledDataset,
    measure: FairnessMeasure,
    k: Target,
) -> float:
    """Per-group empirical accuracies plugged into the coefficient form."""
    measure.check_dataset(dataset)
    correct = predict_labels(model, dataset.features) == dataset.labels
    accuracies = np.array(
        [float(np.mean(correct[g.indices])) for g in measure.groups]
    )
    return measure.combine(k, accuracies)


def expected_accuracy(
    model: LinearModel, noise: NoiseSpec, dataset: LabeledDataset
) -> float:
    """E over private models of their accuracy: mean of Phi(alpha/sigma)."""
    return MarginProfile.build(model, noise, dataset).expected_accuracy(
        noise.sigma
    )


def expected_fairness(
    model: LinearModel,
    noise: NoiseSpec,
    dataset: LabeledDataset,
    measure: FairnessMeasure,
    k: Target,
) -> float:
    """Coefficient combination of per-group expected accuracies."""
    measure.check_dataset(dataset)
    profile = MarginProfile.build(model, noise, dataset)
    return measure.combine(
        k, profile.group_expected_accuracies(noise.sigma, measure)
    )


def accuracy_variance_bound(
    model: LinearModel, noise: NoiseSpec, dataset: LabeledDataset
) -> float:
    """Upper bound on the variance of accuracy over private models."""
    return MarginProfile.build(model, noise, dataset).accuracy_variance(
        noise.sigma
    )


def fairness_variance_bound(
    model: LinearModel,
    noise: NoiseSpec,
    dataset: LabeledDataset,
    measure: FairnessMeasure,
    k: Target,
) -> float:
    """[sum_k' |C_k^k'| sqrt(V_A(D_k'))]^2."""
    measure.check_dataset(dataset)
    profile = MarginProfile.build(model, noise, dataset)
    return profile.fairness_variance(noise.sigma, measure, k)


@dataclass(frozen=True)
class ConfidenceInterval:
    """Chebyshev interval, clipped and raw."""

    lower: float
    upper: float
    raw_lower: float
    raw_upper: float


def confidence_interval(
    expected: float,
    variance_bound: float,
    zeta: float,
    natural_range: tuple[float, float] = (-math.inf, math.inf),
) -> ConfidenceInterval:
    """expected +/- sqrt(variance_bound / zeta), clipped to the range."""
    _check_zeta(zeta)
    if variance_bound < 0.0:
        raise DomainError("variance bound must be nonnegative")
    radius = math.sqrt(variance_bound / zeta)
    raw_lower, raw_upper = expected - radius, expected + radius
    lo, hi = natural_range
    return ConfidenceInterval(
        lower=max(lo, raw_lower),
        upper=min(hi, raw_upper),
        raw_lower=raw_lower,
        raw_upper=raw_upper,
    )


def disagreement_probability(
    model: LinearModel, noise: NoiseSpec, x: ArrayLike, y: int
) -> float:
    """Probability that a private model flips the prediction on x."""
    noise.check_model(model)
    alpha = angular_margin(model, x, y, noise.covariance)
    if noise.sigma == 0.0:
        return 0.0
    return float(special.ndtr(-abs(alpha) / noise.sigma))


def disagreement_ratio_bound(
    model: LinearModel,
    noise: NoiseSpec,
    dataset: LabeledDataset,
    zeta: float,
) -> float:
    """
    With probability 1 - zeta the fraction of examples on which the private
    model disagrees with h is at most mean Phi(-|alpha|/sigma) / zeta. The
    raw value is returned; it may exceed 1.
    """
    _check_zeta(zeta)
    profile = MarginProfile.build(model, noise, dataset)
    probabilities = profile.disagreement_probabilities(noise.sigma)
    return float(np.mean(probabilities)) / zeta


@dataclass(frozen=True)
class NormBounds:
    """High-probability bounds on the norm of the private weights."""

    upper: float
    lower: float
    upper_two_sided: float


def norm_bounds(
    model: LinearModel, noise: NoiseSpec, zeta: float
) -> NormBounds:
    """
    upper: ||theta|| + sigma sqrt(l_max) sqrt(p + 2 sqrt(p t1) + 2 t1) with
    t1 = ln(1/zeta), a one-sided statement. lower and upper_two_sided use
    t2 = ln(2/zeta) and hold jointly with probability 1 - zeta.
    """
    _check_zeta(zeta)
    noise.check_model(model)
    norm = individual_fairness_constant(model)
    if noise.sigma == 0.0:
        return NormBounds(upper=norm, lower=norm, upper_two_sided=norm)

    p = model.dim
    spectrum = eigen_range(noise.covariance)
    top = noise.sigma * math.sqrt(spectrum.lambda_max)
    bottom = noise.sigma * math.sqrt(spectrum.lambda_min)

    _, upper_one = chi_square_tail_thresholds(p, math.log(1.0 / zeta))
    lower_two, upper_two = chi_square_tail_thresholds(p, math.log(2.0 / zeta))

    upper = norm + top * math.sqrt(upper_one)
    upper_two_sided = norm + top * math.sqrt(upper_two)
    lower = max(
        norm - top * math.sqrt(upper_two),
        bottom * math.sqrt(lower_two) - norm,
        0.0,
    )
    return NormBounds(
        upper=upper, lower=lower, upper_two_sided=upper_two_sided
    )


def margin_comparison_bound(
    model: LinearModel,
    noise: NoiseSpec,
    dataset: LabeledDataset,
    zeta: float,
    measure: Optional[FairnessMeasure] = None,
    k: Optional[Target] = None,
    indices: Optional[NDArray[np.intp]] = None,
    profile: Optional[MarginProfile] = None,
) -> float:
    """
    Half-width of the Lipschitz-margin interval F_k(h) +/- P with
    P = sum_k' |C_k^k'| P_{D_k'}[|alpha| <= 2 sigma sqrt(p ln(2/zeta))].
    Without a measure the accuracy version (single group, coefficient 1) is
    returned, over `indices` when given. Unlike the Chebyshev interval it
    grows with sqrt(p).

    A profile built for the same model, noise and dataset can be passed to
    skip recomputing the margins.
    """
    _check_zeta(zeta)
    profile = profile or MarginProfile.build(model, noise, dataset)
    threshold = 2.0 * noise.sigma * math.sqrt(model.dim * math.log(2.0 / zeta))
    close = np.abs(profile.margins) <= threshold
    if measure is None:
        return float(np.mean(close[profile._select(indices)]))
    if k is None:
        raise DomainError("a target group is required with a measure")
    measure.check_dataset(dataset)
    row = measure.coefficients[measure.target_index(k)]
    return float(
        sum(
            abs(c) * float(np.mean(close[g.indices]))
            for c, g in zip(row, measure.groups)
            if c != 0.0
        )
    )


def finite_sample_precondition(
    group_props: Sequence[float], kappa: float
) -> float:
    """Smallest n with n >= 8 ln((2K+1)/kappa) / min_k p_k."""
    if not 0.0 < kappa < 1.0:
        raise DomainError(f"kappa must lie in (0, 1), got {kappa}")
    props = np.asarray(group_props, dtype=np.float64)
    if props.size == 0 or np.any(props <= 0.0):
        raise DomainError("group proportions must be positive")
    K = props.size
    return 8.0 * math.log((2 * K + 1) / kappa) / float(np.min(props))


def finite_sample_correction(
    n: int,
    K: int,
    group_props: Sequence[float],
    coeff_abs: Sequence[float],
    kappa: float,
    d_h: int,
    b3: float = 1.0,
    b4: float = 1.0,
    label_count: int = 2,
) -> float:
    """
    Width t added on both sides of the Chebyshev interval to move from the
    empirical distribution of the dataset to the population:

        t = sqrt(ln(B3 (2K+1)/kappa) / (B4 n))
            + sum_k' 8 |C_k^k'| sqrt((d_H ln(n p_k'/2 + 2 ln|Y|)
                                      + ln(8 (2K+1)/kappa)) / (n p_k'))

    Below the sample-size condition the value is still returned (and
    logged); it is then vacuous.
    """
    if n < 1 or K < 1 or d_h < 1:
        raise DomainError("n, K and d_H must be positive")
    if not 0.0 < kappa < 1.0:
        raise DomainError(f"kappa must lie in (0, 1), got {kappa}")
    if b3 <= 0.0 or b4 <= 0.0:
        raise DomainError("B3 and B4 must be positive")
    props = np.asarray(group_props, dtype=np.float64)
    coeffs = np.abs(np.asarray(coeff_abs, dtype=np.float64))
    if props.shape != (K,) or coeffs.shape != (K,):
        raise ShapeError("need one proportion and one coefficient per group")
    if np.any(props <= 0.0):
        raise DomainError("group proportions must be positive")

    t = math.sqrt(math.log(b3 * (2 * K + 1) / kappa) / (b4 * n))
    log_labels = 2.0 * math.log(label_count)
    confidence = math.log(8.0 * (2 * K + 1) / kappa)
    for c, p_k in zip(coeffs, props):
        if c == 0.0:
            continue
        size = n * p_k
        complexity = d_h * math.log(size / 2.0 + log_labels) + confidence
        t += 8.0 * c * math.sqrt(complexity / size)

    required = finite_sample_precondition(props, kappa)
    if n < required:
        logger.warning(
            "Finite-sample condition not met; correction is vacuous",
            n=n,
            required_n=required,
        )
    return t


def accuracy_interval(
    model: LinearModel,
    noise: NoiseSpec,
    dataset: LabeledDataset,
    zeta: float,
    indices: Optional[NDArray[np.intp]] = None,
) -> ConfidenceInterval:
    """Chebyshev interval on the accuracy of private models over a view."""
    profile = MarginProfile.build(model, noise, dataset)
    return confidence_interval(
        profile.expected_accuracy(noise.sigma, indices),
        profile.accuracy_variance(noise.sigma, indices),
        zeta,
        ACCURACY_RANGE,
    )
