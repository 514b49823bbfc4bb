"""Homoskedastic noise-variance estimators for interpolating fits.

Interpolators have zero in-sample residuals, so the classical residual-based
variance estimator degenerates.  Four replacements work on a wide split
design ``[W | T]`` under the fixed-design Gauss-Markov model
(``y = X beta + eps``, ``E[eps] = 0``, ``Cov(eps) = sigma^2 I``).  Each one is a
normalized quadratic form

    sigma2_hat = ||R y||^2 / ||R||_F^2

for an estimator-specific matrix ``R``, and consequently each has the exact
expectation ``sigma^2 + ||R E[y]||^2 / ||R||_F^2`` (apply
``E[y^T M y] = beta^T X^T M X beta + sigma^2 tr(M)`` with ``M = R^T R``).
The additive term is the estimator's bias, computable exactly from a supplied
truth; all four are conservative (biased upward).

===========  ==========================================================
estimator    R
===========  ==========================================================
``full``     ``[diag(G_X)]^{-1} G_X`` (leave-one-out residual map, X unsplit)
``partial``  rows ``e_i^T [diag(G_W)]^{-1} G_W (I - H_i)`` (split LOO map)
``w``        ``P_T``, projection onto colsp(T); normalizer rank(T)
``wc``       ``P_B^perp W^+`` with ``B = W^+ T``
===========  ==========================================================

Normalizer note for ``wc``: two superficially similar normalizers exist,
``tr(P_B^perp (W^T W)^+)`` over the projected coefficient space and
``tr(P_T^perp G_W)`` over the sample space.  They are NOT equal in general
(numerically they differ by factors on random designs).  This module uses the
projected-space trace, which equals ``||P_B^perp W^+||_F^2`` and is the one
that makes the exact-bias identity hold; the Monte-Carlo suite verifies this.
:func:`wc_normalizers` exposes both for diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidInputError, RankAssumptionError
from .interpolators import DesignPartition
from .linalg import (
    RankTolerance,
    as_matrix,
    as_vector,
    complement_projector,
    gram_inverse,
    numeric_rank,
    pinv,
    projector,
)
from .loo import PartialLooSolver

__all__ = [
    "ESTIMATOR_IDS",
    "GaussMarkovTruth",
    "VarianceReport",
    "ResidualOperator",
    "full_operator",
    "partial_operator",
    "w_operator",
    "wc_operator",
    "wc_normalizers",
    "sigma2_full",
    "sigma2_partial",
    "sigma2_w",
    "sigma2_wc",
    "expected_bias",
]

ESTIMATOR_IDS = ("full", "partial", "w", "wc")


@dataclass(frozen=True)
class GaussMarkovTruth:
    """Fixed-design truth: deterministic coefficients and noise variance."""

    beta: np.ndarray
    sigma2: float

    def __post_init__(self) -> None:
        beta = as_vector(self.beta, "beta")
        object.__setattr__(self, "beta", beta)
        if not (self.sigma2 > 0.0):
            raise InvalidInputError("sigma2 must be positive")

    def mean_response(self, design: np.ndarray) -> np.ndarray:
        design = as_matrix(design, "design")
        if design.shape[1] != self.beta.size:
            raise InvalidInputError(
                f"beta has length {self.beta.size}, design has {design.shape[1]} columns"
            )
        return design @ self.beta


@dataclass(frozen=True)
class VarianceReport:
    """One estimate with its normalizer and, when a truth is supplied, its exact bias."""

    estimator_id: str
    estimate: float
    denominator: float
    expected_bias: float | None = None


@dataclass(frozen=True)
class ResidualOperator:
    """Matrix ``R`` and normalizer defining one estimator ``||R y||^2 / denominator``."""

    estimator_id: str
    matrix: np.ndarray
    denominator: float

    def estimate(self, y) -> float:
        y = as_vector(y, "y")
        if y.size != self.matrix.shape[1]:
            raise InvalidInputError(
                f"y has length {y.size}, expected {self.matrix.shape[1]}"
            )
        r = self.matrix @ y
        return float(r @ r) / self.denominator

    def expected_bias(self, mean_response) -> float:
        """Exact additive bias for a given ``E[y]``."""
        mu = as_vector(mean_response, "mean_response")
        if mu.size != self.matrix.shape[1]:
            raise InvalidInputError(
                f"mean_response has length {mu.size}, expected {self.matrix.shape[1]}"
            )
        r = self.matrix @ mu
        return float(r @ r) / self.denominator

    def report(self, y, mean_response=None) -> VarianceReport:
        return VarianceReport(
            estimator_id=self.estimator_id,
            estimate=self.estimate(y),
            denominator=self.denominator,
            expected_bias=None
            if mean_response is None
            else self.expected_bias(mean_response),
        )


def full_operator(x, tol: RankTolerance | None = None) -> ResidualOperator:
    """Leave-one-out residual map of the unsplit minimum-norm interpolator."""
    x = as_matrix(x, "x")
    n = x.shape[0]
    if numeric_rank(x, tol) != n:
        raise RankAssumptionError(
            f"rank assumption violated: design must have full row rank {n}"
        )
    gx = gram_inverse(x, tol)
    diag = np.diag(gx)
    if np.any(diag <= 0.0):
        raise RankAssumptionError("inverse Gram diagonal is not strictly positive")
    r = gx / diag[:, None]
    return ResidualOperator("full", r, float(np.sum(r * r)))


def partial_operator(d: DesignPartition, tol: RankTolerance | None = None) -> ResidualOperator:
    """Leave-one-out residual map of the split-design interpolator."""
    solver = PartialLooSolver(d, tol)
    return ResidualOperator("partial", solver.residual_matrix, solver.denominator)


def w_operator(d: DesignPartition, tol: RankTolerance | None = None) -> ResidualOperator:
    """In-sample residual map from the penalized-block formulation.

    Regressing ``y`` (not its projection) on the projected penalized block
    leaves the nontrivial residual ``P_T y``; the normalizer is rank(T),
    which equals ``||P_T||_F^2`` exactly.
    """
    if d.m == 0:
        raise InvalidInputError("estimator 'w' requires a nonempty unpenalized block")
    p_t = projector(d.t, tol)
    return ResidualOperator("w", p_t, float(numeric_rank(d.t, tol)))


def wc_operator(d: DesignPartition, tol: RankTolerance | None = None) -> ResidualOperator:
    """In-sample residual map from the unpenalized-block formulation.

    The residual of regressing ``W^+ y`` on ``W^+ T`` is
    ``P_B^perp W^+ y`` with ``B = W^+ T``; the normalizer is the
    projected-space trace (see module docstring).
    """
    if d.m == 0:
        raise InvalidInputError("estimator 'wc' requires a nonempty unpenalized block")
    wp = pinv(d.w, tol)
    b = wp @ d.t
    r = complement_projector(b, tol) @ wp
    return ResidualOperator("wc", r, float(np.sum(r * r)))


def wc_normalizers(d: DesignPartition, tol: RankTolerance | None = None) -> tuple[float, float]:
    """Both candidate normalizers for ``wc``: (projected-space, sample-space).

    The first is ``tr(P_B^perp (W^T W)^+)`` and is what :func:`wc_operator`
    uses; the second is ``tr(P_T^perp G_W)``.  They differ in general.
    """
    wp = pinv(d.w, tol)
    b = wp @ d.t
    projected = float(np.trace(complement_projector(b, tol) @ pinv(d.w.T @ d.w, tol)))
    sample = float(np.trace(complement_projector(d.t, tol) @ gram_inverse(d.w, tol)))
    return projected, sample


def _report(op: ResidualOperator, design: np.ndarray, y, truth) -> VarianceReport:
    mu = None if truth is None else truth.mean_response(design)
    return op.report(y, mu)


def sigma2_full(x, y, truth: GaussMarkovTruth | None = None,
                tol: RankTolerance | None = None) -> VarianceReport:
    """Variance estimate from the unsplit leave-one-out residuals."""
    x = as_matrix(x, "x")
    return _report(full_operator(x, tol), x, y, truth)


def sigma2_partial(d: DesignPartition, y, truth: GaussMarkovTruth | None = None,
                   tol: RankTolerance | None = None,
                   solver: PartialLooSolver | None = None) -> VarianceReport:
    """Variance estimate from the split-design leave-one-out residuals.

    The numerator is the squared l2 norm of the residual vector; pass a
    prebuilt :class:`~pregols.loo.PartialLooSolver` to amortize the per-design
    work across many responses.
    """
    if solver is None:
        op = partial_operator(d, tol)
    else:
        op = ResidualOperator("partial", solver.residual_matrix, solver.denominator)
    return _report(op, d.stacked(), y, truth)


def sigma2_w(d: DesignPartition, y, truth: GaussMarkovTruth | None = None,
             tol: RankTolerance | None = None) -> VarianceReport:
    """Variance estimate from the penalized-block in-sample residuals.

    With ``T`` a lone intercept column its bias is
    ``(sum_i w_i . beta_W + n beta_0)^2 / n``, which grows with the sample
    mean of the signal; expect it to dominate the other three estimators.
    """
    return _report(w_operator(d, tol), d.stacked(), y, truth)


def sigma2_wc(d: DesignPartition, y, truth: GaussMarkovTruth | None = None,
              tol: RankTolerance | None = None) -> VarianceReport:
    """Variance estimate from the unpenalized-block in-sample residuals."""
    return _report(wc_operator(d, tol), d.stacked(), y, truth)


_OPERATORS = {
    "full": None,  # handled separately, takes an unsplit design
    "partial": partial_operator,
    "w": w_operator,
    "wc": wc_operator,
}


def expected_bias(estimator_id: str, design, truth: GaussMarkovTruth,
                  tol: RankTolerance | None = None) -> float:
    """Exact additive bias ``E[sigma2_hat] - sigma^2`` for a given truth.

    ``design`` is the unsplit matrix for ``full`` and a
    :class:`DesignPartition` for the other three; ``truth.beta`` is ordered
    W-block first, then T-block.
    """
    if estimator_id not in ESTIMATOR_IDS:
        raise InvalidInputError(
            f"unknown estimator {estimator_id!r}; choose from {ESTIMATOR_IDS}"
        )
    if estimator_id == "full":
        if isinstance(design, DesignPartition):
            x = design.stacked()
        else:
            x = as_matrix(design, "design")
        op = full_operator(x, tol)
        return op.expected_bias(truth.mean_response(x))
    if not isinstance(design, DesignPartition):
        raise InvalidInputError(
            f"estimator {estimator_id!r} requires a DesignPartition"
        )
    op = _OPERATORS[estimator_id](design, tol)
    return op.expected_bias(truth.mean_response(design.stacked()))
