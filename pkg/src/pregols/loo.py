"""Closed-form leave-one-out refits and prediction residuals.

Dropping row ``i`` from a wide full-row-rank design does not require
refitting: with ``k_i = W^+ e_i`` and ``g_ii = e_i^T G_W e_i > 0``, the rank-one
projector ``P_i = k_i k_i^T / g_ii`` turns the full-sample pseudoinverse into
its leave-one-out counterpart ``Wt_i = (I - P_i) W^+``.  Substituting ``Wt_i``
for ``W^+`` in the split-design coefficient formulas yields the leave-i-out
coefficients, and the prediction residual collapses to

    eps_i = e_i^T [diag(G_W)]^{-1} G_W (I - H_i) y,
    H_i   = T (Wt_i T)^+ Wt_i.

``H_i`` is n x n per index and is only ever applied to vectors, so it is
computed transiently and never stored.

All closed forms here are validated against :func:`brute_force_refit`, which
physically deletes the row and refits; that oracle is part of the public
surface so downstream users can run the same comparison on their own data.

Rank preconditions: dropping a row of a full-row-rank ``W`` always leaves the
remaining rows linearly independent, so only two things can fail and both are
checked per index: the unpenalized block may lose full column rank when the
row is removed, and the reduced product ``Wt_i T`` may become rank-deficient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidInputError, RankAssumptionError
from .interpolators import DesignPartition, fit_partial
from .linalg import RankTolerance, as_matrix, as_vector, gram_inverse, numeric_rank, pinv

__all__ = [
    "LooProjector",
    "LooRecord",
    "PartialLooSolver",
    "loo_projector",
    "loo_fit",
    "loo_record",
    "loo_residual_partial",
    "loo_residuals_partial",
    "loo_residuals_full",
    "gram_downdate",
    "brute_force_refit",
]

#: Internal-consistency bound between the residual closed form and the
#: prediction implied by the leave-one-out coefficients.
_CONSISTENCY_RTOL = 1e-8


@dataclass(frozen=True)
class LooProjector:
    """Rank-one projector pair for one held-out index.

    ``p`` projects onto span(W^+ e_i) in coefficient space; ``q_companion``
    is its sample-space companion ``e_i e_i^T G_W / g_ii`` (idempotent but not
    symmetric).  ``w_tilde = (I - p) W^+`` is the deflated pseudoinverse that
    drives every leave-one-out closed form.
    """

    index: int
    p: np.ndarray
    q_companion: np.ndarray
    w_tilde: np.ndarray
    denominator: float


@dataclass(frozen=True)
class LooRecord:
    """Leave-one-out coefficients and prediction residual for one index."""

    index: int
    lambda_loo: np.ndarray
    tau_loo: np.ndarray
    residual: float


def _check_index(i: int, n: int) -> int:
    i = int(i)
    if not 0 <= i < n:
        raise InvalidInputError(f"index {i} out of range for {n} rows")
    return i


def loo_projector(w, i: int, tol: RankTolerance | None = None) -> LooProjector:
    """Build the projector pair for row ``i`` of a full-row-rank ``w``."""
    w = as_matrix(w, "w")
    n = w.shape[0]
    i = _check_index(i, n)
    if numeric_rank(w, tol) != n:
        raise RankAssumptionError(
            f"rank assumption violated: w must have full row rank {n}"
        )
    wp = pinv(w, tol)
    gw = gram_inverse(w, tol)
    gii = float(gw[i, i])
    if gii <= 0.0:
        raise RankAssumptionError(
            f"inverse Gram diagonal is not positive at index {i}; w is rank-marginal"
        )
    k = wp[:, i]
    p = np.outer(k, k) / gii
    q_companion = np.zeros((n, n))
    q_companion[i, :] = gw[i] / gii
    w_tilde = wp - np.outer(k, gw[i]) / gii
    return LooProjector(
        index=i, p=p, q_companion=q_companion, w_tilde=w_tilde, denominator=gii
    )


def _loo_core(d: DesignPartition, i: int, tol):
    """Shared per-index pieces: deflated pseudoinverse and reduced block, validated."""
    wp = pinv(d.w, tol)
    gw = gram_inverse(d.w, tol)
    gii = float(gw[i, i])
    if gii <= 0.0:
        raise RankAssumptionError(
            f"inverse Gram diagonal is not positive at index {i}; the penalized "
            "block is rank-marginal"
        )
    k = wp[:, i]
    w_tilde = wp - np.outer(k, gw[i]) / gii
    wt_t = w_tilde @ d.t
    _validate_loo_ranks(d, wt_t, i, tol)
    return wp, gw, gii, w_tilde, wt_t


def _validate_loo_ranks(d: DesignPartition, wt_t: np.ndarray, i: int, tol) -> None:
    if d.m == 0:
        return
    t_del = np.delete(np.asarray(d.t), i, axis=0)
    if numeric_rank(t_del, tol) != d.m:
        raise RankAssumptionError(
            f"leave-one-out rank violation at index {i}: unpenalized block t "
            "loses full column rank when the row is removed"
        )
    if numeric_rank(wt_t, tol) != d.m:
        raise RankAssumptionError(
            f"leave-one-out rank violation at index {i}: the deflated product "
            "of the penalized-block pseudoinverse with t is rank-deficient"
        )


def loo_fit(
    d: DesignPartition, y, i: int, tol: RankTolerance | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Leave-one-out coefficient pair ``(lambda_loo, tau_loo)`` without refitting."""
    y = as_vector(y, "y")
    if y.size != d.n:
        raise InvalidInputError(f"y has length {y.size}, expected {d.n}")
    i = _check_index(i, d.n)
    _, _, _, w_tilde, wt_t = _loo_core(d, i, tol)
    wty = w_tilde @ y
    tau_loo = pinv(wt_t, tol) @ wty
    lam_loo = d.w.T @ (w_tilde.T @ (wty - wt_t @ tau_loo))
    return lam_loo, tau_loo


def loo_residual_partial(
    d: DesignPartition, y, i: int, tol: RankTolerance | None = None
) -> float:
    """Leave-one-out prediction residual for index ``i`` via the closed form.

    Equals ``y_i`` minus the prediction of the model refit without row ``i``;
    the unique extra term relative to the unsplit case enters through the
    transient matrix ``H_i``.
    """
    y = as_vector(y, "y")
    if y.size != d.n:
        raise InvalidInputError(f"y has length {y.size}, expected {d.n}")
    i = _check_index(i, d.n)
    _, gw, gii, w_tilde, wt_t = _loo_core(d, i, tol)
    gi = gw[i]
    if d.m == 0:
        return float(gi @ y / gii)
    tau_loo = pinv(wt_t, tol) @ (w_tilde @ y)
    # g_i (I - H_i) y with H_i y = T tau_loo
    return float((gi @ y - (gi @ d.t) @ tau_loo) / gii)


def loo_record(
    d: DesignPartition, y, i: int, tol: RankTolerance | None = None
) -> LooRecord:
    """Coefficients plus residual for one index, cross-checked for consistency."""
    y = as_vector(y, "y")
    lam_loo, tau_loo = loo_fit(d, y, i, tol)
    resid = loo_residual_partial(d, y, i, tol)
    predicted = float(d.w[i] @ lam_loo + (d.t[i] @ tau_loo if d.m else 0.0))
    gap = abs(resid - (y[i] - predicted))
    if gap > _CONSISTENCY_RTOL * (1.0 + abs(float(y[i]))):
        raise RankAssumptionError(
            f"leave-one-out closed forms disagree at index {i} (gap {gap:.3e}); "
            "the design is numerically rank-marginal"
        )
    return LooRecord(index=i, lambda_loo=lam_loo, tau_loo=tau_loo, residual=resid)


class PartialLooSolver:
    """Per-design cache turning leave-one-out residuals into one matrix apply.

    The residual of every index is linear in ``y``, so the whole residual
    vector is ``R y`` for an n x n matrix ``R`` whose i-th row is
    ``e_i^T [diag(G_W)]^{-1} G_W (I - H_i)``.  Building ``R`` once per design
    amortizes the per-index work across repeated responses (the variance
    estimator and the simulation harness evaluate thousands of draws against
    a fixed design).
    """

    def __init__(self, d: DesignPartition, tol: RankTolerance | None = None):
        self.design = d
        n = d.n
        wp = pinv(d.w, tol)
        gw = gram_inverse(d.w, tol)
        diag = np.diag(gw).copy()
        if np.any(diag <= 0.0):
            raise RankAssumptionError(
                "inverse Gram diagonal is not strictly positive; the penalized "
                "block is rank-marginal"
            )
        rows = np.empty((n, n))
        if d.m == 0:
            rows[:] = gw / diag[:, None]
        else:
            t = np.asarray(d.t)
            b = wp @ t
            for i in range(n):
                gi = gw[i]
                gii = diag[i]
                k = wp[:, i]
                wt_t = b - np.outer(k, gi @ t) / gii
                _validate_loo_ranks(d, wt_t, i, tol)
                piv = pinv(wt_t, tol)
                # (Wt_i T)^+ Wt_i without materializing Wt_i:
                cw = piv @ wp - np.outer(piv @ k, gi) / gii
                rows[i] = (gi - (gi @ t) @ cw) / gii
        rows.setflags(write=False)
        self.residual_matrix = rows
        self.denominator = float(np.sum(rows * rows))

    def residuals(self, y) -> np.ndarray:
        """All leave-one-out prediction residuals for one response vector."""
        y = as_vector(y, "y")
        if y.size != self.design.n:
            raise InvalidInputError(f"y has length {y.size}, expected {self.design.n}")
        return self.residual_matrix @ y


def loo_residuals_partial(
    d: DesignPartition, y, tol: RankTolerance | None = None
) -> np.ndarray:
    """Leave-one-out residuals for every index of a split design."""
    return PartialLooSolver(d, tol).residuals(y)


def loo_residuals_full(x, y, tol: RankTolerance | None = None) -> np.ndarray:
    """Leave-one-out residuals of the fully regularized interpolator.

    For a full-row-rank design the whole vector is
    ``[diag(G_X)]^{-1} G_X y``; no per-index correction is needed because
    there is no unpenalized block.
    """
    x = as_matrix(x, "x")
    y = as_vector(y, "y")
    n = x.shape[0]
    if y.size != n:
        raise InvalidInputError(f"y has length {y.size}, expected {n}")
    if numeric_rank(x, tol) != n:
        raise RankAssumptionError(
            f"rank assumption violated: design must have full row rank {n}"
        )
    gx = gram_inverse(x, tol)
    diag = np.diag(gx)
    if np.any(diag <= 0.0):
        raise RankAssumptionError(
            "inverse Gram diagonal is not strictly positive; the design is "
            "rank-marginal"
        )
    return (gx @ y) / diag


def gram_downdate(x, i: int, tol: RankTolerance | None = None) -> np.ndarray:
    """Column-Gram pseudoinverse after deleting row ``i``, via a rank-one update.

    Returns ``[(X_del)^T X_del]^+`` computed from the full-sample
    pseudoinverse alone:

        X^+ {I - e_i e_i^T G_X / g_ii - G_X e_i e_i^T / g_ii
             + (e_i^T G_X^2 e_i / g_ii^2) e_i e_i^T} X^{+,T}

    For a full-row-rank ``X`` the deleted design keeps full row rank, so no
    extra precondition is needed beyond the rank check.
    """
    x = as_matrix(x, "x")
    n = x.shape[0]
    i = _check_index(i, n)
    if numeric_rank(x, tol) != n:
        raise RankAssumptionError(
            f"rank assumption violated: design must have full row rank {n}"
        )
    xp = pinv(x, tol)
    gx = gram_inverse(x, tol)
    gii = float(gx[i, i])
    if gii <= 0.0:
        raise RankAssumptionError(
            f"inverse Gram diagonal is not positive at index {i}"
        )
    gi = gx[i]
    mid = np.eye(n)
    mid[i, :] -= gi / gii
    mid[:, i] -= gi / gii
    mid[i, i] += float(gi @ gi) / gii**2
    return xp @ mid @ xp.T


def brute_force_refit(
    d: DesignPartition, y, i: int, tol: RankTolerance | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Oracle: physically delete row ``i`` and refit the split design.

    Deterministic and independent of the closed forms above; the test suite
    holds the closed forms to this oracle.
    """
    y = as_vector(y, "y")
    if y.size != d.n:
        raise InvalidInputError(f"y has length {y.size}, expected {d.n}")
    i = _check_index(i, d.n)
    w_del = np.delete(np.asarray(d.w), i, axis=0)
    y_del = np.delete(y, i)
    if d.m == 0:
        part = DesignPartition.penalized_only(w_del, tol=tol)
    else:
        t_del = np.delete(np.asarray(d.t), i, axis=0)
        part = DesignPartition(w_del, t_del, tol=tol)
    fit = fit_partial(part, y_del, tol)
    return fit.lambda_hat, fit.tau_hat
