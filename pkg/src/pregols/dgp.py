"""Seedable generators for covariates, responses, and the treatment experiment.

Reproducibility contract: a 64-bit root seed plus a stream index fully
determine every draw.  Stream seeds are derived with one documented mixing
function (SplitMix64 applied to ``root + k * GOLDEN``), each stream drives an
independent PCG64 generator, and Gaussians are produced in exactly one place
by inverse-CDF transform of 53-bit uniforms — no reliance on the default
normal algorithm, so streams are stable across platforms for a fixed
generator version.

Three covariate models, all n x q with q >= n and full row rank:

* ``standard_normal`` — i.i.d. unit Gaussians;
* ``spiked`` — ``W = U Sigma^{1/2}`` with Haar-like orthonormal rows ``U`` and
  ``Sigma = sigma_x^2 (I + sum_l lambda_l v_l v_l^T)``: isotropic plus a few
  large random spikes;
* ``geometric`` — a random matrix whose singular values are exactly
  ``lambda * rho^{l/2}``, synthesized as an SVD with Haar-like factors.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .exceptions import InvalidInputError, RankAssumptionError
from .linalg import RankTolerance, as_matrix, as_vector, numeric_rank

__all__ = [
    "Seed",
    "splitmix64",
    "standard_normal",
    "orthonormal_rows",
    "CovariateConfig",
    "COVARIATE_MODELS",
    "gen_covariates",
    "gen_response",
    "gen_ate_design",
    "gen_ate_dataset",
]

logger = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MAX_REJECTIONS = 100

COVARIATE_MODELS = ("standard_normal", "spiked", "geometric")


def splitmix64(z: int) -> int:
    """One round of the SplitMix64 finalizer (a 64-bit bijection)."""
    z = (z + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


@dataclass(frozen=True)
class Seed:
    """Root seed with a fixed stream-derivation rule.

    Stream ``k`` seeds a PCG64 generator with
    ``splitmix64(root + k * GOLDEN mod 2^64)``; distinct k always yield
    distinct seeds because the multiplier is odd and SplitMix64 is a
    bijection.
    """

    root: int

    def __post_init__(self) -> None:
        if not 0 <= int(self.root) <= _MASK64:
            raise InvalidInputError("seed root must be an unsigned 64-bit integer")
        object.__setattr__(self, "root", int(self.root))

    def stream_seed(self, k: int) -> int:
        if k < 0:
            raise InvalidInputError("stream index must be nonnegative")
        return splitmix64((self.root + k * _GOLDEN) & _MASK64)

    def rng(self, k: int) -> np.random.Generator:
        """Independent generator for stream ``k``."""
        return np.random.Generator(np.random.PCG64(self.stream_seed(k)))


def standard_normal(rng: np.random.Generator, size=None) -> np.ndarray | float:
    """Standard normals via inverse CDF of 53-bit uniforms.

    The one pinned Gaussian transform for the whole package: uniforms are
    ``(j + 0.5) / 2^53`` for a 53-bit integer ``j``, strictly inside (0, 1),
    mapped through the normal quantile function.
    """
    j = rng.integers(0, 1 << 53, size=size)
    u = (np.asarray(j, dtype=np.float64) + 0.5) / float(1 << 53)
    out = ndtri(u)
    return float(out) if size is None else out


def orthonormal_rows(n: int, q: int, rng: np.random.Generator) -> np.ndarray:
    """Random n x q matrix with orthonormal rows (Haar-like).

    Orthogonalizes a q x n standard Gaussian draw by QR (signs fixed so the
    distribution is rotation invariant) and transposes.
    """
    if n > q:
        raise InvalidInputError(f"orthonormal rows require n <= q, got {n} > {q}")
    g = standard_normal(rng, (q, n))
    qmat, rmat = np.linalg.qr(g)
    signs = np.sign(np.diag(rmat))
    signs[signs == 0.0] = 1.0
    return (qmat * signs).T


@dataclass(frozen=True)
class CovariateConfig:
    """Declarative covariate model: which process and its parameters.

    ``sigma_x``, ``k_spikes``, ``lambda_range`` apply to the spiked model;
    ``lambda_geo``, ``rho`` to the geometric model.  Defaults match the
    simulation studies (five spikes with strengths uniform on [10, 20],
    geometric decay 0.95).
    """

    model: str
    n: int
    q: int
    sigma_x: float = 1.0
    k_spikes: int = 5
    lambda_range: tuple[float, float] = (10.0, 20.0)
    lambda_geo: float = 1.0
    rho: float = 0.95

    def __post_init__(self) -> None:
        if self.model not in COVARIATE_MODELS:
            raise InvalidInputError(
                f"unknown covariate model {self.model!r}; choose from {COVARIATE_MODELS}"
            )
        if not (1 <= self.n <= self.q):
            raise InvalidInputError(
                f"need 1 <= n <= q for a wide full-row-rank design, got n={self.n}, q={self.q}"
            )
        if not self.sigma_x > 0.0:
            raise InvalidInputError("sigma_x must be positive")
        if self.k_spikes < 0:
            raise InvalidInputError("k_spikes must be nonnegative")
        lo, hi = self.lambda_range
        if not (0.0 <= lo <= hi):
            raise InvalidInputError("lambda_range must be ordered and nonnegative")
        if not 0.0 < self.rho < 1.0:
            raise InvalidInputError("rho must lie strictly inside (0, 1)")
        if not self.lambda_geo > 0.0:
            raise InvalidInputError("lambda_geo must be positive")


def _spiked_covariance_root(cfg: CovariateConfig, rng: np.random.Generator) -> np.ndarray:
    """Symmetric square root of the spiked covariance, via eigendecomposition."""
    q = cfg.q
    lo, hi = cfg.lambda_range
    k = cfg.k_spikes
    sigma = cfg.sigma_x**2 * np.eye(q)
    if k > 0:
        lams = lo + (hi - lo) * rng.random(k)
        v = standard_normal(rng, (q, k))
        v = v / np.linalg.norm(v, axis=0)
        sigma += cfg.sigma_x**2 * (v * lams) @ v.T
    evals, evecs = np.linalg.eigh(sigma)
    if np.any(evals <= 0.0):
        raise RankAssumptionError("spiked covariance is not positive definite")
    return (evecs * np.sqrt(evals)) @ evecs.T


def _draw_covariates(cfg: CovariateConfig, rng: np.random.Generator) -> np.ndarray:
    if cfg.model == "standard_normal":
        return standard_normal(rng, (cfg.n, cfg.q))
    if cfg.model == "spiked":
        root = _spiked_covariance_root(cfg, rng)
        u = orthonormal_rows(cfg.n, cfg.q, rng)
        return u @ root
    # geometric: exact SVD synthesis, so the top-n singular values are
    # lambda * rho^{l/2} by construction rather than approximately.
    svals = cfg.lambda_geo * cfg.rho ** (np.arange(1, cfg.n + 1) / 2.0)
    left = orthonormal_rows(cfg.n, cfg.n, rng)
    right = orthonormal_rows(cfg.n, cfg.q, rng)
    return (left * svals) @ right


def gen_covariates(
    cfg: CovariateConfig, rng: np.random.Generator, tol: RankTolerance | None = None
) -> np.ndarray:
    """Draw one covariate matrix, resampling on (vanishingly rare) rank failure."""
    for attempt in range(_MAX_REJECTIONS):
        w = _draw_covariates(cfg, rng)
        if numeric_rank(w, tol) == cfg.n:
            if attempt:
                logger.warning(
                    "resampled covariates %d time(s) after rank failures", attempt
                )
            return w
    raise RankAssumptionError(
        f"covariate model {cfg.model!r} failed the full-row-rank check "
        f"{_MAX_REJECTIONS} times in a row"
    )


def gen_response(
    w, beta1, beta0: float, sigma: float, rng: np.random.Generator
) -> np.ndarray:
    """Linear response with intercept and homoskedastic Gaussian noise."""
    w = as_matrix(w, "w")
    beta1 = as_vector(beta1, "beta1")
    if beta1.size != w.shape[1]:
        raise InvalidInputError(
            f"beta1 has length {beta1.size}, expected {w.shape[1]}"
        )
    if sigma < 0.0:
        raise InvalidInputError("sigma must be nonnegative")
    n = w.shape[0]
    y = w @ beta1 + float(beta0)
    if sigma > 0.0:
        y = y + sigma * standard_normal(rng, n)
    return y


def gen_ate_design(
    n: int, q: int, rng: np.random.Generator, tol: RankTolerance | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Spiked covariates plus a fair-coin treatment vector (never constant).

    A constant treatment would make ``[D, 1]`` rank one, so constant draws
    are rejected and redrawn.
    """
    if not 1 <= n < q:
        raise InvalidInputError(f"need 1 <= n < q, got n={n}, q={q}")
    cfg = CovariateConfig(model="spiked", n=n, q=q)
    w = gen_covariates(cfg, rng, tol)
    for _ in range(_MAX_REJECTIONS):
        d = (rng.random(n) < 0.5).astype(np.float64)
        if 0.0 < d.mean() < 1.0:
            return w, d
    raise RankAssumptionError(
        f"treatment vector was constant {_MAX_REJECTIONS} times in a row"
    )


def gen_ate_dataset(
    n: int,
    q: int,
    tau: float,
    rng: np.random.Generator,
    tol: RankTolerance | None = None,
    noise_sd: float = 1.0,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One draw of the treatment-effect experiment.

    Covariates are spiked, the treatment is a fair coin, and the response is
    ``W alpha + tau D + 1 + eps`` with ``alpha = p^{-1/2} 1`` for
    ``p = q + 2`` (covariates + treatment + intercept) and unit-variance
    noise.  ``noise_sd`` exists as a test hook for the noise-free path.
    """
    w, d = gen_ate_design(n, q, rng, tol)
    p = q + 2
    alpha = np.full(q, p ** -0.5)
    y = w @ alpha + float(tau) * d + 1.0
    if noise_sd > 0.0:
        y = y + noise_sd * standard_normal(rng, n)
    return w, d, y
