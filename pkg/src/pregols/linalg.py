"""Dense real-matrix primitives with one shared rank tolerance.

Everything downstream (interpolators, leave-one-out closed forms, variance
estimators, the simulation harness) funnels its rank decisions through the
pseudoinverse and :func:`numeric_rank` defined here, governed by a single
:class:`RankTolerance`.  Keeping one cutoff makes rank decisions reproducible
across operations instead of depending on per-call epsilons.

Matrices are plain two-dimensional float64 ``numpy`` arrays.  File exchange
uses headerless CSV, one row per line, dimensions inferred from the file.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidInputError

__all__ = [
    "RankTolerance",
    "get_default_tolerance",
    "set_default_tolerance",
    "pinv",
    "projector",
    "complement_projector",
    "gram_inverse",
    "numeric_rank",
    "nullspace_component",
    "read_matrix_csv",
    "write_matrix_csv",
]


@dataclass(frozen=True)
class RankTolerance:
    """Relative singular-value cutoff for rank decisions.

    A singular value ``s`` counts as nonzero when ``s > relative_cutoff * smax``
    where ``smax`` is the largest singular value.  ``relative_cutoff=None``
    selects the default ``max(rows, cols) * machine_epsilon``.
    """

    relative_cutoff: float | None = None

    def __post_init__(self) -> None:
        if self.relative_cutoff is not None and not (self.relative_cutoff > 0.0):
            raise InvalidInputError("relative_cutoff must be positive")

    def cutoff(self, shape: tuple[int, int], smax: float) -> float:
        """Absolute cutoff for a matrix of the given shape and largest singular value."""
        rel = self.relative_cutoff
        if rel is None:
            rel = max(shape) * np.finfo(np.float64).eps
        return rel * smax


_default_tolerance = RankTolerance()


def get_default_tolerance() -> RankTolerance:
    """Tolerance used whenever an operation receives ``tol=None``."""
    return _default_tolerance


def set_default_tolerance(tol: RankTolerance) -> None:
    """Replace the shared default tolerance (e.g. from the CLI ``--rank-tol``)."""
    global _default_tolerance
    if not isinstance(tol, RankTolerance):
        raise InvalidInputError("tol must be a RankTolerance")
    _default_tolerance = tol


def _resolve(tol: RankTolerance | None) -> RankTolerance:
    return _default_tolerance if tol is None else tol


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-D float64 array, raising :class:`InvalidInputError` otherwise."""
    a = np.asarray(m, dtype=np.float64)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-dimensional, got ndim={a.ndim}")
    if a.size and not np.all(np.isfinite(a)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return a


def as_vector(v, name: str = "vector") -> np.ndarray:
    """Coerce to a finite 1-D float64 array."""
    a = np.asarray(v, dtype=np.float64).reshape(-1)
    if a.size and not np.all(np.isfinite(a)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return a


def _svd(a: np.ndarray):
    return np.linalg.svd(a, full_matrices=False)


def pinv(m, tol: RankTolerance | None = None) -> np.ndarray:
    """Moore-Penrose pseudoinverse via full SVD with a relative cutoff.

    Singular values at or below ``tol.cutoff(shape, smax)`` are treated as
    zero.  The result satisfies the four Penrose criteria to high accuracy
    (see the test suite, which checks them at 1e-10 relative).

    Parameters
    ----------
    m : array_like
        Matrix to invert, any shape.
    tol : RankTolerance, optional
        Cutoff policy; defaults to the shared package tolerance.

    Returns
    -------
    np.ndarray
        The pseudoinverse, with shape transposed relative to ``m``.
    """
    a = as_matrix(m)
    if a.size == 0:
        return np.zeros((a.shape[1], a.shape[0]))
    u, s, vt = _svd(a)
    cut = _resolve(tol).cutoff(a.shape, float(s[0]) if s.size else 0.0)
    inv = np.where(s > cut, 1.0, 0.0)
    np.divide(inv, s, out=inv, where=s > cut)
    return (vt.T * inv) @ u.T


def projector(m, tol: RankTolerance | None = None) -> np.ndarray:
    """Orthogonal projection onto the column space of ``m`` (symmetric, idempotent)."""
    a = as_matrix(m)
    return a @ pinv(a, tol)


def complement_projector(m, tol: RankTolerance | None = None) -> np.ndarray:
    """Projection onto the orthogonal complement of the column space of ``m``."""
    a = as_matrix(m)
    return np.eye(a.shape[0]) - projector(a, tol)


def gram_inverse(m, tol: RankTolerance | None = None) -> np.ndarray:
    """Pseudoinverse of the row Gram matrix, ``(M M^T)^+``.

    For a full-row-rank ``M`` this is the true inverse of ``M M^T`` and is
    symmetric positive definite.
    """
    a = as_matrix(m)
    return pinv(a @ a.T, tol)


def numeric_rank(m, tol: RankTolerance | None = None) -> int:
    """Number of singular values above the cutoff."""
    a = as_matrix(m)
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    cut = _resolve(tol).cutoff(a.shape, float(s[0]) if s.size else 0.0)
    return int(np.sum(s > cut))


def nullspace_component(m, v, tol: RankTolerance | None = None) -> np.ndarray:
    """Project ``v`` (vector or matrix of columns) onto the null space of ``m``.

    Used to sample non-canonical members of a least-squares solution set:
    adding any null-space vector to a solution keeps it a solution.
    """
    a = as_matrix(m)
    w = np.asarray(v, dtype=np.float64)
    return w - pinv(a, tol) @ (a @ w)


def read_matrix_csv(path) -> np.ndarray:
    """Read a headerless CSV of decimal floats, one matrix row per line."""
    try:
        a = np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
    except OSError:
        raise
    except Exception as exc:  # malformed numeric content
        raise InvalidInputError(f"could not parse matrix CSV {path}: {exc}") from exc
    if a.size == 0:
        raise InvalidInputError(f"matrix CSV {path} is empty")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError(f"matrix CSV {path} contains non-finite entries")
    return a


def write_matrix_csv(path, m) -> None:
    """Write a matrix as headerless CSV with full float64 round-trip precision."""
    a = as_matrix(m)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in a:
            fh.write(",".join(repr(float(x)) for x in row))
            fh.write("\n")
