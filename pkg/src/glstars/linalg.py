"""Dense symmetric linear algebra kernels.

Cholesky factorization, log-determinant, SPD inverse, and seeded
multivariate Gaussian sampling. All functions are pure and operate on
plain square ndarrays; symmetry is the caller's responsibility at
construction time (use :func:`symmetrize` after any operation that can
introduce float-level asymmetry).

Positive definiteness is detected by a single rule everywhere: a
Cholesky pivot at or below ``PD_PIVOT_TOL`` raises
:class:`~glstars.errors.NotPositiveDefinite`.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg.lapack import dpotrf, dpotri

from .errors import DimensionMismatch, NonFinite, NotPositiveDefinite

# Cholesky pivot (squared diagonal entry of the factor) at or below this
# value means "not positive definite" for every caller in the package.
PD_PIVOT_TOL = 1e-12


def symmetrize(m: np.ndarray) -> np.ndarray:
    """Return the exactly symmetric average (m + m.T) / 2."""
    return 0.5 * (m + m.T)


def check_square(m: np.ndarray, min_dim: int = 2) -> int:
    """Validate that m is a finite square matrix; return its dimension."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] < min_dim:
        raise DimensionMismatch(f"dimension {m.shape[0]} < {min_dim}")
    if not np.all(np.isfinite(m)):
        raise NonFinite("matrix contains NaN or Inf entries")
    return m.shape[0]


def try_cholesky(m: np.ndarray) -> np.ndarray | None:
    """Raw lower Cholesky factor, or None if any pivot is <= PD_PIVOT_TOL.

    Fast non-raising variant used in solver line searches where a failed
    factorization is an expected outcome, not an error. Only the lower
    triangle of the result is meaningful (the strict upper triangle
    holds leftover input); use :func:`cholesky` for a clean factor.
    """
    c, info = dpotrf(m, lower=1)
    if info != 0:
        return None
    d = c.diagonal()
    # dpotrf pivots are the squared factor diagonal
    if (d * d).min() <= PD_PIVOT_TOL:
        return None
    return c


def cholesky(m: np.ndarray) -> np.ndarray:
    """Lower triangular L with L @ L.T == m.

    Raises NotPositiveDefinite when a pivot is <= PD_PIVOT_TOL.
    """
    check_square(m)
    c = try_cholesky(m)
    if c is None:
        raise NotPositiveDefinite("Cholesky pivot at or below PD tolerance")
    return np.tril(c)


def log_det(m: np.ndarray) -> float:
    """log-determinant of a positive definite matrix, via Cholesky.

    Returns 2 * sum(log(diag(L))).
    """
    L = cholesky(m)
    return float(2.0 * np.sum(np.log(L.diagonal())))


def _inverse_from_factor(c: np.ndarray) -> np.ndarray:
    """SPD inverse from a lower Cholesky factor (both triangles filled)."""
    inv, info = dpotri(c, lower=1)
    if info != 0:  # pragma: no cover - dpotri cannot fail on a valid factor
        raise NotPositiveDefinite("dpotri failed on a Cholesky factor")
    return np.tril(inv) + np.tril(inv, -1).T


def inverse(m: np.ndarray) -> np.ndarray:
    """Inverse of a positive definite matrix via Cholesky.

    The result is exactly symmetric; m @ inverse(m) is the identity to
    within ~1e-9 max-abs for well-scaled inputs.
    """
    return _inverse_from_factor(cholesky(m))


def sample_gaussian(sigma: np.ndarray, n: int, seed) -> np.ndarray:
    """Draw n i.i.d. rows from N(0, sigma), deterministically per seed.

    Rows are X = Z @ L.T with L the lower Cholesky factor of sigma and Z
    standard normal from numpy's PCG64 generator (ziggurat normals), so
    output is bit-reproducible for a given seed within one numpy version.

    Parameters
    ----------
    sigma : (p, p) positive definite covariance.
    n : number of rows to draw, >= 1.
    seed : any numpy SeedSequence-compatible seed (int or tuple of ints).
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    L = cholesky(sigma)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, sigma.shape[0]))
    return z @ L.T


def sample_covariance(x: np.ndarray) -> np.ndarray:
    """Maximum-likelihood covariance of data rows: centered, divided by n.

    The result is exactly symmetric.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise DimensionMismatch(f"expected an n x p data matrix, got shape {x.shape}")
    xc = x - x.mean(axis=0)
    return symmetrize(xc.T @ xc / x.shape[0])
