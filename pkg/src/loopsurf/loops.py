"""Arithmetic for truncated twisted 2x2 matrix Laurent loops.

A loop is stored as a dense table of matrix coefficients ``c[k]`` for
degrees ``k`` in ``[-N, N]``; it represents ``g(lambda) = sum_k c[k] lambda^k``
on the unit circle.  The twist parity rule (diagonal entries only at even
degrees, off-diagonal entries only at odd degrees) is enforced at
construction and preserved by every operation, so that
``g(-lambda) = sigma3 g(lambda) sigma3`` holds coefficient-wise.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, log2

import numpy as np

from .errors import SingularLoop, TwistViolation

DEFAULT_TRUNC = 24

# Tolerances; implementation choices, overridable per call where it matters.
COEFF_TOL = 1e-10   # coefficient-level equality
EVAL_TOL = 1e-8     # pointwise evaluation checks
_PARITY_TOL = 1e-12
_DET_FLOOR = 1e-12

SIGMA1 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA2 = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA3 = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY2 = np.eye(2, dtype=complex)

# The fixed off-diagonal axis matrix used by exp_axis; squares to I.
OFF_AXIS = SIGMA1


def allowed_mask(trunc: int) -> np.ndarray:
    """Boolean (2N+1, 2, 2) mask of entries permitted by the twist parity."""
    degrees = np.arange(-trunc, trunc + 1)
    even = (degrees % 2 == 0)[:, None, None]
    diag = np.eye(2, dtype=bool)[None, :, :]
    return (even & diag) | (~even & ~diag)


def project_parity(band: np.ndarray) -> np.ndarray:
    """Zero out parity-forbidden entries of a coefficient band."""
    trunc = (band.shape[0] - 1) // 2
    out = np.array(band, dtype=complex)
    out[~allowed_mask(trunc)] = 0.0
    return out


@dataclass(frozen=True)
class CirclePoint:
    """A point lambda = exp(i theta) on the unit circle."""

    theta: float

    @property
    def lam(self) -> complex:
        return complex(np.exp(1j * self.theta))


@dataclass(frozen=True)
class TwistedLoop:
    """Truncated twisted loop; ``coeffs[k + trunc]`` is the degree-k matrix."""

    coeffs: np.ndarray
    trunc: int

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (2 * self.trunc + 1, 2, 2):
            raise ValueError(
                f"coefficient band has shape {c.shape}, "
                f"expected {(2 * self.trunc + 1, 2, 2)}"
            )
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    def coefficient(self, degree: int) -> np.ndarray:
        """Degree-k coefficient matrix (zero outside the band)."""
        if abs(degree) > self.trunc:
            return np.zeros((2, 2), dtype=complex)
        return self.coeffs[degree + self.trunc]

    @property
    def degrees(self) -> np.ndarray:
        return np.arange(-self.trunc, self.trunc + 1)

    def norm(self) -> float:
        """Max absolute value over all coefficient entries."""
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0


def _wrap(band: np.ndarray, trunc: int) -> TwistedLoop:
    return TwistedLoop(project_parity(band), trunc)


def make_loop(coeffs, trunc: int = DEFAULT_TRUNC) -> TwistedLoop:
    """Build a loop from a mapping degree -> 2x2 matrix.

    Missing degrees are zero-filled.  Raises TwistViolation if any supplied
    entry breaks the parity rule, and ValueError for degrees outside
    ``[-trunc, trunc]``.
    """
    band = np.zeros((2 * trunc + 1, 2, 2), dtype=complex)
    items = coeffs.items() if isinstance(coeffs, dict) else coeffs
    for degree, matrix in items:
        if abs(degree) > trunc:
            raise ValueError(f"degree {degree} outside [-{trunc}, {trunc}]")
        band[degree + trunc] = np.asarray(matrix, dtype=complex)
    bad = np.abs(band[~allowed_mask(trunc)])
    if bad.size and bad.max() > _PARITY_TOL:
        raise TwistViolation(
            "coefficients violate the twist parity "
            "(diagonal at even degrees, off-diagonal at odd degrees)"
        )
    return _wrap(band, trunc)


def identity_loop(trunc: int = DEFAULT_TRUNC) -> TwistedLoop:
    return make_loop({0: IDENTITY2}, trunc)


def constant_loop(matrix, trunc: int = DEFAULT_TRUNC) -> TwistedLoop:
    """Constant-in-lambda loop; the matrix must be diagonal (twist parity)."""
    return make_loop({0: matrix}, trunc)


def retruncate(g: TwistedLoop, trunc: int) -> TwistedLoop:
    """Pad or chop the coefficient band to a new truncation degree."""
    if trunc == g.trunc:
        return g
    band = np.zeros((2 * trunc + 1, 2, 2), dtype=complex)
    k = min(trunc, g.trunc)
    band[trunc - k:trunc + k + 1] = g.coeffs[g.trunc - k:g.trunc + k + 1]
    return _wrap(band, trunc)


def band_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Full Cauchy product of two coefficient bands (no truncation).

    Shapes (2Na+1, 2, 2) x (2Nb+1, 2, 2) -> (2(Na+Nb)+1, 2, 2).
    """
    ka = (a.shape[0] - 1) // 2
    kb = (b.shape[0] - 1) // 2
    out = np.zeros((2 * (ka + kb) + 1, 2, 2), dtype=complex)
    for j in range(b.shape[0]):
        out[j:j + a.shape[0]] += a @ b[j]
    return out


def mul(a: TwistedLoop, b: TwistedLoop) -> TwistedLoop:
    """Product of loops, re-truncated to the larger input truncation."""
    trunc = max(a.trunc, b.trunc)
    full = band_mul(a.coeffs, b.coeffs)
    mid = (full.shape[0] - 1) // 2
    return _wrap(full[mid - trunc:mid + trunc + 1], trunc)


def star(g: TwistedLoop) -> TwistedLoop:
    """Circle adjoint: pointwise conjugate-transpose for |lambda| = 1.

    Coefficient-wise, degree k of the result is the conjugate transpose of
    degree -k of the input.  Unitary-valued loops satisfy
    ``mul(star(g), g) = I``.
    """
    band = np.conj(np.transpose(g.coeffs[::-1], (0, 2, 1)))
    return _wrap(band, g.trunc)


def eval_loop(g: TwistedLoop, point) -> np.ndarray:
    """Evaluate the Laurent series at a CirclePoint (or raw complex lambda)."""
    lam = point.lam if isinstance(point, CirclePoint) else complex(point)
    powers = lam ** g.degrees
    return np.tensordot(powers, g.coeffs, axes=(0, 0))


def circle_samples(count: int) -> np.ndarray:
    """`count` equispaced lambda values on the unit circle."""
    return np.exp(2j * np.pi * np.arange(count) / count)


def sample_count(trunc: int) -> int:
    """Next power of two >= 4N; prevents aliasing in FFT round trips."""
    return 1 << max(3, ceil(log2(max(4 * trunc, 8))))


def eval_on_samples(band: np.ndarray, count: int) -> np.ndarray:
    """Evaluate a coefficient band at `count` uniform circle points via FFT."""
    trunc = (band.shape[0] - 1) // 2
    placed = np.zeros((count, 2, 2), dtype=complex)
    for k in range(-trunc, trunc + 1):
        placed[k % count] += band[k + trunc]
    return count * np.fft.ifft(placed, axis=0)


def band_from_samples(values: np.ndarray, trunc: int) -> np.ndarray:
    """Recover coefficients [-trunc, trunc] from uniform circle samples."""
    count = values.shape[0]
    spectrum = np.fft.fft(values, axis=0) / count
    band = np.empty((2 * trunc + 1, 2, 2), dtype=complex)
    for k in range(-trunc, trunc + 1):
        band[k + trunc] = spectrum[k % count]
    return band


def inverse(g: TwistedLoop) -> TwistedLoop:
    """Pointwise inverse on the circle, mapped back to coefficients by FFT.

    Raises SingularLoop when any sampled determinant is below threshold.
    """
    count = sample_count(g.trunc)
    vals = eval_on_samples(g.coeffs, count)
    det = vals[:, 0, 0] * vals[:, 1, 1] - vals[:, 0, 1] * vals[:, 1, 0]
    if np.min(np.abs(det)) < _DET_FLOOR:
        raise SingularLoop(
            f"loop determinant falls to {np.min(np.abs(det)):.3e} on the circle"
        )
    adj = np.empty_like(vals)
    adj[:, 0, 0] = vals[:, 1, 1]
    adj[:, 1, 1] = vals[:, 0, 0]
    adj[:, 0, 1] = -vals[:, 0, 1]
    adj[:, 1, 0] = -vals[:, 1, 0]
    inv_vals = adj / det[:, None, None]
    return _wrap(band_from_samples(inv_vals, g.trunc), g.trunc)


def theta_derivative(g: TwistedLoop) -> TwistedLoop:
    """d/dtheta along lambda = exp(i theta); scales degree k by i*k."""
    factors = 1j * g.degrees
    return _wrap(g.coeffs * factors[:, None, None], g.trunc)


def _scalar_series_mul(a: np.ndarray, b: np.ndarray, trunc: int) -> np.ndarray:
    """Scalar Laurent product truncated to [-trunc, trunc]."""
    full = np.convolve(a, b)
    mid = (len(full) - 1) // 2
    return full[mid - trunc:mid + trunc + 1]


def exp_axis(x, trunc: int = DEFAULT_TRUNC) -> TwistedLoop:
    """Exponential exp(x * A) with A = [[0,1],[1,0]] and scalar Laurent x.

    Returns cosh(x) I + sinh(x) A as a truncated series.  The argument must
    have odd-degree support only, so the result is twist-compatible; exact
    (up to truncation) because A squares to the identity.
    """
    coeffs = x if isinstance(x, dict) else dict(x)
    xs = np.zeros(2 * trunc + 1, dtype=complex)
    for degree, value in coeffs.items():
        if value == 0:
            continue
        if degree % 2 == 0:
            raise TwistViolation("exp_axis argument must have odd-degree support")
        if abs(degree) > trunc:
            raise ValueError(f"degree {degree} outside [-{trunc}, {trunc}]")
        xs[degree + trunc] = complex(value)

    cosh = np.zeros_like(xs)
    sinh = np.zeros_like(xs)
    term = np.zeros_like(xs)
    term[trunc] = 1.0  # x^0 / 0!
    cosh += term
    for k in range(1, 400):
        term = _scalar_series_mul(term, xs, trunc) / k
        tmax = np.max(np.abs(term))
        if k % 2:
            sinh += term
        else:
            cosh += term
        if tmax < 1e-20 * (1.0 + np.max(np.abs(cosh))):
            break

    band = (cosh[:, None, None] * IDENTITY2[None]
            + sinh[:, None, None] * OFF_AXIS[None])
    return _wrap(band, trunc)


def loop_distance(a: TwistedLoop, b: TwistedLoop) -> float:
    """Max-abs coefficient distance (bands aligned by degree)."""
    trunc = max(a.trunc, b.trunc)
    return float(np.max(np.abs(
        retruncate(a, trunc).coeffs - retruncate(b, trunc).coeffs
    )))


def unitarity_defect(g: TwistedLoop) -> float:
    """Coefficient distance of star(g) * g from the identity loop."""
    return loop_distance(mul(star(g), g), identity_loop(g.trunc))
