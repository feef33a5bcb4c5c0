"""Iwasawa and Birkhoff splittings of twisted loops.

Iwasawa ``g = F h_plus`` (F unitary on the circle, h_plus holomorphic in the
disk with lambda^0 coefficient upper triangular, real positive diagonal) is
computed through the positive-loop spectral factorization of
``star(g) g = star(h_plus) h_plus``: the coefficient band of ``star(g) g``
is laid out as a Hermitian block-Toeplitz matrix whose Cholesky factor is
banded Toeplitz up to a corner correction that decays away from the corner,
so the last block row converges to the coefficients of ``h_plus``.

Birkhoff ``g = g_minus g_plus`` (g_minus based at I at lambda = infinity) is
a banded linear solve for ``X = g_minus^{-1}``: the negative-degree
coefficients of ``X g`` must vanish.  The conditioning of that system is the
numerical detector for the complement of the big cell.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure, OutsideBigCell, SingularLoop
from .loops import TwistedLoop, _wrap, band_mul, project_parity, retruncate

RESIDUAL_TOL = 1e-8
COND_THRESHOLD = 1e12
_TRIM_TOL = 1e-15


# ---------------------------------------------------------------------------
# batched band algebra (coefficient bands stacked along a leading axis)
# ---------------------------------------------------------------------------

def _fft_count(total_band: int) -> int:
    count = 8
    while count < 2 * total_band + 2:
        count *= 2
    return count


def stack_samples(bands: np.ndarray, count: int) -> np.ndarray:
    """Evaluate stacked bands (M, 2K+1, 2, 2) at `count` circle points."""
    trunc = (bands.shape[1] - 1) // 2
    m = bands.shape[0]
    if count < 2 * trunc + 2:
        raise ValueError("sample count too small for the band width")
    placed = np.zeros((m, count, 2, 2), dtype=complex)
    idx = np.mod(np.arange(-trunc, trunc + 1), count)
    placed[:, idx] = bands
    return count * np.fft.ifft(placed, axis=1)


def stack_band(values: np.ndarray, trunc: int) -> np.ndarray:
    """Coefficients [-trunc, trunc] of stacked circle samples (M, C, 2, 2)."""
    count = values.shape[1]
    spec = np.fft.fft(values, axis=1) / count
    idx = np.mod(np.arange(-trunc, trunc + 1), count)
    return spec[:, idx]


def stack_star_band(bands: np.ndarray) -> np.ndarray:
    return np.conj(np.transpose(bands[:, ::-1], (0, 1, 3, 2)))


def stack_mul(a: np.ndarray, b: np.ndarray, out_trunc: int) -> np.ndarray:
    """Product of stacked bands, truncated to [-out_trunc, out_trunc]."""
    ka = (a.shape[1] - 1) // 2
    kb = (b.shape[1] - 1) // 2
    count = _fft_count(ka + kb)
    vals = stack_samples(a, count) @ stack_samples(b, count)
    return stack_band(vals, out_trunc)


def _positive_band_stack(g_bands: np.ndarray) -> np.ndarray:
    """Hermitian band of star(g) g for stacked loops, at doubled band."""
    k = (g_bands.shape[1] - 1) // 2
    p = stack_mul(stack_star_band(g_bands), g_bands, 2 * k)
    return 0.5 * (p + stack_star_band(p))


def _effective_band(bands: np.ndarray) -> int:
    """Largest |degree| carrying mass above the trim threshold."""
    trunc = (bands.shape[1] - 1) // 2
    mags = np.max(np.abs(bands), axis=(0, 2, 3))
    scale = mags.max() if mags.size else 0.0
    if scale == 0.0:
        return 0
    keep = np.nonzero(mags > _TRIM_TOL * scale)[0]
    return int(max(abs(keep.min() - trunc), abs(keep.max() - trunc)))


def _toeplitz_stack(p_bands: np.ndarray, n_blocks: int) -> np.ndarray:
    """Hermitian block-Toeplitz matrices T[j,k] = P_{k-j} as (M, 2n, 2n)."""
    m = p_bands.shape[0]
    trunc = (p_bands.shape[1] - 1) // 2
    padded = np.zeros((m, 2 * n_blocks + 1, 2, 2), dtype=complex)
    lo = max(0, n_blocks - trunc)
    hi = min(2 * n_blocks + 1, n_blocks + trunc + 1)
    padded[:, lo:hi] = p_bands[:, lo - n_blocks + trunc:hi - n_blocks + trunc]
    j, k = np.meshgrid(np.arange(n_blocks), np.arange(n_blocks), indexing="ij")
    blocks = padded[:, (k - j) + n_blocks]          # (M, n, n, 2, 2)
    t = blocks.transpose(0, 1, 3, 2, 4).reshape(m, 2 * n_blocks, 2 * n_blocks)
    return t


def bauer_plus_stack(p_bands: np.ndarray, out_band: int,
                     n_blocks: int | None = None) -> np.ndarray:
    """Spectral factor Q (plus band, (M, out_band+1, 2, 2)) of stacked P.

    P must be Hermitian positive definite on the circle; then
    ``P = star(Q) Q`` with ``Q_0`` diagonal real positive.
    Raises numpy.linalg.LinAlgError if a Cholesky factorization fails.
    """
    k_eff = max(_effective_band(p_bands), 1)
    if n_blocks is None:
        n_blocks = max(k_eff + max(k_eff, 16), out_band + 2)
    lower = np.linalg.cholesky(_toeplitz_stack(p_bands, n_blocks))
    m = p_bands.shape[0]
    top = min(out_band, n_blocks - 1)
    q = np.zeros((m, out_band + 1, 2, 2), dtype=complex)
    row = lower[:, 2 * (n_blocks - 1):2 * n_blocks]
    for deg in range(top + 1):
        col = 2 * (n_blocks - 1 - deg)
        q[:, deg] = np.conj(np.transpose(row[:, :, col:col + 2], (0, 2, 1)))
    return q


def plus_band_to_full(q: np.ndarray, trunc: int) -> np.ndarray:
    """Embed a plus band (M, K+1, 2, 2) into a full band (M, 2*trunc+1, 2, 2)."""
    m, kq = q.shape[0], q.shape[1] - 1
    full = np.zeros((m, 2 * trunc + 1, 2, 2), dtype=complex)
    top = min(kq, trunc)
    full[:, trunc:trunc + top + 1] = q[:, :top + 1]
    return full


def minus_band_to_full(g: np.ndarray, trunc: int) -> np.ndarray:
    """Embed a minus band (M, K+1, 2, 2), degree -d at index d, into full form."""
    m, kg = g.shape[0], g.shape[1] - 1
    full = np.zeros((m, 2 * trunc + 1, 2, 2), dtype=complex)
    top = min(kg, trunc)
    for d in range(top + 1):
        full[:, trunc - d] = g[:, d]
    return full


def iwasawa_stack(g_bands: np.ndarray, trunc: int):
    """Iwasawa data for stacked full bands: (F_band, plus_band, residual).

    plus_band comes back in plus form (M, trunc+1, 2, 2); F_band in full form
    truncated to `trunc`.  residual is the per-node sampled reconstruction
    error of F * plus against g.
    """
    count = _fft_count(3 * trunc)
    q = bauer_plus_stack(_positive_band_stack(g_bands), 2 * trunc)
    q_vals = stack_samples(plus_band_to_full(q, 2 * trunc), count)
    g_vals = stack_samples(g_bands, count)
    f_vals = g_vals @ np.linalg.inv(q_vals)
    f_band = stack_band(f_vals, trunc)
    recon = stack_samples(f_band, count) @ q_vals
    residual = np.max(np.abs(recon - g_vals), axis=(1, 2, 3))
    plus = q[:, :trunc + 1]
    return f_band, plus, residual


# ---------------------------------------------------------------------------
# public single-loop API
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IwasawaPair:
    """Unitary times plus splitting g = unitary_factor * plus_factor."""

    unitary_factor: TwistedLoop
    plus_factor: TwistedLoop


@dataclass(frozen=True)
class BirkhoffPair:
    """Minus times plus splitting g = minus_factor * plus_factor."""

    minus_factor: TwistedLoop
    plus_factor: TwistedLoop


def iwasawa(g: TwistedLoop, residual_tol: float = RESIDUAL_TOL) -> IwasawaPair:
    """Split g into a unitary loop and a plus loop normalized in B.

    Raises SingularLoop when star(g) g fails to be positive definite on the
    circle, and ConvergenceFailure when the reconstruction residual exceeds
    `residual_tol` relative to the size of g.
    """
    bands = g.coeffs[None]
    try:
        f_band, plus, residual = iwasawa_stack(bands, g.trunc)
    except np.linalg.LinAlgError as exc:
        raise SingularLoop(
            "star(g) g is not numerically positive definite on the circle"
        ) from exc
    scale = max(1.0, g.norm())
    if residual[0] > residual_tol * scale:
        raise ConvergenceFailure(
            f"Iwasawa residual {residual[0]:.3e} above tolerance "
            f"{residual_tol * scale:.3e}"
        )
    unitary = _wrap(f_band[0], g.trunc)
    plus_loop = _wrap(plus_band_to_full(plus, g.trunc)[0], g.trunc)
    return IwasawaPair(unitary, plus_loop)


def _birkhoff_system(c_band: np.ndarray, trunc: int, unknowns: int):
    """Assemble (B, R) for the row-block system X B = R over minus unknowns."""
    def coef(degree):
        if abs(degree) > trunc:
            return np.zeros((2, 2), dtype=complex)
        return c_band[degree + trunc]

    k = unknowns
    big = np.zeros((2 * k, 2 * k), dtype=complex)
    rhs = np.zeros((2, 2 * k), dtype=complex)
    for j in range(1, k + 1):
        for c in range(k):
            big[2 * (j - 1):2 * j, 2 * c:2 * c + 2] = coef(j - 1 - c)
    for c in range(k):
        rhs[:, 2 * c:2 * c + 2] = -coef(-1 - c)
    return big, rhs


def _unipotent_minus_inverse(x_blocks: np.ndarray) -> np.ndarray:
    """Invert I + sum_{d>=1} X_d lambda^{-d}; returns blocks in minus form."""
    k = x_blocks.shape[0] - 1
    y = np.zeros_like(x_blocks)
    y[0] = np.eye(2)
    for d in range(1, k + 1):
        acc = np.zeros((2, 2), dtype=complex)
        for j in range(1, d + 1):
            acc += x_blocks[j] @ y[d - j]
        y[d] = -acc
    return y


def birkhoff(g: TwistedLoop, cond_threshold: float = COND_THRESHOLD) -> BirkhoffPair:
    """Birkhoff-factor g into minus (based at I) and plus parts.

    Raises OutsideBigCell when the splitting system is singular beyond the
    conditioning threshold, signalling that g lies off the big cell.
    """
    trunc = g.trunc
    neg = g.coeffs[:trunc]
    if not neg.size or np.max(np.abs(neg)) <= _TRIM_TOL * max(1.0, g.norm()):
        return BirkhoffPair(identity_like(g), g)

    k = trunc
    big, rhs = _birkhoff_system(g.coeffs, trunc, k)
    cond = np.linalg.cond(big)
    if not np.isfinite(cond) or cond > cond_threshold:
        raise OutsideBigCell(
            f"splitting system condition {cond:.3e} beyond threshold"
        )
    x = np.linalg.solve(big.T, rhs.T).T      # X with X B = R
    x_blocks = np.zeros((k + 1, 2, 2), dtype=complex)
    x_blocks[0] = np.eye(2)
    for d in range(1, k + 1):
        x_blocks[d] = x[:, 2 * (d - 1):2 * d]

    minus_inv_full = minus_band_to_full(x_blocks[None], trunc)[0]
    prod = band_mul(minus_inv_full, g.coeffs)
    mid = (prod.shape[0] - 1) // 2
    plus_band = np.zeros((2 * trunc + 1, 2, 2), dtype=complex)
    plus_band[trunc:] = prod[mid:mid + trunc + 1]

    y_blocks = _unipotent_minus_inverse(x_blocks)
    minus_full = minus_band_to_full(y_blocks[None], trunc)[0]
    return BirkhoffPair(_wrap(minus_full, trunc), _wrap(plus_band, trunc))


def identity_like(g: TwistedLoop) -> TwistedLoop:
    band = np.zeros_like(np.asarray(g.coeffs))
    band[g.trunc] = np.eye(2)
    return TwistedLoop(band, g.trunc)


def birkhoff_minus_stack(c_bands: np.ndarray, trunc: int,
                         cond_threshold: float = COND_THRESHOLD):
    """Birkhoff data for stacked full bands.

    Returns (minus_blocks, plus_bands, ok) where minus_blocks is in minus
    form (M, trunc+1, 2, 2), plus_bands in plus form (M, trunc+1, 2, 2) and
    ok flags the nodes inside the big cell.  Nodes outside come back as
    identity factors with ok = False.
    """
    m = c_bands.shape[0]
    k = trunc
    minus = np.zeros((m, k + 1, 2, 2), dtype=complex)
    plus = np.zeros((m, k + 1, 2, 2), dtype=complex)
    ok = np.ones(m, dtype=bool)
    minus[:, 0] = np.eye(2)
    plus[:, 0] = np.eye(2)
    for i in range(m):
        g = _wrap(c_bands[i], trunc)
        try:
            pair = birkhoff(g, cond_threshold)
        except OutsideBigCell:
            ok[i] = False
            continue
        for d in range(k + 1):
            minus[i, d] = pair.minus_factor.coefficient(-d)
            plus[i, d] = pair.plus_factor.coefficient(d)
    return minus, plus, ok


def positive_part_coefficient(pair: IwasawaPair) -> np.ndarray:
    """lambda^0 coefficient of the plus factor (diagonal, positive)."""
    return pair.plus_factor.coefficient(0)
