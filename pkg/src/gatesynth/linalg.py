"""Dense complex linear algebra primitives used throughout the package.

All Hamiltonians are stored in frequency units of cycles per nanosecond (GHz),
so a frequency multiplied by a time in nanoseconds is a phase in cycles.
``expm_i`` inserts the factor of 2 pi that converts cycles to radians.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvalidInputError, NonHermitianError

HERMITICITY_ATOL = 1e-10


@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition of a Hermitian matrix.

    Attributes
    ----------
    eigenvalues : ndarray
        Real eigenvalues in ascending order.
    eigenvectors : ndarray
        Orthonormal eigenvectors as columns, in the order of `eigenvalues`,
        with each column's largest-magnitude component made real positive.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def is_hermitian(a: np.ndarray, atol: float = HERMITICITY_ATOL) -> bool:
    """Return True if `a` is square and elementwise equal to its conjugate transpose."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    return bool(np.max(np.abs(a - a.conj().T)) <= atol)


def _require_hermitian(a: np.ndarray, who: str) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{who} requires a square matrix, got shape {a.shape}")
    if not is_hermitian(a):
        dev = float(np.max(np.abs(a - a.conj().T)))
        raise NonHermitianError(
            f"{who} requires a Hermitian matrix; max |A - A^dag| = {dev:.3e}"
        )
    return a


def ladder_ops(levels: int) -> tuple[np.ndarray, np.ndarray]:
    """Truncated bosonic annihilation and creation operators.

    Parameters
    ----------
    levels : int
        Truncation dimension, at least 2.

    Returns
    -------
    (a, adag) : tuple of ndarray
        ``a[n-1, n] = sqrt(n)`` for 1 <= n < levels, zero elsewhere;
        `adag` is the conjugate transpose of `a`.
    """
    if not isinstance(levels, (int, np.integer)) or levels < 2:
        raise DimensionError(f"ladder_ops requires integer levels >= 2, got {levels!r}")
    a = np.diag(np.sqrt(np.arange(1, levels, dtype=float)), k=1)
    return a, a.conj().T


def hermitian_eig(a: np.ndarray) -> Spectrum:
    """Eigendecomposition of a Hermitian matrix with a fixed phase convention.

    Eigenvalues are ascending. Each eigenvector is rescaled by a unit phase so
    that its largest-magnitude component (lowest index on ties) is real and
    positive, which makes dressed-basis results reproducible across runs.

    Raises
    ------
    NonHermitianError
        If `a` deviates from Hermiticity by more than 1e-10 elementwise.
    """
    a = _require_hermitian(a, "hermitian_eig")
    w, v = np.linalg.eigh(a)
    v = v.astype(complex, copy=True)
    anchor = np.argmax(np.abs(v), axis=0)
    cols = np.arange(v.shape[1])
    pivots = v[anchor, cols]
    phases = pivots / np.abs(pivots)
    v = v / phases[np.newaxis, :]
    # exact zero imaginary part for real inputs after the phase fix
    if np.max(np.abs(v.imag)) < 1e-14:
        v = v.real.astype(complex)
    return Spectrum(eigenvalues=w, eigenvectors=v)


def expm_i(a: np.ndarray, dt: float) -> np.ndarray:
    """Unitary ``exp(-2*pi*i * a * dt)`` for Hermitian `a`.

    With `a` in GHz and `dt` in nanoseconds the exponent is in radians.
    Computed by eigendecomposition, so the result is unitary to within the
    orthonormality error of the eigenvectors.
    """
    a = _require_hermitian(a, "expm_i")
    if not np.isfinite(dt):
        raise InvalidInputError(f"expm_i requires finite dt, got {dt!r}")
    w, v = np.linalg.eigh(a)
    phase = np.exp(-2j * np.pi * dt * w)
    return (v * phase[np.newaxis, :]) @ v.conj().T


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two matrices."""
    return np.kron(np.asarray(a), np.asarray(b))


def fft_spectrum(samples: np.ndarray, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """One-sided magnitude spectrum of a real waveform, normalized to peak 1.

    Parameters
    ----------
    samples : array_like
        Uniformly spaced real samples, at least 2.
    dt : float
        Sample spacing. The frequency axis is returned in the reciprocal unit
        (nanosecond spacing gives GHz).

    Returns
    -------
    (frequencies, magnitudes) : tuple of ndarray
        Frequencies from 0 to the Nyquist limit and the spectrum magnitude
        scaled so its maximum is 1 (all zeros if the input is identically 0).
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 1 or samples.size < 2:
        raise InvalidInputError(
            f"fft_spectrum requires a 1-d array of at least 2 samples, got shape {samples.shape}"
        )
    if not (np.isfinite(dt) and dt > 0):
        raise InvalidInputError(f"fft_spectrum requires dt > 0, got {dt!r}")
    freqs = np.fft.rfftfreq(samples.size, d=dt)
    mags = np.abs(np.fft.rfft(samples))
    peak = mags.max()
    if peak > 0:
        mags = mags / peak
    return freqs, mags
