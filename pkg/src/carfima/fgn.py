"""Fractional Gaussian noise: covariances, exact simulation, and the
stochastic-integral covariance identities for step functions.

The two kernel-form covariance routes (one for each side of H = 1/2) are
evaluated in closed form for step integrands; together with the direct
increment-covariance double sum they form the oracle pair used to validate
the fractional machinery downstream.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import toeplitz

from .errors import DomainError, EmbeddingNotPSDError

EMBEDDING_EIG_RTOL = 1e-10


@dataclass(frozen=True)
class StepFunction:
    """Piecewise-constant function c_i on (s_i, s_{i+1}], zero elsewhere."""

    breakpoints: tuple[float, ...]
    levels: tuple[float, ...]

    def __post_init__(self):
        bp = tuple(float(s) for s in self.breakpoints)
        lv = tuple(float(c) for c in self.levels)
        if len(bp) != len(lv) + 1 or len(lv) < 1:
            raise DomainError("need m+1 breakpoints for m >= 1 levels")
        if any(nxt <= prv for prv, nxt in zip(bp[:-1], bp[1:])):
            raise DomainError("breakpoints must be strictly ascending")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "levels", lv)

    @property
    def end(self) -> float:
        return self.breakpoints[-1]

    @property
    def end_level(self) -> float:
        return self.levels[-1]


def fgn_autocovariance(H: float, k: int) -> float:
    """Autocovariance of unit-step fractional Gaussian noise at lag k."""
    _check_h(H)
    k = abs(int(k))
    return 0.5 * (abs(k + 1) ** (2 * H) - 2.0 * abs(k) ** (2 * H) + abs(k - 1) ** (2 * H))


def fbm_cov(H: float, s: float, t: float) -> float:
    """Covariance of fractional Brownian motion at times s, t >= 0."""
    _check_h(H)
    if s < 0 or t < 0:
        raise DomainError("fbm_cov is defined for s, t >= 0")
    return 0.5 * (abs(t) ** (2 * H) + abs(s) ** (2 * H) - abs(t - s) ** (2 * H))


def _check_h(H: float):
    if not 0.0 < H < 1.0:
        raise DomainError(f"H must lie in (0, 1), got {H}")


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def simulate_fgn(H: float, n: int, dt: float, seed) -> np.ndarray:
    """n fBm increments over steps of length dt, exact in distribution.

    Circulant embedding of the Toeplitz covariance dt^{2H} gamma_F(k):
    the length-2(n-1) circulant is diagonalized by FFT and sampled in the
    spectral domain.  If an embedding eigenvalue is significantly negative
    the (slower) Cholesky factorization of the Toeplitz matrix is used
    instead.  Deterministic for a given integer seed.
    """
    _check_h(H)
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if dt <= 0:
        raise DomainError(f"dt must be positive, got {dt}")
    rng = _as_rng(seed)
    scale = dt ** (2 * H)
    if n == 1:
        return rng.standard_normal(1) * dt**H
    cov = scale * np.array([fgn_autocovariance(H, k) for k in range(n)])
    m = 2 * (n - 1)
    circ = np.concatenate([cov, cov[-2:0:-1]])
    eig = np.fft.fft(circ).real
    if eig.min() < -EMBEDDING_EIG_RTOL * eig.max():
        warnings.warn(
            f"circulant embedding not PSD (min eig {eig.min():.3e}); "
            "falling back to Toeplitz Cholesky",
            stacklevel=2,
        )
        return _toeplitz_sample(cov, rng)
    eig = np.clip(eig, 0.0, None)
    w = np.zeros(m, dtype=complex)
    w[0] = np.sqrt(eig[0] / m) * rng.standard_normal()
    w[n - 1] = np.sqrt(eig[n - 1] / m) * rng.standard_normal()
    re = rng.standard_normal(n - 2)
    im = rng.standard_normal(n - 2)
    interior = np.sqrt(eig[1 : n - 1] / (2 * m)) * (re + 1j * im)
    w[1 : n - 1] = interior
    w[m - 1 : n - 1 : -1] = np.conj(interior)
    return np.fft.fft(w).real[:n]


def _toeplitz_sample(cov: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    T = toeplitz(cov)
    g0 = cov[0]
    for jitter in (0.0, 1e-12, 1e-10, 1e-8):
        try:
            L = np.linalg.cholesky(T + jitter * g0 * np.eye(len(cov)))
        except np.linalg.LinAlgError:
            continue
        return L @ rng.standard_normal(len(cov))
    raise EmbeddingNotPSDError("Toeplitz fallback factorization failed")


def integral_cov_direct(f: StepFunction, g: StepFunction, H: float) -> float:
    """Covariance of the two step-function fBm integrals by the increment
    double sum (valid for every 0 < H < 1)."""
    _check_h(H)
    s = np.asarray(f.breakpoints)
    t = np.asarray(g.breakpoints)
    c = np.asarray(f.levels)
    d = np.asarray(g.levels)
    twoH = 2 * H

    def pw(x):
        return np.abs(x) ** twoH

    s_lo, s_hi = s[:-1, None], s[1:, None]
    t_lo, t_hi = t[None, :-1], t[None, 1:]
    cell = pw(s_hi - t_lo) + pw(s_lo - t_hi) - pw(t_hi - s_hi) - pw(s_lo - t_lo)
    return 0.5 * float(c @ cell @ d)


def integral_cov_kernel(f: StepFunction, g: StepFunction, H: float) -> float:
    """Same covariance through the kernel forms, one per side of H = 1/2.

    For H > 1/2 the double integral of |u-v|^{2H-2} over each cell has a
    closed antiderivative; for H < 1/2 the boundary term plus the sum over
    the point masses of df is evaluated with the |x|^{2H}/(2H) pieces.
    No numerical quadrature is involved.
    """
    _check_h(H)
    if H == 0.5:
        raise DomainError("kernel forms are defined for H != 1/2")
    s = np.asarray(f.breakpoints)
    t = np.asarray(g.breakpoints)
    c = np.asarray(f.levels)
    d = np.asarray(g.levels)
    twoH = 2 * H

    def pw(x):
        return np.abs(x) ** twoH

    if H > 0.5:
        # H(2H-1) int int |u-v|^{2H-2} over [a,b]x[c,d], antiderivative twice
        a, b = s[:-1, None], s[1:, None]
        lo, hi = t[None, :-1], t[None, 1:]
        cell = (pw(b - lo) - pw(a - lo) - pw(b - hi) + pw(a - hi)) / (twoH * (twoH - 1.0))
        return H * (twoH - 1.0) * float(c @ cell @ d)
    # H < 1/2: boundary term at the endpoint of f's support ...
    s_end = f.end
    term1 = 0.5 * f.end_level * float(d @ (pw(s_end - t[:-1]) - pw(s_end - t[1:])))
    # ... plus the point masses of df at s_0, ..., s_{m-1}
    jumps = np.diff(c, prepend=0.0)  # c_i - c_{i-1}, c_{-1} = 0
    inner = pw(s[:-1, None] - t[None, 1:]) - pw(s[:-1, None] - t[None, :-1])
    term2 = 0.5 * float(jumps @ inner @ d)
    return term1 + term2
