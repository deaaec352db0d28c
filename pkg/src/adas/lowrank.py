"""Singular spectra and the empirical VBMF low-rank estimate.

``evbmf`` implements the global analytic solution of fully observed
variational Bayesian matrix factorization with flat priors (Nakajima et al.,
JMLR 2013).  The noise variance is picked by bounded one-dimensional
minimization of the VB free energy, then every singular value above the
analytic threshold is kept and shrunk in closed form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TAU_BAR_COEF = 2.5129
ZERO_REL_TOL = 1e-12
SIGMA2_TOL = 1e-12
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_SCAN_POINTS = 9


@dataclass(frozen=True)
class SingularSpectrum:
    values: np.ndarray
    rows: int
    cols: int

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class EvbmfResult:
    estimated_rank: int
    shrunk_values: np.ndarray
    noise_variance: float
    threshold: float
    # raw spectrum of the (L <= M) oriented matrix, kept for diagnostics
    raw_values: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0))


def _as_finite_matrix(m) -> np.ndarray:
    y = np.asarray(m, dtype=np.float64)
    if y.ndim != 2 or min(y.shape) < 1:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {y.shape}")
    if not np.all(np.isfinite(y)):
        raise ValueError("matrix has non-finite entries")
    return y


def singular_values(m) -> SingularSpectrum:
    """Descending singular values of ``m``; L <= M orientation is recorded."""
    y = _as_finite_matrix(m)
    if y.shape[0] > y.shape[1]:
        y = y.T
    s = np.linalg.svd(y, compute_uv=False)
    return SingularSpectrum(values=np.maximum(s, 0.0), rows=y.shape[0], cols=y.shape[1])


def evbmf_constants(L: int, M: int) -> tuple[float, float, float]:
    """(alpha, tau_bar, x_bar) for an L x M problem with L <= M."""
    alpha = L / M
    tau_bar = TAU_BAR_COEF * math.sqrt(alpha)
    x_bar = (1.0 + tau_bar) * (1.0 + alpha / tau_bar)
    return alpha, tau_bar, x_bar


def sigma2_bounds(s: np.ndarray, L: int, M: int) -> tuple[float, float]:
    """Search interval for the noise variance given a full descending spectrum of length L."""
    alpha, _, x_bar = evbmf_constants(L, M)
    k = min(math.ceil(L / (1.0 + alpha)) - 1, L)
    upper = float(np.sum(s**2)) / (L * M)
    lower = max(s[k] ** 2 / (M * x_bar), float(np.mean(s[k:] ** 2)) / M)
    return float(lower), upper


def _tau(x: np.ndarray, alpha: float) -> np.ndarray:
    y = np.sqrt(np.maximum((x - (1.0 + alpha)) ** 2 - 4.0 * alpha, 0.0))
    return 0.5 * (x - (1.0 + alpha) + y)


def free_energy(sigma2: float, s: np.ndarray, L: int, M: int) -> float:
    """VB free energy (scaled by 2/M, additive constants dropped) at noise variance ``sigma2``.

    ``s`` is the full spectrum of length L; exact zeros contribute only
    through the log(sigma2) term.
    """
    alpha, _, x_bar = evbmf_constants(L, M)
    nz = s[s > 0]
    x = nz**2 / (M * sigma2)
    big = x > x_bar
    xs, xb = x[~big], x[big]
    tau = _tau(xb, alpha)
    obj = np.sum(xs - np.log(xs))
    obj += np.sum(xb - tau + np.log((tau + 1.0) / xb) + alpha * np.log(tau / alpha + 1.0))
    return float(obj + (L - len(nz)) * math.log(sigma2))


def golden_section(f, a: float, b: float, tol: float = SIGMA2_TOL) -> tuple[float, float]:
    """Minimize a unimodal ``f`` on [a, b]; returns (x, f(x))."""
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def _minimize_sigma2(s: np.ndarray, L: int, M: int, lower: float, upper: float) -> float:
    # Retention changes at sigma2 = s_h^2 / (M x_bar); the objective is smooth
    # between those breakpoints, so each piece is searched separately.
    _, _, x_bar = evbmf_constants(L, M)
    cuts = s[s > 0] ** 2 / (M * x_bar)
    edges = np.unique(np.concatenate([[lower, upper], cuts[(cuts > lower) & (cuts < upper)]]))

    def f(v):
        return free_energy(v, s, L, M)

    best_x, best_f = upper, f(upper)
    for lo, hi in zip(edges[:-1], edges[1:]):
        grid = np.linspace(lo, hi, _SCAN_POINTS)
        vals = [f(g) for g in grid]
        i = int(np.argmin(vals))
        if vals[i] < best_f:
            best_x, best_f = float(grid[i]), vals[i]
        a, b = grid[max(i - 1, 0)], grid[min(i + 1, _SCAN_POINTS - 1)]
        x, fx = golden_section(f, float(a), float(b))
        if fx < best_f:
            best_x, best_f = x, fx
    return best_x


def vb_shrinkage(gamma: np.ndarray, L: int, M: int, sigma2: float) -> np.ndarray:
    """Closed-form EVB estimate for retained singular values ``gamma``."""
    gamma = np.asarray(gamma, dtype=np.float64)
    q = (L + M) * sigma2 / gamma**2
    disc = np.maximum((1.0 - q) ** 2 - 4.0 * L * M * sigma2**2 / gamma**4, 0.0)
    return 0.5 * gamma * (1.0 - q + np.sqrt(disc))


def evbmf(m) -> EvbmfResult:
    """Empirical VBMF of ``m``: noise variance, analytic rank and shrunk spectrum.

    The matrix is transposed internally so that L <= M.  Singular values
    below ``1e-12 * sigma_1`` count as exact zeros.  A zero matrix returns
    rank 0 with zero noise variance and threshold.
    """
    spec = singular_values(m)
    L, M = spec.rows, spec.cols
    s = spec.values.copy()
    empty = np.zeros(0)
    if s[0] == 0.0:
        return EvbmfResult(0, empty, 0.0, 0.0, s)
    s[s < ZERO_REL_TOL * s[0]] = 0.0

    lower, upper = sigma2_bounds(s, L, M)
    # work on sigma2 / upper so the tolerance is scale free
    scale = upper
    sn = s / math.sqrt(scale)
    lo_n = max(lower / scale, ZERO_REL_TOL)
    if lo_n >= 1.0:
        sigma2_n = 1.0
    else:
        sigma2_n = _minimize_sigma2(sn, L, M, lo_n, 1.0)
    sigma2 = sigma2_n * scale

    _, _, x_bar = evbmf_constants(L, M)
    cutoff = M * sigma2 * x_bar
    keep = s**2 > cutoff
    shrunk = vb_shrinkage(s[keep], L, M, sigma2) if keep.any() else empty
    return EvbmfResult(int(keep.sum()), shrunk, float(sigma2), math.sqrt(cutoff), s)
