"""Executable forms of the SGD knowledge-gain monotonicity bound.

Notation: one epoch of SGD maps weights ``A`` to ``C = A - eta * B`` where
``B`` is the accumulated gradient.  For p = 2 the gain difference satisfies
``G(C) - G(A) >= D(eta) / (N * gamma)`` with ``D`` quadratic in ``eta``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lowrank import evbmf

# absolute slack for D(eta) and gain comparisons
CHECK_TOL = 1e-9


def _matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {a.shape}")
    return a


def _pair(a_mat, b_mat):
    a, b = _matrix(a_mat), _matrix(b_mat)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if not np.any(a):
        raise ValueError("A must be nonzero")
    return a, b


def spectral_norm(m: np.ndarray) -> float:
    return float(np.linalg.svd(m, compute_uv=False)[0]) if m.size else 0.0


def raw_knowledge_gain(m, p: int = 2) -> float:
    """Gain over the full raw spectrum, N = the smaller matrix dimension."""
    if p not in (1, 2):
        raise ValueError(f"p must be 1 or 2, got {p!r}")
    a = _matrix(m)
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        raise ValueError("knowledge gain is undefined for a zero matrix")
    return float(np.sum((s / s[0]) ** p) / min(a.shape))


def quadratic_coefficients(a_mat, b_mat) -> tuple[float, float]:
    """(a, b) with D(eta) = a*eta**2 - b*eta."""
    a, b = _pair(a_mat, b_mat)
    na, nb = spectral_norm(a), spectral_norm(b)
    tr_aa = float(np.sum(a * a))
    tr_bb = float(np.sum(b * b))
    tr_ab = float(np.sum(a * b))
    quad = tr_bb - (nb**2 / na**2) * tr_aa
    lin = 2.0 * tr_ab + 2.0 * (nb / na) * tr_aa
    return quad, lin


def quadratic_D(a_mat, b_mat, eta: float) -> float:
    quad, lin = quadratic_coefficients(a_mat, b_mat)
    return quad * eta**2 - lin * eta


@dataclass(frozen=True)
class BoundReport:
    eta_lower: float
    d_value: float
    denominator: float
    feasible: bool


def lr_lower_bound(a_mat, b_mat) -> BoundReport:
    """Smallest eta with D(eta) >= 0, when the quadratic opens upward.

    ``d_value`` is D evaluated at ``eta_lower``.  When the leading
    coefficient is not positive no such bound exists; ``feasible`` is False
    and ``eta_lower`` is 0.
    """
    quad, lin = quadratic_coefficients(a_mat, b_mat)
    if quad > 0:
        eta = max(lin / quad, 0.0)
        return BoundReport(eta, quad * eta**2 - lin * eta, quad, True)
    return BoundReport(0.0, 0.0, quad, False)


def p1_leading_coefficient(a_mat, b_mat) -> float:
    """Leading coefficient of the p = 1 quadratic; the p = 1 argument needs it >= 0.

    The rank multiplier is the EVBMF rank of A, i.e. the size of its
    low-rank part (zero for pure noise).
    """
    a, b = _pair(a_mat, b_mat)
    rank_a = evbmf(a).estimated_rank
    na, nb = spectral_norm(a), spectral_norm(b)
    return float(np.sum(b * b) - rank_a * (nb**2 / na**2) * np.sum(a * a))


@dataclass
class TheoryReport:
    trials: int
    feasible: int = 0
    d_violations: int = 0
    gain_violations: int = 0
    p1_violations: int = 0

    @property
    def p1_violation_rate(self) -> float:
        return self.p1_violations / self.trials if self.trials else 0.0

    @property
    def passed(self) -> bool:
        return self.d_violations == 0 and self.gain_violations == 0

    def lines(self) -> list[str]:
        return [
            f"trials            {self.trials}",
            f"feasible          {self.feasible}",
            f"D violations      {self.d_violations}",
            f"gain violations   {self.gain_violations}",
            f"p=1 a<0 frequency {self.p1_violation_rate:.4f} ({self.p1_violations}/{self.trials})",
            f"result            {'PASS' if self.passed else 'FAIL'}",
        ]


def sample_pair(rng: np.random.Generator, rows: int, cols: int) -> tuple[np.ndarray, np.ndarray]:
    """Random (weights, accumulated gradient) pair.

    Weights are a rank-one spike of random strength over Gaussian noise, so
    both diffuse and strongly structured A occur; B is Gaussian at a random
    scale.
    """
    u = rng.normal(size=rows)
    v = rng.normal(size=cols)
    spike = rng.uniform(0.0, 3.0)
    a = spike * np.outer(u, v) + rng.normal(size=(rows, cols))
    b = 10.0 ** rng.uniform(-2.0, 0.0) * rng.normal(size=(rows, cols))
    return a, b


def theory_check(trials: int, seed: int, rows: int = 8, cols: int = 8, zero_b: bool = False) -> TheoryReport:
    """Sample pairs and test the p = 2 bound at eta = bound and 2 * bound."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    report = TheoryReport(trials=trials)
    for _ in range(trials):
        a, b = sample_pair(rng, rows, cols)
        if zero_b:
            b = np.zeros_like(b)
        if p1_leading_coefficient(a, b) < 0:
            report.p1_violations += 1
        bound = lr_lower_bound(a, b)
        if not bound.feasible:
            continue
        report.feasible += 1
        g_a = raw_knowledge_gain(a, p=2)
        d_bad = gain_bad = False
        for eta in (bound.eta_lower, 2.0 * bound.eta_lower):
            if quadratic_D(a, b, eta) < -CHECK_TOL:
                d_bad = True
            c = a - eta * b
            if np.any(c) and raw_knowledge_gain(c, p=2) < g_a - CHECK_TOL:
                gain_bad = True
        report.d_violations += d_bad
        report.gain_violations += gain_bad
    return report
