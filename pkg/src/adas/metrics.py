"""Knowledge gain and mapping condition of convolution weights."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lowrank import evbmf
from .tensor import as_tensor4, unfold_mode3, unfold_mode4


def _check_p(p):
    if p not in (1, 2):
        raise ValueError(f"p must be 1 or 2, got {p!r}")


def knowledge_gain(spectrum, channel_size: int, p: int = 1) -> float:
    """Normalised energy ``sum(sigma_i**p) / (N_d * sigma_1**p)`` of a low-rank spectrum.

    An empty spectrum (rank 0) has zero gain.
    """
    _check_p(p)
    s = np.asarray(spectrum, dtype=np.float64)
    if len(s) > channel_size:
        raise ValueError(f"spectrum of length {len(s)} exceeds channel size {channel_size}")
    if len(s) == 0:
        return 0.0
    if not s[0] > 0:
        raise ValueError("leading singular value must be positive")
    return float(np.sum((s / s[0]) ** p) / channel_size)


def mapping_condition(spectrum) -> float | None:
    """``sigma_1 / sigma_last``, or None when the spectrum is empty."""
    s = np.asarray(spectrum, dtype=np.float64)
    if len(s) == 0:
        return None
    return float(s[0] / s[-1])


def _mean_defined(a, b):
    vals = [v for v in (a, b) if v is not None]
    return sum(vals) / len(vals) if vals else None


@dataclass(frozen=True)
class LayerMetrics:
    g3: float
    g4: float
    kappa3: float | None
    kappa4: float | None
    rank3: int
    rank4: int
    rank_ratio3: float
    rank_ratio4: float

    @property
    def g_avg(self) -> float:
        return (self.g3 + self.g4) / 2

    @property
    def kappa_avg(self) -> float | None:
        # an undefined side is dropped rather than averaged in
        return _mean_defined(self.kappa3, self.kappa4)

    def row(self) -> dict:
        return {
            "G3": self.g3,
            "G4": self.g4,
            "G_avg": self.g_avg,
            "kappa3": self.kappa3,
            "kappa4": self.kappa4,
            "kappa_avg": self.kappa_avg,
            "rank_ratio3": self.rank_ratio3,
            "rank_ratio4": self.rank_ratio4,
        }


def layer_metrics(t, p: int = 1) -> LayerMetrics:
    """Unfold, factorise with EVBMF and summarise one conv weight tensor."""
    _check_p(p)
    t = as_tensor4(t)
    n3, n4 = t.dims[2], t.dims[3]
    r3 = evbmf(unfold_mode3(t))
    r4 = evbmf(unfold_mode4(t))
    return LayerMetrics(
        g3=knowledge_gain(r3.shrunk_values, n3, p),
        g4=knowledge_gain(r4.shrunk_values, n4, p),
        kappa3=mapping_condition(r3.shrunk_values),
        kappa4=mapping_condition(r4.shrunk_values),
        rank3=r3.estimated_rank,
        rank4=r4.estimated_rank,
        rank_ratio3=r3.estimated_rank / n3,
        rank_ratio4=r4.estimated_rank / n4,
    )


def fmt(value) -> str:
    """CSV rendering: shortest round-trip repr, 'nan' for undefined."""
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "nan"
    return repr(float(value)) if isinstance(value, float) else str(value)
