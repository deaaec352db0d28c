import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adas.lowrank import evbmf
from adas.metrics import LayerMetrics, fmt, knowledge_gain, layer_metrics, mapping_condition
from adas.tensor import Tensor4, fold_mode4, unfold_mode3, unfold_mode4
from oracles import GridEvbmf

spectra = st.lists(st.floats(1e-6, 1e6), min_size=1, max_size=20).map(
    lambda v: sorted(v, reverse=True)
)


class TestKnowledgeGain:
    def test_identity_like(self):
        assert knowledge_gain([1.0] * 7, 7) == 1.0

    def test_two_values(self):
        assert knowledge_gain([1.0, 0.5], 2) == 0.75

    def test_squared(self):
        assert knowledge_gain([2.0, 1.0, 1.0], 4, p=2) == pytest.approx(0.375, abs=1e-15)

    def test_empty(self):
        assert knowledge_gain([], 5) == 0.0

    def test_errors(self):
        with pytest.raises(ValueError):
            knowledge_gain([1.0], 1, p=3)
        with pytest.raises(ValueError):
            knowledge_gain([1.0, 1.0, 1.0], 2)


class TestMappingCondition:
    def test_examples(self):
        assert mapping_condition([2.0, 1.0]) == 2.0
        assert mapping_condition([5.0]) == 1.0
        assert mapping_condition([]) is None


@settings(max_examples=200, deadline=None)
@given(s=spectra, extra=st.integers(0, 10), c=st.floats(1e-3, 1e3), p=st.sampled_from([1, 2]))
def test_gain_and_condition_invariants(s, extra, c, p):
    n = len(s) + extra
    g = knowledge_gain(s, n, p)
    assert 0.0 <= g <= len(s) / n + 1e-15
    kappa = mapping_condition(s)
    assert kappa >= 1.0
    scaled = [c * v for v in s]
    assert knowledge_gain(scaled, n, p) == pytest.approx(g, rel=1e-12)
    assert mapping_condition(scaled) == pytest.approx(kappa, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(s=spectra, extra=st.integers(0, 10))
def test_norm_identities(s, extra):
    n = len(s) + extra
    s = np.asarray(s)
    fro = math.sqrt(float(np.sum(s**2)))
    assert n * s[0] ** 2 * knowledge_gain(s, n, 2) == pytest.approx(fro**2, rel=1e-9)
    g1 = n * s[0] * knowledge_gain(s, n, 1)
    assert fro * (1 - 1e-9) <= g1 <= math.sqrt(len(s)) * fro * (1 + 1e-9)


def test_zero_tensor():
    m = layer_metrics(Tensor4(np.zeros((3, 3, 4, 8))))
    assert (m.g3, m.g4, m.rank3, m.rank4) == (0.0, 0.0, 0, 0)
    assert m.kappa3 is None and m.kappa4 is None and m.kappa_avg is None
    assert m.row()["kappa_avg"] is None


def test_rank_one_mode4():
    rng = np.random.default_rng(8)
    u, v = rng.normal(size=3 * 3 * 4), rng.normal(size=8)
    m4 = 1e3 * np.outer(u, v)
    assert len(GridEvbmf(m4).shrunk(GridEvbmf(m4).minimise()[0])) == 1
    m = layer_metrics(fold_mode4(m4, (3, 3, 4, 8)))
    assert m.rank4 == 1
    assert m.g4 == pytest.approx(1 / 8, abs=1e-15)
    assert m.kappa4 == 1.0


def test_compositional_pipeline():
    rng = np.random.default_rng(21)
    core = rng.normal(size=(144, 4)) @ rng.normal(size=(4, 16))
    t = fold_mode4(10 * core + 0.1 * rng.normal(size=(144, 16)), (3, 3, 16, 16))
    r3, r4 = evbmf(unfold_mode3(t)), evbmf(unfold_mode4(t))
    s3, s4 = r3.shrunk_values, r4.shrunk_values
    g3 = np.sum(s3 / s3[0]) / 16 if len(s3) else 0.0
    g4 = np.sum(s4 / s4[0]) / 16
    m = layer_metrics(t)
    assert m.rank4 >= 1
    assert m.g_avg == pytest.approx((g3 + g4) / 2, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(dims=st.tuples(*[st.integers(1, 4)] * 4), seed=st.integers(0, 2**31), p=st.sampled_from([1, 2]))
def test_layer_metric_invariants(dims, seed, p):
    rng = np.random.default_rng(seed)
    rows = dims[0] * dims[1] * dims[2]
    r = int(rng.integers(1, min(rows, dims[3]) + 1))
    m4 = 5 * rng.normal(size=(rows, r)) @ rng.normal(size=(r, dims[3])) + 0.1 * rng.normal(size=(rows, dims[3]))
    m = layer_metrics(fold_mode4(m4, dims), p=p)
    for g, ratio, kappa in ((m.g3, m.rank_ratio3, m.kappa3), (m.g4, m.rank_ratio4, m.kappa4)):
        assert 0.0 <= g <= ratio + 1e-15 <= 1.0 + 1e-15
        assert kappa is None or kappa >= 1.0
    assert m.g_avg == (m.g3 + m.g4) / 2
    if m.kappa3 is not None and m.kappa4 is not None:
        assert m.kappa_avg == (m.kappa3 + m.kappa4) / 2


def test_kappa_avg_with_one_side_defined():
    m = LayerMetrics(0.1, 0.0, 3.0, None, 1, 0, 0.25, 0.0)
    assert m.kappa_avg == 3.0


def test_fmt():
    assert fmt(None) == "nan"
    assert fmt(float("nan")) == "nan"
    assert fmt(0.1) == "0.1"
    assert float(fmt(1 / 3)) == 1 / 3
    assert fmt(3) == "3"


def test_bad_p():
    with pytest.raises(ValueError):
        layer_metrics(Tensor4(np.ones((1, 1, 2, 2))), p=0)
