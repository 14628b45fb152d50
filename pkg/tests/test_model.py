import json

import pytest
from hypothesis import given, strategies as st

from vmwarmup.model import (AnalysisConfig, BenchKey, ClassifiedExecution, ExecClass,
                            ModelError, PairClass, PairKind, ProcessExecution, Segment,
                            check_tiling, default_config)

names = st.text(st.characters(codec="utf-8", exclude_categories=("Cs",)), min_size=1, max_size=8)
keys = st.builds(BenchKey, names, names, names)
pos_times = st.floats(min_value=1e-9, max_value=1e3, allow_nan=False)


def test_default_config_constants():
    cfg = default_config()
    assert cfg.delta_s == 0.001
    assert cfg.steady_state_len == 500
    assert cfg.bootstrap_iters == 100000
    assert cfg.outlier_window == 200 and cfg.outlier_ignore_prefix == 200
    assert cfg.outlier_multiplier == 3
    assert cfg.penalty_coeff == 15
    assert cfg.ci_level == 0.99
    assert cfg.iqr_percentiles == (0.05, 0.95)
    assert cfg.aperf_ratio_tolerance == 0.03
    assert cfg.idle_core_divisor == 1000
    assert cfg.georges_cov_threshold == 0.01
    assert cfg.rng_seed == 0


@pytest.mark.parametrize("change", [
    {"delta_s": 0.0}, {"ci_level": 1.0}, {"iqr_percentiles": (0.9, 0.1)},
    {"outlier_window": 0}, {"bootstrap_iters": -1}, {"rng_seed": -1},
])
def test_config_rejects_invalid(change):
    with pytest.raises(ModelError):
        AnalysisConfig(**change)


def test_config_roundtrip_and_unknown_keys():
    cfg = default_config().replace(rng_seed=7, bootstrap_iters=10)
    assert AnalysisConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg
    with pytest.raises(ModelError):
        AnalysisConfig.from_dict({"nope": 1})


def test_benchkey_rejects_empty():
    with pytest.raises(ModelError):
        BenchKey("m", "", "b")


@given(keys)
def test_benchkey_roundtrip(key):
    assert BenchKey.from_dict(json.loads(json.dumps(key.to_dict()))) == key


@given(keys, st.integers(0, 100), st.lists(pos_times, min_size=1, max_size=30), st.data())
def test_execution_roundtrip(key, idx, times, data):
    ncores = data.draw(st.integers(0, 3))
    counts = st.lists(st.lists(st.integers(0, 10**12), min_size=len(times), max_size=len(times)),
                      min_size=ncores, max_size=ncores)
    cyc = data.draw(counts) if ncores else None
    e = ProcessExecution(key, idx, times, cyc, cyc, cyc)
    assert ProcessExecution.from_dict(json.loads(json.dumps(e.to_dict()))) == e


def test_execution_rejects_bad_times():
    k = BenchKey("m", "v", "b")
    with pytest.raises(ModelError, match="iteration 2"):
        ProcessExecution(k, 0, [0.1, -0.1])
    with pytest.raises(ModelError):
        ProcessExecution(k, 0, [])
    with pytest.raises(ModelError):
        ProcessExecution(k, 0, [0.1, float("nan")])
    with pytest.raises(ModelError, match="cores"):
        ProcessExecution(k, 0, [0.1, 0.1], aperf=[[1, 1]], mperf=[[1, 1], [1, 1]])
    with pytest.raises(ModelError, match="length"):
        ProcessExecution(k, 0, [0.1, 0.1], core_cycles=[[1]])


@given(st.lists(st.tuples(st.integers(1, 50), st.floats(1e-3, 10), st.floats(0, 1)),
                min_size=1, max_size=6))
def test_segment_tiling_roundtrip(spans):
    segs, start = [], 1
    for length, mean, var in spans:
        segs.append(Segment(start, start + length - 1, mean, var))
        start += length
    n = start - 1
    check_tiling(segs, n)
    assert [Segment.from_dict(json.loads(json.dumps(s.to_dict()))) for s in segs] == segs


def test_tiling_detects_gaps():
    with pytest.raises(ModelError):
        check_tiling([Segment(1, 3, 1, 0), Segment(5, 6, 1, 0)], 6)
    with pytest.raises(ModelError):
        check_tiling([Segment(1, 3, 1, 0)], 4)


def test_pair_class_invariants_and_label():
    pc = PairClass(PairKind.BAD_INCONSISTENT,
                   ((ExecClass.WARMUP, 8), (ExecClass.SLOWDOWN, 22)))
    assert pc.total == 30
    assert pc.label() == "bad inconsistent (22 slowdown, 8 warmup)"
    assert PairClass.from_dict(json.loads(json.dumps(pc.to_dict()))) == pc
    with pytest.raises(ModelError):
        PairClass(PairKind.WARMUP, ((ExecClass.WARMUP, 3), (ExecClass.FLAT, 1)))


def test_classified_execution_steady_invariants():
    e = ProcessExecution(BenchKey("m", "v", "b"), 0, [0.1] * 4)
    segs = (Segment(1, 4, 0.1, 0.0),)
    ce = ClassifiedExecution(e, (), segs, ExecClass.FLAT, 1, 0.0, 0)
    assert ClassifiedExecution.from_dict(json.loads(json.dumps(ce.to_dict())), e) == ce
    with pytest.raises(ModelError):
        ClassifiedExecution(e, (), segs, ExecClass.FLAT, 2, 0.1, 0)
    with pytest.raises(ModelError):
        ClassifiedExecution(e, (), segs, ExecClass.NO_STEADY_STATE, 1, 0.0, 0)
    with pytest.raises(ModelError):
        ClassifiedExecution(e, (), segs, ExecClass.WARMUP)
    with pytest.raises(ModelError):
        ClassifiedExecution(e, (9,), segs, ExecClass.NO_STEADY_STATE)
