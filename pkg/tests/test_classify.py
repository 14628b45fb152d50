import random

import pytest
from hypothesis import given, settings, strategies as st

from vmwarmup.classify import (classify_execution, classify_pair, segments_equivalent,
                               steady_elapsed, steady_state_start)
from vmwarmup.model import AnalysisConfig, ExecClass, ModelError, PairKind, Segment

from oracles import reference_classify

F, W, S, N = ExecClass.FLAT, ExecClass.WARMUP, ExecClass.SLOWDOWN, ExecClass.NO_STEADY_STATE


def segs(*spec):
    return [Segment(a, b, m, v) for a, b, m, v in spec]


WARMUP = segs((1, 100, 0.35, 1e-6), (101, 2000, 0.26, 1e-6))
SLOWDOWN = segs((1, 300, 0.31, 1e-6), (301, 2000, 0.34, 1e-6))
LATE = segs((1, 1700, 0.3, 1e-6), (1701, 2000, 0.4, 1e-6))
ABC = segs((1, 100, 0.2600, 1e-6), (101, 400, 0.40, 1e-6), (401, 2000, 0.2601, 1e-6))


def test_equivalence_examples():
    a, b = Segment(1, 10, 0.1001, 0.0), Segment(11, 20, 0.1002, 0.0)
    assert segments_equivalent(a, b, 0.001)
    jit, final = Segment(1, 10, 1.2, 0.0), Segment(11, 20, 1.0002, 0.0)
    assert not segments_equivalent(jit, final, 0.001)
    assert segments_equivalent(final, final, 0.001)


def test_equivalence_uses_variance_as_seconds():
    final = Segment(11, 20, 1.0, 0.5)
    assert segments_equivalent(Segment(1, 10, 1.45, 0.0), final, 0.001)
    assert segments_equivalent(Segment(1, 10, 1.8, 0.31), final, 0.001)
    assert not segments_equivalent(Segment(1, 10, 1.8, 0.29), final, 0.001)


@pytest.mark.parametrize("segments,expected", [
    (segs((1, 2000, 0.3, 1e-6)), F),
    (WARMUP, W),
    (SLOWDOWN, S),
    (LATE, N),
    (ABC, W),
])
def test_classify_examples(cfg, segments, expected):
    assert classify_execution(segments, 2000, cfg) is expected
    assert reference_classify(segments, 2000) == expected.value


def test_classify_empty_is_error(cfg):
    with pytest.raises(ModelError):
        classify_execution([], 2000, cfg)


def test_short_series_window_covers_everything(cfg):
    # with fewer iterations than the steady window any difference means no steady state
    assert classify_execution(segs((1, 50, 0.35, 0), (51, 300, 0.26, 0)), 300, cfg) is N


def test_steady_state_start(cfg):
    assert steady_state_start(segs((1, 2000, 0.3, 0)), F, cfg) == (0, 1)
    assert steady_state_start(WARMUP, W, cfg) == (1, 101)
    assert steady_state_start(ABC, W, cfg) == (2, 401)
    assert steady_state_start(LATE, N, cfg) is None


def test_steady_elapsed_examples():
    assert steady_elapsed([0.5, 0.4, 0.3, 0.3], 1) == 0
    assert steady_elapsed([0.5, 0.4, 0.3, 0.3], 3) == pytest.approx(0.9)
    assert steady_elapsed([1.0] * 4, 5) == 4.0
    with pytest.raises(ValueError):
        steady_elapsed([1.0] * 4, 6)


def test_classify_pair_examples():
    bad = classify_pair([S] * 22 + [W] * 8)
    assert bad.kind is PairKind.BAD_INCONSISTENT
    assert bad.count_map[S] == 22 and bad.count_map[W] == 8
    assert bad.label() == "bad inconsistent (22 slowdown, 8 warmup)"
    assert classify_pair([W] * 30).kind is PairKind.WARMUP
    assert classify_pair([F] * 15 + [W] * 15).kind is PairKind.GOOD_INCONSISTENT
    assert classify_pair([F, N]).kind is PairKind.BAD_INCONSISTENT
    with pytest.raises(ModelError):
        classify_pair([])


@st.composite
def segment_lists(draw):
    n = draw(st.integers(2, 3000))
    k = draw(st.integers(0, min(6, n - 1)))
    cuts = sorted(draw(st.lists(st.integers(1, n - 1), min_size=k, max_size=k, unique=True)))
    bounds = [0, *cuts, n]
    out = []
    for a, b in zip(bounds, bounds[1:]):
        mean = draw(st.sampled_from([0.1, 0.1005, 0.1027, 0.21, 0.33]))
        var = draw(st.sampled_from([0.0, 1e-6, 0.002, 0.05]))
        out.append(Segment(a + 1, b, mean, var))
    return out, n


@settings(max_examples=300, deadline=None)
@given(segment_lists(), st.floats(-0.05, 5.0))
def test_properties(sl, shift):
    # grid values keep every comparison well away from its boundary
    segments, n = sl
    cfg = AnalysisConfig()
    cls = classify_execution(segments, n, cfg)
    assert cls in set(ExecClass)
    assert cls.value == reference_classify(segments, n)
    shifted = [Segment(s.start, s.end, s.mean + shift, s.variance) for s in segments]
    assert classify_execution(shifted, n, cfg) is cls
    if cls is not N:
        final = segments[-1]
        for s in segments:
            if s.end > n - cfg.steady_state_len:
                assert segments_equivalent(s, final, cfg.delta_s)
        j, it = steady_state_start(segments, cls, cfg)
        if cls is not F:
            assert all(segments_equivalent(s, final, cfg.delta_s) for s in segments[j:])
            assert j == 0 or not segments_equivalent(segments[j - 1], final, cfg.delta_s)
            assert it == segments[j].start


@settings(max_examples=50, deadline=None)
@given(st.lists(st.sampled_from(list(ExecClass)), min_size=1, max_size=40), st.integers(0, 1000))
def test_pair_permutation_invariance(classes, seed):
    shuffled = list(classes)
    random.Random(seed).shuffle(shuffled)
    assert classify_pair(classes) == classify_pair(shuffled)
