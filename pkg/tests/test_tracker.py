"""Association behavior: costs, assignment optimality, lifecycle, reductions."""

import itertools
import math

import numpy as np
import pytest

from sasmot.geometry import Box2D, iou
from sasmot.memory import MemoryConfig, MemoryPolicy
from sasmot.rng import SplitMix64
from sasmot.simulator import ScenarioConfig, generate_scenario
from sasmot.tracker import (
    FORBIDDEN_COST,
    Detection,
    Tracker,
    TrackerConfig,
    build_cost_matrix,
    cosine_distance,
    hungarian_assign,
)


def _det(cx, cy, emb, score=1.0, w=0.1, h=0.1):
    return Detection(Box2D(cx, cy, w, h), np.asarray(emb, dtype=float), score)


E1 = [1.0, 0.0, 0.0]
E2 = [0.0, 1.0, 0.0]
E3 = [0.0, 0.0, 1.0]


def _cfg3(**kw):
    """Tracker config sized for the 3-dim test embeddings."""
    kw.setdefault("memory", MemoryConfig(embedding_dim=3))
    return TrackerConfig(**kw)


def test_cosine_distance_analytic():
    assert cosine_distance([1, 0], [1, 0]) == 0.0
    assert cosine_distance([1, 0], [0, 1]) == 1.0
    assert cosine_distance([1, 0], [-1, 0]) == 2.0
    assert cosine_distance([2, 0], [5, 0]) == 0.0  # scale invariant
    d = cosine_distance([1.0, 0.0], [1.0, 1.0])
    assert math.isclose(d, 1.0 - math.sqrt(0.5), rel_tol=1e-12)


def test_cosine_distance_rejects_zero_norm_and_mismatch():
    with pytest.raises(ValueError):
        cosine_distance([0.0, 0.0], [1.0, 0.0])
    with pytest.raises(ValueError):
        cosine_distance([1.0, 0.0], [1.0, 0.0, 0.0])


def test_cost_blend_formula():
    # Same box (IoU 1) with a 45-degree appearance angle isolates the
    # appearance term: 0.7 * (1 - cos45) / 2.
    tracker = Tracker(_cfg3())
    tracker.step([_det(0.5, 0.5, E1)], 1)
    track = tracker.tracks[0]
    det = _det(0.5, 0.5, [1.0, 1.0, 0.0])
    cost = build_cost_matrix([track], [det], tracker.cfg)
    expected = 0.7 * (1.0 - math.sqrt(0.5)) / 2.0
    assert cost[0, 0] == pytest.approx(expected, rel=1e-12)


def test_orthogonal_disjoint_pair_is_forbidden():
    # Appearance 0.7 * 1/2 = 0.35 plus spatial 0.3 * 1 = 0.65 > 0.4.
    tracker = Tracker(_cfg3())
    tracker.step([_det(0.1, 0.1, E1)], 1)
    det = _det(0.9, 0.9, E2)
    cost = build_cost_matrix(tracker.tracks, [det], tracker.cfg)
    assert cost[0, 0] == FORBIDDEN_COST


def test_iou_gate_forbids_non_overlapping():
    cfg = _cfg3(iou_gate=0.5, match_threshold=2.0)
    tracker = Tracker(cfg)
    tracker.step([_det(0.1, 0.1, E1)], 1)
    near = _det(0.11, 0.1, E1)  # IoU well above 0.5
    far = _det(0.3, 0.1, E1)  # disjoint
    cost = build_cost_matrix(tracker.tracks, [near, far], cfg)
    assert cost[0, 0] < FORBIDDEN_COST
    assert cost[0, 1] == FORBIDDEN_COST


def _brute_force_min_cost(cost):
    n, m = cost.shape
    k = min(n, m)
    best = None
    rows = range(n)
    for chosen_rows in itertools.permutations(rows, k):
        for chosen_cols in itertools.permutations(range(m), k):
            total = sum(cost[r, c] for r, c in zip(chosen_rows, chosen_cols))
            if best is None or total < best:
                best = total
    return best


def test_hungarian_matches_bruteforce_on_random_matrices():
    rng = SplitMix64(2024)
    for _ in range(60):
        n = 1 + rng.next_u64() % 4
        m = 1 + rng.next_u64() % 4
        cost = np.array([[rng.uniform() for _ in range(m)] for _ in range(n)])
        pairs = hungarian_assign(cost, forbidden=float("inf"))
        total = sum(cost[r, c] for r, c in pairs)
        assert total == pytest.approx(_brute_force_min_cost(cost), abs=1e-12)
        # one-to-one
        assert len({r for r, _ in pairs}) == len(pairs)
        assert len({c for _, c in pairs}) == len(pairs)


def test_hungarian_empty_and_forbidden():
    assert hungarian_assign(np.zeros((0, 3))) == []
    assert hungarian_assign(np.zeros((3, 0))) == []
    cost = np.array([[FORBIDDEN_COST, 0.2], [0.1, FORBIDDEN_COST]])
    assert hungarian_assign(cost) == [(0, 1), (1, 0)]
    all_bad = np.full((2, 2), FORBIDDEN_COST)
    assert hungarian_assign(all_bad) == []


def test_ids_stable_on_two_separated_objects():
    tracker = Tracker(_cfg3())
    for frame in range(1, 8):
        x = 0.1 + 0.01 * frame
        result = tracker.step(
            [_det(x, 0.2, E1), _det(x, 0.8, E2)], frame
        )
        ids = sorted(tid for tid, _ in result.tracks)
        assert ids == [1, 2]


def test_birth_query_is_detection_embedding():
    tracker = Tracker(_cfg3())
    det = _det(0.5, 0.5, E1)
    tracker.step([det], 1)
    assert np.array_equal(tracker.tracks[0].query, det.embedding)


def test_low_score_detections_are_ignored():
    tracker = Tracker(_cfg3())
    result = tracker.step([_det(0.5, 0.5, E1, score=0.49)], 1)
    assert result.tracks == []
    assert tracker.tracks == []
    result = tracker.step([_det(0.5, 0.5, E1, score=0.5)], 2)
    assert len(result.tracks) == 1


def test_track_dies_after_max_misses():
    cfg = _cfg3(max_misses=2)
    tracker = Tracker(cfg)
    tracker.step([_det(0.5, 0.5, E1)], 1)
    for frame in (2, 3):
        result = tracker.step([], frame)
        assert result.tracks == []
        assert len(tracker.tracks) == 1  # coasting
    tracker.step([], 4)
    assert tracker.tracks == []  # misses exceeded max_misses
    # A reappearing object gets a fresh identity.
    result = tracker.step([_det(0.5, 0.5, E1)], 5)
    assert result.tracks[0][0] == 2


def test_coasting_track_rematches_by_appearance():
    tracker = Tracker(_cfg3())
    tracker.step([_det(0.5, 0.5, E1)], 1)
    tracker.step([], 2)
    result = tracker.step([_det(0.52, 0.5, E1)], 3)
    assert result.tracks[0][0] == 1
    assert tracker.tracks[0].misses == 0


def test_crossing_objects_keep_ids_via_appearance():
    # Two objects swap x positions; boxes coincide mid-crossing, so only
    # appearance can keep the identities straight.
    tracker = Tracker(_cfg3())
    n = 11
    for frame in range(1, n + 1):
        t = (frame - 1) / (n - 1)
        xa = 0.2 + 0.6 * t
        xb = 0.8 - 0.6 * t
        result = tracker.step([_det(xa, 0.5, E1), _det(xb, 0.5, E2)], frame)
        by_id = dict(result.tracks)
        assert set(by_id) == {1, 2}
        assert by_id[1].cx == pytest.approx(xa)
        assert by_id[2].cx == pytest.approx(xb)


def test_antiparallel_embedding_spawns_new_track():
    tracker = Tracker(_cfg3())
    tracker.step([_det(0.5, 0.5, E1)], 1)
    # Same spot, opposite appearance: cost 0.7 > threshold, no match.
    result = tracker.step([_det(0.5, 0.5, [-1.0, 0.0, 0.0])], 2)
    assert result.tracks[0][0] == 2


def test_overlap_recorded_from_other_detections():
    # Two overlapping detections in one frame; under the dense policy the
    # birth commit records each one's IoU against the other.
    cfg = TrackerConfig(memory=MemoryConfig(embedding_dim=3))
    tracker = Tracker(cfg, policy=MemoryPolicy.DENSE)
    a = _det(0.0, 0.0, E1, w=1.0, h=1.0)
    b = _det(0.5, 0.0, E2, w=1.0, h=1.0)
    tracker.step([a, b], 1)
    expected = iou(a.box, b.box)
    for track in tracker.tracks:
        assert track.memory.entries[0].overlap_at_store == pytest.approx(expected)


def test_frame_indices_must_increase():
    tracker = Tracker(_cfg3())
    tracker.step([_det(0.5, 0.5, E1)], 1)
    with pytest.raises(ValueError):
        tracker.step([_det(0.5, 0.5, E1)], 1)


def _run(scenario, cfg, policy):
    tracker = Tracker(cfg, policy=policy)
    out = []
    for frame_idx, dets in enumerate(scenario.detections, start=1):
        result = tracker.step(dets, frame_idx)
        out.append((result.frame_idx, tuple(result.tracks)))
    return out


def test_memoryless_settings_reduce_to_no_memory_policy():
    # alpha = 1 makes fusion the identity and epsilon = inf prevents any
    # store, so the sparse pipeline must equal the no-memory baseline
    # decision for decision.
    scenario = generate_scenario(ScenarioConfig(n_objects=5, n_frames=120, seed=9))
    baseline = _run(scenario, TrackerConfig(), MemoryPolicy.NONE)
    memoryless = MemoryConfig(alpha=1.0, epsilon=float("inf"))
    reduced = _run(scenario, TrackerConfig(memory=memoryless), MemoryPolicy.SPARSE)
    assert baseline == reduced


def test_tracker_is_deterministic():
    scenario = generate_scenario(ScenarioConfig(n_objects=4, n_frames=60, seed=5))
    a = _run(scenario, TrackerConfig(), MemoryPolicy.SPARSE_OFS)
    b = _run(scenario, TrackerConfig(), MemoryPolicy.SPARSE_OFS)
    assert a == b


def test_config_validation():
    with pytest.raises(ValueError):
        TrackerConfig(cost_blend=1.2)
    with pytest.raises(ValueError):
        TrackerConfig(min_score=-0.1)
    with pytest.raises(ValueError):
        TrackerConfig(match_threshold=-1.0)
    with pytest.raises(ValueError):
        TrackerConfig(max_misses=-1)
    with pytest.raises(ValueError):
        Detection(Box2D(0, 0, 1, 1), np.array([1.0, float("nan")]), 1.0)
    with pytest.raises(ValueError):
        Detection(Box2D(0, 0, 1, 1), np.array([1.0, 0.0]), 1.5)
