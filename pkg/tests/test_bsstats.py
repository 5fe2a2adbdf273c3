import math

import numpy as np
import pytest

from detent import GroundSet, ball_distance, decorated_ball, sequence_report, tightness_profile, transfer_current
from detent import validate_kernel
from detent.bsstats import empirical_stats, match_balls
from detent.errors import BallTooLarge, UsageError
from detent.graph import build_graph, empty_graph, generate_family


def test_tightness_total_is_rank_per_vertex():
    g = generate_family("torus2d", 4)
    k = transfer_current(g)
    prof = tightness_profile(k)
    assert prof.total == pytest.approx((g.vertex_count - 1) / g.edge_count)
    assert math.inf not in prof.mass
    assert prof.tail(-1) == pytest.approx(prof.total)
    assert list(prof.as_dict())[0] == "0"


def test_tightness_infinite_bucket():
    k = validate_kernel(np.full((2, 2), 0.5), GroundSet(empty_graph(2)))
    prof = tightness_profile(k)
    assert prof.mass[0] == pytest.approx(0.25)
    assert prof.mass[math.inf] == pytest.approx(0.25)
    assert prof.as_dict()["inf"] == pytest.approx(0.25)


def _shuffled_cycle(n, perm):
    g = generate_family("cycle", n)
    h = build_graph([g.edges[i][:2] for i in perm], 2, vertex_count=n)
    return transfer_current(g), transfer_current(h)


def test_relabelled_balls_are_isomorphic():
    perm = [3, 0, 6, 1, 5, 2, 4, 7]
    a, b = _shuffled_cycle(8, perm)
    for r in (0, 1, 2, 3):
        for new, old in enumerate(perm):
            m = ball_distance(decorated_ball(a, old, r), decorated_ball(b, new, r))
            assert m.isomorphic and m.max_deviation < 1e-12
            assert m.mapping[0] == 0


def test_different_kernels_have_positive_deviation():
    a = transfer_current(generate_family("cycle", 8))
    b = transfer_current(generate_family("cycle", 10))
    m = ball_distance(decorated_ball(a, 0, 2), decorated_ball(b, 0, 2))
    assert m.isomorphic
    # the diagonals alone differ by 9/10 - 7/8
    assert m.max_deviation >= 9 / 10 - 7 / 8 - 1e-12


def test_non_isomorphic_balls():
    a = transfer_current(generate_family("cycle", 8))
    b = transfer_current(generate_family("torus2d", 3))
    m = ball_distance(decorated_ball(a, 0, 1), decorated_ball(b, 0, 1))
    assert not m.isomorphic and m.max_deviation == math.inf


def test_radius_mismatch_and_large_ball():
    k = transfer_current(generate_family("torus2d", 10))
    with pytest.raises(UsageError):
        ball_distance(decorated_ball(k, 0, 1), decorated_ball(k, 0, 2))
    big = decorated_ball(k, 0, 5)
    assert big.ball.size > 64
    with pytest.raises(BallTooLarge):
        ball_distance(big, big)
    assert ball_distance(big, big, allow_approximate=True).approximate


def test_matching_identical_multisets():
    k = transfer_current(generate_family("cycle", 9))
    s = empirical_stats(k, 2, 12, seed=4)
    res = match_balls(s, s)
    assert res["empirical_distance"] < 1e-12 and res["unmatched_fraction"] == 0.0


def test_sequence_report_on_cycles():
    items = []
    for n in (6, 12, 24):
        g = generate_family("cycle", n)
        k = transfer_current(g)
        items.append((k.ground.base_graph, k))
    rep = sequence_report(items, r=1, n_roots=8, seed=1)
    assert len(rep["pairs"]) == 2
    d = [p["empirical_distance"] for p in rep["pairs"]]
    assert d[1] < d[0]
    assert rep["flags"]["non_tight"] is False
    assert rep["seed"] == 1


def test_sequence_report_flags_non_tight():
    k4 = transfer_current(generate_family("complete", 4)).rebased(empty_graph(6))
    star = transfer_current(generate_family("doubled_star", 3)).rebased(empty_graph(6))
    rep = sequence_report([(k4.ground.base_graph, k4), (star.ground.base_graph, star)], r=1, n_roots=6, seed=0)
    assert rep["flags"]["non_tight"] is True
    assert rep["items"][0]["mass_at_inf"] == pytest.approx(0.25)
    assert rep["pairs"][0]["unmatched_fraction"] == 0.0
