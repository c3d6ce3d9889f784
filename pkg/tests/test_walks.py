import pytest

from vtres import (
    build_ball,
    escape_profile,
    escape_via_resistance,
    hit_before_return,
    simulate_escape,
    spec_cycle,
    spec_lattice,
    spec_line,
)
from vtres.errors import BadArguments, RadiusTooSmall

from conftest import complete_graph


def test_escape_radius_one_is_certain():
    b = build_ball(spec_cycle(20), 3)
    est = simulate_escape(b, 1, trials=500, seed=3)
    assert est.p_hat == 1.0
    assert est.censored == 0
    assert est.stderr == 0.0


def test_escape_via_resistance_cycle():
    b = build_ball(spec_cycle(20), 10)
    # two parallel 5-edge arcs: R = 5/2, deg = 2
    assert abs(escape_via_resistance(b, 5) - 0.2) < 1e-9


def test_escape_via_resistance_radius_one_any_graph():
    for spec in (spec_cycle(12), spec_lattice(2), spec_line()):
        b = build_ball(spec, 2)
        assert abs(escape_via_resistance(b, 1) - 1.0) < 1e-10


def test_escape_via_resistance_line():
    b = build_ball(spec_line(), 10)
    assert abs(escape_via_resistance(b, 10) - 0.1) < 1e-9


def test_simulated_escape_matches_identity_cycle():
    b = build_ball(spec_cycle(20), 5)
    est = simulate_escape(b, 5, trials=100_000, seed=7)
    assert abs(est.p_hat - 0.2) <= 4 * est.stderr
    assert est.p_hat * est.trials == round(est.p_hat * est.trials)


def test_seeded_determinism():
    b = build_ball(spec_cycle(20), 5)
    a = simulate_escape(b, 5, trials=20_000, seed=42)
    c = simulate_escape(b, 5, trials=20_000, seed=42)
    assert a == c
    d = simulate_escape(b, 5, trials=20_000, seed=43)
    assert d.p_hat != a.p_hat  # different stream


def test_profile_is_exactly_monotone():
    b = build_ball(spec_lattice(2), 6)
    prof = escape_profile(b, 6, trials=20_000, seed=5)
    ps = [e.p_hat for e in prof]
    assert all(ps[i] >= ps[i + 1] for i in range(len(ps) - 1))
    assert ps[0] == 1.0


def test_profile_head_matches_single_radius_event():
    # the profile estimate at r_max uses the same absorption rule as the
    # single-radius simulation, so both are unbiased for the same event
    b = build_ball(spec_cycle(16), 6)
    prof = escape_profile(b, 6, trials=50_000, seed=9)
    single = simulate_escape(b, 6, trials=50_000, seed=9)
    exact = escape_via_resistance(b, 6)
    assert abs(prof[-1].p_hat - exact) <= 4 * prof[-1].stderr
    assert abs(single.p_hat - exact) <= 4 * single.stderr


def test_hit_before_return_complete_graph():
    k4 = complete_graph(4)
    est = hit_before_return(k4, 0, [1], trials=100_000, seed=2)
    assert abs(est.p_hat - 2 / 3) <= 4 * est.stderr
    assert est.censored == 0


def test_hit_before_return_neighbors_certain(c8):
    est = hit_before_return(c8, 0, [1, 7], trials=1000, seed=4)
    assert est.p_hat == 1.0


def test_hit_before_return_antipode(c8):
    est = hit_before_return(c8, 0, [4], trials=100_000, seed=6)
    assert abs(est.p_hat - 0.25) <= 4 * est.stderr


def test_hit_before_return_censoring(c8):
    with pytest.warns(UserWarning):
        est = hit_before_return(c8, 0, [4], trials=2000, seed=8, step_cap=2)
    assert est.censored > 0
    assert est.trials == 2000 - est.censored
    assert 0.0 <= est.p_hat <= 1.0


def test_walk_argument_validation(c8):
    b = build_ball(spec_cycle(8), 2)
    with pytest.raises(RadiusTooSmall):
        simulate_escape(b, 3, 10, seed=0)
    with pytest.raises(BadArguments):
        simulate_escape(b, 0, 10, seed=0)
    with pytest.raises(BadArguments):
        hit_before_return(c8, 0, [], 10, seed=0)
    with pytest.raises(BadArguments):
        hit_before_return(c8, 0, [0, 1], 10, seed=0)


def test_escape_identity_chord_graph():
    from vtres import spec_cyclic_chords
    b = build_ball(spec_cyclic_chords(24, 2), 4)
    truth = escape_via_resistance(b, 4)
    est = simulate_escape(b, 4, trials=50_000, seed=17)
    assert abs(est.p_hat - truth) <= 4 * est.stderr


def test_escape_identity_z3():
    b = build_ball(spec_lattice(3), 8)
    truth = escape_via_resistance(b, 8)
    est = simulate_escape(b, 8, trials=50_000, seed=13)
    assert abs(est.p_hat - truth) <= 4 * est.stderr
