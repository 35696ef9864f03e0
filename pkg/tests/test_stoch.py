import json
import math

import numpy as np
import pytest

from heatlab import stoch
from heatlab.domain import Disk, Interval, Rectangle
from heatlab.heat import images_survival_1d, survival

I = Interval(math.pi)


def test_path_config_validation():
    with pytest.raises(ValueError):
        stoch.PathConfig(0.1, 0.2)
    cfg = stoch.PathConfig(0.1, 0.03)
    assert cfg.steps == 4
    assert cfg.step_ends()[-1] == 0.1
    assert stoch.PathConfig.default(0.1).dt == 1e-4


def test_results_do_not_depend_on_worker_count(monkeypatch):
    cfg = stoch.PathConfig(0.5, 1e-2)
    runs = []
    for threads in ("1", "3"):
        monkeypatch.setenv("HEATLAB_THREADS", threads)
        runs.append(stoch.estimate_survival(I, 0.4, 0.5, 3000, cfg, seed=11))
    assert runs[0] == runs[1]


def test_prefix_property():
    cfg = stoch.PathConfig(0.3, 1e-2)
    a = stoch.survival_indicators(I, 0.3, 0.3, 700, cfg, seed=5)
    b = stoch.survival_indicators(I, 0.3, 0.3, 1500, cfg, seed=5)
    assert np.array_equal(a, b[:700])


def test_single_path_matches_batch():
    cfg = stoch.PathConfig(0.3, 1e-2)
    ind = stoch.survival_indicators(I, 0.3, 0.3, 600, cfg, seed=2)
    for i in (0, 17, 513, 599):
        assert stoch.simulate_killed_path(I, 0.3, cfg, 2, i).survived == bool(ind[i])


def test_boundary_start_is_killed_at_once():
    r = stoch.simulate_killed_path(I, 0.0, stoch.PathConfig(0.1, 1e-2), 0, 0)
    assert not r.survived and r.exit_time == 0.0


def test_short_horizon_from_the_centre_survives():
    est = stoch.estimate_survival(Disk(1.0), [0.0, 0.0], 1e-4, 500, seed=1)
    assert est.estimate == 1.0


def test_survival_plus_exit_mass_is_one():
    h = stoch.exit_histogram(I, math.pi / 4, 0.5, 4000, stoch.PathConfig(0.5, 1e-3), seed=3)
    assert h.survival + h.total_exit_mass == pytest.approx(1.0, abs=1e-15)
    assert sum(h.bin_masses) == pytest.approx(h.total_exit_mass, abs=1e-15)
    # the nearer wall collects more mass
    assert h.bin_masses[0] > h.bin_masses[1]


@pytest.mark.parametrize("d,x", [(Rectangle(math.pi, 2.0), [1.0, 0.6]), (Disk(1.0), [0.3, 0.1])])
def test_planar_survival_against_spectral(d, x):
    n = 8000
    est = stoch.estimate_survival(d, x, 0.2, n, stoch.PathConfig(0.2, 1e-3), seed=7)
    assert abs(est.estimate - survival(d, 0.2, x)) < 4 * est.stderr + 2e-3


def test_bridge_correction_reduces_bias():
    x, t, n = 0.3, 0.1, 20000
    exact = images_survival_1d(math.pi, t, x)
    on = stoch.estimate_survival(I, x, t, n, stoch.PathConfig(t, 1e-3, True), seed=9)
    off = stoch.estimate_survival(I, x, t, n, stoch.PathConfig(t, 1e-3, False), seed=9)
    assert abs(on.estimate - exact) < 4 * on.stderr
    assert off.estimate - exact > on.estimate - exact
    assert off.estimate > exact


def test_feynman_kac_of_sine():
    est = stoch.feynman_kac(I, np.sin, 1.0, 0.1, 8000, stoch.PathConfig(0.1, 1e-3), seed=4)
    assert abs(est.estimate - math.exp(-0.1) * math.sin(1.0)) < 4 * est.stderr + 1e-3


def test_triple_requires_room_for_the_stencil():
    with pytest.raises(ValueError):
        stoch.coupled_triple(I, np.sin, 0.005, [1.0], 0.01, 0.05, 10)


def test_triple_single_path_matches_summary_classes():
    cfg = stoch.PathConfig(0.5, 1e-2)
    s = stoch.coupled_triple(I, np.sin, 0.5, [1.0], 0.05, 0.5, 600, cfg, seed=8)
    got = {name: 0 for name in stoch.PARTICLES}
    for i in range(600):
        r = stoch.simulate_triple(I, np.sin, 0.5, [1.0], 0.05, cfg, 8, i)
        if not r.all_survived:
            got[r.first_hitter] += 1
    assert got == s.class_histogram
    assert s.a_eps_fraction == pytest.approx(1.0 - sum(got.values()) / 600)


def test_triple_near_wall_hits_minus_first():
    # x0 - eps nu is the particle closest to the left wall
    s = stoch.coupled_triple(I, np.sin, 0.2, [1.0], 0.05, 0.2, 2000, stoch.PathConfig(0.2, 1e-3), seed=1)
    assert s.class_histogram["minus"] > s.class_histogram["plus"]


def test_reflection_level_zero_is_certain():
    r = stoch.reflection_max_estimate(0.0, 1.0, 100, seed=0)
    assert r.estimate == 1.0 and r.endpoint_estimate == 1.0


def test_summary_json_has_sorted_keys():
    doc = stoch.summary_json(0.5, 0.01, 100, stoch.PathConfig(1.0, 0.1), 3)
    keys = list(json.loads(doc))
    assert keys == sorted(keys)
