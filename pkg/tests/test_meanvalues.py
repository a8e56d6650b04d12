import csv
import itertools
import math

import numpy as np
import pytest

from cylproc import geometry as geo
from cylproc import meanvalues as mv
from cylproc.errors import JBelowK, TruncationNotConverged
from cylproc.process import ProcessConfig
from cylproc.sampling import DeterministicBall, DiscreteRadius, RotatedDilated

from conftest import KAPPA3


def test_mean_volume_reference_value(ref_cfg, unit_ball3):
    assert mv.mean_volume(ref_cfg, unit_ball3) == pytest.approx(
        KAPPA3 * (1 - math.exp(-0.3 * math.pi / 4)), rel=1e-15)


def test_mean_volume_bounds_and_monotonicity(unit_ball3):
    vals = [mv.mean_volume(ProcessConfig(3, 1, g, DeterministicBall(0.5, 2)), unit_ball3)
            for g in np.logspace(-3, 2.5, 30)]
    assert all(0 <= v <= KAPPA3 for v in vals)
    assert np.all(np.diff(vals) >= 0) and np.all(np.diff(vals[:20]) > 0)
    assert vals[-1] == pytest.approx(KAPPA3, rel=1e-12)


def test_mean_volume_boolean_fraction():
    rho, gamma = 0.2, 3.0
    cfg = ProcessConfig(2, 0, gamma, DeterministicBall(rho, 2))
    w = geo.Box(np.zeros(2), [1.0, 1.0])
    assert mv.mean_volume(cfg, w) == pytest.approx(4 * (1 - math.exp(-gamma * math.pi * rho ** 2)))


def test_surface_mean_small_intensity_slope():
    w = geo.Box(np.zeros(3), [0.5, 0.7, 0.9])
    law = DeterministicBall(0.4, 2)
    m1, m2 = math.pi * 0.4, math.pi * 0.16
    slope = geo.volume(w) * m1 + geo.intrinsic_volume(w, 2) * m2
    for gamma in (1e-6, 1e-8):
        cfg = ProcessConfig(3, 1, gamma, law)
        assert mv.mean_intrinsic_dminus1(cfg, w) / gamma == pytest.approx(slope, rel=1e-5)


def test_closed_form_specialisations(ref_cfg, unit_ball3):
    vol = mv.mean_intrinsic_closed(ref_cfg, unit_ball3, 3)
    assert vol.value == pytest.approx(mv.mean_volume(ref_cfg, unit_ball3), rel=1e-13)
    assert vol.form == "closed_jk" and vol.truncation_level is None and vol.tail_estimate is None
    surf = mv.mean_intrinsic_closed(ref_cfg, unit_ball3, 2).value
    assert surf == pytest.approx(mv.mean_intrinsic_dminus1(ref_cfg, unit_ball3), rel=1e-12)


def test_closed_matches_series_four_dimensional_case():
    cfg = ProcessConfig(4, 1, 0.4, DeterministicBall(0.5, 3))
    w = geo.Ball.centered(4, 1.0)
    closed = mv.mean_intrinsic_closed(cfg, w, 2).value
    series = mv.mean_intrinsic_series(cfg, w, 2, l_max=40)
    assert series.value == pytest.approx(closed, rel=1e-10)
    assert series.form == "general_series" and series.truncation_level == 40
    assert series.tail_estimate <= 1e-8 * abs(series.value)


def test_series_volume_case_and_first_term(ref_cfg):
    w = geo.Box(np.zeros(3), [0.5, 1.0, 0.8])
    for gamma in (0.2, 1.0):
        cfg = ProcessConfig(3, 1, gamma, ref_cfg.law)
        s = mv.mean_intrinsic_series(cfg, w, 3, l_max=30)
        assert s.value == pytest.approx(mv.mean_volume(cfg, w), rel=1e-10)
    first = mv.mean_intrinsic_series(ref_cfg, w, 3, l_max=1, tol=math.inf).value
    assert first == pytest.approx(0.3 * geo.volume(w) * ref_cfg.base_volume, rel=1e-14)


def test_dual_forms_agree_with_dilated_law():
    m_body = geo.Box(np.zeros(2), [0.3, 0.2])
    law = RotatedDilated(m_body, DiscreteRadius((0.5, 1.5), (0.6, 0.4)))
    w = geo.Box(np.zeros(3), [0.8, 0.6, 1.1])
    for gamma, j in itertools.product((0.2, 0.5, 1.0), (1, 2, 3)):
        cfg = ProcessConfig(3, 1, gamma, law)
        a = mv.mean_intrinsic_closed(cfg, w, j).value
        b = mv.mean_intrinsic_series(cfg, w, j).value
        assert b == pytest.approx(a, rel=1e-10)


def test_planar_euler_characteristic_density():
    # classical Boolean-model density e^{-gA}(g - g^2 L^2 / (4 pi)) for discs
    rho, gamma = 0.3, 1.7
    cfg = ProcessConfig(2, 0, gamma, DeterministicBall(rho, 2))
    ts = np.array([1.0, 2.0, 3.0])
    ys = [mv.mean_intrinsic_closed(cfg, geo.Box.from_edges([t, t]), 0).value for t in ts]
    lead = np.polyfit(ts, ys, 2)[0]
    area, perim = math.pi * rho ** 2, 2 * math.pi * rho
    expect = math.exp(-gamma * area) * (gamma - gamma ** 2 * perim ** 2 / (4 * math.pi))
    assert lead == pytest.approx(expect, rel=1e-10)


def test_spatial_euler_characteristic_density():
    # e^{-gV}(g - g^2 M S / (4 pi) + pi g^3 S^3 / 384) for balls
    rho, gamma = 0.3, 1.7
    cfg = ProcessConfig(3, 0, gamma, DeterministicBall(rho, 3))
    ts = np.array([1.0, 2.0, 3.0, 4.0])
    ys = [mv.mean_intrinsic_closed(cfg, geo.Box.from_edges([t] * 3), 0).value for t in ts]
    lead = np.polyfit(ts, ys, 3)[0]
    vol, surf, mean_curv = 4 / 3 * math.pi * rho ** 3, 4 * math.pi * rho ** 2, 4 * math.pi * rho
    expect = math.exp(-gamma * vol) * (gamma - gamma ** 2 * mean_curv * surf / (4 * math.pi)
                                       + math.pi * gamma ** 3 * surf ** 3 / 384)
    assert lead == pytest.approx(expect, rel=1e-10)


def test_closed_form_linear_in_small_intensity():
    w = geo.Ball.centered(4, 1.0)
    law = DeterministicBall(0.5, 3)
    for j in (1, 2, 3):
        slope = mv.mean_intrinsic_series(ProcessConfig(4, 1, 1.0, law), w, j,
                                         l_max=1, tol=math.inf).value
        gamma = 1e-7
        val = mv.mean_intrinsic_closed(ProcessConfig(4, 1, gamma, law), w, j).value
        assert val / gamma == pytest.approx(slope, rel=1e-5)


def test_series_terms_decay_factorially():
    cfg = ProcessConfig(3, 1, 2.0 / (math.pi / 4), DeterministicBall(0.5, 2))  # gamma m = 2
    w = geo.Ball.centered(3, 1.0)
    partial = [mv.mean_intrinsic_series(cfg, w, 2, l_max=l, tol=math.inf).value
               for l in range(1, 26)]
    terms = np.abs(np.diff(partial))
    ratios = terms[10:] / terms[9:-1]
    assert np.all(ratios < 1)


def test_series_truncation_error(ref_cfg, unit_ball3):
    big = ProcessConfig(3, 1, 30.0, ref_cfg.law)
    with pytest.raises(TruncationNotConverged):
        mv.mean_intrinsic_series(big, unit_ball3, 2, l_max=5)
    with pytest.raises(ValueError):
        mv.mean_intrinsic_series(ref_cfg, unit_ball3, 2, l_max=0)


def test_j_below_k_rejected():
    cfg = ProcessConfig(4, 2, 0.3, DeterministicBall(0.5, 2))
    w = geo.Ball.centered(4, 1.0)
    with pytest.raises(JBelowK):
        mv.mean_intrinsic_closed(cfg, w, 1)
    with pytest.raises(JBelowK):
        mv.mean_intrinsic_series(cfg, w, 0)


def test_composition_sum_by_enumeration(ref_cfg):
    cfg = ProcessConfig(5, 1, 0.3, DeterministicBall(0.5, 4))
    ms = mv.base_moments(cfg)
    f = lambda q: geo.c_constant(5, 5 - q) * ms[4 - q] if q <= 4 else 0.0
    for total, parts in ((4, 2), (5, 3), (3, 3), (2, 3)):
        brute = math.fsum(math.prod(f(q) for q in qs)
                          for qs in itertools.product(range(1, total + 1), repeat=parts)
                          if sum(qs) == total)
        assert mv.composition_sum(cfg, total, parts) == pytest.approx(brute, rel=1e-14, abs=0)


def test_csv_rows(tmp_path, ref_cfg, unit_ball3):
    rows = [mv.mean_intrinsic_closed(ref_cfg, unit_ball3, 2).to_row(ref_cfg, 2),
            mv.mean_intrinsic_series(ref_cfg, unit_ball3, 2).to_row(ref_cfg, 2)]
    path = tmp_path / "means.csv"
    mv.write_csv(path, rows)
    with open(path) as fh:
        data = list(csv.reader(fh))
    assert tuple(data[0]) == mv.CSV_COLUMNS
    assert data[1][4] == "closed_jk" and data[1][6] == ""
    assert data[2][4] == "general_series" and float(data[2][6]) >= 0
    assert float(data[1][5]) == pytest.approx(float(data[2][5]), rel=1e-10)
