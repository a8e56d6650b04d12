import csv
import io
import itertools
import json
import math

import numpy as np
import pytest
from scipy import stats

from cylproc import bounds as bd
from cylproc import geometry as geo
from cylproc import meanvalues as mv
from cylproc.errors import DomainError, JBelowK, NonFinite
from cylproc.process import ProcessConfig
from cylproc.sampling import (ConstantRadius, DeterministicBall, DiscreteRadius, PointBase,
                              RotatedDilated, RotatedFixed, psi, uniform_rotation)


def _box_cfg(d=3, k=1, gamma=0.5):
    m_body = geo.Box(np.zeros(d - k), np.linspace(0.2, 0.4, d - k))
    window = geo.Box(np.zeros(d), np.linspace(0.6, 1.2, d))
    return ProcessConfig(d, k, gamma, RotatedFixed(m_body)), m_body, window


# ---------------------------------------------------------------- optimizer

def test_chernoff_trivial_deviation():
    assert bd.chernoff_optimize(lambda s: psi(s), 0.0) == (0.0, 0.0)


@pytest.mark.parametrize("a,b,r", [(0.5, 2.0, 1.0), (3.0, 0.1, 10.0), (1.0, 1.0, 0.01)])
def test_chernoff_minimiser_matches_closed_form(a, b, r):
    s_star, val = bd.chernoff_optimize(lambda s: b * psi(a * s), r)
    assert s_star == pytest.approx(math.log1p(r / (a * b)) / a, rel=1e-4)
    assert val == pytest.approx(bd.closed_form_bound(bd.BoundParams(a, b), r), rel=1e-9)


def test_chernoff_nonfinite():
    with pytest.raises(NonFinite):
        bd.chernoff_optimize(lambda s: math.inf, 1.0)
    with pytest.raises(NonFinite):
        bd.chernoff_optimize(lambda s: math.nan, 1.0)


def test_chernoff_respects_cap():
    # linear exponent below the penalty keeps decreasing up to the cap
    s_star, val = bd.chernoff_optimize(lambda s: 0.5 * s, 1.0, s_max_hint=10.0)
    assert s_star == 10.0 and val == pytest.approx(-5.0)


# ---------------------------------------------------------------- closed forms

def test_closed_form_reference_values():
    p = bd.BoundParams(1.7, 0.6)
    assert bd.closed_form_bound(p, 0.0, "upper") == 0.0
    assert bd.closed_form_bound(p, 0.0, "lower") == 0.0
    r = p.alpha * p.beta
    assert bd.closed_form_bound(p, r) == pytest.approx(p.beta * (1 - 2 * math.log(2)))
    with pytest.raises(DomainError):
        bd.closed_form_bound(p, r, "lower")
    with pytest.raises(DomainError):
        bd.BoundParams(0.0, 1.0)
    with pytest.raises(ValueError):
        bd.closed_form_bound(p, 0.1, "middle")


def test_lower_tail_quadratic_relaxation():
    p = bd.BoundParams(0.8, 2.5)
    for r in np.linspace(1e-3, 0.999 * p.alpha * p.beta, 200):
        assert bd.closed_form_bound(p, r, "lower") <= -r * r / (2 * p.alpha ** 2 * p.beta) + 1e-15


def test_poisson_reference_dominates_exact_tail():
    for lam, r in itertools.product((0.5, 3.0, 20.0), (0.5, 2.0, 7.0, 15.0)):
        exact = stats.poisson.logsf(math.ceil(lam + r) - 1, lam)
        assert bd.poisson_tail_bound(lam, r) >= exact - 1e-12


# ---------------------------------------------------------------- volume exponent

def test_volume_exponent_ball_window_ball_base():
    d, k, R, rho, gamma = 3, 1, 1.2, 0.4, 0.3
    cfg = ProcessConfig(d, k, gamma, DeterministicBall(rho, 2))
    w = geo.Ball.centered(d, R)
    m = math.pi * rho ** 2
    p = 1 - math.exp(-gamma * m)
    for s, sign in itertools.product((0.0, 0.3, 2.0), (1, -1)):
        expect = p / m * math.pi * (R + rho) ** 2 * psi(sign * s * m * (2 * R) ** k)
        assert bd.volume_exponent(cfg, w, s, sign) == pytest.approx(expect, rel=1e-13, abs=0)


def test_volume_exponent_boolean_case():
    rho, gamma = 0.3, 0.8
    cfg = ProcessConfig(2, 0, gamma, DeterministicBall(rho, 2))
    w = geo.Ball.centered(2, 1.0)
    m = math.pi * rho ** 2
    s = 0.7
    expect = -math.expm1(-gamma * m) / m * math.pi * (1 + rho) ** 2 * psi(s * m)
    assert bd.volume_exponent(cfg, w, s) == pytest.approx(expect, rel=1e-13)


def test_volume_bound_matches_rotated_closed_form_and_is_monotone():
    cfg, m_body, w = _box_cfg()
    params = bd.rotated_base_params(m_body, w, cfg)
    prev = 0.0
    assert bd.volume_tail_bound(cfg, w, 0.0) == 0.0
    for r in np.linspace(0.05, 3.0, 12):
        v = bd.volume_tail_bound(cfg, w, r)
        assert v == pytest.approx(bd.rotated_base_bound(params, r), rel=1e-8)
        assert v < prev <= 0.0
        prev = v


def test_lower_tail_trivial_above_mean():
    cfg, _, w = _box_cfg()
    ef = mv.mean_volume(cfg, w)
    assert bd.volume_tail_bound(cfg, w, 1.01 * ef, "lower") == 0.0
    assert bd.volume_tail_bound(cfg, w, 0.5 * ef, "lower") < 0.0


# ---------------------------------------------------------------- parameters

def test_rotated_params_one_dimensional_base():
    a = 0.35
    w = geo.Box(np.zeros(3), [0.5, 0.7, 1.0])
    cfg = ProcessConfig(3, 2, 0.4, RotatedFixed(geo.Box(np.zeros(1), [a])))
    params = bd.rotated_base_params(geo.Box(np.zeros(1), [a]), w, cfg)
    assert params.alpha == pytest.approx(2 * a * geo.diameter(w) ** 2)


def test_rotated_beta_matches_rotation_average_of_hitting_measure():
    # planar Boolean model: beta = (p / vol M) E vol(W + U M*) over Haar U
    w = geo.Box(np.zeros(2), [0.8, 0.3])
    m_body = geo.Box(np.zeros(2), [0.4, 0.1])
    cfg = ProcessConfig(2, 0, 0.6, RotatedFixed(m_body))
    g = np.random.default_rng(40)
    vals = np.array([geo.minkowski_volume(w, geo.rotate(m_body, uniform_rotation(2, g)))
                     for _ in range(3000)])
    oracle = cfg.p / geo.volume(m_body) * vals.mean()
    se = cfg.p / geo.volume(m_body) * vals.std(ddof=1) / math.sqrt(len(vals))
    assert abs(bd.rotated_base_params(m_body, w, cfg).beta - oracle) <= 4 * se


def test_rotated_params_unit_disc_boolean():
    disc = geo.Ball.centered(2, 1.0)
    cfg = ProcessConfig(2, 0, 0.2, RotatedFixed(disc))
    params = bd.rotated_base_params(disc, disc, cfg)
    assert params.alpha == pytest.approx(math.pi)
    # rotation-free: vol(B + B) / vol(B) = 4
    assert params.beta == pytest.approx(4 * cfg.p)


def test_alpha_beta_dominates_mean():
    for (d, k) in ((2, 0), (2, 1), (3, 1), (3, 2), (4, 2)):
        cfg, m_body, w = _box_cfg(d, k)
        params = bd.rotated_base_params(m_body, w, cfg)
        assert params.alpha * params.beta >= mv.mean_volume(cfg, w)


# ---------------------------------------------------------------- dilations and spheres

@pytest.mark.parametrize("c", [1.0, 0.5, 1.7])
def test_dilated_constant_radius_equals_rotated(c):
    m_body = geo.Box(np.zeros(2), [0.3, 0.2])
    w = geo.Ball.centered(3, 1.0)
    cfg = ProcessConfig(3, 1, 0.4, RotatedDilated(m_body, ConstantRadius(c)))
    cm = geo.scale(m_body, c)
    params = bd.rotated_base_params(cm, w, ProcessConfig(3, 1, 0.4, RotatedFixed(cm)))
    assert bd.dilated_base_bound(m_body, w, cfg, 0.0) == 0.0
    for r, tail in itertools.product((0.05, 0.4, 2.0), ("upper", "lower")):
        if tail == "lower" and r > mv.mean_volume(cfg, w):
            continue
        got = bd.dilated_base_bound(m_body, w, cfg, r, tail)
        assert got == pytest.approx(bd.rotated_base_bound(params, r, tail), rel=1e-10)


def test_dilated_discrete_matches_generic_path():
    m_body = geo.Box(np.zeros(2), [0.3, 0.2])
    law = RotatedDilated(m_body, DiscreteRadius((0.5, 1.0, 1.5), (0.3, 0.4, 0.3)))
    cfg = ProcessConfig(3, 1, 0.4, law)
    w = geo.Box(np.zeros(3), [0.7, 0.5, 0.6])
    # radius-moment sum versus per-atom mark table
    for r in (0.05, 0.5):
        assert bd.dilated_base_bound(m_body, w, cfg, r) == pytest.approx(
            bd.volume_tail_bound(cfg, w, r), rel=1e-8)


def test_spherical_window_matches_generic_ball_path():
    m_body = geo.Box(np.zeros(2), [0.3, 0.2])
    cfg = ProcessConfig(3, 1, 0.4, RotatedFixed(m_body))
    R = 1.3
    assert bd.spherical_window_bound(cfg, R, 0.0) == 0.0
    for r, tail in itertools.product((0.02, 0.3, 1.5), ("upper", "lower")):
        a = bd.spherical_window_bound(cfg, R, r, tail)
        b = bd.volume_tail_bound(cfg, geo.Ball.centered(3, R), r, tail)
        assert a == pytest.approx(b, rel=1e-8)


def test_ball_ball_constants_by_hand():
    gamma = 0.3
    cfg = ProcessConfig(3, 1, gamma, DeterministicBall(0.5, 2))
    p = 1 - math.exp(-gamma * math.pi / 4)
    params = bd.ball_ball_params(1.0, 0.5, cfg)
    # a = kappa_2 rho^2 (2R); b = p / (pi/4) * pi * (3/2)^2
    assert params.alpha == pytest.approx(math.pi / 2, rel=1e-15)
    assert params.beta == pytest.approx(9 * p, rel=1e-14)
    assert bd.ball_ball_bound(1.0, 0.5, cfg, 0.0) == 0.0


# ---------------------------------------------------------------- k-flats

def test_kflat_bound_properties():
    cfg = ProcessConfig(3, 1, 0.5, PointBase(2))
    w = geo.Ball.centered(3, 1.0)
    assert bd.kflat_bound(cfg, w, 0.0) == 0.0
    rs = np.logspace(-2, 3, 30)
    vals = [bd.kflat_bound(cfg, w, r) for r in rs]
    assert all(v < 0 for v in vals) and np.all(np.diff(vals) < 0)
    b = geo.unit_ball_volume(1) * 1.0
    ratios = [-bd.kflat_bound(cfg, w, r) / (r * math.log(r)) for r in (1e100, 1e200)]
    assert ratios[1] == pytest.approx(1 / (2 * b), rel=0.01)
    assert abs(ratios[1] - 1 / (2 * b)) < abs(ratios[0] - 1 / (2 * b))


def test_kflat_needs_point_base(ref_cfg, unit_ball3):
    with pytest.raises(ValueError):
        bd.kflat_bound(ref_cfg, unit_ball3, 1.0)


# ---------------------------------------------------------------- intrinsic volumes

def test_beta_coefficients_structure():
    for d, k, gamma in itertools.product((2, 3, 4, 5), (0, 1, 2), (0.1, 1.0, 5.0)):
        if k >= d:
            continue
        cfg = ProcessConfig(d, k, gamma, DeterministicBall(0.6, d - k))
        full = bd.intrinsic_beta_coeffs(cfg, d)
        assert full == [pytest.approx(cfg.p / cfg.base_volume, rel=1e-15)]
        for j in range(max(k, 1), d + 1):
            betas = bd.intrinsic_beta_coeffs(cfg, j)
            assert len(betas) == d - j + 1
            assert all(b >= 0 for b in betas)
            if d - j >= 1:
                assert betas[1] == 0.0


def test_beta_coefficients_reject_bad_j():
    cfg = ProcessConfig(4, 2, 0.3, DeterministicBall(0.5, 2))
    with pytest.raises(JBelowK):
        bd.intrinsic_beta_coeffs(cfg, 1)
    with pytest.raises(JBelowK):
        bd.intrinsic_tail_bound(cfg, geo.Ball.centered(4, 1.0), 1, 0.5)
    with pytest.raises(ValueError):
        bd.intrinsic_beta_coeffs(ProcessConfig(3, 0, 0.3, DeterministicBall(0.5, 3)), 0)


def test_intrinsic_exponent_boolean_surface_case():
    R, rho, gamma, s = 1.0, 0.3, 0.5, 0.4
    cfg = ProcessConfig(3, 0, gamma, DeterministicBall(rho, 3))
    w = geo.Ball.centered(3, R)
    m = 4 / 3 * math.pi * rho ** 3
    p = -math.expm1(-gamma * m)
    h = 4 / 3 * math.pi * (R + rho) ** 3
    expect = p / m * h * psi(s * 2 * math.pi * rho ** 2)
    assert bd.intrinsic_exponent(cfg, w, 2, s) == pytest.approx(expect, rel=1e-13)
    assert bd.intrinsic_exponent(cfg, w, 2, 0.0) == 0.0


def test_rotated_intrinsic_collapses_to_volume_when_j_is_d():
    for (d, k) in ((2, 1), (3, 1), (3, 2)):
        cfg, m_body, w = _box_cfg(d, k)
        a = bd.rotated_intrinsic_params(m_body, w, cfg, d)
        b = bd.rotated_base_params(m_body, w, cfg)
        assert a.alpha == pytest.approx(b.alpha, rel=1e-13)
        assert a.beta == pytest.approx(b.beta, rel=1e-13)


def test_rotated_intrinsic_matches_numeric():
    for (d, k) in ((3, 1), (4, 2), (4, 1)):
        cfg, m_body, w = _box_cfg(d, k)
        for j in range(k if k else 1, d + 1):
            assert bd.rotated_intrinsic_bound(m_body, w, cfg, j, 0.0) == 0.0
            for r in (0.05, 1.0, 10.0):
                closed = bd.rotated_intrinsic_bound(m_body, w, cfg, j, r)
                num = bd.intrinsic_tail_bound(cfg, w, j, r)
                assert num == pytest.approx(closed, rel=1e-6)


# ---------------------------------------------------------------- MC path

def test_mc_mark_table_agrees_with_exact_path():
    cfg, _, w = _box_cfg(3, 1, 0.5)
    table = bd.mark_table(cfg, w, n_mc=1500, rng=41, path="mc")
    assert table.path == "mc"
    for r in (0.1, 0.6):
        mc = bd.volume_tail_bound(cfg, w, r, table=table, full=True)
        exact = bd.volume_tail_bound(cfg, w, r, full=True)
        assert mc.path == "mc" and exact.path == "rotational" and exact.se == 0.0
        assert mc.se > 0
        assert abs(mc.value - exact.value) <= 4 * mc.se


# ---------------------------------------------------------------- curves and checks

def test_bound_curve_csv_and_json():
    params = bd.BoundParams(1.0, 0.5)
    curve = bd.bound_curve(lambda r, t: bd.closed_form_bound(params, r, t), [0.0, 0.25, 0.5, 1.0])
    text = curve.to_csv()
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == bd.BOUND_CSV_COLUMNS
    assert rows[3][2] == "" and rows[4][2] == ""  # lower tail undefined at r >= alpha beta
    assert float(rows[2][1]) == bd.closed_form_bound(params, 0.25)
    data = json.loads(curve.to_json())
    assert data["log_lower"][3] is None and data["path"] == "closed-form"
    assert np.all(np.diff(curve.log_upper_bound) <= 0) and np.all(curve.log_upper_bound <= 0)


def test_kappa_ratio_check():
    assert bd.kappa_ratio_check(5, 0)
    assert math.pi ** 3 / (16 * math.pi ** 2 / 9) > 1 and bd.kappa_ratio_check(3, 1)
    assert all(bd.kappa_ratio_check(d, k) for d in range(1, 21) for k in range(d))
    with pytest.raises(ValueError):
        bd.kappa_ratio_check(3, 3)


def test_scaling_probe_volume_cases():
    grid = np.logspace(3, 6, 13)
    for (d, k), target in (((2, 0), 1.0), ((3, 0), 1.0), ((3, 1), 2 / 3)):
        cfg, m_body, w = _box_cfg(d, k, 0.5)
        assert bd.scaling_exponent_probe(m_body, w, cfg, grid) == pytest.approx(target, abs=0.05)
    with pytest.raises(ValueError):
        bd.scaling_exponent_probe(m_body, w, cfg, np.linspace(10, 100, 5))
