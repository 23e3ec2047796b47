import numpy as np
import pytest

from cfhandoff.errors import ConfigurationError, ContractViolation
from cfhandoff.network.channel import (BAD, GOOD, MobilityParams, PathLossParams,
                                       ShadowingParams, StateQuantizer, aging_profile,
                                       bvn_upper_rect, init_lsf, jakes_rho, path_loss,
                                       prob_good, quantize_state, step_lsf, trans_probs)
from cfhandoff.network.geometry import (NetworkLayout, advance, distances_2d, place_aps,
                                        start_trajectory)
from cfhandoff.sim.validate import simulate_labels
from cfhandoff.utils import q_function


def test_path_loss_at_reference_distance():
    pl = PathLossParams(d0=1.1, alpha_pl=3.8, d_h=0.0)
    assert path_loss(1.1, pl) == pytest.approx(1.0)


def test_path_loss_at_quantizer_threshold(params):
    assert path_loss(150.0, params.path_loss) == pytest.approx(7.6e-9, rel=0.02)
    assert params.quantizer.beta_threshold == path_loss(150.0, params.path_loss)


def test_path_loss_decreasing(params):
    pl = params.path_loss
    assert path_loss(50.0, pl) > path_loss(150.0, pl) > path_loss(200.0, pl)


def test_path_loss_rejects_negative_distance(params):
    with pytest.raises(ContractViolation):
        path_loss(-1.0, params.path_loss)


def test_jakes_rho_values():
    assert jakes_rho(0, 60.0, 66.7e-6) == 1.0
    profile = aging_profile(10.0, 200)
    assert profile.f_doppler == pytest.approx(60.0)
    assert profile.rho[1] == pytest.approx(0.99984, abs=1e-5)
    assert profile.rho ** 2 + profile.rho_bar ** 2 == pytest.approx(np.ones(201))


def test_jakes_rho_first_zero():
    assert abs(jakes_rho(1, 1.0, 2.404826 / (2 * np.pi))) < 1e-6


def test_step_correlation_default_mobility():
    assert MobilityParams(10.0, 1.0).step_corr(100.0) == pytest.approx(0.93303, abs=1e-5)


def test_no_shadowing_gives_path_loss(params, rng):
    layout = place_aps(10, 1000.0, rng)
    traj = start_trajectory(layout, 10.0, 1.0, rng)
    flat = ShadowingParams(sigma_sh_db=0.0)
    process = init_lsf(layout, flat, params.path_loss, traj, rng)
    expected = path_loss(distances_2d(traj.position, layout), params.path_loss)
    assert process.lsf == pytest.approx(expected)


def test_colocated_aps_share_shadowing(params, rng):
    positions = np.array([[200.0, 200.0], [200.0, 200.0], [700.0, 300.0]])
    layout = NetworkLayout(area_side=1000.0, ap_positions=positions)
    traj = start_trajectory(layout, 10.0, 1.0, rng)
    process = init_lsf(layout, params.shadowing, params.path_loss, traj, rng)
    assert process.kappa1[0] == pytest.approx(process.kappa1[1], abs=1e-6)


def test_fully_static_shadowing_ratio_follows_path_loss(params, rng):
    layout = place_aps(6, 1000.0, rng)
    traj = start_trajectory(layout, 10.0, 1.0, rng)
    static = ShadowingParams(sigma_sh_db=6.0, d_decorr=100.0, iota=1.0)
    first = init_lsf(layout, static, params.path_loss, traj, rng)
    nxt = advance(traj, layout)
    second = step_lsf(first, nxt, rng)
    ratio = path_loss(distances_2d(nxt.position, layout), params.path_loss) / \
        path_loss(distances_2d(traj.position, layout), params.path_loss)
    assert second.lsf / first.lsf == pytest.approx(ratio)


def test_static_user_keeps_lsf(params, rng):
    layout = place_aps(6, 1000.0, rng)
    traj = start_trajectory(layout, 0.0, 1.0, rng)
    first = init_lsf(layout, params.shadowing, params.path_loss, traj, rng)
    second = step_lsf(first, advance(traj, layout), rng)
    assert second.kappa2 == first.kappa2
    assert second.lsf == pytest.approx(first.lsf)


def test_user_shadowing_autocorrelation(params):
    rng = np.random.default_rng(11)
    layout = NetworkLayout(area_side=1000.0, ap_positions=np.array([[100.0, 100.0]]))
    traj = start_trajectory(layout, 10.0, 1.0, rng)
    process = init_lsf(layout, params.shadowing, params.path_loss, traj, rng)
    values = [process.kappa2]
    for _ in range(20000):
        traj = advance(traj, layout)
        process = step_lsf(process, traj, rng)
        values.append(process.kappa2)
    values = np.array(values)
    assert np.corrcoef(values[:-1], values[1:])[0, 1] == pytest.approx(0.93303, abs=0.01)


def test_step_lsf_needs_later_cycle(params, rng):
    layout = place_aps(3, 1000.0, rng)
    traj = start_trajectory(layout, 10.0, 1.0, rng)
    process = init_lsf(layout, params.shadowing, params.path_loss, traj, rng)
    with pytest.raises(ContractViolation):
        step_lsf(process, traj, rng)


def test_quantize_state_boundaries(params):
    q = params.quantizer
    assert quantize_state(q.beta_threshold, q) == BAD
    assert quantize_state(2 * q.beta_threshold, q) == GOOD
    assert quantize_state(q.beta_threshold / 2, q) == BAD


def test_quantizer_needs_ordered_levels():
    with pytest.raises(ConfigurationError):
        StateQuantizer(beta_threshold=1.0, beta_good=0.5, beta_bad=0.1)


def test_prob_good_around_threshold(params):
    args = (params.quantizer, params.shadowing, params.path_loss)
    assert prob_good(150.0, *args) == pytest.approx(0.5)
    assert prob_good(50.0, *args) > 0.5
    assert prob_good(400.0, *args) < 0.5


def test_prob_good_matches_sampling(params):
    rng = np.random.default_rng(5)
    kappa = rng.standard_normal(1_000_000)
    beta = path_loss(120.0, params.path_loss) * 10.0 ** (6.0 * kappa / 10.0)
    empirical = np.mean(beta > params.quantizer.beta_threshold)
    assert empirical == pytest.approx(prob_good(120.0, params.quantizer, params.shadowing,
                                                params.path_loss), abs=2e-3)


def test_bvn_independent_case():
    assert bvn_upper_rect(0.3, -0.7, 0.0) == pytest.approx(q_function(0.3) * q_function(-0.7))
    assert bvn_upper_rect(0.0, 0.0, 0.0) == pytest.approx(0.25)


@pytest.mark.parametrize('corr', [-0.9, -0.6, -0.3, 0.1, 0.4, 0.7, 0.9])
def test_bvn_orthant_identity(corr):
    expected = 0.25 + np.arcsin(corr) / (2 * np.pi)
    assert bvn_upper_rect(0.0, 0.0, corr) == pytest.approx(expected, abs=1e-8)


def test_bvn_infinite_bounds():
    assert bvn_upper_rect(-np.inf, 0.5, 0.3) == pytest.approx(q_function(0.5))
    assert bvn_upper_rect(np.inf, 0.5, 0.3) == 0.0


def test_bvn_matches_sampling():
    rng = np.random.default_rng(9)
    x = rng.standard_normal(2_000_000)
    y = 0.6 * x + 0.8 * rng.standard_normal(2_000_000)
    empirical = np.mean((x > 0.5) & (y > -0.3))
    assert bvn_upper_rect(0.5, -0.3, 0.6) == pytest.approx(empirical, abs=2e-3)


def test_bvn_rejects_bad_correlation():
    with pytest.raises(ContractViolation):
        bvn_upper_rect(0.0, 0.0, 1.5)


def test_trans_probs_perfect_correlation(params):
    frozen = ShadowingParams(sigma_sh_db=6.0, d_decorr=100.0, iota=1.0)
    p11, p01 = trans_probs(140.0, 140.0, params.quantizer, frozen, params.path_loss,
                           params.mobility)
    assert p11 == pytest.approx(1.0)
    assert p01 == pytest.approx(0.0, abs=1e-12)


def test_trans_probs_independence(params):
    memoryless = ShadowingParams(sigma_sh_db=6.0, d_decorr=1e-6, iota=0.0)
    p11, p01 = trans_probs(140.0, 150.0, params.quantizer, memoryless, params.path_loss,
                           params.mobility)
    expected = prob_good(150.0, params.quantizer, memoryless, params.path_loss)
    assert p11 == pytest.approx(expected)
    assert p01 == pytest.approx(expected)


def test_trans_probs_match_sampling(params):
    previous, current = simulate_labels(140.0, 150.0, params.quantizer, params.shadowing,
                                        params.path_loss, params.mobility, 400_000,
                                        np.random.default_rng(21))
    p11, p01 = trans_probs(140.0, 150.0, params.quantizer, params.shadowing,
                           params.path_loss, params.mobility)
    assert current[previous].mean() == pytest.approx(p11, abs=6e-3)
    assert current[~previous].mean() == pytest.approx(p01, abs=6e-3)


def test_trans_probs_in_unit_interval(params):
    for d_prev, d_curr in [(10.0, 20.0), (140.0, 150.0), (600.0, 610.0)]:
        p11, p01 = trans_probs(d_prev, d_curr, params.quantizer, params.shadowing,
                               params.path_loss, params.mobility)
        assert 0.0 <= p01 <= 1.0 and 0.0 <= p11 <= 1.0
