import copy

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hetnet.model import (
    ConfigError,
    DegenerateNetworkError,
    NetworkModel,
    TierConfig,
    association_probabilities,
    coefficient_vectors,
    to_config,
    validate,
)
from conftest import random_model
from oracles import gamma_by_recurrence

BASE = {
    "alpha": 4,
    "tiers": [
        {"lambda_per_km2": 10, "power_w": 1.0, "bias": 1, "antennas": 2, "users": 1},
        {"lambda_per_km2": 50, "power_w": 0.1, "bias": 2, "antennas": 4, "users": 2},
    ],
}


def mutated(path, value):
    raw = copy.deepcopy(BASE)
    if path == "alpha":
        raw["alpha"] = value
    else:
        i, key = path
        if value is None:
            del raw["tiers"][i][key]
        else:
            raw["tiers"][i][key] = value
    return raw


@pytest.mark.parametrize(
    "raw, fragment",
    [
        (mutated("alpha", 2), "alpha must exceed 2"),
        (mutated("alpha", 1.5), "alpha must exceed 2"),
        (mutated("alpha", "x"), "alpha"),
        (mutated((1, "users"), 5), "tiers[1]"),
        (mutated((0, "antennas"), 0), "tiers[0]"),
        (mutated((0, "antennas"), 2.5), "tiers[0].antennas"),
        (mutated((1, "power_w"), 0), "tiers[1]"),
        (mutated((1, "bias"), -1), "tiers[1]"),
        (mutated((1, "bias"), "1/M"), "tiers[1].bias"),
        (mutated((0, "lambda_per_km2"), -3), "tiers[0]"),
        (mutated((0, "lambda_per_km2"), None), "tiers[0]: missing field 'lambda_per_km2'"),
        ({"alpha": 4, "tiers": []}, "non-empty"),
        ({"tiers": BASE["tiers"]}, "alpha"),
    ],
)
def test_validation_errors(raw, fragment):
    with pytest.raises(ConfigError, match=None) as exc:
        validate(raw)
    assert fragment in str(exc.value)


def test_all_zero_densities_is_degenerate():
    raw = copy.deepcopy(BASE)
    for t in raw["tiers"]:
        t["lambda_per_km2"] = 0
    with pytest.raises(DegenerateNetworkError, match="degenerate network"):
        validate(raw)


def test_density_above_ceiling_rejected():
    with pytest.raises(ConfigError, match="lambda_max"):
        validate(mutated((0, "lambda_max_per_km2"), 5))


def test_one_over_u_bias_and_defaults():
    raw = copy.deepcopy(BASE)
    raw["tiers"][1]["bias"] = "1/U"
    del raw["tiers"][0]["bias"]
    m = validate(raw)
    np.testing.assert_allclose(m.bias, [1.0, 0.5])
    np.testing.assert_allclose(m.lambda_max, m.lam)


def test_round_trip():
    m = validate(BASE)
    assert validate(to_config(m)) == m


def test_fig2_dof(fig2):
    np.testing.assert_array_equal(fig2.dof, [5, 3, 1])
    assert fig2.delta == 0.5


def test_tier_config_direct():
    t = TierConfig(lam=3.0, power=1.0, bias=1.0, antennas=4, users=2)
    assert t.dof == 3 and t.lambda_max == 3.0
    with pytest.raises(ConfigError):
        TierConfig(lam=1.0, power=1.0, bias=1.0, antennas=1, users=2)


def test_network_alpha_check():
    t = TierConfig(lam=1.0, power=1.0, bias=1.0, antennas=1, users=1)
    with pytest.raises(ConfigError, match="alpha must exceed 2"):
        NetworkModel((t,), 2.0)


def test_usdma_detection(fig2, fig3):
    assert fig3.is_usdma()
    assert not fig2.is_usdma()


def test_only_tier_and_with_densities(fig2):
    m = fig2.only_tier(1)
    np.testing.assert_array_equal(m.lam, [0, 500, 0])
    np.testing.assert_array_equal(m.lambda_max, fig2.lambda_max)
    with pytest.raises(ValueError):
        fig2.with_densities([1, 2])


def test_fig2_ratio_from_gamma_recurrence(fig2):
    # D = 5, 3, 1 and U = 4, 2, 1 at delta = 1/2
    def gr(a):
        return gamma_by_recurrence(a + 0.5) / gamma_by_recurrence(a)

    expected = [gr(5) / gr(4), gr(3) / gr(2), 1.0]
    np.testing.assert_allclose(coefficient_vectors(fig2).ratio, expected, rtol=1e-13)
    np.testing.assert_allclose(expected, [1.125, 1.25, 1.0], rtol=1e-13)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_coefficient_identity(seed):
    m = random_model(np.random.default_rng(seed))
    cv = coefficient_vectors(m)
    np.testing.assert_allclose(cv.c1 * cv.c2, m.users * cv.c, rtol=1e-12)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), scale=st.floats(1e-3, 1e3))
def test_association_sums_to_one_and_is_scale_free(seed, scale):
    m = random_model(np.random.default_rng(seed))
    p = association_probabilities(m)
    assert p.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(p >= 0)
    np.testing.assert_allclose(association_probabilities(m.with_densities(m.lam * scale)), p, rtol=1e-12)


def test_association_with_idle_tier(fig2):
    p = association_probabilities(fig2.with_densities([0, 500, 1000]))
    assert p[0] == 0.0
    with pytest.raises(DegenerateNetworkError):
        association_probabilities(fig2.with_densities([0, 0, 0]))
