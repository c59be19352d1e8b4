import math

import numpy as np
import pytest

from semsnr.errors import DomainError
from semsnr.noise import (
    ELECTRON_CHARGE,
    NoiseRecipe,
    partition_noise_power,
    recipe_from_text,
    recipe_to_text,
    shot_noise_power,
    simulate,
    total_se_yield,
)
from semsnr.raster import raster_from_array


def flat_recipe(dose, model, size=256, **kw):
    return NoiseRecipe(dose_map=np.full((size, size), float(dose)),
                       emission_model=model, bit_depth=16, **kw)


def test_none_model_is_noiseless():
    gt = simulate(flat_recipe(100, "none", size=32))
    assert np.array_equal(gt.noisy.data, gt.clean.data)
    assert gt.noise_energy == 0.0
    assert math.isinf(gt.true_snr)


def test_determinism_bit_identical():
    r = flat_recipe(50, "poisson-se", size=64, seed=11)
    a, b = simulate(r), simulate(r)
    assert np.array_equal(a.noisy.data, b.noisy.data)
    assert a.true_snr == b.true_snr
    c = simulate(flat_recipe(50, "poisson-se", size=64, seed=12))
    assert not np.array_equal(a.noisy.data, c.noisy.data)


def test_poisson_pe_moments_and_snr():
    gt = simulate(flat_recipe(100, "poisson-pe", seed=42))
    x = gt.noisy.data
    n = x.size
    # sample mean within 3 standard errors of the dose
    assert abs(x.mean() - 100.0) <= 3.0 * math.sqrt(100.0 / n)
    assert abs(x.var() - 100.0) <= 0.05 * 100.0
    measured_snr = x.mean() / x.std()
    assert abs(measured_snr - 10.0) <= 0.03 * 10.0


def test_compound_poisson_se_moments():
    # per-pixel secondary count: mean delta*dose, variance delta*dose*(1+delta)
    gt = simulate(flat_recipe(100, "poisson-se", se_yield=0.16, seed=7))
    x = gt.noisy.data
    assert abs(x.mean() - 16.0) <= 3.0 * math.sqrt(18.56 / x.size)
    assert abs(x.var() - 18.56) <= 0.05 * 18.56
    predicted = math.sqrt(100.0 / (1.0 + 1.0 / 0.16))
    assert abs(x.mean() / x.std() - predicted) <= 0.05 * predicted


def test_binomial_bse_moments():
    gt = simulate(flat_recipe(100, "binomial-bse", bse_yield=0.30, seed=9))
    x = gt.noisy.data
    assert abs(x.mean() - 30.0) <= 3.0 * math.sqrt(30.0 / x.size)
    # thinned Poisson: variance equals the mean
    assert abs(x.var() - 30.0) <= 0.05 * 30.0


def test_yield_inflation_negative_binomial():
    k = 1.5
    gt = simulate(flat_recipe(100, "poisson-se", se_yield=0.16, yield_inflation=k, seed=3))
    x = gt.noisy.data
    predicted = math.sqrt(100.0 / (1.0 + k / 0.16))
    assert abs(x.mean() / x.std() - predicted) <= 0.05 * predicted


@pytest.mark.parametrize("model,kw", [
    ("poisson-pe", {}),
    ("poisson-se", {"se_yield": 0.2}),
    ("binomial-bse", {"bse_yield": 0.4}),
    ("additive-gaussian", {"gaussian_sigma": 4.0}),
])
def test_noise_is_zero_mean(model, kw):
    gt = simulate(flat_recipe(400, model, seed=21, dc_offset=100.0, **kw))
    diff = gt.noisy.data - gt.clean.data
    stderr = diff.std() / math.sqrt(diff.size)
    assert abs(diff.mean()) <= 3.0 * max(stderr, 0.5)  # quantization floor half a count


def test_oracle_energies_consistent():
    rng_dose = np.abs(np.random.Generator(np.random.Philox(5)).normal(200, 40, (64, 64))) + 1
    gt = simulate(NoiseRecipe(dose_map=rng_dose, emission_model="poisson-pe", seed=2, bit_depth=16))
    assert gt.noise_energy > 0
    assert gt.true_snr == pytest.approx(gt.signal_energy / gt.noise_energy)
    assert gt.signal_energy == pytest.approx(float(np.var(gt.clean.data)))


def test_recipe_validation():
    with pytest.raises(DomainError):
        NoiseRecipe(dose_map=np.zeros((4, 4)))
    with pytest.raises(DomainError):
        flat_recipe(10, "laplacian")
    with pytest.raises(DomainError):
        flat_recipe(10, "poisson-se", se_yield=0.0)
    with pytest.raises(DomainError):
        flat_recipe(10, "binomial-bse", bse_yield=1.5)


def test_shot_noise_power_examples():
    assert shot_noise_power(1e-9, 1e6) == pytest.approx(3.204353268e-22, rel=1e-9)
    assert shot_noise_power(1e-9, 2e6) == pytest.approx(2 * shot_noise_power(1e-9, 1e6))
    with pytest.raises(DomainError):
        shot_noise_power(0.0, 1e6)
    assert shot_noise_power(1.0, 1.0) == pytest.approx(2 * ELECTRON_CHARGE)


def test_partition_noise_power_examples():
    assert partition_noise_power(1.0, 3.7) == pytest.approx(3.7)
    assert partition_noise_power(0.0, 3.7) == 0.0
    assert partition_noise_power(0.5, 4.0) == pytest.approx(2.0)
    with pytest.raises(DomainError):
        partition_noise_power(1.2, 1.0)


def test_total_se_yield_examples():
    assert total_se_yield(0.1, 0.0) == pytest.approx(0.1)
    assert total_se_yield(0.1, 0.3) == pytest.approx(0.13)
    assert total_se_yield(0.0, 0.5) == 0.0
    with pytest.raises(DomainError):
        total_se_yield(-0.1, 0.3)


def test_recipe_text_round_trip_constant():
    recipe = flat_recipe(123.5, "poisson-se", size=8, se_yield=0.2, seed=99)
    text = recipe_to_text(recipe)
    again = recipe_from_text(text)
    assert np.array_equal(again.dose_map, recipe.dose_map)
    for field in ("emission_model", "se_yield", "bse_yield", "yield_inflation",
                  "gaussian_sigma", "detector_gain", "dc_offset", "seed", "bit_depth"):
        assert getattr(again, field) == getattr(recipe, field), field


def test_recipe_text_round_trip_pgm_reference():
    basis = raster_from_array(np.arange(16, dtype=float).reshape(4, 4), bit_depth=16)
    dose = 0.5 * basis.data + 10.0
    recipe = NoiseRecipe(dose_map=dose, emission_model="poisson-pe", seed=4, bit_depth=16)
    text = recipe_to_text(recipe, dose_pgm="basis.pgm", dose_scale=0.5, dose_offset=10.0)
    again = recipe_from_text(text, dose_loader=lambda name: basis)
    assert np.allclose(again.dose_map, recipe.dose_map)


def test_recipe_text_rejects_unknown_key():
    with pytest.raises(DomainError, match="unknown key"):
        recipe_from_text("emission_model = none\nwobble = 3\n")
