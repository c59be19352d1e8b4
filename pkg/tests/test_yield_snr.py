import math

import numpy as np
import pytest

from semsnr.errors import DomainError, InconsistentCurrentsError, SingularFitError
from semsnr.yield_snr import (
    BeamParams,
    YieldMeasurement,
    calibrate_idc,
    currents_from_yields,
    dose_per_pixel,
    read_yield_table,
    snr_detected,
    snr_from_image,
    snr_yield,
    write_yield_table,
    yields_from_currents,
)
from semsnr.noise import ELECTRON_CHARGE

# published silicon rows: delta, beam current (A), dwell-derived yield-side
# SNR, detected SNR, and the image-side (I_dc, I_mean, sigma) triple
SILICON_ROWS = [
    (0.16, 291e-12, 40, 19, 12.1, 68.0, 2.35, 24),
    (0.14, 371e-12, 42, 20, 12.3, 45.0, 1.72, 19),
    (0.09, 495e-12, 40, 19, 11.8, 41.0, 1.35, 22),
]


def test_yields_from_currents_example():
    delta, eta = yields_from_currents(YieldMeasurement(100e-12, 70e-12, 54e-12))
    assert delta == pytest.approx(0.16)
    assert eta == pytest.approx(0.30)


def test_yields_edge_and_error_cases():
    delta, eta = yields_from_currents(YieldMeasurement(1e-10, 1e-10, 1e-10))
    assert delta == 0.0 and eta == 0.0
    with pytest.raises(InconsistentCurrentsError):
        yields_from_currents(YieldMeasurement(1e-10, 1.2e-10, 0.5e-10))
    with pytest.raises(InconsistentCurrentsError):
        yields_from_currents(YieldMeasurement(1e-10, 0.4e-10, 0.6e-10))


def test_current_balance_round_trip():
    for delta, eta in ((0.16, 0.30), (0.05, 0.0), (0.4, 0.55)):
        m = currents_from_yields(2.5e-10, delta, eta)
        d2, e2 = yields_from_currents(m)
        assert d2 == pytest.approx(delta, rel=1e-12)
        assert e2 == pytest.approx(eta, rel=1e-12)


def test_dose_per_pixel():
    assert dose_per_pixel(BeamParams(i_pe=ELECTRON_CHARGE, dwell=1.0)) == pytest.approx(1.0)
    b = BeamParams(i_pe=291e-12, dwell=6.39e-6)
    assert dose_per_pixel(b) == pytest.approx(1.161e4, rel=1e-3)
    twice = BeamParams(i_pe=291e-12, dwell=2 * 6.39e-6)
    assert dose_per_pixel(twice) == pytest.approx(2 * dose_per_pixel(b))


def test_snr_yield_channels():
    b = BeamParams(i_pe=100 * ELECTRON_CHARGE, dwell=1.0)  # dose = 100
    assert snr_yield(b, channel="PE") == pytest.approx(10.0)
    assert snr_yield(b, eta=0.25, channel="BSE") == pytest.approx(5.0)
    b291 = BeamParams(i_pe=291e-12, dwell=6.39e-6)
    assert snr_yield(b291, delta=0.16, channel="SE") == pytest.approx(40.0, abs=0.05)
    with pytest.raises(DomainError):
        snr_yield(b, channel="AE")
    with pytest.raises(DomainError):
        snr_yield(b, delta=0.0, channel="SE")


def test_snr_detected():
    assert snr_detected(40.0, 0.23) == pytest.approx(19.18, abs=0.005)
    assert snr_detected(42.0, 0.23) == pytest.approx(20.14, abs=0.005)
    assert snr_detected(7.5, 1.0) == pytest.approx(7.5)
    with pytest.raises(DomainError):
        snr_detected(40.0, 0.0)


def test_snr_detected_ratio_invariant(rng):
    for _ in range(20):
        snr = float(rng.uniform(0.1, 100.0))
        dqe = float(rng.uniform(0.01, 1.0))
        assert snr_detected(snr, dqe) / snr == pytest.approx(math.sqrt(dqe), rel=1e-12)


def test_snr_from_image_rows():
    assert snr_from_image(68.0, 12.1, 2.35) == pytest.approx(23.79, abs=0.005)
    assert snr_from_image(45.0, 12.3, 1.72) == pytest.approx(19.01, abs=0.005)
    assert snr_from_image(41.0, 11.8, 1.35) == pytest.approx(21.63, abs=0.005)
    with pytest.raises(DomainError):
        snr_from_image(68.0, 12.1, 0.0)
    with pytest.raises(DomainError):
        snr_from_image(10.0, 12.0, 1.0)


def test_published_silicon_table_consistency():
    # dual path: sqrt(DQE) * yield-side values round to the detected column,
    # and the image-side triples round to their printed values
    for delta, i_pe, snr_se, snr_et, i_dc, i_mean, sigma, image_side in SILICON_ROWS:
        assert round(snr_detected(snr_se, 0.23)) == snr_et
        assert round(snr_from_image(i_mean, i_dc, sigma)) == image_side


def test_calibrate_idc_perfect_line():
    currents = np.linspace(1e-10, 9e-10, 6)
    samples = [(i, 12.3 + 3.1e10 * i) for i in currents]
    fit = calibrate_idc(samples)
    assert fit.i_dc == pytest.approx(12.3, rel=1e-9)
    assert fit.slope == pytest.approx(3.1e10, rel=1e-9)
    assert np.allclose(fit.residuals, 0.0, atol=1e-9)


def test_calibrate_idc_two_points():
    fit = calibrate_idc([(1.0, 2.0), (2.0, 4.0)])
    assert fit.i_dc == pytest.approx(0.0, abs=1e-12)
    assert fit.slope == pytest.approx(2.0)


def test_calibrate_idc_noisy_recovery(rng):
    true_idc, slope = 12.3, 2.0e10
    hits = 0
    for trial in range(20):
        currents = np.linspace(1e-10, 1e-9, 10)
        noise = rng.normal(0.0, 0.4, size=currents.size)
        fit = calibrate_idc(list(zip(currents, true_idc + slope * currents + noise)))
        if abs(fit.i_dc - true_idc) <= 3.0 * fit.intercept_stderr:
            hits += 1
    assert hits >= 18  # 3-sigma coverage with a little slack


def test_calibrate_idc_guards():
    with pytest.raises(SingularFitError):
        calibrate_idc([(1.0, 2.0), (1.0, 3.0)])
    with pytest.raises(DomainError):
        calibrate_idc([(1.0, 2.0)])


def test_se_yield_snr_matches_simulation():
    # cross-module consistency: the analytic secondary-electron SNR with k=1
    # agrees with the compound-Poisson simulator's measured moments
    import numpy as np

    from semsnr.noise import NoiseRecipe, simulate

    dose = 100.0
    b = BeamParams(i_pe=dose * ELECTRON_CHARGE, dwell=1.0, b_enhancement=1.0)
    analytic = snr_yield(b, delta=0.16, channel="SE")
    recipe = NoiseRecipe(dose_map=np.full((256, 256), dose), emission_model="poisson-se",
                         se_yield=0.16, seed=55, bit_depth=16)
    x = simulate(recipe).noisy.data
    measured = float(x.mean() / x.std())
    assert abs(measured - analytic) <= 0.05 * analytic


def test_yield_table_round_trip(tmp_path):
    rows = [
        {"material": "Au", "energy_keV": 10.0, "delta": 0.16, "eta": 0.30, "source": "in-situ"},
        {"material": "Si", "energy_keV": 20.0, "delta": 0.14, "eta": 0.18, "source": "published"},
    ]
    path = tmp_path / "yields.csv"
    write_yield_table(rows, path)
    again = read_yield_table(path)
    assert again == rows
