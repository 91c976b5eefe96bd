import pytest
from hypothesis import given, strategies as st

from pasampler import energy as en


def table_params(**kw):
    return en.EnergyParams(**kw)


def test_window_energy_table_values():
    w = en.pas_window_energy(table_params())
    assert w.leakage == pytest.approx(8.56e-6, rel=1e-12)
    # 1.242 uW * 7.09 ns * 7200 samples
    assert w.active == pytest.approx(63.4e-12, rel=1e-3)
    assert w.total == w.active + w.leakage


def test_window_energy_hvt():
    w = en.pas_window_energy(table_params(pas_leakage_power=en.HVT_LEAKAGE_POWER))
    assert w.leakage == pytest.approx(0.7e-6, rel=1e-12)


@given(st.floats(0, 1e-3), st.floats(0, 1e-3), st.floats(0.1, 10))
def test_window_energy_linear(dyn, leak, k):
    a = en.pas_window_energy(table_params(pas_dynamic_power=dyn, pas_leakage_power=leak))
    b = en.pas_window_energy(table_params(pas_dynamic_power=k * dyn, pas_leakage_power=k * leak))
    assert b.total == pytest.approx(k * a.total, rel=1e-12, abs=1e-30)


def test_fit_two_points():
    m = en.fit_affine_mcu_model((10, 143e-6), (360, 379e-6))
    # slope = 236 uJ / 350 Hz, intercept = 143 - 10 * slope
    assert m.slope == pytest.approx(236e-6 / 350, rel=1e-12)
    assert m.intercept == pytest.approx(143e-6 - 10 * 236e-6 / 350, rel=1e-12)
    assert m.slope * 1e6 == pytest.approx(0.674, abs=5e-4)
    assert m.intercept * 1e6 == pytest.approx(136.3, abs=0.05)
    assert m(10) == pytest.approx(143e-6, rel=1e-15)
    assert m(360) == pytest.approx(379e-6, rel=1e-15)


def test_fit_flat_and_degenerate():
    assert en.fit_affine_mcu_model((10, 5e-6), (100, 5e-6)).slope == 0
    with pytest.raises(ValueError):
        en.fit_affine_mcu_model((10, 1e-6), (10, 2e-6))


def test_crossover_constructed_fixed_point():
    base = table_params(mcu_model=en.fit_affine_mcu_model(en.MCU_POINT_LO, en.MCU_POINT_HI))
    u = base.mcu_model(204.0) + en.pas_window_energy(base).total
    assert en.crossover_frequency(base.with_(uniform_algo_energy=u)) == pytest.approx(204.0, rel=1e-12)


def test_crossover_at_uniform_rate_when_pas_free():
    base = table_params(pas_dynamic_power=0, pas_leakage_power=0,
                        mcu_model=en.fit_affine_mcu_model(en.MCU_POINT_LO, en.MCU_POINT_HI))
    p = base.with_(uniform_algo_energy=base.mcu_model(360.0))
    assert en.crossover_frequency(p) == pytest.approx(360.0, rel=1e-12)


def test_crossover_out_of_range():
    p = en.reference_params().with_(uniform_algo_energy=1e-3)
    with pytest.raises(ValueError):
        en.crossover_frequency(p)


def test_calibrated_savings_and_crossover():
    p = en.reference_params()
    assert en.savings_at(p, 17.1) == pytest.approx(0.446, abs=1e-12)
    assert 195 <= en.crossover_frequency(p) <= 215
    assert en.savings_at(p, en.crossover_frequency(p)) == pytest.approx(0.0, abs=1e-12)


def test_hvt_savings_near_reference():
    p = en.reference_params(leakage_power=en.HVT_LEAKAGE_POWER)
    assert en.savings_at(p, 17.1) == pytest.approx(0.473, abs=2e-3)


def test_savings_errors():
    p = en.reference_params()
    with pytest.raises(ValueError):
        en.savings_at(p, -1)
    with pytest.raises(ValueError):
        en.savings_at(p.with_(uniform_algo_energy=0.0), 10)


@given(st.floats(0, 359), st.floats(0.01, 1))
def test_savings_strictly_decreasing(f, df):
    p = en.reference_params()
    assert en.savings_at(p, f + df) < en.savings_at(p, f)


def test_params_validation():
    with pytest.raises(ValueError):
        en.EnergyParams(pas_leakage_power=-1)
    with pytest.raises(ValueError):
        en.EnergyParams(mcu_model=en.AffineModel(-1.0, 0.0))
