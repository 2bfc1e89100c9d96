from decimal import Decimal

import pytest
from hypothesis import given
from hypothesis import strategies as st

from _gen import unit
from plantmatch.model import FuelType, Technology
from plantmatch.rescale import (
    RescaleFactor,
    apply_factor,
    detect_outliers,
    estimate_factors,
    lookup_factor,
    quartiles,
    read_factors,
    read_pairs,
    write_factors,
)

GAS, CCGT, OCGT = FuelType.NaturalGas, Technology.CCGT, Technology.OCGT


def pairs_for(fuel, tech, ratios, gross=100.0):
    return [(fuel, tech, r * gross, gross) for r in ratios]


def test_constant_ratios():
    (f,) = estimate_factors(pairs_for(FuelType.Nuclear, Technology.SteamTurbine, [0.9, 0.9, 0.9]))
    assert f.mean_ratio == 0.9 and f.outlier_ratios == () and f.n_samples == 3


def test_outlier_stays_in_mean():
    # sorted 0.40 0.88 0.90 0.92; linear interpolation gives Q1 0.76, Q3 0.905,
    # lower fence 0.76 - 1.5 * 0.145 = 0.5425
    (f,) = estimate_factors([(GAS, CCGT, r, 1.0) for r in (0.90, 0.92, 0.88, 0.40)])
    assert f.mean_ratio == pytest.approx(0.775, abs=1e-12)
    assert f.median_ratio == pytest.approx(0.89, abs=1e-12)
    assert f.q1 == pytest.approx(0.76, abs=1e-12) and f.q3 == pytest.approx(0.905, abs=1e-12)
    assert f.outlier_ratios == (0.40,)


@pytest.mark.parametrize("values, flags", [
    ([1, 1, 1, 1, 10], [False, False, False, False, True]),
    ([0.88, 0.89, 0.90, 0.91], [False] * 4),
    ([5], [False]),
])
def test_detect_outliers_examples(values, flags):
    assert detect_outliers(values) == flags


def test_detect_outliers_needs_values():
    with pytest.raises(ValueError):
        detect_outliers([])


@given(st.lists(st.floats(min_value=0.1, max_value=1.2), min_size=1, max_size=40), st.randoms())
def test_outlier_flags_follow_values(values, rnd):
    flagged = {v for v, f in zip(values, detect_outliers(values)) if f}
    shuffled = list(values)
    rnd.shuffle(shuffled)
    assert {v for v, f in zip(shuffled, detect_outliers(shuffled)) if f} == flagged


@given(st.lists(st.floats(min_value=0.1, max_value=1.2), min_size=1, max_size=40))
def test_quartiles_are_ordered(values):
    q1, med, q3 = quartiles(values)
    assert q1 <= med <= q3


def test_empty_and_bad_pairs():
    assert estimate_factors([]) == []
    assert estimate_factors([(GAS, CCGT, 0.0, 100.0), (GAS, CCGT, 90.0, -1.0)]) == []


def test_one_factor_per_group_sorted():
    factors = estimate_factors(pairs_for(GAS, OCGT, [0.95]) + pairs_for(FuelType.HardCoal, Technology.SteamTurbine, [0.9])
                               + pairs_for(GAS, CCGT, [0.97]))
    assert [(f.fueltype, f.technology) for f in factors] == [
        (FuelType.HardCoal, Technology.SteamTurbine), (GAS, CCGT), (GAS, OCGT)]


def test_lookup_fallback_chain():
    factors = estimate_factors(pairs_for(GAS, CCGT, [0.96, 0.96]) + pairs_for(GAS, OCGT, [0.9]))
    assert lookup_factor(GAS, CCGT, factors) == pytest.approx(0.96)
    # fuel-level mean is weighted by sample count
    assert lookup_factor(GAS, Technology.Unknown, factors) == pytest.approx((2 * 0.96 + 0.9) / 3)
    assert lookup_factor(FuelType.Oil, Technology.Unknown, factors, default=0.9) == 0.9


def test_apply_factor_examples():
    assert apply_factor(unit(capacity="100"), [], 0.9).capacity_mw == Decimal("90.0")
    exact = RescaleFactor(GAS, CCGT, 0.95, 0.95, 0.95, 0.95, 1)
    fuel_level = RescaleFactor(GAS, OCGT, 0.5, 0.5, 0.5, 0.5, 1)
    assert apply_factor(unit(capacity="100"), [fuel_level, exact]).capacity_mw == Decimal("95.00")


def test_factor_above_one_is_clamped():
    f = RescaleFactor(GAS, CCGT, 1.1, 1.1, 1.1, 1.1, 1)
    assert apply_factor(unit(capacity="100"), [f]).capacity_mw == Decimal("100")


@given(st.decimals(min_value=Decimal("0.1"), max_value=Decimal("9999"), places=2), st.integers(1, 50))
def test_apply_factor_is_homogeneous(cap, k):
    f = [RescaleFactor(GAS, CCGT, 0.93, 0.93, 0.93, 0.93, 1)]
    one = apply_factor(unit(capacity=str(cap)), f).capacity_mw
    scaled = apply_factor(unit(capacity=str(cap * k)), f).capacity_mw
    assert scaled == one * k


def test_factor_csv_round_trip(tmp_path):
    factors = estimate_factors(pairs_for(GAS, CCGT, [0.91, 0.97, 0.93]) + pairs_for(FuelType.Hydro, Technology.Reservoir, [0.99]))
    write_factors(factors, tmp_path / "f.csv")
    assert read_factors(tmp_path / "f.csv") == factors
    header = (tmp_path / "f.csv").read_text().splitlines()[0]
    assert header == "fueltype,technology,mean_ratio,median_ratio,q1,q3,n_samples"


def test_read_pairs(tmp_path):
    path = tmp_path / "pairs.csv"
    path.write_text("fueltype,technology,net_mw,gross_mw\nNaturalGas,CCGT,90,100\nHydro,,45,50\n")
    assert read_pairs(path) == [(GAS, CCGT, 90.0, 100.0), (FuelType.Hydro, Technology.Unknown, 45.0, 50.0)]
