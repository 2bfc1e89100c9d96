import math

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from _gen import unit
from plantmatch.model import FuelType
from plantmatch.similarity import (
    EPS,
    FieldSpec,
    SimilarityConfig,
    combine_bayes,
    compare_geo,
    compare_names,
    default_config,
    field_probability,
    haversine_km,
    min_name_score_without_fuel_match,
    record_similarity,
)

probs = st.floats(min_value=EPS, max_value=1 - EPS)


def chord_distance_km(lat1, lon1, lat2, lon2, radius=6371.0):
    """Great-circle distance from the straight chord between two points on the sphere."""
    def xyz(lat, lon):
        la, lo = math.radians(lat), math.radians(lon)
        return (math.cos(la) * math.cos(lo), math.cos(la) * math.sin(lo), math.sin(la))
    a, b = xyz(lat1, lon1), xyz(lat2, lon2)
    chord = math.dist(a, b)
    return 2 * radius * math.asin(chord / 2)


@pytest.mark.parametrize("a, b, lo, hi", [
    ("gersteinwerk", "gersteinwerk", 1.0, 1.0),
    ("bouchain 7", "bouchain", 0.8, 1.0),
    ("belchatow", "maasvlakte", 0.0, 0.3),
    ("gersteinwerk f", "gersteinwerk k", 0.8, 1.0),
    ("maasvlakte", "", 0.0, 0.0),
])
def test_compare_names_examples(a, b, lo, hi):
    assert lo <= compare_names(a, b) <= hi


def test_compare_names_word_order():
    assert compare_names("nord jaenschwalde", "jaenschwalde nord") == 1.0


@given(st.text("abcdefg 12", max_size=15), st.text("abcdefg 12", max_size=15))
def test_compare_names_symmetric_and_bounded(a, b):
    s = compare_names(a, b)
    assert s == compare_names(b, a)
    assert 0.0 <= s <= 1.0


def test_haversine_against_chord_oracle():
    # one degree of arc on the equator and a 1000 km meridian step
    assert haversine_km(0, 0, 0, 1) == pytest.approx(6371 * math.pi / 180, rel=1e-12)
    step = math.degrees(1000 / 6371)
    assert haversine_km(0, 10, step, 10) == pytest.approx(1000.0, rel=1e-12)
    for pts in [(51.67, 7.72, 51.26, 19.33), (-33.9, 18.4, 40.7, -74.0), (10, 179.5, -10, -179.5)]:
        assert haversine_km(*pts) == pytest.approx(chord_distance_km(*pts), rel=1e-9)


def test_compare_geo_examples():
    a = unit(lat=51.67, lon=7.72)
    assert compare_geo(a, a, 50) == 1.0
    far = unit(lat=51.67 + math.degrees(1000 / 6371), lon=7.72)
    assert compare_geo(a, far, 50) == 0.0
    assert compare_geo(a, unit(), 50) is None
    assert field_probability(None, FieldSpec("geoposition", 0.3, 0.9)) == 0.5


@pytest.mark.parametrize("score, low, high, expected", [
    (0.0, 0.1, 0.9, 0.1), (1.0, 0.1, 0.9, 0.9), (0.5, 0.2, 0.8, 0.5),
])
def test_field_probability(score, low, high, expected):
    assert field_probability(score, FieldSpec("name", low, high)) == pytest.approx(expected, abs=1e-15)


def test_field_spec_validation():
    with pytest.raises(ValueError):
        FieldSpec("name", 0.6, 0.9)
    with pytest.raises(ValueError):
        FieldSpec("colour", 0.1, 0.9)
    with pytest.raises(ValueError):
        SimilarityConfig(fields=(), threshold=1.0)


def test_combine_examples():
    assert combine_bayes([0.5, 0.5]) == 0.5
    assert combine_bayes([0.9, 0.9]) == pytest.approx(0.81 / 0.82, abs=1e-12)
    assert combine_bayes([0.9, 0.1]) == 0.5
    assert combine_bayes([]) == 0.5


@given(st.lists(probs, min_size=1, max_size=6), st.randoms())
def test_combine_permutation_invariant(ps, rnd):
    shuffled = list(ps)
    rnd.shuffle(shuffled)
    assert combine_bayes(shuffled) == combine_bayes(ps)


@given(st.lists(probs, max_size=6))
def test_combine_neutral_element(ps):
    assert combine_bayes(ps + [0.5]) == combine_bayes(ps)


@given(probs)
def test_combine_single_field_identity(p):
    assert combine_bayes([p]) == p


@given(st.lists(probs, min_size=1, max_size=6), st.integers(0, 5), probs)
def test_combine_monotone(ps, i, q):
    i %= len(ps)
    raised = list(ps)
    assume(q >= ps[i])
    raised[i] = q
    assert combine_bayes(raised) >= combine_bayes(ps)


@pytest.mark.parametrize("profile", ["aggregation", "linkage"])
def test_retrofit_stays_matchable(profile):
    cfg = default_config(profile)
    coal = unit(pid="a", name="Hemweg 8", fueltype=FuelType.HardCoal, lat=52.39, lon=4.84)
    gas = unit(pid="b", name="Hemweg 8", fueltype=FuelType.NaturalGas, lat=52.39, lon=4.84)
    assert record_similarity(coal, gas, cfg) >= 0.985


def test_record_similarity_examples():
    cfg = default_config("aggregation")
    a = unit(pid="a", lat=50.0, lon=6.0)
    assert record_similarity(a, a, cfg) >= cfg.threshold
    assert record_similarity(a, unit(pid="b", country="France", lat=50.0, lon=6.0), cfg) == 0.0


coords = st.one_of(st.none(), st.tuples(st.floats(49, 51), st.floats(5, 7)))


@st.composite
def records(draw):
    where = draw(coords)
    return unit(
        pid=draw(st.sampled_from(["a", "b", "c"])),
        name=draw(st.sampled_from(["Alpha", "Alpha 2", "Alphaa", "Beta Nord", "Nord Beta"])),
        fueltype=draw(st.sampled_from([FuelType.HardCoal, FuelType.NaturalGas])),
        lat=where and where[0],
        lon=where and where[1],
    )


@given(records(), records())
def test_record_similarity_symmetric(a, b):
    cfg = default_config("linkage")
    assert record_similarity(a, b, cfg) == record_similarity(b, a, cfg)


@pytest.mark.parametrize("profile", ["aggregation", "linkage"])
def test_fuel_mismatch_bound(profile):
    cfg = default_config(profile)
    bound = min_name_score_without_fuel_match(cfg)
    assert bound is not None and 0 < bound < 1
    name, fuel, geo = cfg.fields
    below = combine_bayes([field_probability(bound - 1e-3, name), field_probability(0.0, fuel),
                           field_probability(1.0, geo)])
    at = combine_bayes([field_probability(bound + 1e-5, name), field_probability(0.0, fuel),
                        field_probability(1.0, geo)])
    assert below < cfg.threshold <= at


def test_config_round_trip():
    cfg = default_config("linkage")
    assert SimilarityConfig.from_dict("linkage", cfg.to_dict()) == cfg
