"""Random in-memory records for property and oracle tests."""

from __future__ import annotations

import random
from decimal import Decimal

from plantmatch.model import FuelType, PlantRecord, SetType, Technology, UnitRecord

SYLLABLES = ["am", "ber", "dor", "fen", "gar", "hel", "jo", "kor", "lau", "mir", "nor", "os", "pel", "ri", "sen", "tal"]
SUFFIXES = ["", "", " 1", " 2", " 3", " a", " b", " ii", " Nord", " GmbH", " Power Plant"]
FUELS = [FuelType.HardCoal, FuelType.NaturalGas, FuelType.Lignite, FuelType.Hydro, FuelType.Oil]
COUNTRIES = ["Germany", "France", "Poland"]


def typo(rng: random.Random, text: str) -> str:
    if len(text) < 3:
        return text
    i = rng.randrange(len(text) - 1)
    return text[:i] + text[i + 1] + text[i] + text[i + 2:]


def random_units(rng: random.Random, n: int, source: str = "S", n_countries: int = 3) -> list[UnitRecord]:
    """About ``n`` units drawn as noisy blocks of a few underlying plants."""
    units: list[UnitRecord] = []
    while len(units) < n:
        # short stems have no token of four letters, so only near-name blocking finds them
        stem = "".join(rng.choice(SYLLABLES) for _ in range(rng.choice((1, 2, 2, 3)))).capitalize()
        country = rng.choice(COUNTRIES[:n_countries])
        fuel = rng.choice(FUELS)
        lat, lon = rng.uniform(45, 55), rng.uniform(0, 20)
        for _ in range(rng.choice((1, 1, 2, 3, 4))):
            if len(units) >= n:
                break
            name = stem + rng.choice(SUFFIXES)
            if rng.random() < 0.2:
                name = typo(rng, name)
            has_coords = rng.random() < 0.7
            units.append(UnitRecord(
                name=name,
                fueltype=rng.choice(FUELS) if rng.random() < 0.15 else fuel,
                technology=Technology.Unknown,
                set_type=SetType.PP,
                country=country,
                capacity_mw=Decimal(rng.randint(10, 9000)) / 10,
                source_id=source,
                project_id=f"{source}-{len(units):04d}",
                year_commissioned=rng.choice((None, rng.randint(1950, 2020))),
                lat=lat + rng.gauss(0, 0.2) if has_coords else None,
                lon=lon + rng.gauss(0, 0.2) if has_coords else None,
            ))
    return units


def plant(source: str, pid: str, name: str = "Alpha", capacity: str = "100", **kw) -> PlantRecord:
    fields = dict(
        name=name, fueltype=FuelType.NaturalGas, technology=Technology.CCGT, set_type=SetType.PP,
        country="Germany", capacity_mw=Decimal(capacity), source_id=source, project_id=pid,
        member_project_ids=(pid,),
    )
    fields.update(kw)
    return PlantRecord(**fields)


def unit(source: str = "S", pid: str = "u1", name: str = "Alpha", capacity: str = "100", **kw) -> UnitRecord:
    fields = dict(
        name=name, fueltype=FuelType.NaturalGas, technology=Technology.CCGT, set_type=SetType.PP,
        country="Germany", capacity_mw=Decimal(capacity), source_id=source, project_id=pid,
    )
    fields.update(kw)
    return UnitRecord(**fields)
