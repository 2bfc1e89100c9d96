"""
Synthetic multi-source fixtures with exact ground truth.

A true fleet of plants is drawn from a seeded generator; every source then
receives a perturbed view of the plants it covers, written in its own column
layout and fuel vocabulary. The truth links, the reference fleet (plants held
by at least two sources), national statistics, a paired net/gross corpus and
a ready-to-run pipeline config are written alongside.
"""

from __future__ import annotations

import csv
import math
import random
import string
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Sequence

import yaml

from .report import STATISTICS_CATEGORIES, make_link, write_truth

COUNTRIES = {
    # name: (lat, lon, spread in degrees)
    "Germany": (51.0, 10.0, 2.5),
    "France": (46.5, 2.5, 3.0),
    "Poland": (52.0, 19.0, 2.5),
    "Spain": (40.2, -3.7, 3.0),
    "Italy": (43.0, 12.5, 2.5),
    "Netherlands": (52.2, 5.5, 0.8),
    "Belgium": (50.6, 4.6, 0.6),
    "Austria": (47.5, 14.0, 1.2),
    "Czech Republic": (49.8, 15.5, 1.2),
    "Sweden": (60.0, 15.0, 3.0),
    "United Kingdom": (53.0, -1.5, 2.5),
    "Romania": (45.9, 25.0, 2.0),
}

FUELS = {
    # fuel: (weight, median MW, technologies)
    "NaturalGas": (0.26, 250.0, ["CCGT", "OCGT", "SteamTurbine", "CombustionEngine"]),
    "HardCoal": (0.12, 600.0, ["SteamTurbine"]),
    "Lignite": (0.07, 900.0, ["SteamTurbine"]),
    "Nuclear": (0.03, 1300.0, ["SteamTurbine"]),
    "Hydro": (0.20, 60.0, ["Reservoir", "RunOfRiver", "PumpedStorage"]),
    "Oil": (0.07, 120.0, ["SteamTurbine", "CombustionEngine"]),
    "Bioenergy": (0.12, 20.0, ["SteamTurbine", "CombustionEngine"]),
    "Waste": (0.08, 30.0, ["SteamTurbine"]),
    "Geothermal": (0.02, 25.0, ["SteamTurbine"]),
    "Other": (0.03, 40.0, ["Unknown"]),
}

# planted net/gross ratios for gross-basis sources and the paired corpus
NET_RATIO = {
    "NaturalGas": 0.93, "HardCoal": 0.91, "Lignite": 0.90, "Nuclear": 0.94, "Hydro": 0.98,
    "Oil": 0.93, "Bioenergy": 0.88, "Waste": 0.86, "Geothermal": 0.90, "Other": 0.90,
}

SYLLABLES = [
    "ber", "gen", "wald", "stein", "horn", "mar", "lin", "dorf", "hau", "sen", "kap", "rot",
    "mun", "tal", "vel", "nor", "bach", "ost", "lau", "fen", "gar", "mol", "ris", "tor",
    "vik", "san", "dra", "pel", "kor", "mir", "zan", "bur", "lom", "quen", "hel", "jos",
]
GENERIC = ["Kraftwerk {}", "{} Power Station", "Centrale {}", "{} GmbH", "{} Power Plant", "HKW {}"]

STYLES = {
    "english": {
        "delimiter": ",",
        "columns": {"Plant": "name", "Fuel": "fueltype", "Tech": "technology", "CHP": "set",
                    "Country": "country", "Capacity_MW": "capacity", "Commissioned": "year",
                    "Latitude": "lat", "Longitude": "lon", "ID": "project_id", "Status": "status"},
        "fuel_terms": {
            "NaturalGas": "natural gas", "HardCoal": "hard coal", "Lignite": "lignite",
            "Nuclear": "nuclear", "Hydro": "hydro", "Oil": "oil", "Bioenergy": "biomass",
            "Waste": "waste", "Geothermal": "geothermal", "Other": "other", "Wind": "wind",
            "Solar": "solar",
        },
        "tech_terms": {
            "CCGT": "ccgt", "OCGT": "ocgt", "SteamTurbine": "steam turbine",
            "CombustionEngine": "engine", "Reservoir": "reservoir", "RunOfRiver": "run-of-river",
            "PumpedStorage": "pumped storage", "Unknown": "",
        },
        "chp": ("yes", "no"),
        "status": ("operating", "reserve", "retired"),
    },
    "german": {
        "delimiter": ";",
        "columns": {"Kraftwerksname": "name", "Energietraeger": "fueltype", "Anlagentyp": "technology",
                    "KWK": "set", "Land": "country", "Nettoleistung": "capacity",
                    "Inbetriebnahme": "year", "Breitengrad": "lat", "Laengengrad": "lon",
                    "Kennziffer": "project_id", "Status": "status"},
        "fuel_terms": {
            "NaturalGas": "Erdgas", "HardCoal": "Steinkohle", "Lignite": "Braunkohle",
            "Nuclear": "Kernenergie", "Hydro": "Wasserkraft", "Oil": "Mineraloel",
            "Bioenergy": "Biomasse", "Waste": "Abfall", "Geothermal": "Geothermie",
            "Other": "Sonstige", "Wind": "Windenergie", "Solar": "Solarenergie",
        },
        "tech_terms": {
            "CCGT": "GuD", "OCGT": "Gasturbine", "SteamTurbine": "Dampfturbine",
            "CombustionEngine": "Motor", "Reservoir": "Speicherwasser", "RunOfRiver": "Laufwasser",
            "PumpedStorage": "Pumpspeicher", "Unknown": "",
        },
        "chp": ("ja", "nein"),
        "status": ("in Betrieb", "Reserve", "stillgelegt"),
    },
    "terse": {
        "delimiter": ",",
        "columns": {"name": "name", "fuel": "fueltype", "country": "country", "mw": "capacity",
                    "lat": "lat", "lon": "lon", "uid": "project_id"},
        "fuel_terms": {
            "NaturalGas": "GAS", "HardCoal": "COAL", "Lignite": "LIG", "Nuclear": "NUC",
            "Hydro": "HYD", "Oil": "OIL", "Bioenergy": "BIO", "Waste": "WST",
            "Geothermal": "GEO", "Other": "OTH", "Wind": "WND", "Solar": "SUN",
        },
        "tech_terms": {},
        "chp": None,
        "status": None,
    },
}



@dataclass
class Perturbation:
    """How far each source's view departs from the true fleet."""

    coverage: float = 1.0
    n_shared: int | None = None
    name_typo: float = 0.0
    name_generic: float = 0.0
    name_rename: float = 0.0
    coord_jitter_km: float = 0.0
    capacity_noise: float = 0.0
    drop_year: float = 0.0
    drop_coords: float = 0.0
    drop_technology: float = 0.0
    split_units: float = 0.0
    fuel_swap: float = 0.0
    small_bias: float = 0.0
    noise_rows: float = 0.0

    @classmethod
    def from_dict(cls, data: dict | None) -> Perturbation:
        known = {f.name for f in fields(cls)}
        unknown = set(data or {}) - known
        if unknown:
            raise ValueError(f"unknown perturbation keys: {sorted(unknown)}")
        return cls(**(data or {}))


@dataclass
class SourceSpec:
    id: str
    capacity_basis: str = "net"
    style: str = "english"
    score: int = 1
    perturb: dict = field(default_factory=dict)


@dataclass
class FixtureSpec:
    n_plants: int = 50
    sources: list[SourceSpec] = field(default_factory=list)
    countries: list[str] = field(default_factory=lambda: list(COUNTRIES))
    perturbation: Perturbation = field(default_factory=Perturbation)
    n_renewables: int = 0

    @classmethod
    def build(cls, n_plants: int, n_sources: int, perturbation: dict | None = None, **kw) -> FixtureSpec:
        styles = list(STYLES)
        sources = [
            SourceSpec(id=f"S{i + 1}", capacity_basis="gross" if i % 3 == 2 else "net",
                       style=styles[i % len(styles)], score=max(1, 5 - i))
            for i in range(n_sources)
        ]
        return cls(n_plants=n_plants, sources=sources, perturbation=Perturbation.from_dict(perturbation), **kw)

    @classmethod
    def from_dict(cls, data: dict) -> FixtureSpec:
        data = dict(data)
        pert = Perturbation.from_dict(data.pop("perturbation", None))
        if "sources" in data:
            sources = [SourceSpec(**s) for s in data.pop("sources")]
            spec = cls(sources=sources, perturbation=pert, **{k: v for k, v in data.items() if k != "n_sources"})
        else:
            spec = cls.build(data.pop("n_plants", 50), data.pop("n_sources", 2), None, **data)
            spec.perturbation = pert
        if len(spec.sources) < 2:
            raise ValueError("a fixture needs at least two sources")
        if spec.n_plants < 1:
            raise ValueError("a fixture needs at least one plant")
        return spec


@dataclass
class TruePlant:
    idx: int
    stem: str
    fueltype: str
    technology: str
    chp: bool
    country: str
    capacity: float
    year: int
    lat: float
    lon: float


def _stem(rng: random.Random, used: set[str]) -> str:
    while True:
        n = rng.choice((2, 2, 3))
        s = "".join(rng.choice(SYLLABLES) for _ in range(n)).capitalize()
        if s not in used:
            used.add(s)
            return s


def _draw_fleet(rng: random.Random, spec: FixtureSpec) -> list[TruePlant]:
    fuels = list(FUELS)
    weights = [FUELS[f][0] for f in fuels]
    used: set[str] = set()
    fleet = []
    for i in range(spec.n_plants):
        fuel = rng.choices(fuels, weights)[0]
        _, median_mw, techs = FUELS[fuel]
        country = rng.choice(spec.countries)
        clat, clon, spread = COUNTRIES[country]
        cap = round(median_mw * math.exp(rng.gauss(0.0, 0.8)), 1)
        fleet.append(TruePlant(
            idx=i,
            stem=_stem(rng, used),
            fueltype=fuel,
            technology=rng.choice(techs),
            chp=fuel in ("NaturalGas", "HardCoal", "Bioenergy", "Waste") and rng.random() < 0.3,
            country=country,
            capacity=max(cap, 1.0),
            year=rng.randint(1955, 2020),
            lat=round(clat + rng.uniform(-spread, spread), 5),
            lon=round(clon + rng.uniform(-spread, spread) * 1.4, 5),
        ))
    return fleet


def _coverage(rng: random.Random, spec: FixtureSpec) -> list[list[int]]:
    """Indices of the sources that hold each plant."""
    n_src = len(spec.sources)
    p = spec.perturbation
    out = []
    for i in range(spec.n_plants):
        if p.n_shared is not None:
            out.append(list(range(n_src)) if i < p.n_shared else [rng.randrange(n_src)])
            continue
        held = [s for s in range(n_src) if rng.random() < p.coverage]
        out.append(held or [rng.randrange(n_src)])
    return out


def _typo(rng: random.Random, text: str) -> str:
    if len(text) < 4:
        return text
    i = rng.randrange(1, len(text) - 1)
    op = rng.randrange(3)
    if op == 0:
        return text[:i] + text[i + 1:]
    if op == 1:
        return text[:i] + rng.choice(string.ascii_lowercase) + text[i + 1:]
    return text[:i] + text[i + 1] + text[i] + text[i + 2:]


def _jitter(rng: random.Random, lat: float, lon: float, km: float) -> tuple[float, float]:
    if km <= 0:
        return lat, lon
    dlat = rng.gauss(0.0, km) / 111.0
    dlon = rng.gauss(0.0, km) / (111.0 * max(0.2, math.cos(math.radians(lat))))
    return round(lat + dlat, 5), round(lon + dlon, 5)


def _chance(rng: random.Random, prob: float, weight: float) -> bool:
    return prob > 0 and rng.random() < min(1.0, prob * weight)


def _source_rows(rng, plant: TruePlant, src: SourceSpec, pert: Perturbation, median_cap: float):
    """Rows (as schema dicts) describing one plant in one source."""
    p = Perturbation.from_dict({**{f.name: getattr(pert, f.name) for f in fields(pert)}, **src.perturb})
    weight = (median_cap / plant.capacity) ** p.small_bias if p.small_bias else 1.0

    stem = plant.stem
    renamed = _chance(rng, p.name_rename, weight)
    if renamed:
        stem = _stem(rng, set()) + " " + rng.choice(["Nord", "Sued", "West", "Ost"])
    elif _chance(rng, p.name_typo, weight):
        stem = _typo(rng, stem)
    fuel = plant.fueltype
    if _chance(rng, p.fuel_swap, weight) and fuel in ("HardCoal", "NaturalGas", "Lignite"):
        fuel = "NaturalGas" if fuel != "NaturalGas" else "HardCoal"
    tech = "Unknown" if _chance(rng, p.drop_technology, 1.0) else plant.technology
    year = None if _chance(rng, p.drop_year, 1.0) else plant.year
    coords = None if _chance(rng, p.drop_coords, weight) else _jitter(rng, plant.lat, plant.lon, p.coord_jitter_km)
    cap = plant.capacity * (1.0 + rng.uniform(-p.capacity_noise, p.capacity_noise))

    n_units = 1
    if _chance(rng, p.split_units, 1.0) and plant.capacity >= 50:
        n_units = rng.randint(2, 4)
    shares = [rng.uniform(0.5, 1.5) for _ in range(n_units)]
    total = sum(shares)
    generic = rng.choice(GENERIC) if _chance(rng, p.name_generic, 1.0) else "{}"
    rows = []
    for b in range(n_units):
        label = stem if n_units == 1 else f"{stem} {b + 1}"
        rows.append({
            "name": generic.format(label),
            "fueltype": fuel,
            "technology": tech,
            "chp": plant.chp,
            "country": plant.country,
            "capacity": cap * shares[b] / total,
            "year": None if year is None else min(2020, year + 2 * b),
            "coords": coords,
            "project_id": f"{src.id}-{plant.idx:05d}-{b + 1}",
        })
    return rows


def _format_row(row: dict, src: SourceSpec) -> dict:
    style = STYLES[src.style]
    inv = {schema: raw for raw, schema in style["columns"].items()}
    cap = row["capacity"]
    if src.capacity_basis == "gross":
        cap = cap / NET_RATIO.get(row["fueltype"], 0.9)
    out = {
        inv["name"]: row["name"],
        inv["fueltype"]: style["fuel_terms"][row["fueltype"]],
        inv["country"]: row["country"],
        inv["capacity"]: f"{cap:.1f}",
        inv["project_id"]: row["project_id"],
    }
    if "technology" in inv:
        out[inv["technology"]] = style["tech_terms"].get(row["technology"], "")
    if "set" in inv:
        out[inv["set"]] = style["chp"][0 if row["chp"] else 1]
    if "year" in inv:
        out[inv["year"]] = "" if row["year"] is None else str(row["year"])
    if "status" in inv:
        out[inv["status"]] = row.get("status") or style["status"][0]
    c = row["coords"]
    out[inv["lat"]] = "" if c is None else f"{c[0]:.5f}"
    out[inv["lon"]] = "" if c is None else f"{c[1]:.5f}"
    return out


def _term_map(style_name: str) -> dict:
    style = STYLES[style_name]
    terms = {raw.casefold(): [fuel] for fuel, raw in style["fuel_terms"].items()}
    for tech, raw in style["tech_terms"].items():
        if not raw:
            continue
        for fuel, fraw in style["fuel_terms"].items():
            if tech in FUELS.get(fuel, (0, 0, []))[2]:
                terms[f"{fraw}|{raw}".casefold()] = [fuel, tech]
    return terms


def _noise_rows(rng, src: SourceSpec, k: int) -> list[dict]:
    rows = []
    for j in range(k):
        kind = j % 3
        rows.append({
            "name": f"Noise {j} {rng.choice(SYLLABLES)}",
            "fueltype": ("Wind", "Solar", "NaturalGas")[kind],
            "technology": "Unknown",
            "chp": False,
            "country": "Turkey" if kind == 2 else rng.choice(list(COUNTRIES)),
            "capacity": rng.uniform(2.0, 40.0),
            "year": None,
            "coords": None,
            "project_id": f"{src.id}-N{j:04d}",
        })
    return rows


def make_fixture(spec: FixtureSpec, seed: int, out_dir: Path) -> dict:
    """
    Write a fixture to ``out_dir``; returns a summary with the truth links and paths.

    Output is a pure function of (spec, seed).
    """
    rng = random.Random(seed)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    fleet = _draw_fleet(rng, spec)
    held_by = _coverage(rng, spec)
    caps = sorted(p.capacity for p in fleet)
    median_cap = caps[len(caps) // 2]

    per_source: dict[str, list[dict]] = {s.id: [] for s in spec.sources}
    first_id: dict[tuple[int, str], str] = {}
    for plant, held in zip(fleet, held_by):
        for s in held:
            src = spec.sources[s]
            rows = _source_rows(rng, plant, src, spec.perturbation, median_cap)
            per_source[src.id].extend(rows)
            first_id[(plant.idx, src.id)] = min(r["project_id"] for r in rows)

    truth = set()
    for plant, held in zip(fleet, held_by):
        ids = [spec.sources[s].id for s in held]
        for a in range(len(ids)):
            for b in range(a + 1, len(ids)):
                truth.add(make_link((ids[a], first_id[(plant.idx, ids[a])]),
                                    (ids[b], first_id[(plant.idx, ids[b])])))

    config = {
        "schema_version": 1,
        "scope": sorted(set(spec.countries)),
        "output_dir": "output",
        "sources": [],
        "scores": {},
        "rescale": {"default_factor": 0.9, "pairs_path": "pairs.csv"},
        "statistics_path": "statistics.csv",
        "truth_path": "truth.csv",
    }
    for src in spec.sources:
        rows = per_source[src.id]
        n_noise = int(round(len(rows) * spec.perturbation.noise_rows))
        rows = rows + _noise_rows(rng, src, n_noise)
        rng.shuffle(rows)
        style = STYLES[src.style]
        path = out_dir / f"{src.id}.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, fieldnames=list(style["columns"]), delimiter=style["delimiter"],
                               lineterminator="\n")
            w.writeheader()
            for r in rows:
                w.writerow(_format_row(r, src))
        config["sources"].append({
            "id": src.id,
            "path": path.name,
            "capacity_basis": src.capacity_basis,
            "delimiter": style["delimiter"],
            "columns": style["columns"],
            "terms": _term_map(src.style),
        })
        config["scores"][src.id] = src.score

    _write_pairs(rng, out_dir / "pairs.csv")
    _write_reference(fleet, held_by, out_dir / "reference.csv")
    _write_statistics(fleet, out_dir / "statistics.csv")
    write_truth(truth, out_dir / "truth.csv")
    if spec.n_renewables:
        _write_renewables(rng, spec, out_dir / "renewables.csv")
        config["renewables"] = {
            "id": "RES", "path": "renewables.csv", "capacity_basis": "net",
            "columns": {"name": "name", "fuel": "fueltype", "country": "country", "mw": "capacity",
                        "lat": "lat", "lon": "lon", "uid": "project_id"},
            "terms": {"wind": ["Wind", "Onshore"], "offshore": ["Wind", "Offshore"], "solar": ["Solar", "PV"]},
        }
    with open(out_dir / "config.yaml", "w", encoding="utf-8") as fh:
        yaml.safe_dump(config, fh, sort_keys=True, allow_unicode=True)
    reference = sum(p.capacity for p, h in zip(fleet, held_by) if len(h) >= 2)
    return {
        "truth": truth,
        "config": out_dir / "config.yaml",
        "reference_capacity_mw": reference,
        "n_plants": spec.n_plants,
        "rows": {k: len(v) for k, v in per_source.items()},
    }


def _write_pairs(rng: random.Random, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["fueltype", "technology", "net_mw", "gross_mw"])
        for fuel, (_, median_mw, techs) in FUELS.items():
            for tech in techs:
                for _ in range(12):
                    gross = round(median_mw * math.exp(rng.gauss(0.0, 0.5)), 1) + 1.0
                    ratio = NET_RATIO[fuel] + rng.uniform(-0.01, 0.01)
                    w.writerow([fuel, tech, f"{gross * ratio:.3f}", f"{gross:.1f}"])


def _write_reference(fleet: Sequence[TruePlant], held_by, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["plant", "name", "fueltype", "country", "capacity_mw", "n_sources"])
        for p, h in zip(fleet, held_by):
            if len(h) >= 2:
                w.writerow([p.idx, p.stem, p.fueltype, p.country, f"{p.capacity:.1f}", len(h)])


def _write_statistics(fleet: Sequence[TruePlant], path: Path) -> None:
    labels = {v: k for k, v in STATISTICS_CATEGORIES.items() if v.value in ("Bioenergy", "Waste")}
    totals: dict = {}
    for p in fleet:
        key = (p.country, p.fueltype)
        totals[key] = totals.get(key, 0.0) + p.capacity
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["country", "fueltype", "capacity_mw"])
        for (country, fuel), cap in sorted(totals.items()):
            label = next((k for v, k in labels.items() if v.value == fuel), fuel)
            w.writerow([country, label, f"{cap:.1f}"])


def _write_renewables(rng: random.Random, spec: FixtureSpec, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["name", "fuel", "country", "mw", "lat", "lon", "uid"])
        for j in range(spec.n_renewables):
            country = rng.choice(spec.countries)
            clat, clon, spread = COUNTRIES[country]
            name = f"Windpark {_stem(rng, set())}" if rng.random() < 0.3 else ""
            w.writerow([name, rng.choice(["wind", "solar", "offshore"]), country,
                        f"{rng.uniform(0.5, 60):.2f}",
                        f"{clat + rng.uniform(-spread, spread):.5f}", f"{clon + rng.uniform(-spread, spread):.5f}",
                        f"RES-{j:05d}"])


def load_spec(path: Path) -> FixtureSpec:
    return FixtureSpec.from_dict(yaml.safe_load(Path(path).read_text(encoding="utf-8")))
