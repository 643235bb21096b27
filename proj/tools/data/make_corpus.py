"""Writes the small test networks under data/corpus/.

Each network gets <name>.case.json and <name>.risk.json. Binary count
(buses + generators + lines) stays at or below 12 for the enumeration checks.
"""
import json
import pathlib

OUT = pathlib.Path(__file__).resolve().parents[2] / "data" / "corpus"


def case(name, areas, buses, lines, gens, loads, base=100.0):
    return {
        "format_version": 1,
        "name": name,
        "base_mva": base,
        "areas": [{"id": a, "name": f"area {a}"} for a in areas],
        "buses": [{"id": b, "name": f"bus {b}", "area_id": a} for b, a in buses],
        "lines": [
            {"id": i + 1, "from_bus": f, "to_bus": t, "susceptance_pu": x, "thermal_limit_mw": cap,
             "voltage_kv": kv, "length_km": km}
            for i, (f, t, x, cap, kv, km) in enumerate(lines)
        ],
        "generators": [{"id": i + 1, "bus": b, "p_min_mw": lo, "p_max_mw": hi} for i, (b, lo, hi) in enumerate(gens)],
        "loads": [{"id": i + 1, "bus": b, "demand_mw": d, "weight": w} for i, (b, d, w) in enumerate(loads)],
    }


def risk(rho, geography=None, overrides=None):
    return {
        "format_version": 1,
        "km_per_segment": 10.0,
        "use_defaults": True,
        "area_risks": [{"area_id": a, "rho": r} for a, r in sorted(rho.items())],
        "kappa_overrides": overrides or [],
        "line_geography": [
            {"line_id": l, "segments": [{"area_id": a, "km": km} for a, km in segs]}
            for l, segs in sorted((geography or {}).items())
        ],
    }


NETWORKS = {}

# Two buses, one line. The line alone crosses a risky corridor (area 3).
NETWORKS["two_bus"] = (
    case("two_bus", [1, 2], [(1, 1), (2, 2)],
         [(1, 2, 10.0, 100.0, 230.0, 10.0)],
         [(1, 0.0, 100.0)],
         [(2, 50.0, 1.0)]),
    risk({1: 0.0, 2: 0.0, 3: 1.0}, geography={1: [(3, 10.0)]}),
)

# Unit risk on every component: standard operation totals 9.
NETWORKS["triangle"] = (
    case("triangle", [1], [(1, 1), (2, 1), (3, 1)],
         [(1, 2, 10.0, 100.0, 230.0, 10.0), (2, 3, 10.0, 100.0, 230.0, 10.0), (1, 3, 10.0, 100.0, 230.0, 10.0)],
         [(1, 0.0, 150.0)],
         [(2, 60.0, 1.0), (3, 40.0, 1.0)]),
    risk({1: 1.0}),
)

NETWORKS["path5"] = (
    case("path5", [1, 2], [(1, 1), (2, 1), (3, 1), (4, 2), (5, 2)],
         [(1, 2, 8.0, 120.0, 230.0, 20.0), (2, 3, 6.0, 120.0, 138.0, 15.0), (3, 4, 8.0, 80.0, 230.0, 30.0),
          (4, 5, 5.0, 80.0, 138.0, 10.0)],
         [(1, 0.0, 150.0), (5, 10.0, 60.0)],
         [(2, 40.0, 1.0), (3, 50.0, 1.0), (4, 45.0, 2.0)]),
    risk({1: 1.0, 2: 4.0}),
)

NETWORKS["star4"] = (
    case("star4", [1, 2, 3], [(1, 1), (2, 1), (3, 2), (4, 3)],
         [(1, 2, 10.0, 90.0, 230.0, 10.0), (1, 3, 10.0, 90.0, 230.0, 25.0), (1, 4, 12.0, 90.0, 138.0, 12.0)],
         [(2, 0.0, 120.0), (4, 0.0, 50.0)],
         [(1, 30.0, 1.0), (3, 70.0, 1.0), (4, 20.0, 1.0)]),
    risk({1: 1.0, 2: 2.0, 3: 4.0}),
)

NETWORKS["square4"] = (
    case("square4", [1, 2], [(1, 1), (2, 1), (3, 2), (4, 2)],
         [(1, 2, 10.0, 80.0, 230.0, 20.0), (2, 3, 10.0, 80.0, 230.0, 20.0), (3, 4, 10.0, 80.0, 230.0, 20.0),
          (4, 1, 10.0, 80.0, 230.0, 20.0)],
         [(1, 0.0, 100.0), (3, 0.0, 60.0)],
         [(2, 70.0, 1.0), (4, 60.0, 1.0)]),
    risk({1: 1.0, 2: 2.0}),
)

NETWORKS["diamond"] = (
    case("diamond", [1, 2], [(1, 1), (2, 1), (3, 2), (4, 2)],
         [(1, 2, 10.0, 70.0, 230.0, 10.0), (1, 3, 8.0, 70.0, 230.0, 30.0), (2, 4, 8.0, 70.0, 138.0, 20.0),
          (3, 4, 10.0, 70.0, 230.0, 10.0), (2, 3, 5.0, 50.0, 138.0, 15.0)],
         [(1, 0.0, 120.0), (4, 0.0, 40.0)],
         [(2, 30.0, 1.0), (3, 50.0, 1.0), (4, 60.0, 1.5)]),
    risk({1: 1.0, 2: 2.0}),
)

NETWORKS["two_islands"] = (
    case("two_islands", [1, 2], [(1, 1), (2, 1), (3, 2), (4, 2)],
         [(1, 2, 10.0, 100.0, 230.0, 20.0), (3, 4, 10.0, 100.0, 138.0, 20.0)],
         [(1, 0.0, 80.0), (3, 0.0, 80.0)],
         [(2, 50.0, 1.0), (4, 40.0, 1.0)]),
    risk({1: 1.0, 2: 4.0}),
)

# Demand above either line's limit: both parallel lines are needed for full service.
NETWORKS["parallel_lines"] = (
    case("parallel_lines", [1, 2], [(1, 1), (2, 2)],
         [(1, 2, 10.0, 100.0, 230.0, 20.0), (1, 2, 5.0, 60.0, 138.0, 20.0)],
         [(1, 0.0, 200.0)],
         [(2, 150.0, 1.0)]),
    risk({1: 1.0, 2: 2.0}),
)

NETWORKS["bowtie"] = (
    case("bowtie", [1, 2, 3], [(1, 1), (2, 1), (3, 2), (4, 3), (5, 3)],
         [(1, 2, 10.0, 80.0, 230.0, 10.0), (2, 3, 10.0, 80.0, 230.0, 10.0), (1, 3, 10.0, 80.0, 230.0, 10.0),
          (3, 4, 10.0, 80.0, 230.0, 20.0), (4, 5, 10.0, 80.0, 138.0, 10.0), (3, 5, 10.0, 80.0, 230.0, 20.0)],
         [(3, 0.0, 200.0)],
         [(1, 40.0, 1.0), (2, 30.0, 1.0), (4, 50.0, 1.0), (5, 30.0, 1.0)]),
    risk({1: 1.0, 2: 1.0, 3: 4.0}),
)

NETWORKS["ring5"] = (
    case("ring5", [1, 2], [(1, 1), (2, 1), (3, 1), (4, 2), (5, 2)],
         [(1, 2, 10.0, 90.0, 230.0, 15.0), (2, 3, 8.0, 90.0, 230.0, 15.0), (3, 4, 10.0, 60.0, 138.0, 15.0),
          (4, 5, 6.0, 90.0, 230.0, 15.0), (5, 1, 10.0, 60.0, 138.0, 15.0)],
         [(1, 0.0, 120.0), (4, 20.0, 80.0)],
         [(2, 40.0, 1.0), (3, 45.0, 1.0), (5, 55.0, 1.0)]),
    risk({1: 2.0, 2: 1.0}),
)

# Tight limits and a must-run minimum on the second unit.
NETWORKS["congested_triangle"] = (
    case("congested_triangle", [1, 2], [(1, 1), (2, 1), (3, 2)],
         [(1, 2, 10.0, 40.0, 230.0, 10.0), (2, 3, 10.0, 30.0, 230.0, 10.0), (1, 3, 20.0, 50.0, 138.0, 20.0)],
         [(1, 0.0, 100.0), (3, 30.0, 60.0)],
         [(2, 70.0, 1.0), (3, 50.0, 1.0)]),
    risk({1: 1.0, 2: 3.0}),
)

# A generator-only spur hangs off the loaded bus.
NETWORKS["gen_spur"] = (
    case("gen_spur", [1, 2], [(1, 1), (2, 1), (3, 2)],
         [(1, 2, 10.0, 100.0, 230.0, 10.0), (2, 3, 10.0, 100.0, 138.0, 30.0)],
         [(1, 0.0, 80.0), (2, 0.0, 40.0), (3, 0.0, 90.0)],
         [(1, 60.0, 1.0)]),
    risk({1: 1.0, 2: 4.0}),
)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, (c, r) in NETWORKS.items():
        (OUT / f"{name}.case.json").write_text(json.dumps(c, indent=2) + "\n")
        (OUT / f"{name}.risk.json").write_text(json.dumps(r, indent=2) + "\n")


if __name__ == "__main__":
    main()
