"""Writes the bundled 73-bus case and the larger timing cases from data/raw/.

data/rts73/   rts73.case.json, rts73.risk.json and rts73.risk_golden.json
data/perf/    case5, case9, case14 as <name>.case.json + <name>.risk.json

Bundled case conventions:
  * RTS-GMLC zones (bus column 11) become areas; the region is the leading digit.
  * In-service generators with Pmax > 0; generator id = row number in mpc.gen.
  * Line ids = row number in mpc.branch. Transformers and lines between buses of
    different base kV get length 0.
  * Line length from reactance: x / 0.0024 pu per km at 138 kV, x / 0.00052 at 230 kV.
  * Demand is the bus Pd column (8550 MW in total), every load weight 1.
  * Synthetic risk map: region 3 zones carry rho 2 or 4, zone 24 carries 1,
    everything else 0.

The golden file recomputes every component risk with the weighted-sum rule
directly from the raw rows, independent of the case/risk documents.
"""
import json
import pathlib
import re

ROOT = pathlib.Path(__file__).resolve().parents[2]
RAW = ROOT / "data" / "raw"

KM_PER_SEGMENT = 10.0
RTS_RHO = {24: 1.0, 31: 4.0, 32: 2.0, 33: 2.0, 34: 2.0, 35: 2.0, 36: 4.0, 37: 2.0}


def matrix(text, name):
    body = re.search(r"mpc\." + name + r"\s*=\s*\[(.*?)\];", text, re.S).group(1)
    rows = []
    for row in body.split(";"):
        row = row.split("%")[0].strip()
        if row:
            rows.append([float(v) for v in row.split()])
    return rows


def scalar(text, name):
    return float(re.search(r"mpc\." + name + r"\s*=\s*([0-9.eE+-]+)\s*;", text).group(1))


def line_length_km(x, kv_from, kv_to, tap):
    if tap != 0.0 or kv_from != kv_to:
        return 0.0
    return x / (0.0024 if kv_from < 200.0 else 0.00052)


def kappa(kv):
    return 1.0 if kv >= 230.0 else 2.0


def convert(name, text, area_of, default_kv=230.0):
    base = scalar(text, "baseMVA")
    bus, gen, branch = matrix(text, "bus"), matrix(text, "gen"), matrix(text, "branch")
    kv = {int(b[0]): (b[9] if b[9] > 0 else default_kv) for b in bus}
    # rate A = 0 means unlimited; total demand bounds any useful transfer.
    unlimited = sum(b[2] for b in bus if b[2] > 0)
    areas = sorted({area_of(b) for b in bus})
    case = {
        "format_version": 1,
        "name": name,
        "base_mva": base,
        "areas": [{"id": a, "name": f"zone {a}"} for a in areas],
        "buses": [{"id": int(b[0]), "name": f"bus {int(b[0])}", "area_id": area_of(b)} for b in bus],
        "lines": [],
        "generators": [],
        "loads": [],
    }
    for row, br in enumerate(branch, start=1):
        if br[10] <= 0:
            continue
        f, t = int(br[0]), int(br[1])
        case["lines"].append({
            "id": row, "from_bus": f, "to_bus": t, "susceptance_pu": 1.0 / br[3],
            "thermal_limit_mw": br[5] if br[5] > 0 else unlimited, "voltage_kv": min(kv[f], kv[t]),
            "length_km": line_length_km(br[3], kv[f], kv[t], br[8]),
        })
    for row, g in enumerate(gen, start=1):
        if g[7] <= 0 or g[8] <= 0:
            continue
        case["generators"].append({"id": row, "bus": int(g[0]), "p_min_mw": max(g[9], 0.0), "p_max_mw": g[8]})
    load_id = 0
    for b in bus:
        if b[2] > 0:
            load_id += 1
            case["loads"].append({"id": load_id, "bus": int(b[0]), "demand_mw": b[2], "weight": 1.0})
    return case


def risk_document(case, rho):
    return {
        "format_version": 1,
        "km_per_segment": KM_PER_SEGMENT,
        "use_defaults": True,
        "area_risks": [{"area_id": a["id"], "rho": rho.get(a["id"], 0.0)} for a in case["areas"]],
        "kappa_overrides": [],
        "line_geography": [],
    }


def golden(case, rho):
    area = {b["id"]: b["area_id"] for b in case["buses"]}
    out = {"bus": {}, "line": {}, "generator": {}, "load": {}}
    totals = {a["id"]: 0.0 for a in case["areas"]}
    for b in case["buses"]:
        r = rho.get(area[b["id"]], 0.0)
        out["bus"][b["id"]] = r
        totals[area[b["id"]]] += r
    for g in case["generators"]:
        r = rho.get(area[g["bus"]], 0.0)
        out["generator"][g["id"]] = r
        totals[area[g["bus"]]] += r
    for d in case["loads"]:
        r = rho.get(area[d["bus"]], 0.0)
        out["load"][d["id"]] = r
        totals[area[d["bus"]]] += r
    for l in case["lines"]:
        half = l["length_km"] / 2.0 / KM_PER_SEGMENT
        k = kappa(l["voltage_kv"])
        r_from = k * half * rho.get(area[l["from_bus"]], 0.0)
        r_to = k * half * rho.get(area[l["to_bus"]], 0.0)
        out["line"][l["id"]] = r_from + r_to
        totals[area[l["from_bus"]]] += r_from
        totals[area[l["to_bus"]]] += r_to
    standard = sum(sum(v.values()) for v in out.values())
    triggered = sorted(a for a, t in totals.items() if t >= 30.0)
    return {
        "components": {k: [{"id": i, "risk": v[i]} for i in sorted(v)] for k, v in out.items()},
        "area_totals": [{"area_id": a, "total": totals[a]} for a in sorted(totals)],
        "standard_operation_risk": standard,
        "area_threshold_30_triggered": triggered,
    }


def write(path, doc):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=1) + "\n")


def main():
    text = (RAW / "case_RTS_GMLC.m").read_text()
    case = convert("rts73", text, lambda b: int(b[10]))
    out = ROOT / "data" / "rts73"
    write(out / "rts73.case.json", case)
    write(out / "rts73.risk.json", risk_document(case, RTS_RHO))
    write(out / "rts73.risk_golden.json", golden(case, RTS_RHO))

    # Timing cases: three areas by bus position with rho 1, 2, 4.
    for name in ["case5", "case9", "case14"]:
        text = (RAW / f"{name}.m").read_text()
        bus_ids = [int(b[0]) for b in matrix(text, "bus")]
        third = {bid: 1 + (3 * i) // len(bus_ids) for i, bid in enumerate(bus_ids)}
        case = convert(name, text, lambda b: third[int(b[0])])
        write(ROOT / "data" / "perf" / f"{name}.case.json", case)
        write(ROOT / "data" / "perf" / f"{name}.risk.json", risk_document(case, {1: 1.0, 2: 2.0, 3: 4.0}))


if __name__ == "__main__":
    main()
