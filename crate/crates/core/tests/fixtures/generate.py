"""Writes the grid and config fixtures used by the integration tests.

Run from this directory: python3 generate.py
The golden mesh is produced separately by the `golden_mesh` test with
POLAR_ROUTE_BLESS=1.
"""

import json
import math
import os


def axis(lo, hi, step):
    n = round((hi - lo) / step)
    return [round(lo + k * step, 6) for k in range(n + 1)]


def fmt(v):
    if v is None:
        return "-9999"
    r = round(v, 3)
    return str(int(r)) if r == int(r) else str(r)


def block(name, units, lons, lats, slices, times=()):
    out = [f"variable {name}", f"units {units}", "missing -9999"]
    out.append("lons " + " ".join(fmt(x) for x in lons))
    out.append("lats " + " ".join(fmt(x) for x in lats))
    if times:
        out.append("times " + " ".join(times))
    out.append("values")
    for s in slices:
        for j in range(len(lats)):
            out.append(" ".join(fmt(s(lons[i], lats[j])) for i in range(len(lons))))
    out.append("end")
    return "\n".join(out) + "\n"


def write(path, text):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w") as f:
        f.write(text)


def clamp(v, lo=0.0, hi=100.0):
    return max(lo, min(hi, v))


def small():
    lons, lats = axis(0, 4, 0.125), axis(-70, -68, 0.125)

    def sic(lon, lat):
        # pack ice in the south-east corner, open water elsewhere
        if lon >= 2.5 and lat < -69.25:
            return 95.0
        return clamp(10.0 * (lon - 1.0)) if lon > 1.0 else 0.0

    text = "# small fixture: one ice corner and a gentle gradient\n"
    text += block("sic", "percent", lons, lats, [sic])
    text += block("depth", "m", lons, lats, [lambda lon, lat: -2000.0])
    write("small/grid.txt", text)
    cfg = {
        "grid_files": ["grid.txt"],
        "region": {"lon_min": 0, "lon_max": 4, "lat_min": -70, "lat_max": -68},
        "initial_cell_size": 1.0,
        "waypoints": [
            {"name": "west", "lat": -69.6, "lon": 0.3},
            {"name": "north", "lat": -68.2, "lon": 2.1},
            {"name": "east", "lat": -68.7, "lon": 3.8},
            {"name": "ice", "lat": -69.8, "lon": 3.5},
        ],
        "pairs": [["west", "east"], ["east", "west"], ["west", "north"]],
    }
    write("small/config.json", json.dumps(cfg, indent=2) + "\n")


def wall():
    lons, lats = axis(0, 4, 0.125), axis(-70, -68, 0.125)

    def depth(lon, lat):
        return 50.0 if 2.0 <= lon < 3.0 else -2000.0

    text = "# land wall spanning the whole region\n"
    text += block("sic", "percent", lons, lats, [lambda lon, lat: 0.0])
    text += block("depth", "m", lons, lats, [depth])
    write("wall/grid.txt", text)
    cfg = {
        "grid_files": ["grid.txt"],
        "region": {"lon_min": 0, "lon_max": 4, "lat_min": -70, "lat_max": -68},
        "initial_cell_size": 1.0,
        "waypoints": [
            {"name": "west", "lat": -69.0, "lon": 0.5},
            {"name": "east", "lat": -69.0, "lon": 3.5},
        ],
        "pairs": [["west", "east"]],
    }
    write("wall/config.json", json.dumps(cfg, indent=2) + "\n")


def suite():
    lons, lats = axis(-60, -40, 0.25), axis(-70, -60, 0.25)
    times = ["2021-01-01", "2021-01-02", "2021-01-03"]

    def sic_at(shift):
        def sic(lon, lat):
            # an elliptical ice tongue drifting east, a southern ramp, a noisy fringe
            e = ((lon - (-50.0 + shift)) / 3.0) ** 2 + ((lat + 66.0) / 1.5) ** 2
            if e <= 1.0:
                return 95.0
            if e <= 1.6:
                return 75.0
            ramp = clamp(20.0 * (-67.5 - lat)) if lat < -67.5 else 0.0
            ripple = 8.0 + 8.0 * math.sin(1.7 * lon) * math.cos(2.3 * lat)
            return clamp(ramp + ripple)

        return sic

    def depth(lon, lat):
        if (lon + 44.0) ** 2 + ((lat + 63.0) * 2.0) ** 2 <= 0.8**2:
            return 10.0
        return -3000.0

    def cu(lon, lat):
        return -0.3 * (lat + 65.0) / 5.0

    def cv(lon, lat):
        return 0.3 * (lon + 50.0) / 10.0

    text = "# suite fixture: drifting ice tongue, southern ramp, an island, a gyre\n"
    text += block("sic", "percent", lons, lats, [sic_at(s) for s in (0.0, 0.25, 0.5)], times)
    text += block("depth", "m", lons, lats, [depth])
    text += block("current_u", "m/s", lons, lats, [cu])
    text += block("current_v", "m/s", lons, lats, [cv])
    write("suite/grid.txt", text)

    rl, rt = axis(-60, -40, 0.1), axis(-70, -60, 0.1)
    raw = "# unaveraged SIC on a finer grid for route validation\n"
    raw += block("sic", "percent", rl, rt, [sic_at(s) for s in (0.0, 0.25, 0.5)], times)
    write("suite/raw.txt", raw)

    names = {
        "alpha": (-58.6, -61.2),
        "bravo": (-41.4, -61.1),
        "charlie": (-58.1, -64.4),
        "delta": (-41.7, -65.3),
        "echo": (-52.3, -61.6),
        "foxtrot": (-46.2, -62.0),
        "golf": (-54.8, -68.2),
        "hotel": (-45.3, -68.4),
    }
    waypoints = [{"name": n, "lat": lat, "lon": lon} for n, (lon, lat) in names.items()]
    keys = list(names)
    pairs = []
    for i, a in enumerate(keys):
        for b in keys[i + 1 :]:
            pairs.append([a, b])
    pairs = pairs[:20]
    cfg = {
        "grid_files": ["grid.txt"],
        "raw_grid_files": ["raw.txt"],
        "region": {"lon_min": -60, "lon_max": -40, "lat_min": -70, "lat_max": -60},
        "time_window": {"start": "2021-01-01", "end": "2021-01-03"},
        "initial_cell_size": 2.5,
        "waypoints": waypoints,
        "pairs": pairs,
    }
    write("suite/config.json", json.dumps(cfg, indent=2) + "\n")


if __name__ == "__main__":
    small()
    wall()
    suite()
