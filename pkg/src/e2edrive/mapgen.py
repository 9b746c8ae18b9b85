"""Built-in maps and routes.

`town_a` is the main fixture: an east-west arterial crossing two
intersections. The first is a full signalled four-way, the second has
outbound-only cross arms so no conflicting traffic crosses there.
Roads are two-way with 3.5 m lanes; connectors are arcs wide enough for
the bicycle model's minimum turn radius.
"""

from __future__ import annotations

import math

from .geometry import arc_points
from .simworld import WorldMap, load_map

LANE_W = 3.5
HALF = LANE_W / 2.0  # 1.75
BOX = 8.0  # intersection half-size: entries stop this far from the center

MAIN_LIMIT = 30.0 / 3.6  # 30 km/h arterial
SIDE_LIMIT = 25.0 / 3.6  # 25 km/h cross streets and connectors


def _lane(lid, points, successors=(), turn=None, width=LANE_W):
    return {
        "id": lid,
        "points": [[float(x), float(y)] for x, y in points],
        "successors": list(successors),
        "width": width,
        **({"turn": turn} if turn else {}),
    }


def _right_arc(entry_end, exit_start, center, turn="RIGHT"):
    # quarter arc, clockwise
    a0 = math.atan2(entry_end[1] - center[1], entry_end[0] - center[0])
    a1 = math.atan2(exit_start[1] - center[1], exit_start[0] - center[0])
    # pick the clockwise sweep
    while a1 > a0:
        a1 -= 2 * math.pi
    r = math.hypot(entry_end[0] - center[0], entry_end[1] - center[1])
    return arc_points(center[0], center[1], r, a0, a1)


def _left_arc(entry_end, exit_start, center):
    a0 = math.atan2(entry_end[1] - center[1], entry_end[0] - center[0])
    a1 = math.atan2(exit_start[1] - center[1], exit_start[0] - center[0])
    while a1 < a0:
        a1 += 2 * math.pi
    r = math.hypot(entry_end[0] - center[0], entry_end[1] - center[1])
    return arc_points(center[0], center[1], r, a0, a1)


def _four_way(prefix, cx, cy, entries):
    """Connector lanes and the intersection record for a crossing at (cx, cy).

    entries: dict direction -> (entry_lane_id, {target direction -> exit_lane_id}).
    Directions are 'E' (heading east into the box), 'W', 'N' (heading north), 'S'.
    """
    # entry end point and exit start point per direction, relative to center
    end_pt = {
        "E": (cx - BOX, cy - HALF),
        "W": (cx + BOX, cy + HALF),
        "N": (cx + HALF, cy - BOX),
        "S": (cx - HALF, cy + BOX),
    }
    start_pt = {
        "E": (cx + BOX, cy - HALF),
        "W": (cx - BOX, cy + HALF),
        "N": (cx + HALF, cy + BOX),
        "S": (cx - HALF, cy - BOX),
    }
    right_of = {"E": "S", "S": "W", "W": "N", "N": "E"}
    left_of = {v: k for k, v in right_of.items()}
    corner = {
        ("E", "S"): (cx - BOX, cy - BOX),
        ("S", "W"): (cx - BOX, cy + BOX),
        ("W", "N"): (cx + BOX, cy + BOX),
        ("N", "E"): (cx + BOX, cy - BOX),
        ("E", "N"): (cx - BOX, cy + BOX),
        ("N", "W"): (cx - BOX, cy - BOX),
        ("W", "S"): (cx + BOX, cy - BOX),
        ("S", "E"): (cx + BOX, cy + BOX),
    }
    lanes = []
    inter_entries = {}
    for d, (entry_id, exit_map) in entries.items():
        labeled = {}
        if d in exit_map:
            conn = f"{prefix}_{d}_S"
            lanes.append(_lane(conn, [end_pt[d], start_pt[d]], [exit_map[d]], turn="STRAIGHT"))
            labeled["STRAIGHT"] = conn
        rd = right_of[d]
        if rd in exit_map:
            conn = f"{prefix}_{d}_R"
            pts = _right_arc(end_pt[d], start_pt[rd], corner[(d, rd)])
            lanes.append(_lane(conn, pts, [exit_map[rd]], turn="RIGHT"))
            labeled["RIGHT"] = conn
        ld = left_of[d]
        if ld in exit_map:
            conn = f"{prefix}_{d}_L"
            pts = _left_arc(end_pt[d], start_pt[ld], corner[(d, ld)])
            lanes.append(_lane(conn, pts, [exit_map[ld]], turn="LEFT"))
            labeled["LEFT"] = conn
        inter_entries[entry_id] = labeled
    return lanes, {"id": prefix, "entries": inter_entries}


def town_a_doc() -> dict:
    """Two-intersection town: signalled 4-way at x=0, open 4-way at x=150."""
    lanes = [
        # east-west arterial, eastbound at y=-1.75, westbound at y=+1.75
        _lane("E1", [(-100, -HALF), (-BOX, -HALF)]),
        _lane("E2", [(BOX, -HALF), (150 - BOX, -HALF)]),
        _lane("E3", [(150 + BOX, -HALF), (250, -HALF)]),
        _lane("W3", [(250, HALF), (150 + BOX, HALF)]),
        _lane("W2", [(150 - BOX, HALF), (BOX, HALF)]),
        _lane("W1", [(-BOX, HALF), (-100, HALF)]),
        # cross street at intersection 1 (x=0), two-way
        _lane("Sin1", [(-HALF, 80), (-HALF, BOX)]),
        _lane("Sout1", [(-HALF, -BOX), (-HALF, -80)]),
        _lane("Nin1", [(HALF, -80), (HALF, -BOX)]),
        _lane("Nout1", [(HALF, BOX), (HALF, 80)]),
        # cross arms at intersection 2 (x=150), outbound only
        _lane("Nout2", [(150 + HALF, BOX), (150 + HALF, 80)]),
        _lane("Sout2", [(150 - HALF, -BOX), (150 - HALF, -80)]),
    ]

    conn1, inter1 = _four_way(
        "I1", 0.0, 0.0,
        {
            "E": ("E1", {"E": "E2", "N": "Nout1", "S": "Sout1"}),
            "W": ("W2", {"W": "W1", "N": "Nout1", "S": "Sout1"}),
            "S": ("Sin1", {"S": "Sout1", "E": "E2", "W": "W1"}),
            "N": ("Nin1", {"N": "Nout1", "E": "E2", "W": "W1"}),
        },
    )
    conn2, inter2 = _four_way(
        "I2", 150.0, 0.0,
        {
            "E": ("E2", {"E": "E3", "N": "Nout2", "S": "Sout2"}),
            "W": ("W3", {"W": "W2", "N": "Nout2", "S": "Sout2"}),
        },
    )
    lanes += conn1 + conn2

    main_ids = ["E1", "E2", "E3", "W1", "W2", "W3"]
    side_ids = [ln["id"] for ln in lanes if ln["id"] not in main_ids]

    def stop_line(lane_pts, s_from_end=1.0):
        # perpendicular segment across the lane just before the entry end
        (x0, y0), (x1, y1) = lane_pts[-2], lane_pts[-1]
        L = math.hypot(x1 - x0, y1 - y0)
        ux, uy = (x1 - x0) / L, (y1 - y0) / L
        px, py = x1 - ux * s_from_end, y1 - uy * s_from_end
        nx, ny = -uy, ux
        return [[px + nx * HALF, py + ny * HALF], [px - nx * HALF, py - ny * HALF]]

    lights = [
        {"id": "L_E1", "stop_line": stop_line([(-100, -HALF), (-BOX, -HALF)]),
         "green_s": 10.0, "yellow_s": 2.0, "red_s": 12.0, "offset": 0.0, "governed_lanes": ["E1"]},
        {"id": "L_W2", "stop_line": stop_line([(150 - BOX, HALF), (BOX, HALF)]),
         "green_s": 10.0, "yellow_s": 2.0, "red_s": 12.0, "offset": 0.0, "governed_lanes": ["W2"]},
        {"id": "L_S1", "stop_line": stop_line([(-HALF, 80), (-HALF, BOX)]),
         "green_s": 10.0, "yellow_s": 2.0, "red_s": 12.0, "offset": 12.0, "governed_lanes": ["Sin1"]},
        {"id": "L_N1", "stop_line": stop_line([(HALF, -80), (HALF, -BOX)]),
         "green_s": 10.0, "yellow_s": 2.0, "red_s": 12.0, "offset": 12.0, "governed_lanes": ["Nin1"]},
    ]

    spawn_points = [
        {"lane": "E1", "s": 0.0}, {"lane": "E1", "s": 40.0},
        {"lane": "E2", "s": 10.0}, {"lane": "E2", "s": 70.0},
        {"lane": "E3", "s": 5.0},
        {"lane": "W3", "s": 0.0}, {"lane": "W3", "s": 50.0},
        {"lane": "W2", "s": 20.0}, {"lane": "W1", "s": 5.0},
        {"lane": "Sin1", "s": 0.0}, {"lane": "Sin1", "s": 35.0},
        {"lane": "Nin1", "s": 0.0}, {"lane": "Nin1", "s": 35.0},
    ]

    return {
        "name": "town-a",
        "lanes": lanes,
        "intersections": [inter1, inter2],
        "lights": lights,
        "speed_zones": [
            {"id": "arterial", "lanes": main_ids, "limit": MAIN_LIMIT},
            {"id": "side", "lanes": side_ids, "limit": SIDE_LIMIT},
        ],
        "spawn_points": spawn_points,
    }


def straight_doc(length: float = 250.0, limit: float = MAIN_LIMIT, light_at: float | None = None) -> dict:
    """Single one-way straight lane, optionally with one mid-road light."""
    doc = {
        "name": "straight",
        "lanes": [_lane("A", [(0, 0), (length, 0)])],
        "intersections": [],
        "lights": [],
        "speed_zones": [{"id": "all", "lanes": ["A"], "limit": limit}],
        "spawn_points": [{"lane": "A", "s": 0.0}],
    }
    if light_at is not None:
        doc["lights"] = [{
            "id": "L0",
            "stop_line": [[light_at, HALF], [light_at, -HALF]],
            "green_s": 10.0, "yellow_s": 2.0, "red_s": 15.0, "offset": 0.0,
            "governed_lanes": ["A"],
        }]
    return doc


def two_way_doc(length: float = 120.0, limit: float = MAIN_LIMIT) -> dict:
    """Straight two-way road: eastbound at y=-1.75, westbound at y=+1.75."""
    return {
        "name": "two-way",
        "lanes": [
            _lane("E", [(0, -HALF), (length, -HALF)]),
            _lane("W", [(length, HALF), (0, HALF)]),
        ],
        "intersections": [],
        "lights": [],
        "speed_zones": [{"id": "all", "lanes": ["E", "W"], "limit": limit}],
        "spawn_points": [{"lane": "E", "s": 0.0}, {"lane": "W", "s": 0.0}],
    }


BUILTIN_MAPS = {
    "town-a": town_a_doc,
    "straight": straight_doc,
    "two-way": two_way_doc,
}

# route name -> (map name, lane chain); HLC annotations derive from connector turns
BUILTIN_ROUTES = {
    "town-a:straight": ("town-a", ["E1", "I1_E_S", "E2"]),
    "town-a:full": ("town-a", ["E1", "I1_E_S", "E2", "I2_E_R", "Sout2"]),
    "town-a:left1": ("town-a", ["E1", "I1_E_L", "Nout1"]),
    "town-a:right1": ("town-a", ["E1", "I1_E_R", "Sout1"]),
    "town-a:west": ("town-a", ["W3", "I2_W_S", "W2", "I1_W_S", "W1"]),
    "town-a:west-right": ("town-a", ["W3", "I2_W_R", "Nout2"]),
    "town-a:west-left": ("town-a", ["W3", "I2_W_L", "Sout2"]),
    "town-a:south": ("town-a", ["Sin1", "I1_S_S", "Sout1"]),
    "town-a:south-left": ("town-a", ["Sin1", "I1_S_L", "E2", "I2_E_S", "E3"]),
    "town-a:north-right": ("town-a", ["Nin1", "I1_N_R", "E2", "I2_E_R", "Sout2"]),
    "town-a:east-left2": ("town-a", ["E2", "I2_E_L", "Nout2"]),
    "straight:full": ("straight", ["A"]),
}


def builtin_map(name: str) -> WorldMap:
    if name not in BUILTIN_MAPS:
        raise KeyError(f"unknown builtin map '{name}' (have: {sorted(BUILTIN_MAPS)})")
    return load_map(BUILTIN_MAPS[name]())


def resolve_map(name_or_path: str) -> WorldMap:
    if name_or_path in BUILTIN_MAPS:
        return builtin_map(name_or_path)
    return load_map(name_or_path)
