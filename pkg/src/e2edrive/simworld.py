"""Deterministic 2D urban driving world.

A world is a lane graph (with labeled intersection connectors), traffic
lights on fixed schedules, speed zones, and a set of vehicles advanced
by a kinematic bicycle model. All mutation flows through `World.step`;
identical (map, seed, control stream) produces bit-identical states.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .geometry import Polyline, normalize_angle, rect_corners, rect_segment_intersects, rects_overlap

DT = 0.05  # 20 Hz simulation step

OFF_ROAD_MARGIN = 1.0  # meters beyond the lane edge before a vehicle counts as off-road
LIGHT_LOOKAHEAD = 50.0
CHAIN_HORIZON = 300.0


class MapError(Exception):
    """Base class for map document problems."""


class MapSchemaError(MapError):
    pass


class MapConnectivityError(MapError):
    pass


class SimulationError(Exception):
    pass


class HLC(Enum):
    """High-level navigational command. One-hot order is fixed as listed."""

    FOLLOW_LANE = 0
    LEFT = 1
    RIGHT = 2
    STRAIGHT = 3

    def one_hot(self) -> list[float]:
        v = [0.0, 0.0, 0.0, 0.0]
        v[self.value] = 1.0
        return v


TURN_LABELS = ("LEFT", "RIGHT", "STRAIGHT")


class LightState(Enum):
    RED = "RED"
    YELLOW = "YELLOW"
    GREEN = "GREEN"


@dataclass(frozen=True)
class ControlSignal:
    """Steering / throttle / brake triple. steer > 0 steers right."""

    steer: float
    throttle: float
    brake: float

    def clamped(self) -> "ControlSignal":
        return ControlSignal(
            steer=min(max(self.steer, -1.0), 1.0),
            throttle=min(max(self.throttle, 0.0), 1.0),
            brake=min(max(self.brake, 0.0), 1.0),
        )

    def validate(self) -> None:
        if not all(math.isfinite(v) for v in (self.steer, self.throttle, self.brake)):
            raise SimulationError(f"non-finite control values: {self}")
        if not (-1.0 <= self.steer <= 1.0 and 0.0 <= self.throttle <= 1.0 and 0.0 <= self.brake <= 1.0):
            raise SimulationError(f"control out of range: {self}")


CONTROL_ZERO = ControlSignal(0.0, 0.0, 0.0)


@dataclass
class PhysicsParams:
    max_wheel_angle: float = math.radians(35.0)
    max_accel: float = 3.0  # m/s^2 at full throttle
    max_brake: float = 8.0  # m/s^2 at full brake
    drag_coeff: float = 0.003  # quadratic, m^-1
    wheelbase: float = 2.7

    @classmethod
    def from_doc(cls, doc: dict) -> "PhysicsParams":
        p = cls()
        for key in ("max_wheel_angle", "max_accel", "max_brake", "drag_coeff", "wheelbase"):
            if key in doc:
                setattr(p, key, float(doc[key]))
        return p


@dataclass
class LaneSegment:
    lane_id: str
    centerline: Polyline
    successors: list[str]
    width: float = 3.5
    turn: str | None = None  # LEFT/RIGHT/STRAIGHT for intersection connectors

    @property
    def length(self) -> float:
        return self.centerline.length

    @property
    def is_connector(self) -> bool:
        return self.turn is not None


@dataclass
class Intersection:
    iid: str
    entries: dict[str, dict[str, str]]  # entry lane id -> {turn label -> connector lane id}


@dataclass
class TrafficLight:
    lid: str
    stop_line: tuple[tuple[float, float], tuple[float, float]]
    green_s: float
    yellow_s: float
    red_s: float
    offset: float
    governed_lanes: list[str]

    @property
    def cycle(self) -> float:
        return self.green_s + self.yellow_s + self.red_s

    def state_at(self, t: float) -> LightState:
        tau = (t + self.offset) % self.cycle
        if tau < self.green_s:
            return LightState.GREEN
        if tau < self.green_s + self.yellow_s:
            return LightState.YELLOW
        return LightState.RED


@dataclass
class SpeedZone:
    zone_id: str
    lanes: list[str]
    limit: float  # m/s


@dataclass
class SpawnPoint:
    lane_id: str
    s: float


class WorldMap:
    """Validated static road network."""

    def __init__(self, lanes, intersections, lights, zones, spawn_points, physics=None, name="map"):
        self.name = name
        self.lanes: dict[str, LaneSegment] = {ln.lane_id: ln for ln in lanes}
        self.intersections: list[Intersection] = list(intersections)
        self.lights: list[TrafficLight] = list(lights)
        self.zones: list[SpeedZone] = list(zones)
        self.spawn_points: list[SpawnPoint] = list(spawn_points)
        self.physics = physics or PhysicsParams()
        self._validate()
        self._index()

    # -- validation ----------------------------------------------------
    def _validate(self) -> None:
        for lane in self.lanes.values():
            for succ in lane.successors:
                if succ not in self.lanes:
                    raise MapConnectivityError(
                        f"lane '{lane.lane_id}' references missing successor '{succ}'"
                    )
        for inter in self.intersections:
            for entry, exits in inter.entries.items():
                if entry not in self.lanes:
                    raise MapConnectivityError(
                        f"intersection '{inter.iid}' entry references missing lane '{entry}'"
                    )
                for label, conn in exits.items():
                    if label not in TURN_LABELS:
                        raise MapSchemaError(
                            f"intersection '{inter.iid}' exit label '{label}' is not one of {TURN_LABELS}"
                        )
                    if conn not in self.lanes:
                        raise MapConnectivityError(
                            f"intersection '{inter.iid}' exit '{label}' references missing lane '{conn}'"
                        )
        zone_of: dict[str, str] = {}
        for zone in self.zones:
            if zone.limit <= 0:
                raise MapSchemaError(f"speed zone '{zone.zone_id}' has non-positive limit")
            for lid in zone.lanes:
                if lid not in self.lanes:
                    raise MapConnectivityError(
                        f"speed zone '{zone.zone_id}' references missing lane '{lid}'"
                    )
                if lid in zone_of:
                    raise MapSchemaError(
                        f"lane '{lid}' is covered by speed zones '{zone_of[lid]}' and '{zone.zone_id}'"
                    )
                zone_of[lid] = zone.zone_id
        if self.zones:
            for lid in self.lanes:
                if lid not in zone_of:
                    raise MapSchemaError(f"lane '{lid}' is not covered by any speed zone")
        for light in self.lights:
            if min(light.green_s, light.yellow_s, light.red_s) <= 0:
                raise MapSchemaError(f"light '{light.lid}' has non-positive phase duration")
            for lid in light.governed_lanes:
                if lid not in self.lanes:
                    raise MapConnectivityError(
                        f"light '{light.lid}' governs missing lane '{lid}'"
                    )
        for sp in self.spawn_points:
            if sp.lane_id not in self.lanes:
                raise MapConnectivityError(f"spawn point references missing lane '{sp.lane_id}'")

    def _index(self) -> None:
        # lane -> intersection it feeds (entry lanes only)
        self.entry_intersection: dict[str, Intersection] = {}
        for inter in self.intersections:
            for entry in inter.entries:
                self.entry_intersection[entry] = inter
        self.zone_limit: dict[str, float] = {}
        for zone in self.zones:
            for lid in zone.lanes:
                self.zone_limit[lid] = zone.limit
        # stop-line arclength per (light, governed lane)
        self.stop_s: dict[tuple[str, str], float] = {}
        self.lights_by_lane: dict[str, list[TrafficLight]] = {}
        for light in self.lights:
            mid = (
                (light.stop_line[0][0] + light.stop_line[1][0]) / 2.0,
                (light.stop_line[0][1] + light.stop_line[1][1]) / 2.0,
            )
            for lid in light.governed_lanes:
                s, _, _ = self.lanes[lid].centerline.project(mid[0], mid[1])
                self.stop_s[(light.lid, lid)] = s
                self.lights_by_lane.setdefault(lid, []).append(light)

    # -- queries -------------------------------------------------------
    def limit_for(self, lane_id: str) -> float:
        return self.zone_limit.get(lane_id, 13.9)

    def exits_for(self, entry_lane: str) -> dict[str, str]:
        inter = self.entry_intersection.get(entry_lane)
        return inter.entries[entry_lane] if inter else {}

    def bounds(self) -> tuple[float, float, float, float]:
        pts = np.concatenate([ln.centerline.points for ln in self.lanes.values()])
        return float(pts[:, 0].min()), float(pts[:, 1].min()), float(pts[:, 0].max()), float(pts[:, 1].max())

    def to_doc(self) -> dict:
        return {
            "name": self.name,
            "lanes": [
                {
                    "id": ln.lane_id,
                    "points": [[float(x), float(y)] for x, y in ln.centerline.points],
                    "successors": list(ln.successors),
                    "width": ln.width,
                    **({"turn": ln.turn} if ln.turn else {}),
                }
                for ln in self.lanes.values()
            ],
            "intersections": [
                {"id": i.iid, "entries": {e: dict(x) for e, x in i.entries.items()}}
                for i in self.intersections
            ],
            "lights": [
                {
                    "id": l.lid,
                    "stop_line": [list(l.stop_line[0]), list(l.stop_line[1])],
                    "green_s": l.green_s,
                    "yellow_s": l.yellow_s,
                    "red_s": l.red_s,
                    "offset": l.offset,
                    "governed_lanes": list(l.governed_lanes),
                }
                for l in self.lights
            ],
            "speed_zones": [
                {"id": z.zone_id, "lanes": list(z.lanes), "limit": z.limit} for z in self.zones
            ],
            "spawn_points": [{"lane": sp.lane_id, "s": sp.s} for sp in self.spawn_points],
            "physics": {
                "max_wheel_angle": self.physics.max_wheel_angle,
                "max_accel": self.physics.max_accel,
                "max_brake": self.physics.max_brake,
                "drag_coeff": self.physics.drag_coeff,
                "wheelbase": self.physics.wheelbase,
            },
        }


def _require(doc: dict, key: str, ctx: str):
    if key not in doc:
        raise MapSchemaError(f"{ctx}: missing required key '{key}'")
    return doc[key]


def load_map(source) -> WorldMap:
    """Build a WorldMap from a JSON document (dict, path, or JSON text)."""
    if isinstance(source, WorldMap):
        return source
    if isinstance(source, (str, Path)) and Path(str(source)).exists():
        doc = json.loads(Path(source).read_text())
    elif isinstance(source, str):
        doc = json.loads(source)
    else:
        doc = source
    if not isinstance(doc, dict):
        raise MapSchemaError("map document must be a JSON object")

    lanes = []
    for raw in _require(doc, "lanes", "map"):
        lid = _require(raw, "id", "lane")
        pts = _require(raw, "points", f"lane '{lid}'")
        if not isinstance(pts, list) or len(pts) < 2:
            raise MapSchemaError(f"lane '{lid}': 'points' must list at least two [x, y] pairs")
        try:
            center = Polyline(pts)
        except ValueError as e:
            raise MapSchemaError(f"lane '{lid}': {e}") from e
        turn = raw.get("turn")
        if turn is not None and turn not in TURN_LABELS:
            raise MapSchemaError(f"lane '{lid}': turn '{turn}' is not one of {TURN_LABELS}")
        lanes.append(
            LaneSegment(
                lane_id=lid,
                centerline=center,
                successors=list(raw.get("successors", [])),
                width=float(raw.get("width", 3.5)),
                turn=turn,
            )
        )

    intersections = []
    for raw in doc.get("intersections", []):
        iid = _require(raw, "id", "intersection")
        entries = _require(raw, "entries", f"intersection '{iid}'")
        if not isinstance(entries, dict):
            raise MapSchemaError(f"intersection '{iid}': 'entries' must be an object")
        intersections.append(Intersection(iid=iid, entries={e: dict(x) for e, x in entries.items()}))

    lights = []
    for raw in doc.get("lights", []):
        lid = _require(raw, "id", "light")
        sl = _require(raw, "stop_line", f"light '{lid}'")
        lights.append(
            TrafficLight(
                lid=lid,
                stop_line=((float(sl[0][0]), float(sl[0][1])), (float(sl[1][0]), float(sl[1][1]))),
                green_s=float(_require(raw, "green_s", f"light '{lid}'")),
                yellow_s=float(_require(raw, "yellow_s", f"light '{lid}'")),
                red_s=float(_require(raw, "red_s", f"light '{lid}'")),
                offset=float(raw.get("offset", 0.0)),
                governed_lanes=list(_require(raw, "governed_lanes", f"light '{lid}'")),
            )
        )

    zones = []
    for raw in doc.get("speed_zones", []):
        zones.append(
            SpeedZone(
                zone_id=raw.get("id", f"zone{len(zones)}"),
                lanes=list(_require(raw, "lanes", "speed zone")),
                limit=float(_require(raw, "limit", "speed zone")),
            )
        )

    spawns = [
        SpawnPoint(lane_id=_require(raw, "lane", "spawn point"), s=float(raw.get("s", 0.0)))
        for raw in doc.get("spawn_points", [])
    ]

    physics = PhysicsParams.from_doc(doc.get("physics", {}))
    return WorldMap(lanes, intersections, lights, zones, spawns, physics, name=doc.get("name", "map"))


@dataclass
class VehicleState:
    vid: str
    x: float
    y: float
    heading: float  # radians, (-pi, pi]
    speed: float  # m/s, >= 0
    lane_id: str
    s: float  # arclength along lane_id
    length: float = 4.5
    width: float = 2.0
    is_npc: bool = False
    next_turn: str | None = None  # intended exit at the upcoming intersection
    in_intersection: bool = False

    def corners(self) -> np.ndarray:
        return rect_corners(self.x, self.y, self.heading, self.length, self.width)

    def snapshot(self) -> tuple:
        return (
            self.vid, self.x, self.y, self.heading, self.speed,
            self.lane_id, self.s, self.next_turn, self.in_intersection,
        )


@dataclass(frozen=True)
class LaneMetrics:
    lateral_offset: float  # signed meters, + = left of centerline
    heading_error: float  # radians
    touching_line: bool
    touching_left: bool
    touching_right: bool
    in_opposite_lane: bool
    distance_to_next_intersection: float  # meters, inf if none ahead
    off_road: bool = False


@dataclass(frozen=True)
class Contact:
    a: str
    b: str
    rel_speed: float  # magnitude of relative velocity, m/s
    a_frontal: bool  # b lies ahead of a
    b_frontal: bool
    opposing: bool  # headings roughly opposite


@dataclass(frozen=True)
class ExitEvent:
    vid: str
    intersection: str
    from_lane: str
    commanded: str | None  # turn label active when the box was entered
    taken: str  # turn label of the connector actually traversed
    time: float


@dataclass(frozen=True)
class StopLineCrossing:
    vid: str
    light_id: str
    lane_id: str
    state: LightState
    time: float


@dataclass(frozen=True)
class LightQuery:
    light: TrafficLight
    state: LightState
    distance: float  # meters from vehicle to the stop line


class World:
    """Mutable simulation state over a WorldMap.

    Single-threaded by contract: all mutation happens inside `step`.
    NPC vehicles are driven by `npc_policy(world, vid) -> ControlSignal`,
    installed by the traffic helper in the expert module.
    """

    def __init__(self, wmap: WorldMap, seed: int = 0, start_time: float = 0.0):
        self.map = wmap
        self.time = float(start_time)
        self.rng = random.Random(seed)
        self.vehicles: dict[str, VehicleState] = {}
        self.npc_policy = None
        self.contacts: list[Contact] = []
        self.exit_events: list[ExitEvent] = []
        self.stop_line_crossings: list[StopLineCrossing] = []
        self._step_count = 0

    # -- population ----------------------------------------------------
    def spawn(self, vid: str, lane_id: str, s: float = 0.0, is_npc: bool = False,
              lateral: float = 0.0, heading: float | None = None,
              length: float = 4.5, width: float = 2.0) -> VehicleState:
        if vid in self.vehicles:
            raise SimulationError(f"vehicle id '{vid}' already exists")
        lane = self.map.lanes.get(lane_id)
        if lane is None:
            raise SimulationError(f"spawn lane '{lane_id}' not in map")
        s = min(max(s, 0.0), lane.length)
        x, y = lane.centerline.point_at(s)
        h = lane.centerline.heading_at(s)
        if lateral:
            x += -math.sin(h) * lateral
            y += math.cos(h) * lateral
        v = VehicleState(
            vid=vid, x=x, y=y, heading=heading if heading is not None else h,
            speed=0.0, lane_id=lane_id, s=s, is_npc=is_npc, length=length, width=width,
        )
        self.vehicles[vid] = v
        return v

    def remove(self, vid: str) -> None:
        self.vehicles.pop(vid, None)

    def set_turn_intent(self, vid: str, turn: str | None) -> None:
        veh = self._vehicle(vid)
        if turn is not None and turn not in TURN_LABELS:
            raise SimulationError(f"turn intent '{turn}' is not one of {TURN_LABELS}")
        if not veh.in_intersection:
            veh.next_turn = turn

    def _vehicle(self, vid: str) -> VehicleState:
        veh = self.vehicles.get(vid)
        if veh is None:
            raise SimulationError(f"unknown vehicle id '{vid}'")
        return veh

    def snapshot(self) -> tuple:
        return (self.time, tuple(v.snapshot() for v in self.vehicles.values()))

    # -- stepping ------------------------------------------------------
    def step(self, controls: dict[str, ControlSignal], dt: float = DT) -> None:
        if dt <= 0:
            raise SimulationError("dt must be positive")
        for vid in controls:
            self._vehicle(vid)
        resolved: dict[str, ControlSignal] = {}
        for vid, veh in self.vehicles.items():
            if vid in controls:
                ctrl = controls[vid]
                ctrl.validate()
            elif veh.is_npc and self.npc_policy is not None:
                ctrl = self.npc_policy(self, vid).clamped()
            else:
                ctrl = CONTROL_ZERO
            resolved[vid] = ctrl

        self.exit_events = []
        self.stop_line_crossings = []
        despawn: list[str] = []
        phys = self.map.physics
        for vid, veh in self.vehicles.items():
            ctrl = resolved[vid]
            delta = ctrl.steer * phys.max_wheel_angle
            accel = ctrl.throttle * phys.max_accel - ctrl.brake * phys.max_brake
            accel -= phys.drag_coeff * veh.speed * veh.speed
            veh.speed = max(0.0, veh.speed + accel * dt)
            # steer > 0 turns right = clockwise = negative heading rate
            veh.heading = normalize_angle(
                veh.heading - (veh.speed / phys.wheelbase) * math.tan(delta) * dt
            )
            veh.x += veh.speed * math.cos(veh.heading) * dt
            veh.y += veh.speed * math.sin(veh.heading) * dt
            if self._track_lane(veh) and veh.is_npc:
                despawn.append(vid)

        self.time += dt
        self._step_count += 1
        for vid in despawn:
            self.vehicles.pop(vid, None)
        self._detect_collisions()

    def _track_lane(self, veh: VehicleState) -> bool:
        """Update (lane_id, s); returns True when a terminal lane end was passed."""
        lane = self.map.lanes[veh.lane_id]
        prev_s = veh.s
        s, _, _ = lane.centerline.project(veh.x, veh.y)
        veh.s = s
        self._check_stop_lines(veh, lane, prev_s, s)

        if veh.in_intersection:
            # allow re-assignment among the sibling connectors until committed
            if s < lane.length * 0.6:
                better = self._best_connector(veh)
                if better is not None and better != veh.lane_id:
                    veh.lane_id = better
                    veh.s, _, _ = self.map.lanes[better].centerline.project(veh.x, veh.y)
                    lane = self.map.lanes[better]
            if veh.s >= lane.length - 1e-6:
                inter_id, entry = self._connector_home.get(veh.lane_id, ("?", "?"))
                self.exit_events.append(
                    ExitEvent(
                        vid=veh.vid,
                        intersection=inter_id,
                        from_lane=entry,
                        commanded=veh.next_turn,
                        taken=lane.turn or "STRAIGHT",
                        time=self.time,
                    )
                )
                veh.next_turn = None
                veh.in_intersection = False
                if lane.successors:
                    nxt = lane.successors[0]
                    veh.lane_id = nxt
                    veh.s, _, _ = self.map.lanes[nxt].centerline.project(veh.x, veh.y)
                else:
                    return True
            return False

        if s >= lane.length - 1e-6:
            exits = self.map.exits_for(veh.lane_id)
            if exits:
                if veh.next_turn in exits:
                    chosen = exits[veh.next_turn]
                elif veh.next_turn is None and "STRAIGHT" in exits:
                    chosen = exits["STRAIGHT"]
                elif veh.next_turn is None:
                    chosen = exits[sorted(exits)[0]]
                else:
                    # commanded turn impossible here: fall back to straight/first
                    chosen = exits.get("STRAIGHT", exits[sorted(exits)[0]])
                veh.in_intersection = True
                veh.lane_id = chosen
                veh.s, _, _ = self.map.lanes[chosen].centerline.project(veh.x, veh.y)
            elif lane.successors:
                nxt = self._closest_successor(veh, lane.successors)
                veh.lane_id = nxt
                veh.s, _, _ = self.map.lanes[nxt].centerline.project(veh.x, veh.y)
            else:
                return True
        return False

    @property
    def _connector_home(self) -> dict[str, tuple[str, str]]:
        cache = getattr(self, "_connector_home_cache", None)
        if cache is None:
            cache = {}
            for inter in self.map.intersections:
                for entry, exits in inter.entries.items():
                    for label, conn in exits.items():
                        cache[conn] = (inter.iid, entry)
            self._connector_home_cache = cache
        return cache

    @property
    def _entry_of(self) -> dict[str, str]:
        cache = getattr(self, "_entry_of_cache", None)
        if cache is None:
            cache = {conn: entry for conn, (_, entry) in self._connector_home.items()}
            self._entry_of_cache = cache
        return cache

    def _best_connector(self, veh: VehicleState) -> str | None:
        """Re-project a committed-to-nothing vehicle onto the nearest sibling connector."""
        home = self._connector_home.get(veh.lane_id)
        if home is None:
            return None
        inter_id, entry = home
        if veh.next_turn is not None:
            return None  # intent locks the connector
        exits = self.map.exits_for(entry)
        best, best_cost = None, float("inf")
        for label in sorted(exits):
            conn = exits[label]
            lane = self.map.lanes[conn]
            s, _, dist = lane.centerline.project(veh.x, veh.y)
            herr = abs(normalize_angle(veh.heading - lane.centerline.heading_at(s)))
            cost = dist + 2.0 * herr
            if cost < best_cost:
                best, best_cost = conn, cost
        return best

    def _closest_successor(self, veh: VehicleState, successors: list[str]) -> str:
        if len(successors) == 1:
            return successors[0]
        best, best_d = successors[0], float("inf")
        for lid in sorted(successors):
            _, _, d = self.map.lanes[lid].centerline.project(veh.x, veh.y)
            if d < best_d:
                best, best_d = lid, d
        return best

    def _check_stop_lines(self, veh: VehicleState, lane: LaneSegment, prev_s: float, s: float) -> None:
        for light in self.map.lights_by_lane.get(lane.lane_id, []):
            stop_s = self.map.stop_s[(light.lid, lane.lane_id)]
            if prev_s < stop_s <= s:
                self.stop_line_crossings.append(
                    StopLineCrossing(
                        vid=veh.vid, light_id=light.lid, lane_id=lane.lane_id,
                        state=light.state_at(self.time), time=self.time,
                    )
                )

    def _detect_collisions(self) -> None:
        self.contacts = []
        vids = list(self.vehicles)
        corners = {vid: self.vehicles[vid].corners() for vid in vids}
        for i in range(len(vids)):
            for j in range(i + 1, len(vids)):
                a, b = self.vehicles[vids[i]], self.vehicles[vids[j]]
                if (a.x - b.x) ** 2 + (a.y - b.y) ** 2 > (a.length + b.length) ** 2:
                    continue
                if not rects_overlap(corners[vids[i]], corners[vids[j]]):
                    continue
                va = (a.speed * math.cos(a.heading), a.speed * math.sin(a.heading))
                vb = (b.speed * math.cos(b.heading), b.speed * math.sin(b.heading))
                rel = math.hypot(va[0] - vb[0], va[1] - vb[1])
                dab = (b.x - a.x, b.y - a.y)
                dist = math.hypot(*dab) or 1.0
                a_front = (dab[0] * math.cos(a.heading) + dab[1] * math.sin(a.heading)) / dist > 0.5
                b_front = (-dab[0] * math.cos(b.heading) - dab[1] * math.sin(b.heading)) / dist > 0.5
                opposing = math.cos(a.heading - b.heading) < -0.5
                self.contacts.append(
                    Contact(a=a.vid, b=b.vid, rel_speed=rel, a_frontal=a_front,
                            b_frontal=b_front, opposing=opposing)
                )


# -- world queries -----------------------------------------------------

def lane_metrics(world: World, vid: str) -> LaneMetrics:
    veh = world._vehicle(vid)
    lane = world.map.lanes[veh.lane_id]
    s, lateral, dist = lane.centerline.project(veh.x, veh.y)
    heading_err = normalize_angle(veh.heading - lane.centerline.heading_at(s))

    half = lane.width / 2.0
    off_road = False
    if dist > half + OFF_ROAD_MARGIN:
        # fully off the tracked lane; only off-road if no other lane holds us
        off_road = True
        for other in world.map.lanes.values():
            _, _, d = other.centerline.project(veh.x, veh.y)
            if d <= other.width / 2.0 + OFF_ROAD_MARGIN:
                off_road = False
                break

    corners = veh.corners()
    touching_left = _touches_boundary(lane, +half, s, corners)
    touching_right = _touches_boundary(lane, -half, s, corners)

    in_opposite = False
    if not lane.is_connector and not off_road:
        own_tan = lane.centerline.tangent_at(s)
        for other in world.map.lanes.values():
            if other.lane_id == veh.lane_id or other.is_connector:
                continue
            os_, _, od = other.centerline.project(veh.x, veh.y)
            if od <= other.width / 2.0:
                ot = other.centerline.tangent_at(os_)
                if own_tan[0] * ot[0] + own_tan[1] * ot[1] < -0.5:
                    in_opposite = True
                    break

    return LaneMetrics(
        lateral_offset=lateral,
        heading_error=heading_err,
        touching_line=touching_left or touching_right,
        touching_left=touching_left,
        touching_right=touching_right,
        in_opposite_lane=in_opposite,
        distance_to_next_intersection=distance_to_intersection(world, vid),
        off_road=off_road,
    )


def _touches_boundary(lane: LaneSegment, offset: float, s: float, corners) -> bool:
    boundary = lane.centerline.offset(offset)
    lo, hi = s - 8.0, s + 8.0
    for (p1, p2), c0, c1 in zip(boundary.segments(), boundary.cum[:-1], boundary.cum[1:]):
        if c1 < lo or c0 > hi:
            continue
        if rect_segment_intersects(corners, p1, p2):
            return True
    return False


def distance_to_intersection(world: World, vid: str) -> float:
    """Arclength from the vehicle to the end of the next intersection entry lane."""
    veh = world._vehicle(vid)
    lane = world.map.lanes[veh.lane_id]
    if veh.in_intersection or lane.is_connector:
        return 0.0
    d = lane.length - veh.s
    lid = veh.lane_id
    while d < CHAIN_HORIZON:
        if lid in world.map.entry_intersection:
            return max(d, 0.0)
        lane = world.map.lanes[lid]
        if len(lane.successors) != 1:
            break
        lid = lane.successors[0]
        if lid == veh.lane_id:
            break
        if world.map.lanes[lid].is_connector:
            break
        d += world.map.lanes[lid].length
    return float("inf")


def relevant_light_info(world: World, vid: str, lookahead: float = LIGHT_LOOKAHEAD) -> LightQuery | None:
    """Nearest light governing the vehicle's current lane, ahead within lookahead."""
    veh = world._vehicle(vid)
    best: LightQuery | None = None
    for light in world.map.lights_by_lane.get(veh.lane_id, []):
        stop_s = world.map.stop_s[(light.lid, veh.lane_id)]
        dist = stop_s - veh.s
        if -0.5 <= dist <= lookahead:
            if best is None or dist < best.distance:
                best = LightQuery(light=light, state=light.state_at(world.time), distance=dist)
    return best


def relevant_light(world: World, vid: str, lookahead: float = LIGHT_LOOKAHEAD) -> LightState | None:
    q = relevant_light_info(world, vid, lookahead)
    return q.state if q else None


def route_progress(world: World, vid: str, route_lanes, last: float = 0.0) -> float:
    """Fraction of route arclength covered, monotone when threaded via `last`."""
    lanes = list(route_lanes)
    for lid in lanes:
        if lid not in world.map.lanes:
            raise SimulationError(f"route references unknown lane '{lid}'")
    veh = world._vehicle(vid)
    total = sum(world.map.lanes[lid].length for lid in lanes)
    if total <= 0:
        return 1.0
    covered = None
    acc = 0.0
    for lid in lanes:
        lane = world.map.lanes[lid]
        if lid == veh.lane_id:
            covered = acc + min(veh.s, lane.length)
            break
        acc += lane.length
    if covered is None:
        return last  # off-route: hold the previous value
    frac = min(covered / total, 1.0)
    return max(frac, last)


def spawn_pose(world_map: WorldMap, sp: SpawnPoint) -> tuple[float, float, float]:
    lane = world_map.lanes[sp.lane_id]
    x, y = lane.centerline.point_at(sp.s)
    return x, y, lane.centerline.heading_at(sp.s)
