"""Forward-facing camera renderer.

The camera model is a simplified perspective projection of the 2D
ground plane: a top-down bitmap of the static road network is built
once per map, then sampled along per-pixel ground rays. Vehicles,
traffic lights, and speed signs are painted over as 2.5D boxes. Four
weather presets apply brightness / tint / shadow post-processing.
"""

from __future__ import annotations

import math
import weakref
import zlib
from dataclasses import dataclass
from enum import Enum

import numpy as np
from PIL import Image, ImageDraw

from .simworld import World, WorldMap

IMG_W = 300
IMG_H = 180
CX = (IMG_W - 1) / 2.0
CY = (IMG_H - 1) / 2.0
FOCAL = 150.0
CAM_HEIGHT = 1.4
CAM_FORWARD = 0.9  # windshield position ahead of the vehicle center
MAX_DEPTH = 90.0
BITMAP_RES = 0.2
DRAW_RANGE = 75.0  # entity draw distance

GRASS = (96, 128, 72)
ASPHALT = (70, 70, 75)
LANE_LINE = (232, 232, 232)
DIVIDER_LINE = (210, 178, 60)
SKY = (148, 186, 230)
HAZE = (168, 182, 200)
STOP_LINE = (245, 245, 245)
POLE = (60, 60, 64)
HOUSING = (40, 40, 44)
SIGN_FACE = (240, 240, 240)
SIGN_RING = (202, 42, 42)
LIGHT_COLORS = {"RED": (235, 48, 40), "YELLOW": (240, 200, 50), "GREEN": (56, 220, 90)}
VEHICLE_PALETTE = [
    (178, 62, 52), (64, 94, 178), (188, 142, 44),
    (92, 158, 94), (122, 84, 152), (198, 198, 206),
]


class WeatherPreset(Enum):
    CLEAR_NOON = "CLEAR_NOON"
    CLOUDY_NOON = "CLOUDY_NOON"
    CLEAR_SUNSET = "CLEAR_SUNSET"
    CLOUDY_SUNSET = "CLOUDY_SUNSET"


# brightness scale, RGB tint, shadow intensity
WEATHER_PARAMS = {
    WeatherPreset.CLEAR_NOON: (1.0, (1.0, 1.0, 1.0), 0.0),
    WeatherPreset.CLOUDY_NOON: (0.82, (0.96, 0.98, 1.02), 0.12),
    WeatherPreset.CLEAR_SUNSET: (0.68, (1.12, 0.92, 0.78), 0.30),
    WeatherPreset.CLOUDY_SUNSET: (0.55, (1.02, 0.94, 0.88), 0.18),
}


@dataclass(frozen=True)
class CameraRig:
    """Three forward cameras; lateral offsets are right-positive meters."""

    offsets: tuple[float, float, float] = (-0.8, 0.0, 0.8)  # (left, center, right)
    forward: float = CAM_FORWARD

    def __post_init__(self):
        if abs(self.offsets[0] + self.offsets[2]) > 1e-9 or self.offsets[1] != 0.0:
            raise ValueError("camera rig must be mirror-symmetric about the center camera")


# ground-ray lookup tables, shared by every renderer
_V = np.arange(IMG_H, dtype=np.float64) - CY
_GROUND_ROWS = np.nonzero(_V > FOCAL * CAM_HEIGHT / MAX_DEPTH)[0]
_ROW0 = int(_GROUND_ROWS[0])
_DEPTH = FOCAL * CAM_HEIGHT / _V[_ROW0:]  # (rows,)
_LATERAL = (np.arange(IMG_W, dtype=np.float64) - CX)[None, :] * _DEPTH[:, None] / FOCAL
_SHADOW_GRAD = (np.arange(IMG_H, dtype=np.float64) / (IMG_H - 1))[:, None, None]


class Renderer:
    """Per-map rendering context: static ground bitmap plus sign positions."""

    def __init__(self, wmap: WorldMap):
        self.map = wmap
        self._build_bitmap()
        self._collect_signs()

    # -- static scene ----------------------------------------------------
    def _build_bitmap(self) -> None:
        x0, y0, x1, y1 = self.map.bounds()
        margin = 30.0
        self.x0 = math.floor((x0 - margin) / BITMAP_RES) * BITMAP_RES
        self.y0 = math.floor((y0 - margin) / BITMAP_RES) * BITMAP_RES
        w = int(math.ceil((x1 + margin - self.x0) / BITMAP_RES))
        h = int(math.ceil((y1 + margin - self.y0) / BITMAP_RES))
        img = Image.new("RGB", (w, h), GRASS)
        draw = ImageDraw.Draw(img)

        def px(p):
            return ((p[0] - self.x0) / BITMAP_RES, (p[1] - self.y0) / BITMAP_RES)

        for lane in self.map.lanes.values():
            pts = [px(p) for p in lane.centerline.points]
            draw.line(pts, fill=ASPHALT, width=max(2, int(round(lane.width / BITMAP_RES))),
                      joint="curve")
        for lane in self.map.lanes.values():
            if lane.is_connector:
                continue
            half = lane.width / 2.0
            for side in (+1.0, -1.0):
                boundary = lane.centerline.offset(side * half)
                color = DIVIDER_LINE if self._faces_opposing(lane, side) else LANE_LINE
                draw.line([px(p) for p in boundary.points], fill=color, width=1)
        for light in self.map.lights:
            draw.line([px(light.stop_line[0]), px(light.stop_line[1])],
                      fill=STOP_LINE, width=max(1, int(round(0.45 / BITMAP_RES))))
        self.bitmap = np.asarray(img, dtype=np.uint8)

    def _faces_opposing(self, lane, side: float) -> bool:
        """True when the boundary on `side` (+1 left) separates opposing traffic."""
        mid_s = lane.length / 2.0
        x, y = lane.centerline.point_at(mid_s)
        tx, ty = lane.centerline.tangent_at(mid_s)
        probe = (x - ty * side * lane.width, y + tx * side * lane.width)
        for other in self.map.lanes.values():
            if other.lane_id == lane.lane_id or other.is_connector:
                continue
            os_, _, od = other.centerline.project(probe[0], probe[1])
            if od <= other.width / 2.0:
                ot = other.centerline.tangent_at(os_)
                if tx * ot[0] + ty * ot[1] < -0.5:
                    return True
        return False

    def _collect_signs(self) -> None:
        preds: dict[str, set[str]] = {lid: set() for lid in self.map.lanes}
        for lane in self.map.lanes.values():
            for succ in lane.successors:
                preds[succ].add(lane.lane_id)
        for inter in self.map.intersections:
            for entry, exits in inter.entries.items():
                for conn in exits.values():
                    preds[conn].add(entry)
        self.signs = []
        for lane in self.map.lanes.values():
            if lane.is_connector:
                continue
            zone = self.map.zone_limit.get(lane.lane_id)
            if zone is None:
                continue
            prior = {self.map.zone_limit.get(p) for p in preds[lane.lane_id]}
            if prior and prior == {zone}:
                continue
            s = min(2.0, lane.length / 2.0)
            x, y = lane.centerline.point_at(s)
            tx, ty = lane.centerline.tangent_at(s)
            off = lane.width / 2.0 + 0.8
            self.signs.append(((x + ty * off, y - tx * off), zone))

    # -- dynamic pass ----------------------------------------------------
    def render(self, world: World, vid: str, lateral: float = 0.0,
               weather: WeatherPreset = WeatherPreset.CLEAR_NOON,
               forward: float = CAM_FORWARD) -> np.ndarray:
        veh = world._vehicle(vid)
        ch, sh = math.cos(veh.heading), math.sin(veh.heading)
        cam_x = veh.x + ch * forward + sh * lateral
        cam_y = veh.y + sh * forward - ch * lateral

        img = np.empty((IMG_H, IMG_W, 3), dtype=np.uint8)
        img[: _ROW0 - 2] = SKY
        img[_ROW0 - 2: _ROW0] = HAZE
        wx = cam_x + ch * _DEPTH[:, None] + sh * _LATERAL
        wy = cam_y + sh * _DEPTH[:, None] - ch * _LATERAL
        ix = np.rint((wx - self.x0) / BITMAP_RES).astype(np.int64)
        iy = np.rint((wy - self.y0) / BITMAP_RES).astype(np.int64)
        inside = (ix >= 0) & (ix < self.bitmap.shape[1]) & (iy >= 0) & (iy < self.bitmap.shape[0])
        ix = np.clip(ix, 0, self.bitmap.shape[1] - 1)
        iy = np.clip(iy, 0, self.bitmap.shape[0] - 1)
        ground = self.bitmap[iy, ix]
        ground[~inside] = GRASS
        img[_ROW0:] = ground

        pil = Image.fromarray(img)
        draw = ImageDraw.Draw(pil)
        self._draw_entities(draw, world, vid, (cam_x, cam_y), (ch, sh))
        img = np.asarray(pil, dtype=np.uint8)

        return apply_weather(img, weather)

    def _project(self, cam, axes, p, z: float):
        ch, sh = axes
        rx, ry = p[0] - cam[0], p[1] - cam[1]
        fwd = rx * ch + ry * sh
        if fwd < 0.4:
            return None
        right = rx * sh - ry * ch
        col = CX + FOCAL * right / fwd
        row = CY + FOCAL * (CAM_HEIGHT - z) / fwd
        return (col, row, fwd)

    def _draw_entities(self, draw, world: World, vid: str, cam, axes) -> None:
        items = []
        for other in world.vehicles.values():
            if other.vid == vid:
                continue
            d = math.hypot(other.x - cam[0], other.y - cam[1])
            if d < DRAW_RANGE:
                items.append((d, "vehicle", other))
        for light in world.map.lights:
            mid = ((light.stop_line[0][0] + light.stop_line[1][0]) / 2.0,
                   (light.stop_line[0][1] + light.stop_line[1][1]) / 2.0)
            d = math.hypot(mid[0] - cam[0], mid[1] - cam[1])
            if d < DRAW_RANGE:
                items.append((d, "light", light))
        for pos, limit in self.signs:
            d = math.hypot(pos[0] - cam[0], pos[1] - cam[1])
            if d < DRAW_RANGE:
                items.append((d, "sign", (pos, limit)))
        items.sort(key=lambda it: -it[0])  # far first

        for _, kind, obj in items:
            if kind == "vehicle":
                self._draw_vehicle(draw, cam, axes, obj)
            elif kind == "light":
                self._draw_light(draw, cam, axes, obj, world.time)
            else:
                self._draw_sign(draw, cam, axes, obj[0])

    def _draw_vehicle(self, draw, cam, axes, veh) -> None:
        corners = veh.corners()
        pts = []
        for cx_, cy_ in corners:
            for z in (0.0, 1.45):
                p = self._project(cam, axes, (cx_, cy_), z)
                if p is None:
                    return
                pts.append((p[0], p[1]))
        hull = _convex_hull(pts)
        if len(hull) < 3:
            return
        color = VEHICLE_PALETTE[zlib.crc32(veh.vid.encode()) % len(VEHICLE_PALETTE)]
        dark = tuple(int(c * 0.55) for c in color)
        draw.polygon(hull, fill=color, outline=dark)

    def _draw_light(self, draw, cam, axes, light, t: float) -> None:
        # pole stands at the right end of the stop line (relative to lane travel)
        lane = self.map.lanes[light.governed_lanes[0]] if light.governed_lanes else None
        a, b = light.stop_line
        if lane is not None:
            s = self.map.stop_s[(light.lid, lane.lane_id)]
            tx, ty = lane.centerline.tangent_at(s)
            pos = a if (a[0] * ty - a[1] * tx) > (b[0] * ty - b[1] * tx) else b
        else:
            pos = a
        base = self._project(cam, axes, pos, 0.0)
        top = self._project(cam, axes, pos, 3.4)
        if base is None or top is None:
            return
        z = base[2]
        wpx = max(1, int(round(FOCAL * 0.12 / z)))
        draw.line([(base[0], base[1]), (top[0], top[1])], fill=POLE, width=wpx)
        hw = FOCAL * 0.35 / z
        hh = FOCAL * 0.55 / z
        cx_, cy_ = top[0], top[1] + hh * 0.5
        draw.rectangle([cx_ - hw / 2, cy_ - hh / 2, cx_ + hw / 2, cy_ + hh / 2], fill=HOUSING)
        r = max(1.2, FOCAL * 0.2 / z)
        color = LIGHT_COLORS[light.state_at(t).value]
        draw.ellipse([cx_ - r, cy_ - r, cx_ + r, cy_ + r], fill=color)

    def _draw_sign(self, draw, cam, axes, pos) -> None:
        base = self._project(cam, axes, pos, 0.0)
        top = self._project(cam, axes, pos, 2.2)
        if base is None or top is None:
            return
        z = base[2]
        draw.line([(base[0], base[1]), (top[0], top[1])],
                  fill=POLE, width=max(1, int(round(FOCAL * 0.08 / z))))
        r = max(1.5, FOCAL * 0.3 / z)
        draw.ellipse([top[0] - r, top[1] - r, top[0] + r, top[1] + r],
                     fill=SIGN_FACE, outline=SIGN_RING, width=max(1, int(round(r / 3))))


def _convex_hull(points):
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and (
                (out[-1][0] - out[-2][0]) * (p[1] - out[-2][1])
                - (out[-1][1] - out[-2][1]) * (p[0] - out[-2][0])
            ) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(reversed(pts))
    return lower[:-1] + upper[:-1]


def apply_weather(img: np.ndarray, weather: WeatherPreset) -> np.ndarray:
    brightness, tint, shadow = WEATHER_PARAMS[weather]
    if brightness == 1.0 and tint == (1.0, 1.0, 1.0) and shadow == 0.0:
        return img
    out = img.astype(np.float64)
    out *= brightness
    out *= np.array(tint)[None, None, :]
    if shadow:
        out *= 1.0 - shadow * 0.5 * _SHADOW_GRAD
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


_RENDERERS: "weakref.WeakKeyDictionary[WorldMap, Renderer]" = weakref.WeakKeyDictionary()


def get_renderer(wmap: WorldMap) -> Renderer:
    r = _RENDERERS.get(wmap)
    if r is None:
        r = Renderer(wmap)
        _RENDERERS[wmap] = r
    return r


def render_camera(world: World, vid: str, lateral: float = 0.0,
                  weather: WeatherPreset = WeatherPreset.CLEAR_NOON) -> np.ndarray:
    """One 180x300x3 uint8 frame from a camera mounted at `lateral` (right-positive)."""
    return get_renderer(world.map).render(world, vid, lateral, weather)


def render_triple(world: World, vid: str, rig: CameraRig | None = None,
                  weather: WeatherPreset = WeatherPreset.CLEAR_NOON):
    """(left, center, right) camera images in rig order."""
    rig = rig or CameraRig()
    r = get_renderer(world.map)
    return tuple(r.render(world, vid, off, weather, rig.forward) for off in rig.offsets)
