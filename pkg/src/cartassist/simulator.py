"""Deterministic 2-D stand-in for the physical cart.

Marker detection is pure geometry instead of computer vision: a marker is
seen by a camera when it lies inside that camera's field of view, within
range, and on the face side of its shelf; the projected size follows the
pinhole model (focal_px * physical_size / distance).  Three 120-degree
cameras sit at bearings -90 (left), 0 (front) and +90 (right) relative to
the cart heading, positive bearings toward the rotate_left side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

from .clients import CapturedImage, VirtualClock
from .geometry import Cell, Direction, rotate_left, rotate_right, signed_bearing_deg, step_cell, wrap_deg
from .localization import Camera, MarkerObservation
from .store import Store
from .templates import Phrasebook

DEFAULT_CELL_SIZE_M = 0.5
DEFAULT_MAX_RANGE_M = 5.0
DEFAULT_FOCAL_PX = 800.0
DEFAULT_STEP_DURATION_S = 1.0

CAMERA_BEARINGS_DEG = {Camera.LEFT: -90.0, Camera.FRONT: 0.0, Camera.RIGHT: 90.0}


@dataclass(frozen=True)
class CartPose:
    cell: Cell
    heading: Direction


@dataclass(frozen=True)
class DetectionModel:
    fov_deg: float = 120.0
    max_range_m: float = DEFAULT_MAX_RANGE_M
    focal_px: float = DEFAULT_FOCAL_PX
    cell_size_m: float = DEFAULT_CELL_SIZE_M


class Command(str, Enum):
    MOVE_FORWARD = "MoveForward"
    ROTATE_LEFT = "RotateLeft"
    ROTATE_RIGHT = "RotateRight"


@dataclass(frozen=True)
class StepResult:
    pose: CartPose
    bumped: bool = False


def _cell_center_m(cell: Cell, cell_size_m: float) -> tuple[float, float]:
    return ((cell[0] + 0.5) * cell_size_m, (cell[1] + 0.5) * cell_size_m)


def observe(store: Store, pose: CartPose, model: DetectionModel, timestamp: float) -> list[MarkerObservation]:
    """All marker sightings from the given pose, one per (marker, camera)."""
    observations: list[MarkerObservation] = []
    cart = _cell_center_m(pose.cell, model.cell_size_m)
    for marker in sorted(store.markers.values(), key=lambda m: m.marker_id):
        shelf = store.shelves.get(marker.shelf_id)
        if shelf is None:
            continue
        marker_pos = _cell_center_m(shelf.shelf_cell, model.cell_size_m)
        offset = (marker_pos[0] - cart[0], marker_pos[1] - cart[1])
        distance = math.hypot(*offset)
        if distance == 0.0 or distance > model.max_range_m:
            continue
        # the marker faces the approach cell: visible only from that half-space
        face = step_cell((0, 0), shelf.facing, -1)  # unit vector shelf -> approach
        if (cart[0] - marker_pos[0]) * face[0] + (cart[1] - marker_pos[1]) * face[1] <= 0.0:
            continue
        bearing = signed_bearing_deg(pose.heading, offset)
        size_px = model.focal_px * marker.physical_size_m / distance
        for camera in (Camera.LEFT, Camera.FRONT, Camera.RIGHT):
            if abs(wrap_deg(bearing - CAMERA_BEARINGS_DEG[camera])) <= model.fov_deg / 2.0:
                observations.append(MarkerObservation(marker.marker_id, camera, size_px, timestamp))
    return observations


class SimWorld:
    """Owns the cart pose and the virtual clock; mutations go through step()."""

    def __init__(
        self,
        store: Store,
        model: DetectionModel | None = None,
        clock: VirtualClock | None = None,
        start_pose: CartPose | None = None,
        step_duration_s: float = DEFAULT_STEP_DURATION_S,
    ):
        self.store = store
        self.model = model or DetectionModel()
        self.clock = clock or VirtualClock()
        self.step_duration_s = step_duration_s
        self.pose = start_pose or CartPose(self._first_walkable(), Direction.EAST)

    def _first_walkable(self) -> Cell:
        for y in range(self.store.map.height):
            for x in range(self.store.map.width):
                if self.store.map.is_walkable((x, y)):
                    return (x, y)
        raise ValueError("store has no walkable cell")

    def observe(self) -> list[MarkerObservation]:
        return observe(self.store, self.pose, self.model, self.clock.now())

    def step(self, command: Command) -> StepResult:
        self.clock.advance(self.step_duration_s)
        if command is Command.ROTATE_LEFT:
            self.pose = replace(self.pose, heading=rotate_left(self.pose.heading))
            return StepResult(self.pose)
        if command is Command.ROTATE_RIGHT:
            self.pose = replace(self.pose, heading=rotate_right(self.pose.heading))
            return StepResult(self.pose)
        target = step_cell(self.pose.cell, self.pose.heading)
        if not self.store.map.is_walkable(target):
            return StepResult(self.pose, bumped=True)
        self.pose = replace(self.pose, cell=target)
        return StepResult(self.pose)

    def capture_images(self) -> list[CapturedImage]:
        """Three per-camera snapshots described by what each camera can see."""
        sightings: dict[Camera, list[int]] = {camera: [] for camera in Camera}
        for obs in self.observe():
            sightings[obs.camera].append(obs.marker_id)
        images = []
        for camera in (Camera.LEFT, Camera.FRONT, Camera.RIGHT):
            ids = sightings[camera]
            seen = f"markers {', '.join(map(str, ids))}" if ids else "shelving and open floor"
            images.append(CapturedImage(camera.value, f"{camera.value} view from {self.pose.cell}: {seen}"))
        return images
