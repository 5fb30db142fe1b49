"""Marker-sighting memory, announcement gating and cart pose estimation.

Per frame, the largest marker a side camera sees replaces that camera's
memory (bigger projection means closer, so higher relevance); a memory slot
not refreshed within t_expire_s is cleared so the cart never localizes
against a stale sighting.  Announcements repeat the same marker only after
t_repeat_s unless a different marker was announced in between.

The pose estimate places the cart on the approach cell of the remembered
marker's shelf.  Heading comes from which camera saw it:

    left camera  -> heading = rotate_left(shelf facing)
    right camera -> heading = rotate_right(shelf facing)

so the shelf lies on the observing camera's side of the cart.  The front
camera feeds announcements only; side memories are the two variables that
drive localization.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from enum import Enum

from .errors import UnknownMarker
from .geometry import Cell, Direction, rotate_left, rotate_right
from .store import Store

DEFAULT_T_EXPIRE_S = 3.0
DEFAULT_T_REPEAT_S = 10.0


class Camera(str, Enum):
    LEFT = "left"
    FRONT = "front"
    RIGHT = "right"


@dataclass(frozen=True)
class MarkerObservation:
    marker_id: int
    camera: Camera
    apparent_size_px: float
    timestamp: float


@dataclass(frozen=True)
class MarkerMemory:
    marker_id: int
    timestamp: float


@dataclass
class LocalizationState:
    last_left: MarkerMemory | None = None
    last_right: MarkerMemory | None = None
    last_announced: MarkerMemory | None = None


@dataclass(frozen=True)
class CartPoseEstimate:
    cell: Cell
    heading: Direction
    source_marker: int
    source_camera: Camera


def _largest(observations: list[MarkerObservation]) -> MarkerObservation | None:
    if not observations:
        return None
    # strictly larger wins; equal sizes break toward the lower marker id
    return max(observations, key=lambda o: (o.apparent_size_px, -o.marker_id))


class LocalizationTracker:
    """Single owner of the left/right/announced marker memories."""

    def __init__(self, t_expire_s: float = DEFAULT_T_EXPIRE_S, t_repeat_s: float = DEFAULT_T_REPEAT_S):
        self.t_expire_s = t_expire_s
        self.t_repeat_s = t_repeat_s
        self._state = LocalizationState()
        self._lock = threading.Lock()

    @property
    def state(self) -> LocalizationState:
        with self._lock:
            return LocalizationState(self._state.last_left, self._state.last_right, self._state.last_announced)

    def reset(self) -> None:
        with self._lock:
            self._state = LocalizationState()

    def ingest_frame(self, observations: list[MarkerObservation], now: float) -> LocalizationState:
        """Fold one frame of sightings into the side memories, then expire."""
        with self._lock:
            for camera, attr in ((Camera.LEFT, "last_left"), (Camera.RIGHT, "last_right")):
                best = _largest([o for o in observations if o.camera is camera])
                if best is not None:
                    setattr(self._state, attr, MarkerMemory(best.marker_id, best.timestamp))
            for attr in ("last_left", "last_right"):
                memory = getattr(self._state, attr)
                if memory is not None and now - memory.timestamp > self.t_expire_s:
                    setattr(self._state, attr, None)
        return self.state

    def select_announcement(self, observations: list[MarkerObservation], now: float) -> int | None:
        """Pick the marker to read aloud, or None when nothing (new) is visible."""
        candidate = _largest(observations)
        if candidate is None:
            return None
        with self._lock:
            last = self._state.last_announced
            if (
                last is not None
                and last.marker_id == candidate.marker_id
                and now - last.timestamp < self.t_repeat_s
            ):
                return None
            self._state.last_announced = MarkerMemory(candidate.marker_id, now)
        return candidate.marker_id

    def pose_estimate(self, store: Store) -> CartPoseEstimate | None:
        """Pose from the most recent side memory; None when both are empty."""
        with self._lock:
            left, right = self._state.last_left, self._state.last_right
        picks = []
        if left is not None:
            picks.append((left.timestamp, 1, Camera.LEFT, left))
        if right is not None:
            picks.append((right.timestamp, 0, Camera.RIGHT, right))
        if not picks:
            return None
        _, _, camera, memory = max(picks)  # newest wins, left preferred on a tie
        binding = store.markers.get(memory.marker_id)
        if binding is None:
            raise UnknownMarker(f"remembered marker {memory.marker_id} has no shelf binding")
        shelf = store.shelves[binding.shelf_id]
        if camera is Camera.LEFT:
            heading = rotate_left(shelf.facing)
        else:
            heading = rotate_right(shelf.facing)
        return CartPoseEstimate(shelf.approach_cell, heading, memory.marker_id, camera)
