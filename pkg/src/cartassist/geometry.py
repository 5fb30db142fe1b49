"""Grid geometry shared by the store map, localization, navigation and simulator.

Coordinates are (x, y) with x growing east (to the right in the map file) and
y growing south (down the map file).  Angles for the camera model are measured
in a conventional y-up frame, so `to_math` flips the y axis; positive bearings
lie toward the rotate_left side of the heading.
"""

from __future__ import annotations

import math
from enum import Enum

Cell = tuple[int, int]


class Direction(str, Enum):
    NORTH = "N"
    EAST = "E"
    SOUTH = "S"
    WEST = "W"


DELTAS: dict[Direction, Cell] = {
    Direction.NORTH: (0, -1),
    Direction.EAST: (1, 0),
    Direction.SOUTH: (0, 1),
    Direction.WEST: (-1, 0),
}

_BY_DELTA = {v: k for k, v in DELTAS.items()}

ROTATE_LEFT = {
    Direction.NORTH: Direction.WEST,
    Direction.WEST: Direction.SOUTH,
    Direction.SOUTH: Direction.EAST,
    Direction.EAST: Direction.NORTH,
}

ROTATE_RIGHT = {v: k for k, v in ROTATE_LEFT.items()}

OPPOSITE = {
    Direction.NORTH: Direction.SOUTH,
    Direction.SOUTH: Direction.NORTH,
    Direction.EAST: Direction.WEST,
    Direction.WEST: Direction.EAST,
}


def rotate_left(d: Direction) -> Direction:
    return ROTATE_LEFT[d]


def rotate_right(d: Direction) -> Direction:
    return ROTATE_RIGHT[d]


def opposite(d: Direction) -> Direction:
    return OPPOSITE[d]


def step_cell(cell: Cell, d: Direction, count: int = 1) -> Cell:
    dx, dy = DELTAS[d]
    return (cell[0] + dx * count, cell[1] + dy * count)


def direction_between(a: Cell, b: Cell) -> Direction:
    """Direction of the single orthogonal step from a to b."""
    delta = (b[0] - a[0], b[1] - a[1])
    try:
        return _BY_DELTA[delta]
    except KeyError:
        raise ValueError(f"cells {a} and {b} are not orthogonally adjacent") from None


def manhattan(a: Cell, b: Cell) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def to_math(vec: tuple[float, float]) -> tuple[float, float]:
    """Map a grid-frame vector into the y-up frame used for angle math."""
    return (vec[0], -vec[1])


def heading_vector(d: Direction) -> tuple[float, float]:
    return to_math(DELTAS[d])


def signed_bearing_deg(heading: Direction, offset: tuple[float, float]) -> float:
    """Signed angle from the heading to a grid-frame offset, in degrees.

    Positive angles are toward the rotate_left side of the heading.
    """
    hx, hy = heading_vector(heading)
    ox, oy = to_math(offset)
    return math.degrees(math.atan2(hx * oy - hy * ox, hx * ox + hy * oy))


def wrap_deg(angle: float) -> float:
    """Wrap an angle into (-180, 180]."""
    wrapped = math.fmod(angle + 180.0, 360.0)
    if wrapped <= 0.0:
        wrapped += 360.0
    return wrapped - 180.0
