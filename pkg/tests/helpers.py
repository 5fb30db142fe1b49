"""Independent oracles and generators the tests check the implementation against.

Everything here deliberately re-derives expected results through a different
route than the code under test: Dijkstra instead of A*, literal replay instead
of move generation, closed-form memory reconstruction instead of incremental
state updates.
"""

from __future__ import annotations

import heapq
import random

from cartassist.geometry import DELTAS, Direction, opposite, rotate_left, rotate_right
from cartassist.localization import Camera, MarkerObservation
from cartassist.navigation import Forward, TurnAround, TurnLeft, TurnRight
from cartassist.store import CellKind, StoreMap


def dijkstra_cost(store_map: StoreMap, start, goal):
    """Uniform-cost search; returns None when the goal is unreachable."""
    distances = {start: 0}
    heap = [(0, start)]
    while heap:
        dist, cell = heapq.heappop(heap)
        if cell == goal:
            return dist
        if dist > distances.get(cell, 1 << 30):
            continue
        for dx, dy in DELTAS.values():
            neighbor = (cell[0] + dx, cell[1] + dy)
            if not store_map.is_walkable(neighbor):
                continue
            if dist + 1 < distances.get(neighbor, 1 << 30):
                distances[neighbor] = dist + 1
                heapq.heappush(heap, (dist + 1, neighbor))
    return None


def dijkstra_all(store_map: StoreMap, start):
    """Distances from start to every reachable cell."""
    distances = {start: 0}
    heap = [(0, start)]
    while heap:
        dist, cell = heapq.heappop(heap)
        if dist > distances.get(cell, 1 << 30):
            continue
        for dx, dy in DELTAS.values():
            neighbor = (cell[0] + dx, cell[1] + dy)
            if not store_map.is_walkable(neighbor):
                continue
            if dist + 1 < distances.get(neighbor, 1 << 30):
                distances[neighbor] = dist + 1
                heapq.heappush(heap, (dist + 1, neighbor))
    return distances


def random_grid(rng: random.Random, width=20, height=20, blocked_ratio=0.30) -> StoreMap:
    cells = [
        CellKind.BLOCKED if rng.random() < blocked_ratio else CellKind.WALKABLE
        for _ in range(width * height)
    ]
    return StoreMap(width, height, tuple(cells))


def walkable_cells(store_map: StoreMap):
    return [
        (x, y)
        for y in range(store_map.height)
        for x in range(store_map.width)
        if store_map.is_walkable((x, y))
    ]


def replay_moves(start, heading: Direction, moves):
    """Execute move steps literally; returns the visited cell sequence."""
    cells = [start]
    cell = start
    for step in moves:
        if isinstance(step, Forward):
            for _ in range(step.count):
                dx, dy = DELTAS[heading]
                cell = (cell[0] + dx, cell[1] + dy)
                cells.append(cell)
        elif isinstance(step, TurnLeft):
            heading = rotate_left(heading)
        elif isinstance(step, TurnRight):
            heading = rotate_right(heading)
        elif isinstance(step, TurnAround):
            heading = opposite(heading)
    return cells, heading


def memory_oracle(frames, t_expire_s):
    """Closed-form reconstruction of the side memories after a frame history.

    frames: ordered list of (now, observations).  For each camera the memory
    is the largest sighting of the latest frame that saw that camera, kept
    only if the final ingest time is within the expiry window.
    """
    result = {}
    final_now = frames[-1][0] if frames else 0.0
    for camera in (Camera.LEFT, Camera.RIGHT):
        latest_best = None
        for now, observations in frames:
            cam_obs = [o for o in observations if o.camera is camera]
            if cam_obs:
                latest_best = sorted(cam_obs, key=lambda o: (-o.apparent_size_px, o.marker_id))[0]
        if latest_best is None or final_now - latest_best.timestamp > t_expire_s:
            result[camera] = None
        else:
            result[camera] = (latest_best.marker_id, latest_best.timestamp)
    return result


def random_observation_frames(rng: random.Random, frame_count=30, marker_pool=8):
    """Randomized observation history with jittery timing for the replay test."""
    frames = []
    now = 0.0
    for _ in range(frame_count):
        now += rng.choice([0.1, 0.3, 0.5, 1.0, 2.0, 4.0])
        observations = []
        for camera in (Camera.LEFT, Camera.FRONT, Camera.RIGHT):
            for _ in range(rng.randrange(0, 3)):
                observations.append(
                    MarkerObservation(
                        marker_id=rng.randrange(marker_pool),
                        camera=camera,
                        apparent_size_px=rng.choice([20.0, 40.0, 40.0, 80.0, 160.0]),
                        timestamp=now,
                    )
                )
        frames.append((now, observations))
    return frames
