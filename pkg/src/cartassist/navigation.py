"""A* route planning on the store grid and humanized turn-by-turn narration.

Planning minimizes f(n) = g(n) + h(n) with unit step costs and the Manhattan
heuristic, which is admissible on a 4-connected grid, so returned plans are
cost-optimal.  Tie-breaks (lower f, then deeper g, then neighbors continuing
the current heading before N, E, S, W) only stabilize which optimal path is
picked, keeping the narrated instructions stable between runs.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .errors import InvalidCell, NoPath
from .geometry import (
    Cell,
    Direction,
    direction_between,
    manhattan,
    opposite,
    rotate_left,
    rotate_right,
    step_cell,
)
from .store import StoreMap
from .templates import Phrasebook, aisle_phrase, meters_phrase

_CARDINAL_ORDER = (Direction.NORTH, Direction.EAST, Direction.SOUTH, Direction.WEST)


@dataclass(frozen=True)
class RoutePlan:
    cells: tuple[Cell, ...]
    cost: int


@dataclass(frozen=True)
class Forward:
    count: int


@dataclass(frozen=True)
class TurnLeft:
    pass


@dataclass(frozen=True)
class TurnRight:
    pass


@dataclass(frozen=True)
class TurnAround:
    pass


MoveStep = Forward | TurnLeft | TurnRight | TurnAround


@dataclass(frozen=True)
class Instruction:
    text: str
    step: MoveStep | None  # None for the arrival sentence
    aisle_count: int | None = None


def astar(store_map: StoreMap, start: Cell, goal: Cell) -> RoutePlan:
    """Cost-minimal walkable path from start to goal, inclusive of both."""
    for name, cell in (("start", start), ("goal", goal)):
        if not store_map.is_walkable(cell):
            raise InvalidCell(f"{name} cell {cell} is not walkable")
    if start == goal:
        return RoutePlan((start,), 0)

    counter = 0
    open_heap = [(manhattan(start, goal), 0, counter, start)]
    came_from: dict[Cell, tuple[Cell, Direction]] = {}
    g_score: dict[Cell, int] = {start: 0}
    closed: set[Cell] = set()

    while open_heap:
        _, neg_g, _, current = heapq.heappop(open_heap)
        if current in closed:
            continue
        closed.add(current)
        if current == goal:
            cells = [current]
            while cells[-1] in came_from:
                cells.append(came_from[cells[-1]][0])
            cells.reverse()
            return RoutePlan(tuple(cells), -neg_g)

        incoming = came_from[current][1] if current in came_from else None
        order = [incoming] if incoming else []
        order += [d for d in _CARDINAL_ORDER if d is not incoming]
        for direction in order:
            neighbor = step_cell(current, direction)
            if not store_map.is_walkable(neighbor) or neighbor in closed:
                continue
            tentative = g_score[current] + 1
            if tentative < g_score.get(neighbor, 1 << 30):
                g_score[neighbor] = tentative
                came_from[neighbor] = (current, direction)
                counter += 1
                heapq.heappush(
                    open_heap,
                    (tentative + manhattan(neighbor, goal), -tentative, counter, neighbor),
                )
    raise NoPath(f"no walkable path from {start} to {goal}")


def path_to_moves(plan: RoutePlan, start_heading: Direction) -> list[MoveStep]:
    """Turn a cell path into turns and maximally merged forward runs."""
    moves: list[MoveStep] = []
    heading = start_heading
    run = 0
    for a, b in zip(plan.cells, plan.cells[1:]):
        direction = direction_between(a, b)
        if direction is not heading:
            if run:
                moves.append(Forward(run))
                run = 0
            if direction is rotate_left(heading):
                moves.append(TurnLeft())
            elif direction is rotate_right(heading):
                moves.append(TurnRight())
            elif direction is opposite(heading):
                moves.append(TurnAround())
            heading = direction
        run += 1
    if run:
        moves.append(Forward(run))
    return moves


def _aisles_crossed(start: Cell, heading: Direction, count: int, store_map: StoreMap) -> int:
    """Annotated aisle columns crossed by a forward run, endpoint inclusive."""
    if not store_map.aisle_columns or heading not in (Direction.EAST, Direction.WEST):
        return 0
    end = step_cell(start, heading, count)
    low, high = sorted((start[0], end[0]))
    if heading is Direction.EAST:
        return sum(1 for c in store_map.aisle_columns if low < c <= high)
    return sum(1 for c in store_map.aisle_columns if low <= c < high)


def moves_to_instructions(
    moves: list[MoveStep],
    store_map: StoreMap,
    phrasebook: Phrasebook,
    *,
    start_cell: Cell | None = None,
    start_heading: Direction | None = None,
    destination_section: str | None = None,
    cell_size_m: float = 0.5,
) -> list[Instruction]:
    """Render one sentence per move plus a final arrival sentence.

    Forward distances are phrased as aisles when the traversed segment
    crosses annotated aisle columns (which needs the start pose to replay the
    geometry) and as meters otherwise.
    """
    instructions: list[Instruction] = []
    cell, heading = start_cell, start_heading
    for step in moves:
        if isinstance(step, Forward):
            aisles = 0
            if cell is not None and heading is not None:
                aisles = _aisles_crossed(cell, heading, step.count, store_map)
                cell = step_cell(cell, heading, step.count)
            distance = aisle_phrase(aisles) if aisles else meters_phrase(step.count, cell_size_m)
            text = phrasebook.render("go_straight", distance=distance)
            instructions.append(Instruction(text, step, aisles or None))
        else:
            if heading is not None:
                if isinstance(step, TurnLeft):
                    heading = rotate_left(heading)
                elif isinstance(step, TurnRight):
                    heading = rotate_right(heading)
                else:
                    heading = opposite(heading)
            key = {TurnLeft: "turn_left", TurnRight: "turn_right", TurnAround: "turn_around"}[type(step)]
            instructions.append(Instruction(phrasebook.render(key), step))
    if destination_section:
        arrival = phrasebook.render("arrival_section", section=destination_section)
    else:
        arrival = phrasebook.render("arrival_generic")
    instructions.append(Instruction(arrival, None))
    return instructions


def rephrase_instructions(instructions: list[Instruction], chat_client) -> list[Instruction]:
    """Optionally re-word each instruction via a chat client.

    Any client failure or empty reply falls back to the template text, so the
    system degrades gracefully when the service is unavailable.
    """
    rephrased: list[Instruction] = []
    for instruction in instructions:
        text = instruction.text
        try:
            reply = chat_client.respond(
                "Rewrite this shopping-cart navigation instruction in one short, "
                f"friendly sentence: {instruction.text}"
            )
            if reply and reply.strip():
                text = reply.strip()
        except Exception:
            pass
        rephrased.append(Instruction(text, instruction.step, instruction.aisle_count))
    return rephrased
