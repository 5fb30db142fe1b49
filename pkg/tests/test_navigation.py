import random

import pytest

from cartassist.clients import EchoResponder, MockResponder
from cartassist.errors import InvalidCell, NoPath
from cartassist.geometry import Direction
from cartassist.navigation import (
    Forward,
    Instruction,
    TurnAround,
    TurnLeft,
    TurnRight,
    astar,
    moves_to_instructions,
    path_to_moves,
    rephrase_instructions,
)
from cartassist.store import CellKind, StoreMap, load_store

from helpers import dijkstra_all, dijkstra_cost, random_grid, replay_moves, walkable_cells


def open_grid(width, height):
    return StoreMap(width, height, tuple([CellKind.WALKABLE] * (width * height)))


def test_start_equals_goal():
    plan = astar(open_grid(3, 3), (1, 1), (1, 1))
    assert plan.cells == ((1, 1),)
    assert plan.cost == 0


def test_empty_grid_diagonal_cost():
    grid = open_grid(5, 5)
    plan = astar(grid, (0, 0), (4, 4))
    assert plan.cost == 8
    assert plan.cost == dijkstra_cost(grid, (0, 0), (4, 4))


def test_wall_blocks_path():
    cells = [CellKind.WALKABLE] * 25
    for y in range(5):
        cells[y * 5 + 2] = CellKind.BLOCKED
    grid = StoreMap(5, 5, tuple(cells))
    with pytest.raises(NoPath):
        astar(grid, (0, 0), (4, 4))


def test_invalid_cells_rejected():
    cells = [CellKind.WALKABLE] * 9
    cells[4] = CellKind.BLOCKED
    grid = StoreMap(3, 3, tuple(cells))
    with pytest.raises(InvalidCell):
        astar(grid, (1, 1), (0, 0))
    with pytest.raises(InvalidCell):
        astar(grid, (0, 0), (5, 5))


def test_plan_validity_invariants():
    rng = random.Random(99)
    for _ in range(20):
        grid = random_grid(rng, 12, 12)
        cells = walkable_cells(grid)
        start, goal = rng.choice(cells), rng.choice(cells)
        if dijkstra_cost(grid, start, goal) is None:
            continue
        plan = astar(grid, start, goal)
        assert plan.cells[0] == start and plan.cells[-1] == goal
        assert plan.cost == len(plan.cells) - 1
        for a, b in zip(plan.cells, plan.cells[1:]):
            assert abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1
            assert grid.is_walkable(b)


def test_astar_matches_dijkstra_on_random_grids():
    rng = random.Random(4242)
    for _ in range(40):
        grid = random_grid(rng, 15, 15)
        cells = walkable_cells(grid)
        start = rng.choice(cells)
        distances = dijkstra_all(grid, start)
        reachable = [c for c in distances if c != start]
        if not reachable:
            continue
        goal = rng.choice(reachable)
        assert astar(grid, start, goal).cost == distances[goal]


def test_single_cell_plan_gives_no_moves():
    plan = astar(open_grid(3, 3), (0, 0), (0, 0))
    assert path_to_moves(plan, Direction.EAST) == []


def test_straight_run_merges():
    grid = open_grid(5, 1)
    plan = astar(grid, (0, 0), (3, 0))
    assert path_to_moves(plan, Direction.EAST) == [Forward(3)]


def test_l_shaped_path_turns_left():
    # hand replay: 2 east then 2 north from heading East
    from cartassist.navigation import RoutePlan

    plan = RoutePlan(((0, 2), (1, 2), (2, 2), (2, 1), (2, 0)), 4)
    moves = path_to_moves(plan, Direction.EAST)
    assert moves == [Forward(2), TurnLeft(), Forward(2)]


def test_initial_turn_before_forward():
    from cartassist.navigation import RoutePlan

    plan = RoutePlan(((0, 0), (0, 1)), 1)
    assert path_to_moves(plan, Direction.EAST) == [TurnRight(), Forward(1)]
    assert path_to_moves(plan, Direction.NORTH) == [TurnAround(), Forward(1)]


def test_moves_replay_identity_on_random_plans():
    rng = random.Random(31337)
    for _ in range(50):
        grid = random_grid(rng, 15, 15)
        cells = walkable_cells(grid)
        start = rng.choice(cells)
        distances = dijkstra_all(grid, start)
        reachable = [c for c in distances if distances[c] >= 1]
        if not reachable:
            continue
        goal = rng.choice(reachable)
        plan = astar(grid, start, goal)
        heading = rng.choice(list(Direction))
        moves = path_to_moves(plan, heading)
        replayed, _ = replay_moves(start, heading, moves)
        assert tuple(replayed) == plan.cells
        # structural invariants: merged forwards, no opposite turn pairs
        for a, b in zip(moves, moves[1:]):
            assert not (isinstance(a, Forward) and isinstance(b, Forward))
            assert not (isinstance(a, TurnLeft) and isinstance(b, TurnRight))
            assert not (isinstance(a, TurnRight) and isinstance(b, TurnLeft))


def test_turn_right_instruction_text(phrasebook, sample_store):
    instructions = moves_to_instructions([TurnRight()], sample_store.map, phrasebook)
    assert instructions[0].text == "Turn right."


def test_forward_crossing_two_aisles(phrasebook, sample_store):
    # sample store annotates aisle columns 4 and 8; walking east along row 3
    # from x=2 to x=10 crosses both
    instructions = moves_to_instructions(
        [Forward(8)],
        sample_store.map,
        phrasebook,
        start_cell=(2, 3),
        start_heading=Direction.EAST,
        destination_section="Instant Foods",
    )
    assert "two aisles" in instructions[0].text
    assert instructions[0].aisle_count == 2
    assert instructions[-1].text == "You have arrived at the Instant Foods section."


def test_empty_moves_still_announce_arrival(phrasebook, sample_store):
    instructions = moves_to_instructions(
        [], sample_store.map, phrasebook, destination_section="Dairy"
    )
    assert [i.text for i in instructions] == ["You have arrived at the Dairy section."]


def test_instruction_count_is_moves_plus_one(phrasebook, sample_store):
    moves = [TurnLeft(), Forward(3), TurnRight(), Forward(1)]
    instructions = moves_to_instructions(moves, sample_store.map, phrasebook, destination_section="Bakery")
    assert len(instructions) == len(moves) + 1
    assert [i.step for i in instructions[:-1]] == moves
    assert instructions[-1].step is None


def test_forward_without_geometry_renders_meters(phrasebook, sample_store):
    instructions = moves_to_instructions([Forward(4)], sample_store.map, phrasebook)
    assert instructions[0].text == "Go straight for two meters."  # 4 cells * 0.5 m


def test_vertical_run_does_not_count_aisles(phrasebook, sample_store):
    instructions = moves_to_instructions(
        [Forward(2)],
        sample_store.map,
        phrasebook,
        start_cell=(5, 1),
        start_heading=Direction.SOUTH,
    )
    assert instructions[0].aisle_count is None
    assert instructions[0].text == "Go straight for one meter."


def test_rephrase_echo_keeps_instructions(phrasebook, sample_store):
    base = moves_to_instructions([TurnRight()], sample_store.map, phrasebook, destination_section="Dairy")

    class Verbatim:
        def respond(self, prompt, images=()):
            # echo back just the original instruction text
            return prompt.rsplit(": ", 1)[1]

    assert rephrase_instructions(base, Verbatim()) == base


def test_rephrase_falls_back_on_failure(phrasebook, sample_store):
    base = moves_to_instructions([TurnRight()], sample_store.map, phrasebook, destination_section="Dairy")
    failing = MockResponder(fail=True)
    assert rephrase_instructions(base, failing) == base


def test_rephrase_substitutes_text_keeps_steps(phrasebook, sample_store):
    base = moves_to_instructions([TurnRight()], sample_store.map, phrasebook, destination_section="Dairy")

    class Mapper:
        def respond(self, prompt, images=()):
            if "Turn right." in prompt:
                return "Please turn to your right."
            return ""

    swapped = rephrase_instructions(base, Mapper())
    assert swapped[0].text == "Please turn to your right."
    assert swapped[0].step == base[0].step
    assert swapped[1] == base[1]  # empty reply falls back verbatim
