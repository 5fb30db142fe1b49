"""Acceptance suite: one test per release criterion, at its stated tolerance.

Each test prints a single [PASS]/[FAIL] line (bypassing pytest capture) so a
plain `pytest tests/test_acceptance.py` run shows the checklist.
"""

import functools
import random
import string
import sys
import time

import numpy as np
import pytest

from cartassist.clients import VirtualClock, mock_clients
from cartassist.config import Config, default_store_path
from cartassist.events import ButtonVariant, SpeechSegment
from cartassist.localization import Camera, LocalizationTracker, MarkerObservation
from cartassist.navigation import astar, moves_to_instructions, path_to_moves
from cartassist.pipeline import run_pipeline, segment_for_speech
from cartassist.scenario import load_scenario, run_scenario
from cartassist.search import (
    Candidates,
    EmbeddingVector,
    ExactMatch,
    TrigramEmbedder,
    build_index,
    cosine_similarity,
    indexed_text,
    search,
)
from cartassist.simulator import CartPose, Command, DetectionModel, SimWorld
from cartassist.store import load_store
from cartassist.templates import Phrasebook
from cartassist.navigation import Forward, TurnAround, TurnLeft, TurnRight
from importlib import resources

from helpers import dijkstra_all, memory_oracle, random_grid, random_observation_frames, walkable_cells
from test_pipeline import assert_lossless, cue_order_holds, golden_core, golden_events, GOLDEN_PATH


def criterion(label):
    """Print one [PASS]/[FAIL] line per criterion (run with `pytest -s` to see them)."""

    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                detail = fn(*args, **kwargs)
            except BaseException:
                print(f"\n[FAIL] {label}", flush=True)
                raise
            suffix = f" ({detail})" if detail else ""
            print(f"\n[PASS] {label}{suffix}", flush=True)

        return wrapper

    return decorate


@pytest.fixture(scope="module")
def store():
    return load_store(default_store_path().read_text(encoding="utf-8"))


@pytest.fixture(scope="module")
def index(store):
    return build_index(store, TrigramEmbedder())


# 1 -----------------------------------------------------------------------


@criterion("A* optimality: 200 seeded 20x20 grids, cost equals Dijkstra oracle, < 5 s")
def test_astar_optimality_against_dijkstra():
    started = time.monotonic()
    checked = 0
    for seed in range(200):
        rng = random.Random(1000 + seed)
        grid = random_grid(rng, 20, 20, blocked_ratio=0.30)
        cells = walkable_cells(grid)
        start = rng.choice(cells)
        distances = dijkstra_all(grid, start)
        reachable = [cell for cell in distances if cell != start]
        if not reachable:
            continue
        for goal in rng.sample(reachable, k=min(3, len(reachable))):
            plan = astar(grid, start, goal)
            assert plan.cost == distances[goal], f"seed {seed}: {start}->{goal}"
            checked += 1
    elapsed = time.monotonic() - started
    assert elapsed < 5.0, f"took {elapsed:.2f}s"
    return f"{checked} reachable pairs, {elapsed:.2f}s"


# 2 -----------------------------------------------------------------------


def _perturb(rng, text):
    words = text.split()
    op = rng.randrange(4)
    if op == 0 and len(words) > 1:
        words.pop(rng.randrange(len(words)))
        result = " ".join(words)
    elif op == 1:
        result = "".join(ch for ch in text if rng.random() > 0.3)
    elif op == 2 and len(text) > 3:
        i = rng.randrange(len(text) - 1)
        result = text[:i] + text[i + 1] + text[i] + text[i + 2 :]
    else:
        i = rng.randrange(len(text) + 1)
        result = text[:i] + rng.choice(string.ascii_lowercase) + text[i:]
    return result.strip() or text[: max(3, len(text) // 2)]


def _brute_force_top3(index, query_text):
    query = index.provider.embed(query_text)
    scored = []
    for product_id, vector in index.entries.items():
        scored.append((product_id, float(np.dot(query.values, vector.values))))
    scored.sort(key=lambda item: (-item[1], item[0]))
    return scored[:3]


@criterion("Search contract: exact hits at 1.0 +/- 1e-9, 50 perturbed queries match brute force, <= 3 candidates")
def test_search_contract(store, index):
    for product in store.products.values():
        outcome = search(indexed_text(product), index)
        assert isinstance(outcome, ExactMatch), product.product_id
        assert outcome.product_id == product.product_id
        assert abs(outcome.similarity - 1.0) <= 1e-9

    rng = random.Random(777)
    products = sorted(store.products.values(), key=lambda p: p.product_id)
    checked = 0
    while checked < 50:
        base = indexed_text(products[checked % len(products)])
        query = _perturb(rng, base)
        for _ in range(20):
            if not isinstance(search(query, index), ExactMatch):
                break
            query = _perturb(rng, query)
        outcome = search(query, index)
        assert isinstance(outcome, Candidates), f"query {query!r} still above threshold"
        assert len(outcome.items) <= 3
        oracle = _brute_force_top3(index, query)
        assert [pid for pid, _ in outcome.items] == [pid for pid, _ in oracle], f"query {query!r}"
        for (_, got), (_, expected) in zip(outcome.items, oracle):
            assert abs(got - expected) <= 1e-9
        checked += 1
    return f"20 exact + {checked} perturbed queries"


# 3 -----------------------------------------------------------------------


@criterion("Cosine properties: symmetry 1e-12, scale invariance 1e-9, range [-1, 1], 1000 pairs dim 256")
def test_cosine_properties():
    rng = np.random.default_rng(20240707)
    for _ in range(1000):
        a = EmbeddingVector(rng.normal(size=256))
        b = EmbeddingVector(rng.normal(size=256))
        forward = cosine_similarity(a, b)
        backward = cosine_similarity(b, a)
        assert abs(forward - backward) <= 1e-12
        k = float(rng.uniform(1e-3, 1e3))
        assert abs(cosine_similarity(EmbeddingVector(a.values * k), b) - forward) <= 1e-9
        assert -1.0 <= forward <= 1.0
    return "1000 pairs"


# 4 -----------------------------------------------------------------------


@criterion("Localization rules: replay oracle on 100 sequences, suppression and expiry on scripted timelines")
def test_localization_rules():
    for seed in range(100):
        rng = random.Random(9000 + seed)
        frames = random_observation_frames(rng)
        tracker = LocalizationTracker(t_expire_s=3.0)
        for now, observations in frames:
            tracker.ingest_frame(observations, now)
        expected = memory_oracle(frames, t_expire_s=3.0)
        state = tracker.state
        for camera, slot in ((Camera.LEFT, state.last_left), (Camera.RIGHT, state.last_right)):
            if expected[camera] is None:
                assert slot is None, f"seed {seed}"
            else:
                assert slot is not None and (slot.marker_id, slot.timestamp) == expected[camera], f"seed {seed}"

    # adversarial suppression timeline under a virtual clock
    tracker = LocalizationTracker(t_repeat_s=10.0)
    see = lambda m, t: [MarkerObservation(m, Camera.FRONT, 100.0, t)]
    assert tracker.select_announcement(see(5, 0.0), 0.0) == 5
    assert tracker.select_announcement(see(5, 4.0), 4.0) is None  # within interval
    assert tracker.select_announcement(see(9, 5.0), 5.0) == 9  # different marker overrides
    assert tracker.select_announcement(see(5, 6.0), 6.0) == 5  # other marker intervened
    assert tracker.select_announcement(see(5, 9.0), 9.0) is None
    assert tracker.select_announcement(see(5, 16.5), 16.5) == 5  # interval elapsed

    # expiry timeline
    store = load_store(default_store_path().read_text(encoding="utf-8"))
    tracker = LocalizationTracker(t_expire_s=3.0)
    tracker.ingest_frame([MarkerObservation(7, Camera.LEFT, 100.0, 0.0)], 0.0)
    tracker.ingest_frame([], 2.9)
    assert tracker.pose_estimate(store) is not None
    tracker.ingest_frame([], 3.5)
    assert tracker.pose_estimate(store) is None
    return "100 random sequences + scripted timelines"


# 5 -----------------------------------------------------------------------


def _execute_instruction_steps(world, instructions):
    for instruction in instructions:
        step = instruction.step
        if step is None:
            continue
        if isinstance(step, Forward):
            for _ in range(step.count):
                assert not world.step(Command.MOVE_FORWARD).bumped
        elif isinstance(step, TurnLeft):
            world.step(Command.ROTATE_LEFT)
        elif isinstance(step, TurnRight):
            world.step(Command.ROTATE_RIGHT)
        elif isinstance(step, TurnAround):
            world.step(Command.ROTATE_LEFT)
            world.step(Command.ROTATE_LEFT)


@criterion("Instruction loop closure: follower ends at the target approach cell for every start pose x product")
def test_instruction_loop_closure(store):
    phrasebook = Phrasebook()
    marker_of = {binding.shelf_id: binding.marker_id for binding in store.markers.values()}
    runs = 0
    for shelf in store.shelves.values():
        for camera in (Camera.LEFT, Camera.RIGHT):
            tracker = LocalizationTracker()
            tracker.ingest_frame(
                [MarkerObservation(marker_of[shelf.shelf_id], camera, 240.0, 0.0)], 0.0
            )
            pose = tracker.pose_estimate(store)
            assert pose.cell == shelf.approach_cell
            for product in store.products.values():
                goal = store.product_target(product.product_id).approach_cell
                plan = astar(store.map, pose.cell, goal)
                moves = path_to_moves(plan, pose.heading)
                section = store.shelves[product.shelf_id].section_name
                instructions = moves_to_instructions(
                    moves,
                    store.map,
                    phrasebook,
                    start_cell=pose.cell,
                    start_heading=pose.heading,
                    destination_section=section,
                )
                world = SimWorld(store, DetectionModel(), VirtualClock(), CartPose(pose.cell, pose.heading))
                _execute_instruction_steps(world, instructions)
                assert world.pose.cell == goal, f"{pose} -> {product.product_id}"
                runs += 1
    assert runs == len(store.shelves) * 2 * len(store.products)
    return f"{runs} start-pose x product routes, 100% arrivals"


# 6 -----------------------------------------------------------------------


@criterion("Pipeline determinism: golden two-button trace byte-for-byte, cue ordering on all traces")
def test_pipeline_determinism(store):
    golden = GOLDEN_PATH.read_text(encoding="utf-8")
    for _ in range(3):
        result = run_pipeline(golden_core(store), golden_events())
        assert result.trace_text() == golden
        assert cue_order_holds(result.trace)
    threaded = run_pipeline(golden_core(store), golden_events(), scheduler="threaded")
    assert threaded.trace_text() == golden
    assert cue_order_holds(threaded.trace)
    return "sync x3 + threaded runs identical"


# 7 -----------------------------------------------------------------------


@criterion("Scenario harness: navigation (3 sections) and products (2 with disambiguation) succeed < 10 s")
def test_scenario_harness(store):
    started = time.monotonic()
    navigation = run_scenario(
        load_scenario(str(resources.files("cartassist").joinpath("data/scenarios/navigation.scenario"))),
        store,
    )
    products = run_scenario(
        load_scenario(str(resources.files("cartassist").joinpath("data/scenarios/products.scenario"))),
        store,
    )
    elapsed = time.monotonic() - started
    assert navigation.success and len(navigation.target_results) == 3
    assert navigation.query_count >= 3
    assert products.success and len(products.target_results) == 2
    assert products.query_count >= 2
    candidate_lines = [
        e.text for e in products.trace if isinstance(e, SpeechSegment) and "Option" in e.text
    ]
    assert candidate_lines, "product task never went through candidate disambiguation"
    assert elapsed < 10.0
    return f"wall {elapsed:.2f}s, queries {navigation.query_count}+{products.query_count}"


# 8 -----------------------------------------------------------------------


@criterion("Segmentation: lossless concatenation and max-length bounds on 500 random texts")
def test_segmentation_contract():
    rng = random.Random(31415)
    words = ["turn", "left", "aisle", "shelf", "the", "price", "of", "ahead", "meters", "section"]
    for _ in range(500):
        text = ""
        for _ in range(rng.randrange(1, 80)):
            text += rng.choice(words)
            text += rng.choice([" ", " ", " ", ". ", "! ", "? ", ", "])
        text = text.strip()
        max_chars = rng.choice([40, 80, 200])
        segments = segment_for_speech(text, max_chars)
        assert_lossless(text, segments)
        for segment in segments:
            assert len(segment) <= max_chars
    return "500 texts at 40/80/200 chars"
