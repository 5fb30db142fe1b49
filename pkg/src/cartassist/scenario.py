"""Scenario scripts and the headless task harness.

A script mirrors the shape of the evaluation tasks: a list of section or
product targets plus a policy and step budget.  The auto policy plays an
operator who literally executes the spoken instructions: it asks for
guidance by voice, resolves candidate choices, then walks the cart step by
step.  Success means every target's approach cell was reached in budget.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .clients import VirtualClock, mock_clients
from .config import Config
from .errors import ScriptError
from .events import ButtonVariant, PipelineEvent, format_trace
from .navigation import Forward, TurnAround, TurnLeft, TurnRight
from .pipeline import ResponseRecord
from .search import indexed_text
from .session import Session
from .simulator import CartPose, Command
from .store import Store
from .geometry import Direction


@dataclass(frozen=True)
class ScenarioTarget:
    kind: str  # section | product
    text: str


@dataclass
class ScenarioScript:
    targets: list[ScenarioTarget] = field(default_factory=list)
    seed: int = 0
    policy: str = "auto"  # auto | keys
    step_budget: int = 400
    start_pose: CartPose | None = None
    keys: str = ""


@dataclass
class ScenarioReport:
    success: bool
    elapsed_s: float
    query_count: int
    trace: list[PipelineEvent]
    target_results: list[tuple[ScenarioTarget, bool]] = field(default_factory=list)
    steps_used: int = 0


def parse_scenario(text: str) -> ScenarioScript:
    script = ScenarioScript()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if ":" not in line:
            raise ScriptError(f"line {line_no}: expected 'key: value', got {line!r}")
        key, value = (part.strip() for part in line.split(":", 1))
        if key == "target":
            parts = value.split(None, 1)
            if len(parts) != 2 or parts[0] not in ("section", "product"):
                raise ScriptError(f"line {line_no}: target must be 'section <name>' or 'product <text>'")
            script.targets.append(ScenarioTarget(parts[0], parts[1]))
        elif key == "seed":
            script.seed = _int(value, line_no)
        elif key == "step_budget":
            script.step_budget = _int(value, line_no)
        elif key == "policy":
            if value not in ("auto", "keys"):
                raise ScriptError(f"line {line_no}: policy must be auto or keys")
            script.policy = value
        elif key == "keys":
            script.keys = value.replace(" ", "")
        elif key == "start":
            try:
                x, y, heading = (p.strip() for p in value.split(","))
                script.start_pose = CartPose((int(x), int(y)), Direction(heading.upper()))
            except (ValueError, KeyError):
                raise ScriptError(f"line {line_no}: start must look like '2,3,E'") from None
        else:
            raise ScriptError(f"line {line_no}: unknown key {key!r}")
    return script


def _int(value: str, line_no: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise ScriptError(f"line {line_no}: expected an integer, got {value!r}") from None


def load_scenario(path: str | Path) -> ScenarioScript:
    with open(path, encoding="utf-8") as handle:
        return parse_scenario(handle.read())


class _Budget:
    def __init__(self, steps: int):
        self.remaining = steps
        self.used = 0

    def spend(self) -> bool:
        if self.remaining <= 0:
            return False
        self.remaining -= 1
        self.used += 1
        return True


class _AutoFollower:
    """Executes spoken guidance literally, one simulator command per step."""

    def __init__(self, session: Session, budget: _Budget):
        self.session = session
        self.budget = budget

    def ask(self, text: str) -> ResponseRecord:
        self.session.clients.recognizer.prime(text)
        return self.session.press_button(ButtonVariant.VOICE_COMMAND)

    def _step(self, command: Command) -> bool:
        if not self.budget.spend():
            return False
        self.session.step_cart(command)
        return True

    def ensure_localized(self) -> bool:
        """Rotate (and nudge) until the assistant's pose estimate is live and
        matches the true cart pose, so spoken routes start where the cart is."""
        for _ in range(12):
            estimate = self.session.tracker.pose_estimate(self.session.store)
            pose = self.session.world.pose
            if estimate is not None and estimate.cell == pose.cell and estimate.heading == pose.heading:
                return True
            if not self._step(Command.ROTATE_LEFT):
                return False
        return False

    def execute(self, record: ResponseRecord) -> bool:
        for instruction in record.instructions:
            step = instruction.step
            if step is None:
                continue
            if isinstance(step, Forward):
                for _ in range(step.count):
                    if not self._step(Command.MOVE_FORWARD):
                        return False
            elif isinstance(step, TurnLeft):
                if not self._step(Command.ROTATE_LEFT):
                    return False
            elif isinstance(step, TurnRight):
                if not self._step(Command.ROTATE_RIGHT):
                    return False
            elif isinstance(step, TurnAround):
                if not (self._step(Command.ROTATE_LEFT) and self._step(Command.ROTATE_LEFT)):
                    return False
        return True

    def navigate_to(self, query_text: str, goal_cell) -> bool:
        for _ in range(3):
            if self.session.world.pose.cell == goal_cell:
                return True
            if not self.ensure_localized():
                return False
            record = self.ask(f"take me to {query_text}")
            if record.kind != "navigate":
                return False
            if not self.execute(record):
                return False
            if self.session.world.pose.cell == goal_cell:
                return True
        return self.session.world.pose.cell == goal_cell

    def find_product(self, query: str) -> str | None:
        """'Where is X' plus a candidate choice when the query is ambiguous."""
        record = self.ask(f"where is {query}")
        if record.kind == "product_exact":
            return record.product_id
        if record.kind != "product_candidates":
            return None
        wanted = query.lower()
        choice = 1
        for number, (product_id, _) in enumerate(record.candidates, start=1):
            if wanted in indexed_text(self.session.store.products[product_id]):
                choice = number
                break
        followup = self.ask(f"option {('one', 'two', 'three')[choice - 1]}")
        return followup.product_id if followup.kind == "choice" else None


def run_scenario(
    script: ScenarioScript,
    store: Store,
    config: Config | None = None,
) -> ScenarioReport:
    config = config or Config()
    clock = VirtualClock()
    session = Session(store, config, mock_clients(clock), clock, start_pose=script.start_pose)
    budget = _Budget(script.step_budget)
    started = clock.now()

    results: list[tuple[ScenarioTarget, bool]] = []
    if script.policy == "keys":
        results = _run_keys(script, session, budget)
    else:
        follower = _AutoFollower(session, budget)
        for target in script.targets:
            results.append((target, _run_target(follower, target)))

    success = all(reached for _, reached in results)
    return ScenarioReport(
        success=success,
        elapsed_s=clock.now() - started,
        query_count=session.query_count,
        trace=session.core.trace,
        target_results=results,
        steps_used=budget.used,
    )


def _run_target(follower: _AutoFollower, target: ScenarioTarget) -> bool:
    store = follower.session.store
    if target.kind == "section":
        shelf = store.shelf_by_section(target.text)
        if shelf is None:
            return False
        return follower.navigate_to(target.text, shelf.approach_cell)
    product_id = follower.find_product(target.text)
    if product_id is None:
        return False
    shelf = store.shelves[store.products[product_id].shelf_id]
    return follower.navigate_to(indexed_text(store.products[product_id]), shelf.approach_cell)


_KEY_COMMANDS = {
    "w": Command.MOVE_FORWARD,
    "a": Command.ROTATE_LEFT,
    "d": Command.ROTATE_RIGHT,
}


def _run_keys(script: ScenarioScript, session: Session, budget: _Budget) -> list[tuple[ScenarioTarget, bool]]:
    visited = {session.world.pose.cell}
    for key in script.keys:
        if key == "x":
            session.press_button(ButtonVariant.SECTION_DESCRIPTION)
            continue
        command = _KEY_COMMANDS.get(key)
        if command is None:
            raise ScriptError(f"unknown key {key!r} in keys policy")
        if not budget.spend():
            break
        session.step_cart(command)
        visited.add(session.world.pose.cell)
    results = []
    for target in script.targets:
        shelf = session.store.shelf_by_section(target.text) if target.kind == "section" else None
        reached = shelf is not None and shelf.approach_cell in visited
        results.append((target, reached))
    return results


def report_text(report: ScenarioReport) -> str:
    lines = [
        f"success: {'true' if report.success else 'false'}",
        f"elapsed_s: {report.elapsed_s:.3f}",
        f"query_count: {report.query_count}",
        f"steps_used: {report.steps_used}",
    ]
    for target, reached in report.target_results:
        lines.append(f"target {target.kind} {target.text}: {'reached' if reached else 'missed'}")
    lines.append("trace:")
    lines.append(format_trace(report.trace).rstrip("\n"))
    return "\n".join(lines) + "\n"
