"""Cooperative grid tasks with switch-operated doors and a sparse team reward.

Three tasks share the same mechanics: agents move one cell per step on a
square grid, doors embedded in walls open while their switches are occupied
(memoryless, no latching), and the episode ends with +100 extrinsic reward
for everyone once all agents stand in the target room, or with 0 at the
step cap. Layouts are plain-text grid maps (see LEGEND); the shipped
generator renders each task's topology at any grid size, and custom maps
can be loaded from a file.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum


class LayoutError(ValueError):
    """Raised when a layout file violates the map invariants."""


class Action(IntEnum):
    UP = 0
    DOWN = 1
    LEFT = 2
    RIGHT = 3


# (dx, dy): x grows rightward, y grows downward.
DELTAS = {
    Action.UP: (0, -1),
    Action.DOWN: (0, 1),
    Action.LEFT: (-1, 0),
    Action.RIGHT: (1, 0),
}

NUM_ACTIONS = 4

LEGEND = """\
#   wall
.   floor
S   agent start cell (agents assigned in reading order)
T   target-room cell; the target room is the whole wall/door-bounded
    floor region connected to any T
1-9 switch k (floor)
A-E door k (sits in a wall; closed = wall, open = floor)
"""

DOOR_CHARS = "ABCDE"
SWITCH_CHARS = "123456789"


@dataclass(frozen=True)
class Layout:
    """Parsed geometry of one task map."""

    size: int
    walls: frozenset
    doors: tuple          # door k -> tuple of (x, y) cells sharing one flag
    switches: tuple       # switch k -> (x, y)
    targets: frozenset    # floor cells of the target room
    starts: tuple         # one (x, y) per agent, reading order

    def door_center(self, k: int) -> tuple:
        cells = self.doors[k]
        return cells[len(cells) // 2]


@dataclass(frozen=True)
class TaskSpec:
    """A task: its layout plus the switch -> doors opening rules."""

    name: str
    grid_size: int
    max_steps: int
    num_agents: int
    layout: Layout
    rules: tuple          # rules[switch_index] = tuple of door indices it opens

    @property
    def num_doors(self) -> int:
        return len(self.layout.doors)

    @property
    def obs_dim(self) -> int:
        return 2 + self.num_doors


@dataclass(frozen=True)
class JointState:
    positions: tuple      # per-agent (x, y)
    door_open: tuple      # per-door bool
    steps_elapsed: int


def parse_layout(text: str) -> Layout:
    """Parse a plain-text grid map and validate the geometry.

    The map must be square. Door cells must sit on a wall segment (both
    neighbours along one axis are walls, doors, or the boundary); switch,
    start, and target cells are floor. The target room is the connected
    floor region (walls and doors as boundaries) containing the T cells.
    """
    rows = [line for line in text.splitlines() if line.strip()]
    size = len(rows)
    if size == 0:
        raise LayoutError("empty layout")
    if any(len(r) != size for r in rows):
        raise LayoutError(f"layout must be a {size}x{size} square grid")

    walls = set()
    doors = {}
    switches = {}
    targets_seed = []
    starts = []
    for y, row in enumerate(rows):
        for x, ch in enumerate(row):
            if ch == "#":
                walls.add((x, y))
            elif ch == ".":
                pass
            elif ch == "S":
                starts.append((x, y))
            elif ch == "T":
                targets_seed.append((x, y))
            elif ch in SWITCH_CHARS:
                k = int(ch) - 1
                if k in switches:
                    raise LayoutError(f"switch {ch} appears twice")
                switches[k] = (x, y)
            elif ch in DOOR_CHARS:
                # A door may span several cells (all with the same letter);
                # they open and close together under one flag.
                doors.setdefault(DOOR_CHARS.index(ch), []).append((x, y))
            else:
                raise LayoutError(f"unknown map character {ch!r} at ({x}, {y})")

    for seq, kind in ((doors, "door"), (switches, "switch")):
        if sorted(seq) != list(range(len(seq))):
            raise LayoutError(f"{kind} labels must be contiguous from the first symbol")
    if not doors:
        raise LayoutError("layout has no doors")
    if not switches:
        raise LayoutError("layout has no switches")
    if not targets_seed:
        raise LayoutError("layout has no target cells")
    if not starts:
        raise LayoutError("layout has no start cells")

    door_cells = {cell for cells in doors.values() for cell in cells}

    def wall_like(cx, cy):
        if not (0 <= cx < size and 0 <= cy < size):
            return True
        return (cx, cy) in walls or (cx, cy) in door_cells

    for k, cells in sorted(doors.items()):
        for (x, y) in cells:
            vertical = wall_like(x, y - 1) and wall_like(x, y + 1)
            horizontal = wall_like(x - 1, y) and wall_like(x + 1, y)
            if not (vertical or horizontal):
                raise LayoutError(f"door {DOOR_CHARS[k]} at ({x}, {y}) is not on a wall segment")

    # Flood-fill the target room across floor-like cells; doors bound rooms.
    passable = {
        (x, y)
        for y in range(size)
        for x in range(size)
        if (x, y) not in walls and (x, y) not in door_cells
    }
    targets = set()
    frontier = list(targets_seed)
    while frontier:
        cell = frontier.pop()
        if cell in targets or cell not in passable:
            continue
        targets.add(cell)
        x, y = cell
        frontier.extend([(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)])

    return Layout(
        size=size,
        walls=frozenset(walls),
        doors=tuple(tuple(sorted(doors[k])) for k in sorted(doors)),
        switches=tuple(switches[k] for k in sorted(switches)),
        targets=frozenset(targets),
        starts=tuple(starts),
    )


def render_layout(layout: Layout) -> str:
    """Inverse of parse_layout (target room rendered as T everywhere)."""
    grid = [["." for _ in range(layout.size)] for _ in range(layout.size)]
    for (x, y) in layout.walls:
        grid[y][x] = "#"
    for (x, y) in layout.targets:
        grid[y][x] = "T"
    for k, (x, y) in enumerate(layout.switches):
        grid[y][x] = SWITCH_CHARS[k]
    for k, cells in enumerate(layout.doors):
        for (x, y) in cells:
            grid[y][x] = DOOR_CHARS[k]
    for (x, y) in layout.starts:
        grid[y][x] = "S"
    return "\n".join("".join(row) for row in grid)


def _grid(size):
    return [["." for _ in range(size)] for _ in range(size)]


def _pass_text(n: int) -> str:
    if n < 10:
        raise LayoutError("pass needs a grid of at least 10x10")
    mid = n // 2
    g = _grid(n)
    # The dividing wall is two cells thick; the door is a three-row gap
    # through both columns sharing one flag, so passing takes two
    # consecutive open steps: a partner has to hold the switch, a lucky
    # one-step window is not enough.
    for y in range(n):
        g[y][mid] = "#"
        g[y][mid + 1] = "#"
    for y in range(n):
        for x in range(mid + 2, n):
            g[y][x] = "T"
    for y in (n // 2 - 1, n // 2, n // 2 + 1):
        g[y][mid] = "A"
        g[y][mid + 1] = "A"
    # Switches sit against the wall so a holder can stand still by pushing
    # into it (the action set has no explicit stay). Switch 1 is beside the
    # door; switch 2 sits a few rows into the target room.
    g[n // 2 - 2][mid - 1] = "1"
    g[n // 2 + 4][mid + 2] = "2"
    # Fixed starts toward the west side of the left room, level with the door.
    g[n // 2 - 1][2] = "S"
    g[n // 2 + 1][2] = "S"
    return "\n".join("".join(row) for row in g)


def _three_room_text(n: int, num_agents: int, target_band: int, extra_doors: bool) -> str:
    """Left start room plus three right rooms; shared by the harder tasks.

    target_band selects which right room (0 top, 1 middle, 2 bottom) is the
    goal; extra_doors adds the two horizontal-wall doors between adjacent
    right rooms used by the three-agent task.
    """
    if n < 9:
        raise LayoutError("three-room layouts need a grid of at least 9x9")
    mid = n // 2
    r1, r2 = n // 3, 2 * n // 3
    g = _grid(n)
    for y in range(n):
        g[y][mid] = "#"
    for x in range(mid, n):
        g[r1][x] = "#"
        g[r2][x] = "#"
    bands = ((0, r1), (r1 + 1, r2), (r2 + 1, n))
    for y in range(*bands[target_band]):
        for x in range(mid + 1, n):
            g[y][x] = "T"
    # Vertical-wall doors are three-cell gaps clamped inside each room band.
    bands_ends = (r1, r2, n)
    bands_starts = (0, r1 + 1, r2 + 1)
    door_ys = (r1 // 2, (r1 + r2) // 2, (r2 + n) // 2)
    for k, y in enumerate(door_ys):
        for dy in (y - 1, y, y + 1):
            if bands_starts[k] <= dy < bands_ends[k]:
                g[dy][mid] = DOOR_CHARS[k]
    if extra_doors:
        sx = (mid + n) // 2
        for dx in (sx - 1, sx, sx + 1):
            g[r1][dx] = "D"
            g[r2][dx] = "E"
    # Switches sit against the dividing wall beside their door so a holder
    # can stand still by pushing into the wall. Switch 1 lives in the left
    # room; switch k+1 in right room k (clamped inside the room band).
    g[min(door_ys[0] + 2, r1 - 1)][mid - 1] = "1"
    for k, y in enumerate(door_ys):
        g[min(y + 2, bands_ends[k] - 1)][mid + 1] = SWITCH_CHARS[k + 1]
    start_ys = (2, n - 3) if num_agents == 2 else (2, n // 2 + 1, n - 3)
    for y in start_ys:
        g[y][1] = "S"
    return "\n".join("".join(row) for row in g)


# name -> (num_agents, rules, layout generator); rules[switch] = doors opened.
TASKS = {
    "pass": (
        2,
        ((0,), (0,)),                       # any occupied switch opens the door
        _pass_text,
    ),
    "secret_room": (
        2,
        ((0, 1, 2), (0,), (1,), (2,)),      # switch 1 opens all, switch k+1 opens door k
        lambda n: _three_room_text(n, 2, target_band=1, extra_doors=False),
    ),
    "multi_room": (
        3,
        ((0,), (2,), (3, 4), (1,)),         # sw1->d1, sw2->d3, sw3->d4+d5, sw4->d2
        lambda n: _three_room_text(n, 3, target_band=1, extra_doors=True),
    ),
}


def make_task(name: str, grid_size: int = 30, max_steps: int = 300, layout_text: str | None = None) -> TaskSpec:
    """Build a TaskSpec; layout_text overrides the generated map."""
    key = name.lower()
    if key not in TASKS:
        raise LayoutError(f"unknown task {name!r}; expected one of {sorted(TASKS)}")
    num_agents, rules, generator = TASKS[key]
    if max_steps < 1:
        raise LayoutError("max_steps must be positive")
    layout = parse_layout(layout_text if layout_text is not None else generator(grid_size))
    if layout_text is not None and layout.size != grid_size:
        raise LayoutError(f"layout is {layout.size}x{layout.size}, expected {grid_size}")
    if len(layout.starts) != num_agents:
        raise LayoutError(f"{name} needs {num_agents} start cells, layout has {len(layout.starts)}")
    if len(layout.switches) != len(rules):
        raise LayoutError(f"{name} rules cover {len(rules)} switches, layout has {len(layout.switches)}")
    for sw, opened in enumerate(rules):
        for d in opened:
            if d >= len(layout.doors):
                raise LayoutError(f"switch {sw + 1} opens missing door {d + 1}")
    return TaskSpec(
        name=key,
        grid_size=layout.size,
        max_steps=max_steps,
        num_agents=num_agents,
        layout=layout,
        rules=rules,
    )


def load_task(name: str, layout_path, max_steps: int = 300) -> TaskSpec:
    """Build a TaskSpec from a layout file."""
    with open(layout_path) as fh:
        text = fh.read()
    size = len([line for line in text.splitlines() if line.strip()])
    return make_task(name, grid_size=size, max_steps=max_steps, layout_text=text)


def evaluate_doors(positions, spec: TaskSpec) -> tuple:
    """Door flags as a pure function of agent positions (no latching)."""
    occupied = set(positions)
    flags = [False] * spec.num_doors
    for sw, cell in enumerate(spec.layout.switches):
        if cell in occupied:
            for d in spec.rules[sw]:
                flags[d] = True
    return tuple(flags)


def observe(state: JointState, agent: int) -> tuple:
    """Agent's local view: own (x, y) plus one 0/1 flag per door."""
    x, y = state.positions[agent]
    return (x, y) + tuple(int(f) for f in state.door_open)


class GridEnv:
    """One mutable environment instance; safe to run many in parallel."""

    def __init__(self, spec: TaskSpec):
        self.spec = spec
        self._walls = spec.layout.walls
        self._door_index = {
            cell: k for k, cells in enumerate(spec.layout.doors) for cell in cells
        }
        self._targets = spec.layout.targets
        self.state: JointState | None = None
        self.done = False

    def reset(self, seed: int | None = None):
        """Fixed deterministic starts; `seed` is accepted for interface
        symmetry but transitions and starts carry no randomness."""
        del seed
        starts = self.spec.layout.starts
        self.state = JointState(
            positions=starts,
            door_open=evaluate_doors(starts, self.spec),
            steps_elapsed=0,
        )
        self.done = False
        obs = tuple(observe(self.state, i) for i in range(self.spec.num_agents))
        return self.state, obs

    def step(self, actions):
        """Move all agents simultaneously, then re-evaluate the doors.

        Returns (state, per-agent observation, extrinsic reward, done).
        A move into a wall, a closed door, or past the boundary leaves the
        agent in place; agents may share a cell.
        """
        if self.state is None:
            raise RuntimeError("step before reset")
        if self.done:
            raise RuntimeError("step after the episode has ended")
        if len(actions) != self.spec.num_agents:
            raise ValueError(f"expected {self.spec.num_agents} actions, got {len(actions)}")
        size = self.spec.grid_size
        door_open = self.state.door_open
        new_positions = []
        for (x, y), a in zip(self.state.positions, actions):
            dx, dy = DELTAS[Action(a)]
            nx, ny = x + dx, y + dy
            cell = (nx, ny)
            blocked = (
                not (0 <= nx < size and 0 <= ny < size)
                or cell in self._walls
                or (cell in self._door_index and not door_open[self._door_index[cell]])
            )
            new_positions.append(cell if not blocked else (x, y))
        positions = tuple(new_positions)
        state = JointState(
            positions=positions,
            door_open=evaluate_doors(positions, self.spec),
            steps_elapsed=self.state.steps_elapsed + 1,
        )
        self.state = state
        success = all(p in self._targets for p in positions)
        self.done = success or state.steps_elapsed >= self.spec.max_steps
        r_ext = 100.0 if success else 0.0
        obs = tuple(observe(state, i) for i in range(self.spec.num_agents))
        return state, obs, r_ext, self.done

    def render(self) -> str:
        """Text dump of the current state (agents drawn as a, b, c...)."""
        base = render_layout(self.spec.layout).splitlines()
        grid = [list(row) for row in base]
        for k, cells in enumerate(self.spec.layout.doors):
            for (x, y) in cells:
                grid[y][x] = DOOR_CHARS[k] if (self.state and self.state.door_open[k]) else "#"
        if self.state is not None:
            for i, (x, y) in enumerate(self.state.positions):
                grid[y][x] = chr(ord("a") + i)
        return "\n".join("".join(row) for row in grid)
