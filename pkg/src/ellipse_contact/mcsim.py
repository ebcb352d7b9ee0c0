"""NVT hard-ellipse Monte Carlo with cell-list neighbor search.

Hard-particle Metropolis: a trial move is accepted exactly when it creates
no overlap, decided by the analytic contact distance along each pair's
center line under the minimum image convention.  Supports binary (or
n-ary) mixtures of different sizes.  kT is irrelevant for hard cores; the
only control parameters are the move amplitudes.

Conventions:
  * positions live in [0, Lx) x [0, Ly), periodic in both directions;
  * one sweep = one trial move (translation plus rotation) per particle,
    particles visited in index order;
  * the cell size is at least max(a_i + a_j) over species pairs, so any
    overlapping pair is always within adjacent cells (the kernel bound
    d <= a1 + a2 makes this safe); grids thinner than 3 cells fall back to
    all-pairs;
  * a fixed seed reproduces the trajectory bit for bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .contact import closest_approach, TANGENT_RTOL
from .geometry import EllipseShape, PairConfiguration, UnitVec2

__all__ = [
    "PackingInfeasible",
    "HEX_PACKING_LIMIT",
    "MCConfig",
    "MCState",
    "MoveStats",
    "load_mc_config",
    "init_state",
    "mc_sweep",
    "order_parameter",
    "audit_overlaps",
    "run_simulation",
]

# densest packing of congruent ellipses (affine image of the hexagonal
# circle packing); configurations above it are rejected outright
HEX_PACKING_LIMIT = math.pi / (2.0 * math.sqrt(3.0))

_RENORM_EVERY = 1_000_000  # rotation moves between orientation renormalizations


class PackingInfeasible(ValueError):
    """Requested density cannot be realized (bound or lattice construction)."""


@dataclass(frozen=True)
class MCConfig:
    """Run parameters.  species maps shape -> number fraction; fractions
    must sum to one.  max_rotation is in radians."""

    n_particles: int
    species: tuple[tuple[EllipseShape, float], ...]
    box: tuple[float, float]
    max_translation: float
    max_rotation: float
    seed: int
    sweeps: int
    sample_every: int = 100
    periodic: bool = True

    def __post_init__(self) -> None:
        if self.n_particles < 1:
            raise ValueError("need at least one particle")
        if not self.species:
            raise ValueError("need at least one species")
        total = math.fsum(f for _, f in self.species)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"species fractions sum to {total!r}, not 1")
        if min(f for _, f in self.species) < 0.0:
            raise ValueError("species fractions must be non-negative")
        if self.max_translation < 0.0 or self.max_rotation < 0.0:
            raise ValueError("move amplitudes must be non-negative")
        if not self.periodic:
            raise ValueError("only periodic boxes are supported")
        lx, ly = self.box
        reach = 2.0 * max(s.a for s, _ in self.species)
        if lx < 2.0 * reach or ly < 2.0 * reach:
            raise ValueError(
                f"box {self.box} too small for minimum image; need >= {2.0 * reach}"
            )
        if self.packing_fraction() >= HEX_PACKING_LIMIT:
            raise PackingInfeasible(
                f"packing fraction {self.packing_fraction():.4f} exceeds "
                f"{HEX_PACKING_LIMIT:.4f}"
            )

    def species_counts(self) -> list[int]:
        """Particles per species by largest remainder, summing exactly."""
        quotas = [self.n_particles * f for _, f in self.species]
        counts = [int(q) for q in quotas]
        remainders = sorted(
            range(len(quotas)), key=lambda i: quotas[i] - counts[i], reverse=True
        )
        short = self.n_particles - sum(counts)
        for i in remainders[:short]:
            counts[i] += 1
        return counts

    def packing_fraction(self) -> float:
        counts = self.species_counts()
        area = math.fsum(c * s.area() for c, (s, _) in zip(counts, self.species))
        return area / (self.box[0] * self.box[1])


@dataclass
class MoveStats:
    attempted: int = 0
    accepted: int = 0

    @property
    def acceptance(self) -> float:
        return self.accepted / self.attempted if self.attempted else 0.0


@dataclass(eq=False)
class MCState:
    """Mutable simulation state: single writer, not internally parallel."""

    positions: np.ndarray  # (N, 2)
    orientations: np.ndarray  # (N, 2), unit rows
    species_index: np.ndarray  # (N,)
    shapes: tuple[EllipseShape, ...]
    box: tuple[float, float]
    cell_size: float
    n_cells: tuple[int, int]
    cell_members: list[list[int]]
    cell_of: np.ndarray  # (N,)
    stats: MoveStats = field(default_factory=MoveStats)
    rotations_since_renorm: int = 0

    def n_particles(self) -> int:
        return len(self.positions)

    def shape_of(self, i: int) -> EllipseShape:
        return self.shapes[self.species_index[i]]

    def cell_index(self, x: float, y: float) -> int:
        nx, ny = self.n_cells
        ix = int(x / self.box[0] * nx)
        iy = int(y / self.box[1] * ny)
        # guard against x == Lx after wrap rounding
        if ix >= nx:
            ix = nx - 1
        if iy >= ny:
            iy = ny - 1
        return ix + nx * iy

    def neighbor_candidates(self, x: float, y: float) -> list[int]:
        nx, ny = self.n_cells
        if nx < 3 or ny < 3:
            return list(range(self.n_particles()))
        ix = min(int(x / self.box[0] * nx), nx - 1)
        iy = min(int(y / self.box[1] * ny), ny - 1)
        out: list[int] = []
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                out.extend(self.cell_members[(ix + dx) % nx + nx * ((iy + dy) % ny)])
        return out

    def move_to_cell(self, i: int, new_cell: int) -> None:
        old = int(self.cell_of[i])
        if old == new_cell:
            return
        self.cell_members[old].remove(i)
        self.cell_members[new_cell].append(i)
        self.cell_of[i] = new_cell


def _min_image(dx: float, dy: float, lx: float, ly: float) -> tuple[float, float]:
    dx -= lx * round(dx / lx)
    dy -= ly * round(dy / ly)
    return dx, dy


def _pair_clear(
    shape_i: EllipseShape,
    shape_j: EllipseShape,
    ui: tuple[float, float],
    uj: tuple[float, float],
    dx: float,
    dy: float,
) -> bool:
    """True when the pair does not overlap (tangency counts as clear).

    The bound b_i+b_j <= d <= a_i+a_j lets cheap separation checks decide
    most pairs; only the annulus in between calls the contact kernel.  The
    prefilter bands keep the strict-inequality semantics of the kernel
    verdict, so cell-list and brute-force decisions agree exactly.
    """
    sep_sq = dx * dx + dy * dy
    reach = shape_i.a + shape_j.a
    if sep_sq >= reach * reach:
        return True
    core = shape_i.b + shape_j.b
    if sep_sq < core * core * (1.0 - 4.0 * TANGENT_RTOL):
        return False
    sep = math.sqrt(sep_sq)
    cfg = PairConfiguration(
        shape_i,
        shape_j,
        UnitVec2(ui[0], ui[1]),
        UnitVec2(uj[0], uj[1]),
        UnitVec2(dx, dy),
    )
    d = closest_approach(cfg).d
    return sep >= d * (1.0 - TANGENT_RTOL)


def _state_pair_clear(state: MCState, i: int, j: int) -> bool:
    lx, ly = state.box
    dx, dy = _min_image(
        state.positions[j, 0] - state.positions[i, 0],
        state.positions[j, 1] - state.positions[i, 1],
        lx,
        ly,
    )
    return _pair_clear(
        state.shape_of(i),
        state.shape_of(j),
        (state.orientations[i, 0], state.orientations[i, 1]),
        (state.orientations[j, 0], state.orientations[j, 1]),
        dx,
        dy,
    )


def init_state(cfg: MCConfig) -> MCState:
    """Particles on a dilated rectangular lattice, all oriented along x.

    Lattice pitches of twice the largest semi-axes guarantee a start with
    zero overlaps; PackingInfeasible if the box cannot hold the particles
    that way.
    """
    lx, ly = cfg.box
    max_a = max(s.a for s, _ in cfg.species)
    max_b = max(s.b for s, _ in cfg.species)
    pitch_x = 2.0 * max_a * (1.0 + 1e-9)
    pitch_y = 2.0 * max_b * (1.0 + 1e-9)
    nx_max = int(lx / pitch_x)
    ny_max = int(ly / pitch_y)
    n = cfg.n_particles
    if nx_max * ny_max < n:
        raise PackingInfeasible(
            f"lattice holds at most {nx_max * ny_max} particles of pitch "
            f"({pitch_x:.3g}, {pitch_y:.3g}) in box {cfg.box}; need {n}"
        )
    # grid as close to the box aspect as feasibility allows
    gx = max(1, min(nx_max, round(math.sqrt(n * (lx / pitch_x) / max(ly / pitch_y, 1e-300)))))
    while gx <= nx_max and math.ceil(n / gx) > ny_max:
        gx += 1
    gx = min(gx, nx_max)
    gy = math.ceil(n / gx)

    positions = np.empty((n, 2))
    for i in range(n):
        ix, iy = i % gx, i // gx
        positions[i, 0] = (ix + 0.5) * lx / gx
        positions[i, 1] = (iy + 0.5) * ly / gy
    orientations = np.zeros((n, 2))
    orientations[:, 0] = 1.0

    # interleave species deterministically (Bresenham-style quotas)
    counts = cfg.species_counts()
    quota = [0.0] * len(counts)
    assigned = [0] * len(counts)
    species_index = np.zeros(n, dtype=np.int64)
    for i in range(n):
        for s in range(len(counts)):
            quota[s] += counts[s] / n
        pick = max(
            (s for s in range(len(counts)) if assigned[s] < counts[s]),
            key=lambda s: quota[s] - assigned[s],
        )
        assigned[pick] += 1
        species_index[i] = pick

    shapes = tuple(s for s, _ in cfg.species)
    reach = 2.0 * max_a
    nx = max(1, int(lx / reach))
    ny = max(1, int(ly / reach))
    state = MCState(
        positions=positions,
        orientations=orientations,
        species_index=species_index,
        shapes=shapes,
        box=cfg.box,
        cell_size=reach,
        n_cells=(nx, ny),
        cell_members=[[] for _ in range(nx * ny)],
        cell_of=np.zeros(n, dtype=np.int64),
    )
    for i in range(n):
        c = state.cell_index(positions[i, 0], positions[i, 1])
        state.cell_of[i] = c
        state.cell_members[c].append(i)

    bad = audit_overlaps(state)
    if bad:
        raise PackingInfeasible(f"lattice construction produced overlaps: {bad[:3]}")
    return state


def mc_sweep(state: MCState, cfg: MCConfig, rng: np.random.Generator) -> MoveStats:
    """One sweep: a translation-plus-rotation trial per particle.

    Acceptance requires the trial to be clear of every cell-list neighbor;
    the state never contains an overlapping pair.
    """
    lx, ly = state.box
    sweep_stats = MoveStats()
    n = state.n_particles()
    for i in range(n):
        disp = rng.uniform(-cfg.max_translation, cfg.max_translation, 2)
        angle = rng.uniform(-cfg.max_rotation, cfg.max_rotation)
        x = (state.positions[i, 0] + disp[0]) % lx
        y = (state.positions[i, 1] + disp[1]) % ly
        c, s = math.cos(angle), math.sin(angle)
        ux0, uy0 = state.orientations[i]
        ux, uy = c * ux0 - s * uy0, s * ux0 + c * uy0

        shape_i = state.shape_of(i)
        ok = True
        for j in state.neighbor_candidates(x, y):
            if j == i:
                continue
            dx, dy = _min_image(
                state.positions[j, 0] - x, state.positions[j, 1] - y, lx, ly
            )
            if not _pair_clear(
                shape_i,
                state.shape_of(j),
                (ux, uy),
                (state.orientations[j, 0], state.orientations[j, 1]),
                dx,
                dy,
            ):
                ok = False
                break

        sweep_stats.attempted += 1
        if ok:
            sweep_stats.accepted += 1
            state.positions[i, 0] = x
            state.positions[i, 1] = y
            state.orientations[i, 0] = ux
            state.orientations[i, 1] = uy
            state.move_to_cell(i, state.cell_index(x, y))

        state.rotations_since_renorm += 1
        if state.rotations_since_renorm >= _RENORM_EVERY:
            norms = np.hypot(state.orientations[:, 0], state.orientations[:, 1])
            state.orientations /= norms[:, None]
            state.rotations_since_renorm = 0

    state.stats.attempted += sweep_stats.attempted
    state.stats.accepted += sweep_stats.accepted
    return sweep_stats


def order_parameter(state: MCState) -> float:
    """2D nematic order S = |mean of (cos 2t, sin 2t)| over orientations;
    1 for perfect alignment, O(1/sqrt(N)) for an isotropic system."""
    ux = state.orientations[:, 0]
    uy = state.orientations[:, 1]
    c2 = float(np.mean(ux * ux - uy * uy))
    s2 = float(np.mean(2.0 * ux * uy))
    return math.hypot(c2, s2)


def audit_overlaps(state: MCState) -> list[tuple[int, int]]:
    """All-pairs overlap audit under minimum image; empty list = clean.

    Pair separations are prefiltered in a vectorized pass; only pairs
    within kernel range are checked individually, with the same predicate
    the sweep uses, so audit and cell-list decisions cannot diverge.
    """
    n = state.n_particles()
    lx, ly = state.box
    pos = state.positions
    dx = pos[:, 0][None, :] - pos[:, 0][:, None]
    dy = pos[:, 1][None, :] - pos[:, 1][:, None]
    dx -= lx * np.round(dx / lx)
    dy -= ly * np.round(dy / ly)
    sep_sq = dx * dx + dy * dy
    reach = max(s.a for s in state.shapes) * 2.0
    ii, jj = np.nonzero(np.triu(sep_sq < reach * reach, k=1))
    bad = []
    for i, j in zip(ii.tolist(), jj.tolist()):
        if not _state_pair_clear(state, i, j):
            bad.append((i, j))
    return bad


# ---------------------------------------------------------------------------
# run configuration files and the trajectory writer

def _parse_species(text: str) -> list[tuple[EllipseShape, float]]:
    out = []
    for part in text.split(","):
        a, b, frac = (float(x) for x in part.strip().split(":"))
        out.append((EllipseShape(a, b), frac))
    return out


def load_mc_config(path: str) -> MCConfig:
    """Read a run configuration from JSON or key=value text.

    JSON schema: {"n_particles": int, "species": [{"a", "b", "fraction"}],
    "box": [Lx, Ly], "max_translation": float, "max_rotation_deg": float,
    "seed": int, "sweeps": int, "sample_every": int}.
    The key=value form uses the same keys with species as
    "a:b:fraction[, a:b:fraction...]" and box as "Lx Ly".
    """
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        raw = json.loads(text)
        species = [
            (EllipseShape(float(s["a"]), float(s["b"])), float(s["fraction"]))
            for s in raw["species"]
        ]
        box = (float(raw["box"][0]), float(raw["box"][1]))
        data = raw
    else:
        data = {}
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, value = line.partition("=")
            data[key.strip()] = value.strip()
        species = _parse_species(data["species"])
        box_parts = data["box"].replace(",", " ").split()
        box = (float(box_parts[0]), float(box_parts[1]))
    return MCConfig(
        n_particles=int(data["n_particles"]),
        species=tuple(species),
        box=box,
        max_translation=float(data["max_translation"]),
        max_rotation=math.radians(float(data["max_rotation_deg"])),
        seed=int(data["seed"]),
        sweeps=int(data["sweeps"]),
        sample_every=int(data.get("sample_every", 100)),
    )


def run_simulation(
    cfg: MCConfig,
    trajectory,
    audit: bool = False,
) -> dict:
    """Drive a full run, streaming snapshot records to ``trajectory``
    (any file-like object) as JSON lines and returning the summary dict.

    With audit=True an all-pairs overlap check runs after every sweep and
    any hit aborts the run; audit_failures lands in the summary either way.
    """
    state = init_state(cfg)
    rng = np.random.default_rng(cfg.seed)
    audit_failures = 0

    def write(record: dict) -> None:
        trajectory.write(json.dumps(record) + "\n")

    def snapshot(sweep: int, acceptance: float) -> dict:
        return {
            "sweep": sweep,
            "positions": [[float(x), float(y)] for x, y in state.positions],
            "orientations": [[float(x), float(y)] for x, y in state.orientations],
            "S": order_parameter(state),
            "acceptance": acceptance,
        }

    write(snapshot(0, 0.0))
    for sweep in range(1, cfg.sweeps + 1):
        stats = mc_sweep(state, cfg, rng)
        if audit:
            bad = audit_overlaps(state)
            if bad:
                audit_failures += len(bad)
                raise AssertionError(
                    f"overlap audit failed at sweep {sweep}: pairs {bad[:5]}"
                )
        if sweep % cfg.sample_every == 0 or sweep == cfg.sweeps:
            write(snapshot(sweep, stats.acceptance))

    summary = {
        "summary": True,
        "sweeps": cfg.sweeps,
        "n_particles": cfg.n_particles,
        "packing_fraction": cfg.packing_fraction(),
        "attempted": state.stats.attempted,
        "accepted": state.stats.accepted,
        "acceptance": state.stats.acceptance,
        "S": order_parameter(state),
        "audit_failures": audit_failures,
    }
    write(summary)
    return summary
