"""Cell-centered phase-space grids, density fields, and quadrature helpers.

Fields live on uniform tensor grids over up to three named axes in the
fixed order (x, y, v): position, memory, velocity.  Values are cell
averages; the function is taken to vanish outside the box, so every
scheme built on these grids uses zero-value ghost cells.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

__all__ = [
    "Axis",
    "Splitting",
    "PhaseGrid",
    "DensityField",
    "default_phase_grid",
    "uniform_density",
    "gaussian_density",
    "histogram_density",
    "marginal",
    "consensus_from_density",
    "l1_distance",
]

AXIS_ORDER = ("x", "y", "v")


class Splitting(enum.Enum):
    LIE = "lie"
    STRANG = "strang"


@dataclass(frozen=True)
class Axis:
    """Uniform cell-centered axis on [lower, upper] with n cells."""

    lower: float
    upper: float
    n: int

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError(f"axis requires lower < upper, got [{self.lower}, {self.upper}]")
        if self.n < 8:
            raise ValueError(f"axis requires at least 8 cells, got {self.n}")

    @property
    def spacing(self) -> float:
        return (self.upper - self.lower) / self.n

    @cached_property
    def centers(self) -> np.ndarray:
        c = self.lower + (np.arange(self.n) + 0.5) * self.spacing
        c.setflags(write=False)
        return c

    @cached_property
    def interfaces(self) -> np.ndarray:
        e = self.lower + np.arange(self.n + 1) * self.spacing
        e.setflags(write=False)
        return e


@dataclass(frozen=True)
class PhaseGrid:
    """Named axes plus the time step and splitting choice for evolutions."""

    x: Optional[Axis] = None
    v: Optional[Axis] = None
    y: Optional[Axis] = None
    dt: float = 1.0e-3
    splitting: Splitting = Splitting.LIE

    def __post_init__(self):
        object.__setattr__(self, "splitting", Splitting(self.splitting))
        if all(getattr(self, name) is None for name in AXIS_ORDER):
            raise ValueError("grid needs at least one axis")
        if self.dt <= 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")

    @property
    def axis_names(self) -> tuple[str, ...]:
        return tuple(name for name in AXIS_ORDER if getattr(self, name) is not None)

    @property
    def axes(self) -> tuple[Axis, ...]:
        return tuple(getattr(self, name) for name in self.axis_names)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.n for a in self.axes)

    @property
    def cell_volume(self) -> float:
        vol = 1.0
        for a in self.axes:
            vol *= a.spacing
        return vol

    def axis(self, name: str) -> Axis:
        a = getattr(self, name, None)
        if name not in AXIS_ORDER or a is None:
            raise ValueError(f"grid has no axis {name!r}")
        return a

    def replace_axes(self, keep: tuple[str, ...]) -> "PhaseGrid":
        """The sub-grid holding only the named axes (dt/splitting kept)."""
        kwargs = {name: (getattr(self, name) if name in keep else None) for name in AXIS_ORDER}
        return PhaseGrid(dt=self.dt, splitting=self.splitting, **kwargs)


def default_phase_grid(
    dt: float = 1.0e-3,
    splitting: Splitting = Splitting.LIE,
    memory: bool = False,
    n_x: int = 90,
    n_v: int = 120,
) -> PhaseGrid:
    """The reference kinetic grid: 90 x-cells on [-3, 3], 120 v-cells on
    [-4, 4]; with ``memory`` the y-axis duplicates the x-axis."""
    x = Axis(-3.0, 3.0, n_x)
    return PhaseGrid(x=x, v=Axis(-4.0, 4.0, n_v), y=x if memory else None, dt=dt, splitting=splitting)


@dataclass
class DensityField:
    """Cell values on a grid at one instant.

    Values must be finite; small negative undershoots from the central
    schemes are allowed and tracked by the tests rather than clipped.
    """

    grid: PhaseGrid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ValueError(f"values shape {self.values.shape} does not match grid shape {self.grid.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("density values must be finite")

    def mass(self) -> float:
        return float(self.values.sum() * self.grid.cell_volume)

    def require_unit_mass(self, tol: float = 1.0e-10) -> "DensityField":
        m = self.mass()
        if abs(m - 1.0) > tol:
            raise ValueError(f"density mass {m!r} deviates from 1 by more than {tol}")
        return self

    def copy(self) -> "DensityField":
        return DensityField(self.grid, self.values.copy(), self.time)


def _normalized(grid: PhaseGrid, values: np.ndarray) -> DensityField:
    mass = values.sum() * grid.cell_volume
    if mass <= 0.0:
        raise ValueError("initial density has nonpositive mass")
    return DensityField(grid, values / mass, 0.0).require_unit_mass()


def uniform_density(grid: PhaseGrid) -> DensityField:
    """Unit-mass uniform initial data.

    On grids with a memory axis the data is supported on the x = y
    diagonal (memory starts at the position), which requires the y-axis
    to replicate the x-axis.
    """
    if grid.y is None:
        values = np.ones(grid.shape)
        return _normalized(grid, values)
    if grid.y != grid.x:
        raise ValueError("diagonal initial data requires identical x and y axes")
    values = np.zeros(grid.shape)
    idx = np.arange(grid.x.n)
    values[idx, idx] = 1.0
    return _normalized(grid, values)


def gaussian_density(grid: PhaseGrid, means: dict, widths: dict) -> DensityField:
    """Unit-mass tensor-product Gaussian bump, e.g. for smooth-data tests.

    ``means``/``widths`` map axis names to the bump center and standard
    deviation per axis; every present axis must be covered.
    """
    names = grid.axis_names
    if set(means) != set(names) or set(widths) != set(names):
        raise ValueError(f"means and widths must cover exactly the axes {names}")
    profiles = []
    for name in names:
        ax = grid.axis(name)
        w = float(widths[name])
        if w <= 0.0:
            raise ValueError(f"width for axis {name!r} must be positive")
        profiles.append(np.exp(-0.5 * ((ax.centers - float(means[name])) / w) ** 2))
    values = profiles[0]
    for p in profiles[1:]:
        values = values[..., None] * p
    return _normalized(grid, values)


def histogram_density(samples: np.ndarray, grid: PhaseGrid, normalize: str = "count") -> DensityField:
    """Bin 1D samples onto the grid's x-cells as a piecewise-constant density.

    ``normalize="count"`` divides by (sample count x cell width), so the
    field's mass equals the fraction of samples inside the box;
    ``normalize="mass"`` rescales that to unit mass (requires at least one
    in-box sample).  The x-axis must be the grid's only axis.
    """
    if grid.axis_names != ("x",):
        raise ValueError("histogram_density expects a grid with only the x-axis")
    pts = np.asarray(samples, dtype=float).reshape(-1)
    ax = grid.x
    counts, _ = np.histogram(pts, bins=ax.interfaces)
    values = counts / (pts.size * ax.spacing)
    if normalize == "mass":
        inside = counts.sum()
        if inside == 0:
            raise ValueError("no samples fall inside the box")
        values = counts / (inside * ax.spacing)
    elif normalize != "count":
        raise ValueError(f"unknown normalization {normalize!r}")
    return DensityField(grid, values, 0.0)


def marginal(field: DensityField, keep) -> DensityField:
    """Integrate out every axis not named in ``keep`` (mass preserving)."""
    if isinstance(keep, str):
        keep = (keep,)
    keep = tuple(keep)
    names = field.grid.axis_names
    unknown = [k for k in keep if k not in names]
    if unknown or len(set(keep)) != len(keep):
        raise ValueError(f"axes to keep must be distinct members of {names}, got {keep}")
    drop = tuple(i for i, name in enumerate(names) if name not in keep)
    weight = 1.0
    for i in drop:
        weight *= field.grid.axes[i].spacing
    values = field.values.sum(axis=drop) * weight if drop else field.values.copy()
    return DensityField(field.grid.replace_axes(tuple(k for k in names if k in keep)), values, field.time)


def consensus_from_density(field: DensityField, axis: str, costs_on_grid: np.ndarray, alpha: float) -> float:
    """Weighted consensus coordinate of the marginal along one axis.

    The marginal cell masses are weighted by exp(-alpha (F - F_min)),
    stabilized by subtracting the smallest cost carried by a positive-mass
    cell, and the weighted mean of the cell centers is returned.
    """
    if alpha < 0.0 or not np.isfinite(alpha):
        raise ValueError(f"alpha must be finite and nonnegative, got {alpha}")
    ax = field.grid.axis(axis)
    mass = marginal(field, (axis,)).values * ax.spacing
    costs = np.asarray(costs_on_grid, dtype=float)
    if costs.shape != mass.shape:
        raise ValueError(f"costs shape {costs.shape} does not match the {axis}-axis cell count {mass.shape}")
    support = mass > 0.0
    if not support.any():
        raise ValueError("zero marginal mass")
    # Weight only positive-mass cells: a zero-mass cell may undercut the
    # support's least cost, and its exponential would overflow at large
    # alpha before the zero mass could cancel it.
    weights = np.zeros_like(mass)
    weights[support] = mass[support] * np.exp(
        -alpha * (costs[support] - costs[support].min())
    )
    total = weights.sum()
    if total <= 0.0:
        raise ValueError("zero marginal mass")
    return float(weights @ ax.centers / total)


def l1_distance(a: DensityField, b: DensityField) -> float:
    """L1 distance between two fields on the same grid."""
    if a.grid.shape != b.grid.shape:
        raise ValueError(f"grid shapes differ: {a.grid.shape} vs {b.grid.shape}")
    return float(np.abs(a.values - b.values).sum() * a.grid.cell_volume)
