"""Global optimization test functions with shifted minima.

Six standard benchmark functions (Ackley, Griewank, Rastrigin, Salomon,
Schwefel, and the Xin-She Yang random function), each defined on its usual
search box and parametrized by a shift B of the minimizer and an additive
offset C, so that F(B,...,B) = C exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = [
    "FUNCTION_NAMES",
    "DEFAULT_BOXES",
    "ObjectiveSpec",
    "make_objective",
    "sample_xsy_noise",
    "evaluate",
    "evaluate_batch",
]

FUNCTION_NAMES = ("Ackley", "Griewank", "Rastrigin", "Salomon", "Schwefel", "XSYRandom")

#: Standard search domain (lower, upper), applied per coordinate.
DEFAULT_BOXES = {
    "Ackley": (-32.0, 32.0),
    "Griewank": (-100.0, 100.0),
    "Rastrigin": (-5.12, 5.12),
    "Salomon": (-100.0, 100.0),
    "Schwefel": (-100.0, 100.0),
    "XSYRandom": (-5.0, 5.0),
}

# "Griewalk" appears in some of the literature for the same function.
_ALIASES = {"Griewalk": "Griewank"}


def _canonical_name(name: str) -> str:
    name = _ALIASES.get(name, name)
    if name not in FUNCTION_NAMES:
        raise ValueError(f"unknown objective {name!r}; expected one of {FUNCTION_NAMES}")
    return name


@dataclass(frozen=True)
class ObjectiveSpec:
    """Immutable description of one benchmark minimization problem.

    Args:
        name: one of ``FUNCTION_NAMES`` ("Griewalk" is accepted as an alias
            of "Griewank").
        dim: number of coordinates d.
        shift: position B of the global minimizer, per coordinate.
        offset: value C of the function at the minimizer.
        box: search domain (lower, upper); defaults to the standard domain
            of the chosen function.
        frozen_noise: the weight vector eta in [0,1]^d of the Xin-She Yang
            random function.  Drawn once and frozen so that every particle
            and iteration of a run sees the same objective.
    """

    name: str
    dim: int
    shift: float = 0.0
    offset: float = 0.0
    box: tuple[float, float] = field(default=None)  # type: ignore[assignment]
    frozen_noise: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "name", _canonical_name(self.name))
        if self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim}")
        box = self.box if self.box is not None else DEFAULT_BOXES[self.name]
        lower, upper = float(box[0]), float(box[1])
        if not lower < upper:
            raise ValueError(f"box lower bound must be below upper bound, got {box}")
        object.__setattr__(self, "box", (lower, upper))
        if self.frozen_noise is not None:
            eta = np.asarray(self.frozen_noise, dtype=float)
            if eta.shape != (self.dim,):
                raise ValueError(
                    f"frozen_noise must have shape ({self.dim},), got {eta.shape}"
                )
            if np.any(eta < 0.0) or np.any(eta > 1.0):
                raise ValueError("frozen_noise entries must lie in [0, 1]")
            eta.setflags(write=False)
            object.__setattr__(self, "frozen_noise", eta)

    @property
    def minimizer(self) -> np.ndarray:
        """The global minimizer (B, ..., B)."""
        return np.full(self.dim, self.shift)


def sample_xsy_noise(dim: int, seed) -> np.ndarray:
    """Draw the frozen weight vector of the Xin-She Yang random function.

    Returns ``dim`` i.i.d. uniform draws on [0, 1]; deterministic given the
    seed.
    """
    if dim < 1:
        raise ValueError(f"dim must be a positive integer, got {dim}")
    return np.random.default_rng(seed).random(dim)


def make_objective(
    name: str,
    dim: int,
    shift: float = 0.0,
    offset: float = 0.0,
    box: Optional[tuple[float, float]] = None,
    xsy_seed=None,
) -> ObjectiveSpec:
    """Build an ObjectiveSpec, sampling the XSY noise when a seed is given."""
    noise = None
    if _canonical_name(name) == "XSYRandom" and xsy_seed is not None:
        noise = sample_xsy_noise(dim, xsy_seed)
    return ObjectiveSpec(name=name, dim=dim, shift=shift, offset=offset, box=box, frozen_noise=noise)


def _ackley(z: np.ndarray) -> np.ndarray:
    d = z.shape[-1]
    mean_sq = np.sum(z * z, axis=-1) / d
    mean_cos = np.sum(np.cos(2.0 * np.pi * z), axis=-1) / d
    # Grouped so both terms vanish identically at z = 0:
    # 20(1 - exp(-0.2 sqrt(ms))) + (e - exp(mc)).
    return -20.0 * np.expm1(-0.2 * np.sqrt(mean_sq)) + (np.e - np.exp(mean_cos))


def _griewank(z: np.ndarray) -> np.ndarray:
    d = z.shape[-1]
    idx = np.arange(1, d + 1, dtype=float)
    return 1.0 + np.sum(z * z, axis=-1) / 4000.0 - np.prod(np.cos(z / idx), axis=-1)


def _rastrigin(z: np.ndarray) -> np.ndarray:
    d = z.shape[-1]
    return 10.0 * d + np.sum(z * z - 10.0 * np.cos(2.0 * np.pi * z), axis=-1)


def _salomon(z: np.ndarray) -> np.ndarray:
    r = np.sqrt(np.sum(z * z, axis=-1))
    return 1.0 - np.cos(2.0 * np.pi * r) + 0.1 * r


def _schwefel(z: np.ndarray) -> np.ndarray:
    return np.sum(np.abs(z), axis=-1)


def _xsy_random(z: np.ndarray, eta: np.ndarray) -> np.ndarray:
    d = z.shape[-1]
    powers = np.arange(1, d + 1, dtype=float)
    return np.sum(eta * np.abs(z) ** powers, axis=-1)


def evaluate_batch(spec: ObjectiveSpec, points: np.ndarray) -> np.ndarray:
    """Evaluate the objective at an (..., d) array of points.

    Returns the cost array of shape (...,).  The arguments are shifted by B
    and the result offset by C.
    """
    points = np.asarray(points, dtype=float)
    if points.shape[-1] != spec.dim:
        raise ValueError(
            f"points have dimension {points.shape[-1]}, objective expects {spec.dim}"
        )
    z = points - spec.shift
    if spec.name == "Ackley":
        out = _ackley(z)
    elif spec.name == "Griewank":
        out = _griewank(z)
    elif spec.name == "Rastrigin":
        out = _rastrigin(z)
    elif spec.name == "Salomon":
        out = _salomon(z)
    elif spec.name == "Schwefel":
        out = _schwefel(z)
    else:
        if spec.frozen_noise is None:
            raise ValueError("XSYRandom objective requires frozen_noise to be populated")
        out = _xsy_random(z, spec.frozen_noise)
    return out + spec.offset


def evaluate(spec: ObjectiveSpec, x: np.ndarray) -> float:
    """Evaluate the objective at a single d-vector."""
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.dim,):
        raise ValueError(f"x must have shape ({spec.dim},), got {x.shape}")
    return float(evaluate_batch(spec, x))
