"""Finite-dimensional real normed spaces, vectors and seeded sampling.

Every other module works with vectors as 1-D numpy arrays and with batches of
vectors as 2-D arrays (one vector per row). A space only knows its dimension
and how to measure a vector; the p-norm family is the only user-facing kind,
the remaining classes describe spaces that extops builds (direct sums,
subspaces, quotients).
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import minimize

ZERO_SUM_TOLERANCE = 1e-12
MAX_REJECTIONS = 100


class DimensionError(ValueError):
    pass


class SamplingError(ValueError):
    pass


class Space(ABC):
    """A finite-dimensional real space with a norm."""

    dim: int

    @abstractmethod
    def norms(self, batch: np.ndarray) -> np.ndarray:
        """Norm of every row of a (n, dim) batch."""

    def norm(self, v) -> float:
        return float(self.norms(self.check_vector(v)[None, :])[0])

    def check_vector(self, v) -> np.ndarray:
        arr = np.asarray(v, dtype=float)
        if arr.ndim != 1 or arr.shape[0] != self.dim:
            raise DimensionError(f"expected a vector of length {self.dim}, got shape {arr.shape}")
        return arr

    def check_batch(self, batch) -> np.ndarray:
        arr = np.asarray(batch, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != self.dim:
            raise DimensionError(f"expected a batch with {self.dim} columns, got shape {arr.shape}")
        return arr

    def zeros(self) -> np.ndarray:
        return np.zeros(self.dim)

    @property
    def is_euclidean(self) -> bool:
        return False

    @abstractmethod
    def to_json(self) -> dict:
        ...


@dataclass(frozen=True)
class NormedSpace(Space):
    """R^dim with a (possibly weighted) p-norm, 1 <= p <= inf."""

    dim: int
    p: float = 2.0
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.dim}")
        if not (self.p >= 1):
            raise ValueError(f"p must be >= 1, got {self.p}")
        if self.weights is not None:
            weights = tuple(float(w) for w in self.weights)
            if len(weights) != self.dim:
                raise ValueError(f"expected {self.dim} weights, got {len(weights)}")
            if any(not (w > 0) for w in weights):
                raise ValueError("all weights must be strictly positive")
            object.__setattr__(self, "weights", weights)

    def norms(self, batch: np.ndarray) -> np.ndarray:
        batch = self.check_batch(batch)
        absval = np.abs(batch)
        if self.p == math.inf:
            if self.weights is not None:
                absval = absval * np.asarray(self.weights)
            return absval.max(axis=1) if self.dim else np.zeros(len(batch))
        if self.weights is None and self.p == 2:
            return np.sqrt(np.einsum("ij,ij->i", batch, batch))
        # scale by the row maximum to keep large p from overflowing
        scale = absval.max(axis=1)
        safe = np.where(scale > 0, scale, 1.0)
        powered = (absval / safe[:, None]) ** self.p
        if self.weights is not None:
            powered = powered * np.asarray(self.weights)
        return scale * powered.sum(axis=1) ** (1.0 / self.p)

    @property
    def is_euclidean(self) -> bool:
        return self.p == 2 and self.weights is None

    def to_json(self) -> dict:
        if self.is_euclidean:
            return {"dim": self.dim, "norm": "l2"}
        norm: dict = {"p": "inf" if self.p == math.inf else self.p}
        if self.weights is not None:
            norm["weights"] = list(self.weights)
        return {"dim": self.dim, "norm": norm}

    def __str__(self):
        p = "inf" if self.p == math.inf else f"{self.p:g}"
        suffix = "w" if self.weights is not None else ""
        return f"l{p}{suffix}_{self.dim}"


def euclidean(dim: int) -> NormedSpace:
    return NormedSpace(dim)


def space_from_json(data: dict) -> NormedSpace:
    """Inverse of NormedSpace.to_json; accepts {"dim": n, "norm": "l2" | {"p": x[, "weights": [...]]}}."""
    try:
        dim = int(data["dim"])
        norm = data.get("norm", "l2")
    except (KeyError, TypeError) as e:
        raise ValueError(f"invalid space description {data!r}") from e
    if norm == "l2":
        return NormedSpace(dim)
    if not isinstance(norm, dict) or "p" not in norm:
        raise ValueError(f"invalid norm description {norm!r}")
    p = math.inf if norm["p"] in ("inf", "infinity", math.inf) else float(norm["p"])
    weights = norm.get("weights")
    return NormedSpace(dim, p, tuple(weights) if weights is not None else None)


def norm(space: Space, v) -> float:
    return space.norm(v)


@dataclass(frozen=True)
class DirectSumSpace(Space):
    """Blocks stacked in order, measured with the sum of the block norms."""

    parts: tuple[Space, ...]
    dim: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        object.__setattr__(self, "dim", sum(p.dim for p in self.parts))

    def split(self, batch: np.ndarray) -> list[np.ndarray]:
        offsets = np.cumsum([0] + [p.dim for p in self.parts])
        return [batch[:, a:b] for a, b in zip(offsets[:-1], offsets[1:])]

    def norms(self, batch: np.ndarray) -> np.ndarray:
        batch = self.check_batch(batch)
        total = np.zeros(len(batch))
        for part, block in zip(self.parts, self.split(batch)):
            total += part.norms(block)
        return total

    def to_json(self) -> dict:
        return {"dim": self.dim, "norm": {"sum": [p.to_json() for p in self.parts]}}


@dataclass(frozen=True, eq=False)
class SubspaceSpace(Space):
    """Coordinates u of the subspace spanned by the columns of `basis` in `parent`."""

    parent: Space
    basis: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "dim", int(self.basis.shape[1]))

    def norms(self, batch: np.ndarray) -> np.ndarray:
        batch = self.check_batch(batch)
        return self.parent.norms(batch @ self.basis.T)

    def to_json(self) -> dict:
        return {"dim": self.dim, "norm": {"subspace_of": self.parent.to_json(), "basis": self.basis.tolist()}}


@dataclass(frozen=True, eq=False)
class QuotientSpace(Space):
    """parent / span(kernel), coordinates u lifted to parent by `lift @ u`.

    The quotient norm min_t ‖lift·u + kernel·t‖ is a convex minimisation; it
    is evaluated numerically, so values are upper approximations of the
    exact quotient norm.
    """

    parent: Space
    lift: np.ndarray
    kernel: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "dim", int(self.lift.shape[1]))

    def _quotient_norm(self, u: np.ndarray) -> float:
        base = self.lift @ u
        if self.kernel.shape[1] == 0:
            return self.parent.norm(base)
        objective = lambda t: self.parent.norm(base + self.kernel @ t)
        start = -np.linalg.lstsq(self.kernel, base, rcond=None)[0]
        result = minimize(objective, start, method="Powell")
        return float(min(result.fun, objective(start), objective(np.zeros_like(start))))

    def norms(self, batch: np.ndarray) -> np.ndarray:
        batch = self.check_batch(batch)
        return np.array([self._quotient_norm(u) for u in batch])

    def to_json(self) -> dict:
        return {"dim": self.dim, "norm": {"quotient_of": self.parent.to_json(), "kernel": self.kernel.tolist()}}


def rng_for(seed: int, *stream: int) -> np.random.Generator:
    """Seeded generator; extra integers select an independent substream."""
    return np.random.default_rng([int(seed), *map(int, stream)]) if stream else np.random.default_rng(int(seed))


def random_vectors(space: Space, count: int, rng: np.random.Generator) -> np.ndarray:
    """Gaussian batch of `count` vectors of `space`."""
    return rng.standard_normal((count, space.dim))


def normalize_rows(space: Space, batch: np.ndarray) -> np.ndarray:
    norms = space.norms(batch)
    if np.any(norms == 0):
        raise SamplingError("cannot normalise a zero vector")
    return batch / norms[:, None]


def sample_sphere(space: Space, count: int, seed: int) -> list[np.ndarray]:
    """`count` unit vectors of `space`, reproducible for a fixed seed.

    Gaussian directions normalised by the target norm; the distribution is not
    uniform on non-Euclidean spheres.
    """
    return list(sample_sphere_batch(space, count, rng_for(seed)))


def sample_sphere_batch(space: Space, count: int, rng: np.random.Generator) -> np.ndarray:
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    batch = random_vectors(space, count, rng)
    # a Gaussian row is zero with probability 0; redraw just in case
    while np.any(space.norms(batch) == 0):
        zero = space.norms(batch) == 0
        batch[zero] = random_vectors(space, int(zero.sum()), rng)
    return normalize_rows(space, batch)


@dataclass(frozen=True, eq=False)
class ZeroSumConfig:
    """Nonzero vectors x_1..x_n (n >= 2) of a space with Σx_i = 0."""

    space: Space
    points: np.ndarray

    def __post_init__(self):
        points = self.space.check_batch(np.array(self.points, dtype=float))
        object.__setattr__(self, "points", points)
        if len(points) < 2:
            raise ValueError(f"a zero-sum configuration needs at least 2 points, got {len(points)}")
        residual = np.abs(points.sum(axis=0)).max()
        if residual > ZERO_SUM_TOLERANCE:
            raise ValueError(f"points do not sum to zero (max residual {residual:.3e})")
        if np.any(self.space.norms(points) <= ZERO_SUM_TOLERANCE):
            raise ValueError("a zero-sum configuration may not contain the zero vector")

    @property
    def n(self) -> int:
        return len(self.points)

    def to_json(self) -> dict:
        return {"space": self.space.to_json(), "points": self.points.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "ZeroSumConfig":
        return cls(space_from_json(data["space"]), np.array(data["points"], dtype=float))


def recenter(points: np.ndarray) -> np.ndarray:
    """Subtract the mean so the rows sum to zero; works on (n, d) and (P, n, d) stacks."""
    return points - points.mean(axis=-2, keepdims=True)


def random_zero_sum_config(space: Space, n: int, seed: int) -> ZeroSumConfig:
    """n−1 sphere points plus the negated sum; resampled on a new substream if that is ~0."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    for attempt in range(MAX_REJECTIONS):
        rng = rng_for(seed) if attempt == 0 else rng_for(seed, attempt)
        head = sample_sphere_batch(space, n - 1, rng)
        last = -head.sum(axis=0)
        if space.norm(last) > 1e-9:
            return ZeroSumConfig(space, np.vstack([head, last]))
    raise SamplingError(f"no zero-sum configuration of {n} points after {MAX_REJECTIONS} draws")


def random_zero_sum_configs(space: Space, count: int, sizes: Sequence[int] | int, seed: int) -> list[ZeroSumConfig]:
    """`count` configurations; sizes cycle through `sizes` (or are all equal to it)."""
    sizes = [sizes] if isinstance(sizes, int) else list(sizes)
    return [random_zero_sum_config(space, sizes[k % len(sizes)], int(rng_for(seed, k).integers(2**31)))
            for k in range(count)]


def vector_to_json(v) -> list[float]:
    return [float(x) for x in np.asarray(v, dtype=float)]


def vector_from_json(data: Iterable[float]) -> np.ndarray:
    return np.array(list(data), dtype=float)


def coordinate_ascent(points: np.ndarray, score: Callable[[np.ndarray], np.ndarray], rounds: int, step: float,
                      decay: float = 0.9, project: Callable[[np.ndarray], np.ndarray] | None = None
                      ) -> tuple[np.ndarray, float]:
    """Greedy ±step moves of single coordinates, scored together as one (P, n, d) stack.

    The best proposal of a round replaces the current points when it scores
    higher; the step shrinks by `decay` after every round. `project` maps a
    stack of proposals back onto the admissible set (e.g. recentring).
    """
    current = np.array(points, dtype=float)
    best = float(score(current[None])[0])
    n, d = current.shape
    moves = np.zeros((2 * n * d, n, d))
    index = np.arange(n * d)
    moves[index, index // d, index % d] = 1.0
    moves[n * d + index, index // d, index % d] = -1.0
    for _ in range(rounds):
        proposals = current[None] + step * moves
        if project is not None:
            proposals = project(proposals)
        scores = np.nan_to_num(score(proposals), nan=-np.inf)
        k = int(np.argmax(scores))
        if scores[k] > best:
            best = float(scores[k])
            current = proposals[k]
        step *= decay
    return current, best
