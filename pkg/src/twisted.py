"""The twisted sum E ×_φ F.

Elements are pairs (x, y) with x in E and y in F, added as

    (x₁, y₁) + (x₂, y₂) = (x₁ + x₂ − φ(y₁, y₂), y₁ + y₂)

and scaled componentwise. The twisted sum is an ordinary real vector space of
dimension dim E + dim F; `TwistedSpace.to_chart` gives its coordinates in the
basis {(e_j, 0)} ∪ {(0, f_k)}, which is what extension matrices act on.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from extops import Extension
from maps import FactorSystem, HomMap, check_factor_axioms, parse_map, rho
from spaces import Space, rng_for, space_from_json, vector_from_json, vector_to_json

logger = logging.getLogger(__name__)

SEARCH_ITERATIONS = 20
PROPOSALS_PER_ITERATION = 16


@dataclass(frozen=True, eq=False)
class TwistedSpace(Space):
    """E ×_φ F; as a Space it measures chart vectors with the decomposition upper bound."""

    phi: FactorSystem
    norm_depth: int = 2
    seed: int = 0
    dim: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "dim", self.phi.e_space.dim + self.phi.f_space.dim)

    @property
    def e_space(self) -> Space:
        return self.phi.e_space

    @property
    def f_space(self) -> Space:
        return self.phi.f_space

    @cached_property
    def c_estimate(self) -> float:
        """Largest axiom-5 ratio seen on sampled configurations; a lower estimate of C(φ)."""
        return check_factor_axioms(self.phi, 200, self.seed).increase_ratio

    def check_pair(self, z) -> tuple[np.ndarray, np.ndarray]:
        x, y = z
        return self.e_space.check_vector(x), self.f_space.check_vector(y)

    def split(self, batch: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        e = self.e_space.dim
        return batch[:, :e], batch[:, e:]

    def offsets(self, ys: np.ndarray) -> np.ndarray:
        """w(y): first component of Σ_k y_k·(0, f_k) under twisted addition, row-wise."""
        ys = np.asarray(ys, dtype=float)
        w = np.zeros((len(ys), self.e_space.dim))
        partial = np.zeros_like(ys)
        for k in range(self.f_space.dim):
            step = np.zeros_like(ys)
            step[:, k] = ys[:, k]
            w -= self.phi.evaluate(partial, step)
            partial = partial + step
        return w

    def to_chart(self, z) -> np.ndarray:
        x, y = self.check_pair(z)
        return self.chart_batch(x[None, :], y[None, :])[0]

    def from_chart(self, u) -> tuple[np.ndarray, np.ndarray]:
        xs, ys = self.pairs_from_chart(self.check_vector(u)[None, :])
        return xs[0], ys[0]

    def chart_batch(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        return np.hstack([xs - self.offsets(ys), ys])

    def pairs_from_chart(self, batch: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        us, ys = self.split(np.asarray(batch, dtype=float))
        return us + self.offsets(ys), ys

    def norms(self, batch):
        batch = self.check_batch(batch)
        xs, ys = self.pairs_from_chart(batch)
        return np.array([twisted_norm_bounds(self, (x, y), self.norm_depth, self.seed).upper
                         for x, y in zip(xs, ys)])

    def canonical_selection(self) -> "CanonicalSelection":
        return CanonicalSelection(self)

    def to_json(self) -> dict:
        data = {"E": self.e_space.to_json(), "F": self.f_space.to_json()}
        phi_text = factor_text(self.phi)
        if phi_text is not None:
            data["phi"] = phi_text
        return data


def factor_text(phi: FactorSystem) -> str | None:
    try:
        return phi.to_text()
    except ValueError:
        return None


def twisted_space_from_json(data: dict) -> TwistedSpace:
    e, f = space_from_json(data["E"]), space_from_json(data["F"])
    return TwistedSpace(rho(parse_map(data["phi"], f, e)))


def twisted_add(space: TwistedSpace, a, b) -> tuple[np.ndarray, np.ndarray]:
    x1, y1 = space.check_pair(a)
    x2, y2 = space.check_pair(b)
    return x1 + x2 - space.phi(y1, y2), y1 + y2


def twisted_neg(space: TwistedSpace, a) -> tuple[np.ndarray, np.ndarray]:
    x, y = space.check_pair(a)
    return -x, -y


def twisted_scale(space: TwistedSpace, c: float, a) -> tuple[np.ndarray, np.ndarray]:
    x, y = space.check_pair(a)
    return c * x, c * y


def pair_to_json(z) -> dict:
    x, y = z
    return {"x": vector_to_json(x), "y": vector_to_json(y)}


def pair_from_json(data: dict) -> tuple[np.ndarray, np.ndarray]:
    return vector_from_json(data["x"]), vector_from_json(data["y"])


@dataclass(frozen=True)
class NormBounds:
    lower: float
    upper: float
    c_used: float
    estimate: bool
    depth: int
    pieces: np.ndarray = field(repr=False, compare=False)

    def to_json(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "c_used": self.c_used, "estimate": self.estimate,
                "depth": self.depth, "pieces": self.pieces.tolist()}


def _decomposition_parts(phi: FactorSystem, x: np.ndarray, stacks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(‖x + Σ_k φ(S_k, y_{k+1})‖, Σ‖y_i‖) for a (P, d, F.dim) stack of piece lists."""
    count, depth, dim = stacks.shape
    spread = phi.f_space.norms(stacks.reshape(-1, dim)).reshape(count, depth).sum(axis=1)
    if depth == 1:
        return np.broadcast_to(phi.e_space.norm(x), (count,)).copy(), spread
    partial = np.cumsum(stacks, axis=1)[:, :-1, :].reshape(-1, dim)
    following = stacks[:, 1:, :].reshape(-1, dim)
    twist = phi.evaluate(partial, following).reshape(count, depth - 1, -1).sum(axis=1)
    return phi.e_space.norms(x[None, :] + twist), spread


def _transfer_proposals(pieces: np.ndarray, rng: np.random.Generator, count: int) -> np.ndarray:
    """Move part of one coordinate of piece i into piece j; the pieces keep summing to y."""
    depth, dim = pieces.shape
    scale = float(np.abs(pieces).max()) or 1.0
    proposals = np.repeat(pieces[None], count, axis=0)
    source = rng.integers(depth, size=count)
    target = (source + rng.integers(1, depth, size=count)) % depth
    coord = rng.integers(dim, size=count)
    fraction = rng.uniform(-0.5, 1.0, size=count)
    jitter = rng.standard_normal(count) * 0.1 * scale
    amount = fraction * pieces[source, coord] + jitter
    rows = np.arange(count)
    proposals[rows, source, coord] -= amount
    proposals[rows, target, coord] += amount
    return proposals


def twisted_norm_bounds(space: TwistedSpace, z, split_depth: int, seed: int = 0,
                        c_bound: float | None = None) -> NormBounds:
    """Two-sided estimate of the convex-hull norm of z = (x, y).

    upper: the best decomposition z = (x̃, 0) + Σ(0, y_i) found with at most
    `split_depth` pieces, valued ‖x̃‖ + Σ‖y_i‖. The search keeps improvements
    only and draws from one generator, so a deeper search never reports a
    larger upper bound.

    lower: any decomposition with s = Σ‖y_i‖ ≥ ‖y‖ has ‖x̃‖ ≥ ‖x‖ − C·s, hence
    norm ≥ min_s s + max(0, ‖x‖ − C·s). C is `c_bound` when given, else the
    sampled estimate of C(φ) (raised to the ratio of the best decomposition),
    and the result is then flagged as an estimate.
    """
    if split_depth < 1:
        raise ValueError(f"split_depth must be >= 1, got {split_depth}")
    x, y = space.check_pair(z)
    phi = space.phi
    rng = rng_for(seed)

    pieces = y[None, :].copy()
    twist_norm, spread = _decomposition_parts(phi, x, pieces[None])
    best = float(twist_norm[0] + spread[0])
    for depth in range(2, split_depth + 1):
        pieces = np.vstack([pieces, np.zeros_like(y)])
        for _ in range(SEARCH_ITERATIONS):
            proposals = _transfer_proposals(pieces, rng, PROPOSALS_PER_ITERATION)
            twist_norm, spread = _decomposition_parts(phi, x, proposals)
            values = twist_norm + spread
            k = int(np.argmin(values))
            if values[k] < best:
                best = float(values[k])
                pieces = proposals[k]
        logger.debug("depth %d: upper bound %.6g", depth, best)

    best_twist, best_spread = _decomposition_parts(phi, x, pieces[None])
    x_norm, y_norm = space.e_space.norm(x), space.f_space.norm(y)
    # the best decomposition itself satisfies ‖x̃‖ ≥ ‖x‖ − ratio·s
    ratio = 0.0
    if best_spread[0] > 0:
        ratio = max(0.0, (x_norm - best_twist[0]) / best_spread[0])
    estimate = c_bound is None
    c = max(space.c_estimate if estimate else float(c_bound), ratio)
    candidates = [y_norm]
    if c > 0 and x_norm / c > y_norm:
        candidates.append(x_norm / c)
    lower = min(s + max(0.0, x_norm - c * s) for s in candidates)
    lower = min(lower, best)
    return NormBounds(float(lower), best, c, estimate, len(pieces), pieces)


@dataclass(frozen=True, eq=False)
class CanonicalSelection(HomMap):
    """p(y) = (0, y), as chart coordinates (−w(y), y) of the twisted sum."""

    twisted: TwistedSpace

    @property
    def domain(self):
        return self.twisted.f_space

    @property
    def codomain(self):
        return self.twisted

    def evaluate(self, batch):
        ys = np.asarray(batch, dtype=float)
        return np.hstack([-self.twisted.offsets(ys), ys])


def canonical_selection(space: TwistedSpace) -> CanonicalSelection:
    return space.canonical_selection()


def extension_from_factor(e_space: Space, f_space: Space, phi: FactorSystem, norm_depth: int = 2) -> Extension:
    """0 → E → E ×_φ F → F → 0 with i(x) = (x, 0) and σ(x, y) = y in chart coordinates."""
    if phi.e_space.dim != e_space.dim or phi.f_space.dim != f_space.dim:
        raise ValueError(f"factor system maps {phi.f_space.dim}x{phi.f_space.dim} -> {phi.e_space.dim}, "
                         f"expected {f_space.dim}x{f_space.dim} -> {e_space.dim}")
    twisted = TwistedSpace(phi, norm_depth)
    e, f = e_space.dim, f_space.dim
    i_matrix = np.vstack([np.eye(e), np.zeros((f, e))])
    sigma_matrix = np.hstack([np.zeros((f, e)), np.eye(f)])
    return Extension(e_space, twisted, f_space, i_matrix, sigma_matrix, twisted_backing=twisted)


def equivalence_constant(space: TwistedSpace) -> float:
    """1 + C(φ) from the sampled estimate: ‖x‖_E ≤ (1 + C)·‖(x, 0)‖. Only an estimate."""
    return 1.0 + space.c_estimate
