"""Enflo amplification Δ and certified distance-to-linear estimates.

For h: l²_m → l²_r,

    Δh(x, y) = (h(x), h(y), x‖y‖/√(‖x‖² + ‖y‖²)),   x, y ∈ l²_m,

maps l²_{2m} → l²_{2r+m}. Iterating Δ keeps the quasi-additivity inequality
‖Σh(x_i)‖ ≤ Σ‖x_i‖ (Σx_i = 0) while pushing h away from every linear map.

Distances are bracketed from both sides, each side with stored evidence:

* lower: a zero-sum configuration {x_i}; for any linear H,
  Σ(h − H)(x_i) = Σh(x_i), so dist(h, L) ≥ ‖Σh(x_i)‖ / Σ‖x_i‖.
* upper: a matrix H and a set of test points; the reported value is the
  largest ‖h(x) − Hx‖/‖x‖ over those points.

Both numbers are recomputed from the stored evidence by `verify_estimate`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from maps import EnfloDelta, HomMap, parse_map
from spaces import (NormedSpace, Space, ZeroSumConfig, coordinate_ascent, recenter, rng_for, sample_sphere_batch,
                    space_from_json)

logger = logging.getLogger(__name__)

MAX_DOMAIN_DIM = 2 ** 14
INCREASE_TOLERANCE = 1e-9
VERIFY_TOLERANCE = 1e-12


class EnfloDimensionError(ValueError):
    pass


def enflo_delta(h: HomMap) -> EnfloDelta:
    if 2 * h.domain.dim > MAX_DOMAIN_DIM:
        raise EnfloDimensionError(f"Δ would map from dimension {2 * h.domain.dim} > {MAX_DOMAIN_DIM}")
    return EnfloDelta(h)


def enflo_iterate(h0: HomMap, k: int) -> HomMap:
    """Δᵏh0."""
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    if h0.domain.dim * 2 ** k > MAX_DOMAIN_DIM:
        raise EnfloDimensionError(f"Δ^{k} would map from dimension {h0.domain.dim * 2 ** k} > {MAX_DOMAIN_DIM}")
    h = h0
    for _ in range(k):
        h = enflo_delta(h)
    return h


########################################
# Certificate ratios

def certificate_ratio(h: HomMap, points: np.ndarray) -> float:
    """‖Σh(x_i)‖ / Σ‖x_i‖ for one configuration."""
    points = np.asarray(points, dtype=float)
    total = h.codomain.norm(h.evaluate(points).sum(axis=0))
    return float(total / h.domain.norms(points).sum())


def certificate_ratios(h: HomMap, stacks: np.ndarray) -> np.ndarray:
    """certificate_ratio for every configuration of a (P, n, dim) stack."""
    count, n, dim = stacks.shape
    flat = stacks.reshape(-1, dim)
    sums = h.evaluate(flat).reshape(count, n, -1).sum(axis=1)
    denominators = h.domain.norms(flat).reshape(count, n).sum(axis=1)
    return np.divide(h.codomain.norms(sums), denominators, out=np.zeros(count), where=denominators > 0)


@dataclass(frozen=True)
class IncreaseReport:
    max_ratio: float
    config_count: int
    worst_index: int

    @property
    def violated(self) -> bool:
        return self.max_ratio > 1.0 + INCREASE_TOLERANCE

    @property
    def passed(self) -> bool:
        return not self.violated


def check_increase(h: HomMap, configs: list[ZeroSumConfig]) -> IncreaseReport:
    """Largest ‖Σh(x_i)‖/Σ‖x_i‖ over zero-sum configurations; flags values above 1."""
    ratios = np.zeros(len(configs))
    by_size: dict[int, list[int]] = {}
    for index, config in enumerate(configs):
        h.domain.check_batch(config.points)
        by_size.setdefault(config.n, []).append(index)
    for indices in by_size.values():
        stack = np.stack([configs[i].points for i in indices])
        ratios[indices] = certificate_ratios(h, stack)
    worst = int(np.argmax(ratios)) if len(ratios) else -1
    report = IncreaseReport(float(ratios.max(initial=0.0)), len(configs), worst)
    logger.info("increase check over %d configurations: max ratio %.6g", len(configs), report.max_ratio)
    return report


########################################
# Distance estimates

@dataclass(frozen=True, eq=False)
class DistanceEstimate:
    """Bounds on dist(h, L) with the evidence needed to recompute them."""

    map_text: str
    domain: Space
    codomain: Space
    lower: float | None = None
    certificate: ZeroSumConfig | None = None
    upper: float | None = None
    witness: np.ndarray | None = field(default=None, repr=False)
    test_points: np.ndarray | None = field(default=None, repr=False)

    def merged(self, other: "DistanceEstimate") -> "DistanceEstimate":
        pick = lambda a, b: a if a is not None else b
        return DistanceEstimate(self.map_text, self.domain, self.codomain,
                                pick(self.lower, other.lower), pick(self.certificate, other.certificate),
                                pick(self.upper, other.upper), pick(self.witness, other.witness),
                                pick(self.test_points, other.test_points))

    def to_json(self) -> dict:
        data = {"kind": "distance_estimate", "map": self.map_text,
                "domain": self.domain.to_json(), "codomain": self.codomain.to_json()}
        if self.lower is not None:
            data["lower"] = self.lower
            data["certificate"] = self.certificate.points.tolist()
        if self.upper is not None:
            data["upper"] = self.upper
            data["witness"] = self.witness.tolist()
            data["test_points"] = self.test_points.tolist()
        return data

    @classmethod
    def from_json(cls, data: dict) -> "DistanceEstimate":
        if data.get("kind") != "distance_estimate":
            raise ValueError(f"not a distance estimate: kind={data.get('kind')!r}")
        domain, codomain = space_from_json(data["domain"]), space_from_json(data["codomain"])
        certificate = None
        if "lower" in data:
            certificate = ZeroSumConfig(domain, np.array(data["certificate"], dtype=float))
        witness = np.array(data["witness"], dtype=float) if "upper" in data else None
        test_points = np.array(data["test_points"], dtype=float) if "upper" in data else None
        return cls(data["map"], domain, codomain, data.get("lower"), certificate, data.get("upper"),
                   witness, test_points)

    def load_map(self) -> HomMap:
        return parse_map(self.map_text, self.domain, self.codomain)


def witness_ratios(h: HomMap, witness: np.ndarray, points: np.ndarray) -> np.ndarray:
    """‖h(x) − Hx‖/‖x‖ for every row x."""
    points = np.asarray(points, dtype=float)
    residuals = h.evaluate(points) - points @ witness.T
    return h.codomain.norms(residuals) / h.domain.norms(points)


@dataclass(frozen=True)
class VerificationResult:
    checks: tuple[tuple[str, float, float], ...]

    @property
    def passed(self) -> bool:
        return all(abs(stored - recomputed) <= VERIFY_TOLERANCE for _, stored, recomputed in self.checks)


def verify_estimate(estimate: DistanceEstimate, h: HomMap | None = None) -> VerificationResult:
    """Recompute every stored bound from its certificate or witness."""
    h = h or estimate.load_map()
    checks = []
    if estimate.lower is not None:
        checks.append(("lower", estimate.lower, certificate_ratio(h, estimate.certificate.points)))
    if estimate.upper is not None:
        checks.append(("upper", estimate.upper,
                       float(witness_ratios(h, estimate.witness, estimate.test_points).max())))
    return VerificationResult(tuple(checks))


def _norm_gradient(space: Space, r: np.ndarray) -> np.ndarray:
    """A subgradient of ‖·‖ at r ≠ 0."""
    if isinstance(space, NormedSpace) and not space.is_euclidean:
        weights = np.ones(space.dim) if space.weights is None else np.asarray(space.weights)
        if space.p == np.inf:
            k = int(np.argmax(np.abs(r) * weights))
            g = np.zeros_like(r)
            g[k] = np.sign(r[k]) * weights[k]
            return g
        value = space.norm(r)
        return weights * np.sign(r) * (np.abs(r) / value) ** (space.p - 1)
    return r / np.linalg.norm(r)


def _minimax_descent(inputs: np.ndarray, targets: np.ndarray, space: Space, start: np.ndarray,
                     iterations: int, step: float) -> tuple[np.ndarray, float]:
    """Subgradient descent on H ↦ max_i ‖targets_i − H inputs_i‖ with step c/√t; returns the best iterate."""
    objective = lambda m: float(space.norms(targets - inputs @ m.T).max())
    current = start.copy()
    best, best_value = current.copy(), objective(current)
    for t in range(1, iterations + 1):
        residuals = targets - inputs @ current.T
        values = space.norms(residuals)
        j = int(np.argmax(values))
        if values[j] == 0:
            break
        gradient = -np.outer(_norm_gradient(space, residuals[j]), inputs[j])
        current = current - (step / np.sqrt(t)) * gradient / np.linalg.norm(gradient)
        value = objective(current)
        if value < best_value:
            best, best_value = current.copy(), value
    return best, best_value


def dist_to_linear_upper(h: HomMap, sample_count: int, iterations: int, seed: int, restarts: int = 5,
                         extra_test_points: np.ndarray | None = None, refine_rounds: int = 20) -> DistanceEstimate:
    """Minimax linear fit of h on sampled unit vectors, reported on a held-out set.

    The held-out set is fresh sphere samples, the worst of them pushed further
    by coordinate ascent against the chosen H, plus any `extra_test_points`.
    """
    dim = h.domain.dim
    if sample_count < dim:
        raise ValueError(f"sample_count must be >= dim(domain) = {dim}, got {sample_count}")
    rng = rng_for(seed)
    inputs = sample_sphere_batch(h.domain, sample_count, rng)
    targets = h.evaluate(inputs)
    start = np.linalg.lstsq(inputs, targets, rcond=None)[0].T
    start_value = float(h.codomain.norms(targets - inputs @ start.T).max())

    best, best_value = start, start_value
    for restart in range(restarts):
        origin = start if restart == 0 else start + rng.standard_normal(start.shape) * start_value / np.sqrt(dim)
        candidate, value = _minimax_descent(inputs, targets, h.codomain, origin, iterations,
                                            0.5 * max(start_value, 1e-12))
        logger.debug("restart %d: training sup %.6g", restart, value)
        if value < best_value:
            best, best_value = candidate, value

    test_rng = rng_for(seed, 1)
    held_out = sample_sphere_batch(h.domain, sample_count, test_rng)
    ratios = witness_ratios(h, best, held_out)
    refined = []
    score = lambda stack: witness_ratios(h, best, stack[:, 0, :])
    for index in np.argsort(ratios)[-min(5, len(ratios)):]:
        point, _ = coordinate_ascent(held_out[index][None, :], score, refine_rounds, 0.1)
        refined.append(point[0])
    parts = [held_out, np.array(refined)]
    if extra_test_points is not None and len(extra_test_points):
        parts.append(np.asarray(extra_test_points, dtype=float))
    test_points = np.vstack(parts)
    test_points = test_points[h.domain.norms(test_points) > 0]
    upper = float(witness_ratios(h, best, test_points).max())
    logger.info("upper bound %.6g (training sup %.6g)", upper, best_value)
    return DistanceEstimate(h.to_text(), h.domain, h.codomain, upper=upper, witness=best, test_points=test_points)


def dist_to_linear_lower(h: HomMap, configs: list[ZeroSumConfig], refine_steps: int,
                         step: float = 0.1, decay: float = 0.9) -> DistanceEstimate:
    """Best certificate ratio over `configs` after zero-sum-preserving coordinate refinement."""
    if not configs:
        raise ValueError("at least one configuration is needed")
    score = lambda stack: certificate_ratios(h, stack)
    best_points, best_value = None, -1.0
    for config in configs:
        points = h.domain.check_batch(config.points)
        scale = float(h.domain.norms(points).mean())
        refined, value = coordinate_ascent(points, score, refine_steps, step * scale, decay, project=recenter)
        if value > best_value:
            best_points, best_value = refined, value
    keep = h.domain.norms(best_points) > 1e-12
    certificate = ZeroSumConfig(h.domain, recenter(best_points[keep]))
    lower = certificate_ratio(h, certificate.points)
    logger.info("lower bound %.6g from a %d-point certificate", lower, certificate.n)
    return DistanceEstimate(h.to_text(), h.domain, h.codomain, lower=lower, certificate=certificate)


def distance_sandwich(h: HomMap, configs: list[ZeroSumConfig], sample_count: int, iterations: int,
                      refine_steps: int, seed: int) -> DistanceEstimate:
    """Lower certificate first; its points join the held-out set, so upper ≥ lower."""
    lower = dist_to_linear_lower(h, configs, refine_steps)
    upper = dist_to_linear_upper(h, sample_count, iterations, seed, extra_test_points=lower.certificate.points)
    return lower.merged(upper)


########################################
# Seed configurations for Δᵏ

def transverse_ratio(c: float, s) -> float:
    """Certificate ratio of transverse_points(c, s) under Δᵏh0 (independent of h0)."""
    s = np.asarray(s, dtype=float)
    radii = np.sqrt(c ** 2 + np.cumsum(s ** 2))
    return float(abs(c) * np.sqrt(np.sum(s ** 2 / radii ** 2)) / (radii[-1] + abs(c)))


def transverse_points(space: Space, c: float, s, block: int = 1) -> np.ndarray:
    """c·e₀ ± Σ_j s_j·e_{block·2^(j−1)} and −2c·e₀."""
    s = np.asarray(s, dtype=float)
    offsets = np.zeros(space.dim)
    for j, value in enumerate(s, start=1):
        index = block * 2 ** (j - 1)
        if index >= space.dim:
            raise EnfloDimensionError(f"level {j} needs dimension > {index}, space has {space.dim}")
        offsets[index] = value
    base = np.zeros(space.dim)
    base[0] = c
    return np.vstack([base + offsets, base - offsets, -2 * base])


def optimal_transverse(k: int) -> tuple[float, np.ndarray]:
    """(c, s) maximising transverse_ratio with c² + Σs² = 1."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")

    def unpack(params):
        vec = np.asarray(params, dtype=float)
        vec = vec / np.linalg.norm(vec)
        return abs(vec[0]), vec[1:]

    start = np.concatenate([[0.6], np.full(k, np.sqrt(0.64 / k))])
    result = minimize(lambda params: -transverse_ratio(*unpack(params)), start, method="Nelder-Mead",
                      options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000})
    return unpack(result.x)


def transverse_configs(space: Space, k: int, count: int = 8, seed: int = 0, block: int = 1) -> list[ZeroSumConfig]:
    """The optimal transverse configuration for level k and `count − 1` jittered variants."""
    c, s = optimal_transverse(k)
    rng = rng_for(seed)
    configs = [ZeroSumConfig(space, transverse_points(space, c, s, block))]
    for _ in range(count - 1):
        jittered = np.abs(np.concatenate([[c], s]) * (1 + 0.2 * rng.standard_normal(k + 1)))
        configs.append(ZeroSumConfig(space, transverse_points(space, jittered[0], jittered[1:], block)))
    return configs


def lift_config(config: ZeroSumConfig, space: Space) -> ZeroSumConfig:
    """Embed a configuration of l²_m into the x-half of l²_{2m}; Δh keeps its certificate ratio."""
    points = np.zeros((config.n, space.dim))
    points[:, :config.space.dim] = config.points
    return ZeroSumConfig(space, points)
