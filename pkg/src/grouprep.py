"""Finite group representations on extensions and their (Φ, Ψ) description.

A representation T on G leaving im(i) invariant induces T₁ on E and T₂ on F.
A selection p gives

    Φ = i⁻¹ρp                                   (a factor system)
    Ψ(g)(x) = i⁻¹(T(g)p(T₂(g)⁻¹x) − p(x))         (a cocycle with values in R(F, E))

with dΦ(g) = ρΨ(g). Conversely T₁, T₂, Φ and Ψ give back an action on the
twisted sum E ×_Φ F,

    T(g)(x, y) = (T₁(g)x + Ψ(g)(T₂(g)y), T₂(g)y),

which is linear and multiplicative exactly when the pair is compatible.
Groups act on maps and factor systems by (g·h)(x) = T₁(g)h(T₂(g)⁻¹x).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import networkx as nx
import numpy as np

from extops import IMAGE_TOLERANCE, Extension, Selection, congruence_family, congruence_residuals, split_extension
from linalg_utils import column_space_residual, left_inverse, numerical_rank, right_inverse, smallest_singular_value
from maps import (CombinedFactor, FactorSystem, HomMap, Linear, PostLinear, PreLinear, PulledFactor, PushedFactor,
                  Scale, Sum, as_matrix, difference, parse_map)
from spaces import Space, euclidean, random_vectors, rng_for, space_from_json
from twisted import TwistedSpace, extension_from_factor

logger = logging.getLogger(__name__)

REPRESENTATION_TOLERANCE = 1e-10
COCYCLE_TOLERANCE = 1e-9
INTERTWINER_TOLERANCE = 1e-8
RECONSTRUCTION_TOLERANCE = 1e-6


class InvarianceError(ValueError):
    pass


class ReconstructionError(ValueError):
    pass


########################################
# Groups

@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """A finite group given by its multiplication table: table[a, b] = a·b."""

    table: np.ndarray
    generators: tuple[int, ...] = ()
    check: bool = True

    def __post_init__(self):
        table = np.array(self.table, dtype=int)
        object.__setattr__(self, "table", table)
        n = len(table)
        if table.shape != (n, n) or n < 1:
            raise ValueError(f"multiplication table must be square, got shape {table.shape}")
        if self.check:
            expected = np.arange(n)
            for row in (*table, *table.T):
                if not np.array_equal(np.sort(row), expected):
                    raise ValueError("multiplication table is not a Latin square")
            for a in range(n):
                if not np.array_equal(table[table[a]], table[a][table]):
                    raise ValueError(f"multiplication is not associative at element {a}")
        if not self.generators:
            object.__setattr__(self, "generators", tuple(range(n)))

    @property
    def order(self) -> int:
        return len(self.table)

    @cached_property
    def identity(self) -> int:
        for e in range(self.order):
            if np.array_equal(self.table[e], np.arange(self.order)):
                return e
        return 0

    @cached_property
    def inverse(self) -> np.ndarray:
        return np.array([int(np.argmax(self.table[g] == self.identity)) for g in range(self.order)])

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def cayley_graph(self, generators: Sequence[int] | None = None) -> nx.DiGraph:
        """Edges g → g·s labelled with the generator s."""
        graph = nx.DiGraph()
        graph.add_nodes_from(range(self.order))
        for s in generators if generators is not None else self.generators:
            for g in range(self.order):
                graph.add_edge(g, self.mul(g, s), generator=s)
        return graph

    def is_generated_by(self, generators: Sequence[int]) -> bool:
        return nx.is_strongly_connected(self.cayley_graph(generators))

    def words(self, generators: Sequence[int] | None = None) -> dict[int, list[int]]:
        """A shortest word s₁…s_k = g in the generators for every element g."""
        graph = self.cayley_graph(generators)
        paths = nx.shortest_path(graph, source=self.identity)
        if len(paths) != self.order:
            raise ValueError("the generators do not generate the group")
        return {g: [graph.edges[a, b]["generator"] for a, b in zip(path, path[1:])] for g, path in paths.items()}

    def to_json(self) -> dict:
        return {"order": self.order, "table": self.table.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "FiniteGroup":
        group = cls(np.array(data["table"], dtype=int))
        if group.order != data.get("order", group.order):
            raise ValueError(f"order {data['order']} does not match a table of size {group.order}")
        return group


def cyclic_group(n: int) -> FiniteGroup:
    index = np.arange(n)
    return FiniteGroup((index[:, None] + index[None, :]) % n, generators=(1 % n,))


def dihedral_group(n: int) -> FiniteGroup:
    """Symmetries of the n-gon; element a + n·b is r^a s^b."""
    table = np.zeros((2 * n, 2 * n), dtype=int)
    for a in range(n):
        for b in range(2):
            for c in range(n):
                for d in range(2):
                    table[a + n * b, c + n * d] = (a + (-1) ** b * c) % n + n * ((b + d) % 2)
    return FiniteGroup(table, generators=(1 % n, n))


def group_from_matrices(generators: Sequence, max_order: int = 10000) -> tuple[FiniteGroup, np.ndarray]:
    """Close a set of invertible matrices under multiplication; returns the group and its elements."""
    gens = [np.array(g, dtype=float) for g in generators]
    if not gens:
        raise ValueError("at least one generator is needed")
    key = lambda m: tuple(np.round(m, 8).ravel() + 0.0)
    elements = [np.eye(len(gens[0]))]
    index = {key(elements[0]): 0}
    frontier = [0]
    while frontier:
        current = frontier.pop()
        for g in gens:
            product = elements[current] @ g
            k = key(product)
            if k not in index:
                if len(elements) >= max_order:
                    raise ValueError(f"generated group exceeds {max_order} elements")
                index[k] = len(elements)
                elements.append(product)
                frontier.append(index[k])
    n = len(elements)
    table = np.array([[index[key(elements[a] @ elements[b])] for b in range(n)] for a in range(n)])
    gen_indices = tuple(index[key(g)] for g in gens)
    return FiniteGroup(table, generators=gen_indices), np.array(elements)


########################################
# Representations

@dataclass(frozen=True, eq=False)
class Representation:
    group: FiniteGroup
    space: Space
    matrices: np.ndarray = field(repr=False)

    def __post_init__(self):
        matrices = np.array(self.matrices, dtype=float)
        if matrices.shape != (self.group.order, self.space.dim, self.space.dim):
            raise ValueError(f"expected {self.group.order} matrices of size {self.space.dim}, got {matrices.shape}")
        object.__setattr__(self, "matrices", matrices)

    def __getitem__(self, g: int) -> np.ndarray:
        return self.matrices[g]

    @cached_property
    def inverses(self) -> np.ndarray:
        return np.linalg.inv(self.matrices)

    def to_json(self) -> dict:
        return {"group": self.group.to_json(), "space": self.space.to_json(), "matrices": self.matrices.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "Representation":
        return cls(FiniteGroup.from_json(data["group"]), space_from_json(data["space"]), np.array(data["matrices"]))


def representation_from_generators(group: FiniteGroup, space: Space, images: Sequence) -> Representation:
    """Extend T on group.generators (in order) to every element along shortest words."""
    images = dict(zip(group.generators, (np.array(m, dtype=float) for m in images)))
    if len(images) != len(group.generators):
        raise ValueError(f"expected {len(group.generators)} generator images")
    matrices = np.empty((group.order, space.dim, space.dim))
    for g, word in group.words().items():
        m = np.eye(space.dim)
        for s in word:
            m = m @ images[s]
        matrices[g] = m
    return Representation(group, space, matrices)


def trivial_representation(group: FiniteGroup, space: Space) -> Representation:
    return Representation(group, space, np.repeat(np.eye(space.dim)[None], group.order, axis=0))


@dataclass(frozen=True)
class RepresentationReport:
    homomorphism_residual: float
    identity_residual: float
    smallest_singular_value: float

    @property
    def passed(self) -> bool:
        return (self.homomorphism_residual <= REPRESENTATION_TOLERANCE
                and self.identity_residual <= REPRESENTATION_TOLERANCE
                and self.smallest_singular_value > REPRESENTATION_TOLERANCE)


def validate_representation(rep: Representation) -> RepresentationReport:
    group, mats = rep.group, rep.matrices
    products = np.einsum("aij,bjk->abik", mats, mats)
    expected = mats[group.table]
    report = RepresentationReport(
        float(np.abs(products - expected).max()),
        float(np.abs(mats[group.identity] - np.eye(rep.space.dim)).max()),
        min(smallest_singular_value(m) for m in mats))
    logger.debug("representation check: %s", report)
    return report


def _require_representation(rep: Representation, name: str) -> None:
    report = validate_representation(rep)
    if not report.passed:
        raise InvarianceError(f"{name} is not a representation: {report}")


def invariant_extension(rep: Representation, ext: Extension) -> tuple[Representation, Representation]:
    """T₁ = i⁻¹T(g)i on E and T₂ = σT(g)σ⁺ on F for an invariant im(i)."""
    i, sigma = ext.i_matrix, ext.sigma_matrix
    i_inv, sigma_inv = left_inverse(i), right_inverse(sigma)
    for g in range(rep.group.order):
        image = rep[g] @ i
        residual = column_space_residual(i, image)
        if residual > REPRESENTATION_TOLERANCE * max(1.0, float(np.abs(image).max())):
            raise InvarianceError(f"T({g}) moves im(i) off itself by {residual:.3e}")
    t1 = Representation(rep.group, ext.e_space, np.einsum("ij,gjk,kl->gil", i_inv, rep.matrices, i))
    t2 = Representation(rep.group, ext.f_space, np.einsum("ij,gjk,kl->gil", sigma, rep.matrices, sigma_inv))
    _require_representation(t1, "T1")
    _require_representation(t2, "T2")
    return t1, t2


########################################
# Actions on maps and factor systems

def act_on_map(g: int, h: HomMap, t1: Representation, t2: Representation) -> HomMap:
    """(g·h)(x) = T₁(g)h(T₂(g)⁻¹x)."""
    return PostLinear(t1[g], PreLinear(t2.inverses[g], h, h.domain), h.codomain)


def act_on_factor(g: int, phi: FactorSystem, t1: Representation, t2: Representation) -> FactorSystem:
    """(g·φ)(x, y) = T₁(g)φ(T₂(g)⁻¹x, T₂(g)⁻¹y)."""
    return PushedFactor(t1[g], PulledFactor(phi, t2.inverses[g], phi.f_space), phi.e_space)


def factor_differential(phi: FactorSystem, t1: Representation, t2: Representation) -> list[FactorSystem]:
    """dφ(g) = g·φ − φ for every element g."""
    return [CombinedFactor(((1.0, act_on_factor(g, phi, t1, t2)), (-1.0, phi))) for g in range(t1.group.order)]


########################################
# Cocycles

@dataclass(frozen=True, eq=False)
class Cocycle:
    """g ↦ M(g) ∈ R(F, E)."""

    group: FiniteGroup
    values: tuple[HomMap, ...]
    report: CocycleReport | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if len(self.values) != self.group.order:
            raise ValueError(f"expected {self.group.order} values, got {len(self.values)}")

    def __getitem__(self, g: int) -> HomMap:
        return self.values[g]

    @property
    def f_space(self) -> Space:
        return self.values[0].domain

    @property
    def e_space(self) -> Space:
        return self.values[0].codomain

    def to_json(self) -> dict:
        return {"group": self.group.to_json(), "values": [m.to_text() for m in self.values]}

    @classmethod
    def from_json(cls, data: dict, f_space: Space, e_space: Space) -> "Cocycle":
        return cls(FiniteGroup.from_json(data["group"]), tuple(parse_map(t, f_space, e_space) for t in data["values"]))


def coboundary(h: HomMap, t1: Representation, t2: Representation) -> Cocycle:
    """g ↦ g·h − h."""
    return Cocycle(t1.group, tuple(difference(act_on_map(g, h, t1, t2), h) for g in range(t1.group.order)))


def linear_cocycle(matrices: Sequence, e_space: Space, f_space: Space, group: FiniteGroup) -> Cocycle:
    return Cocycle(group, tuple(Linear(f_space, e_space, m) for m in matrices))


def psi_cocycle(rep: Representation, t1: Representation, t2: Representation, p: Selection,
                samples: int = 64, seed: int = 0) -> Cocycle:
    """Ψ(g) = i⁻¹(T(g)p(T₂(g)⁻¹·) − p), checked to land in im(i).

    The cocycle identity is checked on `samples` points; the result is attached
    as `report` on the returned cocycle.
    """
    ext = p.extension
    i_inv = left_inverse(ext.i_matrix)
    values = []
    ys = random_vectors(ext.f_space, samples, rng_for(seed))
    for g in range(rep.group.order):
        moved = PostLinear(rep[g], PreLinear(t2.inverses[g], p.map, ext.f_space), ext.g_space)
        inner = Sum(moved, Scale(-1.0, p.map))
        raw = inner.evaluate(ys)
        scale = max(1.0, float(np.abs(raw).max()))
        escape = float(np.abs(raw @ ext.sigma_matrix.T).max())
        off_image = float(np.abs(raw - raw @ i_inv.T @ ext.i_matrix.T).max())
        if escape > REPRESENTATION_TOLERANCE * scale or off_image > IMAGE_TOLERANCE * scale:
            raise InvarianceError(f"Ψ({g}) leaves im(i) by {max(escape, off_image):.3e}")
        values.append(PostLinear(i_inv, inner, ext.e_space))
    report = check_cocycle(Cocycle(rep.group, tuple(values)), t1, t2, samples, seed)
    if report.passed:
        logger.info("Ψ cocycle residual %.3e", report.residual)
    else:
        logger.warning("Ψ fails the cocycle identity: residual %.3e", report.residual)
    return Cocycle(rep.group, tuple(values), report)


def averaging_witness(m: Cocycle) -> HomMap:
    """h = −(1/|𝒢|)Σ_k M(k); every cocycle of a finite group equals g·h − h."""
    total = m[0]
    for value in m.values[1:]:
        total = Sum(total, value)
    return Scale(-1.0 / m.group.order, total)


def _coboundary_system(t1: Representation, t2: Representation) -> np.ndarray:
    """Rows K_g with K_g vec(X) = vec(T₁(g)XT₂(g)⁻¹ − X), column-major vec."""
    e, f = t1.space.dim, t2.space.dim
    eye = np.eye(e * f)
    return np.vstack([np.kron(t2.inverses[g].T, t1[g]) - eye for g in range(t1.group.order)])


def _vec(m: np.ndarray) -> np.ndarray:
    return m.reshape(-1, order="F")


def _unvec(v: np.ndarray, rows: int, cols: int) -> np.ndarray:
    return v.reshape((rows, cols), order="F")


@dataclass(frozen=True)
class CocycleReport:
    residual: float
    identity_residual: float
    linear: bool
    coboundary: bool | None
    coboundary_residual: float
    witness: HomMap | None = field(default=None, repr=False, compare=False)

    @property
    def passed(self) -> bool:
        return max(self.residual, self.identity_residual) <= COCYCLE_TOLERANCE


def check_cocycle(m: Cocycle, t1: Representation, t2: Representation, samples: int, seed: int) -> CocycleReport:
    """Residual of M(g₁g₂) = g₁·M(g₂) + M(g₁) over all pairs, plus a coboundary test.

    Linear values: least squares for X with M(g) = T₁(g)XT₂(g)⁻¹ − X.
    Otherwise: the averaging witness, tested on the samples; a failure there
    is reported as inconclusive (None).
    """
    group = m.group
    xs = random_vectors(m.f_space, samples, rng_for(seed))
    values = np.stack([m[g].evaluate(xs) for g in range(group.order)])
    residual = 0.0
    for g1 in range(group.order):
        moved = xs @ t2.inverses[g1].T
        for g2 in range(group.order):
            acted = m[g2].evaluate(moved) @ t1[g1].T
            diff = values[group.mul(g1, g2)] - acted - values[g1]
            residual = max(residual, float(np.abs(diff).max()))
    identity_residual = float(np.abs(values[group.identity]).max())

    matrices = [as_matrix(m[g]) for g in range(group.order)]
    linear = all(a is not None for a in matrices)
    witness = None
    if linear:
        system = _coboundary_system(t1, t2)
        rhs = np.concatenate([_vec(a) for a in matrices])
        solution = np.linalg.lstsq(system, rhs, rcond=None)[0]
        cob_residual = float(np.abs(system @ solution - rhs).max(initial=0.0))
        scale = max(1.0, float(np.abs(rhs).max(initial=0.0)))
        is_coboundary = cob_residual <= INTERTWINER_TOLERANCE * scale
        if is_coboundary:
            witness = Linear(m.f_space, m.e_space, _unvec(solution, m.e_space.dim, m.f_space.dim))
    else:
        candidate = averaging_witness(m)
        cob = coboundary(candidate, t1, t2)
        cob_residual = max(float(np.abs(cob[g].evaluate(xs) - values[g]).max()) for g in range(group.order))
        is_coboundary = True if cob_residual <= COCYCLE_TOLERANCE * max(1.0, float(np.abs(values).max())) else None
        witness = candidate if is_coboundary else None
    return CocycleReport(residual, identity_residual, linear, is_coboundary, cob_residual, witness)


def linear_cohomology_dimensions(t1: Representation, t2: Representation) -> tuple[int, int]:
    """(dim Z¹, dim B¹) for cocycles with values in L(F, E)."""
    group = t1.group
    e, f = t1.space.dim, t2.space.dim
    block = e * f
    n = group.order
    rows = []
    for g1 in range(n):
        action = np.kron(t2.inverses[g1].T, t1[g1])
        for g2 in range(n):
            row = np.zeros((block, n * block))
            row[:, group.mul(g1, g2) * block:(group.mul(g1, g2) + 1) * block] += np.eye(block)
            row[:, g2 * block:(g2 + 1) * block] -= action
            row[:, g1 * block:(g1 + 1) * block] -= np.eye(block)
            rows.append(row)
    cocycles = n * block - numerical_rank(np.vstack(rows), 1e-9)
    coboundaries = numerical_rank(_coboundary_system(t1, t2), 1e-9)
    return cocycles, coboundaries


def linear_cocycle_residual(matrices: Sequence, t1: Representation, t2: Representation) -> float:
    """Largest entry of A(g₁g₂) − T₁(g₁)A(g₂)T₂(g₁)⁻¹ − A(g₁)."""
    group = t1.group
    worst = 0.0
    for g1 in range(group.order):
        for g2 in range(group.order):
            diff = matrices[group.mul(g1, g2)] - t1[g1] @ matrices[g2] @ t2.inverses[g1] - matrices[g1]
            worst = max(worst, float(np.abs(diff).max()))
    return worst


########################################
# Compatibility and reconstruction

@dataclass(frozen=True)
class CompatibilityReport:
    residual: float
    per_element: tuple[float, ...]

    @property
    def passed(self) -> bool:
        return self.residual <= COCYCLE_TOLERANCE


def check_compatibility(phi: FactorSystem, psi: Cocycle, witness: HomMap | None, t1: Representation,
                        t2: Representation, samples: int, seed: int = 0) -> CompatibilityReport:
    """max over g and sampled (x, y) of ‖dΦ(g)(x,y) − ρΨ(g)(x,y) − ρ(g·h − h)(x,y)‖."""
    rng = rng_for(seed)
    xs = random_vectors(phi.f_space, samples, rng)
    ys = random_vectors(phi.f_space, samples, rng)
    rho_of = lambda h: h.evaluate(xs + ys) - h.evaluate(xs) - h.evaluate(ys)
    per_element = []
    for g, d_phi in enumerate(factor_differential(phi, t1, t2)):
        diff = d_phi.evaluate(xs, ys) - rho_of(psi[g])
        if witness is not None:
            diff -= rho_of(difference(act_on_map(g, witness, t1, t2), witness))
        per_element.append(float(np.abs(diff).max()))
    report = CompatibilityReport(max(per_element), tuple(per_element))
    logger.info("compatibility residual %.3e", report.residual)
    return report


def _act_on_pairs(t1: Representation, t2: Representation, psi: Cocycle, g: int,
                  xs: np.ndarray, ys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    moved = ys @ t2[g].T
    return xs @ t1[g].T + psi[g].evaluate(moved), moved


@dataclass(frozen=True, eq=False)
class TwistedAction:
    """g acting on E ×_Φ F by (x, y) ↦ (T₁(g)x + Ψ(g)(T₂(g)y), T₂(g)y)."""

    t1: Representation
    t2: Representation
    psi: Cocycle
    twisted: TwistedSpace
    extension: Extension
    matrices: np.ndarray = field(repr=False)
    linearity_residual: float
    homomorphism_residual: float

    def apply(self, g: int, z) -> tuple[np.ndarray, np.ndarray]:
        x, y = self.twisted.check_pair(z)
        xs, ys = _act_on_pairs(self.t1, self.t2, self.psi, g, x[None, :], y[None, :])
        return xs[0], ys[0]

    def representation(self) -> Representation:
        return Representation(self.t1.group, self.twisted, self.matrices)


def reconstruct(t1: Representation, t2: Representation, phi: FactorSystem, psi: Cocycle,
                samples: int = 64, seed: int = 0) -> TwistedAction:
    """Action of the group on the twisted sum E ×_Φ F, as chart matrices."""
    ext = extension_from_factor(t1.space, t2.space, phi)
    twisted = ext.twisted_backing
    dim = twisted.dim
    basis_x, basis_y = twisted.pairs_from_chart(np.eye(dim))
    chart = twisted.chart_batch
    matrices = np.stack([chart(*_act_on_pairs(t1, t2, psi, g, basis_x, basis_y)).T for g in range(t1.group.order)])

    us = random_vectors(twisted, samples, rng_for(seed))
    px, py = twisted.pairs_from_chart(us)
    linearity = max(float(np.abs(chart(*_act_on_pairs(t1, t2, psi, g, px, py)) - us @ matrices[g].T).max())
                    for g in range(t1.group.order))
    products = np.einsum("aij,bjk->abik", matrices, matrices)
    homomorphism = float(np.abs(products - matrices[t1.group.table]).max())
    if max(linearity, homomorphism) > RECONSTRUCTION_TOLERANCE:
        raise ReconstructionError(f"(Φ, Ψ) do not define a representation: linearity residual {linearity:.3e}, "
                                  f"homomorphism residual {homomorphism:.3e}")
    logger.info("reconstructed action: linearity %.3e, homomorphism %.3e", linearity, homomorphism)
    return TwistedAction(t1, t2, psi, twisted, ext, matrices, linearity, homomorphism)


@dataclass(frozen=True)
class Intertwiner:
    matrix: np.ndarray = field(repr=False)
    residual: float
    congruence_residual: float
    smallest_singular_value: float


def equivalent_representations(ext_a: Extension, rep_a: Representation, ext_b: Extension,
                               rep_b: Representation) -> Intertwiner | None:
    """A congruence h: G_a → G_b with h·T_A(g) = T_B(g)·h for every g, or None.

    Congruences are h₀ + i_b·a·P (see extops.congruence_family); the
    intertwining condition is linear in a and solved by least squares.
    """
    if rep_a.group.order != rep_b.group.order:
        return None
    h0, p = congruence_family(ext_a, ext_b)
    i_b = ext_b.i_matrix
    lhs, rhs = [], []
    for g in range(rep_a.group.order):
        ta, tb = rep_a[g], rep_b[g]
        lhs.append(np.kron((p @ ta).T, i_b) - np.kron(p.T, tb @ i_b))
        rhs.append(_vec(tb @ h0 - h0 @ ta))
    lhs, rhs = np.vstack(lhs), np.concatenate(rhs)
    a = _unvec(np.linalg.lstsq(lhs, rhs, rcond=None)[0], ext_b.e_space.dim, ext_a.f_space.dim)
    h = h0 + i_b @ a @ p
    residual = max(float(np.abs(h @ rep_a[g] - rep_b[g] @ h).max()) for g in range(rep_a.group.order))
    congruence = congruence_residuals(ext_a, ext_b, h)
    found = Intertwiner(h, residual, congruence.residual, congruence.smallest_singular_value)
    logger.info("intertwiner search: %s", found)
    if (residual > INTERTWINER_TOLERANCE * max(1.0, float(np.abs(h).max())) or congruence.residual > INTERTWINER_TOLERANCE
            or congruence.smallest_singular_value <= INTERTWINER_TOLERANCE):
        return None
    return found


########################################
# Example representations

def rotation(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def rotation_representation(group: FiniteGroup) -> Representation:
    """ℤ_n by rotations of the plane (generator 1 ↦ rotation by 2π/n)."""
    n = group.order
    return representation_from_generators(group, euclidean(2), [rotation(2 * np.pi / n)])


def dihedral_representation(group: FiniteGroup) -> Representation:
    """D_n on the plane: r ↦ rotation by 2π/n, s ↦ reflection in the first axis."""
    n = group.order // 2
    return representation_from_generators(group, euclidean(2), [rotation(2 * np.pi / n), np.diag([1.0, -1.0])])


@dataclass(frozen=True, eq=False)
class TriangularExample:
    """T = [[T₁, C], [0, T₂]] on E ⊕ F, optionally conjugated by an orthogonal Q."""

    representation: Representation
    extension: Extension
    t1: Representation
    t2: Representation


def triangular_example(t1: Representation, t2: Representation, corners: Sequence | None = None,
                       seed: int | None = None) -> TriangularExample:
    """Block-triangular family with the given corner blocks C(g).

    Without corners, C(g) = T₁(g)X − XT₂(g) for a seeded random X, which is
    always a representation. With `seed` the whole family is conjugated by a
    random orthogonal matrix.
    """
    e, f = t1.space.dim, t2.space.dim
    group = t1.group
    if corners is None:
        x = rng_for(0 if seed is None else seed, 1).standard_normal((e, f))
        corners = [t1[g] @ x - x @ t2[g] for g in range(group.order)]
    mats = np.stack([np.block([[t1[g], corners[g]], [np.zeros((f, e)), t2[g]]]) for g in range(group.order)])
    ext = split_extension(t1.space, t2.space)
    i, sigma = ext.i_matrix, ext.sigma_matrix
    if seed is not None:
        q, _ = np.linalg.qr(rng_for(seed, 2).standard_normal((e + f, e + f)))
        mats = np.einsum("ij,gjk,lk->gil", q, mats, q)
        i, sigma = q @ i, sigma @ q.T
    g_space = euclidean(e + f)
    ext = Extension(t1.space, g_space, t2.space, i, sigma)
    return TriangularExample(Representation(group, g_space, mats), ext, t1, t2)


def direct_sum_representation(t1: Representation, t2: Representation) -> tuple[Representation, Extension]:
    example = triangular_example(t1, t2, corners=[np.zeros((t1.space.dim, t2.space.dim))] * t1.group.order)
    return example.representation, example.extension
