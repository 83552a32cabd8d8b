"""Concrete extensions 0 → E → G → F → 0 of finite-dimensional spaces.

An extension is the pair of matrices i: E → G and σ: G → F. Everything here is
linear algebra on those matrices: exactness checks, selections (right
inverses of σ), the factor system of a selection, pushout, pullback, Baer sum
and the search for a congruence between two extensions.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from linalg_utils import (block_diag, complement_basis, left_inverse, null_space, numerical_rank,
                          right_inverse, smallest_singular_value)
from maps import FactorSystem, HomMap, Linear, PostLinear, Sum
from spaces import DirectSumSpace, QuotientSpace, Space, SubspaceSpace, euclidean, random_vectors, rng_for, \
    space_from_json

logger = logging.getLogger(__name__)

SELECTION_TOLERANCE = 1e-10
IMAGE_TOLERANCE = 1e-8
CONGRUENCE_TOLERANCE = 1e-8


class ExtensionError(ValueError):
    pass


class NotASelectionError(ValueError):
    pass


class SpaceMismatchError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Extension:
    """0 → E --i--> G --σ--> F → 0; `twisted_backing` is set when G is a twisted sum."""

    e_space: Space
    g_space: Space
    f_space: Space
    i_matrix: np.ndarray
    sigma_matrix: np.ndarray
    twisted_backing: Any = field(default=None, repr=False)

    def __post_init__(self):
        i = np.array(self.i_matrix, dtype=float)
        sigma = np.array(self.sigma_matrix, dtype=float)
        if i.shape != (self.g_space.dim, self.e_space.dim):
            raise ExtensionError(f"i has shape {i.shape}, expected {(self.g_space.dim, self.e_space.dim)}")
        if sigma.shape != (self.f_space.dim, self.g_space.dim):
            raise ExtensionError(f"sigma has shape {sigma.shape}, expected {(self.f_space.dim, self.g_space.dim)}")
        object.__setattr__(self, "i_matrix", i)
        object.__setattr__(self, "sigma_matrix", sigma)

    def to_json(self) -> dict:
        data = {"E": self.e_space.to_json(), "F": self.f_space.to_json(),
                "i": self.i_matrix.tolist(), "sigma": self.sigma_matrix.tolist()}
        if self.twisted_backing is not None and "phi" in self.twisted_backing.to_json():
            data["phi"] = self.twisted_backing.to_json()["phi"]
        return data


def extension_from_json(data: dict) -> Extension:
    e, f = space_from_json(data["E"]), space_from_json(data["F"])
    if "phi" in data:
        # twisted imports this module
        from twisted import extension_from_factor, twisted_space_from_json
        twisted = twisted_space_from_json({"E": data["E"], "F": data["F"], "phi": data["phi"]})
        return extension_from_factor(e, f, twisted.phi)
    i = np.array(data["i"], dtype=float)
    return Extension(e, euclidean(i.shape[0]), f, i, np.array(data["sigma"], dtype=float))


@dataclass(frozen=True)
class ExtensionReport:
    i_rank: int
    sigma_rank: int
    kernel_dim: int
    exact_rank: int
    composition_residual: float
    expected: tuple[int, int, int]

    @property
    def passed(self) -> bool:
        e, g, f = self.expected
        return (g == e + f and self.i_rank == e and self.sigma_rank == f and self.kernel_dim == e
                and self.exact_rank == e and self.composition_residual <= SELECTION_TOLERANCE)


def validate_extension(ext: Extension) -> ExtensionReport:
    """Injectivity of i, surjectivity of σ, σ·i = 0 and ker σ = im i, by rank computations."""
    i, sigma = ext.i_matrix, ext.sigma_matrix
    kernel = null_space(sigma)
    report = ExtensionReport(
        i_rank=numerical_rank(i),
        sigma_rank=numerical_rank(sigma),
        kernel_dim=kernel.shape[1],
        exact_rank=numerical_rank(np.hstack([i, kernel])),
        composition_residual=float(np.abs(sigma @ i).max(initial=0.0)),
        expected=(ext.e_space.dim, ext.g_space.dim, ext.f_space.dim))
    logger.debug("extension check: %s", report)
    return report


def _require_valid(ext: Extension) -> None:
    report = validate_extension(ext)
    if not report.passed:
        raise ExtensionError(f"not a short exact sequence: {report}")


def split_extension(e_space: Space, f_space: Space) -> Extension:
    """E → E ⊕ F → F with the inclusion and the projection."""
    e, f = e_space.dim, f_space.dim
    return Extension(e_space, DirectSumSpace((e_space, f_space)), f_space,
                     np.vstack([np.eye(e), np.zeros((f, e))]), np.hstack([np.zeros((f, e)), np.eye(f)]))


def direct_sum_extension(first: Extension, second: Extension) -> Extension:
    """E₁⊕E₂ → G₁⊕G₂ → F₁⊕F₂ with block-diagonal maps."""
    return Extension(DirectSumSpace((first.e_space, second.e_space)),
                     DirectSumSpace((first.g_space, second.g_space)),
                     DirectSumSpace((first.f_space, second.f_space)),
                     block_diag(first.i_matrix, second.i_matrix),
                     block_diag(first.sigma_matrix, second.sigma_matrix))


########################################
# Selections and their factor systems

@dataclass(frozen=True, eq=False)
class Selection:
    """A right inverse p: F → G of σ, checked on sampled points."""

    extension: Extension
    map: HomMap
    residual: float

    def __call__(self, y) -> np.ndarray:
        return self.map(y)

    @property
    def is_linear(self) -> bool:
        return isinstance(self.map, Linear)


def make_selection(ext: Extension, p: HomMap, samples: int = 64, seed: int = 0) -> Selection:
    if (p.domain.dim, p.codomain.dim) != (ext.f_space.dim, ext.g_space.dim):
        raise NotASelectionError(f"selection maps {p.domain.dim} -> {p.codomain.dim}, "
                                 f"expected {ext.f_space.dim} -> {ext.g_space.dim}")
    ys = random_vectors(ext.f_space, samples, rng_for(seed))
    residual = float(np.abs(p.evaluate(ys) @ ext.sigma_matrix.T - ys).max())
    scale = max(1.0, float(np.abs(ys).max()))
    if residual > SELECTION_TOLERANCE * scale:
        raise NotASelectionError(f"σ∘p differs from the identity by {residual:.3e}")
    return Selection(ext, p, residual)


def selection_from_extension(ext: Extension, mode: str = "linear", h: HomMap | None = None) -> Selection:
    """A selection of σ.

    linear: the minimum-norm linear right inverse σ⁺.
    nonlinear: σ⁺ + i∘h for a given h: F → E (σ∘i = 0 keeps it a right inverse).
    canonical: p(y) = (0, y) of a twisted-sum extension.
    """
    _require_valid(ext)
    base = Linear(ext.f_space, ext.g_space, right_inverse(ext.sigma_matrix))
    if mode == "linear":
        return make_selection(ext, base)
    if mode == "nonlinear":
        if h is None:
            raise ValueError("nonlinear selections need a map h: F -> E")
        if (h.domain.dim, h.codomain.dim) != (ext.f_space.dim, ext.e_space.dim):
            raise ExtensionError(f"h maps {h.domain.dim} -> {h.codomain.dim}, "
                                 f"expected {ext.f_space.dim} -> {ext.e_space.dim}")
        return make_selection(ext, Sum(base, PostLinear(ext.i_matrix, h, ext.g_space)))
    if mode == "canonical":
        if ext.twisted_backing is None:
            raise ExtensionError("only twisted-sum extensions have a canonical selection")
        return make_selection(ext, ext.twisted_backing.canonical_selection())
    raise ValueError(f"unknown selection mode {mode!r}")


@dataclass(frozen=True, eq=False)
class ExtensionFactor(FactorSystem):
    """φ(y₁, y₂) = i⁻¹(p(y₁+y₂) − p(y₁) − p(y₂)) for a selection p."""

    selection: Selection
    i_inverse: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "i_inverse", left_inverse(self.selection.extension.i_matrix))

    @property
    def f_space(self):
        return self.selection.extension.f_space

    @property
    def e_space(self):
        return self.selection.extension.e_space

    def evaluate(self, first, second):
        ext = self.selection.extension
        first = np.asarray(first, dtype=float)
        second = np.asarray(second, dtype=float)
        n = len(first)
        values = self.selection.map.evaluate(np.vstack([first + second, first, second]))
        defect = values[:n] - values[n:2 * n] - values[2 * n:]
        scale = max(1.0, float(np.abs(values).max(initial=0.0)))
        quotient = float(np.abs(defect @ ext.sigma_matrix.T).max(initial=0.0))
        if quotient > SELECTION_TOLERANCE * scale:
            raise NotASelectionError(f"σ(ρp) = {quotient:.3e}; p is not a selection")
        coords = defect @ self.i_inverse.T
        off_image = float(np.abs(defect - coords @ ext.i_matrix.T).max(initial=0.0))
        if off_image > IMAGE_TOLERANCE * scale:
            raise NotASelectionError(f"ρp leaves im(i) by {off_image:.3e}; p is not a selection")
        return coords


def factor_from_extension(ext: Extension, p: Selection, samples: int = 64, seed: int = 0) -> ExtensionFactor:
    if p.extension is not ext:
        p = make_selection(ext, p.map)
    phi = ExtensionFactor(p)
    ys = random_vectors(ext.f_space, 2 * samples, rng_for(seed))
    phi.evaluate(ys[:samples], ys[samples:])
    return phi


########################################
# Pushout, pullback, Baer sum

def pushout(t_matrix, ext: Extension, x_space: Space | None = None) -> Extension:
    """Push ext along T: E → X.

    G₁ = (G ⊕ X)/Γ with Γ = {(i e, −T e)}, in coordinates of an orthonormal
    complement C of Γ: i₁ = Cᵀ[0; I], σ₁ = [σ 0]·C.
    """
    _require_valid(ext)
    t = np.array(t_matrix, dtype=float)
    if t.ndim != 2 or t.shape[1] != ext.e_space.dim:
        raise ExtensionError(f"T has shape {t.shape}, expected (dim X, {ext.e_space.dim})")
    x_space = x_space or euclidean(t.shape[0])
    g, x, f = ext.g_space.dim, t.shape[0], ext.f_space.dim
    graph = np.vstack([ext.i_matrix, -t])
    complement, rank = complement_basis(graph)
    if rank != ext.e_space.dim:
        raise ExtensionError(f"graph of T has rank {rank}, expected {ext.e_space.dim}")
    i1 = complement.T @ np.vstack([np.zeros((g, x)), np.eye(x)])
    sigma1 = np.hstack([ext.sigma_matrix, np.zeros((f, x))]) @ complement
    quotient = QuotientSpace(DirectSumSpace((ext.g_space, x_space)), complement, graph)
    result = Extension(x_space, quotient, ext.f_space, i1, sigma1)
    _require_valid(result)
    return result


def pullback(ext: Extension, s_matrix, x_space: Space | None = None) -> Extension:
    """Pull ext back along S: X → F.

    G¹ = {(g, x) : σg = Sx} with an orthonormal basis N of it:
    i¹ = Nᵀ[i; 0], σ¹ = [0 I]·N.
    """
    _require_valid(ext)
    s = np.array(s_matrix, dtype=float)
    if s.ndim != 2 or s.shape[0] != ext.f_space.dim:
        raise ExtensionError(f"S has shape {s.shape}, expected ({ext.f_space.dim}, dim X)")
    x_space = x_space or euclidean(s.shape[1])
    g, x, e = ext.g_space.dim, s.shape[1], ext.e_space.dim
    basis = null_space(np.hstack([ext.sigma_matrix, -s]))
    i1 = basis.T @ np.vstack([ext.i_matrix, np.zeros((x, e))])
    sigma1 = np.hstack([np.zeros((x, g)), np.eye(x)]) @ basis
    result = Extension(ext.e_space, SubspaceSpace(DirectSumSpace((ext.g_space, x_space)), basis), x_space, i1, sigma1)
    _require_valid(result)
    return result


def _require_same_ends(first: Extension, second: Extension) -> None:
    if first.e_space.dim != second.e_space.dim or first.f_space.dim != second.f_space.dim:
        raise SpaceMismatchError(f"extensions of {first.e_space.dim} by {first.f_space.dim} and "
                                 f"{second.e_space.dim} by {second.f_space.dim} cannot be compared")


def baer_sum(first: Extension, second: Extension) -> Extension:
    """∇(α₁ ⊕ α₂)Δ with ∇(x, y) = x + y and Δ(x) = (x, x)."""
    _require_same_ends(first, second)
    e, f = first.e_space.dim, first.f_space.dim
    summed = direct_sum_extension(first, second)
    codiagonal = np.hstack([np.eye(e), np.eye(e)])
    diagonal = np.vstack([np.eye(f), np.eye(f)])
    return pullback(pushout(codiagonal, summed, first.e_space), diagonal, first.f_space)


def scale_extension(factor: float, ext: Extension) -> Extension:
    """λ·α as the pushout along λ·I_E; λ = 0 gives the split class."""
    return pushout(factor * np.eye(ext.e_space.dim), ext, ext.e_space)


########################################
# Congruence

@dataclass(frozen=True)
class Congruence:
    matrix: np.ndarray = field(repr=False)
    i_residual: float
    sigma_residual: float
    smallest_singular_value: float

    @property
    def residual(self) -> float:
        return max(self.i_residual, self.sigma_residual)


def congruence_family(first: Extension, second: Extension) -> tuple[np.ndarray, np.ndarray]:
    """(h₀, P) such that every congruence is h₀ + i₂·a·P for some a: F → E.

    With s_j = σ_j⁺, h₀ sends the basis [i₁ s₁] of G₁ to [i₂ s₂]; P is the
    block of rows of [i₁ s₁]⁻¹ that reads off the F-coordinates.
    """
    _require_same_ends(first, second)
    if first.g_space.dim != second.g_space.dim:
        raise SpaceMismatchError(f"middle spaces have dimensions {first.g_space.dim} and {second.g_space.dim}")
    basis1 = np.hstack([first.i_matrix, right_inverse(first.sigma_matrix)])
    basis2 = np.hstack([second.i_matrix, right_inverse(second.sigma_matrix)])
    h0 = np.linalg.lstsq(basis1.T, basis2.T, rcond=None)[0].T
    inverse = np.linalg.lstsq(basis1, np.eye(len(basis1)), rcond=None)[0]
    return h0, inverse[first.e_space.dim:, :]


def congruence_residuals(first: Extension, second: Extension, h: np.ndarray) -> Congruence:
    return Congruence(h,
                      float(np.abs(h @ first.i_matrix - second.i_matrix).max(initial=0.0)),
                      float(np.abs(second.sigma_matrix @ h - first.sigma_matrix).max(initial=0.0)),
                      smallest_singular_value(h))


def find_congruence(first: Extension, second: Extension) -> Congruence | None:
    """An invertible h: G₁ → G₂ with h·i₁ = i₂ and σ₂·h = σ₁, or None."""
    _require_same_ends(first, second)
    if first.g_space.dim != second.g_space.dim:
        return None
    h0, _ = congruence_family(first, second)
    found = congruence_residuals(first, second, h0)
    if found.residual > CONGRUENCE_TOLERANCE or found.smallest_singular_value <= CONGRUENCE_TOLERANCE:
        logger.info("no congruence: residual %.3e, smallest singular value %.3e",
                    found.residual, found.smallest_singular_value)
        return None
    return found
