"""Homogeneous bounded maps R(F,E), the ρ operator and factor systems S(F,E).

Maps are expression trees. Every node is itself a HomMap with a domain, a
codomain and a batched `evaluate` (rows are points), so trees built by the
parser and trees composed in code behave the same. The text form is

    expr   := "zero" | "kp" | "linear(" matrix ")" | "delta(" expr ")"
            | "scale(" number "," expr ")" | "sum(" expr "," expr ")"
            | "pre(" matrix "," expr ")" | "post(" matrix "," expr ")"
    matrix := "[[" row ("],[" row)* "]]"

Intermediate spaces introduced by pre/post in parsed text are Euclidean.
"""

from __future__ import annotations

import logging
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, ClassVar, Iterator, Sequence

import numpy as np

from spaces import (DimensionError, Space, coordinate_ascent, euclidean, random_vectors,
                    rng_for, sample_sphere_batch)

logger = logging.getLogger(__name__)

ALGEBRAIC_TOLERANCE = 1e-12
TRANSCENDENTAL_TOLERANCE = 1e-9


class MapSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class MapDimensionError(ValueError):
    def __init__(self, node: str, message: str):
        super().__init__(f"{node}: {message}")
        self.node = node


class MapSerializationError(ValueError):
    pass


def _number_text(value: float) -> str:
    return repr(float(value))


def _matrix_text(matrix: np.ndarray) -> str:
    return "[[" + "],[".join(",".join(_number_text(v) for v in row) for row in matrix) + "]]"


def _as_matrix(matrix) -> np.ndarray:
    arr = np.array(matrix, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {arr.shape}")
    return arr


class HomMap(ABC):
    """A continuous, homogeneous, bounded map from `domain` to `codomain`."""

    kind: ClassVar[str] = "map"
    domain: Space
    codomain: Space

    @abstractmethod
    def evaluate(self, batch: np.ndarray) -> np.ndarray:
        """Apply the map to every row of a (n, domain.dim) array."""

    def __call__(self, x) -> np.ndarray:
        x = self.domain.check_vector(x)
        return self.evaluate(x[None, :])[0]

    def to_text(self) -> str:
        raise MapSerializationError(f"{type(self).__name__} has no text form")

    def children(self) -> tuple["HomMap", ...]:
        return ()

    def nodes(self) -> Iterator["HomMap"]:
        yield self
        for child in self.children():
            yield from child.nodes()

    def __str__(self):
        try:
            return self.to_text()
        except MapSerializationError:
            return f"<{type(self).__name__} {self.domain.dim}->{self.codomain.dim}>"


@dataclass(frozen=True, eq=False)
class Zero(HomMap):
    kind: ClassVar[str] = "zero"
    domain: Space
    codomain: Space

    def evaluate(self, batch):
        return np.zeros((len(batch), self.codomain.dim))

    def to_text(self):
        return "zero"


@dataclass(frozen=True, eq=False)
class Linear(HomMap):
    kind: ClassVar[str] = "linear"
    domain: Space
    codomain: Space
    matrix: np.ndarray

    def __post_init__(self):
        matrix = _as_matrix(self.matrix)
        if matrix.shape != (self.codomain.dim, self.domain.dim):
            raise MapDimensionError(self.kind, f"matrix shape {matrix.shape} does not match "
                                               f"{self.domain.dim}->{self.codomain.dim}")
        object.__setattr__(self, "matrix", matrix)

    def evaluate(self, batch):
        return np.asarray(batch, dtype=float) @ self.matrix.T

    def to_text(self):
        return f"linear({_matrix_text(self.matrix)})"


@dataclass(frozen=True, eq=False)
class KaltonPeck(HomMap):
    """y ↦ (y_i·ln(‖y‖₂/|y_i|))_i; a zero coordinate maps to 0.

    The logarithm always uses the Euclidean norm, whatever norm `domain` carries.
    """

    kind: ClassVar[str] = "kp"
    domain: Space
    codomain: Space = None

    def __post_init__(self):
        if self.codomain is None:
            object.__setattr__(self, "codomain", self.domain)
        if self.codomain.dim != self.domain.dim:
            raise MapDimensionError(self.kind, f"needs equal dimensions, got {self.domain.dim}->{self.codomain.dim}")

    def evaluate(self, batch):
        batch = np.asarray(batch, dtype=float)
        norms = np.sqrt(np.einsum("ij,ij->i", batch, batch))[:, None]
        absval = np.abs(batch)
        nonzero = absval > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            logs = np.log(np.where(nonzero, norms / np.where(nonzero, absval, 1.0), 1.0))
        return np.where(nonzero, batch * logs, 0.0)

    def to_text(self):
        return "kp"


@dataclass(frozen=True, eq=False)
class EnfloDelta(HomMap):
    """(x, y) ↦ (h(x), h(y), x‖y‖/√(‖x‖²+‖y‖²)) for h: l²_m → l²_r; codomain l²_{2r+m}."""

    kind: ClassVar[str] = "delta"
    inner: HomMap
    domain: Space = field(init=False)
    codomain: Space = field(init=False)

    def __post_init__(self):
        for role, space in (("domain", self.inner.domain), ("codomain", self.inner.codomain)):
            if not space.is_euclidean:
                raise MapDimensionError(self.kind, f"inner {role} {space} is not Euclidean")
        m, r = self.inner.domain.dim, self.inner.codomain.dim
        object.__setattr__(self, "domain", euclidean(2 * m))
        object.__setattr__(self, "codomain", euclidean(2 * r + m))

    def evaluate(self, batch):
        batch = np.asarray(batch, dtype=float)
        m = self.inner.domain.dim
        x, y = batch[:, :m], batch[:, m:]
        nx = np.sqrt(np.einsum("ij,ij->i", x, x))
        ny = np.sqrt(np.einsum("ij,ij->i", y, y))
        total = np.hypot(nx, ny)
        factor = np.divide(ny, total, out=np.zeros_like(ny), where=total > 0)
        return np.hstack([self.inner.evaluate(x), self.inner.evaluate(y), x * factor[:, None]])

    def children(self):
        return (self.inner,)

    def to_text(self):
        return f"delta({self.inner.to_text()})"


@dataclass(frozen=True, eq=False)
class Scale(HomMap):
    kind: ClassVar[str] = "scale"
    factor: float
    inner: HomMap
    domain: Space = field(init=False)
    codomain: Space = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "factor", float(self.factor))
        object.__setattr__(self, "domain", self.inner.domain)
        object.__setattr__(self, "codomain", self.inner.codomain)

    def evaluate(self, batch):
        return self.factor * self.inner.evaluate(batch)

    def children(self):
        return (self.inner,)

    def to_text(self):
        return f"scale({_number_text(self.factor)},{self.inner.to_text()})"


@dataclass(frozen=True, eq=False)
class Sum(HomMap):
    kind: ClassVar[str] = "sum"
    left: HomMap
    right: HomMap
    domain: Space = field(init=False)
    codomain: Space = field(init=False)

    def __post_init__(self):
        if (self.left.domain.dim, self.left.codomain.dim) != (self.right.domain.dim, self.right.codomain.dim):
            raise MapDimensionError(self.kind, f"operands {self.left.domain.dim}->{self.left.codomain.dim} and "
                                               f"{self.right.domain.dim}->{self.right.codomain.dim} differ")
        object.__setattr__(self, "domain", self.left.domain)
        object.__setattr__(self, "codomain", self.left.codomain)

    def evaluate(self, batch):
        return self.left.evaluate(batch) + self.right.evaluate(batch)

    def children(self):
        return (self.left, self.right)

    def to_text(self):
        return f"sum({self.left.to_text()},{self.right.to_text()})"


@dataclass(frozen=True, eq=False)
class PreLinear(HomMap):
    """x ↦ inner(M x)."""

    kind: ClassVar[str] = "pre"
    matrix: np.ndarray
    inner: HomMap
    domain: Space = None
    codomain: Space = field(init=False)

    def __post_init__(self):
        matrix = _as_matrix(self.matrix)
        if self.domain is None:
            object.__setattr__(self, "domain", euclidean(matrix.shape[1]))
        if matrix.shape != (self.inner.domain.dim, self.domain.dim):
            raise MapDimensionError(self.kind, f"matrix shape {matrix.shape} does not map "
                                               f"{self.domain.dim} into {self.inner.domain.dim}")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "codomain", self.inner.codomain)

    def evaluate(self, batch):
        return self.inner.evaluate(np.asarray(batch, dtype=float) @ self.matrix.T)

    def children(self):
        return (self.inner,)

    def to_text(self):
        return f"pre({_matrix_text(self.matrix)},{self.inner.to_text()})"


@dataclass(frozen=True, eq=False)
class PostLinear(HomMap):
    """x ↦ M inner(x)."""

    kind: ClassVar[str] = "post"
    matrix: np.ndarray
    inner: HomMap
    codomain: Space = None
    domain: Space = field(init=False)

    def __post_init__(self):
        matrix = _as_matrix(self.matrix)
        if self.codomain is None:
            object.__setattr__(self, "codomain", euclidean(matrix.shape[0]))
        if matrix.shape != (self.codomain.dim, self.inner.codomain.dim):
            raise MapDimensionError(self.kind, f"matrix shape {matrix.shape} does not map "
                                               f"{self.inner.codomain.dim} into {self.codomain.dim}")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "domain", self.inner.domain)

    def evaluate(self, batch):
        return self.inner.evaluate(batch) @ self.matrix.T

    def children(self):
        return (self.inner,)

    def to_text(self):
        return f"post({_matrix_text(self.matrix)},{self.inner.to_text()})"


def difference(left: HomMap, right: HomMap) -> HomMap:
    return Sum(left, Scale(-1.0, right))


########################################
# Parsing

_TOKEN = re.compile(r"(?P<number>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)"
                    r"|(?P<name>[a-z]+)|(?P<punct>[()\[\],])")
_SPACE = re.compile(r"\s*")
_MAP_NAMES = ("zero", "kp", "linear", "delta", "scale", "sum", "pre", "post")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = _SPACE.match(text, 0).end()
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if match is None:
            raise MapSyntaxError(f"unexpected character {text[pos]!r}", pos)
        tokens.append((match.lastgroup, match.group(), pos))
        pos = _SPACE.match(text, match.end()).end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.index = 0

    def peek(self):
        return self.tokens[self.index]

    def take(self, kind: str, value: str | None = None):
        token = self.peek()
        if token[0] != kind or (value is not None and token[1] != value):
            expected = value if value is not None else kind
            found = token[1] if token[0] != "end" else "end of input"
            raise MapSyntaxError(f"expected {expected!r}, found {found!r}", token[2])
        self.index += 1
        return token

    def number(self) -> float:
        return float(self.take("number")[1])

    def matrix(self) -> list[list[float]]:
        self.take("punct", "[")
        rows = []
        while True:
            start = self.take("punct", "[")[2]
            row = [self.number()]
            while self.peek()[1] == ",":
                self.take("punct", ",")
                row.append(self.number())
            self.take("punct", "]")
            if rows and len(row) != len(rows[0]):
                raise MapSyntaxError(f"row of length {len(row)} in a matrix with rows of length {len(rows[0])}", start)
            rows.append(row)
            if self.peek()[1] != ",":
                break
            self.take("punct", ",")
        self.take("punct", "]")
        return rows

    def expr(self):
        kind, name, pos = self.take("name")
        if name not in _MAP_NAMES:
            raise MapSyntaxError(f"unknown map {name!r}", pos)
        if name in ("zero", "kp"):
            return (name, pos)
        self.take("punct", "(")
        if name == "linear":
            node = (name, pos, self.matrix())
        elif name == "delta":
            node = (name, pos, self.expr())
        elif name == "scale":
            c = self.number()
            self.take("punct", ",")
            node = (name, pos, c, self.expr())
        elif name == "sum":
            left = self.expr()
            self.take("punct", ",")
            node = (name, pos, left, self.expr())
        else:
            m = self.matrix()
            self.take("punct", ",")
            node = (name, pos, m, self.expr())
        self.take("punct", ")")
        return node

    def parse(self):
        node = self.expr()
        self.take("end")
        return node


def _bind(node, domain: Space, codomain: Space, path: str) -> HomMap:
    name = node[0]
    where = f"{path}{name}@{node[1]}"
    try:
        if name == "zero":
            return Zero(domain, codomain)
        if name == "kp":
            return KaltonPeck(domain, codomain)
        if name == "linear":
            return Linear(domain, codomain, node[2])
        if name == "delta":
            if not (domain.is_euclidean and codomain.is_euclidean):
                raise MapDimensionError(where, f"delta needs Euclidean spaces, got {domain}->{codomain}")
            if domain.dim % 2:
                raise MapDimensionError(where, f"delta needs an even domain dimension, got {domain.dim}")
            m = domain.dim // 2
            r, rest = divmod(codomain.dim - m, 2)
            if rest or r < 1:
                raise MapDimensionError(where, f"codomain dimension {codomain.dim} is not 2r+{m} with r >= 1")
            return EnfloDelta(_bind(node[2], euclidean(m), euclidean(r), f"{where}."))
        if name == "scale":
            return Scale(node[2], _bind(node[3], domain, codomain, f"{where}."))
        if name == "sum":
            return Sum(_bind(node[2], domain, codomain, f"{where}.left."),
                       _bind(node[3], domain, codomain, f"{where}.right."))
        if name == "pre":
            matrix = _as_matrix(node[2])
            if matrix.shape[1] != domain.dim:
                raise MapDimensionError(where, f"matrix has {matrix.shape[1]} columns, domain has dimension {domain.dim}")
            return PreLinear(matrix, _bind(node[3], euclidean(matrix.shape[0]), codomain, f"{where}."), domain)
        if name == "post":
            matrix = _as_matrix(node[2])
            if matrix.shape[0] != codomain.dim:
                raise MapDimensionError(where, f"matrix has {matrix.shape[0]} rows, codomain has dimension {codomain.dim}")
            return PostLinear(matrix, _bind(node[3], domain, euclidean(matrix.shape[1]), f"{where}."), codomain)
    except MapDimensionError as e:
        if e.node.startswith(path) and "@" in e.node:
            raise
        raise MapDimensionError(where, str(e).split(": ", 1)[-1]) from e
    raise MapSyntaxError(f"unknown map {name!r}", node[1])


def parse_map(text: str, domain: Space, codomain: Space) -> HomMap:
    """Parse map text and check dimensions against `domain` → `codomain`."""
    return _bind(_Parser(text).parse(), domain, codomain, "")


def print_map(h: HomMap) -> str:
    return h.to_text()


def eval_map(h: HomMap, x) -> np.ndarray:
    return h(x)


def as_matrix(h: HomMap, samples: int = 32, seed: int = 0,
              tolerance: float = TRANSCENDENTAL_TOLERANCE) -> np.ndarray | None:
    """The matrix of h if h is linear on sampled points, else None."""
    basis = np.eye(h.domain.dim)
    matrix = h.evaluate(basis).T
    points = random_vectors(h.domain, samples, rng_for(seed))
    residual = np.abs(h.evaluate(points) - points @ matrix.T).max(initial=0.0)
    scale = max(1.0, float(np.abs(matrix).max(initial=0.0)))
    return matrix if residual <= tolerance * scale else None


def map_norm(h: HomMap, samples: int, seed: int) -> float:
    """sup of ‖h(x)‖ over sampled unit vectors; a lower estimate of ‖h‖."""
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    points = sample_sphere_batch(h.domain, samples, rng_for(seed))
    return float(h.codomain.norms(h.evaluate(points)).max())


########################################
# Factor systems

class FactorSystem(ABC):
    """A symmetric homogeneous map φ: F×F → E."""

    f_space: Space
    e_space: Space

    @abstractmethod
    def evaluate(self, first: np.ndarray, second: np.ndarray) -> np.ndarray:
        """φ applied row-wise to two (n, F.dim) arrays."""

    def __call__(self, y1, y2) -> np.ndarray:
        y1 = self.f_space.check_vector(y1)
        y2 = self.f_space.check_vector(y2)
        return self.evaluate(y1[None, :], y2[None, :])[0]

    def to_text(self) -> str:
        raise MapSerializationError(f"{type(self).__name__} has no text form")


@dataclass(frozen=True, eq=False)
class RhoFactor(FactorSystem):
    """ρh(x, y) = h(x+y) − h(x) − h(y)."""

    h: HomMap

    @property
    def f_space(self):
        return self.h.domain

    @property
    def e_space(self):
        return self.h.codomain

    def evaluate(self, first, second):
        first = np.asarray(first, dtype=float)
        second = np.asarray(second, dtype=float)
        n = len(first)
        values = self.h.evaluate(np.vstack([first + second, first, second]))
        return values[:n] - values[n:2 * n] - values[2 * n:]

    def to_text(self):
        return self.h.to_text()


def rho(h: HomMap) -> RhoFactor:
    return RhoFactor(h)


@dataclass(frozen=True, eq=False)
class CombinedFactor(FactorSystem):
    """Σ c_k φ_k over factor systems with common spaces."""

    terms: tuple[tuple[float, FactorSystem], ...]

    def __post_init__(self):
        if not self.terms:
            raise ValueError("a combination needs at least one term")
        first = self.terms[0][1]
        for _, phi in self.terms[1:]:
            if (phi.f_space.dim, phi.e_space.dim) != (first.f_space.dim, first.e_space.dim):
                raise DimensionError("factor systems in a combination must share F and E")

    @property
    def f_space(self):
        return self.terms[0][1].f_space

    @property
    def e_space(self):
        return self.terms[0][1].e_space

    def evaluate(self, first, second):
        return sum(c * phi.evaluate(first, second) for c, phi in self.terms)


def combine_factors(a: float, phi: FactorSystem, b: float, psi: FactorSystem) -> CombinedFactor:
    return CombinedFactor(((float(a), phi), (float(b), psi)))


@dataclass(frozen=True, eq=False)
class PushedFactor(FactorSystem):
    """T∘φ for T: E → X."""

    matrix: np.ndarray
    phi: FactorSystem
    e_space: Space

    def __post_init__(self):
        if self.matrix.shape != (self.e_space.dim, self.phi.e_space.dim):
            raise DimensionError(f"operator shape {self.matrix.shape} does not map E into X")

    @property
    def f_space(self):
        return self.phi.f_space

    def evaluate(self, first, second):
        return self.phi.evaluate(first, second) @ self.matrix.T


@dataclass(frozen=True, eq=False)
class PulledFactor(FactorSystem):
    """φ(S·, S·) for S: X → F."""

    phi: FactorSystem
    matrix: np.ndarray
    f_space: Space

    def __post_init__(self):
        if self.matrix.shape != (self.phi.f_space.dim, self.f_space.dim):
            raise DimensionError(f"operator shape {self.matrix.shape} does not map X into F")

    @property
    def e_space(self):
        return self.phi.e_space

    def evaluate(self, first, second):
        first = np.asarray(first, dtype=float)
        second = np.asarray(second, dtype=float)
        return self.phi.evaluate(first @ self.matrix.T, second @ self.matrix.T)


def push_factor(matrix, phi: FactorSystem, target: Space | None = None) -> PushedFactor:
    matrix = _as_matrix(matrix)
    return PushedFactor(matrix, phi, target or euclidean(matrix.shape[0]))


def pull_factor(phi: FactorSystem, matrix, source: Space | None = None) -> PulledFactor:
    matrix = _as_matrix(matrix)
    return PulledFactor(phi, matrix, source or euclidean(matrix.shape[1]))


def increase_ratios(phi: FactorSystem, configs: np.ndarray) -> np.ndarray:
    """‖Σ_k φ(Σ_{i≤k} x_i, x_{k+1})‖ / Σ‖x_i‖ for a (C, n, F.dim) stack of configurations."""
    configs = np.asarray(configs, dtype=float)
    count, n, dim = configs.shape
    if n < 2:
        return np.zeros(count)
    partial = np.cumsum(configs, axis=1)[:, :-1, :].reshape(-1, dim)
    following = configs[:, 1:, :].reshape(-1, dim)
    terms = phi.evaluate(partial, following).reshape(count, n - 1, -1).sum(axis=1)
    denominators = phi.f_space.norms(configs.reshape(-1, dim)).reshape(count, n).sum(axis=1)
    ratios = np.divide(phi.e_space.norms(terms), denominators, out=np.zeros(count), where=denominators > 0)
    return ratios


@dataclass(frozen=True)
class AxiomReport:
    """Largest residual of each factor-system axiom over the sampled tuples."""

    homogeneity: float
    symmetry: float
    zero_argument: float
    cocycle: float
    inverse: float
    increase_ratio: float
    sample_count: int
    tolerance: float
    cocycle_residuals: np.ndarray = field(repr=False, compare=False, default=None)

    @property
    def passed(self) -> bool:
        return max(self.homogeneity, self.symmetry, self.zero_argument, self.cocycle, self.inverse) <= self.tolerance

    def rows(self) -> list[tuple[str, float]]:
        return [("axiom1_homogeneity", self.homogeneity), ("axiom2_symmetry", self.symmetry),
                ("axiom3_zero_argument", self.zero_argument), ("axiom4_cocycle", self.cocycle),
                ("axiom5_increase_ratio", self.increase_ratio)]


def check_factor_axioms(phi: FactorSystem, sample_count: int, seed: int,
                        tolerance: float = TRANSCENDENTAL_TOLERANCE, max_config_size: int = 8) -> AxiomReport:
    """Residuals of axioms 1–4 (and φ(y,−y)=0) plus the largest axiom-5 ratio on sampled data."""
    if sample_count < 1:
        raise ValueError(f"sample_count must be >= 1, got {sample_count}")
    rng = rng_for(seed)
    f, e = phi.f_space, phi.e_space
    x, y, z = (random_vectors(f, sample_count, rng) for _ in range(3))
    lam = rng.uniform(-3.0, 3.0, size=(sample_count, 1))

    base = phi.evaluate(x, y)
    homogeneity = e.norms(phi.evaluate(lam * x, lam * y) - lam * base)
    symmetry = e.norms(base - phi.evaluate(y, x))
    zero_argument = e.norms(phi.evaluate(x, np.zeros_like(x)))
    cocycle = e.norms(base + phi.evaluate(x + y, z) - phi.evaluate(y, z) - phi.evaluate(x, y + z))
    inverse = e.norms(phi.evaluate(y, -y))

    ratio = 0.0
    for size in range(2, max_config_size + 1):
        configs = random_vectors(f, sample_count * size, rng_for(seed, size)).reshape(sample_count, size, f.dim)
        ratio = max(ratio, float(increase_ratios(phi, configs).max()))

    report = AxiomReport(float(homogeneity.max()), float(symmetry.max()), float(zero_argument.max()),
                         float(cocycle.max()), float(inverse.max()), ratio, sample_count, tolerance, cocycle)
    logger.info("factor axioms: %s", report)
    return report


def factor_norm_lower(phi: FactorSystem, configs: Sequence[Sequence], optimize_steps: int,
                      step: float = 0.1, decay: float = 0.9) -> float:
    """Largest axiom-5 ratio over `configs` after coordinate-wise local refinement.

    Every value is attained by an explicit configuration, so the result is a
    lower bound on ‖φ‖.
    """
    best = 0.0
    score = lambda stack: increase_ratios(phi, stack)
    for config in configs:
        points = phi.f_space.check_batch(np.atleast_2d(np.asarray(config, dtype=float)))
        if len(points) < 2:
            continue
        scale = float(phi.f_space.norms(points).mean()) or 1.0
        _, value = coordinate_ascent(points, score, optimize_steps, step * scale, decay)
        best = max(best, value)
    return best


def rho_norm_estimate(h: HomMap, samples: int, seed: int) -> float:
    """2·‖h‖_est: every axiom-5 ratio of ρh telescopes to ‖h(Σx_i) − Σh(x_i)‖ ≤ 2‖h‖Σ‖x_i‖."""
    return 2.0 * map_norm(h, samples, seed)


def map_from_callable(domain: Space, codomain: Space, fn: Callable[[np.ndarray], np.ndarray]) -> HomMap:
    """Wrap a batched function as a HomMap without text form."""
    return _CallableMap(domain, codomain, fn)


@dataclass(frozen=True, eq=False)
class _CallableMap(HomMap):
    domain: Space
    codomain: Space
    fn: Callable[[np.ndarray], np.ndarray]

    def evaluate(self, batch):
        return np.asarray(self.fn(np.asarray(batch, dtype=float)), dtype=float)
