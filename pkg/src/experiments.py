"""
Experiment pipelines behind `twistlab run`.

A config file is TOML, either one experiment

    kind = "enflo_growth"
    seed = 1
    output_dir = "out/enflo"
    [parameters]
    k_max = 3

or a batch of them under [[experiments]]. Every experiment writes
results.csv, manifest.json and, for kinds that produce a curve, plot.svg into
its output directory. All files are written atomically.
"""
import json
import logging
import os
import tempfile
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np
from matplotlib.figure import Figure

from enflo import (check_increase, distance_sandwich, enflo_iterate, lift_config, transverse_configs)
from extops import (baer_sum, factor_from_extension, find_congruence, pullback, pushout,
                    selection_from_extension, split_extension)
from grouprep import (check_compatibility, cyclic_group, dihedral_group,
                      dihedral_representation, direct_sum_representation, equivalent_representations,
                      invariant_extension, linear_cohomology_dimensions, linear_cocycle_residual, psi_cocycle,
                      reconstruct, rotation_representation, triangular_example)
from maps import (KaltonPeck, MapDimensionError, MapSyntaxError, PostLinear, PreLinear, Sum, Zero,
                  check_factor_axioms, parse_map, push_factor, rho)
from spaces import euclidean, random_vectors, random_zero_sum_configs, rng_for
from twisted import TwistedSpace, extension_from_factor, twisted_norm_bounds

logger = logging.getLogger(__name__)

TOOL_VERSION = "0.1.0"
CSV_HEADER = "experiment,parameter,value,certificate_ref"


class ConfigError(ValueError):
    def __init__(self, diagnostics: list[str]):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = diagnostics


class NumericalFailure(ValueError):
    def __init__(self, message: str, report: dict | None = None):
        super().__init__(message)
        self.report = report or {}


########################################
# Configuration

@dataclass(frozen=True)
class Param:
    kind: type
    default: Any
    check: Callable[[Any], bool] = lambda value: True
    hint: str = ""


_positive = lambda value: value > 0
_at_least_two = lambda value: value >= 2

SCHEMAS: dict[str, dict[str, Param]] = {
    "axioms": {
        "map": Param(str, "kp"),
        "f_dim": Param(int, 2, _positive, "must be positive"),
        "e_dim": Param(int, None, _positive, "must be positive"),
        "samples": Param(int, 10000, _positive, "must be positive"),
        "max_config_size": Param(int, 8, _at_least_two, "must be >= 2"),
    },
    "twisted_norm": {
        "map": Param(str, "kp"),
        "dim": Param(int, 2, _positive, "must be positive"),
        "samples": Param(int, 200, _positive, "must be positive"),
        "split_depth": Param(int, 3, _positive, "must be positive"),
    },
    "ext_algebra": {
        "count": Param(int, 5, _positive, "must be positive"),
        "e_dim": Param(int, 3, _positive, "must be positive"),
        "f_dim": Param(int, 3, _positive, "must be positive"),
        "inner_dim": Param(int, 2, _positive, "must be positive"),
    },
    "enflo_growth": {
        "k_max": Param(int, 3, lambda value: 0 <= value <= 12, "must be between 0 and 12"),
        "sample_count": Param(int, 2000, _positive, "must be positive"),
        "iterations": Param(int, 200, _positive, "must be positive"),
        "refine_steps": Param(int, 30, lambda value: value >= 0, "must be >= 0"),
        "random_configs": Param(int, 20, lambda value: value >= 0, "must be >= 0"),
        "increase_configs": Param(int, 10000, _positive, "must be positive"),
    },
    "grouprep_roundtrip": {
        "group": Param(str, "cyclic", lambda value: value in ("cyclic", "dihedral"), "must be cyclic or dihedral"),
        "n": Param(int, 4, lambda value: value >= 2, "must be >= 2"),
        "conjugate": Param(bool, True),
        "samples": Param(int, 64, _positive, "must be positive"),
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    seed: int
    output_dir: Path
    parameters: dict = field(default_factory=dict)
    name: str = ""

    @property
    def label(self) -> str:
        return self.name or self.kind

    def to_json(self) -> dict:
        return {"kind": self.kind, "name": self.label, "seed": self.seed, "output_dir": str(self.output_dir),
                "parameters": self.parameters}


def _check_type(value: Any, kind: type) -> bool:
    if kind is bool:
        return isinstance(value, bool)
    if kind is int:
        return isinstance(value, int) and not isinstance(value, bool)
    if kind is float:
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    return isinstance(value, kind)


def _validate_maps(kind: str, params: dict, where: str) -> list[str]:
    try:
        if kind == "axioms":
            parse_map(params["map"], euclidean(params["f_dim"]), euclidean(params["e_dim"]))
        elif kind == "twisted_norm":
            parse_map(params["map"], euclidean(params["dim"]), euclidean(params["dim"]))
    except (MapSyntaxError, MapDimensionError) as e:
        return [f"{where}: map: {e}"]
    return []


def validate_config(raw: dict, base_dir: Path, where: str = "config") -> ExperimentConfig:
    """Check one experiment table against its schema; all problems are reported together."""
    diagnostics = []
    kind = raw.get("kind")
    if kind not in SCHEMAS:
        raise ConfigError([f"{where}: kind must be one of {', '.join(SCHEMAS)}, got {kind!r}"])
    seed = raw.get("seed")
    if not _check_type(seed, int):
        diagnostics.append(f"{where}: seed is mandatory and must be an integer")
    for key in raw:
        if key not in ("kind", "seed", "output_dir", "parameters", "name"):
            diagnostics.append(f"{where}: unknown key {key!r}")
    schema = SCHEMAS[kind]
    given = raw.get("parameters", {})
    if not isinstance(given, dict):
        diagnostics.append(f"{where}: parameters must be a table")
        given = {}
    params = {}
    for key in given:
        if key not in schema:
            diagnostics.append(f"{where}: unknown parameter {key!r} for kind {kind}")
    for key, param in schema.items():
        value = given.get(key, param.default)
        if value is None:
            params[key] = None
            continue
        if not _check_type(value, param.kind):
            diagnostics.append(f"{where}: parameter {key} must be of type {param.kind.__name__}")
        elif not param.check(value):
            diagnostics.append(f"{where}: parameter {key} {param.hint}")
        params[key] = value
    if kind == "axioms" and params.get("e_dim") is None:
        params["e_dim"] = params["f_dim"]
    if not diagnostics:
        diagnostics += _validate_maps(kind, params, where)
    if diagnostics:
        raise ConfigError(diagnostics)
    output_dir = Path(raw.get("output_dir", f"out/{kind}"))
    if not output_dir.is_absolute():
        output_dir = base_dir / output_dir
    return ExperimentConfig(kind, seed, output_dir, params, str(raw.get("name", "")))


def load_configs(path: Path) -> list[ExperimentConfig]:
    """Read a single-experiment or [[experiments]] batch TOML file."""
    path = Path(path)
    try:
        with open(path, "rb") as f:
            raw = tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError([f"{path}: {e}"]) from e
    tables = raw["experiments"] if "experiments" in raw else [raw]
    if not isinstance(tables, list) or not tables:
        raise ConfigError([f"{path}: experiments must be a non-empty array of tables"])
    configs, diagnostics = [], []
    for index, table in enumerate(tables):
        where = f"{path.name}[{index}]" if "experiments" in raw else path.name
        try:
            configs.append(validate_config(table, path.parent, where))
        except ConfigError as e:
            diagnostics += e.diagnostics
    dirs = [c.output_dir for c in configs]
    for d in sorted({d for d in dirs if dirs.count(d) > 1}):
        diagnostics.append(f"{path.name}: output_dir {d} is used by more than one experiment")
    if diagnostics:
        raise ConfigError(diagnostics)
    return configs


def demo_config(kind: str) -> str:
    """A reference TOML config for one kind, listing every parameter with its default."""
    if kind not in SCHEMAS:
        raise ConfigError([f"unknown kind {kind!r}; choose one of {', '.join(SCHEMAS)}"])
    lines = [f'kind = "{kind}"', "seed = 1", f'output_dir = "out/{kind}"', "", "[parameters]"]
    for key, param in SCHEMAS[kind].items():
        if param.default is None:
            continue
        value = param.default
        if isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, str):
            text = json.dumps(value)
        else:
            text = repr(value)
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"


########################################
# Output

@dataclass(frozen=True)
class Row:
    experiment: str
    parameter: dict
    value: float
    certificate_ref: str = ""

    def to_csv(self) -> str:
        parameter = json.dumps(self.parameter, sort_keys=True).replace('"', '""')
        return f'{self.experiment},"{parameter}",{repr(float(self.value))},{self.certificate_ref}'


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list[Row] = field(default_factory=list)
    files: dict[str, str] = field(default_factory=dict)
    curves: dict[str, tuple[list[float], list[float]]] = field(default_factory=dict)
    histogram: list[float] | None = None
    x_label: str = ""
    y_label: str = ""

    def add(self, parameter: dict, value: float, certificate_ref: str = "") -> None:
        self.rows.append(Row(self.config.label, parameter, float(value), certificate_ref))


def write_atomic(path: Path, text: str) -> None:
    """Write to a temporary file next to `path`, then rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def results_csv(rows: list[Row]) -> str:
    return "\n".join([CSV_HEADER, *(row.to_csv() for row in rows)]) + "\n"


def write_plot(result: ExperimentResult, path: Path) -> None:
    # no pyplot here: called from run_batch worker threads
    fig = Figure(figsize=(6, 4))
    ax = fig.subplots()
    if result.histogram is not None:
        ax.hist(result.histogram, bins=40)
    for label, (xs, ys) in result.curves.items():
        ax.plot(xs, ys, marker="o", label=label)
    if result.curves:
        ax.legend()
    ax.set_xlabel(result.x_label)
    ax.set_ylabel(result.y_label)
    ax.set_title(result.config.label)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    os.close(fd)
    fig.savefig(tmp, format="svg", metadata={"Date": None})
    os.replace(tmp, path)


def write_outputs(result: ExperimentResult) -> None:
    out = result.config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    write_atomic(out / "results.csv", results_csv(result.rows))
    if result.curves or result.histogram is not None:
        write_plot(result, out / "plot.svg")
        result.files["plot"] = "plot.svg"
    result.files["results"] = "results.csv"
    manifest = {"tool": "twistlab", "version": TOOL_VERSION, "config": result.config.to_json(),
                "files": dict(sorted(result.files.items()))}
    write_atomic(out / "manifest.json", json.dumps(manifest, indent=2) + "\n")


########################################
# Pipelines

def _axioms(result: ExperimentResult) -> None:
    params, seed = result.config.parameters, result.config.seed
    h = parse_map(params["map"], euclidean(params["f_dim"]), euclidean(params["e_dim"]))
    report = check_factor_axioms(rho(h), params["samples"], seed, max_config_size=params["max_config_size"])
    for name, value in report.rows():
        result.add({"map": h.to_text(), "quantity": name}, value)
    result.histogram = list(np.log10(report.cocycle_residuals + 1e-300))
    result.x_label, result.y_label = "log10 cocycle residual", "count"
    if not report.passed:
        raise NumericalFailure("factor axioms fail above tolerance",
                               {"module": "maps", "report": dict(report.rows()), "tolerance": report.tolerance})


def _twisted_norm(result: ExperimentResult) -> None:
    params, seed = result.config.parameters, result.config.seed
    dim, depth = params["dim"], params["split_depth"]
    space = euclidean(dim)
    h = parse_map(params["map"], space, space)
    twisted = TwistedSpace(rho(h), seed=seed)
    rng = rng_for(seed)
    xs, ys = random_vectors(space, params["samples"], rng), random_vectors(space, params["samples"], rng)
    zero = np.zeros(dim)
    x_excess, y_gap, sandwich_gap, lowers, uppers = -np.inf, 0.0, -np.inf, [], []
    for k, (x, y) in enumerate(zip(xs, ys)):
        on_e = twisted_norm_bounds(twisted, (x, zero), depth, seed + k)
        on_f = twisted_norm_bounds(twisted, (zero, y), depth, seed + k)
        both = twisted_norm_bounds(twisted, (x, y), depth, seed + k)
        x_excess = max(x_excess, on_e.upper - space.norm(x))
        y_gap = max(y_gap, abs(on_f.upper - space.norm(y)), abs(on_f.lower - space.norm(y)))
        sandwich_gap = max(sandwich_gap, both.lower - both.upper)
        lowers.append(both.lower)
        uppers.append(both.upper)
    base = {"map": h.to_text(), "split_depth": depth}
    result.add({**base, "quantity": "e_axis_upper_minus_norm"}, x_excess)
    result.add({**base, "quantity": "f_axis_gap"}, y_gap)
    result.add({**base, "quantity": "max_lower_minus_upper"}, sandwich_gap)
    result.add({**base, "quantity": "mean_lower"}, float(np.mean(lowers)))
    result.add({**base, "quantity": "mean_upper"}, float(np.mean(uppers)))
    result.add({**base, "quantity": "c_estimate"}, twisted.c_estimate)
    depths = list(range(1, depth + 4))
    curve = [twisted_norm_bounds(twisted, (xs[0], ys[0]), d, seed).upper for d in depths]
    result.curves["upper bound"] = (depths, curve)
    result.x_label, result.y_label = "split depth", "norm bound"
    if x_excess > 1e-9 or y_gap > 1e-9 or sandwich_gap > 1e-12:
        raise NumericalFailure("twisted norm sandwich violated",
                               {"module": "twisted", "e_axis_excess": x_excess, "f_axis_gap": y_gap,
                                "lower_minus_upper": sandwich_gap})


def _random_quasilinear(e_dim: int, f_dim: int, inner: int, rng: np.random.Generator):
    """y ↦ B·kp(A·y) for Gaussian A, B."""
    a = rng.standard_normal((inner, f_dim))
    b = rng.standard_normal((e_dim, inner))
    return PostLinear(b, PreLinear(a, KaltonPeck(euclidean(inner)), euclidean(f_dim)), euclidean(e_dim))


def _ext_algebra(result: ExperimentResult) -> None:
    params, seed = result.config.parameters, result.config.seed
    e, f = euclidean(params["e_dim"]), euclidean(params["f_dim"])
    rng = rng_for(seed)
    maps = [_random_quasilinear(e.dim, f.dim, params["inner_dim"], rng) for _ in range(params["count"] + 1)]
    exts = [extension_from_factor(e, f, rho(h)) for h in maps]
    split = split_extension(e, f)
    checks: dict[str, list[float | None]] = {name: [] for name in (
        "pushout_identity", "pullback_identity", "baer_sum_with_split", "baer_sum_commutative",
        "baer_sum_of_rho", "pushout_of_factor")}
    for k in range(params["count"]):
        alpha, beta = exts[k], exts[k + 1]
        t = rng.standard_normal((e.dim, e.dim))
        candidates = {
            "pushout_identity": (pushout(np.eye(e.dim), alpha, e), alpha),
            "pullback_identity": (pullback(alpha, np.eye(f.dim), f), alpha),
            "baer_sum_with_split": (baer_sum(alpha, split), alpha),
            "baer_sum_commutative": (baer_sum(alpha, beta), baer_sum(beta, alpha)),
            "baer_sum_of_rho": (baer_sum(alpha, beta), extension_from_factor(e, f, rho(Sum(maps[k], maps[k + 1])))),
            "pushout_of_factor": (pushout(t, alpha, e), extension_from_factor(e, f, push_factor(t, rho(maps[k]), e))),
        }
        for name, (first, second) in candidates.items():
            found = find_congruence(first, second)
            checks[name].append(None if found is None else found.residual)
    failed = {name: values.count(None) for name, values in checks.items() if None in values}
    for name, values in checks.items():
        finite = [v for v in values if v is not None]
        result.add({"check": name, "count": params["count"]}, max(finite) if finite else float("nan"))
    residuals = [v for values in checks.values() for v in values if v is not None]
    result.histogram = list(np.log10(np.array(residuals) + 1e-300))
    result.x_label, result.y_label = "log10 congruence residual", "count"
    if failed:
        raise NumericalFailure("congruence not found", {"module": "extops", "failures": failed})


def _enflo_growth(result: ExperimentResult) -> None:
    params, seed = result.config.parameters, result.config.seed
    h0 = Zero(euclidean(1), euclidean(1))
    ks, lowers, uppers = [], [], []
    previous = None
    for k in range(params["k_max"] + 1):
        h = enflo_iterate(h0, k)
        configs = random_zero_sum_configs(h.domain, params["random_configs"], (3, 4, 5, 6), seed + k) \
            if params["random_configs"] else []
        if k >= 1:
            configs += transverse_configs(h.domain, k, seed=seed + k)
        if previous is not None:
            configs.append(lift_config(previous, h.domain))
        if not configs:
            configs = random_zero_sum_configs(h.domain, 1, 3, seed + k)
        estimate = distance_sandwich(h, configs, max(params["sample_count"], h.domain.dim), params["iterations"],
                                     params["refine_steps"], seed + k)
        previous = estimate.certificate
        increase = check_increase(h, random_zero_sum_configs(h.domain, params["increase_configs"],
                                                             (2, 3, 4, 5, 6, 7, 8), seed + 1000 + k))
        ref = f"cert_k{k}.json"
        write_atomic(result.config.output_dir / ref, json.dumps(estimate.to_json()) + "\n")
        result.files[f"certificate_k{k}"] = ref
        result.add({"k": k, "quantity": "lower_bound"}, estimate.lower, ref)
        result.add({"k": k, "quantity": "upper_bound"}, estimate.upper, ref)
        result.add({"k": k, "quantity": "max_increase_ratio"}, increase.max_ratio)
        ks.append(k)
        lowers.append(estimate.lower)
        uppers.append(estimate.upper)
        if estimate.lower > estimate.upper + 1e-9 or increase.violated:
            raise NumericalFailure(f"Enflo bounds inconsistent at k={k}",
                                   {"module": "enflo", "k": k, "lower": estimate.lower, "upper": estimate.upper,
                                    "max_increase_ratio": increase.max_ratio})
    result.curves["lower bound"] = (ks, lowers)
    result.curves["upper bound"] = (ks, uppers)
    result.x_label, result.y_label = "k", "dist(Δᵏ0, L)"
    if any(b <= a for a, b in zip(lowers, lowers[1:])):
        raise NumericalFailure("lower bounds do not increase with k", {"module": "enflo", "lower": lowers})


def _grouprep_roundtrip(result: ExperimentResult) -> None:
    params, seed = result.config.parameters, result.config.seed
    if params["group"] == "cyclic":
        rep = rotation_representation(cyclic_group(params["n"]))
    else:
        rep = dihedral_representation(dihedral_group(params["n"]))
    example = triangular_example(rep, rep, seed=seed if params["conjugate"] else None)
    ext = example.extension
    t1, t2 = invariant_extension(example.representation, ext)
    kp = KaltonPeck(t2.space, t1.space)
    p = selection_from_extension(ext, "nonlinear", kp)
    linear_p = selection_from_extension(ext, "linear")
    phi = factor_from_extension(ext, p)
    samples = params["samples"]
    psi = psi_cocycle(example.representation, t1, t2, p, samples, seed)
    psi_linear = psi_cocycle(example.representation, t1, t2, linear_p, samples, seed)
    cocycle = psi.report
    same = check_compatibility(phi, psi, None, t1, t2, samples, seed)
    shifted = check_compatibility(phi, psi_linear, kp, t1, t2, samples, seed)
    action = reconstruct(t1, t2, phi, psi, samples, seed)
    found = equivalent_representations(ext, example.representation, action.extension, action.representation())

    corners = [np.zeros((2, 2))] + [rng_for(seed, 3, g).standard_normal((2, 2)) for g in range(1, rep.group.order)]
    control = triangular_example(rep, rep, corners=corners)
    direct, direct_ext = direct_sum_representation(rep, rep)
    control_psi = [corners[g] @ rep.inverses[g] for g in range(rep.group.order)]
    control_found = equivalent_representations(control.extension, control.representation, direct_ext, direct)
    z1, b1 = linear_cohomology_dimensions(t1, t2)

    base = {"group": params["group"], "n": params["n"]}
    result.add({**base, "quantity": "cocycle_residual"}, cocycle.residual)
    result.add({**base, "quantity": "compatibility_residual"}, same.residual)
    result.add({**base, "quantity": "compatibility_residual_with_witness"}, shifted.residual)
    result.add({**base, "quantity": "reconstruction_homomorphism_residual"}, action.homomorphism_residual)
    result.add({**base, "quantity": "equivalence_residual"}, found.residual if found else float("inf"))
    result.add({**base, "quantity": "negative_control_cocycle_residual"},
               linear_cocycle_residual(control_psi, t1, t2))
    result.add({**base, "quantity": "negative_control_equivalent"}, 0.0 if control_found is None else 1.0)
    result.add({**base, "quantity": "dim_Z1"}, z1)
    result.add({**base, "quantity": "dim_B1"}, b1)
    if found is None or not cocycle.passed or not same.passed or not shifted.passed or control_found is not None:
        raise NumericalFailure("representation round trip failed",
                               {"module": "grouprep", "cocycle_residual": cocycle.residual,
                                "compatibility_residual": same.residual,
                                "compatibility_residual_with_witness": shifted.residual,
                                "equivalent": found is not None, "negative_control_equivalent": control_found is not None})


PIPELINES = {
    "axioms": _axioms,
    "twisted_norm": _twisted_norm,
    "ext_algebra": _ext_algebra,
    "enflo_growth": _enflo_growth,
    "grouprep_roundtrip": _grouprep_roundtrip,
}


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run one experiment and write its artifacts; rows are written even when a check fails."""
    result = ExperimentResult(config)
    config.output_dir.mkdir(parents=True, exist_ok=True)
    logger.info("running %s (seed %d) into %s", config.label, config.seed, config.output_dir)
    try:
        PIPELINES[config.kind](result)
    except NumericalFailure:
        write_outputs(result)
        raise
    except (ConfigError, KeyboardInterrupt):
        raise
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as e:
        write_outputs(result)
        raise NumericalFailure(f"{type(e).__name__}: {e}", {"module": type(e).__module__}) from e
    write_outputs(result)
    return result


def thread_count() -> int:
    raw = os.environ.get("TWISTLAB_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ConfigError([f"TWISTLAB_THREADS must be an integer, got {raw!r}"])
    return os.cpu_count() or 1


def run_batch(configs: list[ExperimentConfig]) -> list[ExperimentResult | Exception]:
    """Run independent experiments concurrently; failures are returned in place of results."""
    def run_one(config):
        try:
            return run_experiment(config)
        except NumericalFailure as e:
            return e

    workers = min(thread_count(), len(configs))
    if workers <= 1:
        return [run_one(c) for c in configs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_one, configs))
