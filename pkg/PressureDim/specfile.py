"""
Spec files

A run is described by one JSON document:

    {"kind": "similar" | "affine" | "barnsley" | "sft",
     "system": {...},
     "task": {"n": 8, "seed": 0, ...}}

Numbers may be written as JSON numbers or as exact fraction strings ("1/3").
A system may also name a catalogue entry: {"catalog": "takagi", "params": {...}}.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from PressureDim import catalog
from PressureDim.barnsley import BarnsleySystem, Branch
from PressureDim.errors import ValidationError
from PressureDim.selfaffine import AffineIFS
from PressureDim.selfsimilar import SimilarIFS
from PressureDim.symbolic_core import ErgodicMeasureSpec, SubshiftFiniteType
from PressureDim.thermo_pressure import DepthOnePotential

logger = logging.getLogger(__name__)

KINDS = ("similar", "affine", "barnsley", "sft")
TASK_FIELDS = (
    "n", "n_max", "count", "seed", "scales", "tolerance", "probabilities",
    "transition_probabilities", "trials", "depth", "method", "s_grid",
)

Number = Union[int, float, Fraction]


@dataclass
class TaskParams:
    n: Optional[int] = None
    n_max: Optional[int] = None
    count: Optional[int] = None
    seed: Optional[int] = None
    scales: Optional[List[float]] = None
    tolerance: Optional[float] = None
    probabilities: Optional[List[float]] = None
    transition_probabilities: Optional[List[List[float]]] = None
    trials: Optional[int] = None
    depth: Optional[int] = None
    method: Optional[str] = None
    s_grid: Optional[str] = None


@dataclass
class SpecFile:
    kind: str
    system: Any
    task: TaskParams = field(default_factory=TaskParams)
    potential: Optional[DepthOnePotential] = None
    source: Optional[Path] = None

    def measure(self) -> Optional[ErgodicMeasureSpec]:
        """The measure named by task.probabilities (and task.transition_probabilities)."""
        if self.task.probabilities is None:
            return None
        if self.task.transition_probabilities is None:
            return ErgodicMeasureSpec.bernoulli(self.task.probabilities)
        return ErgodicMeasureSpec.markov(self.task.probabilities, self.task.transition_probabilities)


# ----------------------------
# Scalars
# ----------------------------

def parse_number(value: Any, path: str, exact: bool = False) -> Number:
    """JSON number or "p/q" string; `exact` keeps rationals as Fractions."""
    if isinstance(value, bool):
        raise ValidationError(f"expected a number, got {value!r}", field_path=path)
    if isinstance(value, str):
        try:
            number = Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ValidationError(f"cannot parse {value!r} as a number", field_path=path) from None
        return number if exact else float(number)
    if isinstance(value, int):
        return Fraction(value) if exact else float(value)
    if isinstance(value, float):
        return value
    raise ValidationError(f"expected a number, got {type(value).__name__}", field_path=path)


def _numbers(values: Any, path: str, exact: bool = False) -> List[Number]:
    if not isinstance(values, list):
        raise ValidationError("expected a list", field_path=path)
    return [parse_number(v, f"{path}[{i}]", exact) for i, v in enumerate(values)]


def _require(payload: Dict[str, Any], key: str, path: str) -> Any:
    if key not in payload:
        raise ValidationError("missing field", field_path=f"{path}.{key}")
    return payload[key]


def _square(values: Any, size: Optional[int], path: str) -> List[List[Any]]:
    """A size x size list of number rows; size None takes it from the row count."""
    if not isinstance(values, list) or not values:
        raise ValidationError("expected a non-empty list of rows", field_path=path)
    size = len(values) if size is None else size
    if len(values) != size:
        raise ValidationError(f"expected {size} rows, got {len(values)}", field_path=path)
    for row in values:
        if not isinstance(row, list) or len(row) != size:
            raise ValidationError(f"expected a square {size}x{size} matrix", field_path=path)
    return [_numbers(row, f"{path}[{j}]") for j, row in enumerate(values)]


def _integer(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"expected an integer, got {value!r}", field_path=path)
    return value


# ----------------------------
# Systems
# ----------------------------

def _from_catalog(payload: Dict[str, Any], registry: Dict[str, Any], path: str):
    name = payload["catalog"]
    if name not in registry:
        raise ValidationError(f"unknown catalogue entry {name!r} (known: {sorted(registry)})", field_path=f"{path}.catalog")
    params = payload.get("params", {})
    if not isinstance(params, dict):
        raise ValidationError("params must be an object", field_path=f"{path}.params")
    params = {
        key: parse_number(value, f"{path}.params.{key}", exact=True) if isinstance(value, str) else value
        for key, value in params.items()
    }
    try:
        return registry[name](**params)
    except TypeError as exc:
        raise ValidationError(str(exc), field_path=f"{path}.params") from None


def parse_similar(payload: Dict[str, Any], path: str = "system") -> SimilarIFS:
    if "catalog" in payload:
        return _from_catalog(payload, catalog.SIMILAR_CATALOG, path)
    ratios = _numbers(_require(payload, "ratios", path), f"{path}.ratios", exact=True)
    raw = _require(payload, "translations", path)
    if not isinstance(raw, list):
        raise ValidationError("expected a list", field_path=f"{path}.translations")
    translations = [
        tuple(_numbers(t, f"{path}.translations[{i}]", exact=True)) if isinstance(t, list)
        else parse_number(t, f"{path}.translations[{i}]", exact=True)
        for i, t in enumerate(raw)
    ]
    labels = payload.get("labels")
    if "flips" in payload:
        return SimilarIFS.on_line(ratios, translations, flips=payload["flips"], labels=labels)
    orthogonals = payload.get("orthogonals")
    if orthogonals is not None:
        where = f"{path}.orthogonals"
        d = len(translations[0]) if translations and isinstance(translations[0], tuple) else 1
        if not isinstance(orthogonals, list) or len(orthogonals) != len(ratios):
            raise ValidationError(f"expected one {d}x{d} matrix per map", field_path=where)
        orthogonals = np.array([_square(O, d, where) for O in orthogonals], dtype=float)
    return SimilarIFS(tuple(ratios), tuple(translations), orthogonals=orthogonals, labels=labels)


def parse_affine(payload: Dict[str, Any], path: str = "system") -> AffineIFS:
    if "catalog" in payload:
        return _from_catalog(payload, catalog.AFFINE_CATALOG, path)
    matrices = _require(payload, "matrices", path)
    translations = _require(payload, "translations", path)
    if not isinstance(matrices, list) or not isinstance(translations, list):
        raise ValidationError("matrices and translations must be lists", field_path=path)
    if not matrices:
        raise ValidationError("expected at least one map", field_path=f"{path}.matrices")
    parsed, d = [], None
    for i, matrix in enumerate(matrices):
        parsed.append(_square(matrix, d, f"{path}.matrices[{i}]"))
        d = len(parsed[0])
    if len(translations) != len(parsed):
        raise ValidationError(f"expected {len(parsed)} translations, got {len(translations)}",
                              field_path=f"{path}.translations")
    shifts = []
    for i, t in enumerate(translations):
        where = f"{path}.translations[{i}]"
        if not isinstance(t, list) or len(t) != d:
            raise ValidationError(f"expected {d} coordinates", field_path=where)
        shifts.append(_numbers(t, where))
    return AffineIFS(np.array(parsed, dtype=float), np.array(shifts, dtype=float))


BRANCH_KEYS = ("gamma", "v", "a", "lambda", "t")


def parse_barnsley(payload: Dict[str, Any], path: str = "system") -> BarnsleySystem:
    if "catalog" in payload:
        return _from_catalog(payload, catalog.BARNSLEY_CATALOG, path)
    partition = _numbers(_require(payload, "partition", path), f"{path}.partition")
    raw = _require(payload, "branches", path)
    if not isinstance(raw, list):
        raise ValidationError("expected a list", field_path=f"{path}.branches")
    branches = []
    for i, entry in enumerate(raw):
        where = f"{path}.branches[{i}]"
        if isinstance(entry, list):
            if len(entry) != len(BRANCH_KEYS):
                raise ValidationError("a branch is (gamma, v, a, lambda, t)", field_path=where)
            entry = dict(zip(BRANCH_KEYS, entry))
        values = [parse_number(_require(entry, key, where), f"{where}.{key}") for key in BRANCH_KEYS]
        branches.append(Branch(*values))
    return BarnsleySystem(tuple(partition), tuple(branches))


def parse_sft(payload: Dict[str, Any], path: str = "system") -> SubshiftFiniteType:
    transition = _require(payload, "transition", path)
    where = f"{path}.transition"
    if not isinstance(transition, list) or not transition:
        raise ValidationError("expected a 0/1 matrix", field_path=where)
    for i, row in enumerate(transition):
        if not isinstance(row, list) or len(row) != len(transition):
            raise ValidationError(f"expected a square {len(transition)}x{len(transition)} matrix",
                                  field_path=f"{where}[{i}]")
    return SubshiftFiniteType(np.array(transition))


PARSERS = {
    "similar": parse_similar,
    "affine": parse_affine,
    "barnsley": parse_barnsley,
    "sft": parse_sft,
}


# ----------------------------
# Documents
# ----------------------------

def _parse_task(payload: Any) -> TaskParams:
    if payload is None:
        return TaskParams()
    if not isinstance(payload, dict):
        raise ValidationError("task must be an object", field_path="task")
    unknown = sorted(set(payload) - set(TASK_FIELDS))
    if unknown:
        raise ValidationError(f"unknown task fields {unknown}", field_path="task")
    task = TaskParams()
    for key in ("n", "n_max", "count", "seed", "trials", "depth"):
        if key in payload:
            setattr(task, key, _integer(payload[key], f"task.{key}"))
    if "tolerance" in payload:
        task.tolerance = float(parse_number(payload["tolerance"], "task.tolerance"))
    if "scales" in payload:
        task.scales = [float(x) for x in _numbers(payload["scales"], "task.scales")]
    if "probabilities" in payload:
        task.probabilities = [float(x) for x in _numbers(payload["probabilities"], "task.probabilities")]
    if "transition_probabilities" in payload:
        rows = payload["transition_probabilities"]
        if not isinstance(rows, list):
            raise ValidationError("expected a matrix", field_path="task.transition_probabilities")
        task.transition_probabilities = [
            [float(x) for x in _numbers(row, f"task.transition_probabilities[{i}]")] for i, row in enumerate(rows)
        ]
    for key in ("method", "s_grid"):
        if key in payload:
            if not isinstance(payload[key], str):
                raise ValidationError("expected a string", field_path=f"task.{key}")
            setattr(task, key, payload[key])
    return task


def parse_spec(document: Any, source: Optional[Path] = None) -> SpecFile:
    if not isinstance(document, dict):
        raise ValidationError("spec must be a JSON object", field_path="")
    kind = _require(document, "kind", "spec")
    if kind not in KINDS:
        raise ValidationError(f"kind must be one of {KINDS}, got {kind!r}", field_path="kind")
    system_payload = _require(document, "system", "spec")
    if not isinstance(system_payload, dict):
        raise ValidationError("system must be an object", field_path="system")

    system = PARSERS[kind](system_payload)
    potential = None
    if "potential" in system_payload:
        potential = DepthOnePotential(_numbers(system_payload["potential"], "system.potential"))
    spec = SpecFile(kind=kind, system=system, task=_parse_task(document.get("task")), potential=potential, source=source)
    logger.debug("parsed %s spec from %s", kind, source or "<memory>")
    return spec


def load_spec(path: Union[str, Path]) -> SpecFile:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            document = json.load(f)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc}", field_path=str(path)) from None
    except OSError as exc:
        raise ValidationError(f"cannot read spec file: {exc}", field_path=str(path)) from None
    return parse_spec(document, source=path)


def require_kind(spec: SpecFile, kinds: Sequence[str], command: str) -> None:
    if spec.kind not in kinds:
        raise ValidationError(f"{command} needs a {' or '.join(kinds)} system, got {spec.kind}", field_path="kind")
