"""Scenario files: YAML (or JSON) documents describing a system and a task list.

Complex numbers are ``[re, im]`` pairs or plain reals; matrices are
row-major nested lists.  Example::

    spec: {single_dim: 2, times: [1, 2]}
    state: pure0
    propagator: hadamard_chain
    histories:
      up_up: ["span{0}", "span{0}"]
    partitions:
      z_z: [["span{0}", "span{1}"], ["span{0}", "span{1}"]]
    tasks:
      - {kind: consistency, partition: z_z}
"""

import re
from dataclasses import dataclass, field

import numpy as np
import yaml

from .asymptotics import state_family
from .decoherence import Propagator, QuantumState
from .errors import HistqError, ParseError, ValidationError
from .histories import HistorySpec, HomogeneousHistory, product_partition, span_projector
from .linalg import validate

TASK_KINDS = (
    "evaluate", "ils_build", "ils_verify", "check_axioms", "check_constraints",
    "decompose", "gns", "consistency", "norm_sweep", "divergence_probe",
)


class _UniqueKeyLoader(yaml.SafeLoader):
    pass


def _construct_mapping(loader, node, deep=False):
    seen = set()
    for key_node, _ in node.value:
        key = loader.construct_object(key_node, deep=deep)
        if key in seen:
            mark = key_node.start_mark
            raise ParseError(f"line {mark.line + 1}: duplicate key {key!r}")
        seen.add(key)
    return loader.construct_mapping(node, deep)


_UniqueKeyLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)


@dataclass
class TaskRecord:
    kind: str
    name: str
    seed: int = 0
    params: dict = field(default_factory=dict)


@dataclass
class Scenario:
    spec: HistorySpec
    state: QuantumState
    propagator: Propagator
    histories: dict
    partitions: dict
    tasks: list
    source: str = ""


def parse_scalar(v, where):
    if isinstance(v, bool):
        raise ParseError(f"{where}: expected a number, got {v!r}")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(a, (int, float)) and not isinstance(a, bool) for a in v):
        return complex(v[0], v[1])
    raise ParseError(f"{where}: expected a number or [re, im] pair, got {v!r}")


def parse_matrix(v, where, dim=None):
    if not isinstance(v, list) or not v or not all(isinstance(r, list) for r in v):
        raise ParseError(f"{where}: expected a matrix as a list of rows")
    rows = [[parse_scalar(x, f"{where}[{i}][{j}]") for j, x in enumerate(r)] for i, r in enumerate(v)]
    if len({len(r) for r in rows}) != 1:
        raise ParseError(f"{where}: ragged matrix")
    m = np.array(rows, dtype=complex)
    if dim is not None and m.shape != (dim, dim):
        raise ValidationError(f"{where}: expected a {dim}x{dim} matrix, got {m.shape[0]}x{m.shape[1]}")
    return m


_SPAN = re.compile(r"^\s*span\s*\{\s*([\d\s,]*)\}\s*$")


def parse_projector(v, d, where):
    """A single-time projector: ``span{0,2}``, ``I``/``identity``, ``0``/``zero`` or a matrix."""
    if isinstance(v, str):
        s = v.strip()
        if s in ("I", "identity"):
            return np.eye(d, dtype=complex)
        if s in ("0", "zero"):
            return np.zeros((d, d), dtype=complex)
        m = _SPAN.match(s)
        if not m:
            raise ParseError(f"{where}: unknown projector selector {v!r}")
        idx = [int(t) for t in m.group(1).replace(",", " ").split()]
        if any(i >= d for i in idx):
            raise ValidationError(f"{where}: basis index out of range for dimension {d}")
        return span_projector(d, idx)
    p = parse_matrix(v, where, d)
    rep = validate(p, "projection")
    if not rep.ok:
        raise ValidationError(f"{where}: not a projector {rep.violations}")
    return p


def hadamard():
    return np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def dft_matrix(d):
    k = np.arange(d)
    return np.exp(2j * np.pi * np.outer(k, k) / d) / np.sqrt(d)


def parse_state(v, d):
    where = "state"
    if isinstance(v, str):
        try:
            rule = state_family(v)
        except ValueError as exc:
            raise ParseError(f"{where}: {exc}") from None
        return rule(d)
    if isinstance(v, dict) and "matrix" in v:
        rho = parse_matrix(v["matrix"], f"{where}.matrix", d)
        rep = validate(rho, "density")
        if not rep.ok:
            raise ValidationError(f"state: not a density matrix {rep.violations}")
        return QuantumState(rho)
    if isinstance(v, dict) and "weights" in v and "vectors" in v:
        w = np.array([float(x) for x in v["weights"]])
        vecs = [[parse_scalar(x, f"{where}.vectors") for x in vec] for vec in v["vectors"]]
        vm = np.array(vecs, dtype=complex).T
        if vm.shape != (d, len(w)):
            raise ValidationError(f"state: expected {len(w)} vectors of length {d}")
        if np.any(w < 0):
            raise ValidationError("state: negative spectral weight")
        if np.max(np.abs(vm.conj().T @ vm - np.eye(len(w)))) > 1e-9:
            raise ValidationError("state: spectral vectors are not orthonormal")
        rho = (vm * w) @ vm.conj().T
        rep = validate(rho, "density")
        if not rep.ok:
            raise ValidationError(f"state: not a density matrix {rep.violations}")
        return QuantumState(rho)
    raise ParseError(f"{where}: expected a preset name, {{matrix: ...}} or {{weights, vectors}}")


def parse_propagator(v, spec):
    d, n = spec.single_dim, spec.n
    if v is None or v == "identity":
        return Propagator.identity(spec)
    if v == "hadamard_chain":
        if d != 2:
            raise ValidationError("propagator: hadamard_chain needs single_dim 2")
        step = hadamard()
    elif v == "qft_step":
        step = dft_matrix(d)
    elif isinstance(v, list):
        us = [parse_matrix(u, f"propagator[{i}]", d) for i, u in enumerate(v)]
        if len(us) != n:
            raise ValidationError(f"propagator: expected {n} unitaries, got {len(us)}")
        for i, u in enumerate(us):
            if not validate(u, "unitary").ok:
                raise ValidationError(f"propagator[{i}]: not unitary")
        return Propagator(spec, us)
    else:
        raise ParseError(f"propagator: unknown preset {v!r}")
    # U(t_0, t_i) = step^i
    return Propagator(spec, [np.linalg.matrix_power(step, i) for i in range(1, n + 1)])


def parse_dims(text: str):
    """``"2..8"`` (inclusive range) or ``"2,3,5"``."""
    text = str(text).strip()
    try:
        if ".." in text:
            lo, hi = text.split("..")
            dims = list(range(int(lo), int(hi) + 1))
        else:
            dims = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ParseError(f"bad dimension list {text!r}") from None
    if not dims or any(d < 2 for d in dims):
        raise ParseError(f"dimension list {text!r} must be non-empty with entries >= 2")
    return dims


def _require(doc, key, where="scenario"):
    if key not in doc:
        raise ParseError(f"{where}: missing field {key!r}")
    return doc[key]


def parse_tasks(raw):
    if raw is None:
        return []
    if not isinstance(raw, list):
        raise ParseError("tasks: expected a list")
    tasks, names = [], set()
    for i, t in enumerate(raw):
        if not isinstance(t, dict):
            raise ParseError(f"tasks[{i}]: expected a mapping")
        kind = _require(t, "kind", f"tasks[{i}]")
        if kind not in TASK_KINDS:
            raise ParseError(f"tasks[{i}]: unknown kind {kind!r}")
        name = str(t.get("name", f"{i:02d}-{kind}"))
        if name in names:
            raise ValidationError(f"tasks[{i}]: duplicate task name {name!r}")
        names.add(name)
        seed = t.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ParseError(f"tasks[{i}].seed: expected an integer")
        params = {k: val for k, val in t.items() if k not in ("kind", "name", "seed")}
        tasks.append(TaskRecord(kind, name, seed, params))
    return tasks


def load_scenario(path) -> Scenario:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None
    return parse_scenario(text, source=str(path))


def parse_scenario(text: str, source: str = "<string>") -> Scenario:
    try:
        doc = yaml.load(text, Loader=_UniqueKeyLoader)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        raise ParseError(f"{source}: line {mark.line + 1}: {exc.problem}") from None
    if not isinstance(doc, dict):
        raise ParseError(f"{source}: expected a mapping at top level")

    raw_spec = _require(doc, "spec")
    try:
        spec = HistorySpec(int(_require(raw_spec, "single_dim", "spec")), tuple(_require(raw_spec, "times", "spec")))
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"spec: {exc}") from None
    d = spec.single_dim

    state = parse_state(doc.get("state", "maximally_mixed"), d)
    prop = parse_propagator(doc.get("propagator", "identity"), spec)

    histories = {}
    for name, factors in (doc.get("histories") or {}).items():
        if not isinstance(factors, list) or len(factors) != spec.n:
            raise ValidationError(f"histories.{name}: expected {spec.n} per-time projectors")
        mats = [parse_projector(f, d, f"histories.{name}[{i}]") for i, f in enumerate(factors)]
        histories[str(name)] = HomogeneousHistory(spec, mats)

    partitions = {}
    for name, per_time in (doc.get("partitions") or {}).items():
        if not isinstance(per_time, list) or len(per_time) != spec.n:
            raise ValidationError(f"partitions.{name}: expected {spec.n} per-time partitions")
        cells = [[parse_projector(c, d, f"partitions.{name}[{s}][{k}]") for k, c in enumerate(slot)]
                 for s, slot in enumerate(per_time)]
        try:
            partitions[str(name)] = product_partition(spec, cells)
        except HistqError as exc:
            raise ValidationError(f"partitions.{name}: {exc}") from None

    return Scenario(spec, state, prop, histories, partitions, parse_tasks(doc.get("tasks")), source)
