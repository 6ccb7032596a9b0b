"""History spaces, homogeneous histories and the projector lattice.

A history over ``n`` times is a projector on the ``n``-fold tensor power of
the single-time space C^d, with time ``t_1`` in the left-most factor.
"""

import itertools
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionCap, InvalidFactor, NotAPartition, SpecMismatch
from .linalg import DEFAULT_TOL, Tolerance, as_matrix, kron_all, nullspace_projector, validate

MAX_HISTORY_DIM = 4096
DEFAULT_MAX_DOUBLED_DIM = 4096


def max_doubled_dim() -> int:
    """Cap on the doubled-space dimension d^(2n); HISTQ_MAX_DIM overrides it."""
    raw = os.environ.get("HISTQ_MAX_DIM")
    return int(raw) if raw else DEFAULT_MAX_DOUBLED_DIM


@dataclass(frozen=True)
class HistorySpec:
    single_dim: int
    times: tuple

    def __post_init__(self):
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        if int(self.single_dim) != self.single_dim or self.single_dim < 2:
            raise ValueError("single_dim must be an integer >= 2")
        if len(self.times) < 1:
            raise ValueError("a history needs at least one time")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("times must be strictly increasing")
        if self.single_dim ** len(self.times) > MAX_HISTORY_DIM:
            raise DimensionCap(self.single_dim ** len(self.times), MAX_HISTORY_DIM)

    @classmethod
    def uniform(cls, d, n):
        return cls(d, tuple(range(1, n + 1)))

    @property
    def n(self) -> int:
        return len(self.times)

    @property
    def history_dim(self) -> int:
        return self.single_dim ** self.n

    @property
    def doubled_dim(self) -> int:
        return self.history_dim ** 2

    def check_doubled_cap(self):
        limit = max_doubled_dim()
        if self.doubled_dim > limit:
            raise DimensionCap(self.doubled_dim, limit)

    def identity(self):
        return HistoryProjector(self, np.eye(self.history_dim, dtype=complex))

    def zero(self):
        return HistoryProjector(self, np.zeros((self.history_dim,) * 2, dtype=complex))


@dataclass(frozen=True)
class HomogeneousHistory:
    spec: HistorySpec
    factors: tuple

    def __post_init__(self):
        factors = tuple(as_matrix(f) for f in self.factors)
        if len(factors) != self.spec.n:
            raise SpecMismatch(f"expected {self.spec.n} factors, got {len(factors)}")
        d = self.spec.single_dim
        for i, f in enumerate(factors):
            if f.shape != (d, d):
                raise InvalidFactor(f"factor {i} has shape {f.shape}, expected {(d, d)}")
            rep = validate(f, "projection")
            if not rep.ok:
                raise InvalidFactor(f"factor {i} is not a projector: {rep.violations}")
        object.__setattr__(self, "factors", factors)


@dataclass(frozen=True)
class HistoryProjector:
    spec: HistorySpec
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = as_matrix(self.matrix)
        if m.shape != (self.spec.history_dim,) * 2:
            raise SpecMismatch(f"projector shape {m.shape} does not match history dim {self.spec.history_dim}")
        object.__setattr__(self, "matrix", m)

    def is_valid(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        return validate(self.matrix, "projection", tol).ok


@dataclass(frozen=True)
class BooleanPartition:
    spec: HistorySpec
    members: tuple
    labels: tuple

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.members) != len(self.labels):
            raise ValueError("members and labels differ in length")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("partition labels must be unique")
        for m in self.members:
            _same_spec(self.spec, m.spec)

    def check(self, tol: Tolerance = DEFAULT_TOL):
        """Raise NotAPartition unless members are orthogonal and sum to the identity."""
        n = self.spec.history_dim
        total = np.zeros((n, n), dtype=complex)
        for i, p in enumerate(self.members):
            if not p.is_valid(tol):
                raise NotAPartition(f"member {self.labels[i]} is not a projector")
            total += p.matrix
        for i, j in itertools.combinations(range(len(self.members)), 2):
            if not orthogonal(self.members[i], self.members[j], tol):
                raise NotAPartition(f"members {self.labels[i]} and {self.labels[j]} are not orthogonal")
        err = float(np.max(np.abs(total - np.eye(n))))
        if err > tol.eq_abs:
            raise NotAPartition(f"members do not sum to the identity (max deviation {err:.3e})")


def _same_spec(a: HistorySpec, b: HistorySpec):
    if a != b:
        raise SpecMismatch(f"history specs differ: {a} vs {b}")


def embed_homogeneous(h: HomogeneousHistory) -> HistoryProjector:
    """Map P_{t_1}, ..., P_{t_n} to P_{t_1} (x) ... (x) P_{t_n}."""
    return HistoryProjector(h.spec, kron_all(h.factors))


def complement(p: HistoryProjector) -> HistoryProjector:
    return HistoryProjector(p.spec, np.eye(p.spec.history_dim) - p.matrix)


def meet(p: HistoryProjector, q: HistoryProjector, tol: Tolerance = DEFAULT_TOL) -> HistoryProjector:
    # range(p) ∩ range(q) is the kernel of (1-p) + (1-q)
    _same_spec(p.spec, q.spec)
    eye = np.eye(p.spec.history_dim)
    return HistoryProjector(p.spec, nullspace_projector((eye - p.matrix) + (eye - q.matrix), tol))


def join(p: HistoryProjector, q: HistoryProjector, tol: Tolerance = DEFAULT_TOL) -> HistoryProjector:
    return complement(meet(complement(p), complement(q), tol))


def lattice_op(kind: str, p: HistoryProjector, q: HistoryProjector = None, tol: Tolerance = DEFAULT_TOL):
    if kind == "complement":
        if q is not None:
            raise ValueError("complement takes a single projector")
        return complement(p)
    if q is None:
        raise ValueError(f"{kind} needs two projectors")
    if kind == "meet":
        return meet(p, q, tol)
    if kind == "join":
        return join(p, q, tol)
    raise ValueError(f"unknown lattice operation {kind!r}")


def orthogonal(p: HistoryProjector, q: HistoryProjector, tol: Tolerance = DEFAULT_TOL) -> bool:
    _same_spec(p.spec, q.spec)
    return float(np.max(np.abs(p.matrix @ q.matrix))) <= tol.structure_abs


def is_single_time_partition(cells, d, tol: Tolerance = DEFAULT_TOL):
    """Return None if ``cells`` is an orthogonal resolution of I_d, else a reason string."""
    cells = [as_matrix(c) for c in cells]
    if not cells:
        return "empty partition"
    for i, c in enumerate(cells):
        if c.shape != (d, d):
            return f"cell {i} has shape {c.shape}"
        if not validate(c, "projection", tol).ok:
            return f"cell {i} is not a projector"
    for i, j in itertools.combinations(range(len(cells)), 2):
        if np.max(np.abs(cells[i] @ cells[j])) > tol.structure_abs:
            return f"cells {i} and {j} are not orthogonal"
    if np.max(np.abs(sum(cells) - np.eye(d))) > tol.eq_abs:
        return "cells do not sum to the identity"
    return None


def product_partition(spec: HistorySpec, per_time, labels=None, tol: Tolerance = DEFAULT_TOL) -> BooleanPartition:
    """All tensor products of single-time partition cells, in lexicographic index order."""
    per_time = [list(cells) for cells in per_time]
    if len(per_time) != spec.n:
        raise SpecMismatch(f"expected {spec.n} single-time partitions, got {len(per_time)}")
    for slot, cells in enumerate(per_time):
        reason = is_single_time_partition(cells, spec.single_dim, tol)
        if reason:
            raise NotAPartition(f"time slot {slot}: {reason}", slot=slot)
    members, names = [], []
    for idx in itertools.product(*(range(len(c)) for c in per_time)):
        factors = [per_time[s][a] for s, a in enumerate(idx)]
        members.append(HistoryProjector(spec, kron_all(factors)))
        names.append("(" + ",".join(map(str, idx)) + ")")
    if labels is not None:
        names = list(labels)
    return BooleanPartition(spec, members, names)


def span_projector(d, indices):
    """Projector onto the span of the given standard basis vectors of C^d."""
    p = np.zeros((d, d), dtype=complex)
    for i in indices:
        p[i, i] = 1.0
    return p
