"""The standard decoherence functional and its ILS operator.

Conventions
-----------
``Propagator.u_list[i]`` is ``U(t_0, t_i)``.  A single-time projector ``P``
at time ``t_i`` is dressed as ``U(t_0, t_i) P U(t_0, t_i)^dagger``; this is
the dressing that makes ``X = (U^dagger (x) U^dagger) Y (U (x) U)`` reproduce
the class-operator formula.

The doubled history space is ``copy 1 (t_1..t_n) (x) copy 2 (t_1..t_n)``.
"""

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy.optimize import minimize

from .errors import SpecMismatch, ValidationError
from .histories import HistoryProjector, HistorySpec, HomogeneousHistory, join
from .linalg import DEFAULT_TOL, as_matrix, dagger, eigh, hermiticity_residual, validate
from .sampling import haar_unitary, orthogonal_pair, random_projector, random_unit_vector, rng_from

__all__ = [
    "QuantumState",
    "Propagator",
    "ILSOperator",
    "AxiomReport",
    "ConstraintReport",
    "ProjectorSampler",
    "class_operator",
    "eval_standard",
    "build_Y",
    "build_X",
    "eval_ils",
    "ils_functional",
    "check_axioms",
    "check_ils_constraints",
    "swap_operator",
]


@dataclass(frozen=True)
class QuantumState:
    rho: np.ndarray = field(repr=False)
    weights: np.ndarray = field(init=False, repr=False)
    vectors: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        rho = as_matrix(self.rho)
        rep = validate(rho, "density")
        if not rep.ok:
            raise ValidationError(f"state is not a density matrix: {rep.violations}")
        w, v = eigh(rho)
        w = np.clip(w, 0.0, None)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "vectors", v)

    @classmethod
    def from_spectrum(cls, weights, vectors):
        """State sum_i w_i |v_i><v_i| from weights and column vectors."""
        w = np.asarray(weights, dtype=float)
        v = as_matrix(vectors, square=False)
        return cls((v * w) @ dagger(v))

    @classmethod
    def pure(cls, psi):
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    def spectrum(self):
        return list(zip(self.weights, self.vectors.T))


@dataclass(frozen=True)
class Propagator:
    spec: HistorySpec
    u_list: tuple

    def __post_init__(self):
        us = tuple(as_matrix(u) for u in self.u_list)
        if len(us) != self.spec.n:
            raise SpecMismatch(f"expected {self.spec.n} unitaries, got {len(us)}")
        for i, u in enumerate(us):
            if u.shape != (self.spec.single_dim,) * 2:
                raise SpecMismatch(f"unitary {i} has shape {u.shape}")
            rep = validate(u, "unitary")
            if not rep.ok:
                raise ValidationError(f"propagator entry {i} is not unitary: {rep.violations}")
        object.__setattr__(self, "u_list", us)

    @classmethod
    def identity(cls, spec):
        return cls(spec, [np.eye(spec.single_dim, dtype=complex)] * spec.n)


@dataclass(frozen=True)
class ILSOperator:
    spec: HistorySpec
    x: np.ndarray = field(repr=False)
    y: Optional[np.ndarray] = field(default=None, repr=False)
    provenance: str = "external"

    def __post_init__(self):
        x = as_matrix(self.x)
        if x.shape != (self.spec.doubled_dim,) * 2:
            raise SpecMismatch(f"ILS operator shape {x.shape} does not match doubled dim {self.spec.doubled_dim}")
        object.__setattr__(self, "x", x)

    @property
    def tensor(self) -> np.ndarray:
        """``x`` viewed as X[i, j, k, l] = <i (x) j| x |k (x) l> over history indices."""
        n = self.spec.history_dim
        return self.x.reshape(n, n, n, n)


def _check_history(spec, h):
    if h.spec != spec:
        raise SpecMismatch(f"history spec {h.spec} differs from {spec}")


def _dressed(prop: Propagator, i: int, b: np.ndarray) -> np.ndarray:
    u = prop.u_list[i]
    return u @ b @ dagger(u)


def time_ordered_product(factors, prop: Propagator) -> np.ndarray:
    """b_n ... b_1 with each b_i dressed by U(t_0, t_i)."""
    out = np.eye(prop.spec.single_dim, dtype=complex)
    for i, b in enumerate(factors):
        out = _dressed(prop, i, as_matrix(b)) @ out
    return out


def class_operator(h: HomogeneousHistory, prop: Propagator) -> np.ndarray:
    _check_history(prop.spec, h)
    return time_ordered_product(h.factors, prop)


def eval_standard(state: QuantumState, prop: Propagator, h: HomogeneousHistory, k: HomogeneousHistory) -> complex:
    """tr(C_h rho C_k^dagger) for homogeneous histories ``h`` and ``k``."""
    _check_history(prop.spec, h)
    _check_history(prop.spec, k)
    if state.dim != prop.spec.single_dim:
        raise SpecMismatch("state dimension differs from the single-time dimension")
    ch = class_operator(h, prop)
    ck = class_operator(k, prop)
    return complex(np.trace(ch @ state.rho @ dagger(ck)))


def _basis_slots(n):
    """(ket slot, bra slot) of basis e^j, j = 1..2n, in the Y series."""
    ket, bra = {1: 0}, {2 * n: 0}
    for m in range(2, n + 1):
        ket[2 * n + 2 - m] = m - 1
        bra[2 * n + 1 - m] = m - 1
    for m in range(1, n + 1):
        ket[m + 1] = n + m - 1
        bra[m] = n + m - 1
    return [(ket[j], bra[j]) for j in range(1, 2 * n + 1)]


_LETTERS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"


def build_Y(state: QuantumState, spec: HistorySpec, aux_bases=None) -> np.ndarray:
    """Assemble the state-only factor Y of the ILS operator.

    Every summation index i_j occurs in exactly one ket and one bra, so the
    series factorizes into one contraction per basis e^j:
    K_j = sum_i w_i |e^j_i><e^j_i| placed between its ket and bra slots, with
    w = rho's weights for e^1 (the rho eigenbasis) and w = 1 otherwise.

    ``aux_bases`` gives e^2 .. e^{2n} as matrices whose columns are the basis
    vectors; the standard basis is used when omitted.
    """
    if state.dim != spec.single_dim:
        raise SpecMismatch("state dimension differs from the single-time dimension")
    spec.check_doubled_cap()
    n, d = spec.n, spec.single_dim
    if aux_bases is None:
        aux_bases = [np.eye(d, dtype=complex)] * (2 * n - 1)
    aux_bases = [as_matrix(b) for b in aux_bases]
    if len(aux_bases) != 2 * n - 1:
        raise ValueError(f"need {2 * n - 1} auxiliary bases, got {len(aux_bases)}")
    for j, b in enumerate(aux_bases, start=2):
        if b.shape != (d, d) or not validate(b, "unitary").ok:
            raise ValidationError(f"auxiliary basis e^{j} is not orthonormal")

    kernels = [(state.vectors * state.weights) @ dagger(state.vectors)]
    kernels += [b @ dagger(b) for b in aux_bases]

    rows, cols = _LETTERS[: 2 * n], _LETTERS[2 * n: 4 * n]
    terms = [rows[k] + cols[b] for k, b in _basis_slots(n)]
    y = np.einsum(",".join(terms) + "->" + rows + cols, *kernels, optimize=True)
    dim = spec.doubled_dim
    return y.reshape(dim, dim)


def _conjugate_by_slots(op: np.ndarray, unitaries, d: int) -> np.ndarray:
    """(V^dagger) op (V) for V the Kronecker product of ``unitaries`` (one per slot)."""
    m = len(unitaries)
    t = op.reshape((d,) * (2 * m))
    for s, u in enumerate(unitaries):
        # rows: contract with conj(u)[a, r]; cols: contract with u[b, c]
        t = np.moveaxis(np.tensordot(dagger(u), t, axes=([1], [s])), 0, s)
        t = np.moveaxis(np.tensordot(t, u, axes=([m + s], [0])), -1, m + s)
    return t.reshape(op.shape)


def build_X(state: QuantumState, prop: Propagator, aux_bases=None) -> ILSOperator:
    spec = prop.spec
    y = build_Y(state, spec, aux_bases)
    us = list(prop.u_list) * 2
    x = _conjugate_by_slots(y, us, spec.single_dim)
    return ILSOperator(spec, x, y, provenance="standard")


def eval_ils(x: ILSOperator, p: HistoryProjector, q: HistoryProjector) -> complex:
    """tr((p (x) q) x) for arbitrary projectors, homogeneous or not."""
    if p.spec != x.spec or q.spec != x.spec:
        raise SpecMismatch("projector spec differs from the ILS operator spec")
    return complex(np.einsum("ijkl,ki,lj->", x.tensor, p.matrix, q.matrix, optimize=True))


def ils_functional(x: ILSOperator) -> Callable:
    """Closure (p, q) -> tr((p (x) q) x)."""
    return lambda p, q: eval_ils(x, p, q)


def swap_operator(n: int) -> np.ndarray:
    """Swap F of C^n (x) C^n."""
    f = np.zeros((n * n, n * n))
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    f[(j * n + i).ravel(), (i * n + j).ravel()] = 1.0
    return f


class ProjectorSampler:
    """Seeded source of random history projectors for a fixed spec."""

    def __init__(self, spec: HistorySpec, seed=0):
        self.spec = spec
        self.seed = seed
        self.rng = rng_from(seed)

    def projector(self) -> HistoryProjector:
        return HistoryProjector(self.spec, random_projector(self.rng, self.spec.history_dim))

    def orthogonal_pair(self):
        a, b = orthogonal_pair(self.rng, self.spec.history_dim)
        return HistoryProjector(self.spec, a), HistoryProjector(self.spec, b)

    def unit_vector(self) -> np.ndarray:
        return random_unit_vector(self.rng, self.spec.history_dim)


class AxiomReport(NamedTuple):
    hermiticity_violation: float
    diagonal_negativity: float
    normalization_error: float
    additivity_violation: float
    samples_used: int
    seed: object

    def passed(self, tol=1e-9) -> bool:
        return max(self.hermiticity_violation, self.diagonal_negativity,
                   self.normalization_error, self.additivity_violation) <= tol


def check_axioms(df: Callable, sampler: ProjectorSampler, samples: int = 100) -> AxiomReport:
    """Measure how far ``df`` is from being a decoherence functional.

    Each sample draws two random projectors and an orthogonal pair; the
    orthogonal join is formed with the lattice join, not by adding matrices.
    """
    spec = sampler.spec
    one, zero = spec.identity(), spec.zero()
    herm = neg = add = 0.0
    norm = abs(df(one, one) - 1.0)
    for _ in range(samples):
        p, q = sampler.projector(), sampler.projector()
        p1, p2 = sampler.orthogonal_pair()
        dpp = df(p, p)
        herm = max(herm, abs(dpp.imag), abs(df(p, q) - np.conj(df(q, p))))
        neg = max(neg, -dpp.real)
        norm = max(norm, abs(df(zero, p)))
        j = join(p1, p2)
        add = max(add, abs(df(j, q) - df(p1, q) - df(p2, q)))
    return AxiomReport(float(herm), float(neg), float(norm), float(add), samples, sampler.seed)


class ConstraintReport(NamedTuple):
    trace_error: float
    swap_residual: float
    sampled_min: float
    descent_min: float
    certificate: np.ndarray

    @property
    def minimum(self) -> float:
        return min(self.sampled_min, self.descent_min)

    def passed(self, tol=1e-9) -> bool:
        return self.trace_error <= tol and self.swap_residual <= tol and self.minimum >= -tol


def _symmetric_form(x: ILSOperator):
    """psi -> Re <psi (x) psi| x |psi (x) psi> and its gradient over (Re psi, Im psi)."""
    n = x.spec.history_dim
    m = 0.5 * (x.x + dagger(x.x))

    def value_and_grad(z):
        zc = z[:n] + 1j * z[n:]
        r = np.linalg.norm(zc)
        v = zc / r
        w = (m @ np.kron(v, v)).reshape(n, n)
        f = float(np.real(np.vdot(np.kron(v, v), w.ravel())))
        g = w @ v.conj() + w.T @ v.conj()
        gv = 2.0 * g
        # project out the radial direction, rescale by 1/|z|
        gv = (gv - v * np.real(np.vdot(v, gv))) / r
        return f, np.concatenate([gv.real, gv.imag])

    return value_and_grad


def check_ils_constraints(x: ILSOperator, sampler: ProjectorSampler, samples: int = 100,
                          descent_restarts: int = 32, gtol: float = 1e-8) -> ConstraintReport:
    """Check trace normalization, swap-hermiticity and diagonal positivity of ``x``.

    Positivity of p -> tr((p (x) p) x) is probed two ways: on sampled random
    projectors, and by multi-start L-BFGS minimization of
    <psi psi| x |psi psi> over unit vectors psi.
    """
    n = x.spec.history_dim
    trace_error = abs(np.trace(x.x) - 1.0)
    f = swap_operator(n)
    swap_residual = float(np.max(np.abs(x.x - f @ dagger(x.x) @ f)))

    sampled_min = np.inf
    for _ in range(samples):
        p = sampler.projector()
        sampled_min = min(sampled_min, eval_ils(x, p, p).real)

    fg = _symmetric_form(x)
    best, cert = np.inf, None
    for _ in range(descent_restarts):
        v0 = sampler.unit_vector()
        res = minimize(fg, np.concatenate([v0.real, v0.imag]), jac=True, method="L-BFGS-B",
                       options={"gtol": gtol, "ftol": 1e-15, "maxiter": 2000})
        if res.fun < best:
            z = res.x[:n] + 1j * res.x[n:]
            best, cert = float(res.fun), z / np.linalg.norm(z)
    return ConstraintReport(float(trace_error), swap_residual, float(sampled_min), best, cert)
