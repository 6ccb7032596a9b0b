"""Finite-dimensional representation constructions for decoherence functionals.

* realignment of an ILS operator into a Hermitian kernel on the space of
  history-space matrices, and its eigendecomposition into a signed family of
  Hilbert-Schmidt orthonormal operators;
* the split into two positive semidefinite sesquilinear forms;
* the GNS-type map R(b) = Pi(b) rho^{1/2} into Hilbert-Schmidt space.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .decoherence import ILSOperator, Propagator, QuantumState, swap_operator, time_ordered_product
from .errors import NotSwapHermitian, SpecMismatch
from .histories import HistoryProjector, HistorySpec
from .linalg import Tolerance, as_matrix, dagger, eigh, kron_all, sqrt_psd
from .sampling import ginibre, rng_from

# the realigned kernel is Hermitian only up to the rounding of x itself
_KERNEL_TOL = Tolerance(structure_abs=1e-8)

__all__ = [
    "HermitianKernel",
    "TraceFamilyDecomposition",
    "SemiInnerForm",
    "GNSRep",
    "GNSValue",
    "realign",
    "trace_family_decomposition",
    "reconstruct_from_family",
    "semi_inner_split",
    "make_gns",
    "gns_eval",
    "pi_map",
    "estimate_R_norm",
]


@dataclass(frozen=True)
class HermitianKernel:
    spec: HistorySpec
    matrix: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def realign(x: ILSOperator, tol: float = 1e-8) -> HermitianKernel:
    """Reshuffle X[(i,j),(k,l)] into D[(i,k),(l,j)].

    With A = sum_ab v(ab) |a><b| this gives
    d(p, q) = sum D[(ab),(cd)] tr(p E_ab) tr(q E_dc), and D is Hermitian
    exactly when x = F x^dagger F.
    """
    n = x.spec.history_dim
    f = swap_operator(n)
    res = float(np.max(np.abs(x.x - f @ dagger(x.x) @ f)))
    if res > tol:
        raise NotSwapHermitian(f"operator fails x = F x^dagger F (residual {res:.3e})")
    d = np.einsum("aebc->abce", x.tensor).reshape(n * n, n * n)
    return HermitianKernel(x.spec, d)


@dataclass(frozen=True)
class TraceFamilyDecomposition:
    spec: HistorySpec
    pos_weights: np.ndarray
    pos_ops: np.ndarray   # (k, N, N), Hilbert-Schmidt orthonormal
    neg_weights: np.ndarray
    neg_ops: np.ndarray
    cutoff: float

    @property
    def positives(self):
        return list(zip(self.pos_weights, self.pos_ops))

    @property
    def negatives(self):
        return list(zip(self.neg_weights, self.neg_ops))

    @property
    def size(self) -> int:
        return len(self.pos_weights) + len(self.neg_weights)


def trace_family_decomposition(x: ILSOperator, cutoff_rel: float = 1e-12) -> TraceFamilyDecomposition:
    kernel = realign(x)
    n = x.spec.history_dim
    w, v = eigh(kernel.matrix, _KERNEL_TOL)
    cutoff = cutoff_rel * (np.max(np.abs(w)) if w.size else 0.0)
    ops = v.T.reshape(-1, n, n)
    pos, neg = w > cutoff, w < -cutoff
    return TraceFamilyDecomposition(
        x.spec, w[pos], ops[pos], -w[neg], ops[neg], float(cutoff)
    )


def _traces(ops: np.ndarray, m: np.ndarray) -> np.ndarray:
    """tr(m A_k) for each A_k in the stack."""
    return np.einsum("ba,kab->k", m, ops)


def reconstruct_from_family(fam: TraceFamilyDecomposition, p: HistoryProjector, q: HistoryProjector) -> complex:
    if p.spec != fam.spec or q.spec != fam.spec:
        raise SpecMismatch("projector spec differs from the decomposition spec")
    total = 0j
    for w, ops, sign in ((fam.pos_weights, fam.pos_ops, 1.0), (fam.neg_weights, fam.neg_ops, -1.0)):
        if len(w):
            tp = _traces(ops, p.matrix)
            tq = _traces(np.conj(np.swapaxes(ops, 1, 2)), q.matrix)
            total += sign * np.sum(w * tp * tq)
    return complex(total)


class SemiInnerForm:
    """<x, y> = sum_k w_k tr(x A_k) conj(tr(y A_k)) with w_k >= 0."""

    def __init__(self, weights, ops, dim):
        self.weights = np.asarray(weights, dtype=float)
        self.ops = np.asarray(ops, dtype=complex).reshape(-1, dim, dim)

    def __call__(self, x, y) -> complex:
        x, y = _mat(x), _mat(y)
        return complex(np.sum(self.weights * _traces(self.ops, x) * np.conj(_traces(self.ops, y))))

    def gram(self, family) -> np.ndarray:
        """Matrix G[i, j] = <f_i, f_j> over a finite operator family."""
        t = np.array([_traces(self.ops, _mat(f)) for f in family]).reshape(len(family), -1)
        return (t * self.weights) @ dagger(t)


def _mat(a):
    return a.matrix if isinstance(a, HistoryProjector) else as_matrix(a)


def semi_inner_split(fam: TraceFamilyDecomposition):
    """Return (plus, minus) forms with d(p, q) = plus(p, q) - minus(p, q)."""
    n = fam.spec.history_dim
    return SemiInnerForm(fam.pos_weights, fam.pos_ops, n), SemiInnerForm(fam.neg_weights, fam.neg_ops, n)


@dataclass(frozen=True)
class GNSRep:
    state: QuantumState
    prop: Propagator
    sqrt_rho: np.ndarray = field(repr=False)
    n: int


def make_gns(state: QuantumState, prop: Propagator) -> GNSRep:
    if state.dim != prop.spec.single_dim:
        raise SpecMismatch("state dimension differs from the single-time dimension")
    return GNSRep(state, prop, sqrt_psd(state.rho), prop.spec.n)


def _check_poly(rep, poly):
    d = rep.prop.spec.single_dim
    for coef, factors in poly:
        if len(factors) != rep.n:
            raise SpecMismatch(f"elementary tensor has {len(factors)} factors, expected {rep.n}")
        for f in factors:
            if np.shape(f) != (d, d):
                raise SpecMismatch(f"tensor factor has shape {np.shape(f)}, expected {(d, d)}")


def pi_map(rep: GNSRep, poly) -> np.ndarray:
    """Linear extension of b_1 (x) ... (x) b_n -> b_n ... b_1 (dressed).

    ``poly`` is a list of (coefficient, [b_1, ..., b_n]) pairs.
    """
    _check_poly(rep, poly)
    out = np.zeros((rep.prop.spec.single_dim,) * 2, dtype=complex)
    for coef, factors in poly:
        out += coef * time_ordered_product(factors, rep.prop)
    return out


def poly_matrix(poly) -> np.ndarray:
    """The tensor polynomial as a dense operator on the n-fold tensor space."""
    return sum(coef * kron_all(factors) for coef, factors in poly)


class GNSValue(NamedTuple):
    value: complex
    lhs_check: complex


def gns_eval(rep: GNSRep, b, b_prime) -> GNSValue:
    """<R(b'), R(b)> in Hilbert-Schmidt space next to tr(Pi(b')^dagger Pi(b) rho)."""
    pb, pbp = pi_map(rep, b), pi_map(rep, b_prime)
    rb, rbp = pb @ rep.sqrt_rho, pbp @ rep.sqrt_rho
    value = np.vdot(rbp, rb)
    lhs = np.trace(dagger(pbp) @ pb @ rep.state.rho)
    return GNSValue(complex(value), complex(lhs))


def _r_ratio(rep, poly):
    op = np.linalg.norm(poly_matrix(poly), 2)
    if op == 0:
        return 0.0
    return float(np.linalg.norm(pi_map(rep, poly) @ rep.sqrt_rho) / op)


def _structured_starts(rep):
    """Identity and, for n >= 2, the slot-(1,2) swap, both undressed so Pi sees them bare."""
    d, n = rep.prop.spec.single_dim, rep.n
    us = rep.prop.u_list

    def bare(i, m):
        return dagger(us[i]) @ m @ us[i]

    starts = [[(1.0, [np.eye(d, dtype=complex) for _ in range(n)])]]
    if n >= 2:
        swap = []
        for i in range(d):
            for j in range(d):
                e_ij = np.zeros((d, d), dtype=complex)
                e_ij[i, j] = 1.0
                rest = [np.eye(d, dtype=complex)] * (n - 2)
                swap.append((1.0, [bare(0, e_ij), bare(1, e_ij.T)] + [bare(k + 2, r) for k, r in enumerate(rest)]))
        starts.append(swap)
    return starts


def estimate_R_norm(rep: GNSRep, restarts: int = 8, seed: int = 0, steps: int = 60) -> float:
    """Lower bound on sup ||R(b)||_HS / ||b||_op by multi-start random ascent.

    Candidates are sums of at most d^2 elementary tensors.  Each restart
    hill-climbs by Gaussian perturbation of the factors with an annealed step.
    """
    rng = rng_from(seed)
    d, n = rep.prop.spec.single_dim, rep.n
    starts = _structured_starts(rep)
    best = 0.0
    for r in range(restarts):
        if r < len(starts):
            poly = starts[r]
        else:
            terms = int(rng.integers(1, d * d + 1))
            poly = [(1.0, [ginibre(rng, d) for _ in range(n)]) for _ in range(terms)]
        cur = _r_ratio(rep, poly)
        step = 0.3
        for _ in range(steps):
            trial = [(c, [f + step * ginibre(rng, d) for f in fs]) for c, fs in poly]
            val = _r_ratio(rep, trial)
            if val > cur:
                poly, cur = trial, val
            else:
                step *= 0.95
        best = max(best, cur)
    return best
