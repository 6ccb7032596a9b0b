"""Dimension-truncation probes of the infinite-dimensional behaviour of X_rho."""

from typing import Callable, NamedTuple

import numpy as np

from .decoherence import ILSOperator, Propagator, QuantumState, build_X
from .errors import BadIndex
from .histories import HistorySpec
from .linalg import norms
from .sampling import random_unit_vector, rng_from

TRACIAL_SAMPLES = 512


class SweepRow(NamedTuple):
    d: int
    n: int
    trace_norm: float
    operator_norm: float
    tracial_sup: float


class SweepResult(NamedTuple):
    rows: list
    state_family: str
    seed: int


class DivergenceRow(NamedTuple):
    d: int
    partial_sum: complex


class DivergenceResult(NamedTuple):
    rows: list
    omega_i1: float
    fitted_slope: float
    fit_residual: float


def state_family(name: str) -> Callable[[int], QuantumState]:
    """Named rule d -> QuantumState: ``pure``, ``maximally_mixed`` or ``geometric:r``."""
    if name in ("pure", "pure0"):
        def rule(d):
            rho = np.zeros((d, d), dtype=complex)
            rho[0, 0] = 1.0
            return QuantumState(rho)
    elif name == "maximally_mixed":
        def rule(d):
            return QuantumState(np.eye(d, dtype=complex) / d)
    elif name.startswith("geometric:"):
        r = float(name.split(":", 1)[1])
        if not 0 < r < 1:
            raise ValueError("geometric ratio must lie in (0, 1)")

        def rule(d):
            w = r ** np.arange(d)
            return QuantumState(np.diag(w / w.sum()).astype(complex))
    else:
        raise ValueError(f"unknown state family {name!r}")
    return rule


def _sample_vector(rng, n, k):
    """k-th probe vector on C^n (x) C^n: even k product, odd k entangled."""
    if k % 2 == 0:
        return np.kron(random_unit_vector(rng, n), random_unit_vector(rng, n))
    return random_unit_vector(rng, n * n)


def tracial_values(x: ILSOperator, samples: int, seed: int = 0) -> np.ndarray:
    """|<xi, x xi>| for the first ``samples`` probe vectors of the seeded stream."""
    rng = rng_from(seed)
    n = x.spec.history_dim
    out = np.empty(samples)
    for k in range(samples):
        xi = _sample_vector(rng, n, k)
        out[k] = abs(np.vdot(xi, x.x @ xi))
    return out


def tracial_bound_probe(x: ILSOperator, samples: int = TRACIAL_SAMPLES, seed: int = 0) -> float:
    """Largest |tr(P_xi x)| over seeded random unit vectors xi (product and entangled)."""
    if samples < 1:
        return 0.0
    return float(np.max(tracial_values(x, samples, seed)))


def norm_sweep(family: Callable[[int], QuantumState], n: int, dims, prop_rule=None,
               seed: int = 0, family_name: str = "custom") -> SweepResult:
    """Trace norm, operator norm and tracial sup of X_rho across single-time dimensions."""
    dims = sorted(int(d) for d in dims)
    specs = [HistorySpec.uniform(d, n) for d in dims]
    for spec in specs:
        spec.check_doubled_cap()
    rows = []
    for d, spec in zip(dims, specs):
        prop = prop_rule(d) if prop_rule else Propagator.identity(spec)
        x = build_X(family(d), prop)
        tn, on = norms(x.x)
        rows.append(SweepRow(d, n, tn, on, tracial_bound_probe(x, TRACIAL_SAMPLES, seed)))
    return SweepResult(rows, family_name, seed)


def _weights(omega, d, renormalize):
    if callable(omega):
        w = np.array([float(omega(i)) for i in range(1, d + 1)])
    else:
        w = np.zeros(d)
        vals = np.asarray(omega, dtype=float)[:d]
        w[: len(vals)] = vals
    if renormalize:
        w = w / w.sum()
    return w


def phi_projector(d: int, i: int, i1: int) -> np.ndarray:
    """Projector onto (|psi_i psi_i1> + |psi_i1 psi_i>)/sqrt 2, indices 1-based."""
    phi = np.zeros(d * d)
    phi[(i - 1) * d + (i1 - 1)] += 1.0
    phi[(i1 - 1) * d + (i - 1)] += 1.0
    phi /= np.linalg.norm(phi)
    return np.outer(phi, phi).astype(complex)


def truncated_series(w: np.ndarray, p: np.ndarray, q: np.ndarray) -> complex:
    """Two-time ILS series with every basis equal to the rho eigenbasis, indices < d.

    sum_{j1..j4} w_{j1} p[(j4, j3), (j1, j4)] q[(j1, j2), (j2, j3)]
    """
    d = len(w)
    p4 = np.asarray(p).reshape(d, d, d, d)
    q4 = np.asarray(q).reshape(d, d, d, d)
    return complex(np.einsum("j,ecje,jbbc->", w, p4, q4, optimize=True))


def phi_member_value(w: np.ndarray, i: int, i1: int, q: np.ndarray) -> complex:
    """Closed form 1/2 sum_{j2} (w_{i1} f_{i1,j2,i1}(q) + w_i f_{i,j2,i}(q)), 1-based i, i1."""
    d = len(w)
    q4 = np.asarray(q).reshape(d, d, d, d)
    a, b = i1 - 1, i - 1
    f_a = sum(q4[a, j, j, a] for j in range(d))
    f_b = sum(q4[b, j, j, b] for j in range(d))
    return complex(0.5 * (w[a] * f_a + w[b] * f_b))


def divergence_probe(omega, i1: int, dims, q_rule=None, renormalize: bool = False) -> DivergenceResult:
    """Partial sums D(P_d, q) for P_d the sum of P_phi_i over i <= d, i != i1.

    ``omega`` is either a finite weight list (padded with zeros) or a rule
    i -> weight with 1-based i.  ``q_rule`` maps d to a d^2 x d^2 matrix and
    defaults to the identity.  The slope of Re D against d is fitted by least
    squares.
    """
    dims = sorted(int(d) for d in dims)
    if not dims or i1 < 1 or i1 > dims[0]:
        raise BadIndex(f"i1 = {i1} must lie in 1..{dims[0] if dims else 0}")
    rows = []
    for d in dims:
        w = _weights(omega, d, renormalize)
        p = sum(phi_projector(d, i, i1) for i in range(1, d + 1) if i != i1)
        q = q_rule(d) if q_rule else np.eye(d * d, dtype=complex)
        rows.append(DivergenceRow(d, truncated_series(w, p, q)))
    xs = np.array([r.d for r in rows], dtype=float)
    ys = np.array([r.partial_sum.real for r in rows])
    if len(rows) >= 2:
        slope, icept = np.polyfit(xs, ys, 1)
        resid = float(np.max(np.abs(ys - (slope * xs + icept))))
    else:
        slope, resid = float("nan"), 0.0
    w_i1 = float(_weights(omega, dims[-1], renormalize)[i1 - 1])
    return DivergenceResult(rows, w_i1, float(slope), resid)
