"""Dense complex linear algebra kernel.

All operators are plain ``numpy`` arrays of dtype ``complex128``.  Tensor
factors are ordered left to right, so ``kron(a, b)`` puts ``a`` on the
left-most (slowest varying) index.
"""

from dataclasses import dataclass
from functools import reduce
from typing import NamedTuple

import numpy as np

from .errors import NotHermitian, NotPSD

__all__ = [
    "Tolerance",
    "DEFAULT_TOL",
    "as_matrix",
    "dagger",
    "kron",
    "kron_all",
    "eigh",
    "norms",
    "sqrt_psd",
    "nullspace_projector",
    "validate",
    "ValidationReport",
    "hermiticity_residual",
]


@dataclass(frozen=True)
class Tolerance:
    eq_abs: float = 1e-9
    structure_abs: float = 1e-10
    spectral_cutoff_rel: float = 1e-12

    def __post_init__(self):
        for name in ("eq_abs", "structure_abs", "spectral_cutoff_rel"):
            if not getattr(self, name) > 0:
                raise ValueError(f"tolerance {name} must be strictly positive")


DEFAULT_TOL = Tolerance()


def as_matrix(a, square=True) -> np.ndarray:
    """Coerce ``a`` to a finite 2-d complex128 array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {m.shape}")
    if square and m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a, square=False), as_matrix(b, square=False))


def kron_all(factors) -> np.ndarray:
    """Left-to-right Kronecker product of a non-empty sequence of matrices."""
    factors = list(factors)
    if not factors:
        raise ValueError("kron_all needs at least one factor")
    return reduce(np.kron, (as_matrix(f, square=False) for f in factors))


def hermiticity_residual(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - dagger(a)))) if a.size else 0.0


def eigh(h, tol: Tolerance = DEFAULT_TOL):
    """Hermitian eigendecomposition with ascending real eigenvalues.

    Raises NotHermitian when any entry of ``h - h^dagger`` exceeds
    ``tol.structure_abs``.  The input is symmetrized before LAPACK sees it.
    """
    h = as_matrix(h)
    res = hermiticity_residual(h)
    if res > tol.structure_abs:
        raise NotHermitian(f"matrix is not Hermitian (max |h - h^dagger| = {res:.3e})")
    w, v = np.linalg.eigh(0.5 * (h + dagger(h)))
    return w, v


class Norms(NamedTuple):
    trace_norm: float
    operator_norm: float


def norms(a) -> Norms:
    s = np.linalg.svd(as_matrix(a), compute_uv=False)
    return Norms(float(np.sum(s)), float(s[0]) if s.size else 0.0)


def _psd_spectrum(a, tol):
    w, v = eigh(a, tol)
    if w.size and w[0] < -tol.structure_abs:
        raise NotPSD(f"matrix has a negative eigenvalue {w[0]:.3e}")
    return np.clip(w, 0.0, None), v


def sqrt_psd(a, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Positive square root of a Hermitian PSD matrix (small negatives clamped)."""
    w, v = _psd_spectrum(a, tol)
    r = (v * np.sqrt(w)) @ dagger(v)
    return 0.5 * (r + dagger(r))


def nullspace_projector(a, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthogonal projector onto the numerical kernel of a PSD matrix."""
    w, v = _psd_spectrum(a, tol)
    top = w[-1] if w.size else 0.0
    keep = w <= tol.spectral_cutoff_rel * top
    vk = v[:, keep]
    return vk @ dagger(vk)


class ValidationReport(NamedTuple):
    ok: bool
    kind: str
    violations: dict

    @property
    def max_violation(self) -> float:
        return max(self.violations.values(), default=0.0)


def validate(a, kind: str, tol: Tolerance = DEFAULT_TOL) -> ValidationReport:
    """Check that ``a`` is a projection, density matrix or unitary.

    Never raises on a bad matrix; the report lists each violated quantity.
    """
    a = as_matrix(a)
    n = a.shape[0]
    herm = hermiticity_residual(a)
    if kind == "projection":
        idem = float(np.max(np.abs(a @ a - a)))
        viol = {"hermiticity": herm, "idempotence": idem}
        ok = herm <= tol.structure_abs and idem <= tol.eq_abs
    elif kind == "density":
        w = np.linalg.eigvalsh(0.5 * (a + dagger(a)))
        neg = float(max(0.0, -w[0]))
        tr = float(abs(np.trace(a) - 1.0))
        viol = {"hermiticity": herm, "negativity": neg, "trace": tr}
        ok = herm <= tol.structure_abs and neg <= tol.eq_abs and tr <= tol.eq_abs
    elif kind == "unitary":
        unit = float(np.max(np.abs(dagger(a) @ a - np.eye(n))))
        viol = {"unitarity": unit}
        ok = unit <= tol.eq_abs
    else:
        raise ValueError(f"unknown validation kind {kind!r}")
    return ValidationReport(ok, kind, viol)
