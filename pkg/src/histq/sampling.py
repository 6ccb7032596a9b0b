"""Seeded random matrices: Haar unitaries, states, projectors."""

import numpy as np

from .linalg import dagger


def rng_from(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def ginibre(rng, rows, cols=None):
    cols = rows if cols is None else cols
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def haar_unitary(rng, n):
    # QR of a Ginibre matrix with the phase of R's diagonal divided out (Mezzadri).
    q, r = np.linalg.qr(ginibre(rng, n))
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_unit_vector(rng, n):
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def random_hermitian(rng, n):
    g = ginibre(rng, n)
    return 0.5 * (g + dagger(g))


def random_density(rng, d, rank=None):
    """Random full-rank (or given-rank) density matrix, Hilbert-Schmidt measure."""
    g = ginibre(rng, d, d if rank is None else rank)
    rho = g @ dagger(g)
    rho = 0.5 * (rho + dagger(rho))
    return rho / np.trace(rho).real


def random_projector(rng, n, rank=None):
    """Projector onto ``rank`` Haar-random columns; rank uniform on 1..n-1 by default."""
    if rank is None:
        rank = int(rng.integers(1, n)) if n > 1 else 1
    v = haar_unitary(rng, n)[:, :rank]
    return v @ dagger(v)


def random_partition(rng, n, cells=None):
    """Random orthogonal resolution of the identity on C^n with ``cells`` members."""
    if cells is None:
        cells = int(rng.integers(1, n + 1))
    u = haar_unitary(rng, n)
    cuts = np.sort(rng.choice(np.arange(1, n), size=cells - 1, replace=False)) if cells > 1 else []
    blocks = np.split(np.arange(n), cuts)
    return [u[:, b] @ dagger(u[:, b]) for b in blocks]


def orthogonal_pair(rng, n):
    """Two mutually orthogonal nonzero projectors (needs n >= 2)."""
    u = haar_unitary(rng, n)
    k1 = int(rng.integers(1, n))
    k2 = int(rng.integers(1, n - k1 + 1))
    a, b = u[:, :k1], u[:, k1:k1 + k2]
    return a @ dagger(a), b @ dagger(b)
