import numpy as np
import pytest

from histq.consistency import analyze_partition, coarse_grain_check, decoherence_matrix
from histq.decoherence import Propagator, QuantumState, build_X, ils_functional
from histq.errors import BadGrouping, NotAPartition
from histq.histories import BooleanPartition, HistoryProjector, HistorySpec, product_partition
from histq.sampling import random_partition

from conftest import P0, P1, PMINUS, PPLUS, random_system


def qubit_df(rho):
    spec = HistorySpec.uniform(2, 2)
    return spec, ils_functional(build_X(QuantumState(rho), Propagator.identity(spec)))


def test_classical_example():
    spec, df = qubit_df(P0)
    rep = analyze_partition(df, product_partition(spec, [[P0, P1], [P0, P1]]))
    assert rep.consistent
    assert np.allclose(rep.probabilities, [1, 0, 0, 0], atol=1e-12)
    assert rep.max_offdiag_re < 1e-12
    assert rep.prob_sum_error < 1e-12


def test_interference_example():
    spec, df = qubit_df(PPLUS)
    part = product_partition(spec, [[P0, P1], [PPLUS, PMINUS]])
    rep = analyze_partition(df, part)
    assert not rep.consistent
    assert abs(rep.max_offdiag_re - 0.25) < 1e-12
    i, j = part.labels.index("(0,0)"), part.labels.index("(1,0)")
    assert abs(rep.matrix[i, j] - 0.25) < 1e-12
    i, j = part.labels.index("(0,1)"), part.labels.index("(1,1)")
    assert abs(rep.matrix[i, j] + 0.25) < 1e-12
    assert np.allclose(rep.probabilities, [0.25] * 4)


def test_trivial_partition(rng):
    spec, state, prop = random_system(rng, 3, 2)
    df = ils_functional(build_X(state, prop))
    rep = analyze_partition(df, BooleanPartition(spec, [spec.identity()], ["all"]))
    assert rep.consistent and rep.max_offdiag_re == 0.0
    assert abs(rep.probabilities[0] - 1) < 1e-12


def test_matrix_hermitian_and_biadditive(rng):
    for d, n in [(2, 2), (3, 2), (2, 3)]:
        spec, state, prop = random_system(rng, d, n)
        df = ils_functional(build_X(state, prop))
        part = product_partition(spec, [random_partition(rng, d) for _ in range(n)])
        mat = decoherence_matrix(df, part)
        assert np.abs(mat - mat.conj().T).max() < 1e-12
        # d(I, I) = 1 splits into the diagonal plus twice the real upper triangle
        upper = mat[np.triu_indices(len(mat), 1)]
        assert abs(np.trace(mat).real + 2 * upper.real.sum() - 1) < 1e-9


def test_rejects_non_partition():
    spec, df = qubit_df(P0)
    bad = BooleanPartition(spec, [spec.identity(), spec.identity()], ["a", "b"])
    with pytest.raises(NotAPartition):
        analyze_partition(df, bad)


def test_coarse_grain_trivial_groupings(rng):
    spec, state, prop = random_system(rng, 2, 2)
    df = ils_functional(build_X(state, prop))
    part = product_partition(spec, [[P0, P1], [PPLUS, PMINUS]])
    single = coarse_grain_check(df, part, [[i] for i in range(4)])
    assert single.ok and single.max_violation < 1e-12
    whole = coarse_grain_check(df, part, [[0, 1, 2, 3]])
    assert whole.ok
    assert abs(whole.coarse_probabilities[0] - 1) < 1e-9


def test_coarse_grain_random(rng):
    for _ in range(20):
        d = int(rng.integers(2, 4))
        spec, state, prop = random_system(rng, d, 2)
        df = ils_functional(build_X(state, prop))
        part = product_partition(spec, [random_partition(rng, d) for _ in range(2)])
        m = len(part.members)
        perm = rng.permutation(m)
        cuts = sorted(rng.choice(np.arange(1, m), size=min(2, m - 1), replace=False)) if m > 1 else []
        grouping = [list(map(int, g)) for g in np.split(perm, cuts)]
        rep = coarse_grain_check(df, part, grouping)
        assert rep.max_violation <= 1e-9
        assert rep.ok


def test_coarse_grain_consistent_probabilities():
    spec, df = qubit_df(P0)
    part = product_partition(spec, [[P0, P1], [P0, P1]])
    rep = coarse_grain_check(df, part, [[0, 3], [1, 2]])
    assert rep.ok and rep.prob_violation < 1e-12
    assert np.allclose(rep.coarse_probabilities, rep.fine_sums)


def test_coarse_grain_bad_grouping():
    spec, df = qubit_df(P0)
    part = product_partition(spec, [[P0, P1], [P0, P1]])
    with pytest.raises(BadGrouping):
        coarse_grain_check(df, part, [[0, 1], [1, 2, 3]])
    with pytest.raises(BadGrouping):
        coarse_grain_check(df, part, [[0, 1]])
    with pytest.raises(BadGrouping):
        coarse_grain_check(df, part, [[0, 1, 2, 3], []])


def test_report_to_dict():
    spec, df = qubit_df(PPLUS)
    rep = analyze_partition(df, product_partition(spec, [[P0, P1], [P0, P1]]))
    out = rep.to_dict()
    assert out["labels"] == ["(0,0)", "(0,1)", "(1,0)", "(1,1)"]
    assert out["matrix"][0][0] == [pytest.approx(0.5), pytest.approx(0.0)]
    assert out["consistent"] is True


def test_custom_partition_from_projectors():
    spec, df = qubit_df(PPLUS)
    a = HistoryProjector(spec, np.diag([1.0, 1.0, 0, 0]))
    b = HistoryProjector(spec, np.diag([0, 0, 1.0, 1.0]))
    rep = analyze_partition(df, BooleanPartition(spec, [a, b], ["first0", "first1"]))
    # single-time z measurement of |+>: fair coin, no interference
    assert rep.consistent
    assert np.allclose(rep.probabilities, [0.5, 0.5])
