import numpy as np
import pytest

from histq.asymptotics import (
    divergence_probe, norm_sweep, phi_member_value, phi_projector, state_family, tracial_bound_probe,
    tracial_values, truncated_series,
)
from histq.decoherence import ILSOperator, Propagator, QuantumState, build_X, eval_ils
from histq.errors import BadIndex, DimensionCap
from histq.histories import HistoryProjector, HistorySpec


def test_pure_sweep_closed_form():
    res = norm_sweep(state_family("pure"), 1, range(2, 9), seed=0, family_name="pure")
    assert [r.d for r in res.rows] == list(range(2, 9))
    for r in res.rows:
        assert abs(r.trace_norm - r.d) < 1e-9
        assert r.operator_norm <= 1 + 1e-9
        assert 0 <= r.tracial_sup <= r.operator_norm + 1e-12


@pytest.mark.parametrize("family", ["maximally_mixed", "geometric:0.5"])
def test_mixed_sweep_increases(family):
    for n in (1, 2):
        res = norm_sweep(state_family(family), n, [2, 3, 4, 5] if n == 1 else [2, 3, 4])
        tn = [r.trace_norm for r in res.rows]
        assert all(b > a for a, b in zip(tn, tn[1:]))
        for r in res.rows:
            # trace norm of the doubled operator is d^(2n-1) for every state
            assert abs(r.trace_norm - r.d ** (2 * n - 1)) < 1e-8 * r.trace_norm


def test_operator_norm_is_top_weight():
    res = norm_sweep(state_family("maximally_mixed"), 1, [2, 3, 4])
    for r in res.rows:
        assert abs(r.operator_norm - 1 / r.d) < 1e-9


def test_sweep_respects_cap():
    with pytest.raises(DimensionCap):
        norm_sweep(state_family("pure"), 2, [2, 100])


def test_state_family_errors():
    with pytest.raises(ValueError):
        state_family("thermal")
    with pytest.raises(ValueError):
        state_family("geometric:1.5")


def test_tracial_probe_on_scaled_identity():
    for d, n in [(2, 1), (3, 1), (2, 2)]:
        spec = HistorySpec.uniform(d, n)
        x = ILSOperator(spec, np.eye(spec.doubled_dim) / spec.doubled_dim)
        assert abs(tracial_bound_probe(x, 64) - 1 / d ** (2 * n)) < 1e-12


def test_tracial_probe_monotone_in_samples():
    spec = HistorySpec.uniform(3, 1)
    x = build_X(state_family("geometric:0.4")(3), Propagator.identity(spec))
    vals = [tracial_bound_probe(x, s, seed=5) for s in (1, 8, 64, 256)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert np.array_equal(tracial_values(x, 8, seed=5), tracial_values(x, 64, seed=5)[:8])
    assert tracial_bound_probe(x, 0) == 0.0


def test_phi_projector():
    p = phi_projector(4, 2, 1)
    assert np.abs(p @ p - p).max() < 1e-15
    assert abs(np.trace(p) - 1) < 1e-15
    # symmetric case i == i1 gives |ii><ii|
    q = phi_projector(3, 2, 2)
    assert q[4, 4] == 1 and abs(np.trace(q) - 1) < 1e-15


def test_member_value_closed_form(rng):
    d = 5
    w = rng.random(d)
    w /= w.sum()
    for _ in range(10):
        q = rng.standard_normal((d * d, d * d)) + 1j * rng.standard_normal((d * d, d * d))
        for i in range(1, d + 1):
            for i1 in (1, 3):
                if i == i1:
                    continue
                direct = truncated_series(w, phi_projector(d, i, i1), q)
                assert abs(direct - phi_member_value(w, i, i1, q)) < 1e-12


def test_truncated_series_matches_ils():
    # with an identity propagator and a diagonal state every basis is the standard one
    d = 3
    w = np.array([0.5, 0.3, 0.2])
    spec = HistorySpec.uniform(d, 2)
    x = build_X(QuantumState(np.diag(w).astype(complex)), Propagator.identity(spec))
    rng = np.random.default_rng(4)
    for _ in range(10):
        p = rng.standard_normal((9, 9))
        p = (p + p.T) / 2
        q = rng.standard_normal((9, 9))
        q = (q + q.T) / 2
        assert abs(truncated_series(w, p, q) - eval_ils(x, HistoryProjector(spec, p), HistoryProjector(spec, q))) < 1e-12


def test_divergence_slope():
    res = divergence_probe([0.5, 0.3, 0.2], 1, range(4, 21))
    assert abs(res.fitted_slope - 0.25) < 1e-9
    assert res.fit_residual < 1e-9
    for r in res.rows:
        # (d - 1) w_i1 / 2 plus half the remaining weight
        assert abs(r.partial_sum - (0.5 * (r.d - 1) * 0.5 + 0.5 * 0.5)) < 1e-12


def test_divergence_unit_weight_grows_linearly():
    res = divergence_probe([1.0], 1, [4, 8, 16])
    assert [r.partial_sum.real for r in res.rows] == pytest.approx([1.5, 3.5, 7.5])
    assert res.omega_i1 == 1.0


def test_divergence_rule_and_renormalize():
    res = divergence_probe(lambda i: 2.0 ** -i, 2, range(4, 12), renormalize=True)
    assert len(res.rows) == 8
    assert np.all(np.diff([r.partial_sum.real for r in res.rows]) > 0)


def test_divergence_bad_index():
    with pytest.raises(BadIndex):
        divergence_probe([1.0], 0, [4, 5])
    with pytest.raises(BadIndex):
        divergence_probe([1.0], 5, [4, 5])
