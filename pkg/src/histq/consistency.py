"""Consistency of Boolean partitions of history space."""

from dataclasses import asdict, dataclass

import numpy as np

from .errors import BadGrouping
from .histories import BooleanPartition, HistoryProjector


@dataclass
class ConsistencyReport:
    labels: list
    matrix: np.ndarray
    max_offdiag_re: float
    consistent: bool
    probabilities: list
    prob_sum_error: float
    tolerance_used: float

    def to_dict(self):
        out = asdict(self)
        out["matrix"] = [[[float(z.real), float(z.imag)] for z in row] for row in self.matrix]
        return out


def decoherence_matrix(df, part: BooleanPartition) -> np.ndarray:
    m = len(part.members)
    out = np.empty((m, m), dtype=complex)
    for i, p in enumerate(part.members):
        for j, q in enumerate(part.members):
            out[i, j] = df(p, q)
    return out


def analyze_partition(df, part: BooleanPartition, tol: float = 1e-9) -> ConsistencyReport:
    """Decoherence matrix, consistency verdict and induced probabilities.

    The partition is consistent when every off-diagonal entry has real part
    at most ``tol`` in absolute value.
    """
    part.check()
    mat = decoherence_matrix(df, part)
    m = mat.shape[0]
    off = mat[~np.eye(m, dtype=bool)]
    max_off = float(np.max(np.abs(off.real))) if off.size else 0.0
    probs = [float(v) for v in np.real(np.diag(mat))]
    return ConsistencyReport(
        labels=list(part.labels),
        matrix=mat,
        max_offdiag_re=max_off,
        consistent=max_off <= tol,
        probabilities=probs,
        prob_sum_error=float(abs(sum(probs) - 1.0)),
        tolerance_used=tol,
    )


@dataclass
class CoarseGrainReport:
    max_violation: float
    prob_violation: float
    coarse_probabilities: list
    fine_sums: list
    ok: bool
    tolerance_used: float


def _check_grouping(grouping, m):
    seen = [i for g in grouping for i in g]
    if any(len(g) == 0 for g in grouping):
        raise BadGrouping("empty group")
    if sorted(seen) != list(range(m)):
        raise BadGrouping(f"grouping must cover member indices 0..{m - 1} exactly once")


def coarse_grain_check(df, part: BooleanPartition, grouping, tol: float = 1e-9,
                       consistent: bool = None) -> CoarseGrainReport:
    """Verify additivity of ``df`` over the coarse-grained members.

    For each group G, df(sum_{i in G} p_i, q) must equal sum_{i in G} df(p_i, q)
    for every member q.  If the partition is consistent (decided with
    ``analyze_partition`` when ``consistent`` is None), the coarse-grained
    probabilities must also equal the sums of the fine-grained ones.
    """
    m = len(part.members)
    _check_grouping(grouping, m)
    if consistent is None:
        consistent = analyze_partition(df, part, tol).consistent
    viol, pviol = 0.0, 0.0
    coarse, fine = [], []
    for g in grouping:
        pg = HistoryProjector(part.spec, sum(part.members[i].matrix for i in g))
        for q in part.members:
            lhs = df(pg, q)
            rhs = sum(df(part.members[i], q) for i in g)
            viol = max(viol, abs(lhs - rhs))
        cp = float(df(pg, pg).real)
        fp = float(sum(df(part.members[i], part.members[i]).real for i in g))
        coarse.append(cp)
        fine.append(fp)
        if consistent:
            pviol = max(pviol, abs(cp - fp))
    ok = viol <= tol and pviol <= m * m * tol
    return CoarseGrainReport(float(viol), float(pviol), coarse, fine, ok, tol)
