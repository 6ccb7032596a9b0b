"""Serialization of task results: JSON payloads, sweep CSV and text tables."""

import io
import json
import os
import tempfile

import numpy as np

SWEEP_HEADER = "d,n,trace_norm,operator_norm,tracial_sup"
DIVERGENCE_HEADER = "d,re_partial_sum,im_partial_sum"


def fmt(v) -> str:
    # 12 significant digits; "+ 0.0" folds -0.0 into 0.0
    return f"{float(v) + 0.0:.12g}"


def jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real) + 0.0, float(obj.imag) + 0.0]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) + 0.0
    return obj


def dumps(report) -> str:
    return json.dumps(jsonable(report), indent=2, sort_keys=True) + "\n"


def sweep_csv(result) -> str:
    out = io.StringIO()
    out.write(SWEEP_HEADER + "\n")
    for r in result.rows:
        out.write(",".join([str(r.d), str(r.n), fmt(r.trace_norm), fmt(r.operator_norm), fmt(r.tracial_sup)]) + "\n")
    return out.getvalue()


def divergence_csv(result) -> str:
    out = io.StringIO()
    out.write(DIVERGENCE_HEADER + "\n")
    for r in result.rows:
        out.write(",".join([str(r.d), fmt(r.partial_sum.real), fmt(r.partial_sum.imag)]) + "\n")
    return out.getvalue()


def write_atomic(path, text: str):
    """Write via a temporary file in the same directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _cplx(v):
    re, im = v
    return f"{re:+.6f}{im:+.6f}j"


def _table(rows):
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows)


def render_text(report: dict) -> str:
    """Human-readable rendering of a stored task report."""
    lines = [f"task: {report.get('name')}  kind: {report.get('kind')}  passed: {str(report.get('passed')).lower()}"]
    kind = report.get("kind")
    body = report.get("result", {})
    if kind == "consistency":
        labels = body["labels"]
        rows = [[""] + labels]
        for lab, row in zip(labels, body["matrix"]):
            rows.append([lab] + [_cplx(v) for v in row])
        lines.append("decoherence matrix:")
        lines.append(_table(rows))
        lines.append(f"consistent: {str(body['consistent']).lower()}")
        lines.append(f"max_offdiag_re: {fmt(body['max_offdiag_re'])}")
        lines.append(_table([["history", "probability"]] + [[lab, fmt(p)] for lab, p in zip(labels, body["probabilities"])]))
        lines.append(f"prob_sum_error: {fmt(body['prob_sum_error'])}")
        lines.append(f"tolerance: {fmt(body['tolerance_used'])}")
        return "\n".join(lines) + "\n"
    if kind == "decompose":
        lines.append(f"positive members: {body['positive_count']}")
        lines.append(f"negative members: {body['negative_count']}")
        lines.append(f"reconstruction residual: {fmt(body['reconstruction_residual'])}")
        shown = {"positive_count", "negative_count", "reconstruction_residual"}
    else:
        shown = set()
    keys = sorted(k for k in body if k not in shown and not isinstance(body[k], (list, dict)))
    if keys:
        width = max(len(k) for k in keys)
        for k in keys:
            v = body[k]
            lines.append(f"{k.ljust(width)}  {fmt(v) if isinstance(v, float) else v}")
    if "tolerance" in report:
        lines.append(f"tolerance: {fmt(report['tolerance'])}")
    return "\n".join(lines) + "\n"
