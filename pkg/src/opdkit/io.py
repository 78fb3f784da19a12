"""JSON wire formats.

A matrix is ``{"rows": r, "cols": c, "data": [[re, im], ...]}`` with ``data``
in row-major order; bipartite operators add ``dim_s`` and ``dim_e``.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .frames import OperatorFrame
from .hs import BipartiteOperator, DimensionError
from .opd import OPD, OPDTerm, ReductionCertificate


class FormatError(ValueError):
    """Input does not follow the expected JSON layout."""


def matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=complex)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "data": [[float(z.real), float(z.imag)] for z in m.reshape(-1)],
    }


def matrix_from_json(obj) -> np.ndarray:
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
        arr = np.array([complex(float(re), float(im)) for re, im in data])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed matrix object: {exc!r}") from None
    if arr.size != rows * cols:
        raise FormatError(f"matrix data has {arr.size} entries, expected {rows}x{cols}")
    return arr.reshape(rows, cols)


def bipartite_to_json(op: BipartiteOperator) -> dict:
    return {**matrix_to_json(op.matrix), "dim_s": op.dim_s, "dim_e": op.dim_e}


def bipartite_from_json(obj) -> BipartiteOperator:
    m = matrix_from_json(obj)
    try:
        ds, de = int(obj["dim_s"]), int(obj["dim_e"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bipartite operator needs dim_s and dim_e: {exc!r}") from None
    try:
        return BipartiteOperator(m, ds, de)
    except DimensionError as exc:
        raise FormatError(str(exc)) from None


def _stack_to_json(ops) -> list:
    return [matrix_to_json(m) for m in ops]


def _stack_from_json(objs) -> np.ndarray:
    return np.array([matrix_from_json(o) for o in objs])


def frame_to_json(frame: OperatorFrame) -> dict:
    return {
        "kind": frame.kind,
        "dim": frame.dim,
        "positive": frame.positive,
        "labels": [list(lab) if isinstance(lab, tuple) else lab for lab in frame.labels],
        "elements": _stack_to_json(frame.elements),
        "dual": None if frame.dual is None else _stack_to_json(frame.dual),
    }


def frame_from_json(obj) -> OperatorFrame:
    try:
        labels = tuple(tuple(lab) if isinstance(lab, list) else lab for lab in obj["labels"])
        dual = obj.get("dual")
        return OperatorFrame(
            _stack_from_json(obj["elements"]),
            None if dual is None else _stack_from_json(dual),
            labels,
            obj.get("kind", "custom"),
            bool(obj.get("positive", False)),
        )
    except (KeyError, TypeError, AttributeError) as exc:
        raise FormatError(f"malformed frame object: {exc!r}") from None


def _real_matrix(a) -> list:
    # certificate coefficients are real for Hermitian frames
    return np.real(np.asarray(a)).tolist()


def certificate_to_json(cert: ReductionCertificate) -> dict:
    return {
        "original_count": cert.original_count,
        "final_count": cert.final_count,
        "eliminated": list(cert.eliminated),
        "dependency_coefficients": [_real_matrix(c) for c in cert.dependency_coefficients],
        "updated_dual": _stack_to_json(cert.updated_dual),
        "updated_primal": _stack_to_json(cert.updated_primal),
        "q": _real_matrix(cert.q),
        "f": _real_matrix(cert.f),
        "g": _real_matrix(cert.g),
        "schmidt_rank": cert.schmidt_rank,
        "duality_residual": cert.duality_residual,
        "schmidt_basis": None if cert.schmidt_basis is None else _stack_to_json(cert.schmidt_basis),
        "vanishing_residuals": {str(k): v for k, v in cert.vanishing_residuals.items()},
    }


def certificate_from_json(obj) -> ReductionCertificate:
    try:
        return ReductionCertificate(
            original_count=int(obj["original_count"]),
            final_count=int(obj["final_count"]),
            eliminated=tuple(int(i) for i in obj["eliminated"]),
            dependency_coefficients=tuple(np.array(c) for c in obj["dependency_coefficients"]),
            updated_dual=_stack_from_json(obj["updated_dual"]),
            updated_primal=_stack_from_json(obj["updated_primal"]),
            q=np.array(obj["q"]),
            f=np.array(obj["f"]),
            g=np.array(obj["g"]),
            schmidt_rank=int(obj["schmidt_rank"]),
            duality_residual=float(obj["duality_residual"]),
            schmidt_basis=None if obj.get("schmidt_basis") is None else _stack_from_json(obj["schmidt_basis"]),
            vanishing_residuals={int(k): float(v) for k, v in obj["vanishing_residuals"].items()},
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed certificate: {exc!r}") from None


def opd_to_json(opd: OPD) -> dict:
    labels = opd.frame.labels if opd.frame is not None else None
    terms = []
    for t in opd.terms:
        label = labels[t.index] if labels is not None and t.index is not None else None
        terms.append(
            {
                "omega": t.weight,
                "index": t.index,
                "label": list(label) if isinstance(label, tuple) else label,
                "D": matrix_to_json(t.system_op),
                "rho": matrix_to_json(t.env_state),
            }
        )
    return {
        "dim_s": opd.dim_s,
        "dim_e": opd.dim_e,
        "frame": None if opd.frame is None else frame_to_json(opd.frame),
        "terms": terms,
        "certificate": None if opd.certificate is None else certificate_to_json(opd.certificate),
    }


def opd_from_json(obj) -> OPD:
    try:
        terms = tuple(
            OPDTerm(
                float(t["omega"]),
                matrix_from_json(t["D"]),
                matrix_from_json(t["rho"]),
                None if t.get("index") is None else int(t["index"]),
            )
            for t in obj["terms"]
        )
        frame = None if obj.get("frame") is None else frame_from_json(obj["frame"])
        cert = None if obj.get("certificate") is None else certificate_from_json(obj["certificate"])
        return OPD(int(obj["dim_s"]), int(obj["dim_e"]), terms, frame, cert)
    except (KeyError, TypeError, AttributeError) as exc:
        raise FormatError(f"malformed OPD object: {exc!r}") from None


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None


def write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2))


def load_state(path) -> BipartiteOperator:
    return bipartite_from_json(read_json(path))


def load_opd(path) -> OPD:
    return opd_from_json(read_json(path))


def save_opd(opd: OPD, path) -> None:
    write_json(opd_to_json(opd), path)
