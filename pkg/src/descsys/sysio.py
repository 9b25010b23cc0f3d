"""File formats: JSON system definitions, JSON reports, CSV trajectories.

Matrices are stored as row-major nested arrays of decimal numbers, so a
file written by this module re-parses to bit-identical values (Python
serializes floats through repr, which round-trips). Complex canonical
forms cannot be represented in the file format and are refused.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, is_dataclass
from typing import Any

import numpy as np

from .errors import StructuralError
from .oracle import ResidualReport
from .pencil import Pencil, WeierstrassForm
from .solver import DescriptorSystem, InputSignal, Trajectory


def _matrix_to_lists(A: np.ndarray, name: str) -> list:
    A = np.asarray(A)
    if np.iscomplexobj(A):
        if A.size and np.max(np.abs(A.imag)) > 0:
            raise StructuralError(
                f"field '{name}': complex matrices are not representable "
                "in the file format"
            )
        A = A.real
    return [[float(x) for x in row] for row in A]


def _matrix_from(obj, name: str) -> np.ndarray:
    try:
        A = np.array(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise StructuralError(f"field '{name}': not a numeric matrix") from exc
    if A.ndim != 2:
        raise StructuralError(f"field '{name}': expected a nested array (matrix)")
    if not np.all(np.isfinite(A)):
        raise StructuralError(f"field '{name}': non-finite entries")
    return A


def _vector_from(obj, name: str) -> np.ndarray:
    try:
        v = np.array(obj, dtype=float).reshape(-1)
    except (TypeError, ValueError) as exc:
        raise StructuralError(f"field '{name}': not a numeric vector") from exc
    if not np.all(np.isfinite(v)):
        raise StructuralError(f"field '{name}': non-finite entries")
    return v


def pencil_to_dict(pencil: Pencil) -> dict:
    return {
        "F": _matrix_to_lists(pencil.F, "F"),
        "G": _matrix_to_lists(pencil.G, "G"),
    }


def pencil_from_dict(data: dict) -> Pencil:
    for key in ("F", "G"):
        if key not in data:
            raise StructuralError(f"field '{key}': missing")
    return Pencil(F=_matrix_from(data["F"], "F"), G=_matrix_from(data["G"], "G"))


def weierstrass_to_dict(wf: WeierstrassForm) -> dict:
    return {
        "P": _matrix_to_lists(wf.P, "P"),
        "Q": _matrix_to_lists(wf.Q, "Q"),
        "J_p": _matrix_to_lists(wf.J_p, "J_p"),
        "H_q": _matrix_to_lists(wf.H_q, "H_q"),
        "p": int(wf.p),
        "q": int(wf.q),
        "q_star": int(wf.q_star),
    }


def weierstrass_from_dict(data: dict) -> WeierstrassForm:
    for key in ("P", "Q", "J_p", "H_q", "p", "q", "q_star"):
        if key not in data:
            raise StructuralError(f"field 'wf.{key}': missing")
    try:
        p = int(data["p"])
        q = int(data["q"])
        q_star = int(data["q_star"])
    except (TypeError, ValueError) as exc:
        raise StructuralError("field 'wf': p, q, q_star must be integers") from exc
    return WeierstrassForm(
        P=_matrix_from(data["P"], "wf.P"),
        Q=_matrix_from(data["Q"], "wf.Q"),
        J_p=_matrix_from(data["J_p"], "wf.J_p"),
        H_q=_matrix_from(data["H_q"], "wf.H_q"),
        p=p,
        q=q,
        q_star=q_star,
    )


@dataclass(frozen=True)
class LoadedSystem:
    """Parsed system file: the system plus optional run data."""

    system: DescriptorSystem
    Y0: np.ndarray | None
    input: InputSignal | None
    order: float | None
    horizon: int | None
    wf_supplied: bool


def system_from_dict(data: dict) -> LoadedSystem:
    if not isinstance(data, dict):
        raise StructuralError("system file must hold a JSON object")
    pencil = pencil_from_dict(data)
    if "C" not in data:
        raise StructuralError("field 'C': missing")
    C = _matrix_from(data["C"], "C")
    B = _matrix_from(data["B"], "B") if data.get("B") is not None else None
    wf = None
    if data.get("wf") is not None:
        wf = weierstrass_from_dict(data["wf"])
    system = DescriptorSystem(pencil=pencil, C=C, B=B, wf=wf)

    Y0 = _vector_from(data["Y0"], "Y0") if data.get("Y0") is not None else None
    signal = None
    if data.get("inputs") is not None:
        vals = _matrix_from(data["inputs"], "inputs")
        signal = InputSignal(vals)
    order = None
    if data.get("n") is not None:
        try:
            order = float(data["n"])
        except (TypeError, ValueError) as exc:
            raise StructuralError("field 'n': not a number") from exc
    horizon = None
    if data.get("horizon") is not None:
        try:
            horizon = int(data["horizon"])
        except (TypeError, ValueError) as exc:
            raise StructuralError("field 'horizon': not an integer") from exc
        if horizon < 0:
            raise StructuralError("field 'horizon': must be nonnegative")
    return LoadedSystem(
        system=system,
        Y0=Y0,
        input=signal,
        order=order,
        horizon=horizon,
        wf_supplied=wf is not None,
    )


def load_system(path) -> LoadedSystem:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise StructuralError(f"cannot read system file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise StructuralError(
            f"system file is not valid JSON (line {exc.lineno}, column {exc.colno})"
        ) from exc
    return system_from_dict(data)


def system_to_dict(
    system: DescriptorSystem,
    *,
    Y0=None,
    input: InputSignal | None = None,
    order: float | None = None,
    horizon: int | None = None,
    include_wf: bool = True,
) -> dict:
    data = pencil_to_dict(system.pencil)
    data["C"] = _matrix_to_lists(system.C, "C")
    if system.B is not None:
        data["B"] = _matrix_to_lists(system.B, "B")
    if include_wf and system.wf is not None:
        data["wf"] = weierstrass_to_dict(system.wf)
    if Y0 is not None:
        data["Y0"] = [float(x) for x in np.asarray(Y0).reshape(-1)]
    if input is not None:
        data["inputs"] = _matrix_to_lists(input.values, "inputs")
    if order is not None:
        data["n"] = float(order)
    if horizon is not None:
        data["horizon"] = int(horizon)
    return data


def save_system(path, system: DescriptorSystem, **kwargs) -> None:
    data = system_to_dict(system, **kwargs)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(report_text(data))
        fh.write("\n")


def jsonable(obj: Any) -> Any:
    """Recursively convert package objects into JSON-serializable data."""
    if isinstance(obj, ResidualReport):
        return {
            "max_residual": float(obj.max_residual),
            "per_k": [float(x) for x in obj.per_k],
            "bound_used": float(obj.bound_used),
            "pass": bool(obj.passed),
        }
    if is_dataclass(obj) and not isinstance(obj, type):
        return {
            name: jsonable(getattr(obj, name))
            for name in obj.__dataclass_fields__
        }
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            if obj.size and np.max(np.abs(obj.imag)) > 0:
                return {
                    "real": jsonable(obj.real),
                    "imag": jsonable(obj.imag),
                }
            obj = obj.real
        return obj.tolist()
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        if obj.imag == 0:
            return obj.real
        return {"real": obj.real, "imag": obj.imag}
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    return obj


def report_text(data: dict) -> str:
    """Canonical JSON rendering: sorted keys, stable float formatting."""
    return json.dumps(jsonable(data), indent=2, sort_keys=True)


def write_report(path, data: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(report_text(data))
        fh.write("\n")


def trajectory_csv_text(traj: Trajectory) -> str:
    """CSV rendering with one row per step and 17-significant-digit values."""
    states = np.asarray(traj.states)
    if np.iscomplexobj(states):
        raise StructuralError("complex trajectories are not representable in CSV")
    outputs = None
    if traj.outputs is not None:
        outputs = np.asarray(traj.outputs)
        if np.iscomplexobj(outputs):
            raise StructuralError("complex outputs are not representable in CSV")
    m = states.shape[1]
    header = ["k"] + [f"Y_{i + 1}" for i in range(m)]
    if outputs is not None:
        header += [f"X_{i + 1}" for i in range(outputs.shape[1])]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for k in range(states.shape[0]):
        row = [str(k)] + [f"{x:.17g}" for x in states[k]]
        if outputs is not None:
            row += [f"{x:.17g}" for x in outputs[k]]
        writer.writerow(row)
    return buf.getvalue()


def write_trajectory_csv(path, traj: Trajectory) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(trajectory_csv_text(traj))


def read_trajectory_csv(path) -> Trajectory:
    """Parse a trajectory CSV back into state and output arrays."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            rows = list(reader)
    except OSError as exc:
        raise StructuralError(f"cannot read trajectory file: {exc}") from exc
    if not rows:
        raise StructuralError("trajectory file is empty")
    header = rows[0]
    m = sum(1 for name in header if name.startswith("Y_"))
    n_out = sum(1 for name in header if name.startswith("X_"))
    if header[:1] != ["k"] or m == 0 or len(header) != 1 + m + n_out:
        raise StructuralError("trajectory header must be k, Y_1.., X_1..")
    states = []
    outputs = []
    for idx, row in enumerate(rows[1:]):
        if len(row) != len(header):
            raise StructuralError(f"trajectory row {idx}: wrong column count")
        try:
            values = [float(x) for x in row[1:]]
        except ValueError as exc:
            raise StructuralError(f"trajectory row {idx}: non-numeric entry") from exc
        states.append(values[:m])
        outputs.append(values[m:])
    states_arr = np.array(states, dtype=float)
    outputs_arr = np.array(outputs, dtype=float) if n_out else None
    return Trajectory(
        states=states_arr,
        outputs=outputs_arr,
        kind="standard",
        meta={"solver": "file"},
    )
