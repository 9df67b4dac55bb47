"""JSON-compatible dumps of matrices, solutions and diagnostics."""

import json
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np

from schbf.baselines import BaselineSolution
from schbf.hbf import HbfSolution, SolverDiagnostics


def matrix_to_dict(m) -> Dict[str, Any]:
    m = np.asarray(m, dtype=complex)
    return {"shape": list(m.shape), "real": m.real.ravel().tolist(), "imag": m.imag.ravel().tolist()}


def matrix_from_dict(data: Dict[str, Any]) -> np.ndarray:
    values = np.asarray(data["real"], dtype=float) + 1j * np.asarray(data["imag"], dtype=float)
    return values.reshape(data["shape"])


def solution_to_dict(solution: HbfSolution) -> Dict[str, Any]:
    return {
        "scheme": solution.scheme,
        "gamma": solution.gamma,
        "v_rf": matrix_to_dict(solution.v_rf),
        "v_d": matrix_to_dict(solution.v_d),
        "v_u": matrix_to_dict(solution.v_u),
        "w_rf": matrix_to_dict(solution.w_rf),
        "w_d": matrix_to_dict(solution.w_d),
    }


def solution_from_dict(data: Dict[str, Any]) -> HbfSolution:
    return HbfSolution(
        v_rf=matrix_from_dict(data["v_rf"]),
        v_d=matrix_from_dict(data["v_d"]),
        w_rf=matrix_from_dict(data["w_rf"]),
        w_d=matrix_from_dict(data["w_d"]),
        gamma=float(data["gamma"]),
        v_u=matrix_from_dict(data["v_u"]),
    )


def baseline_to_dict(solution: BaselineSolution) -> Dict[str, Any]:
    data = {
        "scheme": solution.scheme,
        "w_rf": matrix_to_dict(solution.w_rf),
        "w_d": matrix_to_dict(solution.w_d),
    }
    for name in ("v_rf", "v_d", "precoders"):
        value = getattr(solution, name)
        if value is not None:
            data[name] = matrix_to_dict(value)
    return data


def solve_report(solution: HbfSolution, diagnostics: SolverDiagnostics, resolved_config: Dict[str, Any]) -> Dict[str, Any]:
    """The document written by ``schbf solve``."""
    return {
        "config": resolved_config,
        "solution": solution_to_dict(solution),
        "diagnostics": diagnostics.to_dict(),
        "transmit_power": solution.transmit_power,
    }


def write_json(document: Dict[str, Any], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(document, indent=2, sort_keys=True), encoding="utf-8")
    return path
