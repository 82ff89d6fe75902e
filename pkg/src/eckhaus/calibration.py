"""One-time calibration of the Landau-bracket prefactor against a Newton oracle.

The Swift-Hohenberg wave amplitude at tiny eps is computed directly and compared
with ``eps * alpha(0)`` for each candidate prefactor.  Exactly one candidate must
agree within 1%; it is frozen in ``data/gamma_calibration.json``.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

from .cgl import GAMMA_CANDIDATES, cgl_coefficients
from .turing import find_turing_point
from .wave import solve_wave
from .zoo import swift_hohenberg

MATCH_RTOL = 0.01
CLASSICAL_RTOL = 1e-4


def calibrate_gamma_prefactor(eps: float = 1e-3, M: int = 64) -> dict:
    model = swift_hohenberg()
    crit = find_turing_point(model)
    amplitudes = []
    for cand in GAMMA_CANDIDATES:
        # start Newton from each candidate's guess; the converged wave must not depend on it
        cgl = cgl_coefficients(model, crit, prefactor=cand)
        prof = solve_wave(model, crit, cgl, eps, 0.0, M=M, tol=1e-15)
        amplitudes.append(2 * abs(prof.mode(1)[0]))
    amplitude = float(amplitudes[0])
    spread = float(max(amplitudes) - min(amplitudes))
    classical = 2 * eps / np.sqrt(3)
    rows = []
    for cand in GAMMA_CANDIDATES:
        predicted = eps * float(cgl_coefficients(model, crit, prefactor=cand).alpha(0.0))
        rel = abs(predicted - amplitude) / amplitude
        rows.append({"prefactor": cand, "predicted_amplitude": predicted, "relative_error": rel,
                     "matches": bool(rel <= MATCH_RTOL)})
    matches = [r["prefactor"] for r in rows if r["matches"]]
    return {
        "oracle": "swift-hohenberg Newton wave, kappa = 0",
        "eps": eps,
        "M": M,
        "amplitude": amplitude,
        "amplitude_spread_over_initial_guesses": spread,
        "classical_amplitude": classical,
        "classical_relative_error": abs(amplitude - classical) / classical,
        "candidates": rows,
        "selected": matches[0] if len(matches) == 1 else None,
        "status": "calibrated" if len(matches) == 1 else "ambiguous",
    }


def _round(obj):
    if isinstance(obj, float):
        return float(f"{obj:.10g}")
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_round(v) for v in obj]
    return obj


def write_calibration(path: Path | None = None) -> dict:
    result = _round(calibrate_gamma_prefactor())
    if result["selected"] is None:
        raise RuntimeError(f"calibration did not select a unique prefactor: {result['candidates']}")
    path = Path(__file__).with_name("data") / "gamma_calibration.json" if path is None else Path(path)
    path.write_text(json.dumps(result, indent=2, sort_keys=True) + "\n")
    return result


if __name__ == "__main__":
    json.dump(write_calibration(), sys.stdout, indent=2)
    print()
