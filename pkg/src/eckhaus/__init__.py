"""Turing instabilities, amplitude equations and Bloch spectra of periodic waves."""
from .bloch import assemble_bloch, bloch_sweep, fit_expansion, reduced_prediction, stability_verdict, verify_agreement
from .cgl import cgl_coefficients, normalize
from .kernels import BACKEND
from .turing import find_turing_point, verify_hypotheses
from .wave import second_order_modes, solve_wave
from .zoo import builtin, load_config

__all__ = [
    "BACKEND", "assemble_bloch", "bloch_sweep", "builtin", "cgl_coefficients", "find_turing_point", "fit_expansion",
    "load_config", "normalize", "reduced_prediction", "second_order_modes", "solve_wave", "stability_verdict",
    "verify_agreement", "verify_hypotheses",
]
