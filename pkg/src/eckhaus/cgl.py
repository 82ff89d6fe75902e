"""Complex Ginzburg-Landau coefficients, Eckhaus bands and the cGL sideband spectrum.

The amplitude equation is ``A_T = a A_XX + b A + c |A|^2 A`` with
``a = -lambda_kk / 2``, ``b = lambda_mu`` and ``c`` the Landau constant.
Plane waves ``alpha exp(i(kappa X - omega T))`` exist for ``kappa^2 <= kappa_E^2``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Optional

import numpy as np

from .errors import DegenerateAmplitudeError, DegenerateResonanceError, SubcriticalError
from .model import ModelSpec, eval_cform, eval_qform, eval_symbol
from .turing import CriticalData

GAMMA_CANDIDATES = (0.125, 0.25)


def _load_calibration() -> dict:
    try:
        text = resources.files("eckhaus").joinpath("data/gamma_calibration.json").read_text()
        return json.loads(text)
    except (FileNotFoundError, json.JSONDecodeError):
        return {"selected": 0.25, "status": "uncalibrated"}


GAMMA_CALIBRATION = _load_calibration()
GAMMA_PREFACTOR = float(GAMMA_CALIBRATION["selected"])

RESONANCE_COND = 1e12


def resolvent_matrix(model: ModelSpec, crit: CriticalData, eta: int) -> np.ndarray:
    """``[S(eta k_*, 0) + i eta k_* d_*]^{-1}`` for a non-critical harmonic ``eta``."""
    if abs(eta) == 1:
        raise ValueError("eta = +-1 is the critical harmonic")
    k = crit.k_star
    A = eval_symbol(model, eta * k, 0.0) + 1j * eta * k * crit.d_star * np.eye(model.n)
    if np.linalg.cond(A) > RESONANCE_COND:
        raise DegenerateResonanceError(f"S at harmonic {eta} (k = {eta * k:.6g}) is singular")
    return np.linalg.inv(A)


def landau_bracket(model: ModelSpec, crit: CriticalData) -> complex:
    """Unscaled Landau bracket: cubic self-interaction minus the two quadratic feedbacks."""
    k = crit.k_star
    r, ell = crit.r, crit.ell
    rb = r.conj()
    S0 = resolvent_matrix(model, crit, 0)
    S2 = resolvent_matrix(model, crit, 2)
    cubic = 3 * eval_cform(model, k, k, -k, r, r, rb)
    zero_mode = S0 @ eval_qform(model, k, -k, r, rb)
    second = S2 @ eval_qform(model, k, k, r, r)
    quad = -4 * eval_qform(model, 0.0, k, zero_mode, r) - 2 * eval_qform(model, 2 * k, -k, second, rb)
    return complex(ell @ (cubic + quad))


def landau_constant(model: ModelSpec, crit: CriticalData, prefactor: float | None = None) -> complex:
    prefactor = GAMMA_PREFACTOR if prefactor is None else prefactor
    return prefactor * landau_bracket(model, crit)


@dataclass
class CGLCoefficients:
    a: complex
    b: complex
    c: complex
    gamma_prefactor: float = float("nan")
    k_star: float = float("nan")
    s_eta: Optional[Callable] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.a, self.b, self.c = complex(self.a), complex(self.b), complex(self.c)

    @property
    def kappaE_sq(self) -> float:
        return self.b.real / self.a.real

    @property
    def bfn(self) -> float:
        a, b, c = self.a, self.b, self.c
        return a.imag * c.imag * b.real * c.real + a.real * b.real * c.real**2

    @property
    def kappaS_sq(self) -> float:
        a, c = self.a, self.c
        den = a.real * (2 * c.imag**2 * a.real + a.imag * c.imag * c.real + 3 * a.real * c.real**2)
        return self.bfn / den

    @property
    def has_stable_band(self) -> bool:
        return self.bfn > 0

    def alpha_sq(self, kappa) -> np.ndarray:
        return (-self.b.real + self.a.real * np.asarray(kappa, dtype=float) ** 2) / self.c.real

    def alpha(self, kappa):
        a2 = self.alpha_sq(kappa)
        if np.any(a2 < -1e-14 * max(1.0, abs(self.b.real / self.c.real))):
            raise ValueError("kappa outside the existence band")
        return np.sqrt(np.maximum(a2, 0.0))

    def omega(self, kappa):
        kappa = np.asarray(kappa, dtype=float)
        return self.a.imag * kappa**2 - self.b.imag - self.c.imag * self.alpha_sq(kappa)

    def to_dict(self) -> dict:
        c = lambda z: [z.real, z.imag]
        out = {
            "a": c(self.a), "b": c(self.b), "c": c(self.c),
            "gamma_prefactor": self.gamma_prefactor,
            "kappaE_sq": self.kappaE_sq,
            "kappaS_sq": self.kappaS_sq,
            "bfn": self.bfn,
            "has_stable_band": self.has_stable_band,
        }
        if np.isfinite(self.k_star):
            out["k_star"] = self.k_star
        if self.a.real > 0 and self.b.real > 0 and self.c.real < 0:
            out["alpha_at_0"] = float(self.alpha(0.0))
            out["omega_at_0"] = float(self.omega(0.0))
            at, bt, ke, ks = normalize(self)
            out["normalized"] = {"alpha_tilde": at, "beta_tilde": bt, "kappaE_sq": ke, "kappaS_sq": ks}
        return out


def cgl_coefficients(model: ModelSpec, crit: CriticalData, prefactor: float | None = None,
                     allow_subcritical: bool = False) -> CGLCoefficients:
    prefactor = GAMMA_PREFACTOR if prefactor is None else prefactor
    gamma = landau_constant(model, crit, prefactor)
    if gamma.real >= 0 and not allow_subcritical:
        raise SubcriticalError(f"Re gamma = {gamma.real:.6g} >= 0: bifurcation is not supercritical")
    cache = {}

    def s_eta(eta):
        if eta not in cache:
            cache[eta] = resolvent_matrix(model, crit, eta)
        return cache[eta]

    return CGLCoefficients(
        a=-0.5 * crit.d2_lambda_dk2,
        b=crit.d_lambda_dmu,
        c=gamma,
        gamma_prefactor=prefactor,
        k_star=crit.k_star,
        s_eta=s_eta,
    )


def normalize(cgl: CGLCoefficients):
    """Normal-form parameters ``(alpha~, beta~, 1, kappa_S^2)`` after rescaling a, b, c."""
    if not (cgl.a.real > 0 and cgl.b.real > 0 and cgl.c.real < 0):
        raise ValueError("normal form needs Re a > 0, Re b > 0, Re c < 0")
    at = cgl.a.imag / cgl.a.real
    bt = cgl.c.imag / cgl.c.real
    ks = (1 + at * bt) / (3 + at * bt + 2 * bt**2)
    return at, bt, 1.0, ks


def denormalize_kappaS_sq(cgl: CGLCoefficients) -> float:
    """Stable band obtained through the normal form, scaled back."""
    return normalize(cgl)[3] * cgl.kappaE_sq


# ------------------------------------------------------------------ sideband spectrum

def realify(z: complex) -> np.ndarray:
    """Real 2x2 matrix of multiplication by ``z``."""
    z = complex(z)
    return np.array([[z.real, -z.imag], [z.imag, z.real]])


def cgl_sideband_matrix(cgl: CGLCoefficients, kappa: float, sigma: float) -> np.ndarray:
    """Linearised cGL about the plane wave, acting on ``(Re B, Im B)`` Fourier modes."""
    a, c = cgl.a, cgl.c
    alpha2 = float(cgl.alpha_sq(kappa))
    R = realify(a)
    Dm = np.array([[-2 * kappa * a.imag, -2 * kappa * a.real], [2 * kappa * a.real, -2 * kappa * a.imag]])
    A = np.array([[2 * alpha2 * c.real, 0.0], [2 * alpha2 * c.imag, 0.0]])
    return -sigma**2 * R + 1j * sigma * Dm + A


def _quadratic_roots(m):
    tr = m[0, 0] + m[1, 1]
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    disc = np.sqrt(tr * tr - 4 * det + 0j)
    return np.array([(tr + disc) / 2, (tr - disc) / 2])


def cgl_sideband_eigenvalues(cgl: CGLCoefficients, kappa: float, sigma: float, steps: int = 32):
    """``(lambda_1, lambda_2)``; ``lambda_2`` is the branch through 0 at sigma = 0.

    The roots are continued from sigma = 0 so the labelling survives near-crossings.
    """
    if kappa**2 >= cgl.kappaE_sq:
        raise ValueError("kappa outside the existence band")
    roots = _quadratic_roots(cgl_sideband_matrix(cgl, kappa, 0.0))
    lam2 = roots[np.argmin(np.abs(roots))]
    for s in np.linspace(0.0, sigma, steps + 1)[1:]:
        roots = _quadratic_roots(cgl_sideband_matrix(cgl, kappa, s))
        lam2 = roots[np.argmin(np.abs(roots - lam2))]
    other = roots[np.argmax(np.abs(roots - lam2))] if abs(roots[0] - roots[1]) > 0 else roots[0]
    return complex(other), complex(lam2)


@dataclass
class SidebandSeries:
    lambda1_0: float
    c1: complex
    c2: float


def sideband_series(cgl: CGLCoefficients, kappa: float) -> SidebandSeries:
    """Taylor coefficients of the sideband branches at sigma = 0.

    ``lambda_2 = c1 sigma + c2 sigma^2 + O(sigma^3)`` with ``c1`` purely imaginary.
    """
    a, c = cgl.a, cgl.c
    alpha2 = float(cgl.alpha_sq(kappa))
    if alpha2 <= 0:
        raise DegenerateAmplitudeError("alpha = 0 at the band edge; sigma^2 coefficient undefined")
    c1 = -2j * kappa * (a.imag - c.imag * a.real / c.real)
    num = (2 * kappa**2 * c.imag**2 * a.real**2 + alpha2 * a.imag * c.imag * c.real**2
           + a.real * c.real**2 * (2 * kappa**2 * a.real + alpha2 * c.real))
    c2 = -num / (alpha2 * c.real**3)
    return SidebandSeries(lambda1_0=2 * alpha2 * c.real, c1=c1, c2=float(c2))
