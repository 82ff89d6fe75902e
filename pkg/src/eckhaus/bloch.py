"""Bloch spectra of small-amplitude waves and comparison with the cGL predictions.

The linearisation about ``U(k x + Omega t)`` acts on Bloch modes
``v(xi) = sum_eta v_eta exp(i (eta + sigma) xi)``; for each Floquet exponent
``sigma`` it is the dense matrix assembled here.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as sla

from .cgl import CGLCoefficients, realify
from .errors import (CurveTrackingError, DisagreementError, GapViolationError, RefineGridError,
                     VerdictRefused)
from .galerkin import bloch_operator, mode_numbers
from .model import ModelSpec
from .turing import CriticalData
from .wave import WaveProfile

CONVENTIONS = ("modified", "standard")
EPS_SIGMA_CONVENTIONS = {"minus-one": -1.0, "plus-two": 2.0}
AMBIGUITY = 0.95


# ------------------------------------------------------------------ assembly

@dataclass
class BlochMatrix:
    matrix: np.ndarray
    eps: float
    kappa: float
    sigma: float
    convention: str
    M: int
    n: int

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))


def frame_shift(crit: CriticalData, profile: WaveProfile) -> float:
    """Coefficient ``s`` of the modified frame term ``i sigma s``.

    ``s = k (d_* + k_* d_eps/kappa)``, with ``d_*`` measured in the frame the
    profile was computed in; ``d_eps/kappa`` is kappa-independent, so kappa = 0
    needs no special casing.
    """
    d_star = crit.d_star - profile.frame_speed
    return profile.k * (d_star + crit.k_star * crit.group_slope)


def convention_offset(crit: CriticalData, profile: WaveProfile) -> float:
    """Exact ``Im c_1(modified) - Im c_1(standard)``: the two matrices differ by ``i sigma`` times this."""
    return frame_shift(crit, profile) + profile.Omega


def frame_terms(crit: CriticalData, profile: WaveProfile, sigma: float, convention: str) -> np.ndarray:
    eta = mode_numbers(profile.M)
    if convention == "standard":
        return -1j * (eta + sigma) * profile.Omega
    if convention == "modified":
        return -1j * eta * profile.Omega + 1j * sigma * frame_shift(crit, profile)
    raise ValueError(f"convention must be one of {CONVENTIONS}")


def assemble_bloch(model: ModelSpec, crit: CriticalData, profile: WaveProfile, sigma: float,
                   convention: str = "modified") -> BlochMatrix:
    if abs(sigma) > 0.5 + 1e-12:
        raise ValueError("Floquet exponent must satisfy |sigma| <= 1/2")
    B = bloch_operator(model, profile.k, profile.mu, profile.modes, sigma,
                       frame_terms(crit, profile, sigma, convention), profile.frame_speed)
    return BlochMatrix(B, profile.eps, profile.kappa, float(sigma), convention, profile.M, model.n)


def reflect_conjugate(B: np.ndarray, n: int) -> np.ndarray:
    """``R B R`` with complex conjugation, ``R`` reversing mode order (eta -> -eta)."""
    P = B.shape[0] // n
    B4 = B.reshape(P, n, P, n)[::-1, :, ::-1, :]
    return B4.reshape(P * n, P * n).conj()


# ------------------------------------------------------------------ sweeps

def default_sigma_grid(eps: float, C: float = 10.0, n1: int = 41, n2: int = 41, n3: int = 21,
                       sigma_max: float = 0.5) -> np.ndarray:
    """Symmetric grid: geometric in region 1, linear in regions 2 and 3."""
    lo1, hi1 = eps**2 / 10, eps / C
    hi2 = min(C * eps, sigma_max)
    pos = [np.geomspace(lo1, hi1, n1), np.linspace(hi1, hi2, n2)[1:]]
    if hi2 < sigma_max:
        pos.append(np.linspace(hi2, sigma_max, n3)[1:])
    pos = np.unique(np.concatenate(pos))
    return np.concatenate([-pos[::-1], [0.0], pos])


@dataclass
class SpectralCurves:
    sigma: np.ndarray
    lam1: np.ndarray
    lam2: np.ndarray
    remainder_max_re: np.ndarray
    all_max_re: np.ndarray
    tracked: np.ndarray
    eps: float
    kappa: float
    C: float
    delta: float
    convention: str
    matrix_norm: float
    eigenvalues: list = field(default_factory=list, repr=False)

    def region(self, sigma) -> np.ndarray:
        s = np.abs(np.asarray(sigma)) / self.eps
        return np.where(s <= 1 / self.C * (1 + 1e-12), 1, np.where(s <= self.C * (1 + 1e-12), 2, 3))

    def at(self, sigma: float) -> int:
        return int(np.argmin(np.abs(self.sigma - sigma)))


def _eig(B):
    w, V = sla.eig(B, check_finite=False)
    return w, V


def _overlap(v, V):
    return np.abs(v.conj() @ V) / (np.linalg.norm(v) * np.linalg.norm(V, axis=0))


def _pick(v, w, V, sigma, taken=()):
    ov = _overlap(v, V)
    for j in taken:
        ov[j] = -1.0
    order = np.argsort(ov)[::-1]
    best, second = ov[order[0]], ov[order[1]]
    if second >= AMBIGUITY * best and abs(w[order[0]] - w[order[1]]) > 1e-10 * max(1.0, abs(w[order[0]])):
        raise CurveTrackingError(f"ambiguous critical curve at sigma={sigma:.6g} "
                                 f"(overlaps {best:.4f}, {second:.4f})", sigma=float(sigma))
    return int(order[0])


def bloch_sweep(model: ModelSpec, crit: CriticalData, profile: WaveProfile, sigma_grid=None,
                convention: str = "modified", C: float = 10.0, delta: float | None = None,
                track_max: float | None = None, check_gap: bool = True, keep_eigenvalues: bool = False
                ) -> SpectralCurves:
    """Dense eigensolve on a sigma grid with the two critical curves tracked."""
    eps = profile.eps
    if eps <= 0:
        raise ValueError("sweep needs a nontrivial wave")
    grid = default_sigma_grid(eps, C) if sigma_grid is None else np.asarray(sigma_grid, dtype=float)
    grid = np.sort(grid)
    if not np.allclose(grid, -grid[::-1], atol=1e-12, rtol=0) or np.max(np.abs(grid)) > 0.5 + 1e-12:
        raise ValueError("sigma grid must be symmetric about 0 with |sigma| <= 1/2")
    grid = 0.5 * (grid - grid[::-1])  # exact pairing for the odd/even split
    if not np.any(grid == 0):
        raise ValueError("sigma grid must contain 0")
    delta = 0.5 * crit.spectral_gap if delta is None else delta
    track_max = min(C * eps, 0.25) if track_max is None else track_max

    spectra = {}
    norm = 0.0
    for s in grid:
        B = assemble_bloch(model, crit, profile, s, convention).matrix
        if s == 0:
            norm = float(np.linalg.norm(B, 2))
        spectra[s] = _eig(B)

    N = len(grid)
    lam1 = np.full(N, complex(np.nan, np.nan))
    lam2 = np.full(N, complex(np.nan, np.nan))
    rem = np.empty(N)
    allmax = np.empty(N)
    tracked = np.zeros(N, dtype=bool)
    i0 = int(np.where(grid == 0)[0][0])

    w0, V0 = spectra[0.0]
    top2 = np.argsort(w0.real)[::-1][:2]
    trans = profile.derivative_modes().ravel()
    ov = _overlap(trans, V0[:, top2])
    j2, j1 = (top2[0], top2[1]) if ov[0] >= ov[1] else (top2[1], top2[0])
    idx = {i0: (j1, j2)}
    for direction in (1, -1):
        v1, v2 = V0[:, j1], V0[:, j2]
        i = i0 + direction
        while 0 <= i < N and abs(grid[i]) <= track_max * (1 + 1e-12):
            w, V = spectra[grid[i]]
            a = _pick(v1, w, V, grid[i])
            b = _pick(v2, w, V, grid[i], taken=(a,))
            idx[i] = (a, b)
            v1, v2 = V[:, a], V[:, b]
            i += direction

    for i, s in enumerate(grid):
        w, _ = spectra[s]
        allmax[i] = w.real.max()
        if i in idx:
            a, b = idx[i]
            lam1[i], lam2[i] = w[a], w[b]
            tracked[i] = True
            mask = np.ones(len(w), dtype=bool)
            mask[[a, b]] = False
            rem[i] = w[mask].real.max()
        else:
            rem[i] = allmax[i]
    if check_gap:
        bad = tracked & (rem > -delta)
        if np.any(bad):
            s = grid[np.argmax(np.where(bad, rem, -np.inf))]
            raise GapViolationError(f"remainder spectrum reaches Re = {rem[bad].max():.4g} > -delta = {-delta:.4g} "
                                    f"at sigma = {s:.4g}")
    eigs = [spectra[s][0] for s in grid] if keep_eigenvalues else []
    return SpectralCurves(grid, lam1, lam2, rem, allmax, tracked, eps, profile.kappa, C, float(delta),
                          convention, norm, eigs)


# ------------------------------------------------------------------ fitting

@dataclass
class FitResult:
    c1: complex
    c2: complex
    c0_1: complex
    c0_2: complex
    residual: float
    cond: float
    re_c1_flag: bool
    npoints: int


def fit_expansion(curves: SpectralCurves, eps: float | None = None, window: float | None = None,
                  max_cond: float = 1e8) -> FitResult:
    """Fit ``lambda_2(sigma) = c0 + c1 sigma + c2 sigma^2 + ...`` on the region-1 points.

    Even and odd parts are separated through the pairing ``sigma <-> -sigma`` and
    fitted with ``[1, s^2, s^4]`` and ``[s, s^3]``.
    """
    eps = curves.eps if eps is None else eps
    window = eps / curves.C if window is None else window
    s = curves.sigma
    pos = s[(s > 0) & (s <= window * (1 + 1e-12)) & curves.tracked]
    if len(pos) < 7:
        raise RefineGridError(f"only {len(pos)} positive grid points inside |sigma| <= {window:.3g}")
    lp = np.array([curves.lam2[curves.at(x)] for x in pos])
    lm = np.array([curves.lam2[curves.at(-x)] for x in pos])
    even, odd = 0.5 * (lp + lm), 0.5 * (lp - lm)
    t = pos / window
    Ae = np.column_stack([np.ones_like(t), t**2, t**4])
    Ao = np.column_stack([t, t**3])
    cond = max(np.linalg.cond(Ae), np.linalg.cond(Ao))
    if cond > max_cond:
        raise RefineGridError(f"fit design condition number {cond:.3g} > {max_cond:.0e}")
    ce, *_ = np.linalg.lstsq(Ae, even, rcond=None)
    co, *_ = np.linalg.lstsq(Ao, odd, rcond=None)
    res = np.concatenate([Ae @ ce - even, Ao @ co - odd])
    residual = float(np.sqrt(np.mean(np.abs(res) ** 2)))
    c1 = co[0] / window
    c2 = ce[1] / window**2
    i0 = curves.at(0.0)
    # residual is in eigenvalue units; compare |Re c1| sigma against it at the window edge
    flag = abs(c1.real) * window > 10 * max(residual, 1e-300)
    return FitResult(complex(c1), complex(c2), complex(curves.lam1[i0]), complex(curves.lam2[i0]), residual,
                     float(cond), bool(flag), int(len(pos)))


# ------------------------------------------------------------------ reduced prediction

@dataclass
class ReducedPrediction:
    eps: float
    kappa: float
    sigma: float
    convention: str
    matrix: np.ndarray
    C1: complex
    C2: complex
    Lambda: complex


def _reduced_parts(cgl, crit, eps, kappa, convention):
    s = EPS_SIGMA_CONVENTIONS[convention]
    lkk = crit.d2_lambda_dk2
    ks = crit.k_star
    g = cgl.c
    a2 = float(cgl.alpha_sq(kappa))
    M0 = 2 * eps**2 * a2 * np.array([[g.real, 0.0], [g.imag, 0.0]], dtype=complex)
    M1 = s * eps * 1j * realify(1j * kappa * ks * lkk)
    M2 = realify(0.5 * ks**2 * lkk).astype(complex)
    return M0, M1, M2


def reduced_matrix(cgl: CGLCoefficients, crit: CriticalData, eps: float, kappa: float, sigma: float,
                   convention: str = "minus-one") -> np.ndarray:
    M0, M1, M2 = _reduced_parts(cgl, crit, eps, kappa, convention)
    return M0 + sigma * M1 + sigma**2 * M2


def reduced_coefficients(cgl: CGLCoefficients, crit: CriticalData, eps: float, kappa: float,
                         convention: str = "minus-one"):
    """``(C1, C2)`` of the branch through 0, by second-order perturbation of the 2x2 matrix."""
    M0, M1, M2 = _reduced_parts(cgl, crit, eps, kappa, convention)
    p, q = M0[0, 0].real, M0[1, 0].real
    L = np.array([-q / p, 1.0])
    R = np.array([0.0, 1.0])
    Rp = np.array([1.0, q / p])
    Lp = np.array([1.0, 0.0])
    C1 = L @ M1 @ R
    C2 = L @ M2 @ R - (L @ M1 @ Rp) * (Lp @ M1 @ R) / p
    return complex(C1), complex(C2)


def reduced_prediction(cgl: CGLCoefficients, crit: CriticalData, eps: float, kappa: float, sigma: float,
                       convention: str = "minus-one", steps: int = 32) -> ReducedPrediction:
    C1, C2 = reduced_coefficients(cgl, crit, eps, kappa, convention)
    lam = 0.0 + 0j
    for s in np.linspace(0.0, sigma, steps + 1)[1:]:
        w = np.linalg.eigvals(reduced_matrix(cgl, crit, eps, kappa, s, convention))
        lam = w[np.argmin(np.abs(w - lam))]
    Mx = reduced_matrix(cgl, crit, eps, kappa, sigma, convention)
    return ReducedPrediction(eps, kappa, sigma, convention, Mx, C1, C2, complex(lam))


# ------------------------------------------------------------------ agreement

@dataclass
class AgreementReport:
    eps: float
    kappa: float
    c0_defect: float
    re_c1: float
    im_c1: float
    predicted_C1: dict
    c1_relative_defect: dict
    matched_conventions: list
    best_convention: str
    c1_scaled_defect: float
    c2_measured: float
    C2_predicted: complex
    c2_relative_defect: float
    fit: Optional[FitResult] = None

    def to_dict(self) -> dict:
        c = lambda z: [float(np.real(z)), float(np.imag(z))]
        return {
            "eps": self.eps, "kappa": self.kappa,
            "c0_defect": self.c0_defect, "re_c1": self.re_c1, "im_c1": self.im_c1,
            "predicted_C1": {k: c(v) for k, v in self.predicted_C1.items()},
            "c1_relative_defect": self.c1_relative_defect,
            "matched_conventions": self.matched_conventions,
            "best_convention": self.best_convention, "c1_scaled_defect": self.c1_scaled_defect,
            "c2_measured": self.c2_measured, "C2_predicted": c(self.C2_predicted),
            "c2_relative_defect": self.c2_relative_defect,
        }


def verify_agreement(fit: FitResult, cgl: CGLCoefficients, crit: CriticalData, eps: float, kappa: float,
                     c1_rtol: float = 0.3, c1_atol: float = 1e-8, raise_on_mismatch: bool = True
                     ) -> AgreementReport:
    """Compare fitted coefficients (modified frame) with the reduced-matrix predictions.

    A convention "matches" when its relative Im c1 defect is within ``c1_rtol``;
    a disagreement error is raised only when the best one misses by more than
    three times that budget.
    """
    a2 = float(cgl.alpha_sq(kappa))
    c0_defect = abs(fit.c0_1 - 2 * eps**2 * a2 * cgl.c.real) / eps**2
    preds, rel, matched = {}, {}, []
    for conv in EPS_SIGMA_CONVENTIONS:
        C1, _ = reduced_coefficients(cgl, crit, eps, kappa, conv)
        preds[conv] = C1
        d = abs(fit.c1.imag - C1.imag)
        rel[conv] = d / abs(C1) if abs(C1) > c1_atol else d
        if (abs(C1) > c1_atol and rel[conv] <= c1_rtol) or (abs(C1) <= c1_atol and d <= c1_atol):
            matched.append(conv)
    best = min(rel, key=rel.get)
    # C1 is O(eps), so the defect in units of eps is the quantity that must shrink like eps
    c1_scaled = abs(fit.c1.imag - preds[best].imag) / eps
    _, C2 = reduced_coefficients(cgl, crit, eps, kappa, "minus-one")
    c2_rel = abs(fit.c2.real - C2.real) / abs(C2)
    report = AgreementReport(eps, kappa, float(c0_defect), abs(fit.c1.real), fit.c1.imag, preds, rel, matched,
                             best, float(c1_scaled), fit.c2.real, C2, float(c2_rel), fit)
    if raise_on_mismatch and not matched and abs(preds[best]) > c1_atol and rel[best] > 3 * c1_rtol:
        raise DisagreementError(f"measured Im c1 = {fit.c1.imag:.6g} matches no convention: "
                                f"{ {k: v.imag for k, v in preds.items()} }")
    return report


def scaling_consistent(defect_large: float, eps_large: float, defect_small: float, eps_small: float) -> bool:
    """First-order consistency: ``defect(eps_small) <= K eps_small`` with ``K = defect(eps_large)/eps_large``."""
    K = defect_large / eps_large
    return defect_small <= K * eps_small * (1 + 1e-9)


# ------------------------------------------------------------------ verdict

@dataclass
class StabilityVerdict:
    verdict: str
    theta: float
    witness_sigma: Optional[float]
    regions: dict
    kappa: float
    eps: float
    kappaS: float
    fit: Optional[FitResult] = None

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "theta": self.theta, "witness_sigma": self.witness_sigma,
                "kappa": self.kappa, "eps": self.eps, "kappa_S": self.kappaS, "regions": self.regions}


def stability_verdict(model: ModelSpec, crit: CriticalData, cgl: CGLCoefficients, profile: WaveProfile,
                      C: float = 10.0, dead_band: float = 0.05, convention: str = "modified",
                      residual_max: float = 1e-8, sigma_grid=None, noise: float | None = None,
                      curves: SpectralCurves | None = None) -> StabilityVerdict:
    """Diffusive-stability verdict from a full sigma sweep split into three regions."""
    if profile.residual > residual_max:
        raise VerdictRefused(f"profile residual {profile.residual:.3e} > {residual_max:.1e}")
    if curves is None:
        curves = bloch_sweep(model, crit, profile, sigma_grid, convention, C)
    fit = fit_expansion(curves)
    noise = 1e-13 * max(1.0, curves.matrix_norm) if noise is None else noise
    s = curves.sigma
    reg = curves.region(s)
    nz = s != 0
    regions = {}
    theta_parts = []
    witness = None
    worst = -np.inf

    # region 1: curvature of the critical curve
    r1_unstable = fit.c2.real > 0
    regions["1"] = {"re_c2": fit.c2.real, "re_c1": fit.c1.real, "stable": not r1_unstable}
    theta_parts.append(-fit.c2.real)
    if r1_unstable:
        m = nz & (reg == 1) & curves.tracked
        j = np.argmax(np.where(m, curves.lam2.real, -np.inf))
        witness, worst = float(s[j]), float(curves.lam2[j].real)

    for r in (2, 3):
        m = nz & (reg == r)
        if not np.any(m):
            regions[str(r)] = {"max_re": None, "stable": True}
            continue
        mx = curves.all_max_re[m]
        th = float(np.min(-mx / s[m] ** 2))
        bad = mx > noise
        regions[str(r)] = {"max_re": float(mx.max()), "theta": th, "stable": not bool(np.any(bad))}
        theta_parts.append(th)
        if np.any(bad) and mx.max() > worst:
            j = np.argmax(np.where(m, curves.all_max_re, -np.inf))
            witness, worst = float(s[j]), float(curves.all_max_re[j])

    theta = float(min(theta_parts))
    kS = float(np.sqrt(max(cgl.kappaS_sq, 0.0)))
    unstable = witness is not None
    if dead_band > 0 and abs(abs(profile.kappa) - kS) <= dead_band * kS:
        verdict = "inconclusive"
    elif unstable:
        verdict = "unstable"
    elif theta > 0:
        verdict = "diffusively-stable"
    else:
        verdict = "inconclusive"
    return StabilityVerdict(verdict, max(theta, 0.0) if verdict == "diffusively-stable" else theta,
                            witness, regions, profile.kappa, profile.eps, kS, fit)


def translation_mode_check(model: ModelSpec, crit: CriticalData, profile: WaveProfile,
                           convention: str = "standard"):
    """Smallest |eigenvalue| at sigma = 0 (relative to ||B||) and its overlap with dU/dxi."""
    B = assemble_bloch(model, crit, profile, 0.0, convention).matrix
    w, V = _eig(B)
    j = int(np.argmin(np.abs(w)))
    ov = float(_overlap(profile.derivative_modes().ravel(), V[:, [j]])[0])
    return float(abs(w[j]) / np.linalg.norm(B, 2)), ov
