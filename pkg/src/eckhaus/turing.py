"""Turing-point location, critical spectral data and hypothesis checks."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as sla
from scipy.optimize import brentq, minimize_scalar

from .errors import BranchTrackingError, NotAtBifurcationError, UniquenessError
from .model import ModelSpec, eval_symbol, fd_step, symbol_array, symbol_dk, symbol_dkk

BIFURCATION_TOL = 1e-6
AMBIGUITY = 0.95  # second-best overlap within 5% of the best is ambiguous


@dataclass
class CriticalData:
    k_star: float
    lambda_at_kstar: complex
    d_lambda_dmu: complex
    d_lambda_dk: complex
    d2_lambda_dk2: complex
    r: np.ndarray
    ell: np.ndarray
    d_star: float
    spectral_gap: float

    def group_correction(self, kappa: float) -> float:
        """d_eps(0, kappa) from the exact frame relation at the critical point."""
        return -kappa * (self.d_lambda_dk.imag + self.d_star) / self.k_star

    @property
    def group_slope(self) -> float:
        """d_eps(0, kappa) / kappa, finite at kappa = 0."""
        return -(self.d_lambda_dk.imag + self.d_star) / self.k_star

    @property
    def projector(self) -> np.ndarray:
        return np.outer(self.r, self.ell)

    def to_dict(self) -> dict:
        c = lambda z: [float(np.real(z)), float(np.imag(z))]
        return {
            "k_star": self.k_star,
            "lambda_at_kstar": c(self.lambda_at_kstar),
            "d_lambda_dmu": c(self.d_lambda_dmu),
            "d_lambda_dk": c(self.d_lambda_dk),
            "d2_lambda_dk2": c(self.d2_lambda_dk2),
            "r": [c(z) for z in self.r],
            "ell": [c(z) for z in self.ell],
            "d_star": self.d_star,
            "spectral_gap": self.spectral_gap,
        }


# ------------------------------------------------------------------ eigen helpers

def max_real_eig(model: ModelSpec, ks, mu: float) -> np.ndarray:
    """Largest real part of the symbol eigenvalues at each k (untracked)."""
    return np.linalg.eigvals(symbol_array(model, np.asarray(ks, dtype=float), mu)).real.max(axis=-1)


def _eig_sorted(model, ks, mu):
    w = np.linalg.eigvals(symbol_array(model, np.asarray(ks, dtype=float), mu))
    return np.sort(w.real, axis=-1)[..., ::-1]


def _overlaps(v, V):
    num = np.abs(v.conj() @ V)
    return num / (np.linalg.norm(v) * np.linalg.norm(V, axis=0))


def critical_branch(model: ModelSpec, ks, mu: float = 0.0, start: Optional[int] = None) -> np.ndarray:
    """Branch-1 eigenvalue along ``ks``, continued by eigenvector overlap.

    Tracking starts where the most unstable eigenvalue is best separated from the
    rest (index ``start`` if given) and proceeds outwards in both directions.
    """
    ks = np.asarray(ks, dtype=float)
    if ks.ndim != 1 or len(ks) < 1 or np.any(np.diff(ks) <= 0):
        raise ValueError("k grid must be strictly increasing")
    S = symbol_array(model, ks, mu)
    if model.n == 1:
        return S[:, 0, 0].copy()
    w, V = np.linalg.eig(S)
    if start is None:
        srt = np.sort(w.real, axis=1)
        sep = srt[:, -1] - srt[:, -2]
        start = int(np.argmax(sep))
    out = np.empty(len(ks), dtype=complex)
    j0 = int(np.argmax(w[start].real))
    out[start] = w[start, j0]
    for direction in (1, -1):
        v = V[start][:, j0]
        i = start + direction
        while 0 <= i < len(ks):
            ov = _overlaps(v, V[i])
            order = np.argsort(ov)[::-1]
            best, second = ov[order[0]], ov[order[1]]
            if second >= AMBIGUITY * best and abs(w[i, order[0]] - w[i, order[1]]) > 1e-12:
                raise BranchTrackingError(
                    f"ambiguous branch continuation at k={ks[i]:.6g} (overlaps {best:.4f}, {second:.4f})",
                    location=float(ks[i]),
                )
            out[i] = w[i, order[0]]
            v = V[i][:, order[0]]
            i += direction
    return out


def _nearest_eig(model, k, mu, target):
    w = np.linalg.eigvals(eval_symbol(model, k, mu))
    return w[np.argmin(np.abs(w - target))]


def _critical_pair(S):
    """Critical eigenvalue with left/right eigenvectors, normalised."""
    w, vl, vr = sla.eig(S, left=True, right=True)
    j = int(np.argmax(w.real))
    lam = w[j]
    r = vr[:, j]
    ell = vl[:, j].conj()
    # phase: largest-magnitude entry of r positive real, then ell . r = 1
    m = int(np.argmax(np.abs(r)))
    r = r * (abs(r[m]) / r[m])
    r = r / np.linalg.norm(r)
    ell = ell / (ell @ r)
    return lam, r, ell


# ------------------------------------------------------------------ Turing point

def _local_maxima(vals):
    idx = [i for i in range(1, len(vals) - 1) if vals[i] >= vals[i - 1] and vals[i] > vals[i + 1]]
    return idx


def _refine_max(model, ks, i, mu):
    f = lambda k: -max_real_eig(model, np.array([k]), mu)[0]
    res = minimize_scalar(f, bracket=(ks[i - 1], ks[i], ks[i + 1]), method="golden", tol=1e-10)
    k = float(res.x)
    # polish on the zero of d/dk Re lambda (first-order perturbation formula)
    g = lambda kk: _re_lambda_k(model, kk, mu)
    h = 1e-3 * max(1.0, abs(k))
    a, b = k - h, k + h
    try:
        if g(a) * g(b) < 0:
            k = brentq(g, a, b, xtol=1e-15, rtol=1e-15)
    except ValueError:
        pass
    return k, -f(k)


def _re_lambda_k(model, k, mu):
    lam, r, ell = _critical_pair(eval_symbol(model, k, mu))
    return float((ell @ symbol_dk(model, k, mu) @ r).real)


def _derivative(f, x, h, order):
    def central(step):
        if order == 1:
            return (f(x + step) - f(x - step)) / (2 * step)
        return (f(x + step) - 2 * f(x) + f(x - step)) / step**2

    return (4 * central(h) - central(2 * h)) / 3


def find_turing_point(model: ModelSpec, k_max: float | None = None, n_grid: int = 2001,
                      mu: float = 0.0, h2: float | None = None) -> CriticalData:
    """Locate k_* and extract the critical eigen-data at ``mu`` (default 0)."""
    k_max = 4.0 * model.k_guess if k_max is None else k_max
    ks = np.linspace(0.0, k_max, n_grid)
    vals = max_real_eig(model, ks, mu)
    peaks = _local_maxima(vals)
    if not peaks:
        j = int(np.argmax(vals))
        raise NotAtBifurcationError(float(vals[j]), float(ks[j]))
    refined = [_refine_max(model, ks, i, mu) for i in peaks]
    j = int(np.argmax([v for _, v in refined]))
    k_star, top = refined[j]
    if vals[0] > top:  # the global maximum is at k = 0
        raise NotAtBifurcationError(float(vals[0]), 0.0)
    if abs(top) > BIFURCATION_TOL:
        raise NotAtBifurcationError(float(top), k_star)
    others = [kv for i, kv in enumerate(refined) if i != j and abs(kv[1]) <= BIFURCATION_TOL]
    if others:
        raise UniquenessError(f"several neutral wavenumbers: {[k_star] + [k for k, _ in others]}")

    S0 = eval_symbol(model, k_star, mu)
    lam, r, ell = _critical_pair(S0)
    branch_k = lambda k: _nearest_eig(model, k, mu, lam)
    branch_mu = lambda m: _nearest_eig(model, k_star, m, lam)
    h1 = fd_step(k_star, 1)
    h2 = fd_step(k_star, 2) if h2 is None else h2
    dk = _derivative(branch_k, k_star, h1, 1)
    dkk = _derivative(branch_k, k_star, h2, 2)
    dmu = _derivative(branch_mu, mu, fd_step(mu, 1), 1)
    d_star = -lam.imag / k_star
    gap = spectral_gap(model, k_star, mu, k_max=max(k_max, 3 * k_star))
    return CriticalData(
        k_star=float(k_star),
        lambda_at_kstar=complex(lam),
        d_lambda_dmu=complex(dmu),
        d_lambda_dk=complex(dk),
        d2_lambda_dk2=complex(dkk),
        r=r,
        ell=ell,
        d_star=float(d_star),
        spectral_gap=float(gap),
    )


def spectral_gap(model: ModelSpec, k_star: float, mu: float = 0.0, k_max: float | None = None,
                 n_grid: int = 2001) -> float:
    """Distance of the non-critical spectrum from the imaginary axis.

    Minimum of: minus the second-largest real part over the grid, and minus the
    largest real part away from the critical wavenumber (|k - k_*| >= k_*/2).
    """
    k_max = 4.0 * k_star if k_max is None else k_max
    ks = np.linspace(0.0, k_max, n_grid)
    re = _eig_sorted(model, ks, mu)
    far = np.abs(ks - k_star) >= 0.5 * k_star
    cands = [-re[far, 0].max()] if np.any(far) else []
    if model.n > 1:
        cands.append(-re[:, 1].max())
    return float(min(cands))


def deflated_inverse(S: np.ndarray, lam: complex, r: np.ndarray, ell: np.ndarray) -> np.ndarray:
    """Inverse of ``S - lam`` on the complement of ``r`` (zero on ``r``)."""
    n = len(r)
    Pi = np.outer(r, ell)
    Q = np.eye(n) - Pi
    return Q @ np.linalg.solve(S - lam * np.eye(n) + Pi, Q)


def spectral_identity_defect(model: ModelSpec, crit: CriticalData) -> float:
    """Both sides of the second-derivative perturbation identity, compared.

    Returns ``|| lambda_kk r - 2 Pi (S_kk r / 2 - S_k N S_k r) ||``.
    """
    k = crit.k_star
    S = eval_symbol(model, k, 0.0)
    Sk = symbol_dk(model, k, 0.0)
    Skk = symbol_dkk(model, k, 0.0)
    N = deflated_inverse(S, crit.lambda_at_kstar, crit.r, crit.ell)
    Pi = np.outer(crit.r, crit.ell)
    rhs = 2 * Pi @ (0.5 * Skk @ crit.r - Sk @ N @ Sk @ crit.r)
    return float(np.linalg.norm(crit.d2_lambda_dk2 * crit.r - rhs))


# ------------------------------------------------------------------ hypotheses

@dataclass
class HypothesisItem:
    name: str
    passed: bool
    detail: str
    witness: Optional[dict] = None


@dataclass
class HypothesisReport:
    model: str
    items: list
    grid: dict
    k_star: Optional[float] = None
    spectral_gap: Optional[float] = None
    extra: dict = field(default_factory=dict)

    @property
    def all_passed(self) -> bool:
        return all(it.passed for it in self.items)

    def item(self, name) -> HypothesisItem:
        return next(it for it in self.items if it.name == name)

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "all_passed": self.all_passed,
            "k_star": self.k_star,
            "spectral_gap": self.spectral_gap,
            "grid": self.grid,
            "hypotheses": [
                {"name": it.name, "status": "PASS" if it.passed else "FAIL", "detail": it.detail,
                 "witness": it.witness}
                for it in self.items
            ],
        }


def _witness(k, mu, lam):
    return {"k": float(k), "mu": float(mu), "eigenvalue": [float(np.real(lam)), float(np.imag(lam))]}


def verify_hypotheses(model: ModelSpec, ks=None, mus=(-0.2, -0.05), tol: float = BIFURCATION_TOL
                      ) -> HypothesisReport:
    """Check the four structural hypotheses on sampled grids."""
    if ks is None:
        ks = np.linspace(0.0, 4.0 * model.k_guess, 2001)
    ks = np.asarray(ks, dtype=float)
    mus = [float(m) for m in mus]
    grid = {"k_min": float(ks[0]), "k_max": float(ks[-1]), "n_k": int(len(ks)), "mu_samples": mus}
    items = []

    # H1: stability of the background for sampled mu < 0
    worst = None
    for mu in mus:
        w = np.linalg.eigvals(symbol_array(model, ks, mu))
        i, j = np.unravel_index(np.argmax(w.real), w.shape)
        if worst is None or w[i, j].real > worst[2].real:
            worst = (ks[i], mu, w[i, j])
    ok1 = bool(worst[2].real < 0)
    items.append(HypothesisItem("H1", ok1, "sampled mu < 0: all Re lambda < 0" if ok1 else
                                "eigenvalue with Re >= 0 for mu < 0", _witness(*worst)))

    # H2: unique neutral wavenumber at mu = 0
    top = max_real_eig(model, ks, 0.0)
    jmax = int(np.argmax(top))
    w0 = np.linalg.eigvals(eval_symbol(model, ks[jmax], 0.0))
    wmax = w0[np.argmax(w0.real)]
    crit = None
    try:
        crit = find_turing_point(model, k_max=float(ks[-1]), n_grid=len(ks))
        items.append(HypothesisItem("H2", True, f"unique k_* = {crit.k_star:.10g}",
                                    _witness(crit.k_star, 0.0, crit.lambda_at_kstar)))
    except NotAtBifurcationError as exc:
        kw = ks[jmax] if exc.k is None else exc.k
        ww = np.linalg.eigvals(eval_symbol(model, kw, 0.0))
        items.append(HypothesisItem("H2", False, f"max Re lambda = {exc.offset:.6g} != 0",
                                    _witness(kw, 0.0, ww[np.argmax(ww.real)])))
    except UniquenessError as exc:
        items.append(HypothesisItem("H2", False, str(exc), _witness(ks[jmax], 0.0, wmax)))

    # H3: everything except branch 1 near k_* is strictly stable
    if crit is not None:
        gap = crit.spectral_gap
        ok3 = gap > tol
        srt = _eig_sorted(model, ks, 0.0)
        far = np.abs(ks - crit.k_star) >= 0.5 * crit.k_star
        cand = np.where(far, srt[:, 0], srt[:, 1] if model.n > 1 else -np.inf)
        jw = int(np.argmax(cand))
        items.append(HypothesisItem("H3", ok3, f"spectral gap {gap:.6g}",
                                    _witness(ks[jw], 0.0, cand[jw])))
        # H4: transversality and curvature
        a_ok = crit.d_lambda_dmu.real > 0
        b_ok = crit.d2_lambda_dk2.real < 0
        c_ok = abs(crit.d_lambda_dk.real) <= 1e-6
        items.append(HypothesisItem(
            "H4", bool(a_ok and b_ok and c_ok),
            f"Re dmu={crit.d_lambda_dmu.real:.6g}, Re dk={crit.d_lambda_dk.real:.3g}, "
            f"Re dkk={crit.d2_lambda_dk2.real:.6g}",
            {"k": crit.k_star, "mu": 0.0,
             "d_lambda_dmu": [crit.d_lambda_dmu.real, crit.d_lambda_dmu.imag],
             "d_lambda_dk": [crit.d_lambda_dk.real, crit.d_lambda_dk.imag],
             "d2_lambda_dk2": [crit.d2_lambda_dk2.real, crit.d2_lambda_dk2.imag]}))
    else:
        for name in ("H3", "H4"):
            items.append(HypothesisItem(name, False, "not evaluated: no critical wavenumber",
                                        _witness(ks[jmax], 0.0, wmax)))
    return HypothesisReport(
        model=model.name,
        items=items,
        grid=grid,
        k_star=None if crit is None else crit.k_star,
        spectral_gap=None if crit is None else crit.spectral_gap,
    )
