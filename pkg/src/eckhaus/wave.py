"""Small-amplitude periodic travelling waves by Fourier-Galerkin Newton continuation.

The wave is ``u(x, t) = U(k x + Omega t)`` with ``U`` 2pi-periodic, ``k = k_* + eps*kappa``
and ``mu = eps^2``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .cgl import CGLCoefficients, resolvent_matrix
from .errors import NoWaveError, TruncationError
from .galerkin import GalerkinSystem, mode_numbers
from .model import ModelSpec, eval_qform
from .turing import CriticalData

TAIL_RATIO = 1e-3


@dataclass
class WaveProfile:
    eps: float
    kappa: float
    k: float
    mu: float
    modes: np.ndarray  # (2M+1, n), row eta + M
    Omega: float
    M: int
    residual: float
    alpha_measured: float
    iterations: int = 0
    residual_history: list = field(default_factory=list)
    frame_speed: float = 0.0

    def mode(self, eta: int) -> np.ndarray:
        return self.modes[eta + self.M]

    @property
    def speed(self) -> float:
        """Wave speed in x: the profile moves as ``U(k(x - c t))`` with ``c = -Omega/k``."""
        return -self.Omega / self.k

    def sample(self, npts: int = 256):
        xi = 2 * np.pi * np.arange(npts) / npts
        eta = mode_numbers(self.M)
        U = np.real(np.exp(1j * np.outer(xi, eta)) @ self.modes)
        return xi, U

    def derivative_modes(self) -> np.ndarray:
        """Fourier modes of ``d U / d xi`` (the translation eigenfunction)."""
        return 1j * mode_numbers(self.M)[:, None] * self.modes


def frequency_expansion(crit: CriticalData, cgl: CGLCoefficients, eps: float, kappa: float) -> float:
    """Temporal frequency through second order in eps (lab frame)."""
    return (crit.lambda_at_kstar.imag + eps * kappa * crit.d_lambda_dk.imag
            - eps**2 * float(cgl.omega(kappa)))


def _pack(U, Omega, M, n):
    return np.concatenate([U[M].real, U[M + 1:].real.ravel(), U[M + 1:].imag.ravel(), [Omega]])


def _unpack(x, M, n):
    U = np.zeros((2 * M + 1, n), dtype=complex)
    U[M] = x[:n]
    pos = x[n:n + n * M].reshape(M, n) + 1j * x[n + n * M:n + 2 * n * M].reshape(M, n)
    U[M + 1:] = pos
    U[:M] = pos[::-1].conj()
    return U, float(x[-1])


def _real_residual(F, U, ell, M, n):
    phase = np.imag(ell @ U[M + 1])
    return np.concatenate([F[M].real, F[M + 1:].real.ravel(), F[M + 1:].imag.ravel(), [phase]])


def _real_jacobian(J, U, ell, M, n):
    P = 2 * M + 1
    J4 = J.reshape(P, n, P, n)
    cols = []
    # real part of the zero mode
    C0 = J4[:, :, M, :]  # (P, n, n): response of every mode to a zero-mode change
    cols.append(C0)
    plus = J4[:, :, M + 1:, :]
    minus = J4[:, :, M - 1::-1, :]
    cre = plus + minus
    cim = 1j * (plus - minus)
    cre = cre.reshape(P, n, M * n)
    cim = cim.reshape(P, n, M * n)
    cOm = (-1j * mode_numbers(M)[:, None] * U)[:, :, None]
    full = np.concatenate([C0, cre, cim, cOm], axis=2)  # (P, n, N)
    rows = np.concatenate([full[M].real, full[M + 1:].real.reshape(M * n, -1),
                           full[M + 1:].imag.reshape(M * n, -1)], axis=0)
    N = rows.shape[1]
    prow = np.zeros(N)
    prow[n:2 * n] = ell.imag
    prow[n + M * n:n + M * n + n] = ell.real
    return np.vstack([rows, prow])


def _newton(system: GalerkinSystem, U, Omega, ell, tol, max_iter, step_tol=1e-13):
    """Newton iteration; converged once the residual is below ``tol`` and the
    last update was negligible (near onset the Jacobian has a small singular
    value of order eps^2, so a small residual alone does not pin the amplitude)."""
    M, n = system.M, system.model.n
    x = _pack(U, Omega, M, n)
    history = []
    small_step = False
    prev_step = np.inf
    for it in range(max_iter + 1):
        U, Omega = _unpack(x, M, n)
        F = system.residual(U, Omega)
        res = float(np.linalg.norm(F))
        history.append(res)
        if not np.isfinite(res):
            return U, Omega, history, False
        if res <= tol and small_step:
            return U, Omega, history, True
        # stagnation at the rounding floor
        if small_step and it >= 3 and res <= 1e3 * tol and history[-1] >= 0.5 * history[-2]:
            return U, Omega, history, True
        if it == max_iter:
            break
        J = _real_jacobian(system.jacobian(U, Omega), U, ell, M, n)
        rhs = _real_residual(F, U, ell, M, n)
        try:
            dx = np.linalg.solve(J, rhs)
        except np.linalg.LinAlgError:
            return U, Omega, history, False
        x = x - dx
        step = float(np.linalg.norm(dx))
        # a step that no longer shrinks quadratically is rounding noise
        small_step = step <= step_tol * max(np.linalg.norm(x), 1e-300) or step > 0.1 * prev_step
        prev_step = step
    return U, Omega, history, False


def _initial_guess(crit, cgl, eps, kappa, M, n):
    U = np.zeros((2 * M + 1, n), dtype=complex)
    amp = 0.5 * eps * float(cgl.alpha(kappa))
    U[M + 1] = amp * crit.r
    U[M - 1] = amp * crit.r.conj()
    return U


def _rescale(U, M, ratio):
    eta = np.abs(mode_numbers(M))
    powers = np.where(eta == 0, 2, eta)
    return U * (ratio ** powers)[:, None]


def solve_wave(model: ModelSpec, crit: CriticalData, cgl: CGLCoefficients, eps: float, kappa: float = 0.0,
               M: int = 16, tol: float = 1e-12, nu0: float = 0.05, eps_max: float = 0.1,
               max_iter: int = 50, frame_speed: float = 0.0, check_tail: bool = True) -> WaveProfile:
    """Newton solve of the Galerkin travelling-wave system with a phase condition."""
    if M < 8:
        raise ValueError("need at least M = 8 modes")
    if eps < 0 or eps > eps_max:
        raise ValueError(f"eps must lie in [0, {eps_max}]")
    if kappa**2 > (1 - nu0) * cgl.kappaE_sq:
        raise ValueError(f"kappa^2 = {kappa**2:.4g} outside (1 - nu0) * kappa_E^2 = {(1 - nu0) * cgl.kappaE_sq:.4g}")
    n = model.n
    k = crit.k_star + eps * kappa
    mu = eps**2
    if eps == 0:
        U = np.zeros((2 * M + 1, n), dtype=complex)
        return WaveProfile(0.0, kappa, k, 0.0, U, crit.lambda_at_kstar.imag + k * frame_speed, M, 0.0, 0.0,
                           frame_speed=frame_speed)

    system = GalerkinSystem(model, k, mu, M, frame_speed)
    U0 = _initial_guess(crit, cgl, eps, kappa, M, n)
    Om0 = frequency_expansion(crit, cgl, eps, kappa) + k * frame_speed
    U, Omega, hist, ok = _newton(system, U0, Om0, crit.ell, tol, max_iter)
    if not ok:
        U, Omega, hist, ok = _continuation(model, crit, cgl, eps, kappa, M, tol, max_iter, frame_speed)
    if not ok:
        raise NoWaveError(f"Newton failed for eps={eps}, kappa={kappa} (last residual {hist[-1]:.3e})")

    # translate by half a period if the phase landed on the negative branch
    if (crit.ell @ U[M + 1]).real < 0:
        U = U * ((-1.0) ** mode_numbers(M))[:, None]
    head = np.linalg.norm(U[M + 1])
    tail = max(np.linalg.norm(U[-1]), np.linalg.norm(U[-2]))
    if check_tail and tail > TAIL_RATIO * head:
        raise TruncationError(f"tail |U(M)| = {tail:.3e} exceeds {TAIL_RATIO} |U(1)|; increase M (now {M})")
    alpha_m = 2 * (crit.ell @ U[M + 1]).real / eps
    return WaveProfile(eps, kappa, k, mu, U, Omega, M, hist[-1], float(alpha_m), len(hist) - 1, hist,
                       frame_speed)


def _continuation(model, crit, cgl, eps, kappa, M, tol, max_iter, frame_speed):
    n = model.n
    steps = [eps * j / 4 for j in range(1, 5)]
    prev = None
    hist = [np.inf]
    for e in steps:
        k = crit.k_star + e * kappa
        system = GalerkinSystem(model, k, e**2, M, frame_speed)
        base = frequency_expansion(crit, cgl, e, kappa) + k * frame_speed
        if prev is None:
            U0, Om0 = _initial_guess(crit, cgl, e, kappa, M, n), base
        else:
            Up, Omp, ep, basep = prev
            U0 = _rescale(Up, M, e / ep)
            Om0 = base + (Omp - basep)
        U, Omega, hist, ok = _newton(system, U0, Om0, crit.ell, tol, max_iter)
        if not ok:
            return U, Omega, hist, False
        prev = (U, Omega, e, base)
    return U, Omega, hist, True


@dataclass
class SecondOrderModes:
    m0: np.ndarray
    m2: np.ndarray
    err0: float
    err2: float


def predicted_second_order(model: ModelSpec, crit: CriticalData, alpha: float):
    """Second eps-derivatives of the zero and second harmonics from the critical data."""
    k = crit.k_star
    r = crit.r
    S0 = resolvent_matrix(model, crit, 0)
    S2 = resolvent_matrix(model, crit, 2)
    m0 = -alpha**2 * S0 @ eval_qform(model, k, -k, r, r.conj())
    m2 = -0.5 * alpha**2 * S2 @ eval_qform(model, k, k, r, r)
    return m0, m2


def second_order_modes(model: ModelSpec, crit: CriticalData, profile: WaveProfile,
                       cgl: CGLCoefficients) -> SecondOrderModes:
    eps = profile.eps
    if eps <= 0:
        raise ValueError("need a nontrivial profile")
    if eps < 1e-4:
        warnings.warn("eps < 1e-4: dividing by eps^2 amplifies solver noise", RuntimeWarning, stacklevel=2)
    m0, m2 = predicted_second_order(model, crit, float(cgl.alpha(profile.kappa)))
    meas0 = 2 * profile.mode(0) / eps**2
    meas2 = 2 * profile.mode(2) / eps**2
    err0 = np.linalg.norm(meas0 - m0) / max(np.linalg.norm(m0), eps)
    err2 = np.linalg.norm(meas2 - m2) / max(np.linalg.norm(m2), eps)
    return SecondOrderModes(m0, m2, float(err0), float(err2))
