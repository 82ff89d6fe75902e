"""Fourier-Galerkin residual and linearisation about a truncated periodic profile.

Mode arrays have shape ``(2M+1, n)`` and are indexed by ``eta + M``.
"""
from __future__ import annotations

import numpy as np

from . import kernels
from .model import ModelSpec, symbol_array


def mode_numbers(M: int) -> np.ndarray:
    return np.arange(-M, M + 1)


def _residual_tables(model: ModelSpec, k: float, M: int):
    kk = k * mode_numbers(M)
    quad = [(t.weights(kk[:, None], kk[None, :]), t.tensor.astype(complex)) for t in model.qform]
    cub = [(t.weights(kk[:, None, None], kk[None, :, None], kk[None, None, :]), t.tensor.astype(complex))
           for t in model.cform]
    return quad, cub


def _contig(a):
    return np.ascontiguousarray(a, dtype=np.complex128)


class GalerkinSystem:
    """Residual of the travelling-wave equation at fixed wavenumber ``k`` and ``mu``.

    ``frame_speed`` adds ``i k s`` to the symbol (a Galilean change of frame).
    """

    def __init__(self, model: ModelSpec, k: float, mu: float, M: int, frame_speed: float = 0.0):
        self.model, self.k, self.mu, self.M = model, float(k), float(mu), int(M)
        self.frame_speed = float(frame_speed)
        self.eta = mode_numbers(M)
        self.symbols = symbol_array(model, k * self.eta, mu) + \
            1j * self.frame_speed * (k * self.eta)[:, None, None] * np.eye(model.n)
        self.quad, self.cub = _residual_tables(model, k, M)

    def nonlinear(self, U: np.ndarray) -> np.ndarray:
        U = _contig(U)
        out = np.zeros_like(U)
        for tab, T in self.quad:
            out += kernels.quad_conv(U, _contig(tab), _contig(T))
        for tab3, T4 in self.cub:
            out += kernels.cubic_conv(U, _contig(tab3), _contig(T4))
        return out

    def residual(self, U: np.ndarray, Omega: float) -> np.ndarray:
        lin = np.einsum("eij,ej->ei", self.symbols, U) - 1j * Omega * self.eta[:, None] * U
        return lin + self.nonlinear(U)

    def jacobian(self, U: np.ndarray, Omega: float) -> np.ndarray:
        """Complex Jacobian of the residual with respect to all modes (sigma = 0)."""
        return bloch_operator(self.model, self.k, self.mu, U, 0.0, diag_frame=-1j * Omega * self.eta,
                              frame_speed=self.frame_speed)


def _bloch_tables(model: ModelSpec, k: float, M: int, sigma: float):
    kp = k * mode_numbers(M)  # profile wavenumbers
    kf = k * (mode_numbers(M) + sigma)  # perturbation wavenumbers
    quad = []
    for t in model.qform:
        T = _contig(t.tensor)
        quad.append((_contig(t.weights(kf[None, :], kp[:, None])), T, 0))
        quad.append((_contig(t.weights(kp[:, None], kf[None, :])), T, 1))
    cub = []
    for t in model.cform:
        T4 = _contig(t.tensor)
        P = kp[:, None, None]
        Q = kp[None, :, None]
        F = kf[None, None, :]
        cub.append((_contig(t.weights(F, P, Q)), T4, 0))
        cub.append((_contig(t.weights(P, F, Q)), T4, 1))
        cub.append((_contig(t.weights(P, Q, F)), T4, 2))
    return quad, cub


def linearized_nonlinearity(model: ModelSpec, k: float, U: np.ndarray, sigma: float) -> np.ndarray:
    """Matrix of ``v -> DN(U) v`` on Bloch modes ``v = sum v_eta e^{i(eta + sigma) xi}``."""
    U = _contig(U)
    P, n = U.shape
    M = (P - 1) // 2
    quad, cub = _bloch_tables(model, k, M, sigma)
    out = np.zeros((P * n, P * n), dtype=complex)
    for tab, T, slot in quad:
        out += kernels.quad_bloch(U, tab, T, slot)
    for tab3, T4, slot in cub:
        out += kernels.cubic_bloch(U, tab3, T4, slot)
    return out


def bloch_operator(model: ModelSpec, k: float, mu: float, U: np.ndarray, sigma: float,
                   diag_frame, frame_speed: float = 0.0) -> np.ndarray:
    """Full Bloch matrix: symbol blocks ``S(k(eta+sigma))`` + scalar frame terms + DN(U).

    ``diag_frame`` is a length-(2M+1) array of scalars added to each diagonal block.
    """
    P, n = U.shape
    M = (P - 1) // 2
    keta = k * (mode_numbers(M) + sigma)
    blocks = symbol_array(model, keta, mu) + \
        (1j * frame_speed * keta + np.asarray(diag_frame))[:, None, None] * np.eye(n)
    B = linearized_nonlinearity(model, k, U, sigma)
    for e in range(P):
        B[e * n:(e + 1) * n, e * n:(e + 1) * n] += blocks[e]
    return B
