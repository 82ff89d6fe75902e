"""System representation: a matrix Fourier symbol plus multilinear Fourier forms.

A model is ``u_t = L(mu) u + Q(u, u) + C(u, u, u)`` where ``L`` acts on
``exp(ikx)`` as the ``n x n`` matrix ``S(k, mu)`` and the forms act on Fourier
modes through wavenumber-dependent multipliers.  Each form is a sum of terms
``m(k1, k2[, k3]) * T`` with ``T`` a constant coefficient tensor, which keeps
evaluation vectorised and lets the Galerkin kernels work with tables.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .errors import ModelDomainError

SYMMETRIES = ("SO2", "O2")


@dataclass(frozen=True)
class FormTerm:
    """One term ``m(k_1, ..., k_p) * T`` of a p-linear Fourier form.

    ``tensor`` has shape ``(n,) * (p + 1)``; the first index is the output.
    ``multiplier`` must broadcast over array arguments; ``None`` means 1.
    """

    tensor: np.ndarray
    multiplier: Optional[Callable] = None

    @property
    def order(self) -> int:
        return self.tensor.ndim - 1

    def weights(self, *ks):
        if self.multiplier is None:
            return np.ones(np.broadcast(*[np.asarray(k) for k in ks]).shape, dtype=complex)
        return np.asarray(self.multiplier(*ks), dtype=complex)


@dataclass(frozen=True)
class SymbolDerivatives:
    """Optional analytic derivatives of the symbol, each ``(k, mu) -> (n, n)``."""

    dk: Optional[Callable] = None
    dkk: Optional[Callable] = None
    dmu: Optional[Callable] = None


@dataclass(frozen=True)
class ModelSpec:
    name: str
    n: int
    symbol: Callable
    qform: tuple = ()
    cform: tuple = ()
    symmetry: str = "SO2"
    parameters: Mapping = field(default_factory=dict)
    derivatives: SymbolDerivatives = field(default_factory=SymbolDerivatives)
    k_guess: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("state dimension must be positive")
        if self.symmetry not in SYMMETRIES:
            raise ValueError(f"symmetry must be one of {SYMMETRIES}")
        object.__setattr__(self, "parameters", MappingProxyType(dict(self.parameters)))
        object.__setattr__(self, "qform", tuple(self.qform))
        object.__setattr__(self, "cform", tuple(self.cform))
        for term in self.qform:
            if term.tensor.shape != (self.n,) * 3:
                raise ValueError("quadratic tensor has wrong shape")
        for term in self.cform:
            if term.tensor.shape != (self.n,) * 4:
                raise ValueError("cubic tensor has wrong shape")


def symbol_array(model: ModelSpec, k, mu: float) -> np.ndarray:
    """Vectorised symbol: returns shape ``k.shape + (n, n)``."""
    k = np.asarray(k, dtype=float)
    try:
        S = np.asarray(model.symbol(k, mu), dtype=complex)
    except (ValueError, ZeroDivisionError, FloatingPointError) as exc:
        raise ModelDomainError(f"symbol of {model.name} failed at mu={mu}: {exc}") from exc
    S = np.broadcast_to(S, k.shape + (model.n, model.n))
    if not np.all(np.isfinite(S)):
        raise ModelDomainError(f"non-finite symbol for {model.name} at mu={mu}")
    return S


def eval_symbol(model: ModelSpec, k: float, mu: float, check: bool = False) -> np.ndarray:
    """S(k, mu) as an ``(n, n)`` complex matrix."""
    S = np.array(symbol_array(model, float(k), mu))
    if check:
        Sm = np.array(symbol_array(model, -float(k), mu))
        if np.linalg.norm(Sm - S.conj()) > 1e-12 * max(1.0, np.linalg.norm(S)):
            raise ModelDomainError(f"symbol of {model.name} is not real at k={k}")
    return S


def _vec(model, v):
    v = np.asarray(v, dtype=complex)
    if v.shape != (model.n,):
        raise ValueError(f"expected vector of length {model.n}, got shape {v.shape}")
    return v


def eval_qform(model: ModelSpec, k1: float, k2: float, u, v) -> np.ndarray:
    u, v = _vec(model, u), _vec(model, v)
    out = np.zeros(model.n, dtype=complex)
    for term in model.qform:
        out += term.weights(k1, k2) * np.einsum("ijl,j,l->i", term.tensor, u, v)
    return out


def eval_cform(model: ModelSpec, k1: float, k2: float, k3: float, u, v, w) -> np.ndarray:
    u, v, w = _vec(model, u), _vec(model, v), _vec(model, w)
    out = np.zeros(model.n, dtype=complex)
    for term in model.cform:
        out += term.weights(k1, k2, k3) * np.einsum("ijkl,j,k,l->i", term.tensor, u, v, w)
    return out


def _richardson(f, x, h, order):
    def central(step):
        if order == 1:
            return (f(x + step) - f(x - step)) / (2 * step)
        return (f(x + step) - 2 * f(x) + f(x - step)) / step**2

    d1, d2 = central(h), central(2 * h)
    return (4 * d1 - d2) / 3


def fd_step(k: float, order: int) -> float:
    # second derivatives lose two extra digits to cancellation, hence the larger base
    base = 1e-5 if order == 1 else 1e-3
    return base * max(1.0, abs(k))


def symbol_dk(model: ModelSpec, k: float, mu: float, h: float | None = None) -> np.ndarray:
    if model.derivatives.dk is not None and h is None:
        return np.asarray(model.derivatives.dk(k, mu), dtype=complex)
    h = fd_step(k, 1) if h is None else h
    return _richardson(lambda x: eval_symbol(model, x, mu), k, h, 1)


def symbol_dkk(model: ModelSpec, k: float, mu: float, h: float | None = None) -> np.ndarray:
    if model.derivatives.dkk is not None and h is None:
        return np.asarray(model.derivatives.dkk(k, mu), dtype=complex)
    h = fd_step(k, 2) if h is None else h
    return _richardson(lambda x: eval_symbol(model, x, mu), k, h, 2)


def symbol_dmu(model: ModelSpec, k: float, mu: float, h: float | None = None) -> np.ndarray:
    if model.derivatives.dmu is not None and h is None:
        return np.asarray(model.derivatives.dmu(k, mu), dtype=complex)
    h = fd_step(mu, 1) if h is None else h
    return _richardson(lambda x: eval_symbol(model, k, x), mu, h, 1)


def apply_nonlinearity(model: ModelSpec, k: float, modes: np.ndarray) -> np.ndarray:
    """Fourier coefficients of ``Q(U,U) + C(U,U,U)`` for ``U = sum modes[eta+M] e^{i eta xi}``.

    Reference implementation by explicit sums, used to cross-check the kernels.
    Output is truncated to the same mode range.
    """
    modes = np.asarray(modes, dtype=complex)
    P = modes.shape[0]
    M = (P - 1) // 2
    etas = np.arange(-M, M + 1)
    out = np.zeros_like(modes)
    for a, ea in enumerate(etas):
        for b, eb in enumerate(etas):
            e = ea + eb
            if abs(e) <= M and model.qform:
                out[e + M] += eval_qform(model, k * ea, k * eb, modes[a], modes[b])
            if model.cform:
                for c, ec in enumerate(etas):
                    e3 = e + ec
                    if abs(e3) <= M:
                        out[e3 + M] += eval_cform(model, k * ea, k * eb, k * ec, modes[a], modes[b], modes[c])
    return out


def is_reflection_symmetric(model: ModelSpec) -> bool:
    return model.symmetry == "O2"


def sample_check_reality(model: ModelSpec, ks: Sequence[float], mus: Sequence[float]) -> float:
    """Worst relative violation of ``S(-k) = conj S(k)`` over the samples."""
    worst = 0.0
    for k, mu in zip(ks, mus):
        S = eval_symbol(model, k, mu)
        Sm = eval_symbol(model, -k, mu)
        worst = max(worst, np.linalg.norm(Sm - S.conj()) / max(np.linalg.norm(S), 1e-300))
    return worst
