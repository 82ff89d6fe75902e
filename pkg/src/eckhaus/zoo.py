"""Built-in models and the TOML configuration loader."""
from __future__ import annotations

from typing import Callable, Mapping

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ConfigError
from .model import FormTerm, ModelSpec, SymbolDerivatives

try:  # Python >= 3.11
    import tomllib as _toml
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as _toml


def _mat(x, n=None, name="matrix"):
    a = np.atleast_1d(np.asarray(x, dtype=float))
    if a.ndim == 1:
        a = np.diag(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square")
    if n is not None and a.shape[0] != n:
        raise ValueError(f"{name} must be {n}x{n}")
    return a


def _hadamard_tensor(n, order):
    T = np.zeros((n,) * (order + 1))
    for i in range(n):
        T[(i,) * (order + 1)] = 1.0
    return T


def _max_growth(symbol_of_k, kmax, npts=4001):
    """Maximum over k >= 0 of the largest real eigenvalue, refined locally."""
    ks = np.linspace(0.0, kmax, npts)
    vals = np.linalg.eigvals(symbol_of_k(ks)).real.max(axis=-1)
    j = int(np.argmax(vals))
    if j == 0 or j == npts - 1:
        return ks[j], vals[j]
    f = lambda k: -np.linalg.eigvals(symbol_of_k(np.asarray(k))).real.max()
    res = minimize_scalar(f, bracket=(ks[j - 1], ks[j], ks[j + 1]), method="brent", tol=1e-12)
    return float(res.x), -float(res.fun)


# ---------------------------------------------------------------- scalar models

def swift_hohenberg(shift: float = 0.0, cubic: float = -1.0) -> ModelSpec:
    """``u_t = (mu + shift) u - (1 + d_x^2)^2 u + cubic * u^3``."""

    def symbol(k, mu):
        k = np.asarray(k, dtype=float)
        return (mu + shift - (1.0 - k**2) ** 2)[..., None, None] + 0j

    derivs = SymbolDerivatives(
        dk=lambda k, mu: np.array([[4.0 * k * (1.0 - k**2)]], dtype=complex),
        dkk=lambda k, mu: np.array([[4.0 - 12.0 * k**2]], dtype=complex),
        dmu=lambda k, mu: np.array([[1.0]], dtype=complex),
    )
    return ModelSpec(
        name="swift-hohenberg",
        n=1,
        symbol=symbol,
        cform=(FormTerm(np.full((1, 1, 1, 1), float(cubic))),),
        symmetry="O2",
        parameters={"shift": shift, "cubic": cubic},
        derivatives=derivs,
        k_guess=1.0,
    )


def heat_scalar(decay: float = 1.0) -> ModelSpec:
    """``u_t = u_xx - decay * u + mu * u - u^3``; never has a neutral wavenumber."""
    if decay <= 0:
        raise ValueError("decay must be positive")

    def symbol(k, mu):
        k = np.asarray(k, dtype=float)
        return (mu - decay - k**2)[..., None, None] + 0j

    return ModelSpec(
        name="heat-scalar",
        n=1,
        symbol=symbol,
        cform=(FormTerm(np.full((1, 1, 1, 1), -1.0)),),
        symmetry="O2",
        parameters={"decay": decay},
        k_guess=1.0,
    )


# ---------------------------------------------------------------- Brusselator

def brusselator(a: float = 2.0, Du: float = 1.0, Dv: float = 8.0) -> ModelSpec:
    """Brusselator about its homogeneous state, ``b = b_c + mu``.

    Fields are ``(u - a, v - b/a)``.  The nonlinear coefficients are frozen at
    ``b = b_c``; their mu-dependence only enters at higher order in eps.
    """
    if min(a, Du, Dv) <= 0:
        raise ValueError("a, Du, Dv must be positive")
    eta = np.sqrt(Du / Dv)
    b_c = (1.0 + a * eta) ** 2
    k_star = np.sqrt(a / np.sqrt(Du * Dv))
    D = np.diag([Du, Dv])

    def A(mu):
        b = b_c + mu
        return np.array([[b - 1.0, a * a], [-b, -a * a]])

    def symbol(k, mu):
        k = np.asarray(k, dtype=float)[..., None, None]
        return A(mu) - k**2 * D + 0j

    derivs = SymbolDerivatives(
        dk=lambda k, mu: (-2.0 * k * D).astype(complex),
        dkk=lambda k, mu: (-2.0 * D).astype(complex),
        dmu=lambda k, mu: np.array([[1.0, 0.0], [-1.0, 0.0]], dtype=complex),
    )
    sgn = np.array([1.0, -1.0])
    Tq = np.zeros((2, 2, 2))
    Tq[:, 0, 0] = sgn * b_c / a
    Tq[:, 0, 1] = sgn * a
    Tq[:, 1, 0] = sgn * a
    Tc = np.zeros((2, 2, 2, 2))
    for idx in ((0, 0, 1), (0, 1, 0), (1, 0, 0)):
        Tc[(slice(None),) + idx] = sgn / 3.0
    return ModelSpec(
        name="brusselator",
        n=2,
        symbol=symbol,
        qform=(FormTerm(Tq),),
        cform=(FormTerm(Tc),),
        symmetry="O2",
        parameters={"a": a, "Du": Du, "Dv": Dv, "b_c": b_c},
        derivatives=derivs,
        k_guess=float(k_star),
    )


# ------------------------------------------- reaction-diffusion with Hadamard forms

_RD_DEFAULT_A = [[1.914213562373095, 4.0], [-2.914213562373095, -4.0]]
_RD_DEFAULT_D = [1.0, 8.0]


def _centered_rd(D, A, A_mu, V, kmax):
    """Shift ``A`` by a multiple of ``A_mu`` so that max Re lambda = 0."""
    D, A, A_mu, V = (np.asarray(x, dtype=float) for x in (D, A, A_mu, V))

    def raw(k, shift=0.0):
        k = np.asarray(k, dtype=float)[..., None, None]
        return A + shift * A_mu - k**2 * D + 1j * k * V

    _, top = _max_growth(raw, kmax)
    # A_mu is normally the identity; otherwise solve for the centering shift
    if np.allclose(A_mu, np.eye(len(A))):
        shift = -top
    else:
        from scipy.optimize import brentq

        g = lambda s: _max_growth(lambda k: raw(k, s), kmax)[1]
        lo, hi = -1.0, 1.0
        while g(lo) > 0:
            lo *= 2
        while g(hi) < 0:
            hi *= 2
        shift = brentq(g, lo, hi, xtol=1e-14)
    A0 = A + shift * A_mu
    kstar, _ = _max_growth(lambda k: raw(k, shift), kmax)
    return A0, shift, kstar


def _rd_model(name, qterms, D, A, A_mu, V, center, kmax, extra, cubic=0.0):
    n = len(np.atleast_1d(D))
    D = _mat(D, name="D")
    A = _mat(A, n, "A")
    A_mu = np.eye(n) if A_mu is None else _mat(A_mu, n, "A_mu")
    V = np.zeros((n, n)) if V is None else _mat(V, n, "V")
    if np.any(np.diag(D) <= 0):
        raise ValueError("diffusion coefficients must be positive")
    shift = 0.0
    kguess = 1.0
    if center:
        A, shift, kguess = _centered_rd(D, A, A_mu, V, kmax)

    def symbol(k, mu):
        k = np.asarray(k, dtype=float)[..., None, None]
        return A + mu * A_mu - k**2 * D + 1j * k * V

    derivs = SymbolDerivatives(
        dk=lambda k, mu: -2.0 * k * D + 1j * V,
        dkk=lambda k, mu: (-2.0 * D).astype(complex),
        dmu=lambda k, mu: A_mu.astype(complex),
    )
    symmetric = not np.any(V)
    params = {"D": D.tolist(), "A": A.tolist(), "A_mu": A_mu.tolist(), "V": V.tolist(),
              "centering_shift": shift}
    params.update(extra)
    params["cubic"] = float(cubic)
    return ModelSpec(
        name=name,
        n=n,
        symbol=symbol,
        qform=qterms(n),
        cform=(FormTerm(float(cubic) * _hadamard_tensor(n, 3)),) if cubic else (),
        symmetry="O2" if symmetric and name != "hadamard-burgers" else "SO2",
        parameters=params,
        derivatives=derivs,
        k_guess=float(kguess) if kguess > 0 else 1.0,
    )


def hadamard_diffusive(D=None, A=None, A_mu=None, V=None, center=True, kmax=4.0,
                       cubic: float = -1.0) -> ModelSpec:
    """``u_t = D u_xx + A u + (1/2) d_x^2 (u o u) + cubic * u o u o u``.

    ``o`` is the Hadamard product.  The quadratic term alone makes the Turing
    point subcritical for the linear parts we tried; the cubic term (default -1)
    restores supercriticality without touching the second-order modes.
    """

    def qterms(n):
        return (FormTerm(_hadamard_tensor(n, 2), lambda k1, k2: -0.5 * (np.asarray(k1) + k2) ** 2 + 0j),)

    return _rd_model("hadamard-diffusive", qterms,
                     _RD_DEFAULT_D if D is None else D, _RD_DEFAULT_A if A is None else A,
                     A_mu, V, center, kmax, {}, cubic)


_BURGERS_DEFAULT_V = [[0.0, 0.0], [0.0, 1.0]]


def hadamard_burgers(D=None, A=None, A_mu=None, V=None, center=True, kmax=4.0,
                     cubic: float = 0.0) -> ModelSpec:
    """``u_t = D u_xx + A u + V u_x + (1/2) d_x (u o u) + cubic * u o u o u``.

    ``V`` defaults to a differential advection of the second component; with
    ``V = 0`` the model is invariant under ``u -> -u(-x)`` and all convective
    quantities vanish.
    """

    def qterms(n):
        return (FormTerm(_hadamard_tensor(n, 2), lambda k1, k2: 0.5j * (np.asarray(k1) + k2) + 0j),)

    return _rd_model("hadamard-burgers", qterms,
                     _RD_DEFAULT_D if D is None else D, _RD_DEFAULT_A if A is None else A,
                     A_mu, _BURGERS_DEFAULT_V if V is None else V, center, kmax, {}, cubic)


# ---------------------------------------------------------------- Keller-Segel

def tabulated_phi_hat(table) -> Callable:
    """Piecewise-linear ``phi_hat`` from rows ``(k, Re, Im)``, zero outside the table.

    A table covering only ``k >= 0`` is extended to negative k by conjugation.
    """
    t = np.asarray(table, dtype=float)
    if t.ndim != 2 or t.shape[1] != 3 or len(t) < 2:
        raise ValueError("phi_hat table needs rows (k, Re, Im)")
    t = t[np.argsort(t[:, 0])]
    if np.any(np.diff(t[:, 0]) <= 0):
        raise ValueError("phi_hat table wavenumbers must be distinct")
    ks, re, im = t[:, 0], t[:, 1], t[:, 2]
    mirror = ks[0] >= 0

    def phi_hat(k):
        k = np.asarray(k, dtype=float)
        kk = np.abs(k) if mirror else k
        val = np.interp(kk, ks, re, left=0.0, right=0.0) + 1j * np.interp(kk, ks, im, left=0.0, right=0.0)
        if mirror:
            val = np.where(k < 0, np.conj(val), val)
        return val

    return phi_hat


def _gaussian_phi_hat(width):
    return lambda k: np.exp(-0.5 * (width * np.asarray(k, dtype=float)) ** 2) + 0j


def keller_segel(phi_hat=None, Q=None, d1: float = 1.0, d2: float = 1.0, u0: float = 1.0,
                 decay=(1.0, 1.0), production: float = 1.0, chi=None, width: float = 0.5,
                 kmax: float = 4.0) -> ModelSpec:
    """Two-component chemotaxis model with a nonlocal sensing kernel.

    ``u_t = d1 u_xx - decay0 u - chi d_x(u0 d_x(phi*v) + Q(u, d_x(phi*v)))``,
    ``v_t = d2 v_xx + production u - decay1 v``.  The kernel enters only through
    ``phi_hat``.  ``chi`` defaults to its critical value, so ``mu`` perturbs it.
    """
    if d1 <= 0 or d2 <= 0:
        raise ValueError("diffusion coefficients must be positive")
    if phi_hat is None:
        phi_hat = _gaussian_phi_hat(width)
    elif not callable(phi_hat):
        phi_hat = tabulated_phi_hat(phi_hat)
    Tq = np.zeros((2, 2, 2))
    if Q is None:
        Tq[0, 0, 1] = 1.0  # Q(u, w) = (u_1 w_2, 0)
    else:
        Tq = np.asarray(Q, dtype=float)
        if Tq.shape != (2, 2, 2):
            raise ValueError("Q must be a 2x2x2 tensor")

    base = np.array([[-decay[0], 0.0], [production, -decay[1]]])

    def coupling(k):
        return u0 * k**2 * phi_hat(k)

    if chi is None:
        ks = np.linspace(1e-3, kmax, 4001)
        c = coupling(ks).real
        need = (d1 * ks**2 + decay[0]) * (d2 * ks**2 + decay[1]) / production
        ok = c > 1e-300
        if np.any(ok):
            ratio = np.where(ok, need / np.where(ok, c, 1.0), np.inf)
            j = int(np.argmin(ratio))
            lo, hi = ks[max(j - 1, 0)], ks[min(j + 1, len(ks) - 1)]
            f = lambda k: (d1 * k**2 + decay[0]) * (d2 * k**2 + decay[1]) / production / coupling(k).real
            res = minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
            chi_c, kguess = float(res.fun), float(res.x)
        else:
            chi_c, kguess = 0.0, 1.0
    else:
        chi_c, kguess = float(chi), 1.0

    def symbol(k, mu):
        k = np.asarray(k, dtype=float)
        S = np.zeros(k.shape + (2, 2), dtype=complex)
        S[...] = base
        S[..., 0, 0] -= d1 * k**2
        S[..., 1, 1] -= d2 * k**2
        S[..., 0, 1] += (chi_c + mu) * coupling(k)
        return S

    # -chi d_x(Q(u, d_x(phi*v))): bilinear B(k1,k2) = chi (k1+k2) k2 phi(k2) Q, symmetrised
    def m_a(k1, k2):
        k1, k2 = np.asarray(k1, dtype=float), np.asarray(k2, dtype=float)
        return 0.5 * chi_c * (k1 + k2) * k2 * phi_hat(k2)

    def m_b(k1, k2):
        k1, k2 = np.asarray(k1, dtype=float), np.asarray(k2, dtype=float)
        return 0.5 * chi_c * (k1 + k2) * k1 * phi_hat(k1)

    qform = (FormTerm(Tq, m_a), FormTerm(Tq.transpose(0, 2, 1).copy(), m_b))
    probe = np.linspace(0.1, kmax, 7)
    even = np.allclose(phi_hat(probe), phi_hat(-probe)) and np.allclose(np.imag(phi_hat(probe)), 0)
    return ModelSpec(
        name="keller-segel",
        n=2,
        symbol=symbol,
        qform=qform,
        symmetry="O2" if even else "SO2",
        parameters={"d1": d1, "d2": d2, "u0": u0, "decay": list(decay), "production": production,
                    "chi_c": chi_c},
        k_guess=kguess,
    )


BUILTINS = {
    "swift-hohenberg": swift_hohenberg,
    "brusselator": brusselator,
    "hadamard-diffusive": hadamard_diffusive,
    "hadamard-burgers": hadamard_burgers,
    "keller-segel": keller_segel,
    "heat-scalar": heat_scalar,
}


def builtin(name: str, params: Mapping | None = None) -> ModelSpec:
    try:
        factory = BUILTINS[name]
    except KeyError:
        raise ValueError(f"unknown model {name!r}; choose from {sorted(BUILTINS)}") from None
    try:
        return factory(**dict(params or {}))
    except TypeError as exc:
        raise ValueError(f"bad parameters for {name}: {exc}") from exc


# ---------------------------------------------------------------- config files

def parse_config_text(text: str) -> dict:
    try:
        data = _toml.loads(text)
    except _toml.TOMLDecodeError as exc:
        line = getattr(exc, "lineno", None)
        col = getattr(exc, "colno", None)
        msg = getattr(exc, "msg", str(exc))
        raise ConfigError(f"malformed config: {msg}", line, col) from exc
    if "model" not in data or not isinstance(data["model"], str):
        raise ConfigError("config needs a string field 'model'")
    mu = data.get("mu_of_eps", [0.0, 0.0, 1.0])
    mu = list(mu) + [0.0] * (3 - len(mu))
    if len(mu) > 3 and any(mu[3:]):
        raise ConfigError("mu_of_eps must be at most quadratic")
    if mu[0] != 0.0 or mu[1] != 0.0 or mu[2] != 1.0:
        # every downstream formula assumes mu = eps^2 (second eps-derivative 2)
        raise ConfigError(f"unsupported mu(eps) coefficients {mu[:3]}; only mu = eps^2 is allowed")
    return data


def model_from_config(data: Mapping) -> ModelSpec:
    params = dict(data.get("params", {}))
    if "phi_hat" in data:
        if data["model"] != "keller-segel":
            raise ConfigError("phi_hat is only meaningful for keller-segel")
        params["phi_hat"] = data["phi_hat"]["table"] if isinstance(data["phi_hat"], dict) else data["phi_hat"]
    try:
        return builtin(data["model"], params)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ModelSpec:
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ConfigError(f"config is not UTF-8: {exc}") from exc
    return model_from_config(parse_config_text(text))
