"""Acceptance suite: one marker per criterion, summarised at the end of the run."""
import numpy as np
import pytest

from eckhaus.bloch import (assemble_bloch, bloch_sweep, convention_offset, fit_expansion, reflect_conjugate,
                           stability_verdict, verify_agreement)
from eckhaus.calibration import calibrate_gamma_prefactor
from eckhaus.cgl import (GAMMA_PREFACTOR, CGLCoefficients, cgl_sideband_eigenvalues, denormalize_kappaS_sq,
                         sideband_series)
from eckhaus.cli import main
from eckhaus.turing import spectral_identity_defect, verify_hypotheses
from eckhaus.wave import second_order_modes
from eckhaus.zoo import builtin

from conftest import MODELS

GOLDEN = __import__("pathlib").Path(__file__).parent / "golden"


def agreement(pipeline, waves, name, eps, kappa, convention="modified"):
    m, crit, cg = pipeline(name)
    fit = fit_expansion(bloch_sweep(m, crit, waves(name, eps, kappa), convention=convention))
    return verify_agreement(fit, cg, crit, eps, kappa, raise_on_mismatch=False)


def halving_ok(big, eps_big, small, eps_small):
    """K estimated from the larger eps, not exceeded at the smaller."""
    return small <= big / eps_big * eps_small


# ------------------------------------------------------------------ 1: Eckhaus boundary

def _stable(pipeline, waves, eps, kappa):
    m, crit, cg = pipeline("swift-hohenberg")
    v = stability_verdict(m, crit, cg, waves("swift-hohenberg", eps, float(kappa)), dead_band=0.0)
    assert v.verdict in ("diffusively-stable", "unstable"), v.verdict
    return v.verdict == "diffusively-stable"


def eckhaus_bracket(pipeline, waves, eps, refinements=10):
    ks = np.linspace(0.2, 0.4, 11)
    flags = [_stable(pipeline, waves, eps, k) for k in ks]
    flips = [i for i in range(len(ks) - 1) if flags[i] != flags[i + 1]]
    assert flips == [0 + flips[0]] and flags[0] and not flags[-1], flags
    lo, hi = ks[flips[0]], ks[flips[0] + 1]
    for _ in range(refinements):
        mid = round(0.5 * (lo + hi), 12)
        if _stable(pipeline, waves, eps, mid):
            lo = mid
        else:
            hi = mid
    return lo, hi


@pytest.mark.criterion(1)
def test_criterion1_eckhaus_boundary(pipeline, waves):
    kS = np.sqrt(1 / 12)
    err = {}
    for eps in (0.02, 0.04):
        lo, hi = eckhaus_bracket(pipeline, waves, eps)
        assert lo < hi
        err[eps] = abs(0.5 * (lo + hi) - kS) / kS
        print(f"eps={eps}: bracket [{lo:.6f}, {hi:.6f}], midpoint relative error {err[eps]:.3e}")
        assert err[eps] <= 0.1
    assert err[0.02] < err[0.04]


# ------------------------------------------------------------------ 2: co-periodic spectrum

@pytest.mark.criterion(2)
@pytest.mark.parametrize("name", ["swift-hohenberg", "hadamard-diffusive"])
def test_criterion2_coperiodic_spectrum(pipeline, waves, name):
    m, crit, cg = pipeline(name)
    defects = {}
    for eps in (0.04, 0.02):
        curves = bloch_sweep(m, crit, waves(name, eps, 0.0))
        assert abs(curves.lam2[curves.at(0.0)]) <= 1e-8 * curves.matrix_norm
        fit = fit_expansion(curves)
        defects[eps] = verify_agreement(fit, cg, crit, eps, 0.0, raise_on_mismatch=False).c0_defect
    print(f"{name}: |lambda1(0) - 2 eps^2 alpha^2 Re gamma| / eps^2 = {defects}")
    assert halving_ok(defects[0.04], 0.04, defects[0.02], 0.02)


# ------------------------------------------------------------------ 3: sideband expansion

@pytest.mark.criterion(3)
def test_criterion3_sideband_agreement(pipeline, waves):
    reps = {eps: agreement(pipeline, waves, "swift-hohenberg", eps, 0.15) for eps in (0.04, 0.02)}
    for eps, r in reps.items():
        print(f"eps={eps}: Re c2 = {r.c2_measured:.6f}, C2 = {r.C2_predicted.real:.6f}, "
              f"relative defect {r.c2_relative_defect:.3e}, |Re c1| = {r.re_c1:.2e}")
        assert r.re_c1 <= 1e-6
    assert halving_ok(reps[0.04].c2_relative_defect, 0.04, reps[0.02].c2_relative_defect, 0.02)


# ------------------------------------------------------------------ 4: convective case

EPS4, KAPPA4 = 0.04, 0.15


@pytest.mark.criterion(4)
def test_criterion4_im_c1_nonzero(pipeline, waves):
    r = agreement(pipeline, waves, "hadamard-burgers", EPS4, KAPPA4)
    print(f"Im c1 = {r.im_c1:.6g}, |Re c1| = {r.re_c1:.2e}, fit residual {r.fit.residual:.2e}")
    assert abs(r.im_c1) > 1e-6
    assert abs(r.im_c1) > 100 * r.re_c1


@pytest.mark.criterion(4)
def test_criterion4_matches_a_convention(pipeline, waves):
    r = agreement(pipeline, waves, "hadamard-burgers", EPS4, KAPPA4)
    pred = {k: v.imag for k, v in r.predicted_C1.items()}
    print(f"measured Im c1 = {r.im_c1:.6g}; predicted {pred}; relative defects {r.c1_relative_defect}")
    assert min(r.c1_relative_defect.values()) <= 0.3


@pytest.mark.criterion(4)
def test_criterion4_convention_shift(pipeline, waves):
    _, crit, _ = pipeline("hadamard-burgers")
    mod = agreement(pipeline, waves, "hadamard-burgers", EPS4, KAPPA4, "modified")
    std = agreement(pipeline, waves, "hadamard-burgers", EPS4, KAPPA4, "standard")
    shift = convention_offset(crit, waves("hadamard-burgers", EPS4, KAPPA4))
    print(f"Im c1 modified - standard = {mod.im_c1 - std.im_c1:.12g}, shift = {shift:.12g}")
    assert abs((mod.im_c1 - std.im_c1) - shift) <= 1e-6


# ------------------------------------------------------------------ 5: cGL internal suite

def random_draws(n=1000, seed=20261016):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        ar, br, cr = rng.uniform(0.2, 3, 3)
        ai, bi, ci = rng.uniform(-3, 3, 3)
        cg = CGLCoefficients(complex(ar, ai), complex(br, bi), complex(-cr, ci))
        if cg.bfn > 0:
            out.append((cg, rng.uniform(-0.8, 0.8) * np.sqrt(cg.kappaE_sq)))
    return out


DRAWS = random_draws()


@pytest.mark.criterion(5)
def test_criterion5_band_ordering():
    assert all(0 < cg.kappaS_sq < cg.kappaE_sq for cg, _ in DRAWS)


@pytest.mark.criterion(5)
def test_criterion5_normalized_round_trip():
    rel = [abs(denormalize_kappaS_sq(cg) - cg.kappaS_sq) / cg.kappaS_sq for cg, _ in DRAWS]
    assert max(rel) <= 1e-10


@pytest.mark.criterion(5)
def test_criterion5_series_remainder():
    ratios = []
    for cg, kappa in DRAWS:
        s = sideband_series(cg, kappa)
        rem = []
        for sig in (1e-2, 1e-3):
            _, lam2 = cgl_sideband_eigenvalues(cg, kappa, sig)
            rem.append(abs(lam2 - (s.c1 * sig + s.c2 * sig**2)))
        K = rem[0] / 1e-2**3
        ratios.append(rem[1] / (K * 1e-3**3))
    ratios = np.array(ratios)
    # a wrong sigma^2 coefficient would put the ratio near 10
    print(f"remainder ratio at sigma=1e-3 vs K sigma^3: median {np.median(ratios):.4f}, "
          f"max {ratios.max():.4f}, {np.sum(ratios > 1)} of {len(ratios)} above 1")
    assert np.all(ratios <= 1.0)


# ------------------------------------------------------------------ 6: gamma calibration

@pytest.mark.criterion(6)
def test_criterion6_gamma_calibration():
    cal = calibrate_gamma_prefactor(eps=1e-3, M=64)
    eps = 1e-3
    assert abs(cal["amplitude"] - 2 * eps / np.sqrt(3)) <= 1e-4 * 2 * eps / np.sqrt(3)
    matches = [c for c in cal["candidates"] if c["relative_error"] <= 0.01]
    assert len(matches) == 1
    assert matches[0]["prefactor"] == cal["selected"] == GAMMA_PREFACTOR


# ------------------------------------------------------------------ 7: symmetry and structure

@pytest.mark.criterion(7)
@pytest.mark.parametrize("name", MODELS)
def test_criterion7_conjugation_identity(pipeline, waves, name):
    m, crit, _ = pipeline(name)
    p = waves(name, 0.04, 0.1)
    for conv in ("modified", "standard"):
        for sigma in np.linspace(0.05, 0.5, 10):
            Bp = assemble_bloch(m, crit, p, sigma, conv).matrix
            Bm = assemble_bloch(m, crit, p, -sigma, conv).matrix
            assert np.max(np.abs(reflect_conjugate(Bp, m.n) - Bm)) <= 1e-12


@pytest.mark.criterion(7)
@pytest.mark.parametrize("name", MODELS)
def test_criterion7_spectral_identity(pipeline, name):
    assert spectral_identity_defect(*pipeline(name)[:2]) <= 1e-8


@pytest.mark.criterion(7)
@pytest.mark.parametrize("name", MODELS)
def test_criterion7_second_order_modes(pipeline, waves, name):
    m, crit, cg = pipeline(name)
    r = {eps: second_order_modes(m, crit, waves(name, eps, 0.0), cg) for eps in (0.04, 0.02)}
    for attr in ("err0", "err2"):
        big, small = getattr(r[0.04], attr), getattr(r[0.02], attr)
        print(f"{name} {attr}: {big:.6e} -> {small:.6e} (ratio {small / big if big else 0:.4f})")
        assert small <= 1e-12 or halving_ok(big, 0.04, small, 0.02)


@pytest.mark.criterion(7)
@pytest.mark.parametrize("name", MODELS)
def test_criterion7_truncation_robustness(pipeline, waves, name):
    m, crit, cg = pipeline(name)
    a, b = waves(name, 0.04, 0.1, 16), waves(name, 0.04, 0.1, 24)
    assert np.linalg.norm(b.modes[8:-8] - a.modes) <= 0.01 * np.linalg.norm(a.modes)
    va, vb = (stability_verdict(m, crit, cg, p) for p in (a, b))
    assert va.verdict == vb.verdict
    assert abs(vb.fit.c2.real - va.fit.c2.real) <= 0.01 * abs(va.fit.c2.real)


# ------------------------------------------------------------------ 8: hypothesis checker

@pytest.mark.criterion(8)
@pytest.mark.parametrize("name", ["swift-hohenberg", "brusselator"])
def test_criterion8_builtins_pass(name):
    rep = verify_hypotheses(builtin(name))
    assert [it.name for it in rep.items] == ["H1", "H2", "H3", "H4"]
    assert all(it.passed and it.witness for it in rep.items)


@pytest.mark.criterion(8)
def test_criterion8_heat_fails_h2():
    rep = verify_hypotheses(builtin("heat-scalar"))
    assert not rep.item("H2").passed and rep.item("H2").witness


@pytest.mark.criterion(8)
@pytest.mark.parametrize("name", ["swift-hohenberg", "brusselator"])
def test_criterion8_golden_reports(tmp_path, name):
    for run in ("a", "b"):
        assert main(["check", "--model", name, "--out", str(tmp_path / run)]) == 0
        assert (tmp_path / run / "hypotheses.json").read_bytes() == (GOLDEN / f"check_{name}.json").read_bytes()
