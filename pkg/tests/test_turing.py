import numpy as np
import pytest

from eckhaus.errors import NotAtBifurcationError
from eckhaus.model import eval_symbol, symbol_dk
from eckhaus.turing import (critical_branch, find_turing_point, spectral_identity_defect, verify_hypotheses)
from eckhaus.zoo import builtin

from conftest import MODELS


def test_sh_critical_data(pipeline):
    _, crit, _ = pipeline("swift-hohenberg")
    assert crit.k_star == pytest.approx(1.0, abs=1e-9)
    assert crit.d_lambda_dmu == pytest.approx(1.0, abs=1e-9)
    assert crit.d2_lambda_dk2 == pytest.approx(-8.0, rel=1e-7)
    assert crit.d_star == 0
    assert abs(crit.r[0]) == pytest.approx(1.0) and abs(crit.ell[0]) == pytest.approx(1.0)


def test_sh_branch_closed_form():
    sh = builtin("swift-hohenberg")
    ks = np.linspace(0, 3, 301)
    assert np.allclose(critical_branch(sh, ks, 0.0), -(1 - ks**2) ** 2, atol=1e-10)
    br = critical_branch(sh, ks, -0.1)
    assert br.real.max() == pytest.approx(-0.1)
    assert ks[np.argmax(br.real)] == pytest.approx(1.0)


def test_brusselator_threshold(pipeline):
    m, crit, _ = pipeline("brusselator")
    a, Du, Dv = 2.0, 1.0, 8.0
    assert crit.k_star**2 == pytest.approx(a / np.sqrt(Du * Dv), rel=1e-8)
    assert abs(crit.lambda_at_kstar) <= 1e-6
    # dense scan oracle
    ks = np.linspace(0.01, 3, 3000)
    assert np.linalg.eigvals(m.symbol(ks, 0.0)).real.max() <= 1e-6
    # simple zero root of lambda^2 - tr lambda + det: lambda_b = (d det / db) / tr, d det / db = -Dv k^2
    b, k2 = m.parameters["b_c"], crit.k_star**2
    tr = b - 1 - Du * k2 - a * a - Dv * k2
    assert crit.d_lambda_dmu.real == pytest.approx(-Dv * k2 / tr, rel=1e-6)


@pytest.mark.parametrize("name", MODELS)
def test_eigenvector_consistency(pipeline, name):
    m, crit, _ = pipeline(name)
    S = eval_symbol(m, crit.k_star, 0.0)
    lam = crit.lambda_at_kstar
    assert np.linalg.norm(S @ crit.r - lam * crit.r) <= 1e-10
    assert np.linalg.norm(crit.ell @ S - lam * crit.ell) <= 1e-10
    assert crit.ell @ crit.r == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("name", MODELS)
def test_first_derivative_identity(pipeline, name):
    m, crit, _ = pipeline(name)
    proj = crit.ell @ symbol_dk(m, crit.k_star, 0.0) @ crit.r
    scale = max(abs(proj), 1.0)
    assert abs(proj - crit.d_lambda_dk) <= 1e-6 * scale


@pytest.mark.parametrize("name", MODELS)
def test_spectral_identity(pipeline, name):
    m, crit, _ = pipeline(name)
    assert spectral_identity_defect(m, crit) <= 1e-8


@pytest.mark.parametrize("name", ["brusselator", "keller-segel", "hadamard-burgers"])
def test_second_derivative_step_halving(pipeline, name):
    m, crit, _ = pipeline(name)
    h = 1e-3 * max(1.0, crit.k_star)
    a = find_turing_point(m, h2=h).d2_lambda_dk2
    b = find_turing_point(m, h2=h / 2).d2_lambda_dk2
    assert abs(a - b) <= 1e-6 * abs(a)


@pytest.mark.parametrize("name", ["swift-hohenberg", "brusselator", "hadamard-diffusive"])
def test_o2_models_have_no_phase_speed(pipeline, name):
    _, crit, _ = pipeline(name)
    assert crit.lambda_at_kstar.imag == 0
    assert crit.d_star == 0


def test_convective_model_has_phase_speed(pipeline):
    _, crit, _ = pipeline("hadamard-burgers")
    assert abs(crit.d_star) > 1e-3
    assert crit.d_star == pytest.approx(-crit.lambda_at_kstar.imag / crit.k_star)


@pytest.mark.parametrize("name", MODELS)
def test_hypotheses_pass_for_builtins(name):
    rep = verify_hypotheses(builtin(name))
    assert rep.all_passed, rep.to_dict()


def test_sh_hypotheses_on_documented_grid():
    rep = verify_hypotheses(builtin("swift-hohenberg"), ks=np.linspace(0, 3, 2001), mus=(-0.2, -0.05))
    assert [it.passed for it in rep.items] == [True] * 4
    assert rep.k_star == pytest.approx(1.0)


def test_shifted_sh_fails_h2_with_witness():
    rep = verify_hypotheses(builtin("swift-hohenberg", {"shift": 0.1}), ks=np.linspace(0, 3, 2001))
    h2 = rep.item("H2")
    assert not h2.passed
    assert h2.witness["eigenvalue"][0] == pytest.approx(0.1, abs=1e-6)
    assert h2.witness["k"] == pytest.approx(1.0, abs=1e-6)


def test_heat_equation_fails_h2():
    rep = verify_hypotheses(builtin("heat-scalar"))
    assert not rep.item("H2").passed
    assert rep.item("H1").passed
    with pytest.raises(NotAtBifurcationError):
        find_turing_point(builtin("heat-scalar"))


def test_gap_positive(pipeline):
    for name in MODELS:
        assert pipeline(name)[1].spectral_gap > 0
