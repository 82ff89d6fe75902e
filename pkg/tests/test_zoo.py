from pathlib import Path

import numpy as np
import pytest

from eckhaus.errors import ConfigError
from eckhaus.model import eval_symbol
from eckhaus.zoo import BUILTINS, builtin, load_config, model_from_config, parse_config_text, tabulated_phi_hat

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def test_builtin_names():
    assert set(BUILTINS) >= {"swift-hohenberg", "brusselator", "hadamard-diffusive", "hadamard-burgers",
                             "keller-segel", "heat-scalar"}


def test_unknown_model():
    with pytest.raises(ValueError, match="unknown model"):
        builtin("gray-scott")


def test_bad_parameter_name():
    with pytest.raises(ValueError, match="bad parameters"):
        builtin("swift-hohenberg", {"nonsense": 1.0})


def test_malformed_config_reports_position():
    text = 'model = "swift-hohenberg"\n[params\nshift = 0.1\n'
    with pytest.raises(ConfigError) as exc:
        parse_config_text(text)
    assert exc.value.line == 2
    assert exc.value.column is not None
    assert exc.value.exit_code == 2


def test_config_needs_model():
    with pytest.raises(ConfigError, match="model"):
        parse_config_text("[params]\na = 1.0\n")


@pytest.mark.parametrize("mu", ["[0.0, 0.5, 1.0]", "[0.0, 0.0, 2.0]", "[0.1, 0.0, 1.0]"])
def test_general_mu_of_eps_rejected(mu):
    with pytest.raises(ConfigError, match="mu"):
        parse_config_text(f'model = "brusselator"\nmu_of_eps = {mu}\n')


def test_config_parameters_reach_model():
    data = parse_config_text('model = "swift-hohenberg"\n[params]\nshift = 0.25\n')
    m = model_from_config(data)
    assert eval_symbol(m, 1.0, 0.0)[0, 0] == pytest.approx(0.25)


def test_phi_hat_only_for_keller_segel():
    with pytest.raises(ConfigError):
        model_from_config({"model": "brusselator", "phi_hat": {"table": [[0, 1, 0], [1, 1, 0]]}})


def test_shipped_configs_load():
    m = load_config(CONFIGS / "brusselator.toml")
    assert m.name == "brusselator" and m.n == 2
    ks = load_config(CONFIGS / "keller-segel-tabulated.toml")
    assert ks.name == "keller-segel"


def test_missing_config_file(tmp_path):
    with pytest.raises(OSError):
        load_config(tmp_path / "absent.toml")


def test_non_utf8_config(tmp_path):
    p = tmp_path / "bad.toml"
    p.write_bytes(b'model = "\xff"\n')
    with pytest.raises(ConfigError):
        load_config(p)


def test_tabulated_phi_hat_interpolates_and_mirrors():
    f = tabulated_phi_hat([[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [2.0, 0.0, 0.0]])
    assert f(0.5) == pytest.approx(0.5 + 0.5j)
    assert f(-0.5) == pytest.approx(0.5 - 0.5j)
    assert f(3.0) == 0


def test_tabulated_phi_hat_validation():
    with pytest.raises(ValueError):
        tabulated_phi_hat([[0.0, 1.0]])
    with pytest.raises(ValueError):
        tabulated_phi_hat([[0.0, 1.0, 0.0], [0.0, 2.0, 0.0]])


def test_brusselator_symbol_is_jacobian():
    # independent oracle: Jacobian of the kinetics a - (b+1) u + u^2 v, b u - u^2 v at (a, b/a)
    m = builtin("brusselator")
    a, bc = m.parameters["a"], m.parameters["b_c"]
    b = bc + 0.1
    u, v = a, b / a
    J = np.array([[-(b + 1) + 2 * u * v, u * u], [b - 2 * u * v, -u * u]])
    k = 0.7
    assert np.allclose(eval_symbol(m, k, 0.1), J - k**2 * np.diag([1.0, 8.0]))


def test_burgers_default_is_convective():
    m = builtin("hadamard-burgers")
    assert m.symmetry == "SO2"
    assert builtin("hadamard-diffusive").symmetry == "O2"
