import numpy as np
import pytest

import vne_darboux as vd

SX = np.array([[0, 1], [1, 0]], dtype=complex)
A = np.diag([1.0, -1.0]).astype(complex)


def reference_lax(lam=None):
    seed = vd.anticommuting_seed(2, [1.0], [1.0])
    return vd.solve_lax(seed, 1j, lam=lam)


def test_mat_exp_matches_rotation():
    t = 0.7
    got = vd.mat_exp(-1j * t * SX)
    want = np.cos(t) * np.eye(2) - 1j * np.sin(t) * SX
    assert np.abs(got - want).max() < 1e-14


def test_reference_dressing():
    lax = reference_lax()
    assert abs(lax.z_mu) < 1e-10
    assert lax.hermitian_mode
    p_hand = 0.5 * np.array([[1, -1j], [1j, 1]])
    for t in (-2.0, 0.0, 1.5):
        d = lax.dressed(t)
        assert np.abs(d["rho1"] + SX).max() < 1e-10
        assert np.abs(d["P"] - p_hand).max() < 1e-10


def test_trajectory_and_checks():
    lax = reference_lax(lam=3j)
    out = vd.dressed_trajectory(lax, list(np.linspace(-1, 1, 5)), shift_lambda=0.5, rescale_y=2.0)
    assert out["overall"]
    names = {c["name"] for c in out["checks"]}
    assert {"residual", "idempotency", "covariance_time", "shift_closure"} <= names
    assert len(out["states"]) == 5


def test_pure_state_seed_is_density():
    psi = np.array([1, 1j, 0.5], dtype=complex)
    psi /= np.linalg.norm(psi)
    seed = vd.pure_state_seed(2, np.diag([1.0, 0.3, -0.8]).astype(complex), psi)
    lax = vd.solve_lax(seed, 0.4 + 1.1j)
    rho1 = lax.dressed(0.8)["rho1"]
    assert np.abs(rho1 - rho1.conj().T).max() < 1e-10
    assert abs(np.trace(rho1) - 1) < 1e-11
    assert np.linalg.eigvalsh(rho1).min() > -1e-10


def test_singular_pairing_raises():
    seed = vd.commuting_seed(1, A, np.zeros((2, 2), dtype=complex))
    lax = vd.solve_lax(seed, 1.0, nu=-1.0)
    with pytest.raises(vd.SingularDarboux):
        lax.dressed(0.0)


def test_run_config_and_schema_error():
    cfg = {
        "id": "py",
        "model": {"n": 2, "A": {"pairs": [1.0]}},
        "seed": {"family": "anticommuting", "couplings": [1.0]},
        "darboux": {"mu": [0.0, 1.0]},
        "times": {"t_min": -1.0, "t_max": 1.0, "samples": 3},
    }
    out = vd.run_config(cfg)
    assert out["exit_code"] == 0
    assert out["report"]["overall"] in (True, "PASS")
    cfg["darboux"]["mu"] = [0.0, 0.0]
    with pytest.raises(vd.SchemaError):
        vd.run_config(cfg)
