import itertools
import math

import numpy as np
import pytest

import sglab


def grid(n):
    x = np.arange(n) / n
    return np.meshgrid(x, x, indexing="ij")


def test_ma_roundtrip():
    n = 32
    X, Y = grid(n)
    a = 0.01 / (4 * math.pi**2)
    p = a * np.sin(2 * math.pi * X) * np.sin(2 * math.pi * Y)
    rho = sglab.ma_determinant(p)
    assert rho.shape == (n, n)
    assert abs(rho.mean() - 1.0) < 1e-13
    sol = sglab.solve_ma(rho, tol=1e-12)
    assert sol["residual"] <= 1e-12
    assert np.max(np.abs(sol["p"] - p)) < 1e-10


def test_poisson_matches_eigenfunction():
    n = 32
    X, Y = grid(n)
    rho = np.sin(2 * math.pi * X) * np.cos(4 * math.pi * Y)
    psi = sglab.poisson_solve(rho)
    assert np.allclose(psi, -rho / (20 * math.pi**2), atol=1e-12)


def test_transport_oracles():
    rng = np.random.default_rng(3)
    a = rng.random((6, 2))
    b = rng.random((6, 2))
    cost, perm = sglab.assignment_cost(a, b)
    best = min(
        sum(np.sum((a[i] - b[p[i]]) ** 2) for i in range(6)) / 6
        for p in itertools.permutations(range(6))
    )
    # uniform masses 1/m
    assert cost == pytest.approx(best, rel=1e-12)
    assert sorted(perm) == list(range(6))
    assert sglab.w2_torus(a, a) == 0.0
    assert sglab.w2_torus(a, b) == sglab.w2_torus(b, a)


def test_euler_eigenmode_is_steady():
    n = 64
    X, Y = grid(n)
    w = np.sin(2 * math.pi * X) * np.sin(2 * math.pi * Y)
    w1, energy = sglab.euler_run(w, 0.01, 20)
    assert np.max(np.abs(w1 - w)) < 1e-8
    assert max(energy) - min(energy) < 1e-10


def test_config_and_errors():
    text = sglab.parse_config("kind=euler n=64 dt=0.01 T=1")
    assert "kind=euler" in text and "tol=1e-10" in text
    with pytest.raises(ValueError, match="dt"):
        sglab.parse_config("kind=euler dt=-1")
    with pytest.raises(ValueError):
        sglab.parse_config("kind=nope")
    with pytest.raises(ValueError):
        sglab.solve_ma(np.ones((4, 5)))


def test_rest_state_run(tmp_path):
    r = sglab.run(f"kind=sg-grid initial=rest n=32 dt=0.05 T=0.2 out={tmp_path}")
    assert r["status"] == "ok" and r["exit_code"] == 0
    i = r["columns"].index("rho_max")
    assert all(abs(row[i] - 1.0) < 1e-12 for row in r["rows"])
    assert (tmp_path / "record.csv").exists()


def test_verify_fault_injection():
    assert sglab.criterion_count == 15
    assert sglab.verify([1])[0]["passed"]
    assert not sglab.verify([1], ma_tol=1e-3)[0]["passed"]
