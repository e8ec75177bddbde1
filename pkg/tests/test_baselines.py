import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scanthz.baselines import IstaOptions, ista_objective, soft_threshold, solve_ista_columnwise
from scanthz.core import snr_db
from scanthz.errors import DimensionMismatch

from conftest import crandn


class TestSoftThreshold:
    @given(st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False), st.floats(0, 1e3))
    @settings(max_examples=200, deadline=None)
    def test_properties(self, z, t):
        out = complex(soft_threshold(np.array([z]), t)[0])
        if abs(z) <= t:
            assert out == 0
        else:
            assert abs(out) == pytest.approx(abs(z) - t, rel=1e-12, abs=1e-9)
            if abs(out) > 1e-6:
                assert np.angle(out) == pytest.approx(np.angle(z), abs=1e-12)

    def test_vector_thresholds(self):
        z = np.array([[3 + 4j, 1.0]])
        out = soft_threshold(z, np.array([1.0, 2.0]))
        np.testing.assert_allclose(out, [[(3 + 4j) * 0.8, 0.0]])


def test_zero_measurements():
    rep = solve_ista_columnwise(np.zeros((4, 3)), np.ones((4, 8)))
    assert not rep.estimate.any() and rep.solver == "ista"


def test_spike_recovery(rng):
    n = 32
    q, _ = np.linalg.qr(crandn(rng, n, n))
    phi = q[:16]  # orthonormal rows
    x = np.zeros((n, 1), dtype=complex)
    x[7] = 2 - 1j
    rep = solve_ista_columnwise(phi @ x, phi, IstaOptions(lam_ratio=1e-5, continuation=True, max_iter=20000, tol=1e-12))
    assert snr_db(x, rep.estimate) > 40


def test_objective_non_increasing(rng):
    for _ in range(5):
        phi = crandn(rng, 10, 20)
        y = crandn(rng, 10, 3)
        rep = solve_ista_columnwise(y, phi, IstaOptions(max_iter=200), history=True)
        traj = np.array(rep.cost_trajectory)
        assert traj.size > 1
        assert np.all(np.diff(traj) <= 1e-9 * np.abs(traj[:-1]))


def test_objective_helper(rng):
    a = np.zeros((4, 2), dtype=complex)
    y = crandn(rng, 3, 2)
    np.testing.assert_allclose(ista_objective(a, y, np.ones((3, 4)), 1.0), 0.5 * np.sum(np.abs(y) ** 2, axis=0))


def test_column_permutation(rng):
    phi = crandn(rng, 12, 24)
    y = crandn(rng, 12, 5)
    perm = rng.permutation(5)
    a = solve_ista_columnwise(y, phi).estimate
    b = solve_ista_columnwise(y[:, perm], phi).estimate
    np.testing.assert_allclose(b, a[:, perm], rtol=1e-12, atol=1e-12)


def test_dft_transform(rng):
    n = 32
    f = np.fft.fft(np.eye(n), axis=0, norm="ortho")
    a = np.zeros((n, 2), dtype=complex)
    a[3] = [1, 2j]
    phi = crandn(rng, 16, n)
    rep = solve_ista_columnwise(phi @ (f @ a), phi, IstaOptions(transform="dft", lam_ratio=1e-4, continuation=True, max_iter=20000, tol=1e-10))
    assert snr_db(f @ a, rep.estimate) > 30


def test_errors():
    with pytest.raises(DimensionMismatch):
        solve_ista_columnwise(np.ones((3, 2)), np.ones((4, 4)))
    for bad in ({"lam": 0}, {"tol": 0}, {"max_iter": 0}, {"transform": "x"}):
        with pytest.raises(ValueError):
            IstaOptions(**bad)
