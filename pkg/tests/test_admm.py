import numpy as np
import pytest

from coopbeam.admm import admm_init, admm_messages, admm_round
from coopbeam.errors import InvalidRho
from coopbeam.topology import NetworkTopology, build_topology

from conftest import make_instance


def rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def dense_round(ch, s, beta, rho, x, abar, zbar, u):
    """The documented update written with global block matrices."""
    top = ch.topology
    x_new = []
    for l in range(top.L):
        A = np.vstack([ch.H[k, l] for k in top.U[l]])
        c = np.concatenate([ch.H[k, l] @ x[l] + zbar[k] - abar[k] - u[k] for k in top.U[l]])
        x_new.append(np.linalg.solve(2 * np.eye(top.N[l]) + rho * A.conj().T @ A,
                                     rho * A.conj().T @ c))
    a_new, z_new, u_new = [], [], []
    for k in range(top.K):
        n = len(top.B[k])
        a = sum(ch.H[k, l] @ x_new[l] for l in top.B[k]) / n
        sk = s[top.rx_slice(k)]
        z = (sk / beta + rho * (u[k] + a) / 2) / (n / beta + rho / 2)
        a_new.append(a)
        z_new.append(z)
        u_new.append(u[k] + a - z)
    return x_new, a_new, z_new, u_new


class TestInit:
    def test_zero_state(self):
        top = build_topology("nearest_b", 4, 5, [1, 2, 3, 2], 2, b=2, rng=0)
        st_ = admm_init(top, 2.5)
        assert st_.rho == 2.5 and st_.t == 0
        assert not any(v.any() for v in st_.x + st_.abar + st_.zbar + st_.u)

    @pytest.mark.parametrize("rho", [0.0, -1.0, float("inf"), float("nan")])
    def test_bad_rho(self, rho):
        with pytest.raises(InvalidRho):
            admm_init(build_topology("full", 1, 1, 1, 1), rho)


class TestRound:
    def test_zero_symbols(self):
        ch, s, _ = make_instance(0)
        st_ = admm_init(ch.topology)
        for _ in range(10):
            st_ = admm_round(st_, ch, np.zeros_like(s), 1e-2)
            assert not any(v.any() for v in st_.x)

    def test_matches_dense_formulas(self):
        ch, s, _ = make_instance(1, mode="nearest_b", L=4, K=5, N=2, M=2, b=2)
        beta, rho = 0.3, 1.7
        st_ = admm_init(ch.topology, rho)
        ref = ([v.copy() for v in st_.x], list(st_.abar), list(st_.zbar), list(st_.u))
        for _ in range(5):
            st_ = admm_round(st_, ch, s, beta)
            ref = dense_round(ch, s, beta, rho, *ref)
        for got, want in zip((st_.x, st_.abar, st_.zbar, st_.u), ref):
            for a, b in zip(got, want):
                np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-12)

    @pytest.mark.parametrize("rho", [0.1, 1.0, 10.0])
    @pytest.mark.parametrize("shape", [(4, 3, 2, 2), (4, 4, 2, 2), (2, 3, 1, 2)])
    def test_fixed_point_is_oracle(self, rho, shape):
        L, K, N, M = shape
        ch, s, xs = make_instance(2, L=L, K=K, N=N, M=M, beta=1.0)
        st_ = admm_init(ch.topology, rho)
        for _ in range(2000):
            st_ = admm_round(st_, ch, s, 1.0)
            if st_.primal_residual < 1e-9 and st_.dual_residual < 1e-9:
                break
        assert rel(np.concatenate(st_.x), xs) <= 1e-6
        assert st_.primal_residual < 1e-6 and st_.dual_residual < 1e-6

    def test_six_by_eight(self):
        # 6 receive antennas (K=3, M=2), 8 transmit antennas (L=4, N=2), rho = 1
        ch, s, xs = make_instance(3, L=4, K=3, N=2, M=2, beta=1.0)
        st_ = admm_init(ch.topology, 1.0)
        for _ in range(2000):
            st_ = admm_round(st_, ch, s, 1.0)
        assert rel(np.concatenate(st_.x), xs) <= 1e-6

    def test_sparse_topology_converges(self):
        ch, s, xs = make_instance(4, mode="nearest_b", L=5, K=5, N=2, M=1, b=2, beta=1.0)
        st_ = admm_init(ch.topology, 1.0)
        for _ in range(3000):
            st_ = admm_round(st_, ch, s, 1.0)
        assert rel(np.concatenate(st_.x), xs) <= 1e-6


def test_messages():
    top = NetworkTopology(2, 3, 2, [1, 2, 3], ((0, 0), (1, 0), (1, 1), (2, 1)))
    m = admm_messages(top)
    assert m.originated == 2 + 3
    assert m.deliveries == 2 * 4
    assert m.scalars == 2 * (1 + 2 + 2 + 3)
