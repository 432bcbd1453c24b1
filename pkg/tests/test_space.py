import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qigkit import (
    ConfigurationSpace,
    DimensionMismatchError,
    LinearOperator,
    NormalizationError,
    StateVector,
    grid_space,
    identity,
    inner_product,
    projector,
    uniform_space,
    weighted_adjoint,
    weighted_outer,
)


def random_space(rng, n):
    w = rng.uniform(0.1, 1.0, n)
    return ConfigurationSpace(points=np.arange(n, dtype=float), weights=w / w.sum())


def random_operator(rng, space):
    n = space.n
    return LinearOperator(entries=rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)),
                          space=space)


class TestConfigurationSpace:
    def test_weights_must_be_positive(self):
        with pytest.raises(ValueError):
            ConfigurationSpace(points=[0.0, 1.0], weights=[1.0, 0.0])

    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValueError):
            ConfigurationSpace(points=[0.0, 1.0], weights=[0.5, 0.6])

    def test_json_round_trip(self, small_space):
        loaded = ConfigurationSpace.from_json(small_space.to_json())
        assert np.array_equal(loaded.points, small_space.points)
        assert np.array_equal(loaded.weights, small_space.weights)
        json.loads(small_space.to_json())  # well-formed

    def test_grid_space_normalizes(self):
        sp = grid_space(-5.0, 5.0, 33, reference="gaussian", scale=2.0)
        assert sp.weights.sum() == pytest.approx(1.0, abs=1e-14)
        assert np.all(sp.weights > 0)


class TestInnerProduct:
    def test_constant_one_gives_unity(self):
        sp = uniform_space([0.0, 1.0, 2.0, 3.0])
        one = StateVector(values=np.ones(4), space=sp)
        assert inner_product(one, one) == pytest.approx(1.0)

    def test_disjoint_indicators_orthogonal(self, small_space):
        e1 = StateVector(values=[1, 0, 0], space=small_space)
        e2 = StateVector(values=[0, 1, 0], space=small_space)
        assert inner_product(e1, e2) == 0.0

    def test_three_term_hand_sum(self, small_space):
        # oracle: 0.2*conj(1)*2 + 0.3*conj(i)*1 + 0.5*conj(0)*1 = 0.4 - 0.3i
        f = StateVector(values=[1.0, 1.0j, 0.0], space=small_space)
        g = StateVector(values=[2.0, 1.0, 1.0], space=small_space)
        assert inner_product(f, g) == pytest.approx(0.4 - 0.3j)

    def test_conjugate_symmetry(self, small_space):
        rng = np.random.default_rng(1)
        f = StateVector(values=rng.standard_normal(3) + 1j * rng.standard_normal(3),
                        space=small_space)
        g = StateVector(values=rng.standard_normal(3) + 1j * rng.standard_normal(3),
                        space=small_space)
        assert inner_product(f, g) == pytest.approx(np.conj(inner_product(g, f)))

    def test_dimension_mismatch_raises(self, small_space):
        other = uniform_space([0.0, 1.0])
        f = StateVector(values=[1, 0, 0], space=small_space)
        g = StateVector(values=[1, 0], space=other)
        with pytest.raises(DimensionMismatchError):
            inner_product(f, g)

    def test_positive_definite(self, small_space):
        rng = np.random.default_rng(2)
        for _ in range(20):
            f = StateVector(values=rng.standard_normal(3) + 1j * rng.standard_normal(3),
                            space=small_space)
            assert inner_product(f, f).real > 0


class TestWeightedAdjoint:
    def test_real_diagonal_is_selfadjoint(self, small_space):
        a = LinearOperator(entries=np.diag([1.0, 2.0, 3.0]).astype(complex),
                           space=small_space)
        assert a.selfadjoint_defect() == 0.0

    def test_single_entry_weight_ratio(self):
        # A has its only entry in row 1, column 2 (A g)_1 = g_2.  Matching
        # <f, A g> = w_1 conj(f_1) g_2 against <A^+ f, g> forces
        # (A^+ f)_2 = (w_1 / w_2) f_1, i.e. a single entry w_1/w_2 at (2, 1).
        sp = ConfigurationSpace(points=[0.0, 1.0], weights=[0.25, 0.75])
        a = LinearOperator(entries=[[0, 1], [0, 0]], space=sp)
        adj = weighted_adjoint(a)
        assert adj.entries[1, 0] == pytest.approx(0.25 / 0.75)
        assert adj.entries[0, 1] == 0.0
        f = StateVector(values=[1.0, 0.0], space=sp)
        g = StateVector(values=[0.0, 1.0], space=sp)
        assert inner_product(f, a.apply(g)) == pytest.approx(
            inner_product(adj.apply(f), g))

    def test_identity_fixed(self, small_space):
        i = identity(small_space)
        assert np.array_equal(weighted_adjoint(i).entries, i.entries)

    def test_defining_pairing(self, small_space):
        rng = np.random.default_rng(3)
        a = random_operator(rng, small_space)
        for _ in range(5):
            f = StateVector(values=rng.standard_normal(3) + 1j * rng.standard_normal(3),
                            space=small_space)
            g = StateVector(values=rng.standard_normal(3) + 1j * rng.standard_normal(3),
                            space=small_space)
            lhs = inner_product(f, a.apply(g))
            rhs = inner_product(a.adjoint().apply(f), g)
            assert lhs == pytest.approx(rhs, abs=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 10_000), n=st.integers(2, 16),
           alpha_re=st.floats(-5, 5), alpha_im=st.floats(-5, 5))
    def test_antilinearity_and_involution(self, seed, n, alpha_re, alpha_im):
        rng = np.random.default_rng(seed)
        sp = random_space(rng, n)
        a, b = random_operator(rng, sp), random_operator(rng, sp)
        alpha = alpha_re + 1j * alpha_im
        lhs = weighted_adjoint(alpha * a + b)
        rhs = np.conj(alpha) * weighted_adjoint(a) + weighted_adjoint(b)
        assert (lhs - rhs).one_norm() <= 1e-10 * (1.0 + abs(alpha))
        assert (weighted_adjoint(weighted_adjoint(a)) - a).one_norm() <= 1e-10


class TestProjector:
    def _unit(self, rng, space):
        v = rng.standard_normal(space.n) + 1j * rng.standard_normal(space.n)
        return StateVector(values=v / space.norm(v), space=space)

    def test_fixes_its_ray(self, small_space):
        psi = self._unit(np.random.default_rng(4), small_space)
        p = projector(psi)
        assert small_space.norm(p.apply(psi).values - psi.values) <= 1e-12

    def test_idempotent(self, small_space):
        psi = self._unit(np.random.default_rng(5), small_space)
        p = projector(psi)
        assert ((p @ p) - p).one_norm() <= 1e-12

    def test_unit_trace(self, small_space):
        # the weights sit inside the entries, so the plain trace is the weighted one
        psi = self._unit(np.random.default_rng(6), small_space)
        assert np.trace(projector(psi).entries) == pytest.approx(1.0, abs=1e-12)

    def test_rejects_unnormalized(self, small_space):
        bad = StateVector(values=[2.0, 0.0, 0.0], space=small_space)
        with pytest.raises(NormalizationError):
            projector(bad)

    def test_single_unit_eigenvalue(self):
        rng = np.random.default_rng(7)
        for n in (8, 32, 64):
            sp = random_space(rng, n)
            psi = self._unit(rng, sp)
            eig = np.sort(np.abs(np.linalg.eigvals(projector(psi).entries)))
            assert abs(eig[-1] - 1.0) <= 1e-8
            assert np.all(eig[:-1] < 1e-8)

    def test_weighted_outer_action(self, small_space):
        rng = np.random.default_rng(8)
        f = self._unit(rng, small_space)
        g = self._unit(rng, small_space)
        h = self._unit(rng, small_space)
        # |f><g| h = f <g, h>
        got = weighted_outer(f, g).apply(h).values
        want = f.values * inner_product(g, h)
        assert np.max(np.abs(got - want)) <= 1e-13
