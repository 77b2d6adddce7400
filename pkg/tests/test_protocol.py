import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from signcons.errors import DomainError
from signcons.graph import Topology, complete
from signcons.protocol import (
    LINEAR,
    SATURATED,
    SIGN,
    UNIT_VECTOR,
    ProtocolKind,
    linear_field,
    saturated_field,
    sat,
    scalar_sign_field,
    sgn,
    unit_vector_field,
)


def pair():
    return complete(2)


def line_undirected(n):
    w = np.zeros((n, n))
    for i in range(n - 1):
        w[i, i + 1] = w[i + 1, i] = 1
    return Topology(w)


def random_topology(rng, n):
    w = rng.uniform(0.1, 2.0, (n, n)) * (rng.random((n, n)) < 0.5)
    np.fill_diagonal(w, 0)
    return Topology(w)


states = st.integers(2, 8).flatmap(lambda n: arrays(float, n, elements=st.floats(-100, 100, allow_nan=False)))


class TestSgn:
    @pytest.mark.parametrize("x, expected", [(3.7, 1), (-0.001, -1), (0.0, 0), (-0.0, 0)])
    def test_values(self, x, expected):
        assert sgn(x) == expected

    def test_nan(self):
        with pytest.raises(DomainError):
            sgn(float("nan"))


class TestSat:
    def test_upper_branch(self):
        assert sat(5, 1) == 1.0

    def test_origin(self):
        assert sat(0, 0.5) == 0.0

    def test_middle_branch(self):
        assert sat(0.2, 0.5) == pytest.approx(oracles.sat(0.2, 0.5), rel=1e-12)
        assert oracles.sat(0.2, 0.5) == pytest.approx(0.4, rel=1e-12)

    @pytest.mark.parametrize("a", [0, -1])
    def test_bad_radius(self, a):
        with pytest.raises(DomainError):
            sat(1.0, a)

    @given(st.floats(-50, 50), st.floats(0.01, 10))
    def test_odd_and_bounded(self, x, a):
        assert sat(-x, a) == -sat(x, a)
        assert -1 <= sat(x, a) <= 1
        assert sat(x, a) == oracles.sat(x, a)


class TestScalarSignField:
    def test_pair(self):
        assert scalar_sign_field([0.0, 4.0], pair()).tolist() == [1.0, -1.0]

    def test_complete3(self):
        x = [0.0, 5.0, 10.0]
        got = scalar_sign_field(x, complete(3))
        want = oracles.sign_field(x, complete(3).weights.tolist())
        np.testing.assert_allclose(got, want, rtol=1e-12, atol=0)
        assert got.tolist() == [2.0, 0.0, -2.0]

    def test_equal_states(self):
        assert not scalar_sign_field(np.full(4, 2.5), complete(4)).any()

    def test_shape_preserved(self):
        assert scalar_sign_field(np.zeros((3, 1)), complete(3)).shape == (3, 1)

    def test_dimension_mismatch(self):
        with pytest.raises(DomainError):
            scalar_sign_field(np.zeros(3), complete(4))
        with pytest.raises(DomainError):
            scalar_sign_field(np.zeros((3, 2)), complete(3))

    @settings(max_examples=60)
    @given(states, st.integers(0, 2**32 - 1))
    def test_matches_oracle(self, x, seed):
        top = random_topology(np.random.default_rng(seed), len(x))
        got = scalar_sign_field(x, top)
        want = oracles.sign_field(list(x), top.weights.tolist())
        np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-12)

    @given(states, st.integers(0, 2**32 - 1), st.sampled_from(["3x", "cube", "shift", "atan"]))
    def test_single_bit(self, x, seed, g):
        top = random_topology(np.random.default_rng(seed), len(x))
        transform = {"3x": lambda v: 3 * v, "cube": lambda v: v**3, "shift": lambda v: v + 7, "atan": np.arctan}[g]
        y = transform(x)
        # a transform that collapses two distinct values in floating point does not preserve order
        if len(np.unique(y)) == len(np.unique(x)):
            assert np.array_equal(scalar_sign_field(x, top), scalar_sign_field(y, top))

    @given(states)
    def test_antisymmetric_on_symmetric_graph(self, x):
        f = scalar_sign_field(x, complete(len(x)))
        assert f.sum() == 0

    @given(states, st.integers(0, 2**32 - 1))
    def test_magnitude_bounded_by_row_sum(self, x, seed):
        top = random_topology(np.random.default_rng(seed), len(x))
        assert np.all(np.abs(scalar_sign_field(x, top)) <= top.row_sums() + 1e-12)


class TestSaturatedField:
    def test_outside_ball(self):
        assert saturated_field([0.0, 10.0], pair(), 1.0).tolist() == [1.0, -1.0]

    def test_inside_ball(self):
        x = [0.0, 0.5]
        got = saturated_field(x, pair(), 1.0)
        np.testing.assert_allclose(got, oracles.saturated_field(x, pair().weights.tolist(), 1.0), rtol=1e-12)
        np.testing.assert_allclose(got, [0.5, -0.5], rtol=1e-12)

    def test_equal_states(self):
        assert not saturated_field(np.ones(3), complete(3), 0.3).any()

    def test_bad_radius(self):
        with pytest.raises(DomainError):
            saturated_field([0.0, 1.0], pair(), 0.0)

    @given(states, st.integers(0, 2**32 - 1))
    def test_sign_limit(self, x, seed):
        top = random_topology(np.random.default_rng(seed), len(x))
        gaps = np.abs(x[:, None] - x[None, :])
        positive = gaps[gaps > 0]
        a = positive.min() / 2 if positive.size else 1.0
        assume(a > 0)  # half of the smallest subnormal gap rounds to zero
        np.testing.assert_array_equal(saturated_field(x, top, a), scalar_sign_field(x, top))


class TestLinearField:
    def test_pair(self):
        assert linear_field([0.0, 4.0], pair()).tolist() == [4.0, -4.0]

    def test_equal_states(self):
        assert not linear_field(np.full(3, -1.0), complete(3)).any()

    def test_line(self):
        x = [0.0, 1.0, 2.0]
        top = line_undirected(3)
        got = linear_field(x, top)
        np.testing.assert_allclose(got, oracles.laplacian_field(x, top.weights.tolist()), rtol=1e-12, atol=1e-15)
        assert got.tolist() == [1.0, 0.0, -1.0]


class TestUnitVectorField:
    def test_345(self):
        x = [[0.0, 0.0], [3.0, 4.0]]
        got = unit_vector_field(np.array(x), pair())
        np.testing.assert_allclose(got, oracles.unit_vector_field(x, pair().weights.tolist()), rtol=1e-12)
        np.testing.assert_allclose(got, [[0.6, 0.8], [-0.6, -0.8]], rtol=1e-12)

    def test_coincident(self):
        assert not unit_vector_field(np.ones((3, 2)), complete(3)).any()

    def test_equilateral_points_to_centroid(self):
        x = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3) / 2]])
        got = unit_vector_field(x, complete(3))
        np.testing.assert_allclose(got, oracles.unit_vector_field(x.tolist(), complete(3).weights.tolist()), rtol=1e-12, atol=1e-15)
        to_centroid = x.mean(axis=0) - x
        norms = np.linalg.norm(got, axis=1)
        np.testing.assert_allclose(norms, math.sqrt(3), rtol=1e-12)
        cos = np.sum(got * to_centroid, axis=1) / (norms * np.linalg.norm(to_centroid, axis=1))
        np.testing.assert_allclose(cos, 1.0, rtol=1e-12)

    def test_needs_vector_state(self):
        with pytest.raises(DomainError):
            unit_vector_field(np.zeros((2, 1)), pair())

    @settings(max_examples=40)
    @given(st.integers(2, 6), st.integers(2, 3), st.integers(0, 2**32 - 1))
    def test_matches_oracle(self, n, d, seed):
        rng = np.random.default_rng(seed)
        x = rng.uniform(-5, 5, (n, d))
        top = random_topology(rng, n)
        got = unit_vector_field(x, top)
        np.testing.assert_allclose(got, oracles.unit_vector_field(x.tolist(), top.weights.tolist()), rtol=1e-12, atol=1e-12)


class TestProtocolKind:
    def test_saturated_needs_radius(self):
        with pytest.raises(DomainError):
            ProtocolKind(SATURATED)

    def test_radius_only_for_saturated(self):
        with pytest.raises(DomainError):
            ProtocolKind(SIGN, 0.1)

    def test_unknown(self):
        with pytest.raises(DomainError):
            ProtocolKind("quantized")

    def test_dispatch(self):
        x = np.array([0.0, 0.5])
        assert np.array_equal(ProtocolKind(SIGN).field(x, pair()), scalar_sign_field(x, pair()))
        assert np.array_equal(ProtocolKind(LINEAR).field(x, pair()), linear_field(x, pair()))
        assert np.array_equal(ProtocolKind.saturated(1.0).field(x, pair()), saturated_field(x, pair(), 1.0))
        assert ProtocolKind(UNIT_VECTOR).vector
        assert str(ProtocolKind.saturated(0.1)) == "saturated(a=0.1)"

    def test_neighbor_state_used_for_neighbors_only(self):
        x = np.array([0.0, 4.0])
        stale = np.array([10.0, -1.0])
        # agent 0 sees -1 (below itself), agent 1 sees 10 (above itself)
        assert scalar_sign_field(x, pair(), stale).tolist() == [-1.0, 1.0]
