import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from signcons.errors import DomainError
from signcons.graph import (
    SwitchingSchedule,
    Topology,
    complete,
    has_spanning_tree,
    line,
    min_positive_weight,
    neighbors,
    reachable_from,
    ring,
    spanning_tree_roots,
    star,
    topology_at,
    union,
    window_unions,
    windowed_union_has_spanning_tree,
)
from signcons.bundled import load_bundled


def chain3():
    w = np.zeros((3, 3))
    w[1, 0] = w[1, 2] = 1
    return Topology(w)


def two_pairs():
    w = np.zeros((4, 4))
    w[0, 1] = w[1, 0] = w[2, 3] = w[3, 2] = 1
    return Topology(w)


def brute_has_spanning_tree(w):
    """Transitive closure by repeated squaring of the support."""
    n = len(w)
    reach = (np.asarray(w).T > 0) | np.eye(n, dtype=bool)  # reach[r, i]: r's info reaches i
    for _ in range(n):
        reach = reach | ((reach.astype(int) @ reach.astype(int)) > 0)
    return bool(reach.all(axis=1).any())


weight_matrices = st.integers(2, 7).flatmap(
    lambda n: arrays(float, (n, n), elements=st.sampled_from([0.0, 0.0, 0.5, 1.0, 2.0]))
).map(lambda w: w - np.diag(np.diag(w)))


class TestTopology:
    def test_rejects_negative_weights(self):
        with pytest.raises(DomainError, match="nonnegative"):
            Topology([[0, -1], [1, 0]])

    def test_rejects_self_loops(self):
        with pytest.raises(DomainError, match="self-loops"):
            Topology([[1, 0], [0, 0]])

    def test_rejects_non_square(self):
        with pytest.raises(DomainError):
            Topology(np.zeros((2, 3)))

    def test_weights_frozen(self):
        t = complete(3)
        with pytest.raises(ValueError):
            t.weights[0, 1] = 5.0

    def test_from_edges_direction(self):
        t = Topology.from_edges(3, [(0, 1, 2.0)])
        assert t.weights[1, 0] == 2.0
        assert t.edges() == [(0, 1, 2.0)]


class TestNeighbors:
    def test_chain_middle(self):
        assert neighbors(chain3(), 1) == {0, 2}

    def test_empty(self):
        assert all(neighbors(Topology.empty(4), i) == set() for i in range(4))

    def test_complete(self):
        assert neighbors(complete(4), 2) == {0, 1, 3}

    def test_out_of_range(self):
        with pytest.raises(DomainError):
            neighbors(complete(3), 3)


class TestSpanningTree:
    def test_star_rooted_at_zero(self):
        assert has_spanning_tree(star(5))
        assert spanning_tree_roots(star(5)) == [0]

    def test_two_disjoint_cycles(self):
        assert not has_spanning_tree(two_pairs())

    def test_directed_line(self):
        assert has_spanning_tree(line(3))
        assert reachable_from(line(3), 0) == {0, 1, 2}
        assert reachable_from(line(3), 2) == {2}

    def test_two_sources(self):
        # 1 listens to 0 and 2, nobody listens to anything else
        assert not has_spanning_tree(chain3())

    def test_single_agent(self):
        assert has_spanning_tree(Topology.empty(1))

    @given(weight_matrices)
    def test_matches_transitive_closure(self, w):
        assert has_spanning_tree(Topology(w)) == brute_has_spanning_tree(w)

    @given(weight_matrices, st.floats(0.01, 100))
    def test_scale_invariant(self, w, c):
        assert has_spanning_tree(Topology(w)) == has_spanning_tree(Topology(c * w))

    @given(weight_matrices, st.data())
    def test_monotone_under_edge_addition(self, w, data):
        n = len(w)
        i = data.draw(st.integers(0, n - 1))
        j = data.draw(st.integers(0, n - 1).filter(lambda j: j != i))
        w2 = w.copy()
        w2[i, j] = 1.0
        if has_spanning_tree(Topology(w)):
            assert has_spanning_tree(Topology(w2))


class TestMinPositiveWeight:
    def test_unit_complete(self):
        assert min_positive_weight(complete(4)) == 1.0

    def test_mixed(self):
        w = np.zeros((3, 3))
        w[0, 1], w[1, 2], w[2, 0] = 0.5, 2.0, 0.1
        assert min_positive_weight(Topology(w)) == 0.1

    def test_empty_raises(self):
        with pytest.raises(DomainError):
            min_positive_weight(Topology.empty(3))


class TestUnion:
    def test_two_edges_make_line(self):
        a = Topology.from_edges(3, [(0, 1, 1.0)])
        b = Topology.from_edges(3, [(1, 2, 1.0)])
        assert union([a, b]) == line(3)

    def test_idempotent(self):
        g = ring(5)
        assert union([g, g]) == g

    def test_empty_list(self):
        with pytest.raises(DomainError):
            union([])

    def test_mismatched_n(self):
        with pytest.raises(DomainError):
            union([complete(2), complete(3)])

    def test_fig2_window_union_has_tree(self):
        s = load_bundled("paper_fig2").schedule
        assert has_spanning_tree(union([s.table["G1"], s.table["G2"]]))
        assert has_spanning_tree(union([s.table["G3"], s.table["G4"]]))

    @settings(max_examples=50)
    @given(st.integers(2, 6).flatmap(lambda n: st.tuples(*[arrays(float, (n, n), elements=st.sampled_from([0.0, 0.3, 1.0, 2.5]))] * 3)))
    def test_algebra(self, ws):
        a, b, c = (Topology(w - np.diag(np.diag(w))) for w in ws)
        assert union([a, b]) == union([b, a])
        assert union([union([a, b]), c]) == union([a, union([b, c])])
        positive = [t for t in (a, b) if not t.is_empty()]
        if positive:
            assert min_positive_weight(union([a, b])) >= min(min_positive_weight(t) for t in positive)


class TestSchedule:
    def schedule(self, mode="cycle"):
        return SwitchingSchedule(entries=[("A", 0.4), ("B", 0.4)], table={"A": line(3), "B": ring(3)}, mode=mode)

    def test_inside_first_dwell(self):
        assert topology_at(self.schedule(), 0.39) == line(3)

    def test_half_open_boundary(self):
        assert topology_at(self.schedule(), 0.4) == ring(3)

    def test_period_wrap(self):
        assert topology_at(self.schedule(), 0.8) == line(3)

    def test_float_grid_boundaries(self):
        s = self.schedule()
        ids = [s.id_at(k * 1e-3) for k in range(2401)]
        switches = [k for k in range(1, len(ids)) if ids[k] != ids[k - 1]]
        assert switches == [400, 800, 1200, 1600, 2000, 2400]

    def test_once_holds_last(self):
        s = self.schedule("once")
        assert s.id_at(0.5) == "B"
        assert s.id_at(100.0) == "B"

    def test_negative_time(self):
        with pytest.raises(DomainError):
            self.schedule().id_at(-0.1)

    def test_validation(self):
        with pytest.raises(DomainError, match="dwell"):
            SwitchingSchedule(entries=[("A", 0.0)], table={"A": line(3)})
        with pytest.raises(DomainError, match="not found"):
            SwitchingSchedule(entries=[("C", 1.0)], table={"A": line(3)})
        with pytest.raises(DomainError, match="share n"):
            SwitchingSchedule(entries=[("A", 1.0)], table={"A": line(3), "B": line(4)})

    @given(st.floats(0, 50, allow_nan=False))
    def test_total_and_piecewise_constant(self, t):
        s = self.schedule()
        phase = t % 0.8
        expected = "A" if phase < 0.4 else "B"
        # points within the snapping tolerance of a boundary may land either side
        if min(abs(phase - 0.4), abs(phase), abs(phase - 0.8)) > 1e-8:
            assert s.id_at(t) == expected

    def test_intervals_cover_window(self):
        s = self.schedule()
        iv = s.intervals(0.7, 1.3)
        assert [tid for *_, tid in iv] == ["B", "A", "B"]


class TestWindowedUnion:
    def test_fig2(self):
        s = load_bundled("paper_fig2").schedule
        assert windowed_union_has_spanning_tree(s, 0.8, 10.0)
        assert len(window_unions(s, 0.8, 10.0)) == 12

    def test_fig2_smaller_window_fails(self):
        # a 0.4 s window can hold only G2 or G4
        s = load_bundled("paper_fig2").schedule
        assert not windowed_union_has_spanning_tree(s, 0.4, 10.0)

    def test_disconnected_alternation(self):
        a = Topology.from_edges(4, [(0, 1, 1.0), (1, 0, 1.0)])
        b = Topology.from_edges(4, [(2, 3, 1.0), (3, 2, 1.0)])
        s = SwitchingSchedule(entries=[("a", 0.5), ("b", 0.5)], table={"a": a, "b": b})
        assert not windowed_union_has_spanning_tree(s, 1.0, 10.0)

    @pytest.mark.parametrize("window", [0.1, 0.8, 3.0])
    def test_static_tree(self, window):
        assert windowed_union_has_spanning_tree(SwitchingSchedule.static(star(4)), window, 9.0)

    def test_bad_window(self):
        with pytest.raises(DomainError):
            window_unions(SwitchingSchedule.static(star(4)), 0.0, 1.0)
