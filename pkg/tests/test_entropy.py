"""Entropy engine: traces, estimator, oracle equivalence, entropy laws."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flowent.entropy import (
    EngineConfig,
    brute_force_codim,
    codim_sequence,
    conjugate_flow,
    cotrajectory,
    ent_star,
    h_star,
    power_flow,
)
from flowent.errors import NotInvertible, TooLarge, WindowTooSmall
from flowent.linalg import Matrix, Subspace, intersect, preimage, random_invertible
from flowent.model import (
    EndoSpec,
    Flow,
    GoodSubspace,
    SpaceShape,
    direct_sum,
    good_direct_sum,
    make_bernoulli,
    make_identity,
    random_stencil_flow,
    truncate,
)

U = GoodSubspace.principal
FAST = EngineConfig(n_max=24, m_max=4)


class TestCotrajectory:
    def test_depth_one_is_u(self, gf2):
        flow = make_bernoulli(gf2, 1)
        got = cotrajectory(flow, U(2), 1)
        window = got.ambient
        rows = [
            [1 if j == i else 0 for j in range(window)]
            for i in range(window)
            if i not in (0, 1)
        ]
        assert got == Subspace.from_rows(gf2, rows)

    def test_identity_fixed(self, gf4):
        flow = make_identity(SpaceShape(gf4, 0))
        cfg = EngineConfig(window=12)
        ref = cotrajectory(flow, U(2), 1, cfg)
        for n in (1, 3, 5):
            assert cotrajectory(flow, U(2), n, cfg) == ref

    @pytest.mark.parametrize("m,n", [(1, 3), (2, 4), (3, 2)])
    def test_bernoulli_vanishing_coordinates(self, gf2, m, n):
        # hand computation: membership forces coordinates 0 .. m+n-2 to zero
        flow = make_bernoulli(gf2, 1)
        got = cotrajectory(flow, U(m), n)
        window = got.ambient
        expected = Subspace.from_rows(
            gf2,
            [[1 if j == i else 0 for j in range(window)] for i in range(m + n - 1, window)],
        )
        assert got == expected

    def test_incremental_identity(self, gf4):
        # C_{n+1} = U  intersect  phi^{-1}(C_n), checked against the public ops
        flow = random_stencil_flow(gf4, 7, discrete=False)
        u = U(2)
        window = cotrajectory(flow, u, 4).ambient
        cfg = EngineConfig(window=window)
        mat, _ = truncate(flow, window)
        u_win = cotrajectory(flow, u, 1, cfg)
        prev = u_win
        for n in range(2, 5):
            stepped = intersect(u_win, preimage(mat, prev))
            direct = cotrajectory(flow, u, n, cfg)
            assert stepped == direct
            prev = direct

    def test_pinned_window_too_small(self, gf2):
        flow = make_bernoulli(gf2, 1)
        with pytest.raises(WindowTooSmall):
            cotrajectory(flow, U(3), 6, EngineConfig(window=5))


class TestCodimSequence:
    def test_bernoulli_trace(self, gf2):
        flow = make_bernoulli(gf2, 1)
        for m in (1, 2, 3):
            trace = codim_sequence(flow, U(m), 6)
            assert trace.values == (0, 1, 2, 3, 4, 5)

    def test_identity_trace(self, gf4):
        flow = make_identity(SpaceShape(gf4, 1))
        trace = codim_sequence(flow, U(3), 6)
        assert trace.values == (0,) * 6

    def test_double_shift_doubles(self, gf2):
        two = direct_sum(make_bernoulli(gf2, 1), make_bernoulli(gf2, 1))
        u = good_direct_sum(U(2), U(2))
        trace = codim_sequence(two, u, 5)
        assert trace.values == (0, 2, 4, 6, 8)
        # oracle confirmation at a window that satisfies the bound
        for n in (1, 2, 3):
            w = max(u.extent, 1) + n * two.endo.bandwidth + two.endo.extent
            assert brute_force_codim(two, u, n, w) == trace.values[n - 1]

    @pytest.mark.parametrize("seed", range(5))
    def test_trace_invariants(self, gf4, seed):
        flow = random_stencil_flow(gf4, seed)
        for m in (0, 1, 3):
            trace = codim_sequence(flow, U(m), 16)
            assert trace.values[0] == 0
            assert trace.is_monotone()
            assert trace.is_subadditive()

    @pytest.mark.parametrize("slack", [4, 6, 8, 12, 16])
    def test_window_independence(self, gf4, slack):
        flow = random_stencil_flow(gf4, 3)
        base = codim_sequence(flow, U(2), 10, EngineConfig(n_max=10))
        got = codim_sequence(flow, U(2), 10, EngineConfig(n_max=10, window_slack=slack))
        assert got.values == base.values

    @given(st.integers(0, 500), st.integers(0, 3), st.sampled_from([0, 3, 9, 17]))
    @settings(max_examples=30)
    def test_window_independence_random_flows(self, seed, m, extra):
        from flowent.fields import make_prime_field

        field = make_prime_field(2)
        flow = random_stencil_flow(field, seed)
        reference = codim_sequence(flow, U(m), 8, EngineConfig(n_max=8))
        widened = codim_sequence(
            flow, U(m), 8, EngineConfig(n_max=8, window_slack=4 + extra)
        )
        assert widened.values == reference.values


class TestOracle:
    def test_bernoulli_matches(self, gf2):
        flow = make_bernoulli(gf2, 1)
        for m in (1, 2, 3):
            trace = codim_sequence(flow, U(m), 6)
            for n in range(1, 7):
                w = m + n * flow.endo.bandwidth
                assert brute_force_codim(flow, U(m), n, w) == trace.values[n - 1]

    def test_identity_zero(self, gf2):
        flow = make_identity(SpaceShape(gf2, 2))
        for n in (1, 2, 5):
            assert brute_force_codim(flow, U(2), n, 6) == 0

    @pytest.mark.parametrize("seed", range(5))
    def test_random_stencil_flows(self, gf2, seed):
        flow = random_stencil_flow(gf2, seed, offset_range=(-1, 2))
        m_cap = 2
        for m in range(m_cap + 1):
            trace = codim_sequence(flow, U(m), 4)
            for n in (1, 2, 3, 4):
                w = max(m, flow.endo.cd.cols, 1) + n * flow.endo.bandwidth + flow.endo.extent
                if flow.discrete_dim + w > 12:
                    continue
                assert brute_force_codim(flow, U(m), n, w) == trace.values[n - 1]

    def test_scattered_zero_set(self, gf2):
        flow = make_bernoulli(gf2, 1)
        u = GoodSubspace(frozenset({1, 3}))
        trace = codim_sequence(flow, u, 5)
        for n in range(1, 6):
            w = u.extent + n * flow.endo.bandwidth
            assert brute_force_codim(flow, u, n, w) == trace.values[n - 1]

    def test_caps(self, gf2, gf4):
        with pytest.raises(TooLarge):
            brute_force_codim(make_bernoulli(gf4, 1), U(1), 2, 8)
        with pytest.raises(TooLarge):
            brute_force_codim(make_bernoulli(gf2, 1), U(1), 2, 13)


class TestHStar:
    def test_bernoulli_rate_one(self, gf4):
        flow = make_bernoulli(gf4, 1)
        for m in (1, 2, 4):
            res = h_star(flow, U(m))
            assert res.resolved and res.value == 1

    def test_identity_zero(self, gf2):
        res = h_star(make_identity(SpaceShape(gf2, 0)), U(3))
        assert res.value == 0

    def test_block_shift_rate(self, gf2):
        for k in (2, 3):
            flow = make_bernoulli(gf2, k)
            res = h_star(flow, U(k + 1))
            assert res.value == k

    def test_small_zero_set_undershoots(self, gf2):
        # one zeroed coordinate sees only one new constraint per step
        res = h_star(make_bernoulli(gf2, 3), U(1))
        assert res.value == 1

    def test_lower_bound_is_exact_fraction(self, gf2):
        res = h_star(make_bernoulli(gf2, 1), U(2), FAST)
        assert res.lower_bound == Fraction(FAST.n_max - 1, FAST.n_max)


class TestEntStar:
    def test_bernoulli_over_gf4(self, gf4):
        est = ent_star(make_bernoulli(gf4, 1), FAST)
        assert est.resolved and est.value == 1
        assert est.h_top_pair == (1, 4)

    def test_identity_any_shape(self, gf4):
        est = ent_star(make_identity(SpaceShape(gf4, 3)), FAST)
        assert est.value == 0

    @pytest.mark.parametrize("d", [1, 3, 6])
    def test_discrete_only_flows(self, gf2, d, rng):
        # compact part untouched: entropy 0; oracle-checked for small d
        dd = Matrix(gf2, gf2.random_codes(rng, (d, d)))
        endo = EndoSpec(gf2, {}, dd=dd)
        flow = Flow(SpaceShape(gf2, d), endo, label=f"discrete[{d}]")
        est = ent_star(flow, FAST)
        assert est.value == 0
        for n in (1, 2, 4):
            assert brute_force_codim(flow, U(2), n, 12 - d) == 0

    def test_block_shift_value(self, gf2):
        est = ent_star(make_bernoulli(gf2, 3), FAST)
        assert est.value == 3

    def test_unresolved_when_chain_still_growing(self, gf2):
        # block size above m_max: the per-U rates keep climbing at the cap
        est = ent_star(make_bernoulli(gf2, 6), EngineConfig(n_max=24, m_max=5))
        assert not est.resolved
        assert est.value is None
        assert est.lower_bound >= 4

    def test_odd_characteristic_engine(self, gf3):
        # the rank accumulators have a separate path for odd characteristic
        assert ent_star(make_bernoulli(gf3, 1), FAST).value == 1
        assert ent_star(make_bernoulli(gf3, 2), FAST).value == 2
        assert ent_star(make_identity(SpaceShape(gf3, 5)), FAST).value == 0
        flow = random_stencil_flow(gf3, 4)
        trace = codim_sequence(flow, U(2), 10)
        assert trace.values[0] == 0
        assert trace.is_monotone() and trace.is_subadditive()

    def test_odd_extension_field_engine(self, gf3):
        from flowent.fields import least_irreducible, make_extension

        gf9, _ = make_extension(gf3, least_irreducible(gf3, 2))
        assert ent_star(make_bernoulli(gf9, 1), FAST).value == 1
        flow = random_stencil_flow(gf9, 0, discrete=False)
        for slack in (4, 8):
            cfg = EngineConfig(n_max=10, window_slack=slack)
            trace = codim_sequence(flow, U(1), 10, cfg)
            assert trace.is_monotone()
            if slack == 4:
                base = trace.values
            else:
                assert trace.values == base


class TestEntropyLaws:
    def test_power_one_is_same_flow(self, gf2):
        flow = make_bernoulli(gf2, 1)
        assert power_flow(flow, 1) is flow

    def test_logarithmic_law_bernoulli(self, gf2):
        flow = make_bernoulli(gf2, 1)
        for k in (1, 2, 3):
            est = ent_star(power_flow(flow, k), FAST)
            assert est.value == k

    def test_logarithmic_law_direct_sum(self, gf2):
        # squaring a periodic-stencil flow: phases convolve with themselves
        s = direct_sum(make_bernoulli(gf2, 1), make_bernoulli(gf2, 2))
        deep = EngineConfig(n_max=32, m_max=10)
        base = ent_star(s, deep)
        assert base.value == 3
        doubled = ent_star(power_flow(s, 2), deep)
        assert doubled.value == 2 * base.value

    @pytest.mark.parametrize("seed", range(6))
    def test_conjugation_invariance(self, gf2, seed):
        flow = make_bernoulli(gf2, 1)
        rng = np.random.default_rng(seed)
        a = random_invertible(gf2, rng, 6)
        conj = conjugate_flow(flow, a)
        assert ent_star(conj, FAST).value == 1

    def test_conjugation_requires_invertible(self, gf2):
        with pytest.raises(NotInvertible):
            conjugate_flow(make_bernoulli(gf2, 1), Matrix.zeros(gf2, 4, 4))

    @pytest.mark.parametrize("seed", range(4))
    def test_conjugation_matches_matrix_conjugation(self, gf4, seed):
        # truncations of the conjugated flow agree with A M A^-1 wherever
        # neither side is affected by window spill
        from flowent.linalg import inverse

        flow = random_stencil_flow(gf4, seed)
        d = flow.discrete_dim
        rng = np.random.default_rng(seed)
        a = random_invertible(gf4, rng, d + 5)
        conj = conjugate_flow(flow, a)
        w = 40
        mat, _ = truncate(flow, w)
        big = np.eye(d + w, dtype=np.int64)
        big[: d + 5, : d + 5] = a.data
        big_inv = np.eye(d + w, dtype=np.int64)
        big_inv[: d + 5, : d + 5] = inverse(a).data
        want = gf4.arr_matmul(gf4.arr_matmul(big, mat.data), big_inv)
        got, _ = truncate(conj, w)
        keep = d + w - max(flow.endo.bandwidth, conj.endo.bandwidth) - 1
        assert np.array_equal(got.data[:keep, :keep], want[:keep, :keep])

    def test_conjugation_invariance_with_discrete_part(self, gf2):
        flow = direct_sum(make_bernoulli(gf2, 1), make_identity(SpaceShape(gf2, 2)))
        base = ent_star(flow, FAST).value
        for seed in (0, 1):
            rng = np.random.default_rng(seed)
            a = random_invertible(gf2, rng, flow.discrete_dim + 4)
            assert ent_star(conjugate_flow(flow, a), FAST).value == base

    @pytest.mark.parametrize("seed", range(3))
    def test_conjugation_round_trip(self, gf4, seed):
        from flowent.linalg import inverse

        flow = random_stencil_flow(gf4, seed, discrete=False)
        rng = np.random.default_rng(seed)
        a = random_invertible(gf4, rng, 5)
        back = conjugate_flow(conjugate_flow(flow, a), inverse(a))
        w = 30
        keep = w - max(flow.endo.bandwidth, back.endo.bandwidth) - 1
        assert np.array_equal(
            truncate(back, w)[0].data[:keep, :keep],
            truncate(flow, w)[0].data[:keep, :keep],
        )

    @pytest.mark.parametrize("seed", range(3))
    def test_power_flow_matches_iterated_matrix(self, gf4, seed):
        flow = random_stencil_flow(gf4, seed, discrete=False)
        squared = power_flow(flow, 2)
        w = 40
        m = truncate(flow, w)[0]
        got = truncate(squared, w)[0]
        keep = w - 2 * flow.endo.bandwidth - 1
        assert np.array_equal((m @ m).data[:keep, :keep], got.data[:keep, :keep])

    def test_direct_sum_lower_bound(self, gf2):
        # interleaving spreads the zero sets, so the chain plateaus later
        deep = EngineConfig(n_max=24, m_max=6)
        b1 = make_bernoulli(gf2, 1)
        b2 = make_bernoulli(gf2, 2)
        est = ent_star(direct_sum(b1, b2), deep)
        assert est.value is not None
        assert est.value >= max(ent_star(b1, FAST).value, ent_star(b2, FAST).value)
        assert est.value == 3  # shifts add coordinatewise

    def test_sum_with_identity(self, gf2):
        s = direct_sum(make_bernoulli(gf2, 1), make_identity(SpaceShape(gf2, 1)))
        assert ent_star(s, FAST).value == 1
