import random
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from dmm.samples import (
    SignedSample,
    act_sample_add,
    combine_extended,
    combine_samples,
    empirical_signed_measure,
    sample_leaf,
)
from dmm.vspace import PTVector, from_json, get_in, linear_combination

from oracles import binomial_bound, vectors

P = SignedSample("p", 1)
Q = SignedSample("q", 1)
N_DRAWS = 100_000

slots = st.one_of(
    st.none(), st.builds(SignedSample, st.sampled_from("pqr"), st.sampled_from([1, -1]))
)
weighted = st.lists(
    st.tuples(st.floats(-10, 10, allow_nan=False), slots), min_size=0, max_size=6
)


def test_sign_validation():
    with pytest.raises(ValueError):
        SignedSample("p", 0)
    with pytest.raises(ValueError):
        SignedSample("p", True)
    assert P.negated() == SignedSample("p", -1)


class TestCombineSamples:
    def test_all_zero_is_missing(self):
        assert combine_samples([(0.0, P), (0.0, Q)], random.Random(1)) is None

    def test_empty_is_missing(self):
        assert combine_samples([], random.Random(1)) is None

    def test_single_unit_term(self):
        rng = random.Random(1)
        assert all(combine_samples([(1.0, P)], rng) == P for _ in range(100))

    def test_negative_weight_flips(self):
        rng = random.Random(1)
        assert combine_samples([(-2.0, SignedSample("p", -1))], rng) == SignedSample("p", 1)

    def test_selected_missing_is_missing(self):
        rng = random.Random(1)
        assert all(combine_samples([(1.0, None)], rng) is None for _ in range(100))

    def test_half_half_frequencies(self):
        rng = random.Random(11)
        counts = Counter(combine_samples([(0.5, P), (-0.5, Q)], rng) for _ in range(N_DRAWS))
        assert set(counts) == {P, SignedSample("q", -1)}
        bound = binomial_bound(0.5, N_DRAWS)
        assert abs(counts[P] / N_DRAWS - 0.5) <= bound

    @given(weighted, st.integers(0, 2**32))
    def test_never_fabricates(self, pairs, seed):
        out = combine_samples(pairs, random.Random(seed))
        if out is not None:
            candidates = {
                SignedSample(s.point, s.sign * (1 if a > 0 else -1))
                for a, s in pairs
                if s is not None and a != 0
            }
            assert out in candidates
        if all(a == 0 for a, _ in pairs):
            assert out is None

    @given(weighted, st.integers(0, 2**32))
    def test_deterministic_under_seed(self, pairs, seed):
        a = [combine_samples(pairs, r) for r in [random.Random(seed)] for _ in range(5)]
        b = [combine_samples(pairs, r) for r in [random.Random(seed)] for _ in range(5)]
        assert a == b


class TestEmpiricalMeasure:
    def test_arithmetic(self):
        m = empirical_signed_measure([P, P, None, SignedSample("q", -1)])
        assert m == {"p": 0.5, "q": -0.25}

    def test_all_missing(self):
        assert empirical_signed_measure([None, None]) == {}
        assert empirical_signed_measure([]) == {}

    def test_recovers_mixture(self):
        rng = random.Random(5)
        draws = [combine_samples([(0.3, P), (0.7, Q)], rng) for _ in range(N_DRAWS)]
        m = empirical_signed_measure(draws)
        assert abs(m["p"] - 0.3) <= binomial_bound(0.3, N_DRAWS)
        assert abs(m["q"] - 0.7) <= binomial_bound(0.7, N_DRAWS)


class TestCombineExtended:
    @given(st.lists(st.tuples(st.floats(-5, 5, allow_nan=False), vectors(max_size=20)), max_size=4))
    def test_numbers_only_matches_linear_combination(self, pairs):
        rng = random.Random(0)
        state = rng.getstate()
        assert combine_extended(pairs, rng) == linear_combination(pairs)
        assert rng.getstate() == state  # no samples, no randomness consumed

    def test_single_input_keeps_sample(self):
        u = from_json({"a": {":number": 2.0, ":sample": {"point": "p", "sign": 1}}})
        out = combine_extended([(1.0, u)], random.Random(0))
        assert out == u

    def test_disjoint_paths(self):
        # path a: input 1 has <p,+1>, input 2 is missing there -> p w.p. 1/2, else missing
        u = PTVector(children={"a": sample_leaf("p")})
        w = PTVector(children={"b": sample_leaf("q")})
        rng = random.Random(2)
        at_a, at_b = Counter(), Counter()
        for _ in range(N_DRAWS):
            out = combine_extended([(1.0, u), (1.0, w)], rng)
            at_a[get_in(out, ("a",)).sample] += 1
            at_b[get_in(out, ("b",)).sample] += 1
        assert set(at_a) == {P, None}
        assert set(at_b) == {Q, None}
        bound = binomial_bound(0.5, N_DRAWS)
        assert abs(at_a[P] / N_DRAWS - 0.5) <= bound
        assert abs(at_b[Q] / N_DRAWS - 0.5) <= bound

    def test_zero_weight_input_never_selected(self):
        u = PTVector(children={"a": sample_leaf("p")})
        w = PTVector(children={"a": sample_leaf("q")})
        rng = random.Random(3)
        for _ in range(1000):
            out = combine_extended([(1.0, u), (0.0, w)], rng)
            assert get_in(out, ("a",)).sample == P

    def test_missing_leaf_pruned(self):
        u = PTVector(children={"a": sample_leaf("p")})
        out = combine_extended([(0.0, u)], random.Random(0))
        assert out.is_zero()


def test_act_sample_add():
    v = PTVector(children={"x": sample_leaf("p", number=1.0), "y": PTVector(2.0)})
    out = act_sample_add(v, random.Random(0))
    single = get_in(out, ("single",))
    assert single.scalar == 3.0
    assert single.sample in (P, None)
