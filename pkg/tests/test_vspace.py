import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from dmm.errors import ParseError, ReservedTokenError, TokenError
from dmm.vspace import (
    PTVector,
    SignedSample,
    add,
    attach,
    coefficient,
    dumps,
    from_json,
    from_terms,
    get_in,
    linear_combination,
    loads,
    max_rank,
    prune,
    scale,
    subtree,
    terms,
    to_json,
    with_coefficient,
    zero,
)

from oracles import (
    as_flat,
    assert_matches_flat,
    flat_combination,
    flat_sum,
    int_coeffs,
    paths,
    real_coeffs,
    term_lists,
    tokens,
    vectors,
)


def v(obj):
    return from_json(obj)


class TestZero:
    def test_shape(self):
        z = zero()
        assert z.scalar == 0.0
        assert dict(z.children) == {}
        assert z.is_zero()

    @given(paths)
    def test_coefficient_is_zero(self, path):
        assert coefficient(zero(), path) == 0.0

    def test_max_rank_none(self):
        assert max_rank(zero()) is None

    @given(vectors())
    def test_additive_identity(self, u):
        assert add(zero(), u) == u
        assert add(u, zero()) == u


class TestFromTerms:
    def test_like_terms_combine(self):
        u = from_terms([(("a",), 1.0), (("a",), 2.0)])
        assert coefficient(u, ("a",)) == 3.0
        assert list(terms(u)) == [(("a",), 3.0)]

    def test_empty_path_is_scalar(self):
        u = from_terms([((), 5.0)])
        assert u.scalar == 5.0
        assert u == PTVector(5.0)

    def test_shared_prefix(self):
        u = from_terms([(("a", "b"), 2.0), (("a", "c"), -1.0)])
        assert list(u.children) == ["a"]
        assert coefficient(u, ("a", "b")) == 2.0
        assert coefficient(u, ("a", "c")) == -1.0
        assert coefficient(u, ("a",)) == 0.0

    @pytest.mark.parametrize("bad", [":number", ":sample"])
    def test_reserved(self, bad):
        with pytest.raises(ReservedTokenError):
            from_terms([(("a", bad), 1.0)])

    def test_empty_token(self):
        with pytest.raises(TokenError):
            from_terms([(("",), 1.0)])

    def test_cancellation_gives_zero(self):
        assert from_terms([(("a", "b"), 1.0), (("a", "b"), -1.0)]).is_zero()

    @given(term_lists())
    def test_matches_flat_sum(self, tl):
        assert_matches_flat(from_terms(tl), flat_sum(tl))


class TestAccess:
    def test_coefficient(self):
        u = from_terms([(("a", "b"), 2.0)])
        assert coefficient(u, ("a", "b")) == 2.0
        assert coefficient(u, ("a",)) == 0.0
        assert coefficient(zero(), ()) == 0.0

    def test_subtree(self):
        u = v({"a": {"b": 2}})
        assert subtree(u, "a") == v({"b": 2})
        assert subtree(u, "c") == zero()
        with pytest.raises(ReservedTokenError):
            subtree(u, ":number")

    @given(vectors(), paths)
    def test_recurrent_map_law(self, u, path):
        node = u
        for token in path:
            node = subtree(node, token)
        assert node.scalar == coefficient(u, path)
        assert node == get_in(u, path)

    def test_attach(self):
        assert attach(zero(), "a", v({"b": 1})) == v({"a": {"b": 1}})
        u = v({"a": {"b": 1}, "c": 2})
        assert attach(u, "a", zero()) == v({"c": 2})
        with pytest.raises(ReservedTokenError):
            attach(u, ":sample", zero())

    @given(vectors(), tokens, vectors())
    def test_attach_round_trip(self, u, token, w):
        out = attach(u, token, w)
        assert subtree(out, token) == w
        for other in u.children:
            if other != token:
                assert subtree(out, other) == subtree(u, other)
        assert out.scalar == u.scalar

    @given(vectors(), paths, real_coeffs)
    def test_with_coefficient(self, u, path, x):
        out = with_coefficient(u, path, x)
        assert coefficient(out, path) == x
        expected = {p: c for p, c in as_flat(u).items() if p != path}
        if x != 0.0:
            expected[path] = x
        assert as_flat(out) == expected

    def test_max_rank(self):
        assert max_rank(PTVector(1.0)) == 0
        assert max_rank(v({"a": {"b": {"c": 3}}})) == 3
        assert max_rank(v({"a": 1, "b": {"c": {"d": {":number": 0}}}})) == 1

    @given(term_lists(max_size=20))
    def test_max_rank_matches_flat(self, tl):
        flat = flat_sum(tl)
        expected = max((len(p) for p in flat), default=None)
        assert max_rank(from_terms(tl)) == expected


class TestLinearCombination:
    def test_componentwise(self):
        out = linear_combination([(1, v({"a": 1})), (1, v({"a": 2, "b": -1}))])
        assert out == v({"a": 3, "b": -1})

    def test_cancellation_prunes(self):
        out = linear_combination([(2, v({"a": 1})), (-2, v({"a": 1}))])
        assert out == zero()
        assert out.is_zero()

    def test_halving_50_paths(self):
        rnd = random.Random(3)
        tl = [
            (tuple(rnd.choice("abcdef") for _ in range(rnd.randint(0, 6))), rnd.uniform(-10, 10))
            for _ in range(50)
        ]
        u = from_terms(tl)
        assert_matches_flat(linear_combination([(0.5, u)]), flat_combination([(0.5, flat_sum(tl))]))

    def test_epsilon(self):
        u = v({"a": 1.0, "b": 1e-13})
        assert linear_combination([(1.0, u)]) == v({"a": 1.0})
        assert linear_combination([(1.0, u)], epsilon=1e-14) == u

    def test_empty(self):
        assert linear_combination([]) == zero()

    def test_drops_samples(self):
        u = PTVector(2.0, sample=SignedSample("p", 1))
        assert linear_combination([(1.0, u)]) == PTVector(2.0)

    @settings(max_examples=200)
    @given(st.lists(st.tuples(real_coeffs, term_lists(max_size=30)), max_size=5))
    def test_oracle_equivalence(self, cases):
        pairs = [(a, from_terms(tl)) for a, tl in cases]
        flat = flat_combination([(a, flat_sum(tl)) for a, tl in cases])
        assert_matches_flat(linear_combination(pairs), flat, tol=1e-9)

    def test_operators(self):
        a, b = v({"a": 1}), v({"b": 2})
        assert a + b == v({"a": 1, "b": 2})
        assert a - a == zero()
        assert -a == v({"a": -1})
        assert 3 * a == a * 3 == v({"a": 3})


def _all_nodes_nonzero(u: PTVector) -> bool:
    return all(not c.is_zero() and _all_nodes_nonzero(c) for c in u.children.values())


class TestCanonical:
    @given(vectors())
    def test_prune_idempotent(self, u):
        assert prune(u) == u
        assert prune(prune(u, 1.0), 1.0) == prune(u, 1.0)

    @given(st.lists(st.tuples(int_coeffs, term_lists(int_coeffs, 20)), max_size=4))
    def test_results_are_canonical(self, cases):
        out = linear_combination([(a, from_terms(tl)) for a, tl in cases])
        assert _all_nodes_nonzero(out)

    def test_constructor_drops_zero_children(self):
        u = PTVector(0.0, {"a": zero(), "b": PTVector(1.0)})
        assert list(u.children) == ["b"]

    def test_negative_zero_normalized(self):
        assert PTVector(-0.0) == zero()
        assert dumps(PTVector(-0.0)) == "{}"


class TestVectorSpaceLaws:
    @given(vectors(), vectors())
    def test_commutative(self, u, w):
        assert add(u, w) == add(w, u)

    @given(vectors(int_coeffs), vectors(int_coeffs), vectors(int_coeffs))
    def test_associative(self, u, w, x):
        assert add(add(u, w), x) == add(u, add(w, x))

    @given(int_coeffs, vectors(int_coeffs), vectors(int_coeffs))
    def test_distributive(self, a, u, w):
        assert scale(a, add(u, w)) == add(scale(a, u), scale(a, w))

    @given(int_coeffs, int_coeffs, vectors(int_coeffs))
    def test_scale_compatible(self, a, b, u):
        assert scale(a * b, u) == scale(a, scale(b, u))

    @given(vectors(), vectors(), vectors())
    def test_associative_real(self, u, w, x):
        left, right = add(add(u, w), x), add(u, add(w, x))
        assert_matches_flat(left, as_flat(right), tol=1e-9)


samples = st.builds(SignedSample, st.sampled_from(["p", "q", "ü"]), st.sampled_from([1, -1]))


@st.composite
def sample_vectors(draw):
    u = draw(vectors(real_coeffs, 20))
    for path in draw(st.lists(paths, max_size=3)):
        node = get_in(u, path)
        node = PTVector(node.scalar, node.children, draw(samples))
        u = _replace_in(u, path, node)
    return u


def _replace_in(u, path, node):
    if not path:
        return node
    return attach(u, path[0], _replace_in(subtree(u, path[0]), path[1:], node))


class TestSerialization:
    def test_format(self):
        u = from_terms([((), 5.0), (("a", "b"), 2.0)])
        assert dumps(u) == '{":number": 5.0, "a": {"b": 2.0}}'
        assert loads('{"a": {"b": 2.0}, ":number": 5.0}') == u

    def test_sample_leaf(self):
        u = v({"a": {":number": 1.5, ":sample": {"point": "p", "sign": 1}}})
        assert get_in(u, ("a",)).sample == SignedSample("p", 1)
        assert json.loads(dumps(u)) == {"a": {":number": 1.5, ":sample": {"point": "p", "sign": 1}}}

    def test_bare_number(self):
        assert loads("3") == PTVector(3.0)
        assert to_json(PTVector(3.0)) == {":number": 3.0}

    @pytest.mark.parametrize(
        "text, where",
        [
            ('{"a": "x"}', "a"),
            ('{"a": {"b": true}}', "a/b"),
            ('{"a": {":sample": {"point": "p", "sign": 2}}}', "a/:sample"),
            ('{"a": {"": 1}}', "a/"),
        ],
    )
    def test_errors_name_path(self, text, where):
        with pytest.raises(ParseError) as info:
            loads(text)
        assert "/".join(info.value.where) == where

    def test_invalid_json(self):
        with pytest.raises(ParseError):
            loads("{")

    @given(vectors())
    def test_round_trip(self, u):
        assert loads(dumps(u)) == u

    @given(sample_vectors())
    def test_round_trip_with_samples(self, u):
        assert loads(dumps(u)) == u

    @given(st.floats(allow_nan=False, allow_infinity=False).filter(lambda x: x != 0))
    def test_float_exact(self, x):
        u = from_terms([(("a",), x)], epsilon=0.0)
        assert coefficient(loads(dumps(u)), ("a",)) == x

    def test_deterministic_order(self):
        a = from_terms([(("b",), 1.0), (("a",), 2.0)])
        b = from_terms([(("a",), 2.0), (("b",), 1.0)])
        assert dumps(a) == dumps(b) == '{"a": 2.0, "b": 1.0}'


def test_hash_consistent_with_eq():
    a = from_terms([(("a", "b"), 1.0)])
    b = attach(zero(), "a", PTVector(children={"b": PTVector(1.0)}))
    assert a == b and hash(a) == hash(b)
