import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lallop.errors import EmptyWord, InvalidCharacter, ParseError, UnboundName
from lallop.words import (Word, abelianize, cyclically_reduce, evaluate, in_commutator_subgroup,
                          minimal_period, parse_word, primitive_root, render)

from helpers import V_WORD

letters = st.lists(st.sampled_from([1, -1, 2, -2, 3, -3]), max_size=40)


def words(k=3):
    return letters.map(lambda xs: Word(tuple(xs), k))


def test_parse_examples():
    assert len(parse_word("abAB", 2)) == 4
    assert parse_word("aA", 2) == Word.identity()
    assert len(parse_word(V_WORD, 2)) == 16


def test_parse_rejects_out_of_alphabet():
    with pytest.raises(InvalidCharacter):
        parse_word("abc", 2)
    with pytest.raises(InvalidCharacter):
        parse_word("ab1", 2)
    with pytest.raises(InvalidCharacter):
        parse_word("a-b", 2)


def test_render_identity_and_large_alphabet():
    assert render(Word.identity()) == "1"
    w = Word((27, -3), 30)
    assert render(w) == "g27G3"
    assert parse_word("g27G3", 30) == w


@given(words())
def test_round_trip(w):
    assert parse_word(render(w), 3) == w


@given(letters)
def test_reduction_is_confluent(xs):
    # cancel adjacent pairs in a random order and compare with the stack reduction
    rng = random.Random(len(xs))
    seq = list(xs)
    while True:
        spots = [i for i in range(len(seq) - 1) if seq[i] == -seq[i + 1]]
        if not spots:
            break
        i = rng.choice(spots)
        del seq[i:i + 2]
    assert Word(tuple(xs), 3).letters == tuple(seq)


@given(words())
def test_reduction_idempotent(w):
    assert Word(w.letters, 3) == w


def test_cyclically_reduce_examples():
    assert cyclically_reduce(parse_word("abAB")) == (parse_word("abAB"), Word.identity())
    core, conj = cyclically_reduce(parse_word("AabABa"))
    assert render(core) == "bABa" and not conj


def test_cyclically_reduce_conjugated_commutator():
    # "BabABb" freely reduces to "BabA"; the cyclic core of that word is itself
    w = parse_word("BabABb")
    core, conj = cyclically_reduce(w)
    assert core.is_cyclically_reduced()
    assert core.conjugate_by(conj) == w
    # the conjugated commutator B.abAB.b itself splits as stated
    w2 = parse_word("abAB").conjugate_by(parse_word("B"))
    core2, conj2 = cyclically_reduce(w2)
    assert core2.conjugate_by(conj2) == w2 and core2.is_cyclically_reduced()


@given(words())
def test_cyclically_reduce_postcondition(w):
    core, conj = cyclically_reduce(w)
    assert core.is_cyclically_reduced()
    assert core.conjugate_by(conj) == w


def test_primitive_root_examples():
    for text, root, m in [("abab", "ab", 2), ("abAB", "abAB", 1), ("ababab", "ab", 3)]:
        dec = primitive_root(parse_word(text))
        assert render(dec.root) == root and dec.exponent == m
    with pytest.raises(EmptyWord):
        primitive_root(Word.identity())


@given(words())
def test_primitive_root_reassembles(w):
    if not w:
        return
    dec = primitive_root(w)
    assert dec.reassemble() == w
    root = dec.root.letters
    if len(root) <= 32:
        # no non-trivial rotation of the root equals the root
        assert all(root[i:] + root[:i] != root for i in range(1, len(root)))


def test_minimal_period():
    assert minimal_period((1, 2, 1, 2)) == 2
    assert minimal_period((1, 2, 1)) == 3
    assert minimal_period(()) == 0


def test_abelianize_examples():
    assert abelianize(parse_word("abAB")) == (0, 0)
    assert abelianize(parse_word("ab")) == (1, 1)
    assert abelianize(parse_word(V_WORD)) == (0, 0)
    assert in_commutator_subgroup(parse_word(V_WORD))


@given(words(), words())
def test_abelianize_is_homomorphism(u, v):
    assert abelianize(u * v) == tuple(a + b for a, b in zip(abelianize(u), abelianize(v)))


def test_evaluate_examples():
    assert render(evaluate("[a,b]", alphabet_size=2)) == "abAB"
    assert render(evaluate("(ab)^3", alphabet_size=2)) == "ababab"
    assert render(evaluate("a^b", alphabet_size=2)) == "baB"
    assert render(evaluate("(ab)^-1", alphabet_size=2)) == "BA"
    assert render(evaluate("(ab)'", alphabet_size=2)) == "BA"
    assert render(evaluate("x*x^-1", {"x": parse_word("ab")})) == "1"


def test_evaluate_errors():
    with pytest.raises(ParseError):
        evaluate("[a,b", alphabet_size=2)
    with pytest.raises(ParseError):
        evaluate("a^-", alphabet_size=2)
    with pytest.raises(UnboundName):
        evaluate("foo1", alphabet_size=2)
    with pytest.raises(UnboundName):
        evaluate("t", alphabet_size=2)


def test_counterexample_identity():
    b = {name: parse_word(text) for name, text in {
        "v": V_WORD, "t1": "baBAAAA", "t2": "baBaabABB", "d": "baBaabABaBaa",
        "g": "AAbbaBAAAAAbaBAA", "h": "bABaaaaaabABBaa"}.items()}
    lhs = evaluate("v^-1 * (t1 v t1^-1) * (t2 v t2^-1)", b)
    rhs = evaluate("d [g,h] d^-1", b)
    assert lhs == rhs
    assert lhs.letters == rhs.letters
