import itertools
from collections import Counter
from fractions import Fraction

import pytest

from lallop import pods as P
from lallop.core import (build_program, enumerate_fragments, fragment_count, lallop, verify_certificate,
                         verify_weights)
from lallop.diagram import lallop_ratio, phi_of_diagram, validate_diagram
from lallop.errors import EmptyWord, NotInCommutatorSubgroup, NotRootFree, ResourceLimit
from lallop.words import Word, parse_word

from helpers import FIXTURES, R2, V_WORD, brute_rectangles

ABAB = parse_word("abAB")


@pytest.fixture(scope="module")
def r2_exact():
    return lallop(parse_word(R2))


@pytest.fixture(scope="module")
def r2_truncated():
    return lallop(parse_word(R2), mode="truncated")


def oracle_counts(r, mode="full"):
    """Fragment counts straight from the follows relation, by exhaustive search."""
    n = len(r)
    rects = [P.Rectangle(*t) for t in sorted(brute_rectangles(r))]
    fol = {(a, b) for a in rects for b in rects if P.follows(a, b, n)}     # a follows b
    cyc = lambda t: min(t[i:] + t[:i] for i in range(len(t)))              # noqa: E731
    bp = {cyc((a, b)) for a, b in itertools.product(rects, repeat=2) if (b, a) in fol and (a, b) in fol}
    tp = {cyc((a, b, c)) for a, b, c in itertools.product(rects, repeat=3)
          if (b, a) in fol and (c, b) in fol and (a, c) in fol}
    ot = sum(1 for p, x, t in itertools.product(rects, repeat=3) if (x, p) in fol and (t, x) in fol)
    dotp = len(rects) * len(fol) if mode == "full" else 0
    return {"BP": len(bp), "TP": len(tp), "OT1": ot, "OT2": ot, "DOTP": dotp}


def test_counts_of_commutator():
    prog = build_program(ABAB)
    assert len(prog.rects) == 8
    assert prog.counts() == oracle_counts(ABAB) == {"BP": 0, "TP": 0, "OT1": 8, "OT2": 8, "DOTP": 64}
    assert prog.num_columns == fragment_count(ABAB)


def test_counts_match_oracle_on_r2():
    r = parse_word(R2)
    for mode in ("full", "truncated"):
        frags = enumerate_fragments(r, mode)
        assert {k: len(v) for k, v in frags.items()} == oracle_counts(r, mode)


def test_truncated_drops_only_dotp():
    full = build_program(ABAB).counts()
    trunc = build_program(ABAB, mode="truncated").counts()
    assert trunc["DOTP"] == 0
    assert {k: v for k, v in trunc.items() if k != "DOTP"} == {k: v for k, v in full.items() if k != "DOTP"}


def test_program_shape():
    prog = build_program(ABAB)
    assert prog.K == 8 and prog.row_labels[0] == "slice"
    # homogeneous apart from the slice row; every column has at most six entries
    assert all(prog.rhs(i) == 0 for i in range(1, prog.num_rows))
    assert max(len(prog.column(j)) for j in range(prog.num_columns)) <= 6


def test_input_errors():
    with pytest.raises(NotInCommutatorSubgroup):
        build_program(parse_word("ab"))
    with pytest.raises(NotInCommutatorSubgroup):
        lallop(parse_word("ab"))
    with pytest.raises(NotRootFree):
        build_program(parse_word("abAB") ** 2)
    with pytest.raises(EmptyWord):
        lallop(Word.identity())
    with pytest.raises(ResourceLimit):
        build_program(parse_word(R2), budget=1000)


def test_commutator_value_and_powers():
    res = lallop(ABAB)
    assert res.value == 0 and res.verified and res.M == 1
    sq = lallop(parse_word("abABabAB"))
    assert sq.M == 2 and sq.verified
    # conjugates give the same program
    assert lallop(parse_word("BabABb")).value == res.value


def test_r2_exact_and_float(r2_exact):
    exact = r2_exact
    assert exact.value == 0 and exact.verified
    flt = lallop(parse_word(R2), solver="float")
    assert flt.value == 0 and abs(flt.float_value) <= 1e-6


def test_truncated_is_an_upper_bound():
    for w in ("abAB", R2):
        full = lallop(parse_word(w), solver="float")
        trunc = lallop(parse_word(w), mode="truncated")
        assert trunc.value >= full.value


def diagram_weights(prog, D):
    phi = {p: Fraction(m) for p, m in phi_of_diagram(D).items()}
    b = P.phi0(phi)
    _, nu, _ = P.functional_values(b, D.relator_root, D.power)
    index = {f: j for j, f in enumerate(prog.fragments)}
    return {index[f]: m / nu for f, m in b.items()}


@pytest.mark.parametrize("name", ["torus.json", "r2_genus1.json", "r3_genus2.json"])
def test_diagrams_are_feasible_points(name):
    D = validate_diagram(FIXTURES / name)
    prog = build_program(D.relator_root, D.power)
    weights = diagram_weights(prog, D)
    assert verify_weights(prog, weights, lallop_ratio(D))


def test_diagram_point_for_r4_and_solver_bound(r2_exact):
    D = validate_diagram(FIXTURES / "r4_genus3.json")
    prog = build_program(D.relator_root, D.power, mode="truncated")
    # the genus-3 diagram only has vertices of degree at most 4
    weights = diagram_weights(prog, D)
    assert verify_weights(prog, weights, lallop_ratio(D))
    assert r2_exact.value <= lallop_ratio(validate_diagram(FIXTURES / "r2_genus1.json"))


def test_determinism(r2_truncated):
    a = r2_truncated
    b = lallop(parse_word(R2), mode="truncated")
    assert a.value == b.value and a.certificate == b.certificate


def test_certificate_round_trip(r2_truncated):
    res = r2_truncated
    doc = res.certificate_document()
    assert doc["value"] == str(res.value)
    assert all(Fraction(f["weight"]) > 0 for f in doc["fragments"])
    assert verify_certificate(doc, parse_word(R2))
    bad = dict(doc, value="-1")
    assert not verify_certificate(bad, parse_word(R2))
    bumped = dict(doc, fragments=[dict(doc["fragments"][0], weight="7")] + doc["fragments"][1:])
    assert not verify_certificate(bumped, parse_word(R2))


def test_certificate_fragments_lie_in_A0(r2_truncated):
    res = r2_truncated
    ok, witness = P.check_membership(dict(res.certificate), "A0")
    assert ok, witness
    _, nu, _ = P.functional_values(res.certificate, res.root, res.M)
    assert nu == 1
    counts = Counter(f[0] for f in res.certificate)
    assert counts["DOTP"] == 0


def test_counterexample_word_is_nonpositive():
    # the truncated program is a restriction of the full one, so full <= truncated
    res = lallop(parse_word(V_WORD), mode="truncated", solver="float")
    assert res.verified and res.value <= 0
