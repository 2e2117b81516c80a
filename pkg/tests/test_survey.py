import csv
import io
from collections import Counter

import pytest
from scipy.stats import chisquare

from lallop.errors import InputError, RejectionBudgetExceeded
from lallop.survey import (CSV_COLUMNS, SurveyConfig, make_rng, piece_length, rows_to_csv, run_survey,
                           sample_commutator_word, sample_reduced_word, satisfies_sqrt_condition,
                           trend_is_nonincreasing, write_csv)
from lallop.words import parse_word


def reduced_words(n, k):
    """All reduced words of length n, by depth-first enumeration."""
    gens = [g for g in range(1, k + 1)] + [-g for g in range(1, k + 1)]
    out = []

    def grow(prefix):
        if len(prefix) == n:
            out.append(tuple(prefix))
            return
        for x in gens:
            if prefix and prefix[-1] == -x:
                continue
            prefix.append(x)
            grow(prefix)
            prefix.pop()

    grow([])
    return out


def balanced(w, k=2):
    return all(sum(1 if x == g else -1 if x == -g else 0 for x in w) == 0 for g in range(1, k + 1))


def test_empty_commutator_sphere_of_length_two():
    with pytest.raises(RejectionBudgetExceeded):
        sample_commutator_word(2, 1, make_rng(0), max_attempts=1000)
    # a reduced word of length two never has zero exponent sums, whatever k is
    with pytest.raises(RejectionBudgetExceeded):
        sample_commutator_word(2, 3, make_rng(0), max_attempts=1000)
    with pytest.raises(InputError):
        sample_commutator_word(5, 2, make_rng(0))


def test_determinism():
    a = sample_commutator_word(4, 2, make_rng(42))
    b = sample_commutator_word(4, 2, make_rng(42))
    assert a == b


def test_sample_invariants():
    rng = make_rng(1)
    for n in (4, 10, 30):
        for _ in range(50):
            w = sample_commutator_word(n, 2, rng)
            assert len(w) == n and balanced(w.letters)
            assert all(x != -y for x, y in zip(w.letters, w.letters[1:]))


def test_uniform_on_length_eight():
    support = [w for w in reduced_words(8, 2) if balanced(w)]
    rng = make_rng(7)
    seen = Counter(sample_commutator_word(8, 2, rng).letters for _ in range(10_000))
    assert set(seen) <= set(support)
    observed = [seen[w] for w in support]
    assert chisquare(observed).pvalue > 1e-3


@pytest.mark.parametrize("n", [2, 4, 6, 8, 10, 12])
def test_acceptance_rate_matches_enumeration(n):
    words = reduced_words(n, 2)
    exact = sum(map(balanced, words)) / len(words)
    rng = make_rng(n)
    trials = 20_000
    hits = sum(balanced(sample_reduced_word(n, 2, rng)) for _ in range(trials))
    sd = (exact * (1 - exact) / trials) ** 0.5
    assert abs(hits / trials - exact) <= 5 * sd


def test_piece_length_conventions():
    assert piece_length(parse_word("abAB")) == 1
    # cyclic reduction first: the conjugate of abAB has the same piece
    assert piece_length(parse_word("BabABb")) == 1
    # proper powers share a prefix of length |w| - |root| with a shifted copy
    assert piece_length(parse_word("abABabAB")) == 4
    assert satisfies_sqrt_condition(2, 16, 16) and not satisfies_sqrt_condition(5, 16, 16)


def test_csv_schema_and_rerun(tmp_path):
    cfg = SurveyConfig(alphabet_size=2, lengths=[8, 12], samples=30, seed=42)
    rows = run_survey(cfg)
    text = rows_to_csv(rows)
    assert text.splitlines()[0] == ",".join(CSV_COLUMNS) == \
        "n,k,samples,mean_piece,max_piece,frac_cprime_sqrt,mean_lallop_stat,seed"
    assert rows_to_csv(run_survey(cfg)) == text
    for row in csv.DictReader(io.StringIO(text)):
        assert 0 <= float(row["frac_cprime_sqrt"]) <= 1
        assert row["mean_lallop_stat"] == ""
    out = tmp_path / "stats.csv"
    write_csv(rows, out)
    write_csv(rows, out, append=True)
    lines = out.read_text().splitlines()
    assert len(lines) == 5 and lines[0] == ",".join(CSV_COLUMNS)
    assert "mean_piece_raw" in rows_to_csv(rows, include_raw=True).splitlines()[0]


def test_rows_do_not_depend_on_workers_or_other_lengths():
    base = run_survey(SurveyConfig(lengths=[8, 10], samples=20, seed=3))
    par = run_survey(SurveyConfig(lengths=[8, 10], samples=20, seed=3, workers=2))
    assert rows_to_csv(base) == rows_to_csv(par)
    first = run_survey(SurveyConfig(lengths=[8], samples=20, seed=3))
    assert rows_to_csv(first) == rows_to_csv(base[:1])


def test_config_validation():
    with pytest.raises(InputError):
        run_survey(SurveyConfig(lengths=[7]))
    with pytest.raises(InputError):
        run_survey(SurveyConfig(samples=0))


def test_lallop_statistic_column():
    rows = run_survey(SurveyConfig(lengths=[4], samples=3, seed=1, lallop_mode="truncated"))
    assert rows[0].mean_lallop_stat is not None


def test_trend_detector():
    class Row:
        def __init__(self, n, fails):
            self.n, self.failures, self.samples = n, fails, len(fails)

    down = [Row(16, [1] * 80 + [0] * 20), Row(24, [1] * 50 + [0] * 50), Row(32, [1] * 10 + [0] * 90)]
    assert trend_is_nonincreasing(down)[0]
    up = [Row(16, [1] * 10 + [0] * 90), Row(24, [1] * 90 + [0] * 10)]
    assert not trend_is_nonincreasing(up)[0]
