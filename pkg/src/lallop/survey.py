"""Random elements of the commutator subgroup and small-cancellation statistics.

Sampling draws a uniform reduced word of length n (first letter uniform over
the 2k letters, every later letter uniform over the 2k-1 letters that do not
cancel) and rejects until the abelianization vanishes, which is exactly
uniform on reduced length-n words in F'.

Streams: the survey seed feeds ``numpy.random.SeedSequence(seed)``; the
length at position ``i`` of ``lengths`` draws from ``SeedSequence(seed,
spawn_key=(i,))`` with the PCG64 generator.  Rows therefore do not depend on
worker count or on which other lengths are requested before position i.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .cancellation import max_piece_length
from .errors import InputError, RejectionBudgetExceeded
from .words import Word, cyclically_reduce, minimal_period

CSV_COLUMNS = ("n", "k", "samples", "mean_piece", "max_piece", "frac_cprime_sqrt", "mean_lallop_stat", "seed")
RAW_COLUMNS = ("mean_piece_raw", "frac_cprime_sqrt_raw")
DEFAULT_MAX_ATTEMPTS = 100_000


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream,))))


def sample_reduced_word(n: int, k: int, rng: np.random.Generator) -> tuple:
    letters = []
    prev = 0
    for _ in range(n):
        if prev == 0:
            m = int(rng.integers(2 * k))
        else:
            m = int(rng.integers(2 * k - 1))
            # skip the slot of the inverse of the previous letter
            forbidden = _letter_index(-prev, k)
            if m >= forbidden:
                m += 1
        x = _index_letter(m, k)
        letters.append(x)
        prev = x
    return tuple(letters)


def _letter_index(x: int, k: int) -> int:
    return x - 1 if x > 0 else k - x - 1


def _index_letter(m: int, k: int) -> int:
    return m + 1 if m < k else -(m - k + 1)


def sample_commutator_word(n: int, k: int, rng: np.random.Generator,
                           max_attempts: int = DEFAULT_MAX_ATTEMPTS) -> Word:
    """Uniform reduced word of length ``n`` with zero abelianization."""
    if n < 2 or n % 2:
        raise InputError(f"length must be an even integer >= 2, got {n}")
    if k < 1:
        raise InputError("alphabet size must be positive")
    for _ in range(max_attempts):
        letters = sample_reduced_word(n, k, rng)
        exps = [0] * k
        for x in letters:
            exps[abs(x) - 1] += 1 if x > 0 else -1
        if not any(exps):
            return Word(letters, k)
    raise RejectionBudgetExceeded(f"no element of F' of length {n} over {k} generators after {max_attempts} draws")


def _piece_of_sequence(seq: tuple) -> int:
    """Longest common prefix of two position-distinct cyclic conjugates of seq or seq^-1."""
    n = len(seq)
    inv = tuple(-x for x in reversed(seq))
    convs = [seq[i:] + seq[:i] for i in range(n)] + [inv[i:] + inv[:i] for i in range(n)]
    convs.sort()
    best = 0
    for a, b in zip(convs, convs[1:]):
        k = 0
        while k < n and a[k] == b[k]:
            k += 1
        best = max(best, k)
    return best


def piece_length(w: Word) -> int:
    """Maximal piece of the cyclic reduction of ``w``.

    A proper power u^m has the position-distinct conjugate shifted by |u|,
    which shares a prefix of length |w| - |u|.
    """
    core, _ = cyclically_reduce(w)
    p = minimal_period(core.letters)
    if p != len(core):
        return len(core) - p
    return max_piece_length(core).max_piece_length


def raw_piece_length(w: Word) -> int:
    """Same statistic on the word itself, without cyclic reduction."""
    return _piece_of_sequence(w.letters)


def satisfies_sqrt_condition(piece: int, length: int, n: int) -> bool:
    """piece <= length / sqrt(n), decided exactly."""
    return piece * piece * n <= length * length


@dataclass
class SurveyConfig:
    alphabet_size: int = 2
    lengths: list = field(default_factory=lambda: [16, 24, 32])
    samples: int = 200
    seed: int = 42
    lallop_mode: Optional[str] = None
    lallop_budget: int = 200_000
    max_attempts: int = DEFAULT_MAX_ATTEMPTS
    workers: int = 1

    def validate(self):
        if self.alphabet_size < 1:
            raise InputError("alphabet size must be positive")
        for n in self.lengths:
            if n < 2 or n % 2:
                raise InputError(f"lengths must be even integers >= 2, got {n}")
        if self.samples < 1:
            raise InputError("samples must be positive")


@dataclass
class SurveyRow:
    n: int
    k: int
    samples: int
    mean_piece: float
    max_piece: int
    frac_cprime_sqrt: float
    mean_lallop_stat: Optional[float]
    seed: int
    mean_piece_raw: float = 0.0
    frac_cprime_sqrt_raw: float = 0.0
    failures: list = field(default_factory=list, repr=False)   # per-sample 0/1, for bootstrap

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("failures")
        return d


def _lallop_stat(w: Word, n: int, mode: str, budget: int) -> Optional[float]:
    from .core import lallop
    from .errors import ResourceLimit

    try:
        value = lallop(w, mode=mode, solver="float", budget=budget).value
    except ResourceLimit:
        return None
    return float(value) * math.log(n) / n


def survey_length(cfg: SurveyConfig, index: int) -> SurveyRow:
    n, k = cfg.lengths[index], cfg.alphabet_size
    rng = make_rng(cfg.seed, index)
    pieces, raw, fails, raw_ok, stats = [], [], [], 0, []
    for _ in range(cfg.samples):
        w = sample_commutator_word(n, k, rng, cfg.max_attempts)
        core, _ = cyclically_reduce(w)
        p = piece_length(w)
        pieces.append(p)
        fails.append(0 if satisfies_sqrt_condition(p, len(core), n) else 1)
        q = raw_piece_length(w)
        raw.append(q)
        raw_ok += satisfies_sqrt_condition(q, n, n)
        if cfg.lallop_mode:
            s = _lallop_stat(w, n, cfg.lallop_mode, cfg.lallop_budget)
            if s is not None:
                stats.append(s)
    m = cfg.samples
    return SurveyRow(n, k, m, sum(pieces) / m, max(pieces), 1 - sum(fails) / m,
                     (sum(stats) / len(stats)) if stats else None, cfg.seed,
                     sum(raw) / m, raw_ok / m, fails)


def run_survey(cfg: SurveyConfig) -> list:
    cfg.validate()
    idx = list(range(len(cfg.lengths)))
    if cfg.workers > 1 and len(idx) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(survey_length, [cfg] * len(idx), idx))
    else:
        rows = [survey_length(cfg, i) for i in idx]
    return rows


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


def rows_to_csv(rows: list, include_raw: bool = False) -> str:
    cols = CSV_COLUMNS + (RAW_COLUMNS if include_raw else ())
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for row in rows:
        d = row.as_dict()
        writer.writerow([_cell(d[c]) for c in cols])
    return buf.getvalue()


def write_csv(rows: list, path, include_raw: bool = False, append: bool = False):
    text = rows_to_csv(rows, include_raw)
    if append:
        try:
            with open(path) as fh:
                exists = bool(fh.readline())
        except FileNotFoundError:
            exists = False
        if exists:
            text = text.split("\n", 1)[1]
    with open(path, "a" if append else "w") as fh:
        fh.write(text)


def bootstrap_interval(failures: list, rng: np.random.Generator, reps: int = 2000, level: float = 0.95) -> tuple:
    """Percentile bootstrap interval for a failure fraction."""
    arr = np.asarray(failures, dtype=float)
    means = rng.choice(arr, size=(reps, len(arr)), replace=True).mean(axis=1)
    lo, hi = np.quantile(means, [(1 - level) / 2, 1 - (1 - level) / 2])
    return float(lo), float(hi)


def trend_is_nonincreasing(rows: list, seed: int = 0, allowed_inversions: int = 1) -> tuple:
    """Failure fractions non-increasing in n, up to ``allowed_inversions`` bootstrap-tolerated rises.

    A rise counts as tolerated when the two bootstrap intervals overlap.
    Returns (ok, details).
    """
    rng = make_rng(seed, 10_000)
    fails = [sum(r.failures) / r.samples for r in rows]
    ivals = [bootstrap_interval(r.failures, rng) for r in rows]
    inversions = []
    for a in range(len(rows) - 1):
        if fails[a + 1] > fails[a]:
            overlap = ivals[a + 1][0] <= ivals[a][1]
            inversions.append((rows[a].n, rows[a + 1].n, overlap))
    tolerated = [x for x in inversions if x[2]]
    ok = len(inversions) == len(tolerated) and len(tolerated) <= allowed_inversions
    return ok, {"failure_fractions": fails, "intervals": ivals, "inversions": inversions}
