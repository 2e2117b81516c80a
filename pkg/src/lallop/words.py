"""Free-group words over a finite alphabet.

Letters are non-zero integers: ``g`` stands for the generator number ``g``
(1-based) and ``-g`` for its inverse.  Words are always stored freely
reduced.  The ASCII convention renders generator 1 as ``a`` and its inverse
as ``A``; alphabets with more than 26 generators render as ``g27``/``G27``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import EmptyWord, InvalidCharacter, ParseError, UnboundName

ASCII_LIMIT = 26
_TOKEN = re.compile(r"[gG]\d+|[a-zA-Z]")


def _reduce_letters(letters: Iterable[int]) -> tuple[int, ...]:
    stack: list[int] = []
    for x in letters:
        if stack and stack[-1] == -x:
            stack.pop()
        else:
            stack.append(x)
    return tuple(stack)


@dataclass(frozen=True)
class Word:
    """A freely reduced element of F(S), |S| = ``alphabet_size``."""

    letters: tuple[int, ...]
    alphabet_size: int = field(default=2, compare=False)

    def __post_init__(self):
        letters = tuple(int(x) for x in self.letters)
        for x in letters:
            if x == 0 or abs(x) > self.alphabet_size:
                raise InvalidCharacter(f"letter {x} outside alphabet of size {self.alphabet_size}")
        object.__setattr__(self, "letters", _reduce_letters(letters))

    @classmethod
    def identity(cls, alphabet_size: int = 2) -> Word:
        return cls((), alphabet_size)

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __getitem__(self, item):
        return self.letters[item]

    def __bool__(self) -> bool:
        return bool(self.letters)

    def __mul__(self, other: Word) -> Word:
        return Word(self.letters + other.letters, max(self.alphabet_size, other.alphabet_size))

    def inverse(self) -> Word:
        return Word(tuple(-x for x in reversed(self.letters)), self.alphabet_size)

    def __invert__(self) -> Word:
        return self.inverse()

    def __pow__(self, n: int) -> Word:
        if n < 0:
            return self.inverse() ** (-n)
        return Word(self.letters * n, self.alphabet_size)

    def conjugate_by(self, h: Word) -> Word:
        """Return ``h * self * h^-1``."""
        return h * self * h.inverse()

    def rotate(self, k: int) -> tuple[int, ...]:
        """Letters of the cyclic rotation starting at index ``k`` (not re-reduced)."""
        if not self.letters:
            return ()
        k %= len(self.letters)
        return self.letters[k:] + self.letters[:k]

    def is_cyclically_reduced(self) -> bool:
        return len(self.letters) < 2 or self.letters[0] != -self.letters[-1]

    def support(self) -> frozenset[int]:
        return frozenset(abs(x) for x in self.letters)

    def __str__(self) -> str:
        return render(self)

    def __repr__(self) -> str:
        return f"Word({render(self)!r})"


def letter_text(x: int, alphabet_size: int = 2) -> str:
    if alphabet_size <= ASCII_LIMIT:
        c = chr(ord("a") + abs(x) - 1)
        return c if x > 0 else c.upper()
    return f"g{x}" if x > 0 else f"G{-x}"


def render(w: Word) -> str:
    if not w.letters:
        return "1"
    return "".join(letter_text(x, w.alphabet_size) for x in w.letters)


def parse_letters(text: str, alphabet_size: int) -> list[int]:
    """Tokenize ``text`` into raw (unreduced) letters."""
    s = "".join(text.split())
    if s in ("", "1"):
        return []
    letters = []
    pos = 0
    for m in _TOKEN.finditer(s):
        if m.start() != pos:
            raise InvalidCharacter(f"unexpected character {s[pos]!r} at position {pos}")
        tok = m.group()
        if len(tok) > 1:
            g = int(tok[1:])
            x = g if tok[0] == "g" else -g
        else:
            g = ord(tok.lower()) - ord("a") + 1
            x = g if tok.islower() else -g
        if g < 1 or g > alphabet_size:
            raise InvalidCharacter(f"{tok!r} is outside the alphabet of size {alphabet_size}")
        letters.append(x)
        pos = m.end()
    if pos != len(s):
        raise InvalidCharacter(f"unexpected character {s[pos]!r} at position {pos}")
    return letters


def parse_word(text: str, alphabet_size: int = 2) -> Word:
    """Parse ASCII text; lowercase letters are generators, uppercase their inverses."""
    if alphabet_size < 1:
        raise InvalidCharacter("alphabet size must be positive")
    return Word(tuple(parse_letters(text, alphabet_size)), alphabet_size)


def cyclically_reduce(w: Word) -> tuple[Word, Word]:
    """Split ``w`` as ``conjugator * core * conjugator^-1`` with ``core`` cyclically reduced."""
    letters = w.letters
    i, j = 0, len(letters) - 1
    while i < j and letters[i] == -letters[j]:
        i += 1
        j -= 1
    core = Word(letters[i:j + 1], w.alphabet_size)
    conjugator = Word(letters[:i], w.alphabet_size)
    return core, conjugator


def minimal_period(seq: Sequence[int]) -> int:
    """Smallest p dividing len(seq) such that seq is a power of seq[:p]."""
    n = len(seq)
    if n == 0:
        return 0
    fail = [0] * n
    k = 0
    for i in range(1, n):
        while k and seq[i] != seq[k]:
            k = fail[k - 1]
        if seq[i] == seq[k]:
            k += 1
        fail[i] = k
    p = n - fail[-1]
    return p if n % p == 0 else n


@dataclass(frozen=True)
class RootDecomposition:
    root: Word
    exponent: int
    conjugator: Word

    def reassemble(self) -> Word:
        return (self.root ** self.exponent).conjugate_by(self.conjugator)


def primitive_root(w: Word) -> RootDecomposition:
    if not w:
        raise EmptyWord("the identity has no primitive root")
    core, conj = cyclically_reduce(w)
    p = minimal_period(core.letters)
    return RootDecomposition(Word(core.letters[:p], w.alphabet_size), len(core) // p, conj)


def abelianize(w: Word) -> tuple[int, ...]:
    vec = [0] * w.alphabet_size
    for x in w.letters:
        vec[abs(x) - 1] += 1 if x > 0 else -1
    return tuple(vec)


def in_commutator_subgroup(w: Word) -> bool:
    return not any(abelianize(w))


def commutator(g: Word, h: Word) -> Word:
    return g * h * g.inverse() * h.inverse()


# --- expression evaluation -------------------------------------------------

_EXPR_TOKEN = re.compile(r"\s*(?:(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<int>\d+)|(?P<op>[()\[\],*^'\-]))")


class _Parser:
    """Recursive-descent evaluator.

    product  := postfix (('*')? postfix)*
    postfix  := primary ( '^' exponent | "'" )*
    exponent := ['-'] INT | primary
    primary  := NAME | '(' product ')' | '[' product ',' product ']'
    """

    def __init__(self, text: str, bindings: Mapping[str, Word], alphabet_size: int):
        self.tokens = self._tokenize(text)
        self.pos = 0
        self.bindings = bindings
        self.alphabet_size = alphabet_size

    @staticmethod
    def _tokenize(text):
        tokens = []
        pos = 0
        text = text.rstrip()
        while pos < len(text):
            m = _EXPR_TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise ParseError(f"unexpected character {text[pos]!r} at position {pos}")
            kind = m.lastgroup
            tokens.append((kind, m.group(kind)))
            pos = m.end()
        return tokens

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def take(self, value=None):
        tok = self.peek()
        if tok[0] is None or (value is not None and tok[1] != value):
            raise ParseError(f"expected {value or 'token'}, found {tok[1]!r}")
        self.pos += 1
        return tok

    def parse(self) -> Word:
        if not self.tokens:
            return Word.identity(self.alphabet_size)
        w = self.product()
        if self.pos != len(self.tokens):
            raise ParseError(f"trailing input at token {self.peek()[1]!r}")
        return w

    def _starts_primary(self):
        kind, val = self.peek()
        return kind == "name" or val in ("(", "[") or (kind == "int" and val == "1")

    def product(self) -> Word:
        w = self.postfix()
        while True:
            if self.peek()[1] == "*":
                self.take("*")
                w = w * self.postfix()
            elif self._starts_primary():
                w = w * self.postfix()
            else:
                return w

    def postfix(self) -> Word:
        w = self.primary()
        while True:
            val = self.peek()[1]
            if val == "'":
                self.take()
                w = w.inverse()
            elif val == "^":
                self.take()
                kind, nxt = self.peek()
                if nxt == "-":
                    self.take()
                    if self.peek()[0] != "int":
                        raise ParseError("expected integer exponent after '^-'")
                    w = w ** -int(self.take()[1])
                elif kind == "int":
                    w = w ** int(self.take()[1])
                else:
                    w = w.conjugate_by(self.primary())
            else:
                return w

    def primary(self) -> Word:
        kind, val = self.peek()
        if val == "(":
            self.take()
            w = self.product()
            self.take(")")
            return w
        if val == "[":
            self.take()
            g = self.product()
            self.take(",")
            h = self.product()
            self.take("]")
            return commutator(g, h)
        if kind == "int" and val == "1":
            self.take()
            return Word.identity(self.alphabet_size)
        if kind == "name":
            self.take()
            if val in self.bindings:
                return self.bindings[val]
            try:
                return parse_word(val, self.alphabet_size)
            except InvalidCharacter:
                raise UnboundName(f"{val!r} is neither bound nor a word over the alphabet") from None
        raise ParseError(f"unexpected token {val!r}")


def evaluate(expr: str, bindings: Mapping[str, Word] | None = None, alphabet_size: int | None = None) -> Word:
    """Evaluate a group expression; ``g^h`` is ``h g h^-1`` and ``[g,h]`` is ``g h g^-1 h^-1``."""
    bindings = dict(bindings or {})
    if alphabet_size is None:
        alphabet_size = max([ASCII_LIMIT] + [w.alphabet_size for w in bindings.values()])
    return _Parser(expr, bindings, alphabet_size).parse()
