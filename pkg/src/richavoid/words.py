"""Alphabets, words, morphisms, and fixed-point streams over integer alphabets."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, NamedTuple, Optional

Word = tuple  # a word is a tuple of integer letters


class ParseError(ValueError):
    pass


class DomainError(ValueError):
    pass


class NotProlongableError(ValueError):
    pass


class SingularMatrixError(ValueError):
    pass


class Psi(NamedTuple):
    """The (length, letter sum) invariant of a word."""

    length: int
    total: int

    def __add__(self, other):
        return Psi(self.length + other[0], self.total + other[1])

    def __sub__(self, other):
        return Psi(self.length - other[0], self.total - other[1])


def psi(w) -> Psi:
    return Psi(len(w), sum(w))


def reversal(w: Word) -> Word:
    return tuple(reversed(w))


def is_palindrome(w: Word) -> bool:
    return w == tuple(reversed(w))


@dataclass(frozen=True)
class Alphabet:
    """A nonempty, strictly increasing tuple of integer letters."""

    letters: tuple

    def __post_init__(self):
        if not self.letters:
            raise ValueError("alphabet must be nonempty")
        if any(not isinstance(a, int) for a in self.letters):
            raise ValueError("alphabet letters must be integers")
        if any(x >= y for x, y in zip(self.letters, self.letters[1:])):
            raise ValueError("alphabet letters must be strictly increasing")

    def __contains__(self, letter) -> bool:
        return letter in self.letters

    def __iter__(self) -> Iterator[int]:
        return iter(self.letters)

    def __len__(self) -> int:
        return len(self.letters)

    def index(self, letter) -> int:
        try:
            return self.letters.index(letter)
        except ValueError:
            raise DomainError(f"letter {letter} not in alphabet {self.letters}")


@dataclass(frozen=True)
class AffineProfile:
    """Integers (a, b, c, d) with |f(x)| = a + b*x and sum(f(x)) = c + d*x."""

    a: int
    b: int
    c: int
    d: int

    @property
    def matrix(self):
        return ((self.a, self.b), (self.c, self.d))

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    def apply(self, v: Psi) -> Psi:
        return Psi(self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1])

    def inverse_apply(self, v) -> Optional[Psi]:
        """Exact M^-1 * v via the adjugate; None unless the result is integral."""
        det = self.det
        if det == 0:
            raise SingularMatrixError("affine matrix is singular")
        x = self.d * v[0] - self.b * v[1]
        y = -self.c * v[0] + self.a * v[1]
        if x % det or y % det:
            return None
        return Psi(x // det, y // det)


def matmul2(m, n):
    return (
        (m[0][0] * n[0][0] + m[0][1] * n[1][0], m[0][0] * n[0][1] + m[0][1] * n[1][1]),
        (m[1][0] * n[0][0] + m[1][1] * n[1][0], m[1][0] * n[0][1] + m[1][1] * n[1][1]),
    )


def eigenvalues_outside_unit_circle(m) -> bool:
    """Exact test that both eigenvalues of a 2x2 integer matrix satisfy |L| > 1.

    Works on the reciprocal polynomial q(u) = det*u^2 - tr*u + 1, whose roots are
    the reciprocals of the eigenvalues; the Jury conditions for q to have both
    roots strictly inside the unit disk are sign conditions on integers, so no
    floating point is involved.
    """
    if len(m) != 2 or any(len(row) != 2 for row in m):
        raise ValueError("eigenvalue test is only defined for 2x2 matrices")
    (a, b), (c, d) = m
    det = a * d - b * c
    if det == 0:
        raise SingularMatrixError("matrix is singular")
    tr = a + d
    s = 1 if det > 0 else -1
    return abs(det) > 1 and s * (det - tr + 1) > 0 and s * (det + tr + 1) > 0


class Morphism:
    """A nonerasing morphism between free monoids over integer alphabets."""

    def __init__(self, images: dict, codomain: Optional[Alphabet] = None):
        if not images:
            raise ValueError("morphism needs at least one rule")
        self.domain = Alphabet(tuple(sorted(images)))
        self.images = {a: tuple(images[a]) for a in self.domain}
        for a, img in self.images.items():
            if len(img) == 0:
                raise ValueError(f"image of {a} is empty; morphisms must be nonerasing")
        seen = sorted({c for img in self.images.values() for c in img})
        if codomain is None:
            codomain = Alphabet(tuple(seen))
        else:
            bad = [c for c in seen if c not in codomain]
            if bad:
                raise DomainError(f"image letters {bad} outside codomain {codomain.letters}")
        self.codomain = codomain

    def __eq__(self, other):
        return isinstance(other, Morphism) and self.images == other.images

    def __hash__(self):
        return hash(tuple(sorted(self.images.items())))

    def __repr__(self):
        return f"Morphism({self.format()!r})"

    def __call__(self, w: Word) -> Word:
        return self.apply(w)

    def apply(self, w: Word) -> Word:
        out = []
        images = self.images
        for a in w:
            img = images.get(a)
            if img is None:
                raise DomainError(f"letter {a} not in morphism domain {self.domain.letters}")
            out.extend(img)
        return tuple(out)

    def power_apply(self, n: int, w: Word) -> Word:
        if n < 0:
            raise ValueError("power must be nonnegative")
        self._require_endomorphism()
        for _ in range(n):
            w = self.apply(w)
        return tuple(w)

    def _require_endomorphism(self):
        bad = [c for c in self.codomain if c not in self.domain]
        if bad:
            raise DomainError(f"not an endomorphism: codomain letters {bad} lack images")

    def is_prolongable(self, a) -> bool:
        img = self.images.get(a)
        if img is None:
            raise DomainError(f"letter {a} not in morphism domain {self.domain.letters}")
        # Nonerasing morphisms never collapse the tail to the empty word, so
        # prolongability reduces to the first-letter and length conditions.
        return img[0] == a and len(img) >= 2

    def is_strictly_growing(self) -> bool:
        return all(len(img) >= 2 for img in self.images.values())

    def affine_profile(self) -> Optional[AffineProfile]:
        """The unique integer (a, b, c, d) fitting all images, or None.

        A one-letter domain is underdetermined; the slope-zero solution is used.
        """
        xs = self.domain.letters
        lens = [len(self.images[x]) for x in xs]
        sums = [sum(self.images[x]) for x in xs]
        if len(xs) == 1:
            return AffineProfile(lens[0], 0, sums[0], 0)

        def fit(ys):
            slope = Fraction(ys[1] - ys[0], xs[1] - xs[0])
            inter = ys[0] - slope * xs[0]
            if slope.denominator != 1 or inter.denominator != 1:
                return None
            slope, inter = int(slope), int(inter)
            if any(inter + slope * x != y for x, y in zip(xs, ys)):
                return None
            return inter, slope

        fit_len = fit(lens)
        fit_sum = fit(sums)
        if fit_len is None or fit_sum is None:
            return None
        return AffineProfile(fit_len[0], fit_len[1], fit_sum[0], fit_sum[1])

    def incidence_matrix(self):
        """Entry (i, j) counts occurrences of letter x_i in the image of x_j."""
        self._require_endomorphism()
        letters = self.domain.letters
        return [
            [self.images[col].count(row) for col in letters]
            for row in letters
        ]

    def compose(self, g: "Morphism") -> "Morphism":
        """(self . g)(x) = self(g(x))."""
        bad = [c for c in g.codomain if c not in self.domain]
        if bad:
            raise DomainError(f"cannot compose: letters {bad} have no image under the outer morphism")
        return Morphism({a: self.apply(g.images[a]) for a in g.domain}, codomain=self.codomain)

    def fixed_point(self, seed) -> "FixedPointStream":
        return FixedPointStream(self, seed)

    @classmethod
    def parse(cls, text: str) -> "Morphism":
        """Parse rules in the ``0->00001 1->01101`` format."""
        images = {}
        tokens = text.split()
        if not tokens:
            raise ParseError("empty morphism specification")
        for token in tokens:
            lhs, sep, rhs = token.partition("->")
            if not sep:
                raise ParseError(f"rule {token!r} lacks '->'")
            try:
                letter = int(lhs)
            except ValueError:
                raise ParseError(f"rule {token!r} has a non-integer left-hand side")
            if letter in images:
                raise ParseError(f"duplicate rule for letter {letter}")
            images[letter] = parse_word(rhs)
            if not images[letter]:
                raise ParseError(f"rule {token!r} has an empty image")
        return cls(images)

    def format(self) -> str:
        """Canonical text form; parses back to an equal morphism."""
        return " ".join(f"{a}->{format_word(img)}" for a, img in sorted(self.images.items()))


def parse_word(text: str) -> Word:
    """Parse a compact digit string or a bracketed ``[0,3,-1]`` list."""
    text = text.strip()
    if text == "" or text == "[]":
        return ()
    if text.startswith("["):
        if not text.endswith("]"):
            raise ParseError(f"unterminated word literal {text!r}")
        try:
            return tuple(int(part) for part in text[1:-1].split(","))
        except ValueError:
            raise ParseError(f"bad word literal {text!r}")
    if not text.isdigit():
        raise ParseError(f"bad word literal {text!r}")
    return tuple(int(ch) for ch in text)


def format_word(w: Word) -> str:
    if all(0 <= a <= 9 for a in w):
        return "".join(str(a) for a in w)
    return "[" + ",".join(str(a) for a in w) + "]"


class FixedPointStream:
    """Growable prefix of the fixed point h^omega(seed) of a prolongable morphism.

    The buffer is extended by mapping letters of the buffer itself through the
    morphism, which stays ahead of the read position because h(seed) starts
    with seed and has length at least 2.
    """

    def __init__(self, morphism: Morphism, seed):
        morphism._require_endomorphism()
        if not morphism.is_prolongable(seed):
            raise NotProlongableError(f"morphism is not prolongable on {seed}")
        self.morphism = morphism
        self.seed = seed
        self._buffer = list(morphism.images[seed])
        self._pos = 1

    def prefix(self, n: int) -> Word:
        if n < 0:
            raise ValueError("prefix length must be nonnegative")
        buf = self._buffer
        images = self.morphism.images
        while len(buf) < n:
            buf.extend(images[buf[self._pos]])
            self._pos += 1
        return tuple(buf[:n])


# The paper's morphisms: beta over {0,1} and gamma over {0,1,2}; their fixed
# points are the binary word B and the ternary word Gamma.
BETA = Morphism({0: (0, 0, 0, 0, 1), 1: (0, 1, 1, 0, 1)})
GAMMA = Morphism({0: (2,), 1: (1, 0, 1), 2: (1, 0, 0, 0, 1)})
DELTA = GAMMA.compose(GAMMA)
