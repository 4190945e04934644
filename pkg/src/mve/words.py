"""Words and automorphisms of finite-rank free groups.

A word over the free group F_n is a tuple of nonzero integers: the
letter ``i`` with ``1 <= i <= n`` is the i-th basis element, ``-i`` its
inverse, and the empty tuple is the identity.  All public functions
return freely reduced words; reduction is a single stack pass.

Automorphisms are stored as the images of the basis together with the
images under the inverse, and the constructor checks that the two
tables actually compose to the identity.  This makes negative powers
and twisted multiplication cheap and keeps invalid data out early.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import IndexOutOfRange, InvalidInverse, RankMismatch, TrivialInput

Word = tuple[int, ...]

_ALPHABET = "abcdefghijklmnopqrstuvwxyz"
_LETTER_INDEX = {ch: i + 1 for i, ch in enumerate(_ALPHABET)}


def _check_letters(word: Word, rank: int) -> None:
    for x in word:
        if x == 0 or abs(x) > rank:
            raise IndexOutOfRange(f"letter {x} out of range for rank {rank}")


def _extend_cancel(stack: list[int], word: Word) -> None:
    for x in word:
        if stack and stack[-1] == -x:
            stack.pop()
        else:
            stack.append(x)


def free_reduce(word: Word) -> Word:
    """Freely reduce a word, cancelling adjacent inverse pairs."""
    stack: list[int] = []
    for x in word:
        if x == 0:
            raise IndexOutOfRange("letter index 0 is not a generator")
        if stack and stack[-1] == -x:
            stack.pop()
        else:
            stack.append(x)
    return tuple(stack)


def invert(word: Word) -> Word:
    return tuple(-x for x in reversed(word))


def concat(*words: Word) -> Word:
    """Product of already reduced words, reduced again at the seams."""
    stack: list[int] = []
    for w in words:
        _extend_cancel(stack, w)
    return tuple(stack)


def parse_word(text: str, rank: int | None = None) -> Word:
    """Parse a word from tokens like ``"a b- a"``.

    Each token is a lowercase letter optionally followed by ``-`` for
    the inverse.  Whitespace separates letters; the empty string is the
    identity.  The result is freely reduced.
    """
    letters: list[int] = []
    for token in text.split():
        neg = token.endswith("-")
        if neg:
            token = token[:-1]
        if len(token) != 1 or token not in _LETTER_INDEX:
            raise IndexOutOfRange(f"bad letter token {token!r}")
        idx = _LETTER_INDEX[token]
        letters.append(-idx if neg else idx)
    word = free_reduce(tuple(letters))
    if rank is not None:
        _check_letters(word, rank)
    return word


def format_word(word: Word) -> str:
    parts: list[str] = []
    for x in word:
        idx = abs(x)
        if idx == 0 or idx > len(_ALPHABET):
            raise IndexOutOfRange(f"letter {x} has no single-character name")
        parts.append(_ALPHABET[idx - 1] + ("-" if x < 0 else ""))
    return " ".join(parts)


def _apply_table(table: tuple[Word, ...], word: Word) -> Word:
    """Image of ``word`` under the basis-image table, freely reduced."""
    stack: list[int] = []
    for x in word:
        image = table[x - 1] if x > 0 else invert(table[-x - 1])
        _extend_cancel(stack, image)
    return tuple(stack)


@dataclass(frozen=True)
class Automorphism:
    """Automorphism of F_rank given by basis images both ways.

    ``images[i]`` is the image of generator ``i+1`` and
    ``inverse_images[i]`` its image under the inverse automorphism.
    Construction freely reduces all words, checks letter ranges, and
    verifies that the two tables are mutually inverse.
    """

    rank: int
    images: tuple[Word, ...]
    inverse_images: tuple[Word, ...]

    def __post_init__(self) -> None:
        if self.rank < 0:
            raise RankMismatch(f"rank must be nonnegative, got {self.rank}")
        if len(self.images) != self.rank or len(self.inverse_images) != self.rank:
            raise RankMismatch(
                f"expected {self.rank} images, got "
                f"{len(self.images)} and {len(self.inverse_images)}"
            )
        images = tuple(free_reduce(w) for w in self.images)
        inverse_images = tuple(free_reduce(w) for w in self.inverse_images)
        for w in images + inverse_images:
            _check_letters(w, self.rank)
        object.__setattr__(self, "images", images)
        object.__setattr__(self, "inverse_images", inverse_images)
        for i in range(self.rank):
            if _apply_table(images, inverse_images[i]) != (i + 1,):
                raise InvalidInverse(f"tables do not invert each other at generator {i + 1}")
            if _apply_table(inverse_images, images[i]) != (i + 1,):
                raise InvalidInverse(f"tables do not invert each other at generator {i + 1}")

    def apply(self, word: Word) -> Word:
        _check_letters(word, self.rank)
        return _apply_table(self.images, word)

    def apply_inverse(self, word: Word) -> Word:
        _check_letters(word, self.rank)
        return _apply_table(self.inverse_images, word)

    def inverse(self) -> "Automorphism":
        return Automorphism(self.rank, self.inverse_images, self.images)

    def compose(self, inner: "Automorphism") -> "Automorphism":
        """Composition self after inner."""
        if inner.rank != self.rank:
            raise RankMismatch(f"cannot compose ranks {self.rank} and {inner.rank}")
        images = tuple(_apply_table(self.images, w) for w in inner.images)
        inverse_images = tuple(_apply_table(inner.inverse_images, w) for w in self.inverse_images)
        return Automorphism(self.rank, images, inverse_images)

    def power(self, k: int) -> "Automorphism":
        if k == 0:
            return identity_automorphism(self.rank)
        fwd, bwd = (self.images, self.inverse_images) if k > 0 else (self.inverse_images, self.images)
        images = fwd
        inverse_images = bwd
        for _ in range(abs(k) - 1):
            images = tuple(_apply_table(fwd, w) for w in images)
            inverse_images = tuple(_apply_table(bwd, w) for w in inverse_images)
        return Automorphism(self.rank, images, inverse_images)

    def conjugated_by(self, g: Word) -> "Automorphism":
        """The automorphism x |-> g * self(x) * g^-1."""
        g = free_reduce(g)
        _check_letters(g, self.rank)
        g_inv = invert(g)
        images = tuple(concat(g, w, g_inv) for w in self.images)
        inverse_images = tuple(
            _apply_table(self.inverse_images, concat(g_inv, (i + 1,), g))
            for i in range(self.rank)
        )
        return Automorphism(self.rank, images, inverse_images)


def identity_automorphism(rank: int) -> Automorphism:
    gens = tuple((i + 1,) for i in range(rank))
    return Automorphism(rank, gens, gens)


def automorphism_to_json(aut: Automorphism) -> dict:
    return {
        "rank": aut.rank,
        "images": [format_word(w) for w in aut.images],
        "inverse_images": [format_word(w) for w in aut.inverse_images],
    }


def automorphism_from_json(obj: dict) -> Automorphism:
    rank = int(obj["rank"])
    images = tuple(parse_word(s, rank) for s in obj["images"])
    inverse_images = tuple(parse_word(s, rank) for s in obj["inverse_images"])
    return Automorphism(rank, images, inverse_images)


BOUNDED = "Bounded"
LINEAR = "Linear"
POLYNOMIAL_OR_UNKNOWN = "PolynomialOrUnknown"
EXPONENTIAL_HEURISTIC = "ExponentialHeuristic"

#: Smallest consecutive length ratio accepted as exponential evidence.
EXPONENTIAL_RATIO_FLOOR = 1.05


@dataclass(frozen=True)
class GrowthProfile:
    classification: str
    lengths: tuple[int, ...]
    witness_ratio: float


def growth_profile(aut: Automorphism, window: int = 12) -> GrowthProfile:
    """Classify the growth of max basis-image length under iteration.

    ``lengths[k-1]`` is ``max_i |aut^k(x_i)|`` for ``k = 1..window``.
    The classification is a finite-window heuristic: flat profiles are
    Bounded, profiles with vanishing second differences over the back
    half are Linear, profiles whose last three ratios all exceed
    ``EXPONENTIAL_RATIO_FLOOR`` are ExponentialHeuristic, and anything
    else is PolynomialOrUnknown.  The witness ratio is the smallest of
    the last three consecutive ratios, whatever the classification.
    """
    if window < 4:
        raise ValueError(f"window must be at least 4, got {window}")
    if aut.rank == 0:
        raise TrivialInput("rank-0 automorphism has no growth profile")
    lengths: list[int] = []
    current = aut.images
    lengths.append(max(len(w) for w in current))
    for _ in range(window - 1):
        current = tuple(_apply_table(aut.images, w) for w in current)
        lengths.append(max(len(w) for w in current))

    witness_ratio = min(lengths[k] / lengths[k - 1] for k in range(window - 3, window))

    if lengths[-1] == lengths[0]:
        classification = BOUNDED
    else:
        back_half = range((window + 1) // 2, window)
        linear = all(
            lengths[k] - 2 * lengths[k - 1] + lengths[k - 2] == 0 for k in back_half
        )
        if linear:
            classification = LINEAR
        elif witness_ratio > EXPONENTIAL_RATIO_FLOOR:
            classification = EXPONENTIAL_HEURISTIC
        else:
            classification = POLYNOMIAL_OR_UNKNOWN
    return GrowthProfile(classification, tuple(lengths), witness_ratio)
