"""Words over a finite generating set.

A word is a tuple of nonzero ints: generator ``i`` (0-based) is the letter
``i + 1`` and its inverse is ``-(i + 1)``.  The empty tuple is the identity.
"""
from __future__ import annotations

import re
from typing import Iterable, Sequence

Word = tuple[int, ...]

IDENTITY: Word = ()


def letter_key(letter: int) -> int:
    # a < a^-1 < b < b^-1 < ...
    return 2 * (abs(letter) - 1) + (1 if letter < 0 else 0)


def shortlex_key(word: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    return len(word), tuple(letter_key(x) for x in word)


def letters(rank: int) -> list[int]:
    """All 2*rank letters in shortlex order."""
    out = []
    for g in range(1, rank + 1):
        out.extend((g, -g))
    return out


def free_reduce(word: Iterable[int]) -> Word:
    stack: list[int] = []
    for x in word:
        if stack and stack[-1] == -x:
            stack.pop()
        else:
            stack.append(x)
    return tuple(stack)


def inverse(word: Sequence[int]) -> Word:
    return tuple(-x for x in reversed(word))


def multiply(*words: Sequence[int]) -> Word:
    out: list[int] = []
    for w in words:
        for x in w:
            if out and out[-1] == -x:
                out.pop()
            else:
                out.append(x)
    return tuple(out)


def power(word: Sequence[int], n: int) -> Word:
    if n < 0:
        return power(inverse(word), -n)
    return multiply(*([tuple(word)] * n)) if n else IDENTITY


def is_reduced(word: Sequence[int]) -> bool:
    return all(word[i] != -word[i + 1] for i in range(len(word) - 1))


def common_prefix_length(u: Sequence[int], v: Sequence[int]) -> int:
    n = 0
    for x, y in zip(u, v):
        if x != y:
            break
        n += 1
    return n


def cyclic_reduce(word: Sequence[int]) -> Word:
    w = list(free_reduce(word))
    while len(w) >= 2 and w[0] == -w[-1]:
        w = w[1:-1]
    return tuple(w)


def exponent_sums(word: Sequence[int], rank: int) -> tuple[int, ...]:
    sums = [0] * rank
    for x in word:
        sums[abs(x) - 1] += 1 if x > 0 else -1
    return tuple(sums)


_TOKEN = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*)(?:\^(-?\d+))?\s*")


def parse_word(text: str, names: Sequence[str]) -> Word:
    """Parse ``"a b^-1 a^2"`` (or ``"ab^-1a^2"`` for one-letter names).

    ``1`` and the empty string denote the identity.  When every generator name
    is a single lowercase character, an uppercase letter is read as the
    inverse of its lowercase generator.  The result is freely reduced.
    """
    index = {name: i + 1 for i, name in enumerate(names)}
    text = text.strip()
    if text in ("", "1", "e"):
        return IDENTITY
    single = all(len(n) == 1 for n in names)
    raw: list[int] = []
    if single:
        pos = 0
        compact = text.replace(" ", "").replace("*", "")
        while pos < len(compact):
            ch = compact[pos]
            pos += 1
            if ch in index:
                gen = index[ch]
            elif ch.isupper() and ch.lower() in index and ch not in index:
                gen = -index[ch.lower()]
            else:
                raise ValueError(f"unknown generator {ch!r} in {text!r}")
            exp = 1
            m = re.match(r"\^(-?\d+)", compact[pos:])
            if m:
                exp = int(m.group(1))
                pos += m.end()
            raw.extend([gen if exp > 0 else -gen] * abs(exp))
    else:
        for token in text.replace("*", " ").split():
            m = _TOKEN.fullmatch(token)
            if not m or m.group(1) not in index:
                raise ValueError(f"unknown generator token {token!r} in {text!r}")
            gen = index[m.group(1)]
            exp = int(m.group(2)) if m.group(2) else 1
            raw.extend([gen if exp > 0 else -gen] * abs(exp))
    return free_reduce(raw)


def format_word(word: Sequence[int], names: Sequence[str]) -> str:
    """Inverse of :func:`parse_word`, grouping runs into powers."""
    if not word:
        return "1"
    parts = []
    i = 0
    while i < len(word):
        j = i
        while j < len(word) and word[j] == word[i]:
            j += 1
        run = j - i
        exp = run if word[i] > 0 else -run
        name = names[abs(word[i]) - 1]
        parts.append(name if exp == 1 else f"{name}^{exp}")
        i = j
    return " ".join(parts)


def reduced_words(rank: int, length: int) -> list[Word]:
    """All freely reduced words of exactly ``length`` letters, shortlex order."""
    layer: list[Word] = [IDENTITY]
    alphabet = letters(rank)
    for _ in range(length):
        layer = [w + (x,) for w in layer for x in alphabet if not w or x != -w[-1]]
    return layer
