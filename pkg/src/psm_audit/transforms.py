"""Low-level password transformation helpers shared by the attack generators."""

from __future__ import annotations

LEET_MAP = {"a": "@", "e": "3", "i": "1", "o": "0", "s": "$"}
_LEET_INVERSE = {v: k for k, v in LEET_MAP.items()}


def case_variants(word: str) -> list:
    """Fixed-order case rewrites: capitalize, upper, lower, swapcase."""
    return [word.capitalize(), word.upper(), word.lower(), word.swapcase()]


def leet_variants(word: str) -> list:
    """Full substitution first, then one substituted class at a time, then decode."""
    out = []
    full = "".join(LEET_MAP.get(c.lower(), c) for c in word)
    out.append(full)
    for plain, sub in LEET_MAP.items():
        out.append("".join(sub if c.lower() == plain else c for c in word))
    out.append("".join(_LEET_INVERSE.get(c, c) for c in word))
    return out


def split_trailing_digits(word: str) -> tuple:
    """(stem, digit_run); digit_run is empty when the word has no digit suffix."""
    i = len(word)
    while i > 0 and word[i - 1].isdigit():
        i -= 1
    return word[:i], word[i:]


def increment_digit_run(run: str) -> str:
    """Add one, preserving zero padding when the width allows it."""
    width = len(run)
    return str(int(run) + 1).zfill(width)


def leading_affix(word: str) -> tuple:
    """(affix, rest) where affix is the leading run of non-letters."""
    i = 0
    while i < len(word) and not word[i].isalpha():
        i += 1
    return word[:i], word[i:]


def trailing_affix(word: str) -> tuple:
    """(rest, affix) where affix is the trailing run of non-letters."""
    i = len(word)
    while i > 0 and not word[i - 1].isalpha():
        i -= 1
    return word[:i], word[i:]
