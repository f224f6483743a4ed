"""ISBN normalization and checksum validation.

Canonical form is ISBN-13: valid ISBN-10 strings are converted by
prefixing 978 and recomputing the check digit.
"""

from __future__ import annotations

import re

_CLEAN_RE = re.compile(r"[\s-]+")


def clean(raw: str) -> str:
    """Strip hyphens/whitespace and uppercase a trailing x."""
    return _CLEAN_RE.sub("", raw).upper()


def is_valid_isbn10(s: str) -> bool:
    if len(s) != 10 or not s[:9].isdigit() or not (s[9].isdigit() or s[9] == "X"):
        return False
    total = sum((10 - i) * int(c) for i, c in enumerate(s[:9]))
    total += 10 if s[9] == "X" else int(s[9])
    return total % 11 == 0


def is_valid_isbn13(s: str) -> bool:
    if len(s) != 13 or not s.isdigit():
        return False
    total = sum(int(c) * (1 if i % 2 == 0 else 3) for i, c in enumerate(s))
    return total % 10 == 0


def isbn13_check_digit(first12: str) -> str:
    total = sum(int(c) * (1 if i % 2 == 0 else 3) for i, c in enumerate(first12))
    return str((10 - total % 10) % 10)


def isbn10_to_13(s: str) -> str:
    """Convert a cleaned, valid ISBN-10 to ISBN-13 (978 prefix)."""
    first12 = "978" + s[:9]
    return first12 + isbn13_check_digit(first12)


def canonicalize(raw: str) -> str | None:
    """Return the ISBN-13 canonical form, or None if the checksum fails."""
    s = clean(raw)
    if is_valid_isbn13(s):
        return s
    if is_valid_isbn10(s):
        return isbn10_to_13(s)
    return None
