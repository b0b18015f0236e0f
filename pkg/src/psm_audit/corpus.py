"""Corpus ingestion: cleaning, shadow splits, account merging and blocklists.

All loaders read raw bytes and validate per line, so dirty breach dumps never
abort a run: unusable lines are dropped (and counted where the format allows
telling "malformed" apart from "unclean").
"""

from __future__ import annotations

import hashlib
import logging
import random
from dataclasses import dataclass, field

from .errors import EmptyInputError, SplitError

log = logging.getLogger(__name__)

ASCII_MIN = 0x20
ASCII_MAX = 0x7E
DEFAULT_MAX_LEN = 30


def is_clean(password: str, max_len: int = DEFAULT_MAX_LEN) -> bool:
    """Cleaning rule: printable-ASCII only (0x20-0x7E), 1..max_len chars.

    Leading/trailing spaces are preserved; passwords may legitimately
    contain them.
    """
    if not 1 <= len(password) <= max_len:
        return False
    return all(ASCII_MIN <= ord(c) <= ASCII_MAX for c in password)


def _clean_line(raw: bytes, max_len: int) -> str | None:
    if raw.endswith(b"\r"):
        raw = raw[:-1]
    if not 1 <= len(raw) <= max_len:
        return None
    if any(b < ASCII_MIN or b > ASCII_MAX for b in raw):
        return None
    return raw.decode("ascii")


@dataclass
class PasswordCorpus:
    """Multiset of cleaned passwords with occurrence counts."""

    counts: dict[str, int]
    total: int
    source_label: str = ""

    @classmethod
    def from_counts(cls, counts: dict[str, int], source_label: str = "",
                    max_len: int = DEFAULT_MAX_LEN) -> "PasswordCorpus":
        """Build a corpus from an in-memory count table, enforcing the cleaning contract."""
        cleaned: dict[str, int] = {}
        for pwd, n in counts.items():
            if n < 1:
                raise ValueError(f"count for {pwd!r} must be >= 1, got {n}")
            if not is_clean(pwd, max_len):
                raise ValueError(f"password {pwd!r} violates the cleaning contract")
            cleaned[pwd] = cleaned.get(pwd, 0) + n
        if not cleaned:
            raise EmptyInputError("corpus has no entries")
        return cls(cleaned, sum(cleaned.values()), source_label)

    @property
    def unique_count(self) -> int:
        return len(self.counts)

    def __contains__(self, password: str) -> bool:
        return password in self.counts

    def support(self) -> frozenset:
        return frozenset(self.counts)

    def by_frequency(self) -> list:
        """Passwords sorted by descending count, ties lexicographic."""
        return sorted(self.counts, key=lambda p: (-self.counts[p], p))

    def fingerprint(self) -> str:
        """Content hash identifying this multiset (label excluded)."""
        h = hashlib.sha256()
        for pwd in sorted(self.counts):
            h.update(pwd.encode("ascii"))
            h.update(b"\x00")
            h.update(str(self.counts[pwd]).encode("ascii"))
            h.update(b"\x01")
        return h.hexdigest()[:16]

    def write_plaintext(self, path) -> None:
        """Serialize as one line per occurrence (the format load_corpus reads)."""
        with open(path, "wb") as fh:
            for pwd in sorted(self.counts):
                line = pwd.encode("ascii") + b"\n"
                fh.write(line * self.counts[pwd])


def load_corpus(path, max_len: int = DEFAULT_MAX_LEN) -> PasswordCorpus:
    """Load a newline-delimited password file, dropping unclean lines.

    Lines longer than max_len or containing bytes outside printable ASCII are
    dropped; duplicates aggregate into counts. Raises EmptyInputError when no
    line survives.
    """
    counts: dict[str, int] = {}
    total = 0
    with open(path, "rb") as fh:
        data = fh.read()
    for raw in data.split(b"\n"):
        pwd = _clean_line(raw, max_len)
        if pwd is None:
            continue
        counts[pwd] = counts.get(pwd, 0) + 1
        total += 1
    if total == 0:
        raise EmptyInputError(f"no passwords survived cleaning in {path}")
    return PasswordCorpus(counts, total, source_label=str(path))


@dataclass
class SplitPair:
    """Disjoint halves of a corpus used for shadow-model calibration."""

    train_half: PasswordCorpus
    test_half: PasswordCorpus
    seed: int


def split_shadow(corpus: PasswordCorpus, seed: int) -> SplitPair:
    """Split unique passwords 1:1 into disjoint halves, each keeping its full count.

    Unique passwords are shuffled by a seeded generator and assigned
    alternately, so the halves' sizes differ by at most one and the same seed
    always reproduces the same split.
    """
    uniques = sorted(corpus.counts)
    if len(uniques) < 2:
        raise SplitError("need at least 2 unique passwords to split")
    rng = random.Random(seed)
    rng.shuffle(uniques)
    train: dict[str, int] = {}
    test: dict[str, int] = {}
    for i, pwd in enumerate(uniques):
        (train if i % 2 == 0 else test)[pwd] = corpus.counts[pwd]
    label = corpus.source_label
    return SplitPair(
        PasswordCorpus(train, sum(train.values()), f"{label}#train-half"),
        PasswordCorpus(test, sum(test.values()), f"{label}#test-half"),
        seed,
    )


@dataclass
class AccountStore:
    """Email-keyed sets of a user's distinct passwords."""

    accounts: dict[str, set]
    n_malformed: int = 0
    n_dropped: int = 0

    @classmethod
    def from_pairs(cls, pairs) -> "AccountStore":
        accounts: dict[str, set] = {}
        for email, pwd in pairs:
            accounts.setdefault(email.lower(), set()).add(pwd)
        return cls(accounts)

    @property
    def n_users(self) -> int:
        return len(self.accounts)

    def mean_passwords_per_user(self) -> float:
        if not self.accounts:
            return 0.0
        return sum(len(s) for s in self.accounts.values()) / len(self.accounts)


def load_accounts(path, separator: str = ":",
                  max_len: int = DEFAULT_MAX_LEN) -> AccountStore:
    """Load `email<separator>password` lines into an AccountStore.

    Emails are lowercased; passwords are deduplicated per email and must pass
    the corpus cleaning rules. Lines without the separator are skipped and
    counted; the password side may itself contain the separator (split on the
    first occurrence only).
    """
    sep = separator.encode("ascii")
    accounts: dict[str, set] = {}
    malformed = 0
    dropped = 0
    with open(path, "rb") as fh:
        data = fh.read()
    for raw in data.split(b"\n"):
        if raw.endswith(b"\r"):
            raw = raw[:-1]
        if not raw:
            continue
        if sep not in raw:
            malformed += 1
            continue
        email_b, pwd_b = raw.split(sep, 1)
        pwd = _clean_line(pwd_b, max_len)
        if not email_b or pwd is None:
            dropped += 1
            continue
        try:
            email = email_b.decode("ascii").lower()
        except UnicodeDecodeError:
            dropped += 1
            continue
        accounts.setdefault(email, set()).add(pwd)
    if malformed:
        log.warning("skipped %d account lines without separator %r", malformed, separator)
    if not accounts:
        raise EmptyInputError(f"no accounts loaded from {path}")
    return AccountStore(accounts, n_malformed=malformed, n_dropped=dropped)


@dataclass
class Blocklist:
    """Ordered list of unique blocked passwords with O(1) membership."""

    passwords: tuple
    name: str = ""
    _index: frozenset = field(init=False, repr=False)

    def __post_init__(self):
        self._index = frozenset(self.passwords)

    def __contains__(self, password: str) -> bool:
        return password in self._index

    def __len__(self) -> int:
        return len(self.passwords)

    def top(self, k: int) -> tuple:
        return self.passwords[:k]


def load_blocklist(path, name: str = "") -> Blocklist:
    """Load a newline-delimited dictionary, preserving file order.

    Duplicates are removed (first occurrence wins). Undecodable bytes are kept
    via surrogateescape so vendor lists round-trip untouched.
    """
    seen = set()
    ordered = []
    with open(path, "rb") as fh:
        data = fh.read()
    for raw in data.split(b"\n"):
        if raw.endswith(b"\r"):
            raw = raw[:-1]
        if not raw:
            continue
        pwd = raw.decode("utf-8", errors="surrogateescape")
        if pwd in seen:
            continue
        seen.add(pwd)
        ordered.append(pwd)
    if not ordered:
        raise EmptyInputError(f"blocklist {path} is empty")
    return Blocklist(tuple(ordered), name=name or str(path))


def overlap_ratio(list_a, list_b, k: int, allow_truncation: bool = True) -> float:
    """|top_k(a) ∩ top_k(b)| / k over two ordered password lists.

    When k exceeds a list, the comparison truncates to the available length
    (reported via a warning) unless allow_truncation is False.
    """
    if k <= 0:
        raise ValueError("k must be >= 1")
    a = list(list_a)
    b = list(list_b)
    avail = min(len(a), len(b))
    if k > avail:
        if not allow_truncation:
            raise ValueError(f"k={k} exceeds available length {avail}")
        log.warning("overlap_ratio truncated from k=%d to %d", k, avail)
        k = avail
    if k == 0:
        raise ValueError("no entries available for comparison")
    return len(set(a[:k]) & set(b[:k])) / k
