"""Meter-aware targeted guessing and leaked-password pattern analysis.

Simulates an attacker who guesses a user's password from one of their other
passwords, optionally skipping candidates known to be used (blocked or
trained) by the victim site's meter. Also houses the name/date/phone
recognizers applied to leaked dictionaries.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field

from .corpus import AccountStore, Blocklist
from .transforms import (
    case_variants,
    increment_digit_run,
    leet_variants,
    split_trailing_digits,
)

RULE_ORDER = (
    "identity",
    "case",
    "leet",
    "digit_append",
    "digit_increment",
    "digit_delete",
    "suffix_swap",
    "prefix_swap",
)

_DEFAULT_DIGIT_SUFFIXES = ("1", "123", "12", "2", "01")
_MAX_AFFIX_LEN = 4


def _explains(rule: str, old: str, new: str) -> tuple:
    """Whether `rule` maps old to new; returns (explained, learned_affix)."""
    if rule == "identity":
        return new == old, None
    if rule == "case":
        return new != old and new.lower() == old.lower(), None
    if rule == "leet":
        return new != old and new in leet_variants(old), None
    stem, run = split_trailing_digits(old)
    if rule == "digit_append":
        if len(new) > len(old) and new.startswith(old) and new[len(old):].isdigit():
            suffix = new[len(old):]
            return len(suffix) <= _MAX_AFFIX_LEN, suffix
        return False, None
    if rule == "digit_increment":
        return bool(run) and new == stem + increment_digit_run(run), None
    if rule == "digit_delete":
        return bool(run) and bool(stem) and new == stem, None
    if rule == "suffix_swap":
        for cut in range(max(1, len(old) - _MAX_AFFIX_LEN), len(old)):
            head, old_suffix = old[:cut], old[cut:]
            if (len(head) >= 3 and new != old and new.startswith(head)
                    and 0 < len(new) - cut <= _MAX_AFFIX_LEN
                    and new[cut:] != old_suffix):
                return True, new[cut:]
        return False, None
    if rule == "prefix_swap":
        for cut in range(1, min(_MAX_AFFIX_LEN, len(old) - 3) + 1):
            old_prefix, tail = old[:cut], old[cut:]
            if (len(tail) >= 3 and new != old and new.endswith(tail)
                    and 0 < len(new) - len(tail) <= _MAX_AFFIX_LEN
                    and new[:len(new) - len(tail)] != old_prefix):
                return True, new[:len(new) - len(tail)]
        return False, None
    raise ValueError(f"unknown rule {rule!r}")


@dataclass
class TargetedGenerator:
    """Transformation-rule candidate generator ordered by learned rule weight.

    variants(x) is deterministic, duplicate-free, and emits the unmodified
    seed only at position 1 (when the identity rule carries weight).
    """

    rule_weights: dict
    digit_suffixes: tuple = _DEFAULT_DIGIT_SUFFIXES
    swap_suffixes: tuple = ()
    swap_prefixes: tuple = ()
    per_seed_limit: int = 500
    unexplained: int = 0

    def _ordered_rules(self) -> list:
        active = [r for r in self.rule_weights if self.rule_weights[r] > 0]
        return sorted(active,
                      key=lambda r: (-self.rule_weights[r], RULE_ORDER.index(r)))

    def _rule_candidates(self, rule: str, x: str) -> list:
        if rule == "identity":
            return [x]
        if rule == "case":
            return case_variants(x)
        if rule == "leet":
            return leet_variants(x)
        stem, run = split_trailing_digits(x)
        if rule == "digit_append":
            return [x + s for s in self.digit_suffixes]
        if rule == "digit_increment":
            return [stem + increment_digit_run(run)] if run else []
        if rule == "digit_delete":
            return [stem] if run and stem else []
        if rule == "suffix_swap":
            base = stem if run else x
            return [base + s for s in self.swap_suffixes if len(base) >= 3]
        if rule == "prefix_swap":
            return [p + x for p in self.swap_prefixes if len(x) >= 3]
        raise ValueError(f"unknown rule {rule!r}")

    def variants(self, x: str) -> list:
        out = []
        seen = set()
        rules = self._ordered_rules()
        if "identity" in rules:
            out.append(x)
        seen.add(x)
        for rule in rules:
            if rule == "identity":
                continue
            for candidate in self._rule_candidates(rule, x):
                if candidate and candidate not in seen:
                    seen.add(candidate)
                    out.append(candidate)
                if len(out) >= self.per_seed_limit:
                    return out[:self.per_seed_limit]
        return out


def learn_rules(pairs, per_seed_limit: int = 500) -> TargetedGenerator:
    """Weight each transformation rule by how many (old, new) pairs it explains.

    A pair may credit several rules. Appended digit suffixes and swapped
    affixes are collected into tables that drive generation, ordered by
    descending count then lexicographically. Pairs no rule explains are
    counted on the generator.
    """
    pair_list = list(pairs)
    if not pair_list:
        raise ValueError("need at least one training pair")
    weights = {rule: 0 for rule in RULE_ORDER}
    digit_suffixes: dict = {}
    swap_suffixes: dict = {}
    swap_prefixes: dict = {}
    unexplained = 0
    for old, new in pair_list:
        explained_any = False
        for rule in RULE_ORDER:
            explained, affix = _explains(rule, old, new)
            if not explained:
                continue
            explained_any = True
            weights[rule] += 1
            if affix:
                if rule == "digit_append":
                    digit_suffixes[affix] = digit_suffixes.get(affix, 0) + 1
                elif rule == "suffix_swap":
                    swap_suffixes[affix] = swap_suffixes.get(affix, 0) + 1
                elif rule == "prefix_swap":
                    swap_prefixes[affix] = swap_prefixes.get(affix, 0) + 1
        unexplained += not explained_any

    def ranked(table: dict, fallback: tuple = ()) -> tuple:
        if not table:
            return fallback
        return tuple(sorted(table, key=lambda a: (-table[a], a)))

    return TargetedGenerator(
        rule_weights=weights,
        digit_suffixes=ranked(digit_suffixes, _DEFAULT_DIGIT_SUFFIXES),
        swap_suffixes=ranked(swap_suffixes),
        swap_prefixes=ranked(swap_prefixes),
        per_seed_limit=per_seed_limit,
        unexplained=unexplained,
    )


@dataclass
class SimulationConfig:
    n_users: int = 100_000
    guess_caps: tuple = (5, 10, 100)
    weak_threshold: float = 1e6
    seed: int = 0

    def __post_init__(self):
        caps = tuple(self.guess_caps)
        if not caps or list(caps) != sorted(caps):
            raise ValueError("guess caps must be ascending")
        if self.n_users < 1:
            raise ValueError("n_users must be >= 1")
        self.guess_caps = caps

    @property
    def horizon(self) -> int:
        return self.guess_caps[-1]


@dataclass
class SimulationReport:
    """Aggregate outcome of one guessing simulation.

    Filtered and unfiltered conditions share the identical user sample and
    candidate streams; per-user records carry only anonymous indices, never
    emails or passwords.
    """

    n_users_run: int
    n_users_requested: int
    guess_caps: tuple
    compromised: dict
    earlier_fraction: float
    mean_reduced_guesses: float
    truncated_sample: bool
    records: list = field(repr=False, default_factory=list)

    def to_dict(self, include_records: bool = True) -> dict:
        out = {
            "n_users_run": self.n_users_run,
            "n_users_requested": self.n_users_requested,
            "guess_caps": list(self.guess_caps),
            "compromised": {str(cap): dict(v) for cap, v in self.compromised.items()},
            "earlier_fraction": self.earlier_fraction,
            "mean_reduced_guesses": self.mean_reduced_guesses,
            "truncated_sample": self.truncated_sample,
        }
        if include_records:
            out["records"] = [
                {"filtered_rank": r[0], "unfiltered_rank": r[1], "skips": r[2]}
                for r in self.records
            ]
        return out

    def rows(self) -> list:
        out = []
        for cap in self.guess_caps:
            for condition in ("filtered", "unfiltered"):
                out.append((cap, condition, self.compromised[cap][condition]))
        return out


def simulate(accounts: AccountStore, gen: TargetedGenerator, used,
             cfg: SimulationConfig, strength_fn=None) -> SimulationReport:
    """Run filtered and unfiltered targeted guessing over a user sample.

    Per user one password leaks and the other is the target; candidates come
    from gen.variants(leak) in order. The filtered attacker skips candidates
    in `used` without spending budget. The evaluation set is pre-filtered:
    passwords in `used` are removed per user, as are passwords `strength_fn`
    (password -> guess number) rates below cfg.weak_threshold; users need two
    surviving passwords to qualify.
    """
    used_set = used if used is not None else frozenset()
    eligible = {}
    for email, pwds in accounts.accounts.items():
        keep = {p for p in pwds if p not in used_set}
        if strength_fn is not None:
            keep = {p for p in keep if strength_fn(p) >= cfg.weak_threshold}
        if len(keep) >= 2:
            eligible[email] = keep

    rng = random.Random(cfg.seed)
    emails = sorted(eligible)
    truncated = len(emails) < cfg.n_users
    chosen = emails if truncated else rng.sample(emails, cfg.n_users)

    horizon = cfg.horizon
    records = []
    for email in chosen:
        leak, target = rng.sample(sorted(eligible[email]), 2)
        candidates = gen.variants(leak)
        raw_pos = None
        skips_before = None
        skips = 0
        filtered_count = 0
        for idx, candidate in enumerate(candidates, start=1):
            if candidate in used_set:
                skips += 1
                continue
            filtered_count += 1
            if candidate == target:
                raw_pos = idx
                skips_before = skips
                break
            if filtered_count >= horizon and idx >= horizon:
                break
        # Raw positions are kept uncapped; caps apply at aggregation so the
        # budget identity (unfiltered = filtered + skips) stays checkable.
        if raw_pos is None:
            records.append((None, None, None))
        else:
            records.append((raw_pos - skips_before, raw_pos, skips_before))

    n_run = len(chosen)
    compromised = {}
    for cap in cfg.guess_caps:
        filt = sum(1 for f, _u, _s in records if f is not None and f <= cap)
        unfilt = sum(1 for _f, u, _s in records if u is not None and u <= cap)
        compromised[cap] = {
            "filtered": filt / n_run if n_run else 0.0,
            "unfiltered": unfilt / n_run if n_run else 0.0,
        }

    hit_filtered = [(f, u, s) for f, u, s in records
                    if f is not None and f <= horizon]
    earlier = sum(1 for _f, _u, s in hit_filtered if s > 0)
    reduced = [s for _f, _u, s in hit_filtered]
    return SimulationReport(
        n_users_run=n_run,
        n_users_requested=cfg.n_users,
        guess_caps=cfg.guess_caps,
        compromised=compromised,
        earlier_fraction=earlier / len(hit_filtered) if hit_filtered else 0.0,
        mean_reduced_guesses=sum(reduced) / len(reduced) if reduced else 0.0,
        truncated_sample=truncated,
        records=records,
    )


# -- pattern recognizers -----------------------------------------------------

_DIGIT_RUN = re.compile(r"\d+")
_US_PHONE = re.compile(r"(?<![\d-])(2\d{2})(\d{3})-?(\d{4})(?![\d-])")


def prepare_names(names) -> frozenset:
    """Lowercase dictionary entries of length >= 3, ready for detect_name."""
    if isinstance(names, Blocklist):
        names = names.passwords
    return frozenset(n.lower() for n in names if len(n) >= 3)


def detect_name(password: str, name_dict: frozenset) -> bool:
    """Case-insensitive partial match: any substring of length >= 3 in the dictionary."""
    lowered = password.lower()
    n = len(lowered)
    for length in range(3, n + 1):
        for start in range(n - length + 1):
            if lowered[start:start + length] in name_dict:
                return True
    return False


def _valid_month_day(month: int, day: int) -> bool:
    return 1 <= month <= 12 and 1 <= day <= 31


def _valid_year(year: int) -> bool:
    return 1900 <= year <= 2023


def _is_date_run(run: str, frequencies, min_count: int) -> bool:
    if len(run) == 4:
        if _valid_year(int(run)):
            return True
        return _valid_month_day(int(run[:2]), int(run[2:]))
    if len(run) == 6:
        # Six digits are inherently ambiguous (YYMMDD vs DDMMYY vs anything
        # else), so a frequency gate filters the accidental matches.
        as_yymmdd = _valid_month_day(int(run[2:4]), int(run[4:6]))
        as_ddmmyy = _valid_month_day(int(run[2:4]), int(run[0:2]))
        if not (as_yymmdd or as_ddmmyy):
            return False
        if frequencies is None:
            return True
        return frequencies.get(run, 0) > min_count
    if len(run) == 8:
        as_yyyymmdd = (_valid_year(int(run[:4]))
                       and _valid_month_day(int(run[4:6]), int(run[6:8])))
        as_ddmmyyyy = (_valid_year(int(run[4:]))
                       and _valid_month_day(int(run[2:4]), int(run[0:2])))
        return as_yyyymmdd or as_ddmmyyyy
    return False


def detect_date(password: str, frequencies=None, min_count: int = 10) -> bool:
    """True when a 4/6/8-digit run parses as a date.

    Formats: YYYY or MMDD (4 digits), YYMMDD or DDMMYY (6 digits, accepted
    only when the run's corpus frequency exceeds min_count if a frequency
    table is supplied), YYYYMMDD or DDMMYYYY (8 digits). Years 1900-2023,
    months 1-12, days 1-31.
    """
    if frequencies is not None and hasattr(frequencies, "counts"):
        frequencies = frequencies.counts
    for run in _DIGIT_RUN.findall(password):
        if len(run) in (4, 6, 8) and _is_date_run(run, frequencies, min_count):
            return True
    return False


def detect_phone(password: str) -> bool:
    """UK and US phone-number shapes inside the password.

    UK: digit runs 07XXXXXXXX(X), 7XXXXXXXX(X) or 447XXXXXXX(X).
    US: 2XX + 7 digits with an optional dash before the last four; sequences
    with fewer than 3 distinct digits are rejected as repeats.
    """
    for run in _DIGIT_RUN.findall(password):
        n = len(run)
        if run.startswith("07") and n in (10, 11):
            return True
        if run.startswith("7") and n in (9, 10):
            return True
        if run.startswith("447") and n in (10, 11):
            return True
    for match in _US_PHONE.finditer(password):
        digits = "".join(match.groups())
        if len(set(digits)) >= 3:
            return True
    return False


def pattern_stats(passwords, recognizers: dict) -> dict:
    """Fraction of passwords matched by each recognizer callable."""
    pwds = list(passwords)
    if not pwds:
        raise ValueError("password list is empty")
    return {
        name: sum(1 for p in pwds if fn(p)) / len(pwds)
        for name, fn in recognizers.items()
    }
