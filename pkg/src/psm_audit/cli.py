"""Experiment driver: every pipeline stage as a reproducible subcommand.

All randomness flows through --seed, report bodies embed the resolved config
plus the toolkit version, and plaintext password emission is opt-in. Exit
codes: 0 success, 1 module error, 2 usage error. The toolkit never touches
the network.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .corpus import (
    load_accounts,
    load_blocklist,
    load_corpus,
    overlap_ratio,
    split_shadow,
)
from .errors import AuditError
from .guessing import (
    SimulationConfig,
    TargetedGenerator,
    detect_date,
    detect_name,
    detect_phone,
    learn_rules,
    pattern_stats,
    prepare_names,
    simulate,
)
from .mia import (
    ThresholdAttack,
    attack_threshold,
    attack_top_percent,
    build_labeled,
    evaluate,
    select_threshold,
)
from .models import deserialize, serialize, train
from .reporting import write_csv, write_report
from .steal import CorpusReplay, Mangler, run_campaign, upper_bound
from .strength import build_estimator, fit_g, rate_strength

MODEL_KIND_ALIASES = {
    "list": "list",
    "ngram": "ngram",
    "adaptive": "adaptive",
    "backoff": "backoff",
    "pcfg": "pcfg",
    "chunk-pcfg": "chunk_pcfg",
    "chunk_pcfg": "chunk_pcfg",
}


def _resolved_config(args: argparse.Namespace) -> dict:
    skip = {"func", "config"}
    out = {}
    for key, value in sorted(vars(args).items()):
        if key in skip:
            continue
        out[key] = list(value) if isinstance(value, tuple) else value
    return out


def _report(args, command: str, result: dict) -> None:
    body = {
        "toolkit": "psm-audit",
        "version": __version__,
        "command": command,
        "config": _resolved_config(args),
        "result": result,
    }
    write_report(body, args.out)
    if args.out is not None:
        scalars = [f"{k}={v}" for k, v in result.items()
                   if isinstance(v, (int, float, str, bool)) and v is not None]
        summary = "  ".join(scalars[:6])
        print(f"{command}: {summary}" if summary else f"{command}: done")
        print(f"report: {args.out}")


def _train_params(args) -> dict:
    kind = MODEL_KIND_ALIASES[args.kind]
    params: dict = {}
    if kind in ("ngram", "adaptive"):
        params["order"] = args.order
        params["smoothing"] = args.smoothing
        params["max_len"] = args.max_len
    if kind == "adaptive":
        params["gamma"] = args.gamma
        params["seed"] = args.seed
    if kind == "backoff":
        params["max_order"] = args.order + 1
        params["threshold"] = args.backoff_threshold
        params["max_len"] = args.max_len
    if kind == "chunk_pcfg":
        params["vocab_size"] = args.bpe_vocab
    return params


def cmd_train(args) -> None:
    corpus = load_corpus(args.infile, max_len=args.max_len)
    kind = MODEL_KIND_ALIASES[args.kind]
    model = train(kind, corpus, **_train_params(args))
    serialize(model, args.model_out)
    _report(args, "train", {
        "kind": model.kind,
        "params": model.params,
        "corpus_fingerprint": model.corpus_fingerprint,
        "corpus_total": corpus.total,
        "corpus_unique": corpus.unique_count,
        "model_file": str(args.model_out),
    })


def _read_probe_passwords(args) -> list:
    if args.password:
        return list(args.password)
    if args.infile:
        corpus = load_corpus(args.infile)
        return sorted(corpus.counts)
    raise AuditError("provide --password or --in")


def cmd_prob(args) -> None:
    model = deserialize(args.model)
    probes = _read_probe_passwords(args)
    _report(args, "prob", {
        "probabilities": {pwd: model.prob(pwd) for pwd in probes},
    })


def cmd_enumerate(args) -> None:
    model = deserialize(args.model)
    rows = [(c.rank, c.password, c.prob) for c in model.enumerate_top(args.top)]
    if args.csv:
        write_csv(args.csv, ("rank", "password", "prob"), rows)
    _report(args, "enumerate", {
        "requested": args.top,
        "emitted": len(rows),
        "first_password": rows[0][1] if rows else None,
        "last_prob": rows[-1][2] if rows else None,
        "csv": str(args.csv) if args.csv else None,
    })


def cmd_strength(args) -> None:
    model = deserialize(args.model)
    estimator = build_estimator(model, n=args.samples, seed=args.seed)
    probes = _read_probe_passwords(args)
    ratings = {}
    for pwd in probes:
        rating = rate_strength(estimator.guess_number(model.prob(pwd)),
                               (args.weak_cutoff, args.strong_cutoff))
        ratings[pwd] = {"guess_number": rating.guess_number,
                        "bucket": rating.bucket}
    _report(args, "strength", {"ratings": ratings})


def cmd_fitg(args) -> None:
    model = deserialize(args.model)
    corpus = load_corpus(args.train)
    g_list = [int(g) for g in args.g.split(",")]
    report = fit_g(model, corpus, g_list)
    if args.csv:
        write_csv(args.csv, ("G", "fit"), report.rows())
    _report(args, "fitg", {
        "g_values": list(report.g_values),
        "fractions": list(report.fractions),
        "emitted": report.emitted,
        "truncated": report.truncated,
        "csv": str(args.csv) if args.csv else None,
    })


def cmd_mia_calibrate(args) -> None:
    corpus = load_corpus(args.shadow_corpus)
    split = split_shadow(corpus, args.seed)
    kind = MODEL_KIND_ALIASES[args.kind]
    shadow = train(kind, split.train_half, **_train_params(args))
    labeled = build_labeled(shadow, split)
    attack = select_threshold(labeled, args.ratio)
    if args.labeled_csv:
        write_csv(args.labeled_csv, ("password", "prob", "member"),
                  [(s.password, s.prob, int(s.member)) for s in labeled])
    _report(args, "mia-calibrate", {
        "delta": attack.delta,
        "expected_member_ratio": attack.expected_member_ratio,
        "fallback": attack.fallback,
        "shadow_kind": shadow.kind,
        "shadow_fingerprint": shadow.corpus_fingerprint,
        "labeled_count": len(labeled),
        "labeled_csv": str(args.labeled_csv) if args.labeled_csv else None,
    })


def _load_delta(args) -> float:
    if args.delta is not None:
        return args.delta
    if args.delta_from:
        with open(args.delta_from, "r", encoding="ascii") as fh:
            calib = json.load(fh)
        return calib["result"]["delta"]
    raise AuditError("provide --delta or --delta-from")


def cmd_mia_attack(args) -> None:
    model = deserialize(args.target)
    queries = load_corpus(args.queries)
    if args.method == "threshold":
        delta = _load_delta(args)
        predictions = attack_threshold(model, queries, delta)
    else:
        delta = None
        predictions = attack_top_percent(model, queries, args.k_percent)
    result = {
        "method": args.method,
        "delta": delta,
        "queries": len(predictions),
        "predicted_members": sum(predictions.values()),
    }
    if args.truth:
        truth = load_corpus(args.truth)
        members = set(queries.counts) & set(truth.counts)
        result["report"] = evaluate(predictions, members).to_dict()
    _report(args, "mia-attack", result)


def cmd_steal(args) -> None:
    model = deserialize(args.target)
    truth = load_corpus(args.truth)
    owned = load_corpus(args.owned)
    if args.generator == "replay":
        gen = CorpusReplay(owned, seed=args.seed)
    else:
        gen = Mangler(owned.by_frequency(), seed=args.seed)
    attack = ThresholdAttack(_load_delta(args), expected_member_ratio=1.0)
    report = run_campaign(model, truth, gen, attack, budget=args.budget,
                          target_precision=args.target_precision,
                          feedback=not args.static)
    if args.emit_plaintext:
        with open(args.emit_plaintext, "w", encoding="ascii") as fh:
            for pwd in report.stolen_passwords:
                fh.write(pwd + "\n")
    _report(args, "steal", report.to_dict())


def cmd_upper_bound(args) -> None:
    model = deserialize(args.model)
    corpus = load_corpus(args.train)
    g_list = [int(g) for g in args.g.split(",")]
    rows = upper_bound(model, corpus, g_list)
    if args.csv:
        write_csv(args.csv, ("G", "fraction", "emitted", "truncated"),
                  [(r["g"], r["fraction"], r["emitted"], int(r["truncated"]))
                   for r in rows])
    _report(args, "upper-bound", {
        "rows": rows,
        "csv": str(args.csv) if args.csv else None,
    })


def cmd_simulate(args) -> None:
    accounts = load_accounts(args.accounts, separator=args.separator)
    used = load_blocklist(args.used) if args.used else None
    if args.pairs:
        pairs = []
        with open(args.pairs, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if args.separator in line:
                    old, new = line.split(args.separator, 1)
                    pairs.append((old, new))
        gen = learn_rules(pairs)
    else:
        gen = TargetedGenerator({rule: 1 for rule in
                                 ("identity", "case", "leet", "digit_append",
                                  "digit_increment", "digit_delete")})
    caps = tuple(int(c) for c in args.caps.split(","))
    cfg = SimulationConfig(n_users=args.n_users, guess_caps=caps,
                           weak_threshold=args.weak_threshold, seed=args.seed)
    report = simulate(accounts, gen, used, cfg)
    if args.csv:
        write_csv(args.csv, ("cap", "condition", "compromised"), report.rows())
    _report(args, "simulate", report.to_dict(include_records=args.records))


def cmd_patterns(args) -> None:
    corpus = load_corpus(args.infile)
    recognizers = {}
    if args.names:
        names = prepare_names(load_blocklist(args.names).passwords)
        recognizers["name"] = lambda p: detect_name(p, names)
    freq = load_corpus(args.freq).counts if args.freq else None
    recognizers["date"] = lambda p: detect_date(p, freq, args.date_min_count)
    recognizers["phone"] = detect_phone
    stats = pattern_stats(sorted(corpus.counts), recognizers)
    _report(args, "patterns", {"percentages": {k: v * 100.0 for k, v in
                                               sorted(stats.items())}})


def cmd_overlap(args) -> None:
    def ordered(path, as_corpus):
        if as_corpus:
            return load_corpus(path).by_frequency()
        return list(load_blocklist(path).passwords)

    list_a = ordered(args.a, args.corpus_a)
    list_b = ordered(args.b, args.corpus_b)
    k = min(args.k, len(list_a), len(list_b))
    ratio = overlap_ratio(list_a, list_b, args.k)
    _report(args, "overlap", {"k_requested": args.k, "k_used": k,
                              "ratio": ratio})


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="seed for all randomness")
    p.add_argument("--out", default=None,
                   help="report path (default: stdout); timestamps go to a sidecar")
    p.add_argument("--threads", type=int,
                   default=int(os.environ.get("PSM_AUDIT_THREADS", "1")),
                   help="upper bound on internal parallelism")


def _add_model_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kind", choices=sorted(MODEL_KIND_ALIASES), default="ngram")
    p.add_argument("--order", type=int, default=4, help="n-gram length")
    p.add_argument("--smoothing", type=float, default=0.01)
    p.add_argument("--gamma", type=float, default=5e-6,
                   help="noise rate for kind=adaptive")
    p.add_argument("--backoff-threshold", type=int, default=10)
    p.add_argument("--bpe-vocab", type=int, default=10_000)
    p.add_argument("--max-len", type=int, default=30)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="psm-audit",
        description="Offline audit toolkit for password strength meters.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", default=None,
                        help="JSON file whose keys pre-populate optional-flag "
                             "defaults (required flags stay on the command line)")
    sub = parser.add_subparsers(dest="command", required=True)
    parser.sub_commands = {}

    def add_cmd(name: str, **kwargs) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, **kwargs)
        parser.sub_commands[name] = sp
        return sp

    p = add_cmd("train", help="train a model on a password corpus")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--model-out", required=True)
    _add_model_params(p)
    _add_common(p)
    p.set_defaults(func=cmd_train)

    p = add_cmd("prob", help="query estimated probabilities")
    p.add_argument("--model", required=True)
    p.add_argument("--password", action="append", default=None)
    p.add_argument("--in", dest="infile", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_prob)

    p = add_cmd("enumerate", help="emit the model's top-G candidates")
    p.add_argument("--model", required=True)
    p.add_argument("--top", type=int, required=True)
    p.add_argument("--csv", default=None, help="write rank,password,prob rows")
    _add_common(p)
    p.set_defaults(func=cmd_enumerate)

    p = add_cmd("strength", help="guess numbers and Weak/Medium/Strong buckets")
    p.add_argument("--model", required=True)
    p.add_argument("--password", action="append", default=None)
    p.add_argument("--in", dest="infile", default=None)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--weak-cutoff", type=float, default=1e6)
    p.add_argument("--strong-cutoff", type=float, default=1e14)
    _add_common(p)
    p.set_defaults(func=cmd_strength)

    p = add_cmd("fitg", help="member fraction of the top-G candidates")
    p.add_argument("--model", required=True)
    p.add_argument("--train", required=True)
    p.add_argument("--g", required=True, help="comma-separated G values")
    p.add_argument("--csv", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_fitg)

    p = add_cmd("mia-calibrate",
                help="shadow-split calibration of the probability threshold")
    p.add_argument("--shadow-corpus", required=True)
    p.add_argument("--ratio", type=float, default=0.8)
    p.add_argument("--labeled-csv", default=None)
    _add_model_params(p)
    _add_common(p)
    p.set_defaults(func=cmd_mia_calibrate)

    p = add_cmd("mia-attack", help="membership predictions on a query set")
    p.add_argument("--target", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--method", choices=("threshold", "topk"), default="threshold")
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--delta-from", default=None,
                   help="JSON report produced by mia-calibrate")
    p.add_argument("--k-percent", type=float, default=10.0)
    p.add_argument("--truth", default=None,
                   help="target training corpus; enables the scored report")
    _add_common(p)
    p.set_defaults(func=cmd_mia_attack)

    p = add_cmd("steal", help="trained-password stealing campaign")
    p.add_argument("--target", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--owned", required=True)
    p.add_argument("--generator", choices=("replay", "mangler"), default="replay")
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--delta-from", default=None)
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--target-precision", type=float, default=0.9)
    p.add_argument("--static", action="store_true",
                   help="disable accept() feedback to the generator")
    p.add_argument("--emit-plaintext", default=None,
                   help="write stolen passwords to this file (off by default)")
    _add_common(p)
    p.set_defaults(func=cmd_steal)

    p = add_cmd("upper-bound",
                help="optimal stolen fraction among the top-G candidates")
    p.add_argument("--model", required=True)
    p.add_argument("--train", required=True)
    p.add_argument("--g", required=True)
    p.add_argument("--csv", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_upper_bound)

    p = add_cmd("simulate", help="meter-aware targeted guessing simulation")
    p.add_argument("--accounts", required=True)
    p.add_argument("--separator", default=":")
    p.add_argument("--used", default=None, help="blocklist or stolen-password file")
    p.add_argument("--pairs", default=None,
                   help="old<sep>new reuse pairs to learn transformation rules")
    p.add_argument("--n-users", type=int, default=100_000)
    p.add_argument("--caps", default="5,10,100")
    p.add_argument("--weak-threshold", type=float, default=1e6)
    p.add_argument("--records", action="store_true",
                   help="include per-user rank records in the report")
    p.add_argument("--csv", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = add_cmd("patterns", help="name/date/phone percentages in a password list")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--names", default=None, help="name dictionary file")
    p.add_argument("--freq", default=None,
                   help="corpus supplying frequencies for ambiguous dates")
    p.add_argument("--date-min-count", type=int, default=10)
    _add_common(p)
    p.set_defaults(func=cmd_patterns)

    p = add_cmd("overlap", help="top-k intersection of two ordered lists")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--corpus-a", action="store_true",
                   help="rank file A by frequency instead of file order")
    p.add_argument("--corpus-b", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_overlap)

    return parser


def _config_path(argv) -> str | None:
    for i, token in enumerate(argv):
        if token == "--config":
            return argv[i + 1] if i + 1 < len(argv) else None
        if token.startswith("--config="):
            return token.split("=", 1)[1]
    return None


def main(argv=None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    # A config file pre-populates optional-flag defaults before parsing, so
    # explicit command-line flags still win.
    config = _config_path(argv)
    if config:
        try:
            with open(config, "r", encoding="utf-8") as fh:
                defaults = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot read config file: {exc}")
        for sp in parser.sub_commands.values():
            known = {a.dest for a in sp._actions if not a.required}
            sp.set_defaults(**{k: v for k, v in defaults.items() if k in known})
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (AuditError, OSError, ValueError) as exc:
        print(f"psm-audit: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
