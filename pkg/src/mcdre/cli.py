"""Command-line surface: train / eval / tag / score / encode-tags /
decode-tags / sweep / gen-synth.

Exit codes: 0 ok, 1 usage, 2 data problem, 3 configuration problem.
Every output file is written atomically (write then rename).
"""

from __future__ import annotations

import argparse
import os
import sys

from .checkpoint import load_model
from .codec import decode, encode
from .config import RunConfig
from .data import (
    SentenceRecord,
    atomic_write_text,
    format_mentions,
    load_columnar,
    load_mentions,
    write_columnar,
)
from .errors import ConfigError, DataError, McdreError, SchemeCapacityError
from .estimator import MultiAspectTagger
from .metrics import breakdown_report
from .synth import generate_corpus

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_CONFIG = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mcdre", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit a model from a config file")
    p.add_argument("--config", required=True, help="run configuration file")
    p.add_argument("--train", required=True, help="training corpus (columnar)")
    p.add_argument("--dev", help="dev corpus for early stopping")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("eval", help="score a checkpoint on a corpus")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--match", choices=("lenient", "strict"), default="strict")
    p.add_argument("--report", help="also write the plain-text report here")
    p.add_argument("--tsv", help="also write the machine-readable report here")

    p = sub.add_parser("tag", help="tag plain sentences with a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--input", required=True, help="one sentence per line, space-separated tokens")
    p.add_argument("--out", required=True, help="tagged columnar output")

    p = sub.add_parser("score", help="score predictions against gold (model-free)")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--match", choices=("lenient", "strict"), default="strict")
    p.add_argument("--scheme", choices=("bio", "biohd"), default="biohd")
    p.add_argument("--tsv", help="write the machine-readable report here")

    p = sub.add_parser("encode-tags", help="mentions + tokens -> tagged columnar file")
    p.add_argument("--mentions", required=True, help="docid<TAB>label<TAB>s1-e1[,s2-e2...]")
    p.add_argument("--tokens", required=True, help="one sentence per line; docid is the 0-based line index")
    p.add_argument("--scheme", choices=("bio", "biohd"), default="biohd")
    p.add_argument("--out", required=True)

    p = sub.add_parser("decode-tags", help="tagged columnar file -> mention lines")
    p.add_argument("--tags", required=True)
    p.add_argument("--scheme", choices=("bio", "biohd"), default="biohd")
    p.add_argument("--out", required=True)

    p = sub.add_parser("sweep", help="cross-mode x aspect-set grid, one report per cell")
    p.add_argument("--config", required=True)
    p.add_argument("--train", required=True)
    p.add_argument("--dev", required=True)
    p.add_argument("--modes", default="none,kv,attention,ffn", help="comma-separated cross modes")
    p.add_argument("--aspects", default="se,sy,do", help="semicolon-separated aspect sets, e.g. 'se;se,sy;se,sy,do'")
    p.add_argument("--seeds", default=None, help="comma-separated seeds (default: the config seed)")
    p.add_argument("--match", choices=("lenient", "strict"), default="strict")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("gen-synth", help="deterministic synthetic corpus generator")
    p.add_argument("--out", required=True)
    p.add_argument("--sentences", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scheme", choices=("bio", "biohd"), default="biohd")
    p.add_argument("--dev-out", help="also write a held-vocabulary dev corpus")
    p.add_argument("--dev-sentences", type=int, default=0)
    return parser


def _require_file(path: str) -> str:
    if not os.path.exists(path):
        raise DataError(f"file not found: {path}")
    return path


def _cmd_train(args) -> int:
    config = RunConfig.from_file(_require_file(args.config))
    train_records = load_columnar(_require_file(args.train), scheme=config.scheme)
    dev_records = load_columnar(_require_file(args.dev), scheme=config.scheme) if args.dev else None
    os.makedirs(args.out, exist_ok=True)
    est = MultiAspectTagger.from_config(config)

    log_rows = ["epoch\ttrain_loss\tdev_strict_f"]

    def on_epoch(row):
        dev_f = row.get("dev_strict_f")
        log_rows.append(f"{row['epoch']}\t{row['train_loss']:.6f}\t{'' if dev_f is None else f'{dev_f:.6f}'}")
        print(log_rows[-1].replace("\t", "  "))

    est.fit(train_records, dev=dev_records, on_epoch=on_epoch)
    # with a dev set the estimator holds the best-epoch parameters
    est.save(os.path.join(args.out, "best.ckpt" if dev_records is not None else "last.ckpt"))
    atomic_write_text(os.path.join(args.out, "epochs.tsv"), "\n".join(log_rows) + "\n")
    result = est.train_result_
    if result.best_dev_f is not None:
        print(f"best dev strict F {result.best_dev_f:.4f} at epoch {result.best_epoch}")
    print(f"checkpoint written to {args.out}")
    return EXIT_OK


def _cmd_eval(args) -> int:
    model, token_vocab = load_model(_require_file(args.checkpoint))
    records = load_columnar(_require_file(args.data), scheme=model.config.scheme)
    scheme = model.config.scheme
    gold = [decode(r.entity_tags, scheme) for r in records]
    pred_tags = [
        model.predict_entity_tags(token_vocab.record_ids(r)) if len(r) else [] for r in records
    ]
    report = breakdown_report(gold, [decode(t, scheme) for t in pred_tags], args.match)
    print(report.to_text(), end="")
    if args.report:
        atomic_write_text(args.report, report.to_text())
    if args.tsv:
        atomic_write_text(args.tsv, report.to_tsv())
    return EXIT_OK


def _load_token_lines(path: str) -> list[list[str]]:
    sentences = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                sentences.append(line.split())
    return sentences


def _cmd_tag(args) -> int:
    model, token_vocab = load_model(_require_file(args.checkpoint))
    sentences = _load_token_lines(_require_file(args.input))
    records = []
    for i, toks in enumerate(sentences):
        rec = SentenceRecord(toks, ["_"] * len(toks), ["_"] * len(toks), ["_"] * len(toks), f"s{i}")
        tags = model.predict_entity_tags(token_vocab.record_ids(rec)) if toks else []
        rec.entity_tags = tags
        records.append(rec)
    write_columnar(records, args.out)
    print(f"tagged {len(records)} sentences -> {args.out}")
    return EXIT_OK


def _cmd_score(args) -> int:
    gold_records = load_columnar(_require_file(args.gold))
    pred_records = load_columnar(_require_file(args.pred))
    if len(gold_records) != len(pred_records):
        raise DataError(
            f"gold has {len(gold_records)} sentences, predictions have {len(pred_records)}"
        )
    gold = [decode(r.entity_tags, args.scheme) for r in gold_records]
    pred = [decode(r.entity_tags, args.scheme) for r in pred_records]
    report = breakdown_report(gold, pred, args.match)
    print(report.to_text(), end="")
    if args.tsv:
        atomic_write_text(args.tsv, report.to_tsv())
    return EXIT_OK


def _cmd_encode_tags(args) -> int:
    sentences = _load_token_lines(_require_file(args.tokens))
    by_doc = load_mentions(_require_file(args.mentions))
    unknown = [d for d in by_doc if not (d.isdigit() and int(d) < len(sentences))]
    if unknown:
        raise DataError(
            f"mention docids must be 0-based sentence indices below {len(sentences)}; got {unknown[:3]}"
        )
    records = []
    for i, toks in enumerate(sentences):
        mentions = by_doc.get(str(i), [])
        try:
            tags = encode(mentions, len(toks), args.scheme)
        except SchemeCapacityError as err:
            raise SchemeCapacityError(f"sentence {i}: {err}") from None
        records.append(
            SentenceRecord(toks, ["_"] * len(toks), ["_"] * len(toks), list(tags.tags), f"s{i}")
        )
    write_columnar(records, args.out)
    print(f"encoded {sum(len(v) for v in by_doc.values())} mentions over {len(records)} sentences -> {args.out}")
    return EXIT_OK


def _cmd_decode_tags(args) -> int:
    records = load_columnar(_require_file(args.tags))
    by_doc = {}
    for rec in records:
        by_doc[rec.provenance] = decode(rec.entity_tags, args.scheme)
    atomic_write_text(args.out, format_mentions(by_doc))
    total = sum(len(v) for v in by_doc.values())
    print(f"decoded {total} mentions from {len(records)} sentences -> {args.out}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    base = RunConfig.from_file(_require_file(args.config))
    train_records = load_columnar(_require_file(args.train), scheme=base.scheme)
    dev_records = load_columnar(_require_file(args.dev), scheme=base.scheme)
    modes = [m.strip() for m in args.modes.split(",") if m.strip()]
    aspect_sets = [
        tuple(a.strip() for a in group.split(",") if a.strip())
        for group in args.aspects.split(";")
        if group.strip()
    ]
    seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else [base.seed]
    os.makedirs(args.out, exist_ok=True)

    summary = ["mode\taspects\tseed\tprecision\trecall\tf\tbest_epoch"]
    for mode in modes:
        for aspects in aspect_sets:
            for seed in seeds:
                config = base.copy(cross_mode=mode, active_aspects=aspects, seed=seed)
                est = MultiAspectTagger.from_config(config)
                est.fit(train_records, dev=dev_records)
                report = est.score_report(dev_records, mode=args.match)
                cell = f"{mode}_{'-'.join(aspects)}_{seed}"
                atomic_write_text(os.path.join(args.out, f"report_{cell}.tsv"), report.to_tsv())
                m = report.micro
                summary.append(
                    f"{mode}\t{'+'.join(aspects)}\t{seed}\t{m.precision:.6f}\t{m.recall:.6f}"
                    f"\t{m.f:.6f}\t{est.train_result_.best_epoch}"
                )
                print(summary[-1].replace("\t", "  "))
    atomic_write_text(os.path.join(args.out, "summary.tsv"), "\n".join(summary) + "\n")
    print(f"{(len(summary) - 1)} cells -> {args.out}")
    return EXIT_OK


def _cmd_gen_synth(args) -> int:
    if args.dev_out and args.dev_sentences < 1:
        raise ConfigError("--dev-out needs --dev-sentences >= 1")
    train, dev = generate_corpus(
        args.seed, args.sentences, args.scheme, n_dev=args.dev_sentences if args.dev_out else 0
    )
    write_columnar(train, args.out)
    print(f"wrote {len(train)} sentences -> {args.out}")
    if args.dev_out:
        write_columnar(dev, args.dev_out)
        print(f"wrote {len(dev)} dev sentences -> {args.dev_out}")
    return EXIT_OK


_COMMANDS = {
    "train": _cmd_train,
    "eval": _cmd_eval,
    "tag": _cmd_tag,
    "score": _cmd_score,
    "encode-tags": _cmd_encode_tags,
    "decode-tags": _cmd_decode_tags,
    "sweep": _cmd_sweep,
    "gen-synth": _cmd_gen_synth,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as err:
        print(f"mcdre: config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, SchemeCapacityError) as err:
        print(f"mcdre: data error: {err}", file=sys.stderr)
        return EXIT_DATA
    except OSError as err:
        print(f"mcdre: {err}", file=sys.stderr)
        return EXIT_DATA
    except McdreError as err:
        print(f"mcdre: {err}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
