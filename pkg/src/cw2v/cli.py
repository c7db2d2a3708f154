"""Command-line surface binding the library into training, prediction and
reporting pipelines.

Conventions: one document per line on stdin/stdout or --input/--output;
every randomized command takes --seed (default 0); --config points to a
JSON file whose keys mirror the long flag names (dashes or underscores)
and whose values act as defaults — explicit flags win.  Exit codes: 0
success, 1 input/usage error, 2 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import classify, datagen, defense, evalharness, perturb, tokenizer, vocab
from .embedding import Hyperparams, embed, load_model, nearest_words, save_model, train
from .util import config_fingerprint, data_path, derive_seed, read_lines

KIND_CHOICES = tuple(k.value for k in perturb.ALL_KINDS)


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the CLI contract wants 1."""

    def error(self, message):  # noqa: D102 - argparse override
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _runs_spec(value: str) -> tuple[int, int]:
    try:
        r_str, s_str = value.lower().split("x")
        r, s = int(r_str), int(s_str)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected RxS (e.g. 3x3), got {value!r}") from None
    if r < 1 or s < 1:
        raise argparse.ArgumentTypeError("run counts must be ≥ 1")
    return r, s


def _int_list(value: str) -> list[int]:
    return [int(v) for v in value.split(",") if v]


def _float_list(value: str) -> list[float]:
    return [float(v) for v in value.split(",") if v]


def _read_input(args) -> list[str]:
    if args.input:
        return read_lines(args.input)
    return [line.rstrip("\n") for line in sys.stdin]


def _write_output(args, lines) -> None:
    text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).parent.mkdir(parents=True, exist_ok=True)
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# Write targets don't shape results, so they stay out of the fingerprint;
# input paths stay in because their contents do.
_FINGERPRINT_EXCLUDE = frozenset({"func", "config", "output", "output_base", "model_out", "out"})


def _fingerprint(args) -> str:
    payload = {k: v for k, v in sorted(vars(args).items()) if k not in _FINGERPRINT_EXCLUDE}
    return config_fingerprint(payload)


def _confusables_map(args) -> defense.ConfusablesMap:
    conf = getattr(args, "confusables", None) or data_path("confusables.txt")
    tandem = getattr(args, "tandem", None) or data_path("tandem.txt")
    return defense.load_confusables(conf, tandem)


def _defended(args, lines):
    if not (args.acd or args.uc):
        return list(lines)
    cmap = _confusables_map(args) if args.uc else None
    return defense.defend_lines(lines, use_acd=args.acd, use_uc=args.uc, cmap=cmap)


def _hyper_from_args(args) -> Hyperparams:
    return Hyperparams(
        rho=args.rho,
        h=args.hidden,
        window=args.window,
        learning_rate=args.lr,
        batch_size=args.batch_size,
        max_epochs=args.max_epochs,
        patience=args.patience,
        subsample_t=args.subsample_t,
        subsample_mode=args.subsample_mode,
        loss=args.loss,
        seed=args.seed,
    )


def _build_index(args, docs, seed: int) -> vocab.SpellingIndex:
    voc = vocab.build_vocab(docs, min_count=args.min_count)
    n = args.index_size if args.index_size else vocab.index_size(len(voc), args.rho)
    return vocab.cluster_index(
        voc, n, seed=seed, pick=args.pick, max_cluster_words=args.max_cluster_words
    )


def _experiment_config(args) -> evalharness.ExperimentConfig:
    runs = args.runs
    kinds = tuple(args.kind) if args.kind else tuple(KIND_CHOICES)
    return evalharness.ExperimentConfig(
        embed_corpus=args.embed_corpus,
        labeled_corpus=args.labeled,
        use_acd=args.acd,
        use_uc=args.uc,
        kinds=kinds,
        hyper=_hyper_from_args(args),
        index_n=args.index_size,
        min_count=args.min_count,
        pick=args.pick,
        max_cluster_words=args.max_cluster_words,
        split_fraction=args.split_fraction,
        l2_strength=args.l2,
        clf_epochs=args.clf_epochs,
        clf_lr=args.clf_lr,
        embed_runs=runs[0],
        clf_runs=runs[1],
        seed=args.seed,
    )


# ---------------------------------------------------------------------------
# Subcommand implementations


def _cmd_perturb(args) -> int:
    config = perturb.PerturbationConfig(
        rng_seed=args.seed,
        insertion_char=args.insertion_char,
        punctuation_set=args.punctuation_set,
        max_inserts_per_gap=args.max_inserts_per_gap,
        per_char_probability=args.per_char_probability,
        vowel_set=args.vowel_set,
    )
    kind = None if args.kind == "random" else perturb.PerturbationKind(args.kind)
    _write_output(args, [perturb.perturb_document(line, config, kind) for line in _read_input(args)])
    return 0


def _cmd_deobfuscate(args) -> int:
    cmap = _confusables_map(args) if args.uc else None
    lines = [
        defense.deobfuscate(line, cmap, use_acd=args.acd, use_uc=args.uc)
        for line in _read_input(args)
    ]
    _write_output(args, lines)
    return 0


def _cmd_tokenize(args) -> int:
    _write_output(args, [" ".join(tokenizer.tokenize(line).tokens) for line in _read_input(args)])
    return 0


def _cmd_build_index(args) -> int:
    docs = list(tokenizer.tokenize_lines(read_lines(args.input)))
    index = _build_index(args, docs, seed=args.seed)
    index.provenance["config_fingerprint"] = _fingerprint(args)
    vocab.save_index(index, args.output)
    print(f"wrote index of {len(index)} words to {args.output}")
    return 0


def _cmd_train_embed(args) -> int:
    lines = _defended(args, read_lines(args.input))
    docs = list(tokenizer.tokenize_lines(lines))
    if args.index:
        index = vocab.load_index(args.index)
    else:
        index = _build_index(args, docs, seed=derive_seed(args.seed, "index"))
        index.provenance["config_fingerprint"] = _fingerprint(args)
    model = train(docs, index, _hyper_from_args(args))
    save_model(model, args.model_out)
    print(f"trained n={model.n} h={model.dim} model on {len(docs)} docs -> {args.model_out}")
    return 0


def _cmd_embed(args) -> int:
    model = load_model(args.model)
    vector = embed(args.word, model)
    print(" ".join(format(v, ".17g") for v in vector))
    return 0


def _cmd_nearest(args) -> int:
    model = load_model(args.model)
    docs = list(tokenizer.tokenize_lines(read_lines(args.input)))
    voc = vocab.build_vocab(docs, min_count=args.min_count)
    for word, score in nearest_words(args.word, model, voc.most_common(), k=args.k):
        print(f"{word}\t{score:.6f}")
    return 0


def _cmd_train_classifier(args) -> int:
    model = load_model(args.model)
    labeled = classify.load_labeled(args.labeled)
    lines = _defended(args, labeled.texts())
    features = evalharness.doc_features(lines, lambda w: embed(w, model), model.dim)
    clf = evalharness.fit_classifier(
        features,
        labeled.labels(),
        l2_strength=args.l2,
        epochs=args.clf_epochs,
        lr=args.clf_lr,
        seed=args.seed,
    )
    clf.meta["config_fingerprint"] = _fingerprint(args)
    clf.meta["seed"] = args.seed
    classify.save_logreg(clf, args.out)
    print(f"trained classifier on {len(labeled)} docs -> {args.out}")
    return 0


def _cmd_predict(args) -> int:
    model = load_model(args.model)
    clf = classify.load_logreg(args.classifier)
    lines = _defended(args, _read_input(args))
    features = evalharness.doc_features(lines, lambda w: embed(w, model), model.dim)
    scores = evalharness.score_documents(clf, features)
    _write_output(args, [format(s, ".10g") for s in scores])
    return 0


def _sample_words(args, k: int) -> list[str]:
    if args.dictionary:
        return evalharness.sample_dictionary_words(args.dictionary, k, seed=args.seed)
    docs = list(tokenizer.tokenize_lines(read_lines(args.corpus)))
    return evalharness.sample_corpus_words(docs, k, seed=args.seed)


def _emit_reports(args, reports) -> None:
    if args.output_base:
        tsv, js = evalharness.write_reports(args.output_base, reports)
        print(f"wrote {tsv} and {js}")
    else:
        print("metric\tvalue\tsample_size\tseed\tfingerprint")
        for r in reports:
            print(f"{r.metric}\t{r.value!r}\t{r.sample_size}\t{r.seed}\t{r.fingerprint}")


def _cmd_report_correlation(args) -> int:
    model = load_model(args.model)
    words = _sample_words(args, args.sample)
    result = evalharness.correlation_report(words, model)
    fp = _fingerprint(args)
    reports = [
        evalharness.Report("pearson", result.pearson, result.n_pairs, args.seed, fp),
        evalharness.Report("spearman", result.spearman, result.n_pairs, args.seed, fp),
    ]
    _emit_reports(args, reports)
    return 0


def _cmd_report_ratios(args) -> int:
    model = load_model(args.model)
    words = _sample_words(args, args.sample)
    kinds = args.kind or list(KIND_CHOICES)
    fp = _fingerprint(args)
    config = perturb.PerturbationConfig(rng_seed=derive_seed(args.seed, "attack"))
    reports = []
    for kind in kinds:
        result = evalharness.perturbation_ratio_report(
            words,
            model,
            perturb.PerturbationKind(kind),
            config=config,
            n_pairs=args.pairs,
            seed=args.seed,
        )
        reports.append(
            evalharness.Report(
                f"ratio_{kind}",
                result.ratio,
                result.n_words,
                args.seed,
                fp,
                extra={"numerator": result.numerator, "denominator": result.denominator},
            )
        )
    _emit_reports(args, reports)
    return 0


def _cmd_report_collisions(args) -> int:
    stats = evalharness.collision_report(read_lines(args.words))
    fp = _fingerprint(args)
    reports = [
        evalharness.Report("total_words", stats.total_words, stats.total_words, args.seed, fp),
        evalharness.Report("distinct_bags", stats.distinct_bags, stats.total_words, args.seed, fp),
        evalharness.Report(
            "colliding_word_count", stats.colliding_word_count, stats.total_words, args.seed, fp
        ),
        evalharness.Report(
            "mean_words_per_bag", stats.mean_words_per_bag, stats.total_words, args.seed, fp
        ),
        evalharness.Report(
            "max_words_per_bag", stats.max_words_per_bag, stats.total_words, args.seed, fp
        ),
    ]
    _emit_reports(args, reports)
    return 0


def _cmd_run_pipeline(args) -> int:
    result = evalharness.pipeline_experiment(_experiment_config(args))
    reports = evalharness.pipeline_reports(result)
    _emit_reports(args, reports)
    print(
        f"original AUC {result.original_auc_mean:.4f} ± {result.original_auc_std:.4f} | "
        f"perturbed AUC {result.perturbed_auc_mean:.4f} ± {result.perturbed_auc_std:.4f} "
        f"({len(result.runs)} runs)"
    )
    return 0


def _cmd_sweep(args) -> int:
    sweep = evalharness.hyperparameter_sweep(
        _experiment_config(args),
        h_values=args.grid_h,
        window_values=args.grid_window,
        rho_values=args.grid_rho,
    )
    if args.output_base:
        tsv, js = evalharness.write_sweep(args.output_base, sweep)
        print(f"wrote {tsv} and {js}")
    else:
        for row in sweep["rows"]:
            print(row)
    print(f"summary: {sweep['summary']}")
    return 0


def _cmd_make_corpus(args) -> int:
    if args.labeled_out:
        datagen.write_labeled_corpus(args.labeled_out, args.docs, seed=args.seed)
        print(f"wrote {args.docs} labeled docs to {args.labeled_out}")
    if args.sentences_out:
        datagen.write_sentence_corpus(args.sentences_out, args.sentences, seed=args.seed)
        print(f"wrote {args.sentences} sentences to {args.sentences_out}")
    if not (args.labeled_out or args.sentences_out):
        raise ValueError("nothing to do: pass --sentences-out and/or --labeled-out")
    return 0


# ---------------------------------------------------------------------------
# Parser assembly


def build_parser() -> tuple[_Parser, dict[str, _Parser]]:
    parser = _Parser(prog="cw2v", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    registry: dict[str, _Parser] = {}

    io_parent = _Parser(add_help=False)
    io_parent.add_argument("-i", "--input", help="input file (default: stdin)")
    io_parent.add_argument("-o", "--output", help="output file (default: stdout)")

    common_parent = _Parser(add_help=False)
    common_parent.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    common_parent.add_argument("--config", help="JSON config file mirroring the flags; flags win")

    defense_parent = _Parser(add_help=False)
    defense_parent.add_argument(
        "--acd", action=argparse.BooleanOptionalAction, default=True, help="toggle ACD"
    )
    defense_parent.add_argument(
        "--uc", action=argparse.BooleanOptionalAction, default=True, help="toggle UC"
    )
    defense_parent.add_argument("--confusables", help="override bundled confusables file")
    defense_parent.add_argument("--tandem", help="override bundled tandem file")

    index_parent = _Parser(add_help=False)
    index_parent.add_argument("--rho", type=float, default=0.005, help="index fraction of |V|")
    index_parent.add_argument("--index-size", type=int, default=None, help="explicit index size n")
    index_parent.add_argument("--min-count", type=int, default=1)
    index_parent.add_argument("--pick", choices=("random", "medoid"), default="random")
    index_parent.add_argument("--max-cluster-words", type=int, default=20000)

    hyper_parent = _Parser(add_help=False)
    hyper_parent.add_argument("--hidden", type=int, default=200, help="embedding size h")
    hyper_parent.add_argument("--window", type=int, default=2)
    hyper_parent.add_argument("--lr", type=float, default=0.05)
    hyper_parent.add_argument("--batch-size", type=int, default=64)
    hyper_parent.add_argument("--max-epochs", type=int, default=50)
    hyper_parent.add_argument("--patience", type=int, default=3)
    hyper_parent.add_argument("--subsample-t", type=float, default=1e-3)
    hyper_parent.add_argument("--subsample-mode", choices=vocab.SUBSAMPLE_MODES, default="standard")
    hyper_parent.add_argument("--loss", choices=("cross_entropy", "mse"), default="cross_entropy")

    clf_parent = _Parser(add_help=False)
    clf_parent.add_argument("--l2", type=float, default=1e-4)
    clf_parent.add_argument("--clf-epochs", type=int, default=300)
    clf_parent.add_argument("--clf-lr", type=float, default=0.5)
    clf_parent.add_argument("--split-fraction", type=float, default=0.8)

    report_parent = _Parser(add_help=False)
    report_parent.add_argument("--output-base", help="write <base>.tsv and <base>.json")

    def register(name, func, parents, help_text, **kwargs):
        sub = subparsers.add_parser(name, parents=parents, help=help_text, **kwargs)
        sub.set_defaults(func=func)
        registry[name] = sub
        return sub

    p = register("perturb", _cmd_perturb, [io_parent, common_parent], "attack documents word by word")
    p.add_argument("--kind", choices=("random",) + KIND_CHOICES, default="random")
    p.add_argument("--per-char-probability", type=float, default=0.3)
    p.add_argument("--max-inserts-per-gap", type=int, default=1)
    p.add_argument("--insertion-char", default=".")
    p.add_argument("--punctuation-set", default=".,!?")
    p.add_argument("--vowel-set", default="aeiou")

    register(
        "deobfuscate",
        _cmd_deobfuscate,
        [io_parent, common_parent, defense_parent],
        "apply ACD and/or UC to documents",
    )

    register("tokenize", _cmd_tokenize, [io_parent, common_parent], "lowercase and split documents")

    p = register(
        "build-index",
        _cmd_build_index,
        [common_parent, index_parent],
        "cluster the vocabulary and write a spelling index",
    )
    p.add_argument("--input", required=True, help="corpus, one document per line")
    p.add_argument("--output", required=True, help="index JSON path")

    p = register(
        "train-embed",
        _cmd_train_embed,
        [common_parent, defense_parent, index_parent, hyper_parent],
        "train a CW2V model",
    )
    p.add_argument("--input", required=True, help="corpus, one document per line")
    p.add_argument("--index", help="reuse a build-index artifact")
    p.add_argument("--model-out", required=True)

    p = register("embed", _cmd_embed, [common_parent], "print one word's embedding")
    p.add_argument("--model", required=True)
    p.add_argument("--word", required=True)

    p = register("nearest", _cmd_nearest, [common_parent], "top-k cosine neighbors in a corpus vocabulary")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True, help="corpus supplying candidate words")
    p.add_argument("--word", required=True)
    p.add_argument("-k", type=int, default=10)
    p.add_argument("--min-count", type=int, default=1)

    p = register(
        "train-classifier",
        _cmd_train_classifier,
        [common_parent, defense_parent, clf_parent],
        "train logistic regression on embedding-average features",
    )
    p.add_argument("--model", required=True)
    p.add_argument("--labeled", required=True, help="<label>\\t<text> file")
    p.add_argument("--out", required=True)

    p = register(
        "predict",
        _cmd_predict,
        [io_parent, common_parent, defense_parent],
        "score documents with a trained classifier",
    )
    p.add_argument("--model", required=True)
    p.add_argument("--classifier", required=True)

    p = register(
        "report-correlation",
        _cmd_report_correlation,
        [common_parent, report_parent],
        "Levenshtein vs cosine distance correlation",
    )
    p.add_argument("--model", required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--corpus", help="sample words from this corpus")
    src.add_argument("--dictionary", help="sample words from this word list")
    p.add_argument("--sample", type=int, default=100)

    p = register(
        "report-ratios",
        _cmd_report_ratios,
        [common_parent, report_parent],
        "perturbation distance ratios",
    )
    p.add_argument("--model", required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--corpus")
    src.add_argument("--dictionary")
    p.add_argument("--sample", type=int, default=500)
    p.add_argument("--pairs", type=int, default=500)
    p.add_argument("--kind", action="append", choices=KIND_CHOICES)

    p = register(
        "report-collisions",
        _cmd_report_collisions,
        [common_parent, report_parent],
        "bag-of-characters collision statistics",
    )
    p.add_argument("--words", required=True, help="word list, one per line (.gz ok)")

    pipeline_parents = [common_parent, defense_parent, index_parent, hyper_parent, clf_parent, report_parent]
    p = register(
        "run-pipeline",
        _cmd_run_pipeline,
        pipeline_parents,
        "defended vs undefended AUC experiment",
    )
    p.add_argument("--labeled", required=True)
    p.add_argument("--embed-corpus", help="separate embedding corpus (default: labeled texts)")
    p.add_argument("--runs", type=_runs_spec, default=(3, 3), help="RxS run grid, default 3x3")
    p.add_argument("--kind", action="append", choices=KIND_CHOICES, help="restrict attack kinds")

    p = register("sweep", _cmd_sweep, pipeline_parents, "hyperparameter sweep over h/window/rho")
    p.add_argument("--labeled", required=True)
    p.add_argument("--embed-corpus")
    p.add_argument("--runs", type=_runs_spec, default=(3, 3))
    p.add_argument("--kind", action="append", choices=KIND_CHOICES)
    p.add_argument("--grid-h", type=_int_list, default=[200, 300])
    p.add_argument("--grid-window", type=_int_list, default=[2, 3])
    p.add_argument("--grid-rho", type=_float_list, default=[0.005])

    p = register(
        "make-corpus",
        _cmd_make_corpus,
        [common_parent],
        "generate synthetic corpora from the bundled lexicon",
    )
    p.add_argument("--sentences-out")
    p.add_argument("--sentences", type=int, default=2000)
    p.add_argument("--labeled-out")
    p.add_argument("--docs", type=int, default=2000)

    return parser, registry


def _apply_config_file(argv: list[str], registry: dict[str, _Parser]) -> None:
    """Pre-scan argv for --config and install its values as subparser
    defaults so explicitly passed flags take precedence."""
    if "--config" not in argv:
        return
    at = argv.index("--config")
    if at + 1 >= len(argv):
        return  # let argparse report the missing value
    path = argv[at + 1]
    command = next((a for a in argv if not a.startswith("-")), None)
    sub = registry.get(command or "")
    if sub is None:
        return
    with open(path, encoding="utf-8") as fh:
        loaded = json.load(fh)
    if not isinstance(loaded, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    known = {action.dest for action in sub._actions}
    mapped = {}
    for key, value in loaded.items():
        dest = key.replace("-", "_")
        if dest not in known:
            raise ValueError(f"{path}: unknown config key {key!r} for command {command!r}")
        mapped[dest] = value
    sub.set_defaults(**mapped)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, registry = build_parser()
    try:
        _apply_config_file(argv, registry)
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"cw2v: error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"cw2v: error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 130
    except Exception as exc:  # internal failures map to exit 2
        print(f"cw2v: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
