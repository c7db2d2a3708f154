"""Measurement procedures: Levenshtein/cosine distance correlations,
perturbation distance ratios, bag-of-characters collision statistics, the
defended-vs-undefended classification pipeline experiment, and the
hyperparameter sweep.

Every report carries the experiment seed and a config fingerprint and is
exactly reproducible from them; report files contain no timestamps.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from itertools import combinations
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.stats import spearmanr

from . import classify, defense, perturb
from .embedding import CW2VModel, Hyperparams, embed, embed_fragments, load_model, train
from .strmetrics import bag_key, levenshtein
from .tokenizer import TokenizedDoc, tokenize
from .util import config_fingerprint, derive_rng, derive_seed, read_lines, write_json, write_tsv
from .vocab import build_vocab, cluster_index, index_size

FRAGMENT_KINDS = (perturb.PerturbationKind.RANDOM_SPACES, perturb.PerturbationKind.FAKE_PUNCTUATION)


def cosine_distance(u: np.ndarray, v: np.ndarray) -> float:
    """One minus cosine similarity; degenerate zero vectors score 1.0."""
    norm = float(np.linalg.norm(u) * np.linalg.norm(v))
    if norm == 0.0:
        return 1.0
    return 1.0 - float(u @ v) / norm


@dataclass(frozen=True)
class Report:
    """A single reported metric with its provenance."""

    metric: str
    value: float
    sample_size: int
    seed: int
    fingerprint: str
    extra: dict = field(default_factory=dict)


def write_reports(base: str | Path, reports: Sequence[Report]) -> tuple[Path, Path]:
    """Write reports as `<base>.tsv` and `<base>.json`; deterministic bytes."""
    base = Path(base)
    rows = [
        (r.metric, repr(r.value), r.sample_size, r.seed, r.fingerprint)
        for r in reports
    ]
    tsv = base.with_suffix(".tsv")
    json_path = base.with_suffix(".json")
    write_tsv(tsv, ("metric", "value", "sample_size", "seed", "fingerprint"), rows)
    write_json(json_path, [asdict(r) for r in reports])
    return tsv, json_path


# ---------------------------------------------------------------------------
# Word sampling


def sample_corpus_words(
    docs: Iterable[TokenizedDoc | Sequence[str]], k: int, seed: int = 0, min_len: int = 3
) -> list[str]:
    """Seeded sample of k distinct corpus words of length ≥ min_len."""
    pool = sorted(
        {
            t
            for doc in docs
            for t in (doc.tokens if isinstance(doc, TokenizedDoc) else doc)
            if len(t) >= min_len
        }
    )
    if len(pool) < k:
        raise ValueError(f"corpus has only {len(pool)} distinct words of length ≥ {min_len}; need {k}")
    return derive_rng(seed, "word-sample").sample(pool, k)


def sample_dictionary_words(path: str | Path, k: int, seed: int = 0, min_len: int = 3) -> list[str]:
    """Seeded sample of k distinct dictionary words (one word per line)."""
    pool = sorted({w for w in read_lines(path) if len(w) >= min_len and not w.startswith("#")})
    if len(pool) < k:
        raise ValueError(f"dictionary has only {len(pool)} usable words; need {k}")
    return derive_rng(seed, "word-sample").sample(pool, k)


# ---------------------------------------------------------------------------
# Table 2 methodology: Levenshtein vs cosine distance correlation


@dataclass(frozen=True)
class CorrelationResult:
    pearson: float
    spearman: float
    n_words: int
    n_pairs: int


def correlation_report(words: Sequence[str], model: CW2VModel) -> CorrelationResult:
    """Pearson (primary) and Spearman correlation between Levenshtein
    distance and embedding cosine distance over all unordered word pairs."""
    distinct = sorted(set(words))
    if len(distinct) < 2:
        raise ValueError("correlation_report needs at least 2 distinct words")
    lev = []
    cos = []
    vectors = {w: embed(w, model) for w in distinct}
    for a, b in combinations(distinct, 2):
        lev.append(float(levenshtein(a, b)))
        cos.append(cosine_distance(vectors[a], vectors[b]))
    lev_arr = np.array(lev)
    cos_arr = np.array(cos)
    if lev_arr.std() == 0.0 or cos_arr.std() == 0.0:
        raise ValueError("correlation undefined: zero variance in a distance series")
    pearson = float(np.corrcoef(lev_arr, cos_arr)[0, 1])
    rho = float(spearmanr(lev_arr, cos_arr).statistic)
    return CorrelationResult(
        pearson=pearson, spearman=rho, n_words=len(distinct), n_pairs=len(lev)
    )


# ---------------------------------------------------------------------------
# Table 3 methodology: perturbation distance ratios


@dataclass(frozen=True)
class RatioResult:
    kind: str
    ratio: float
    numerator: float
    denominator: float
    n_words: int
    n_pairs: int


def perturbation_ratio_report(
    words: Sequence[str],
    model: CW2VModel,
    kind: perturb.PerturbationKind,
    config: perturb.PerturbationConfig | None = None,
    n_pairs: int = 500,
    seed: int = 0,
) -> RatioResult:
    """Mean cosine distance between each word and its perturbed version,
    divided by the mean cosine distance over seeded random word pairs drawn
    (with replacement, identical pairs rejected) from the same sample.

    For the split-word attacks (RandomSpaces, FakePunctuation) the perturbed
    side embeds the whitespace-split fragments and averages them.
    """
    words = list(words)
    if len(words) < 2:
        raise ValueError("perturbation_ratio_report needs at least 2 words")
    if config is None:
        config = perturb.PerturbationConfig(rng_seed=derive_seed(seed, "attack"))
    kind = perturb.PerturbationKind(kind)

    distances = []
    for w in words:
        attacked = perturb.perturb_word(w, kind, config)
        if kind in FRAGMENT_KINDS:
            fragments = attacked.split() or [attacked]
            attacked_vec = embed_fragments(fragments, model)
        else:
            attacked_vec = embed(attacked, model)
        distances.append(cosine_distance(embed(w, model), attacked_vec))
    numerator = float(np.mean(distances))

    rng = derive_rng(seed, "random-pairs")
    pair_distances = []
    for _ in range(n_pairs):
        a = rng.choice(words)
        b = rng.choice(words)
        while b == a:
            b = rng.choice(words)
        pair_distances.append(cosine_distance(embed(a, model), embed(b, model)))
    denominator = float(np.mean(pair_distances))
    if denominator == 0.0:
        raise ValueError("ratio undefined: random-pair distances average to zero")
    return RatioResult(
        kind=kind.value,
        ratio=numerator / denominator,
        numerator=numerator,
        denominator=denominator,
        n_words=len(words),
        n_pairs=n_pairs,
    )


# ---------------------------------------------------------------------------
# Bag-of-characters collision statistics


@dataclass(frozen=True)
class CollisionStats:
    total_words: int
    distinct_bags: int
    colliding_word_count: int
    mean_words_per_bag: float
    max_words_per_bag: int


def collision_report(words: Sequence[str]) -> CollisionStats:
    """Group words by character multiset and report collision statistics."""
    words = [w for w in words if w]
    if not words:
        raise ValueError("collision_report needs a non-empty word list")
    bags: dict[str, int] = {}
    for w in words:
        key = bag_key(w)
        bags[key] = bags.get(key, 0) + 1
    sizes = list(bags.values())
    colliding = sum(s for s in sizes if s >= 2)
    return CollisionStats(
        total_words=len(words),
        distinct_bags=len(bags),
        colliding_word_count=colliding,
        mean_words_per_bag=len(words) / len(bags),
        max_words_per_bag=max(sizes),
    )


# ---------------------------------------------------------------------------
# Table 4 methodology: defended vs undefended downstream classification


@dataclass
class ExperimentConfig:
    """Configuration of the pipeline experiment and the sweep."""

    embed_corpus: str | None = None
    labeled_corpus: str | None = None
    dictionary: str | None = None
    model_path: str | None = None
    external_embeddings: str | None = None
    use_acd: bool = True
    use_uc: bool = True
    kinds: tuple[str, ...] = tuple(k.value for k in perturb.ALL_KINDS)
    sample_correlation: int = 100
    sample_ratio: int = 500
    hyper: Hyperparams = field(default_factory=Hyperparams)
    index_n: int | None = None
    min_count: int = 1
    pick: str = "random"
    max_cluster_words: int = 20000
    split_fraction: float = 0.8
    l2_strength: float = 1e-4
    clf_epochs: int = 300
    clf_lr: float = 0.5
    embed_runs: int = 3
    clf_runs: int = 3
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.split_fraction < 1.0:
            raise ValueError("split_fraction must be in (0, 1)")
        if self.embed_runs < 1 or self.clf_runs < 1:
            raise ValueError("embed_runs and clf_runs must be ≥ 1")
        if self.sample_correlation < 2 or self.sample_ratio < 2:
            raise ValueError("sample sizes must be ≥ 2")

    def fingerprint(self) -> str:
        return config_fingerprint(asdict(self))


@dataclass(frozen=True)
class PipelineResult:
    original_auc_mean: float
    original_auc_std: float
    perturbed_auc_mean: float
    perturbed_auc_std: float
    runs: tuple[dict, ...]
    n_train: int
    n_test: int
    seed: int
    fingerprint: str


def _standardize_fit(features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = features.mean(axis=0)
    scale = features.std(axis=0)
    scale[scale == 0.0] = 1.0
    return mean, scale


def fit_classifier(
    features: np.ndarray,
    labels: np.ndarray,
    l2_strength: float = 1e-4,
    epochs: int = 300,
    lr: float = 0.5,
    seed: int = 0,
) -> classify.LogRegModel:
    """Standardize features, train logistic regression, and record the
    standardization in the model metadata so scoring can replay it."""
    mean, scale = _standardize_fit(np.asarray(features, dtype=np.float64))
    model = classify.train_logreg(
        (features - mean) / scale, labels, l2_strength=l2_strength, epochs=epochs, lr=lr, seed=seed
    )
    model.meta["feature_mean"] = mean.tolist()
    model.meta["feature_scale"] = scale.tolist()
    return model


def score_documents(model: classify.LogRegModel, features: np.ndarray) -> np.ndarray:
    """Apply the stored standardization (if any) and score."""
    x = np.asarray(features, dtype=np.float64)
    if "feature_mean" in model.meta:
        mean = np.array(model.meta["feature_mean"])
        scale = np.array(model.meta["feature_scale"])
        x = (x - mean) / scale
    return classify.predict_proba(model, x)


def _perturb_lines(lines: Sequence[str], kinds: Sequence[str], seed: int) -> list[str]:
    """Attack each line with uniform-random kinds (per word when all ten
    kinds are active; per line for a configured subset)."""
    all_kinds = tuple(k.value for k in perturb.ALL_KINDS)
    out = []
    for i, line in enumerate(lines):
        cfg = perturb.PerturbationConfig(rng_seed=derive_seed(seed, "line", i))
        if tuple(kinds) == all_kinds:
            out.append(perturb.perturb_document(line, cfg, kind=None))
        else:
            chosen = derive_rng(seed, "line-kind", i).choice(list(kinds))
            out.append(perturb.perturb_document(line, cfg, kind=perturb.PerturbationKind(chosen)))
    return out


def _defend_lines(lines: Sequence[str], config: ExperimentConfig) -> list[str]:
    if not (config.use_acd or config.use_uc):
        return list(lines)
    return defense.defend_lines(lines, use_acd=config.use_acd, use_uc=config.use_uc)


def doc_features(
    lines: Sequence[str], embed_fn: Callable[[str], np.ndarray], dim: int
) -> np.ndarray:
    rows = np.zeros((len(lines), dim), dtype=np.float64)
    for i, line in enumerate(lines):
        tokens = tokenize(line).tokens
        if tokens:
            rows[i] = np.mean([embed_fn(t) for t in tokens], axis=0)
    return rows


class ExternalEmbeddings:
    """Fixed word-vector table in the standard text format
    `word v1 ... vh` per line; out-of-vocabulary words map to zero."""

    def __init__(self, table: dict[str, np.ndarray], dim: int):
        self.table = table
        self.dim = dim
        self._zero = np.zeros(dim, dtype=np.float64)

    @classmethod
    def load(cls, path: str | Path) -> "ExternalEmbeddings":
        table: dict[str, np.ndarray] = {}
        dim = None
        for lineno, line in enumerate(read_lines(path), start=1):
            if not line.strip():
                continue
            parts = line.split()
            if dim is None:
                if len(parts) == 2 and parts[0].isdigit() and parts[1].isdigit():
                    continue  # optional "count dim" header line
                dim = len(parts) - 1
                if dim < 1:
                    raise ValueError(f"{path}:{lineno}: no vector components")
            if len(parts) != dim + 1:
                raise ValueError(f"{path}:{lineno}: expected {dim + 1} fields, got {len(parts)}")
            table[parts[0]] = np.array([float(v) for v in parts[1:]], dtype=np.float64)
        if not table:
            raise ValueError(f"{path}: empty embedding file")
        return cls(table, dim)

    def embed_word(self, word: str) -> np.ndarray:
        return self.table.get(word, self._zero)


def _build_embedder(
    config: ExperimentConfig, train_docs: Sequence[TokenizedDoc], run_seed: int
) -> tuple[Callable[[str], np.ndarray], int]:
    """Embedding source for one run: a freshly trained CW2V model, a loaded
    model file, or an external embedding table."""
    if config.external_embeddings:
        ext = ExternalEmbeddings.load(config.external_embeddings)
        return ext.embed_word, ext.dim
    if config.model_path:
        model = load_model(config.model_path)
        return (lambda w: embed(w, model)), model.dim
    vocab = build_vocab(train_docs, min_count=config.min_count)
    n = config.index_n if config.index_n is not None else index_size(len(vocab), config.hyper.rho)
    index = cluster_index(
        vocab,
        n,
        seed=derive_seed(config.seed, "index"),
        pick=config.pick,  # type: ignore[arg-type]
        max_cluster_words=config.max_cluster_words,
    )
    hyper = replace(config.hyper, seed=run_seed)
    model = train(train_docs, index, hyper)
    return (lambda w: embed(w, model)), model.dim


def _stratified_split(
    labels: np.ndarray, fraction: float, rng
) -> tuple[np.ndarray, np.ndarray]:
    train_idx: list[int] = []
    test_idx: list[int] = []
    for cls in (0, 1):
        members = [int(i) for i in np.flatnonzero(labels == cls)]
        rng.shuffle(members)
        cut = max(1, min(len(members) - 1, int(round(len(members) * fraction))))
        train_idx.extend(members[:cut])
        test_idx.extend(members[cut:])
    return np.array(sorted(train_idx)), np.array(sorted(test_idx))


def pipeline_experiment(config: ExperimentConfig) -> PipelineResult:
    """The downstream robustness experiment.

    For each of ``embed_runs`` embedding trainings and ``clf_runs``
    classifier runs: split the labeled corpus, train the classifier on the
    (optionally defended) training split, then measure AUC on the clean test
    split and on the test split attacked with uniform-random perturbations —
    attacks always run before defenses.  Defenses, when enabled, apply to
    the embedding corpus, the training split and both test variants.
    Reports mean ± sample standard deviation over all runs.
    """
    if not config.labeled_corpus:
        raise ValueError("pipeline_experiment requires labeled_corpus")
    labeled = classify.load_labeled(config.labeled_corpus)
    labels = labeled.labels()
    texts = labeled.texts()
    if config.embed_corpus:
        embed_lines = read_lines(config.embed_corpus)
    else:
        embed_lines = texts
    embed_docs = [tokenize(line, str(i)) for i, line in enumerate(_defend_lines(embed_lines, config))]

    runs = []
    n_train = n_test = 0
    for re_idx in range(config.embed_runs):
        embed_fn, dim = _build_embedder(
            config, embed_docs, derive_seed(config.seed, "embed", re_idx)
        )
        for sc_idx in range(config.clf_runs):
            split_rng = derive_rng(config.seed, "split", re_idx, sc_idx)
            train_idx, test_idx = _stratified_split(labels, config.split_fraction, split_rng)
            n_train, n_test = train_idx.size, test_idx.size

            train_lines = _defend_lines([texts[i] for i in train_idx], config)
            clean_test_lines = _defend_lines([texts[i] for i in test_idx], config)
            attacked = _perturb_lines(
                [texts[i] for i in test_idx],
                config.kinds,
                derive_seed(config.seed, "perturb", re_idx, sc_idx),
            )
            attacked_test_lines = _defend_lines(attacked, config)

            clf = fit_classifier(
                doc_features(train_lines, embed_fn, dim),
                labels[train_idx],
                l2_strength=config.l2_strength,
                epochs=config.clf_epochs,
                lr=config.clf_lr,
                seed=derive_seed(config.seed, "clf", re_idx, sc_idx),
            )
            y_test = labels[test_idx]
            original = classify.auc(
                score_documents(clf, doc_features(clean_test_lines, embed_fn, dim)), y_test
            )
            perturbed = classify.auc(
                score_documents(clf, doc_features(attacked_test_lines, embed_fn, dim)), y_test
            )
            runs.append(
                {
                    "embed_run": re_idx,
                    "clf_run": sc_idx,
                    "original_auc": original,
                    "perturbed_auc": perturbed,
                }
            )

    orig = np.array([r["original_auc"] for r in runs])
    pert = np.array([r["perturbed_auc"] for r in runs])
    ddof = 1 if len(runs) > 1 else 0
    return PipelineResult(
        original_auc_mean=float(orig.mean()),
        original_auc_std=float(orig.std(ddof=ddof)),
        perturbed_auc_mean=float(pert.mean()),
        perturbed_auc_std=float(pert.std(ddof=ddof)),
        runs=tuple(runs),
        n_train=n_train,
        n_test=n_test,
        seed=config.seed,
        fingerprint=config.fingerprint(),
    )


def pipeline_reports(result: PipelineResult) -> list[Report]:
    """Flatten a PipelineResult into writable Report rows."""
    common = {"seed": result.seed, "fingerprint": result.fingerprint}
    size = len(result.runs)
    reports = [
        Report("original_auc_mean", result.original_auc_mean, size, **common),
        Report("original_auc_std", result.original_auc_std, size, **common),
        Report("perturbed_auc_mean", result.perturbed_auc_mean, size, **common),
        Report("perturbed_auc_std", result.perturbed_auc_std, size, **common),
    ]
    for run in result.runs:
        tag = f"run_e{run['embed_run']}_c{run['clf_run']}"
        reports.append(Report(f"{tag}_original_auc", run["original_auc"], 1, **common))
        reports.append(Report(f"{tag}_perturbed_auc", run["perturbed_auc"], 1, **common))
    return reports


def hyperparameter_sweep(
    config: ExperimentConfig,
    h_values: Sequence[int] = (200, 300),
    window_values: Sequence[int] = (2, 3),
    rho_values: Sequence[float] = (0.005,),
) -> dict:
    """Run pipeline_experiment over the hyperparameter grid.

    Returns rows per grid point plus a soft qualitative flag on whether the
    index-size fraction rho moves AUC more than h or window do.
    """
    rows = []
    for h in h_values:
        for window in window_values:
            for rho in rho_values:
                point = replace(
                    config,
                    hyper=replace(config.hyper, h=h, window=window, rho=rho),
                    index_n=None,
                )
                result = pipeline_experiment(point)
                rows.append(
                    {
                        "h": h,
                        "window": window,
                        "rho": rho,
                        "original_auc_mean": result.original_auc_mean,
                        "original_auc_std": result.original_auc_std,
                        "perturbed_auc_mean": result.perturbed_auc_mean,
                        "perturbed_auc_std": result.perturbed_auc_std,
                    }
                )

    def spread(key: str) -> float:
        by: dict = {}
        for row in rows:
            by.setdefault(row[key], []).append(row["original_auc_mean"])
        centers = [float(np.mean(v)) for v in by.values()]
        return max(centers) - min(centers) if len(centers) > 1 else 0.0

    summary = {
        "rho_spread": spread("rho"),
        "h_spread": spread("h"),
        "window_spread": spread("window"),
    }
    summary["rho_dominates"] = summary["rho_spread"] >= max(
        summary["h_spread"], summary["window_spread"]
    )
    return {
        "rows": rows,
        "summary": summary,
        "seed": config.seed,
        "fingerprint": config.fingerprint(),
    }


def write_sweep(base: str | Path, sweep: dict) -> tuple[Path, Path]:
    base = Path(base)
    header = (
        "h",
        "window",
        "rho",
        "original_auc_mean",
        "original_auc_std",
        "perturbed_auc_mean",
        "perturbed_auc_std",
    )
    rows = [[repr(row[k]) if isinstance(row[k], float) else row[k] for k in header] for row in sweep["rows"]]
    tsv = base.with_suffix(".tsv")
    json_path = base.with_suffix(".json")
    write_tsv(tsv, header, rows)
    write_json(json_path, sweep)
    return tsv, json_path
