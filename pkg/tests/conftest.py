"""Shared fixtures.

The expensive artifacts (synthetic corpora, a trained reference model) are
session-scoped so the evaluation-harness tests and the acceptance suite
reuse one training run.
"""

from __future__ import annotations

import re

import pytest

from cw2v.datagen import make_sentences, write_labeled_corpus
from cw2v.embedding import Hyperparams, train
from cw2v.tokenizer import TokenizedDoc, tokenize_lines
from cw2v.vocab import SpellingIndex, build_vocab, cluster_index


@pytest.fixture()
def tiny_index():
    return SpellingIndex(words=("like", "win", "zzzz"))


@pytest.fixture()
def tiny_model(tiny_index):
    docs = [
        TokenizedDoc(tokens=tuple(s.split()))
        for s in ("like win like zzzz", "win like win zzzz")
    ]
    hyper = Hyperparams(h=4, window=2, max_epochs=4, batch_size=4, seed=0, subsample_t=10.0)
    return train(docs, tiny_index, hyper)


@pytest.fixture(scope="session")
def sentence_corpus():
    return make_sentences(2400, seed=1)


@pytest.fixture(scope="session")
def corpus_docs(sentence_corpus):
    return list(tokenize_lines(sentence_corpus))


@pytest.fixture(scope="session")
def corpus_vocab(corpus_docs):
    return build_vocab(corpus_docs)


@pytest.fixture(scope="session")
def reference_index(corpus_vocab):
    return cluster_index(corpus_vocab, 500, seed=5)


@pytest.fixture(scope="session")
def reference_model(corpus_docs, reference_index, corpus_vocab):
    hyper = Hyperparams(
        rho=len(reference_index) / len(corpus_vocab),
        h=50,
        window=2,
        learning_rate=0.05,
        batch_size=64,
        max_epochs=20,
        patience=3,
        seed=3,
    )
    return train(corpus_docs, reference_index, hyper)


@pytest.fixture(scope="session")
def small_model(corpus_docs, corpus_vocab):
    index = cluster_index(corpus_vocab, 60, seed=5)
    hyper = Hyperparams(h=16, window=2, batch_size=64, max_epochs=6, seed=3)
    return train(corpus_docs[:400], index, hyper)


@pytest.fixture(scope="session")
def labeled_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "labeled.tsv"
    write_labeled_corpus(path, 2000, seed=2)
    return path


# --------------------------------------------------------------------------
# Acceptance summary: one line per numbered criterion at the end of the run.

_CRITERION_RE = re.compile(r"test_criterion_(\d+)")

_CRITERION_TITLES = {
    1: "string similarity oracle [exact]",
    2: "defense round-trips [exact]",
    3: "bag-of-characters collision statistics [quantitative]",
    4: "gradient correctness [property]",
    5: "spelling-embedding correlation [directional]",
    6: "perturbation ratio direction [directional]",
    7: "pipeline robustness direction [directional]",
    8: "determinism [exact]",
    9: "classifier AUC oracle [exact]",
}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes = {}
    for status in ("passed", "failed", "error", "skipped"):
        for report in terminalreporter.stats.get(status, []):
            match = _CRITERION_RE.search(getattr(report, "nodeid", ""))
            if match and getattr(report, "when", "call") in ("call", "setup"):
                num = int(match.group(1))
                label = {"passed": "PASS", "skipped": "SKIP"}.get(status, "FAIL")
                if num not in outcomes or label == "FAIL":
                    outcomes[num] = label
    if not outcomes:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for num in sorted(_CRITERION_TITLES):
        label = outcomes.get(num, "NOT RUN")
        title = _CRITERION_TITLES[num]
        terminalreporter.write_line(f"CRITERION {num} — {title}: {label}")
