"""cw2v: adversarial text perturbations, rule-based defenses, and
spelling-aware word embeddings, plus the evaluation harness used to
study them."""

__version__ = "0.1.0"
