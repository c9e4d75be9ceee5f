#!/usr/bin/env python3

import hashlib
import json
import logging
import sys
from fractions import Fraction

from propcalc.errors import InvalidLabel

TENSOR = "⋆"
DUAL = "*"
SUM = "|"
RESERVED = (TENSOR, DUAL, SUM, "(", ")")
UNIT_LABEL = "1"


def check_label(label: str) -> str:
    """
    Validate a user-supplied basis label.

    Labels are non-empty strings free of the reserved characters used to
    build composite labels.
    """
    if not isinstance(label, str) or not label:
        raise InvalidLabel(str(label), "labels must be non-empty strings")
    for ch in RESERVED:
        if ch in label:
            raise InvalidLabel(label, f"contains reserved character {ch!r}")
    return label


def wrap(label: str) -> str:
    if TENSOR in label or SUM in label:
        return f"({label})"
    return label


def tensor_label(a: str, b: str) -> str:
    return f"{wrap(a)}{TENSOR}{wrap(b)}"


def word_label(word: tuple[str, ...]) -> str:
    """Label of a tensor word x1⋆x2⋆...; the empty word is the unit."""
    if not word:
        return UNIT_LABEL
    return TENSOR.join(wrap(x) for x in word)


def dual_label(a: str) -> str:
    return f"{wrap(a)}{DUAL}"


def sum_label(tag: str, label: str) -> str:
    return f"{tag}{SUM}{label}"


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def canonical_json(data) -> str:
    return json.dumps(data, sort_keys=True, ensure_ascii=False, indent=2) + "\n"


def content_hash(text: str | bytes) -> str:
    if isinstance(text, str):
        text = text.encode("utf-8")
    return "sha256:" + hashlib.sha256(text).hexdigest()


def setup_logger(log_file: str | None = None, verbose: bool = False) -> logging.Logger:
    """
    Set up the package logger, writing to a file or to stderr.
    """
    logger = logging.getLogger("propcalc")
    logger.setLevel(logging.DEBUG if verbose else logging.INFO)
    if log_file is not None:
        handler: logging.Handler = logging.FileHandler(log_file)
    else:
        handler = logging.StreamHandler(sys.stderr)
    formatter = logging.Formatter(
        "%(asctime)s - %(levelname)s - %(message)s", datefmt="%Y-%m-%d %H:%M:%S"
    )
    handler.setFormatter(formatter)
    for old in list(logger.handlers):
        logger.removeHandler(old)
        old.close()
    logger.addHandler(handler)
    return logger
