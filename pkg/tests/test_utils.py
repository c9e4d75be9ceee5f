import logging
import os
import tempfile
from fractions import Fraction

import pytest

from propcalc.errors import InvalidLabel
from propcalc.utils import (
    canonical_json,
    check_label,
    content_hash,
    dual_label,
    format_rational,
    setup_logger,
    sum_label,
    tensor_label,
    word_label,
)


class TestLabels:
    def test_plain_label(self):
        assert check_label("x0") == "x0"

    @pytest.mark.parametrize("label", ["", "a⋆b", "a*", "P|x", "(x)"])
    def test_reserved_or_empty(self, label):
        with pytest.raises(InvalidLabel):
            check_label(label)

    def test_tensor_wraps_composites(self):
        assert tensor_label("a", "b") == "a⋆b"
        assert tensor_label("a⋆b", "c") == "(a⋆b)⋆c"
        assert tensor_label(sum_label("P0", "x"), "y") == "(P0|x)⋆y"

    def test_word_label(self):
        assert word_label(()) == "1"
        assert word_label(("tau", "rho0")) == "tau⋆rho0"

    def test_dual_label(self):
        assert dual_label("a") == "a*"
        assert dual_label("a⋆b") == "(a⋆b)*"


class TestFormatting:
    def test_format_rational(self):
        assert format_rational(Fraction(4, 2)) == "2"
        assert format_rational(Fraction(-1, 3)) == "-1/3"

    def test_canonical_json_sorts_keys(self):
        text = canonical_json({"b": 1, "a": "τ"})
        assert text.index('"a"') < text.index('"b"')
        assert "τ" in text
        assert text.endswith("\n")

    def test_content_hash(self):
        assert content_hash("x") == content_hash(b"x")
        assert content_hash("x").startswith("sha256:")
        assert content_hash("x") != content_hash("y")


class TestSetupLogger:
    def test_returns_logger(self):
        logger = setup_logger()
        assert logger.name == "propcalc"
        assert logger.level == logging.INFO

    def test_verbose(self):
        assert setup_logger(verbose=True).level == logging.DEBUG

    def test_file_handler(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            log_path = os.path.join(tmpdir, "test.log")
            logger = setup_logger(log_path)
            logger.info("test message")
            for h in logger.handlers:
                h.flush()
            with open(log_path) as f:
                content = f.read()
            assert "test message" in content
            for h in list(logger.handlers):
                logger.removeHandler(h)
                h.close()

    def test_replaces_handlers(self):
        setup_logger()
        logger = setup_logger()
        assert len(logger.handlers) == 1
