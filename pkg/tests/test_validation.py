"""Tests for input validation utilities."""

import pytest

from gatekeeper_ensemble.utils.validation import (
    ConfigurationError,
    EnsembleError,
    ParseError,
    PoolValidationError,
    parse_branch_spec,
    parse_branch_specs,
    parse_class_set,
    parse_counts,
    parse_int_list,
    parse_label,
    parse_role_overrides,
)


class TestParseLabel:
    """Tests for label parsing."""

    def test_valid_labels(self):
        assert parse_label("0") == 0
        assert parse_label(" 8 ") == 8

    @pytest.mark.parametrize("text", ["9", "-1", "seven", "", "1.0"])
    def test_invalid_labels(self, text):
        with pytest.raises(ValueError):
            parse_label(text)


class TestParseClassSet:
    def test_range(self):
        assert parse_class_set("1-8") == set(range(1, 9))

    def test_mixed(self):
        assert parse_class_set("1-3,6") == {1, 2, 3, 6}
        assert parse_class_set("0,7") == {0, 7}

    def test_empty_range_rejected(self):
        with pytest.raises(ValueError):
            parse_class_set("5-2")

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            parse_class_set("1-9")


class TestParseCounts:
    """Tests for per-class count parsing."""

    def test_positional(self):
        counts = parse_counts("244,88,54,83,67,34,135,794,21")
        assert counts[0] == 244
        assert counts[8] == 21
        assert len(counts) == 9

    def test_pairs(self):
        assert parse_counts("7=794, 8=21") == {7: 794, 8: 21}

    def test_duplicate_class(self):
        with pytest.raises(ValueError):
            parse_counts("7=1,7=2")

    def test_non_integer(self):
        with pytest.raises(ValueError):
            parse_counts("1,x")

    def test_empty(self):
        with pytest.raises(ValueError):
            parse_counts("")


def test_parse_int_list():
    assert parse_int_list("6,9,12") == [6, 9, 12]
    with pytest.raises(ValueError):
        parse_int_list("6,a")
    with pytest.raises(ValueError):
        parse_int_list(",")


class TestBranchSpecs:
    """Tests for branch[:folds] parsing."""

    def test_branch_only(self):
        assert parse_branch_spec("qwen-9c") == ("qwen-9c", None)

    def test_branch_with_folds(self):
        assert parse_branch_spec("gk:0,2,4") == ("gk", [0, 2, 4])
        assert parse_branch_spec("gk:1+3") == ("gk", [1, 3])

    def test_duplicate_fold(self):
        with pytest.raises(ValueError):
            parse_branch_spec("gk:1,1")

    def test_invalid(self):
        with pytest.raises(ValueError):
            parse_branch_spec("1gk")
        with pytest.raises(ValueError):
            parse_branch_spec("gk:")

    def test_comma_joined_and_repeated(self):
        specs = parse_branch_specs(["a:0,1,b", "c:2"])
        assert specs == [("a", [0, 1]), ("b", None), ("c", [2])]


def test_parse_role_overrides():
    assert parse_role_overrides(["phi=specialist", "qwen = gatekeeper"]) == {
        "phi": "specialist",
        "qwen": "gatekeeper",
    }
    with pytest.raises(ValueError):
        parse_role_overrides(["phi"])
    with pytest.raises(ValueError):
        parse_role_overrides(["phi=judge"])


class TestErrors:
    def test_hierarchy(self):
        assert issubclass(ConfigurationError, EnsembleError)
        assert issubclass(ParseError, EnsembleError)
        assert issubclass(PoolValidationError, EnsembleError)

    def test_parse_error_location(self):
        err = ParseError("preds.csv", 4, 2, "x", "label must be an integer")
        assert str(err).startswith("preds.csv:4:2:")
        assert err.line == 4
        assert err.column == 2

    def test_parse_error_without_column(self):
        assert str(ParseError("p.csv", 1, None, "", "empty file")).startswith("p.csv:1:")

    def test_pool_validation_error_truncates(self):
        err = PoolValidationError([f"v{i}" for i in range(7)])
        assert "7 violation(s)" in str(err)
        assert "(+2 more)" in str(err)
        assert len(err.violations) == 7
