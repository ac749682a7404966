"""Tests for digests and tolerance handling."""

import pytest

from src.exceptions import ScenarioError
from src.utils import (
    canonical_json,
    default_tolerance,
    inputs_digest,
    parse_tolerance_overrides,
    resolve_tolerance,
)


class TestDigest:
    def test_key_order_irrelevant(self):
        assert canonical_json({"b": 1, "a": [1.5, "x"]}) == '{"a":[1.5,"x"],"b":1}'
        assert inputs_digest({"a": 1, "b": 2}) == inputs_digest({"b": 2, "a": 1})

    def test_parts_matter(self):
        assert inputs_digest("stokes", {"q": 1}) != inputs_digest("stokes", {"q": 2})
        assert len(inputs_digest("x")) == 64


class TestToleranceParsing:
    def test_pairs(self):
        assert parse_tolerance_overrides(["pl=1e-2", "stokes[bulge]=0.5"]) == {"pl": 1e-2, "stokes[bulge]": 0.5}

    def test_name_with_equals(self):
        assert parse_tolerance_overrides(["flatness[q=1]=2"]) == {"flatness[q=1]": 2.0}

    def test_later_wins(self):
        assert parse_tolerance_overrides(["pl=1", "pl=2"]) == {"pl": 2.0}

    def test_empty(self):
        assert parse_tolerance_overrides(None) == {}

    @pytest.mark.parametrize("item", ["pl", "=1", "pl=abc", "pl=-1"])
    def test_invalid(self, item):
        with pytest.raises(ScenarioError):
            parse_tolerance_overrides([item])


class TestToleranceResolution:
    def test_class_default(self):
        assert resolve_tolerance("stokes[bulge]", "pl") == default_tolerance("pl")

    def test_specificity(self):
        scenario = {"stokes[bulge]": 1e-4}
        flags = {"pl": 0.5, "stokes": 0.25}
        # the exact name in the scenario beats the family and class given on the command line
        assert resolve_tolerance("stokes[bulge]", "pl", scenario, flags) == 1e-4
        assert resolve_tolerance("stokes[sheet]", "pl", scenario, flags) == 0.25
        assert resolve_tolerance("twisting[tri]", "pl", scenario, flags) == 0.5

    def test_later_table_wins_at_same_level(self):
        assert resolve_tolerance("ds[bulge]", "pl", {"ds": 1.0}, {"ds": 2.0}) == 2.0

    def test_unknown_class(self):
        with pytest.raises(ScenarioError):
            default_tolerance("rough")
