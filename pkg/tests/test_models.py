"""Tests for scenario and report models: validation, defaults, serialization."""

import math

import pytest
from pydantic import ValidationError

from src.models import CheckRecord, FamilySpec, FormSpec, Report, Scenario, SimplexSpec


def scenario(**overrides):
    document = {"name": "s", "chart": {"names": ["x1", "x2"]}, "dims": {"0": 1, "1": 1}}
    document.update(overrides)
    return Scenario.model_validate(document)


def record(name="flatness[q=0]", residual=0.0, tolerance=1e-10, passed=True):
    return CheckRecord(name=name, suite="check-flat", inputs_digest="0" * 64,
                       residual=residual, tolerance=tolerance, passed=passed)


class TestScenario:
    def test_defaults(self):
        s = scenario()
        assert s.total_dim == 2
        assert s.dims == {0: 1, 1: 1}
        assert s.random_words == 50
        assert s.face_lemma_k == [2, 3, 4]
        assert s.forms == [] and s.gauge is None

    def test_matrix_size(self):
        with pytest.raises(ValidationError):
            scenario(forms=[{"p": 1, "terms": [{"dx": ["x1"], "matrix": [["1"]]}]}])

    def test_form_degree_mismatch(self):
        with pytest.raises(ValidationError):
            FormSpec.model_validate({"p": 2, "terms": [{"dx": ["x1"], "matrix": [[0]]}]})

    def test_duplicate_form(self):
        form = {"p": 0, "terms": [{"dx": [], "matrix": [[0, 0], [1, 0]]}]}
        with pytest.raises(ValidationError):
            scenario(forms=[form, form])

    def test_form_outside_chart(self):
        with pytest.raises(ValidationError):
            scenario(forms=[{"p": 1, "terms": [{"dx": ["x3"], "matrix": [[0, 0], [0, 0]]}]}])

    def test_zero_space(self):
        with pytest.raises(ValidationError):
            scenario(dims={"0": 0})

    def test_unknown_simplex_in_word(self):
        with pytest.raises(ValidationError):
            scenario(words=[{"name": "w", "letters": [{"simplex": "nowhere"}]}])

    def test_short_chain(self):
        with pytest.raises(ValidationError):
            scenario(chains=[{"name": "c", "barycenters": [[0.5, 0.5]]}])

    def test_bounds_shape(self):
        with pytest.raises(ValidationError):
            scenario(chart={"names": ["x1", "x2"], "bounds": [[0, 1]]})


class TestFamilySpec:
    def test_parameter_names(self):
        with pytest.raises(ValidationError):
            FamilySpec(name="f", params=["s"], components=["t", "s"])

    def test_w_length(self):
        with pytest.raises(ValidationError):
            FamilySpec(name="f", params=["w1"], components=["t", "w1"], w=[0.1, 0.2])

    def test_u_mid_range(self):
        with pytest.raises(ValidationError):
            FamilySpec(name="f", components=["t", "t"], u_mid=1.5)


class TestSimplexSpec:
    def test_dim_from_points(self):
        assert SimplexSpec(name="tri", points=[[0, 0], [1, 0], [1, 1]]).dim == 2

    def test_exactly_one_description(self):
        with pytest.raises(ValidationError):
            SimplexSpec(name="s", dim=1, components=["y1", "0"], points=[[0, 0], [1, 1]])
        with pytest.raises(ValidationError):
            SimplexSpec(name="s")

    def test_components_need_dim(self):
        with pytest.raises(ValidationError):
            SimplexSpec(name="s", components=["y1", "0"])

    def test_inconsistent_dim(self):
        with pytest.raises(ValidationError):
            SimplexSpec(name="s", dim=2, points=[[0, 0], [1, 1]])


class TestReport:
    def test_verdict_consistency(self):
        with pytest.raises(ValidationError):
            record(residual=1.0, passed=True)

    def test_nan_fails(self):
        assert not record(residual=math.nan, passed=False).passed

    def test_exit_code(self):
        report = Report(scenario="s", checks=[record(), record("flatness[q=1]", 1.0, 1e-10, False)])
        assert not report.passed
        assert report.exit_code == 1
        assert Report(scenario="s", checks=[record()]).exit_code == 0

    def test_body_excludes_timing(self):
        report = Report(scenario="s", checks=[record()], timing={"run": 1.0})
        assert report.body() == [record().model_dump()]
        assert "timing" not in report.body()[0]
