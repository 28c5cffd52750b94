import numpy as np
import pytest

from crewsched import serialize
from crewsched.errors import FormatError
from crewsched.extraction import CoefficientMatrix
from crewsched.generator import GeneratorConfig, default_desk_profile, generate_instance
from crewsched.domain import Schedule
from crewsched.rl.net import init_weights

from conftest import constant_policy


@pytest.fixture(scope="module")
def instance():
    return generate_instance(default_desk_profile(), GeneratorConfig(1.0, 1, 7))


class TestInstanceFiles:
    def test_round_trip(self, tmp_path, instance):
        path = tmp_path / "inst.json"
        serialize.save_instance(path, instance)
        assert serialize.load_instance(path) == instance

    def test_byte_identical_rewrites(self, tmp_path, instance):
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        serialize.save_instance(p1, instance)
        serialize.save_instance(p2, instance)
        assert p1.read_bytes() == p2.read_bytes()

    def test_format_version_header_present(self, tmp_path, instance):
        path = tmp_path / "inst.json"
        serialize.save_instance(path, instance)
        import json

        payload = json.loads(path.read_text())
        assert payload["format_version"] == 1
        assert payload["kind"] == "instance"

    def test_wrong_kind_rejected(self, tmp_path, instance):
        path = tmp_path / "inst.json"
        serialize.save_instance(path, instance)
        with pytest.raises(FormatError):
            serialize.load_schedule(path)

    def test_unsupported_version_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"format_version": 99, "kind": "instance"}')
        with pytest.raises(FormatError):
            serialize.load_instance(path)

    def test_malformed_json_rejected(self, tmp_path):
        path = tmp_path / "garbage.json"
        path.write_text("not json at all {")
        with pytest.raises(FormatError):
            serialize.load_instance(path)


class TestScheduleFiles:
    def test_round_trip(self, tmp_path):
        sched = Schedule({0: 3, 5: 1, 2: 0}, complete=False)
        path = tmp_path / "sched.json"
        serialize.save_schedule(path, sched)
        assert serialize.load_schedule(path) == sched


class TestProfileFiles:
    def test_round_trip(self, tmp_path):
        profile = default_desk_profile()
        path = tmp_path / "profile.json"
        serialize.save_profile(path, profile)
        assert serialize.load_profile(path) == profile


class TestWeightsFiles:
    def test_round_trip_exact_floats(self, tmp_path):
        rng = np.random.default_rng(0)
        weights = init_weights(20, 4, (8, 6), rng, metadata={"horizon": 7, "seed": 1})
        path = tmp_path / "weights.json"
        serialize.save_weights(path, weights)
        loaded = serialize.load_weights(path)
        assert loaded.input_dim == weights.input_dim
        assert loaded.hidden == weights.hidden
        assert loaded.metadata == weights.metadata
        for key in weights.params:
            np.testing.assert_array_equal(loaded.params[key], weights.params[key])


class TestCoefficientFiles:
    def test_round_trip(self, tmp_path):
        matrix = CoefficientMatrix(
            values={(0, 1): 0.25, (3, 2): 1.0}, method="montecarlo", n=4, metadata={"seed": 9}
        )
        path = tmp_path / "coeffs.json"
        serialize.save_coefficients(path, matrix)
        loaded = serialize.load_coefficients(path)
        assert loaded == matrix
