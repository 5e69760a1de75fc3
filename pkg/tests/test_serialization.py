"""Tests for YAML documents, MatrixMarket I/O, CSV writing and PGM images."""

import enum
import math
from pathlib import Path

import numpy as np
import pytest
import yaml

from adaptive_bk.config import ExperimentConfig
from adaptive_bk.serialization import (
    TRACE_COLUMNS,
    dump_yaml,
    format_number,
    load_config_document,
    load_pgm,
    prepare_for_serialization,
    read_matrix,
    read_trace_csv,
    read_vector,
    save_pgm,
    write_csv,
    write_matrix,
    write_trace_csv,
)


class Color(enum.Enum):
    RED = "red"


class TestPrepareForSerialization:
    def test_numpy_values(self):
        data = prepare_for_serialization(
            {"a": np.float64(1.5), "b": np.int64(3), "c": np.arange(3), "d": np.bool_(True)}
        )
        assert data == {"a": 1.5, "b": 3, "c": [0, 1, 2], "d": True}
        assert type(data["a"]) is float
        assert type(data["b"]) is int

    def test_non_finite_becomes_none(self):
        assert prepare_for_serialization({"x": float("nan"), "y": [np.inf]}) == {
            "x": None,
            "y": [None],
        }

    def test_enum_and_path(self):
        data = prepare_for_serialization({"c": Color.RED, "p": Path("out/x")})
        assert data == {"c": "red", "p": "out/x"}

    def test_model_uses_aliases(self, tiny_config_data):
        cfg = ExperimentConfig.model_validate(tiny_config_data)
        data = prepare_for_serialization({"cfg": cfg})
        assert data["cfg"]["methods"][0]["lambda"] == 0.05


class TestDumpYaml:
    def test_envelope(self, tmp_path):
        path = tmp_path / "nested" / "doc.yaml"
        dump_yaml({"x": 1}, path, kind="summary")
        raw = yaml.safe_load(path.read_text())
        assert raw["_metadata"]["kind"] == "summary"
        assert "version" in raw["_metadata"]
        assert raw["configuration"] == {"x": 1}

    def test_without_metadata(self, tmp_path):
        path = tmp_path / "doc.yaml"
        dump_yaml({"x": [1, 2]}, path, include_metadata=False)
        assert yaml.safe_load(path.read_text()) == {"x": [1, 2]}

    def test_no_aliases(self, tmp_path):
        shared = {"a": 1}
        path = tmp_path / "doc.yaml"
        dump_yaml({"first": shared, "second": shared}, path, include_metadata=False)
        text = path.read_text()
        assert "&" not in text and "*" not in text

    def test_config_roundtrip(self, tmp_path, tiny_config_data):
        cfg = ExperimentConfig.model_validate(tiny_config_data)
        path = tmp_path / "cfg.yaml"
        dump_yaml(cfg, path, kind="experiment")
        assert ExperimentConfig.model_validate(load_config_document(path)) == cfg


class TestLoadConfigDocument:
    def test_plain_mapping(self, tmp_path):
        path = tmp_path / "plain.yaml"
        path.write_text("epochs: 3\n")
        assert load_config_document(path) == {"epochs": 3}

    def test_json_is_yaml(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text('{"epochs": 4, "trials": 2}')
        assert load_config_document(path) == {"epochs": 4, "trials": 2}


class TestMatrixMarket:
    def test_matrix_and_vector(self, tmp_path, rng):
        a = rng.standard_normal((4, 3))
        write_matrix(tmp_path / "a.mtx", a, comment="test")
        np.testing.assert_allclose(read_matrix(tmp_path / "a.mtx"), a)

        b = rng.standard_normal(4)
        write_matrix(tmp_path / "b.mtx", b)
        np.testing.assert_allclose(read_vector(tmp_path / "b.mtx"), b)


class TestCsv:
    def test_format_number(self):
        assert format_number(3) == "3"
        assert format_number(np.int64(7)) == "7"
        assert format_number(0.1) == "0.10000000000000001"
        assert format_number(float("nan")) == ""
        assert format_number(None) == ""

    def test_write_csv(self, tmp_path):
        path = tmp_path / "out" / "curve.csv"
        write_csv(path, ["k", "v"], [[0, 1.0], [5, float("nan")]])
        assert path.read_text() == "k,v\n0,1\n5,\n"

    def test_trace_roundtrip(self, tmp_path):
        d = np.array([1.0, 0.5, 0.25, 0.0])
        path = tmp_path / "trace.csv"
        write_trace_csv(path, d)
        assert path.read_text().splitlines()[0] == ",".join(TRACE_COLUMNS)
        np.testing.assert_array_equal(read_trace_csv(path), d)

    def test_trace_rows_sorted_by_j(self, tmp_path):
        path = tmp_path / "trace.csv"
        path.write_text("j,bregman_to_final\n1,0.5\n0,1.0\n2,0.1\n")
        np.testing.assert_array_equal(read_trace_csv(path), [1.0, 0.5, 0.1])


class TestPgm:
    def test_save_and_load(self, tmp_path):
        image = np.array([[0.0, 0.5], [1.0, 0.25]])
        path = tmp_path / "img.pgm"
        save_pgm(path, image)
        assert path.read_bytes().startswith(b"P5\n2 2\n255\n")
        loaded = load_pgm(path)
        np.testing.assert_allclose(loaded, image, atol=1 / 255)

    def test_header_comments(self, tmp_path):
        path = tmp_path / "img.pgm"
        path.write_bytes(b"P5\n# made by hand\n3 1\n255\n" + bytes([0, 255, 51]))
        np.testing.assert_allclose(load_pgm(path), [[0.0, 1.0, 0.2]])

    def test_sixteen_bit(self, tmp_path):
        path = tmp_path / "img.pgm"
        pixels = np.array([0, 1000], dtype=">u2").tobytes()
        path.write_bytes(b"P5 2 1 1000\n" + pixels)
        np.testing.assert_allclose(load_pgm(path), [[0.0, 1.0]])

    def test_constant_image(self, tmp_path):
        path = tmp_path / "flat.pgm"
        save_pgm(path, np.full((2, 3), 0.7))
        assert load_pgm(path).shape == (2, 3)
        assert math.isclose(float(load_pgm(path).max()), 0.0)
