import json

import pytest

from src.errors import InvalidArgumentError, ResultsIOError
from src.harness import SerRecord, SerResult, clopper_pearson, read_results, run_experiment, write_results
from src.harness.results import CSV_COLUMNS


@pytest.fixture
def result():
    records = [
        SerRecord("coarse_ml", 4.0, 2000, 37, 1000, 30, 0.25),
        SerRecord("model_driven", 4.0, 2000, 12, 1000, 11, 1.5),
        SerRecord("coarse_ml", 8.0, 2000, 3, 1000, 3, 0.125),
        SerRecord("model_driven", 8.0, 2000, 0, 1000, 0, 1.0),
    ]
    return SerResult(records, config={"seed": 17, "frames": 2})


def test_rates(result):
    assert result.ser("coarse_ml", 4.0) == 37 / 2000
    assert result.record("model_driven", 4.0).ver == 11 / 1000
    assert result.detectors == ["coarse_ml", "model_driven"]
    assert result.snr_points == [4.0, 8.0]
    with pytest.raises(KeyError):
        result.record("naive_dnn", 4.0)


def test_csv_header_and_roundtrip(result, tmp_path):
    path = write_results(result, tmp_path / "out" / "ser.csv", "csv")
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "detector,snr_db,symbols,symbol_errors,ser,vectors,vector_errors,ver,seconds"
    assert tuple(lines[0].split(",")) == CSV_COLUMNS
    assert lines[1] == "coarse_ml,4.0,2000,37,0.0185,1000,30,0.03,0.25"
    assert read_results(path).records == result.records


def test_json_carries_config_and_seed(result, tmp_path):
    path = write_results(result, tmp_path / "ser.json", "json")
    payload = json.loads(path.read_text(encoding="utf-8"))
    assert payload["seed"] == 17
    assert payload["config"]["frames"] == 2
    assert payload["records"][0]["ser"] == 37 / 2000
    loaded = read_results(path)
    assert loaded.records == result.records
    assert loaded.config == result.config


def test_write_errors_carry_path(result, tmp_path):
    target = tmp_path / "taken"
    target.mkdir()
    with pytest.raises(ResultsIOError, match="taken"):
        write_results(result, target, "csv")
    with pytest.raises(InvalidArgumentError):
        write_results(result, tmp_path / "x", "xml")


def test_read_errors(tmp_path):
    with pytest.raises(ResultsIOError):
        read_results(tmp_path / "missing.csv")
    bad = tmp_path / "bad.csv"
    bad.write_text("detector,snr_db\ncoarse_ml,oops\n", encoding="utf-8")
    with pytest.raises(ResultsIOError):
        read_results(bad)


def test_record_consistency():
    with pytest.raises(InvalidArgumentError):
        SerRecord("coarse_ml", 0.0, 10, 11, 5, 0)
    with pytest.raises(InvalidArgumentError):
        SerResult([SerRecord("a", 0.0, 10, 1, 5, 1), SerRecord("b", 0.0, 12, 1, 6, 1)])


def test_clopper_pearson():
    lower, upper = clopper_pearson(0, 100)
    assert lower == 0.0
    assert upper == pytest.approx(1 - 0.025 ** (1 / 100), rel=1e-9)
    lower, upper = clopper_pearson(100, 100)
    assert upper == 1.0
    assert lower == pytest.approx(0.025 ** (1 / 100), rel=1e-9)
    lower, upper = clopper_pearson(37, 2000)
    assert lower < 37 / 2000 < upper
    wide = clopper_pearson(37, 2000, level=0.99)
    assert wide[0] < lower and wide[1] > upper
    with pytest.raises(InvalidArgumentError):
        clopper_pearson(3, 0)


def test_interval(result):
    lower, upper = result.interval("coarse_ml", 4.0)
    assert lower < result.ser("coarse_ml", 4.0) < upper


def test_repeated_runs_are_byte_identical(tiny_config, tmp_path):
    first = write_results(run_experiment(tiny_config), tmp_path / "a.csv").read_bytes()
    second = write_results(run_experiment(tiny_config), tmp_path / "b.csv").read_bytes()
    assert first == second
