import json

from src.main import build_parser, main


def test_every_config_key_has_a_flag():
    args = build_parser().parse_args(["simulate", "--snr-db", "0,4", "--kappa-tx", "0.01", "--debug-dumps", "d"])
    assert (args.snr_db, args.kappa_tx, args.debug_dumps) == ("0,4", "0.01", "d")


def test_detectors_command(capsys):
    assert main(["detectors"]) == 0
    assert capsys.readouterr().out.split() == ["coarse_ml", "data_driven", "model_driven", "naive_dnn"]


def test_simulate_writes_results(tmp_path, capsys):
    out = tmp_path / "ser.json"
    argv = [
        "simulate",
        "--no-progress",
        "--log-level", "WARNING",
        "--nt", "1",
        "--nr", "2",
        "--t", "24",
        "--frames", "1",
        "--snr-db", "5,10",
        "--detectors", "coarse_ml,model_driven",
        "--emnl-iterations", "2",
        "--seed", "3",
        "--out", str(out),
        "--format", "json",
    ]
    assert main(argv) == 0
    payload = json.loads(out.read_text(encoding="utf-8"))
    assert payload["seed"] == 3
    assert len(payload["records"]) == 4
    table = capsys.readouterr().out.splitlines()
    assert table[0].split() == ["snr_db", "coarse_ml", "model_driven"]
    assert [line.split()[0] for line in table[1:]] == ["5", "10"]


def test_config_errors_exit_2(tmp_path, capsys):
    assert main(["simulate", "--no-progress", "--frames", "0"]) == 2
    assert "frames" in capsys.readouterr().err
    bad = tmp_path / "x.conf"
    bad.write_text("nonsense\n", encoding="utf-8")
    assert main(["simulate", "--no-progress", "--config", str(bad)]) == 2
    for flag, value in [("--lr0", "-1"), ("--emnl-eps", "2"), ("--nu-floor", "0"), ("--hidden", "0")]:
        assert main(["simulate", "--no-progress", flag, value]) == 2, flag


def test_runtime_errors_exit_1(tmp_path):
    blocked = tmp_path / "dir"
    blocked.mkdir()
    argv = ["simulate", "--no-progress", "--nt", "1", "--nr", "2", "--t", "8", "--frames", "1", "--snr-db", "5"]
    assert main(argv + ["--detectors", "coarse_ml", "--out", str(blocked)]) == 1
