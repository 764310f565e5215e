import json
import threading

from rtplab.cli import main

MATRIX = {
    "master_seed": 5,
    "profiles": ["s06"],
    "plr": [0.0, 30.0],
    "defaults": {"duration_s": 1.0, "timeout_s": 2.0},
}


def test_run_and_summarize(tmp_path, capsys):
    matrix_path = tmp_path / "matrix.json"
    matrix_path.write_text(json.dumps(MATRIX))
    out_dir = tmp_path / "out"

    assert main(["run", "--matrix", str(matrix_path), "--out", str(out_dir)]) == 0
    assert (out_dir / "summary.csv").exists()
    assert "2/2 runs ok" in capsys.readouterr().out

    # resume pass: all cells skipped
    assert main(["run", "--matrix", str(matrix_path), "--out", str(out_dir)]) == 0
    assert capsys.readouterr().out.count("skip ") == 2

    assert main(["summarize", "--out", str(out_dir)]) == 0
    assert "2 rows" in capsys.readouterr().out


def test_run_with_failing_cell_exits_2(tmp_path, capsys):
    bad = dict(MATRIX, defaults={"duration_s": -1.0})
    matrix_path = tmp_path / "matrix.json"
    matrix_path.write_text(json.dumps(bad))
    assert main(["run", "--matrix", str(matrix_path), "--out", str(tmp_path / "out")]) == 2
    assert "0/2 runs ok" in capsys.readouterr().out


def test_summarize_missing_dir_is_config_error(tmp_path, capsys):
    assert main(["summarize", "--out", str(tmp_path / "nope")]) == 1
    assert "configuration error" in capsys.readouterr().err


def test_profiles_listing(capsys):
    assert main(["profiles"]) == 0
    out = capsys.readouterr().out
    assert out.count("\n") == 6
    assert "s01" in out and "1080p" in out


def test_udp_send_receive_loopback(tmp_path, capsys):
    base = ["--profile", "s06", "--seed", "3", "--duration", "1.0", "--base-port", "15900"]
    results = {}

    def rx():
        results["code"] = main(
            ["receive", *base, "--bind", "127.0.0.1", "--latency", "80",
             "--timeout", "4", "--out", str(tmp_path)]
        )

    thread = threading.Thread(target=rx, daemon=True)
    thread.start()
    import time

    time.sleep(0.5)  # let the receiver bind
    assert main(["send", *base, "--dest", "127.0.0.1", "--bind", "127.0.0.1"]) == 0
    thread.join(20)
    assert results.get("code") == 0
    assert (tmp_path / "stats.csv").exists()
    assert (tmp_path / "received_manifest.csv").exists()


def test_udp_receive_bind_conflict(capsys):
    import socket

    blocker = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
    blocker.bind(("127.0.0.1", 15950))
    try:
        code = main(
            ["receive", "--profile", "s06", "--base-port", "15950", "--bind", "127.0.0.1",
             "--out", "/tmp/rtplab-cli-test"]
        )
    finally:
        blocker.close()
    assert code == 1
    assert "15950" in capsys.readouterr().err
