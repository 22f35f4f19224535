import csv
import json

import pytest

from gapsum import cli, singular, sums
from gapsum.errors import ValidationError


def run_cli(args, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return cli.main(args)


def read_csv(path):
    comments, rows = [], []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                comments.append(line.rstrip("\n"))
            else:
                rows.append(line)
    return comments, list(csv.reader(rows))


def test_parse_count():
    assert cli.parse_count("1e9") == 10**9
    assert cli.parse_count("1_000_000") == 10**6
    assert cli.parse_count("42") == 42
    with pytest.raises(ValidationError):
        cli.parse_count("1.5")
    with pytest.raises(ValidationError):
        cli.parse_count("ten")


def test_parse_grid():
    assert cli.parse_grid("1e3:1e5:log") == [1000, 10_000, 100_000]
    assert cli.parse_grid("10,30,100") == [10, 30, 100]
    with pytest.raises(ValidationError):
        cli.parse_grid("1:10:linear")


def test_parse_samples():
    assert cli.parse_samples("2:6,4:10") == [(2, 6), (4, 10)]
    with pytest.raises(ValidationError):
        cli.parse_samples("2-6")


def test_singular_pair_command(tmp_path, monkeypatch, capsys):
    assert run_cli(["singular-pair", "--d", "6"], tmp_path, monkeypatch) == 0
    comments, rows = read_csv(tmp_path / "gapsum-singular-pair.csv")
    assert any(c.startswith("# command=singular-pair") for c in comments)
    header, row = rows
    assert header == cli.REPORT_FIELDS
    assert float(row[2]) == 2 * singular.pair_singular(2).value


def test_weighted_sum_csv_matches_library(tmp_path, monkeypatch):
    code = run_cli(
        ["weighted-sum", "--limit", "1e4", "--alpha", "0", "--mode", "prime"],
        tmp_path, monkeypatch,
    )
    assert code == 0
    _, rows = read_csv(tmp_path / "gapsum-weighted-sum.csv")
    header, *data = rows
    assert header == cli.SNAPSHOT_FIELDS
    final = data[-1]
    # same snapshot grid as the CLI: the grid participates in the
    # reduction grouping, so it must match for bit equality
    snap = sums.weighted_gap_sum(
        sums.WeightSpec(0.0), prime_limit=10_000,
        snapshot_limits=sums.default_snapshot_grid(10_000),
    )
    assert int(final[0]) == 10_000
    assert float(final[1]) == snap.value
    assert int(final[2]) == snap.terms


def test_json_output_is_array(tmp_path, monkeypatch):
    code = run_cli(
        ["verify-lemma21", "--grid", "1e3:1e4:log", "--format", "json"],
        tmp_path, monkeypatch,
    )
    assert code == 0
    payload = json.loads((tmp_path / "gapsum-verify-lemma21.json").read_text())
    assert isinstance(payload, list) and len(payload) == 2
    assert set(payload[0]) == set(cli.REPORT_FIELDS)


def test_en_sum_heuristic_tail_printed(tmp_path, monkeypatch, capsys):
    code = run_cli(["en-sum", "--limit", "1000", "--c", "3"], tmp_path, monkeypatch)
    assert code == 0
    out = capsys.readouterr().out
    assert "heuristic" in out


def test_unknown_flag_exits_1(tmp_path, monkeypatch, capsys):
    assert run_cli(["weighted-sum", "--limit", "10", "--bogus"], tmp_path, monkeypatch) == 1


def test_unknown_command_exits_1(tmp_path, monkeypatch):
    assert run_cli(["frobnicate"], tmp_path, monkeypatch) == 1


def test_validation_error_exits_1_and_leaves_no_file(tmp_path, monkeypatch):
    code = run_cli(
        ["weighted-sum", "--limit", "1000", "--alpha", "-2"], tmp_path, monkeypatch
    )
    assert code == 1
    assert not (tmp_path / "gapsum-weighted-sum.csv").exists()


def test_capacity_error_exits_2(tmp_path, monkeypatch):
    code = run_cli(
        ["sieve-stats", "--limit", "9300000000000000000"], tmp_path, monkeypatch
    )
    assert code == 2


def test_sandwich_command(tmp_path, monkeypatch, capsys):
    assert run_cli(["sandwich", "--limit", "1000", "--d", "4"], tmp_path, monkeypatch) == 0
    assert "ok=True" in capsys.readouterr().out


def test_gaps_histogram_command(tmp_path, monkeypatch):
    assert run_cli(["gaps-histogram", "--limit", "100"], tmp_path, monkeypatch) == 0
    _, rows = read_csv(tmp_path / "gapsum-gaps-histogram.csv")
    header, *data = rows
    by_d = {json.loads(r[1])["d"]: float(r[2]) for r in data}
    assert by_d[2] == 8.0


def test_verify_conjecture1_command(tmp_path, monkeypatch):
    code = run_cli(
        ["verify-conjecture1", "--limit", "1e4", "--d-list", "2,4,6"],
        tmp_path, monkeypatch,
    )
    assert code == 0
    _, rows = read_csv(tmp_path / "gapsum-verify-conjecture1.csv")
    assert len(rows) == 4  # header + 3


def test_verify_sieve_bound_default_samples(tmp_path, monkeypatch):
    code = run_cli(["verify-sieve-bound", "--limit", "1e5"], tmp_path, monkeypatch)
    assert code == 0
    _, rows = read_csv(tmp_path / "gapsum-verify-sieve-bound.csv")
    assert len(rows) == 21


def test_checkpoint_stop_resume_cycle(tmp_path, monkeypatch):
    base = [
        "weighted-sum", "--limit", "2e6", "--alpha", "0", "--workers", "1",
    ]
    assert run_cli(base + ["--output", "full.csv"], tmp_path, monkeypatch) == 0
    code = run_cli(
        base + ["--checkpoint-dir", "ck", "--stop-after-segments", "2"],
        tmp_path, monkeypatch,
    )
    assert code == 0
    ckpt = tmp_path / "ck" / "gapsum-weighted-sum.ckpt"
    assert ckpt.exists()
    assert not (tmp_path / "gapsum-weighted-sum.csv").exists()  # interrupted: no report
    code = run_cli(
        base + ["--resume", str(ckpt), "--output", "resumed.csv"],
        tmp_path, monkeypatch,
    )
    assert code == 0
    _, full_rows = read_csv(tmp_path / "full.csv")
    _, resumed_rows = read_csv(tmp_path / "resumed.csv")
    assert full_rows[-1] == resumed_rows[-1]  # bit-identical final snapshot


def test_en_sum_checkpoint_cycle(tmp_path, monkeypatch):
    base = ["en-sum", "--limit", "2e5", "--c", "3", "--workers", "1"]
    assert run_cli(base + ["--output", "full.csv"], tmp_path, monkeypatch) == 0
    code = run_cli(
        base + ["--checkpoint-dir", "ck", "--stop-after-segments", "1"],
        tmp_path, monkeypatch,
    )
    assert code == 0
    ckpt = str(tmp_path / "ck" / "gapsum-en-sum.ckpt")
    code = run_cli(base + ["--resume", ckpt, "--output", "resumed.csv"],
                   tmp_path, monkeypatch)
    assert code == 0
    _, full_rows = read_csv(tmp_path / "full.csv")
    _, resumed_rows = read_csv(tmp_path / "resumed.csv")
    assert full_rows[-1] == resumed_rows[-1]


def test_resume_with_other_alpha_refused(tmp_path, monkeypatch):
    base = ["weighted-sum", "--limit", "2e6", "--workers", "1"]
    run_cli(
        base + ["--alpha", "0", "--checkpoint-dir", "ck", "--stop-after-segments", "2"],
        tmp_path, monkeypatch,
    )
    ckpt = str(tmp_path / "ck" / "gapsum-weighted-sum.ckpt")
    code = run_cli(base + ["--alpha", "1", "--resume", ckpt], tmp_path, monkeypatch)
    assert code == 1


def test_resume_with_other_worker_count_allowed(tmp_path, monkeypatch):
    base = ["weighted-sum", "--limit", "2e6", "--alpha", "0"]
    run_cli(
        base + ["--workers", "1", "--checkpoint-dir", "ck", "--stop-after-segments", "2"],
        tmp_path, monkeypatch,
    )
    ckpt = str(tmp_path / "ck" / "gapsum-weighted-sum.ckpt")
    code = run_cli(
        base + ["--workers", "3", "--resume", ckpt, "--output", "w3.csv"],
        tmp_path, monkeypatch,
    )
    assert code == 0
    run_cli(base + ["--workers", "1", "--output", "w1.csv"], tmp_path, monkeypatch)
    _, a = read_csv(tmp_path / "w3.csv")
    _, b = read_csv(tmp_path / "w1.csv")
    assert a[-1] == b[-1]


def test_corrupt_checkpoint_refused(tmp_path, monkeypatch):
    (tmp_path / "bad.ckpt").write_bytes(b"GSCK" + b"\x00" * 84)
    code = run_cli(
        ["weighted-sum", "--limit", "2e6", "--alpha", "0", "--resume", "bad.ckpt"],
        tmp_path, monkeypatch,
    )
    assert code == 1


def test_workers_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("GAPSUM_WORKERS", "1")
    code = run_cli(
        ["weighted-sum", "--limit", "1e4", "--alpha", "0", "--workers", "7"],
        tmp_path, monkeypatch,
    )
    assert code == 0
    comments, _ = read_csv(tmp_path / "gapsum-weighted-sum.csv")
    assert "# workers=1" in comments


def test_stop_after_requires_checkpoint_dir(tmp_path, monkeypatch):
    code = run_cli(
        ["weighted-sum", "--limit", "1e4", "--alpha", "0", "--stop-after-segments", "1"],
        tmp_path, monkeypatch,
    )
    assert code == 1
