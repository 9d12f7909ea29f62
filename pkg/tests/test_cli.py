import json

import pytest

from fingerspell.cli import build_parser, main, parse_schedule
from fingerspell.neuralnet import init_model, save_model
from tests.conftest import cluster_dataset, write_dataset_csv
from tests.test_stream_io import frame_line, probe_model, write_stream


@pytest.fixture(scope="module")
def dataset_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "train.csv"
    train, _ = cluster_dataset(seed=8, per_class_train=4, per_class_test=1)
    write_dataset_csv(path, train)
    return path


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestParsing:
    def test_schedule_grammar(self):
        assert parse_schedule("10x2") == ((10, 2),)
        assert parse_schedule("50x30,300x30,600x60") == ((50, 30), (300, 30), (600, 60))
        for bad in ("10", "x2", "10x", "0x3", "3x0", "axb", ""):
            with pytest.raises(Exception):
                parse_schedule(bad)

    def test_train_defaults_mirror_staged_plan(self):
        args = build_parser().parse_args(["train", "--data", "d.csv", "--out", "m.bin"])
        assert args.epochs_schedule == ((50, 30), (300, 30), (600, 60))
        assert sum(c for _, c in args.epochs_schedule) == 120
        assert args.splits == (0.8, 0.1, 0.1)
        assert args.seed == 0

    def test_serve_requires_model(self, capsys):
        code, _, _ = run(["serve"], capsys)
        assert code == 2

    def test_bad_schedule_is_usage_error(self, capsys):
        code, _, _ = run(
            ["train", "--data", "d.csv", "--out", "m.bin", "--epochs-schedule", "50y30"],
            capsys,
        )
        assert code == 2

    def test_bad_fractions_is_usage_error(self, capsys):
        code, _, _ = run(
            ["train", "--data", "d.csv", "--out", "m.bin", "--splits", "0.8,0.3,0.1"],
            capsys,
        )
        assert code == 2


class TestTrainCommand:
    def train_args(self, data, out, history=None):
        argv = [
            "train", "--data", str(data), "--out", str(out),
            "--dims", "64,8,29", "--epochs-schedule", "8x3",
            "--seed", "5", "--deterministic",
        ]
        if history:
            argv += ["--history", str(history)]
        return argv

    def test_train_writes_model_and_history(self, dataset_csv, tmp_path, capsys):
        out = tmp_path / "m.bin"
        history = tmp_path / "h.csv"
        code, stdout, _ = run(self.train_args(dataset_csv, out, history), capsys)
        assert code == 0
        assert "best validation accuracy:" in stdout
        assert out.exists()
        lines = history.read_text().splitlines()
        assert lines[0] == "epoch,mean_train_loss,val_accuracy"
        assert len(lines) == 4

    def test_deterministic_reruns_are_identical(self, dataset_csv, tmp_path, capsys):
        out_a, out_b = tmp_path / "a.bin", tmp_path / "b.bin"
        code_a, stdout_a, _ = run(self.train_args(dataset_csv, out_a), capsys)
        code_b, stdout_b, _ = run(self.train_args(dataset_csv, out_b), capsys)
        assert code_a == code_b == 0
        assert stdout_a == stdout_b
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_missing_data_file_is_io_error(self, tmp_path, capsys):
        code, _, err = run(
            ["train", "--data", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "m.bin")],
            capsys,
        )
        assert code == 3
        assert "error:" in err

    def test_malformed_data_is_format_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("not,a,header\n")
        code, _, err = run(
            ["train", "--data", str(bad), "--out", str(tmp_path / "m.bin")], capsys
        )
        assert code == 4

    def test_divergence_is_exit_5(self, dataset_csv, tmp_path, capsys):
        import numpy as np

        with np.errstate(over="ignore", invalid="ignore"):
            code, _, err = run(
                [
                    "train", "--data", str(dataset_csv), "--out", str(tmp_path / "m.bin"),
                    "--dims", "64,4,29", "--epochs-schedule", "1x1",
                    "--lr", "1e308", "--deterministic",
                ],
                capsys,
            )
        assert code == 5
        assert "non-finite" in err


class TestEvalCommand:
    def test_eval_reports_and_writes_confusion(self, tmp_path, capsys):
        data = tmp_path / "eval.csv"
        _, test = cluster_dataset(seed=9, per_class_train=1, per_class_test=2)
        write_dataset_csv(data, test, nohand_labels=[0])
        model_path = tmp_path / "m.bin"
        save_model(init_model((64, 29), seed=1), model_path)
        confusion = tmp_path / "c.csv"
        code, stdout, _ = run(
            ["eval", "--data", str(data), "--model", str(model_path), "--confusion", str(confusion)],
            capsys,
        )
        assert code == 0
        assert "skipped: 1" in stdout
        assert "skipped per class: A=1" in stdout
        assert f"evaluated: {len(test)}" in stdout
        header = confusion.read_text().splitlines()[0]
        assert header.startswith(",A,B,")

    def test_corrupt_model_is_format_error(self, tmp_path, capsys):
        data = tmp_path / "d.csv"
        _, test = cluster_dataset(seed=9, per_class_train=1, per_class_test=1)
        write_dataset_csv(data, test)
        bad = tmp_path / "bad.bin"
        bad.write_bytes(b"XXXX" + b"\x00" * 32)
        code, _, _ = run(["eval", "--data", str(data), "--model", str(bad)], capsys)
        assert code == 4


class TestReplayCommand:
    def test_replay_prints_transcript_and_final(self, tmp_path, capsys):
        model_path = tmp_path / "m.bin"
        save_model(probe_model(), model_path)
        stream = write_stream(tmp_path / "s.jsonl", [frame_line(i, 0) for i in range(10)])
        events = tmp_path / "events.jsonl"
        code, stdout, _ = run(
            ["replay", "--stream", str(stream), "--model", str(model_path), "--events", str(events)],
            capsys,
        )
        assert code == 0
        assert "emit letter A -> 'A'" in stdout
        assert "final: 'A'" in stdout
        logged = [json.loads(l) for l in events.read_text().splitlines()]
        assert logged[-1] == {"type": "final", "buffer": "A"}
        assert sum(1 for entry in logged if entry["type"] == "ack") == 10

    def test_replay_empty_stream(self, tmp_path, capsys):
        model_path = tmp_path / "m.bin"
        save_model(probe_model(), model_path)
        stream = write_stream(tmp_path / "s.jsonl", [])
        code, stdout, _ = run(
            ["replay", "--stream", str(stream), "--model", str(model_path)], capsys
        )
        assert code == 0
        assert "final: ''" in stdout

    def test_bad_stream_is_format_error(self, tmp_path, capsys):
        model_path = tmp_path / "m.bin"
        save_model(probe_model(), model_path)
        stream = write_stream(tmp_path / "s.jsonl", ["junk"])
        code, _, err = run(
            ["replay", "--stream", str(stream), "--model", str(model_path)], capsys
        )
        assert code == 4
        assert ":1:" in err


class TestInspectCommand:
    def test_inspect_prints_param_count(self, tmp_path, capsys):
        model_path = tmp_path / "m.bin"
        save_model(init_model((64, 70, 50, 29), seed=0), model_path)
        code, stdout, _ = run(["inspect", "--model", str(model_path)], capsys)
        assert code == 0
        assert "dims: 64,70,50,29" in stdout
        assert "activation: relu" in stdout
        assert "parameters: 9579" in stdout
        assert "vocabulary: A B C" in stdout
        assert stdout.rstrip().endswith("9579") or "space" in stdout
