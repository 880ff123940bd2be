import csv
import json

import pytest

from cctrack.cli import main, parse_threshold_range
from cctrack.io import read_detections, read_ground_truth


def write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def synth(tmp_path, capsys, payload, out_name="data"):
    config = write_config(tmp_path, f"{out_name}.json", payload)
    out_dir = tmp_path / out_name
    code = main(["synth", "--config", config, "--out-dir", str(out_dir)])
    capsys.readouterr()
    assert code == 0
    return out_dir


class TestThresholdRange:
    def test_canonical_nine(self):
        assert parse_threshold_range("0.1:0.9:0.1") == [
            0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9,
        ]

    def test_single_value_range(self):
        assert parse_threshold_range("0.5:0.5:0.1") == [0.5]

    def test_endpoint_tolerance(self):
        assert parse_threshold_range("0.2:0.8:0.3") == [0.2, 0.5, 0.8]

    def test_rejects_malformed(self):
        for bad in ("0.5", "a:b:c", "0.1:0.9:0", "0.9:0.1:0.1"):
            with pytest.raises(ValueError):
                parse_threshold_range(bad)


class TestExitCodes:
    def test_unknown_subcommand_is_usage_error(self, capsys):
        assert main(["frobnicate"]) == 1
        assert "error" in capsys.readouterr().err

    def test_unknown_flag_is_usage_error(self, capsys):
        assert main(["priorboxes", "--bogus"]) == 1

    def test_missing_required_flag_is_usage_error(self, capsys):
        assert main(["eval", "--detections", "x.jsonl"]) == 1

    def test_missing_file_is_data_error(self, capsys, tmp_path):
        gt = tmp_path / "gt.csv"
        gt.write_text("frame,object_id,x1,y1,x2,y2\n")
        assert main([
            "eval", "--detections", str(tmp_path / "nope.jsonl"),
            "--groundtruth", str(gt), "--threshold", "0.5",
        ]) == 2
        assert "error" in capsys.readouterr().err

    def test_schema_violation_is_data_error(self, capsys, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"frame": 0, "bbox": [0, 0, 5, 5], "score": 7, "class": 0}\n')
        gt = tmp_path / "gt.csv"
        gt.write_text("frame,object_id,x1,y1,x2,y2\n")
        code = main([
            "eval", "--detections", str(bad), "--groundtruth", str(gt), "--threshold", "0.5",
        ])
        assert code == 2
        err = capsys.readouterr().err
        assert "score" in err and err.count("\n") == 1  # single-line diagnostic

    def test_convcheck_passes_with_exit_zero(self, capsys):
        assert main(["convcheck"]) == 0
        out = capsys.readouterr().out
        assert "PASS" in out and "FAIL" not in out

    def test_convcheck_failure_exits_three(self, capsys, monkeypatch):
        from cctrack import cli, selfcheck

        def broken(seed=0):
            return [selfcheck.CheckResult("planted failure", False, "for the exit-code test")]

        monkeypatch.setattr(cli.selfcheck, "run_all", broken)
        assert main(["convcheck"]) == 3
        assert "FAIL planted failure" in capsys.readouterr().out

    def test_mistyped_tracker_config_is_data_error(self, tmp_path, capsys):
        bad = tmp_path / "trk.json"
        bad.write_text(json.dumps({"max_distance": "wide"}))
        dets = tmp_path / "d.jsonl"
        dets.write_text('{"frame": 0, "bbox": [0, 0, 5, 5], "score": 0.5, "class": 0}\n')
        code = main([
            "track", "--detections", str(dets), "--config", str(bad),
            "--out", str(tmp_path / "t.csv"),
        ])
        assert code == 2


class TestPriorboxes:
    def test_table_ends_with_total(self, capsys):
        assert main(["priorboxes"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[-1] == "total 8732"
        body = "\n".join(lines)
        for count in ("5776", "2166", "600", "150", "36"):
            assert count in body

    def test_layer_filter(self, capsys):
        assert main(["priorboxes", "--layer", "Conv9_2"]) == 0
        out = capsys.readouterr().out
        assert "Conv9_2" in out and "150" in out
        assert "Conv4_3" not in out

    def test_unknown_layer_is_data_error(self, capsys):
        assert main(["priorboxes", "--layer", "Conv99"]) == 2


class TestSynth:
    def test_writes_the_three_outputs(self, tmp_path, capsys):
        out_dir = synth(tmp_path, capsys, {
            "preset": "noiseless", "num_people": 1, "frame_count": 5,
            "image_size": [64, 48], "person_box_size": 12, "rng_seed": 3,
        })
        assert (out_dir / "detections.jsonl").is_file()
        assert (out_dir / "groundtruth.csv").is_file()
        frames = sorted((out_dir / "frames").glob("*.pgm"))
        assert len(frames) == 5
        assert frames[0].name == "frame_000000.pgm"

    def test_render_frames_false_skips_pixels(self, tmp_path, capsys):
        out_dir = synth(tmp_path, capsys, {
            "preset": "small", "frame_count": 4, "rng_seed": 1, "render_frames": False,
        })
        assert not (out_dir / "frames").exists()

    def test_round_trip_reingests_without_change(self, tmp_path, capsys):
        out_dir = synth(tmp_path, capsys, {
            "preset": "medium", "frame_count": 20, "rng_seed": 5, "render_frames": False,
        })
        detections = read_detections(out_dir / "detections.jsonl")
        truth = read_ground_truth(out_dir / "groundtruth.csv")
        assert len(truth) == 8 * 20
        assert detections  # medium preset always detects something in 20 frames
        # writing what was read reproduces the files byte for byte
        from cctrack.io import write_detections, write_ground_truth

        write_detections(tmp_path / "again.jsonl", detections)
        write_ground_truth(tmp_path / "again.csv", truth)
        assert (tmp_path / "again.jsonl").read_bytes() == (out_dir / "detections.jsonl").read_bytes()
        assert (tmp_path / "again.csv").read_bytes() == (out_dir / "groundtruth.csv").read_bytes()

    def test_same_seed_byte_identical_different_seed_not(self, tmp_path, capsys):
        payload = {"preset": "small", "frame_count": 15, "rng_seed": 9, "render_frames": False}
        a = synth(tmp_path, capsys, payload, "a")
        b = synth(tmp_path, capsys, payload, "b")
        assert (a / "detections.jsonl").read_bytes() == (b / "detections.jsonl").read_bytes()
        assert (a / "groundtruth.csv").read_bytes() == (b / "groundtruth.csv").read_bytes()
        config = write_config(tmp_path, "c.json", payload)
        out_c = tmp_path / "c"
        assert main(["synth", "--config", config, "--out-dir", str(out_c), "--seed", "10"]) == 0
        capsys.readouterr()
        assert (a / "detections.jsonl").read_bytes() != (out_c / "detections.jsonl").read_bytes()

    def test_bad_config_key_is_data_error(self, tmp_path, capsys):
        config = write_config(tmp_path, "bad.json", {"nonsense": True})
        assert main(["synth", "--config", config, "--out-dir", str(tmp_path / "x")]) == 2


class TestEvalAndSweep:
    @pytest.fixture
    def dataset(self, tmp_path, capsys):
        return synth(tmp_path, capsys, {
            "preset": "small", "frame_count": 40, "rng_seed": 77, "render_frames": False,
        })

    def test_eval_emits_json_report(self, dataset, capsys):
        code = main([
            "eval", "--detections", str(dataset / "detections.jsonl"),
            "--groundtruth", str(dataset / "groundtruth.csv"), "--threshold", "0.5",
        ])
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["threshold"] == 0.5
        assert report["n"] == report["tp"] + report["fp"] + report["fn"] + report["tn"]
        assert 0.0 <= report["precision"] <= 1.0

    def test_sweep_csv_has_nine_rows(self, dataset, capsys):
        code = main([
            "sweep", "--detections", str(dataset / "detections.jsonl"),
            "--groundtruth", str(dataset / "groundtruth.csv"),
        ])
        assert code == 0
        rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
        assert len(rows) == 9
        assert [float(r["threshold"]) for r in rows] == [i / 10 for i in range(1, 10)]

    def test_eval_equals_the_matching_sweep_row_bit_for_bit(self, dataset, capsys):
        main([
            "sweep", "--detections", str(dataset / "detections.jsonl"),
            "--groundtruth", str(dataset / "groundtruth.csv"),
        ])
        sweep_rows = {
            row["threshold"]: row
            for row in csv.DictReader(capsys.readouterr().out.splitlines())
        }
        for threshold in ("0.3", "0.7", "0.9"):
            main([
                "eval", "--detections", str(dataset / "detections.jsonl"),
                "--groundtruth", str(dataset / "groundtruth.csv"),
                "--threshold", threshold,
            ])
            report = json.loads(capsys.readouterr().out)
            row = sweep_rows[threshold]
            for column in ("tp", "fp", "fn", "tn"):
                assert report[column] == int(row[column])
            for column in ("precision", "recall", "accuracy"):
                # same float bits, hence the same shortest repr
                assert repr(report[column]) == row[column]

    def test_sweep_out_file(self, dataset, tmp_path, capsys):
        target = tmp_path / "sweep.csv"
        code = main([
            "sweep", "--detections", str(dataset / "detections.jsonl"),
            "--groundtruth", str(dataset / "groundtruth.csv"), "--out", str(target),
        ])
        assert code == 0
        assert target.read_text().startswith("threshold,tp,fp,fn,tn,")

    def test_bad_threshold_range_is_data_error(self, dataset, capsys):
        code = main([
            "sweep", "--detections", str(dataset / "detections.jsonl"),
            "--groundtruth", str(dataset / "groundtruth.csv"),
            "--thresholds", "0.0:0.9:0.1",
        ])
        assert code == 2  # 0.0 violates the open-interval rule


class TestTrack:
    def test_tracks_noiseless_single_walker(self, tmp_path, capsys):
        out_dir = synth(tmp_path, capsys, {
            "preset": "noiseless", "num_people": 2, "frame_count": 30,
            "image_size": [200, 150], "person_box_size": 20, "rng_seed": 4,
            "render_frames": False,
        })
        config = write_config(tmp_path, "trk.json", {"max_distance": 40.0})
        traj = tmp_path / "traj.csv"
        trace = tmp_path / "trace.jsonl"
        code = main([
            "track", "--detections", str(out_dir / "detections.jsonl"),
            "--config", config, "--out", str(traj), "--trace", str(trace),
        ])
        assert code == 0
        capsys.readouterr()
        rows = list(csv.DictReader(traj.read_text().splitlines()))
        assert {row["track_id"] for row in rows} == {"0", "1"}
        assert len(rows) == 2 * 30
        updates = [json.loads(line) for line in trace.read_text().splitlines()]
        assert len(updates) == 30
        assert updates[0]["registered"] == [0, 1]
        assert all(len(u["matched"]) == 2 for u in updates[1:])

    def test_track_with_frames_and_interval(self, tmp_path, capsys):
        out_dir = synth(tmp_path, capsys, {
            "preset": "noiseless", "num_people": 1, "frame_count": 24,
            "image_size": [160, 120], "person_box_size": 24,
            "speed_range": [2.0, 3.0], "rng_seed": 6,
        })
        config = write_config(
            tmp_path, "trk.json",
            {"max_distance": 40.0, "detection_interval": 4, "search_margin": 8},
        )
        traj = tmp_path / "traj.csv"
        trace = tmp_path / "trace.jsonl"
        code = main([
            "track", "--detections", str(out_dir / "detections.jsonl"),
            "--frames", str(out_dir / "frames"),
            "--config", config, "--out", str(traj), "--trace", str(trace),
        ])
        assert code == 0
        capsys.readouterr()
        updates = [json.loads(line) for line in trace.read_text().splitlines()]
        assert len(updates) == 24
        detection_frames = [u for u in updates if u["frame"] % 4 == 0]
        correlation_frames = [u for u in updates if u["frame"] % 4 != 0]
        assert all(u["correlated"] == [] for u in detection_frames)
        assert all(u["correlated"] == [0] for u in correlation_frames)
        # a single identity all the way through
        rows = list(csv.DictReader(traj.read_text().splitlines()))
        assert {row["track_id"] for row in rows} == {"0"}
        assert len(rows) == 24

    def test_track_determinism(self, tmp_path, capsys):
        out_dir = synth(tmp_path, capsys, {
            "preset": "medium", "frame_count": 25, "rng_seed": 12, "render_frames": False,
        })
        config = write_config(tmp_path, "trk.json", {})
        outs = []
        for name in ("t1.csv", "t2.csv"):
            target = tmp_path / name
            assert main([
                "track", "--detections", str(out_dir / "detections.jsonl"),
                "--config", config, "--out", str(target),
            ]) == 0
            capsys.readouterr()
            outs.append(target.read_bytes())
        assert outs[0] == outs[1]

    def test_empty_detections_is_data_error(self, tmp_path, capsys):
        empty = tmp_path / "empty.jsonl"
        empty.write_text("")
        config = write_config(tmp_path, "trk.json", {})
        code = main([
            "track", "--detections", str(empty), "--config", config,
            "--out", str(tmp_path / "t.csv"),
        ])
        assert code == 2
