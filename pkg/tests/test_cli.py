"""Command line behavior: exit codes, canonical output, and the wiring
from subcommands to the library."""

import csv
import io
import json

import pytest

from ckblowup.cli import build_parser, main
from ckblowup.core import graph_from_json, graph_to_json, degree_profile
from ckblowup.generators import complete_blowup, haggkvist_example


@pytest.fixture()
def hagg_file(tmp_path):
    G, _ = haggkvist_example(3, 1)
    path = tmp_path / "hagg31.json"
    path.write_text(graph_to_json(G))
    return str(path)


def test_generate_complete_round_trip(tmp_path, capsys):
    out = tmp_path / "g.json"
    assert main(["generate", "--family", "complete", "--k", "3", "--n", "4",
                 "--out", str(out)]) == 0
    G = graph_from_json(out.read_text())
    assert G.k == 3 and G.n == 4
    assert G == complete_blowup(3, 4)
    # byte-identical on repeat runs
    again = tmp_path / "g2.json"
    main(["generate", "--family", "complete", "--k", "3", "--n", "4",
          "--out", str(again)])
    assert out.read_bytes() == again.read_bytes()
    capsys.readouterr()


def test_generate_layered_with_blocks(tmp_path):
    out = tmp_path / "h.json"
    bout = tmp_path / "blocks.json"
    assert main(["generate", "--family", "haggkvist", "--k", "3", "--m", "2",
                 "--out", str(out), "--blocks-out", str(bout)]) == 0
    G = graph_from_json(out.read_text())
    assert G.n == 12
    blocks = json.loads(bout.read_text())["blocks"]
    assert {"U_1", "W_1", "Z_3"} <= set(blocks)


def test_generate_random_requires_seed(capsys):
    assert main(["generate", "--family", "random", "--k", "3", "--n", "6",
                 "--deltas", "4,4,4"]) == 2
    assert "--seed" in capsys.readouterr().err


def test_generate_random_respects_deltas(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["generate", "--family", "random", "--k", "3", "--n", "6",
                 "--deltas", "4,4,4", "--seed", "7", "--out", str(out)]) == 0
    prof = degree_profile(graph_from_json(out.read_text()))
    assert all(d >= 4 for d in prof.deltas)
    capsys.readouterr()


def test_generate_blocks_unavailable_for_complete(tmp_path, capsys):
    assert main(["generate", "--family", "complete", "--k", "3", "--n", "4",
                 "--out", str(tmp_path / "g.json"),
                 "--blocks-out", str(tmp_path / "b.json")]) == 2
    assert "blocks" in capsys.readouterr().err


def test_generate_cover_family(tmp_path, capsys):
    out = tmp_path / "cov.json"
    assert main(["generate", "--family", "cover", "--p", "7", "--q", "9",
                 "--out", str(out)]) == 0
    G = graph_from_json(out.read_text())
    assert G.k == 3 and G.n == 36
    capsys.readouterr()


def test_generate_bad_deltas_string(capsys):
    assert main(["generate", "--family", "random", "--k", "3", "--n", "6",
                 "--deltas", "4,x,4", "--seed", "1"]) == 2
    assert "comma-separated" in capsys.readouterr().err


def test_check_reports_profile(hagg_file, capsys):
    assert main(["check", hagg_file]) == 0
    text = capsys.readouterr().out
    assert "k = 3, n = 6" in text
    assert "delta_1 = 4" in text
    assert "delta* = 3" in text
    assert "not met" in text  # factor threshold 5 > 3


def test_check_missing_file_exits_2(tmp_path, capsys):
    assert main(["check", str(tmp_path / "nope.json")]) == 2
    assert "cannot read" in capsys.readouterr().err


def test_malformed_json_reports_position(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"format": "ckblowup/1", "k": 3,\n  "n": }')
    assert main(["check", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "line 2" in err and "column" in err


def test_wrong_payload_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"format": "other/9"}')
    assert main(["check", str(bad)]) == 2
    capsys.readouterr()


def test_tile_exact(hagg_file, capsys):
    assert main(["tile", hagg_file, "--exact"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["size"] == 5
    assert payload["optimal"] is True
    assert len(payload["witness"]) == 5
    assert payload["nodes_expanded"] >= 1


def test_tile_needs_exactly_one_mode(hagg_file, capsys):
    assert main(["tile", hagg_file]) == 2
    assert main(["tile", hagg_file, "--exact", "--swap3"]) == 2
    capsys.readouterr()


def test_tile_exact_budget_exhaustion(tmp_path, capsys):
    G, _ = haggkvist_example(3, 3)
    path = tmp_path / "h33.json"
    path.write_text(graph_to_json(G))
    assert main(["tile", str(path), "--exact", "--budget-ms", "1"]) == 3
    payload = json.loads(capsys.readouterr().out)
    assert payload["optimal"] is False


def test_tile_swap3(tmp_path, capsys):
    out = tmp_path / "r.json"
    main(["generate", "--family", "random", "--k", "3", "--n", "6",
          "--deltas", "4,4,4", "--seed", "11", "--out", str(out)])
    capsys.readouterr()
    assert main(["tile", str(out), "--swap3"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["size"] >= 5
    assert payload["optimal"] in (True, None)


def test_tile_swap3_rejects_weak_degrees(hagg_file, capsys):
    assert main(["tile", hagg_file, "--swap3"]) == 2
    assert "error" in capsys.readouterr().err


def test_tile_constructive(tmp_path, capsys):
    path = tmp_path / "c390.json"
    path.write_text(graph_to_json(complete_blowup(3, 90)))
    assert main(["tile", str(path), "--constructive"]) == 2  # no seed
    assert main(["tile", str(path), "--constructive", "--seed", "12"]) == 2
    capsys.readouterr()
    assert main(["tile", str(path), "--constructive", "--seed", "12",
                 "--epsilon", "0.25"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["size"] == 90 and payload["optimal"] is True


def test_cover(hagg_file, capsys):
    assert main(["cover", hagg_file]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["size"] == 5
    assert payload["optimal"] is True
    assert payload["witness"] and len(payload["witness"]) == 5
    assert main(["cover", hagg_file, "--upper-hint", "5"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["size"] == 5 and payload["witness"] is None


def test_linking(tmp_path, capsys):
    path = tmp_path / "c34.json"
    path.write_text(graph_to_json(complete_blowup(3, 4)))
    assert main(["linking", str(path), "--t", "2", "--eta", "1"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["linked"] is True
    assert payload["min_count"] == 16
    assert payload["threshold"] == "16"
    assert main(["linking", str(path), "--t", "2", "--eta", "17/16"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["linked"] is False
    # oversized request refused, not attempted
    assert main(["linking", str(path), "--t", "2", "--eta", "1",
                 "--max-work", "10"]) == 3
    assert "combinations" in capsys.readouterr().err


def test_linking_bad_t(tmp_path, capsys):
    path = tmp_path / "c34.json"
    path.write_text(graph_to_json(complete_blowup(3, 4)))
    assert main(["linking", str(path), "--t", "3", "--eta", "1"]) == 2
    capsys.readouterr()


def test_verify_feasible_relaxation_exits_1(capsys):
    assert main(["verify", "--system", "B1w"]) == 1
    out = capsys.readouterr().out
    assert "B1w: FEASIBLE" in out
    assert "x = 21/32" in out


def test_verify_certifies_with_grid_report(tmp_path, capsys):
    out = tmp_path / "report.json"
    assert main(["verify", "--system", "B1", "--grid", "2",
                 "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "B1: infeasible" in text
    report = json.loads(out.read_text())
    assert report[0]["system"] == "B1"
    assert report[0]["certified"] is True
    assert report[0]["grid_min_violation"] == "1/1000000000000"


def test_verify_depth_exhaustion_exits_3(capsys):
    assert main(["verify", "--system", "B3", "--max-depth", "1"]) == 3
    assert "depth exhausted" in capsys.readouterr().err


def test_experiment_requires_seed(capsys):
    assert main(["experiment", "--k", "3", "--n", "6",
                 "--deltas-min", "4,4,4", "--deltas-max", "4,4,4"]) == 2
    capsys.readouterr()


def test_experiment_refuses_oversized_sweep(capsys):
    assert main(["experiment", "--k", "3", "--n", "6", "--seed", "1",
                 "--deltas-min", "1,1,1", "--deltas-max", "6,6,6",
                 "--trials", "100", "--max-cells", "50"]) == 3
    assert "refusing" in capsys.readouterr().err


def test_experiment_writes_csv(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    assert main(["experiment", "--k", "3", "--n", "6", "--seed", "3",
                 "--deltas-min", "4,4,4", "--deltas-max", "5,4,4",
                 "--trials", "2", "--tiler", "exact", "--out", str(out)]) == 0
    capsys.readouterr()
    rows = list(csv.reader(io.StringIO(out.read_text())))
    assert rows[0] == ["k", "n", "delta_1", "delta_2", "delta_3",
                       "trials", "factor_rate", "mean_size", "mean_millis"]
    assert len(rows) == 3
    for row in rows[1:]:
        assert row[0] == "3" and row[1] == "6"
        assert 0.0 <= float(row[6]) <= 1.0
        assert 0.0 <= float(row[7]) <= 6.0


def test_experiment_rejects_inverted_ranges(capsys):
    assert main(["experiment", "--k", "3", "--n", "6", "--seed", "1",
                 "--deltas-min", "5,4,4", "--deltas-max", "4,4,4"]) == 2
    assert "dominate" in capsys.readouterr().err


def test_dot_with_blocks(tmp_path, capsys):
    g = tmp_path / "h.json"
    b = tmp_path / "blocks.json"
    main(["generate", "--family", "haggkvist", "--k", "3", "--m", "1",
          "--out", str(g), "--blocks-out", str(b)])
    capsys.readouterr()
    assert main(["dot", str(g), "--blocks", str(b)]) == 0
    text = capsys.readouterr().out
    assert text.startswith("graph ckblowup {")
    assert 'label="U_1:0"' in text


def test_parser_covers_all_subcommands():
    parser = build_parser()
    subs = next(a for a in parser._actions
                if isinstance(a, type(parser._subparsers._group_actions[0])))
    assert set(subs.choices) == {"generate", "check", "tile", "cover",
                                 "linking", "verify", "experiment", "dot"}
