import json
import subprocess
import sys

import numpy as np
import pytest

from gtmp.cli import generate_tasks, main, parse_int_list
from gtmp.config_space import empty_world, load_world, save_grid_world, save_primitive_world
from gtmp.worlds import u_corridor


@pytest.fixture
def corridor(tmp_path):
    world, s, g = u_corridor()
    save_grid_world(tmp_path / "u.json", world.geometry)
    tasks = {"world": "u.json", "seed": 0, "tasks": [{"start": s.tolist(), "goals": [g.tolist()]}]}
    (tmp_path / "tasks.json").write_text(json.dumps(tasks))
    return tmp_path


@pytest.fixture
def open_space(tmp_path):
    save_primitive_world(tmp_path / "empty.json", empty_world([0, 0], [10, 10]))
    tasks = {"tasks": [{"start": [1, 1], "goals": [[9, 9]]}, {"start": [9, 1], "goals": [[1, 9], [5, 9]]}]}
    (tmp_path / "tasks.json").write_text(json.dumps(tasks))
    return tmp_path


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0] == "# gtmp-metrics v1" or lines[0] == "# gtmp-sweep v1"
    header = lines[1].split(",")
    return header, [dict(zip(header, l.split(","))) for l in lines[2:]]


def test_parse_int_list():
    assert parse_int_list("3") == [3]
    assert parse_int_list("2,5,9") == [2, 5, 9]
    assert parse_int_list("2:5") == [2, 3, 4, 5]
    assert parse_int_list("10:40:10,100") == [10, 20, 30, 40, 100]
    for bad in ("", "0", "a", "3:1:0", "1:2:3:4"):
        with pytest.raises(Exception):
            parse_int_list(bad)


def test_plan_empty_world_full_feasibility(open_space):
    out = open_space / "run"
    code = main(["plan", "--world", str(open_space / "empty.json"), "--tasks", str(open_space / "tasks.json"),
                 "--M", "2", "--N", "8", "--B", "6", "--out", str(out)])
    assert code == 0
    header, rows = read_csv(out / "metrics.csv")
    assert header == ["task_id", "planner", "CF_percent", "min_cosim_mean", "PD", "plan_time_ms"]
    assert [r["CF_percent"] for r in rows] == ["100.0", "100.0"]
    doc = json.loads((out / "plan_1.json").read_text())
    assert np.asarray(doc["paths"]).shape == (6, 4, 2)
    assert doc["goals"] == [[1, 9], [5, 9]]


def test_plan_is_reproducible_except_timing(corridor):
    args = ["plan", "--tasks", str(corridor / "tasks.json"), "--M", "3", "--N", "20", "--B", "10", "--seed", "3"]
    main(args + ["--out", str(corridor / "a")])
    main(args + ["--out", str(corridor / "b")])
    _, ra = read_csv(corridor / "a" / "metrics.csv")
    _, rb = read_csv(corridor / "b" / "metrics.csv")
    for r in ra + rb:
        r.pop("plan_time_ms")
    assert ra == rb
    assert (corridor / "a" / "plan_0.json").read_bytes() == (corridor / "b" / "plan_0.json").read_bytes()


def test_exit_code_one_when_nothing_is_feasible(corridor):
    code = main(["plan", "--tasks", str(corridor / "tasks.json"), "--M", "1", "--N", "30", "--B", "5", "--H", "30",
                 "--out", str(corridor / "r")])
    assert code == 1
    _, rows = read_csv(corridor / "r" / "metrics.csv")
    assert rows[0]["CF_percent"] == "0.0" and rows[0]["PD"] == "nan"


def test_input_errors_exit_two(corridor, capsys):
    bad = corridor / "bad.json"
    bad.write_text(json.dumps({"tasks": [{"start": [0.2, 0.2], "goals": [[4.75, 1.25]]}]}))
    assert main(["plan", "--world", str(corridor / "u.json"), "--tasks", str(bad), "--M", "2", "--N", "5"]) == 2
    assert "collision" in capsys.readouterr().err
    assert main(["plan", "--world", str(corridor / "missing.json"), "--tasks", str(corridor / "tasks.json"),
                 "--M", "2", "--N", "5"]) == 2
    (corridor / "junk.json").write_text("{not json")
    assert main(["plan", "--tasks", str(corridor / "junk.json"), "--M", "2", "--N", "5"]) == 2
    assert main(["plan", "--tasks", str(corridor / "tasks.json"), "--M", "2", "--N", "5", "--H", "1"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["plan", "--tasks", str(corridor / "tasks.json"), "--M", "x", "--N", "5"])
    assert exc.value.code == 2


def test_sweep_row_count_and_single_cell_matches_plan(corridor):
    out = corridor / "sw"
    code = main(["sweep", "--tasks", str(corridor / "tasks.json"), "--M", "2:3", "--N", "10,20,30", "--B", "8",
                 "--repetitions", "2", "--seed", "5", "--out", str(out)])
    assert code == 0
    header, rows = read_csv(out / "sweep.csv")
    assert header[:3] == ["M", "N", "repetition"]
    assert len(rows) == 2 * 3 * 2

    main(["sweep", "--tasks", str(corridor / "tasks.json"), "--M", "3", "--N", "20", "--B", "8", "--seed", "5",
          "--out", str(corridor / "one")])
    main(["plan", "--tasks", str(corridor / "tasks.json"), "--M", "3", "--N", "20", "--B", "8", "--seed", "5",
          "--out", str(corridor / "p")])
    _, s_rows = read_csv(corridor / "one" / "sweep.csv")
    _, p_rows = read_csv(corridor / "p" / "metrics.csv")
    keys = ["task_id", "planner", "CF_percent", "min_cosim_mean", "PD"]
    assert [s_rows[0][k] for k in keys] == [p_rows[0][k] for k in keys]


def test_sweep_on_empty_world_is_fully_feasible(open_space):
    out = open_space / "sw"
    main(["sweep", "--world", str(open_space / "empty.json"), "--tasks", str(open_space / "tasks.json"),
          "--M", "1,3", "--N", "3,6", "--B", "4", "--out", str(out)])
    _, rows = read_csv(out / "sweep.csv")
    assert {r["CF_percent"] for r in rows} == {"100.0"}


def test_json_format_and_akima_planner(corridor):
    out = corridor / "j"
    code = main(["plan", "--tasks", str(corridor / "tasks.json"), "--M", "3", "--N", "20", "--B", "6",
                 "--planner", "akima", "--format", "json", "--out", str(out)])
    assert code == 0
    doc = json.loads((out / "metrics.json").read_text())
    assert doc["schema"] == "gtmp-metrics v1"
    assert doc["rows"][0]["planner"] == "akima"
    plan_doc = json.loads((out / "plan_0.json").read_text())
    assert len(plan_doc["splines"]) == 6 and len(plan_doc["splines"][0]["edges"]) == 4


def test_render_and_gen_tasks(corridor):
    main(["plan", "--tasks", str(corridor / "tasks.json"), "--M", "3", "--N", "20", "--B", "4", "--out", str(corridor / "r")])
    assert main(["render", "--plan", str(corridor / "r" / "plan_0.json"), "--out", str(corridor / "r" / "p.svg")]) == 0
    svg = (corridor / "r" / "p.svg").read_text()
    assert svg.count("<polyline") == 4 and 'fill="red"' in svg and 'fill="green"' in svg

    assert main(["gen-tasks", "--world", str(corridor / "u.json"), "--count", "7", "--seed", "2",
                 "--out", str(corridor / "gen.json")]) == 0
    doc = json.loads((corridor / "gen.json").read_text())
    world = load_world(corridor / "u.json")
    assert len(doc["tasks"]) == 7
    for t in doc["tasks"]:
        start, goals = np.array(t["start"]), np.array(t["goals"])
        assert not world.in_collision(start) and not world.in_collision(goals).any()
        assert np.all(np.linalg.norm(goals - start, axis=1) >= 0.25 * world.limits.diagonal)


def test_generate_tasks_deterministic():
    world = empty_world([0, 0], [4, 4])
    a = generate_tasks(world, 5, seed=9, num_goals=2)
    b = generate_tasks(world, 5, seed=9, num_goals=2)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x.start, y.start)
        np.testing.assert_array_equal(x.goals, y.goals)


def test_module_entry_point(open_space):
    proc = subprocess.run(
        [sys.executable, "-m", "gtmp", "plan", "--world", str(open_space / "empty.json"),
         "--tasks", str(open_space / "tasks.json"), "--M", "2", "--N", "4", "--B", "3"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("# gtmp-metrics v1\n")
