"""CLI verb, output-format, and exit-code tests (run in-process via main)."""

from __future__ import annotations

import json
import shutil

import pytest

from gridfaas.cli import main

from suitehelp import FIXTURES


def run_cli(capsys, *argv) -> tuple[int, str, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def paths(tmp_path):
    return {
        "--catalog": str(tmp_path / "catalog.json"),
        "--data-root": str(tmp_path / "data"),
    }


def cli_args(paths, *argv) -> list[str]:
    extra = []
    for key, value in paths.items():
        extra.extend([key, value])
    return [*argv, *extra]


# --- catalog management -----------------------------------------------------


def test_env_create_list_delete(capsys, paths):
    code, out, err = run_cli(
        capsys, *cli_args(paths, "env", "create", "--name", "py-a",
                          "--image", "local/builtin"))
    assert (code, out.strip(), err) == (0, "py-a", "")

    code, out, _ = run_cli(capsys, *cli_args(paths, "env", "list"))
    assert code == 0
    lines = out.splitlines()
    assert lines[0].split() == ["NAME", "IMAGE", "KIND"]
    assert lines[1].split() == ["py-a", "local/builtin", "builtin-test"]

    code, out, _ = run_cli(capsys, *cli_args(paths, "env", "delete", "--name", "py-a"))
    assert code == 0
    code, out, _ = run_cli(capsys, *cli_args(paths, "env", "list"))
    assert out.strip() == "(no environments)"


def test_duplicate_env_exits_1(capsys, paths):
    args = cli_args(paths, "env", "create", "--name", "e", "--image", "img")
    assert run_cli(capsys, *args)[0] == 0
    code, _, err = run_cli(capsys, *args)
    assert code == 1
    assert err.startswith("error:")


def test_env_create_json_output_is_single_document(capsys, paths):
    code, out, _ = run_cli(
        capsys, *cli_args(paths, "env", "create", "--name", "e", "--image", "img",
                          "--output", "json"))
    assert code == 0
    doc = json.loads(out)  # raises if more than one document
    assert doc["name"] == "e"
    assert doc["runtime_kind"] == "builtin-test"


def test_fn_create_requires_existing_env(capsys, paths):
    code, _, err = run_cli(
        capsys, *cli_args(paths, "fn", "create", "--name", "echo",
                          "--env", "ghost", "--code", "echo"))
    assert code == 1
    assert "ghost" in err


def test_fn_lifecycle(capsys, paths):
    run_cli(capsys, *cli_args(paths, "env", "create", "--name", "e", "--image", "img"))
    code, out, _ = run_cli(
        capsys, *cli_args(paths, "fn", "create", "--name", "echo", "--env", "e",
                          "--code", "echo"))
    assert (code, out.strip()) == (0, "echo")

    code, out, _ = run_cli(capsys, *cli_args(paths, "fn", "list"))
    assert "/echo/" in out and "POST" in out

    code, _, _ = run_cli(capsys, *cli_args(paths, "fn", "delete", "--name", "echo"))
    assert code == 0
    _, out, _ = run_cli(capsys, *cli_args(paths, "fn", "list"))
    assert out.strip() == "(no functions)"


def test_list_on_fresh_catalog_succeeds(capsys, paths):
    code, out, _ = run_cli(capsys, *cli_args(paths, "fn", "list"))
    assert (code, out.strip()) == (0, "(no functions)")


def test_corrupt_catalog_exits_2(capsys, paths, tmp_path):
    (tmp_path / "catalog.json").write_text("{oops")
    code, _, err = run_cli(capsys, *cli_args(paths, "env", "list"))
    assert code == 2
    assert err.startswith("error:")


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["env"],
        ["fn", "create", "--name", "x"],
        ["env", "list", "--output", "yaml"],
        ["bogus-verb"],
    ],
)
def test_usage_errors_exit_1(capsys, argv):
    code, _, err = run_cli(capsys, *argv)
    assert code == 1
    assert err.startswith("error:")


# --- invocation over HTTP ----------------------------------------------------


def test_fn_invoke_round_trip(capsys, paths, platforms, monkeypatch):
    gw = platforms.gateway(platforms.dispatcher(functions=("echo",)))
    monkeypatch.setenv("FAAS_GATEWAY_URL", gw.url)
    code, out, err = run_cli(
        capsys, *cli_args(paths, "fn", "invoke", "--name", "echo",
                          "--data", '{"alpha": 1}'))
    assert (code, err) == (0, "")
    assert json.loads(out) == {"alpha": 1}


def test_fn_invoke_json_output_carries_headers(capsys, paths, platforms, monkeypatch):
    gw = platforms.gateway(platforms.dispatcher(functions=("echo",)))
    monkeypatch.setenv("FAAS_GATEWAY_URL", gw.url)
    code, out, _ = run_cli(
        capsys, *cli_args(paths, "fn", "invoke", "--name", "echo",
                          "--data", "{}", "--output", "json"))
    assert code == 0
    doc = json.loads(out)
    assert doc["status_code"] == 200
    assert doc["node"] == "local"
    assert doc["cold_start"] in ("true", "false")
    assert doc["request_id"]


def test_fn_invoke_unknown_function_exits_1(capsys, paths, platforms, monkeypatch):
    gw = platforms.gateway(platforms.dispatcher(functions=("echo",)))
    monkeypatch.setenv("FAAS_GATEWAY_URL", gw.url)
    code, _, err = run_cli(
        capsys, *cli_args(paths, "fn", "invoke", "--name", "ghost", "--data", "{}"))
    assert code == 1
    assert "HTTP 404" in err


def test_fn_invoke_handler_error_exits_1(capsys, paths, platforms, monkeypatch):
    gw = platforms.gateway(platforms.dispatcher(functions=("boom",)))
    monkeypatch.setenv("FAAS_GATEWAY_URL", gw.url)
    code, _, err = run_cli(
        capsys, *cli_args(paths, "fn", "invoke", "--name", "boom",
                          "--data", '{"message": "pop"}'))
    assert code == 1
    assert "HTTP 502" in err and "RuntimeError: pop" in err


def test_fn_invoke_bad_data_fails_before_network(capsys, paths, monkeypatch):
    # a dead gateway would exit 2; JSON validation must reject first with 1
    monkeypatch.setenv("FAAS_GATEWAY_URL", "http://127.0.0.1:1")
    code, _, err = run_cli(
        capsys, *cli_args(paths, "fn", "invoke", "--name", "echo",
                          "--data", "{nope"))
    assert code == 1
    assert "not valid JSON" in err

    code, _, err = run_cli(
        capsys, *cli_args(paths, "fn", "invoke", "--name", "echo",
                          "--data", "[1, 2]"))
    assert code == 1
    assert "JSON object" in err


def test_fn_invoke_data_from_missing_file_exits_2(capsys, paths):
    code, _, err = run_cli(
        capsys, *cli_args(paths, "fn", "invoke", "--name", "echo",
                          "--data", "@/no/such/params.json"))
    assert code == 2
    assert "cannot read" in err


def test_fn_invoke_unreachable_gateway_exits_2(capsys, paths, monkeypatch):
    monkeypatch.setenv("FAAS_GATEWAY_URL", "http://127.0.0.1:1")
    code, _, err = run_cli(
        capsys, *cli_args(paths, "fn", "invoke", "--name", "echo", "--data", "{}"))
    assert code == 2
    assert "cannot reach gateway" in err


# --- topology, data, planning -------------------------------------------------


def test_topology_load_summarizes(capsys, paths):
    code, out, _ = run_cli(
        capsys, *cli_args(paths, "topology", "load", str(FIXTURES / "topology-3node.json"),
                          "--output", "json"))
    assert code == 0
    doc = json.loads(out)
    assert doc["nodes"] == ["gra-01", "jbo-01", "per-01"]
    assert doc["data_items"] == ["obs1.ms"]


def test_topology_load_missing_file_exits_2(capsys, paths):
    code, _, err = run_cli(capsys, *cli_args(paths, "topology", "load", "/no/topo.json"))
    assert code == 2
    assert err.startswith("error:")


def test_data_add_rewrites_topology(capsys, paths, tmp_path):
    topo = tmp_path / "topo.json"
    shutil.copy(FIXTURES / "topology-3node.json", topo)
    argv = cli_args(paths, "data", "add", "--id", "obs2.ms", "--size", "1073741824",
                    "--nodes", "gra-01,per-01", "--topology", str(topo))
    code, out, _ = run_cli(capsys, *argv)
    assert code == 0
    assert "obs2.ms: 1073741824 bytes on gra-01, per-01" in out
    doc = json.loads(topo.read_text())
    items = {i["data_id"]: i for i in doc["data_items"]}
    assert items["obs2.ms"]["replica_nodes"] == ["gra-01", "per-01"]

    # re-adding the same id replaces the record instead of duplicating it
    run_cli(capsys, *cli_args(paths, "data", "add", "--id", "obs2.ms", "--size", "7",
                              "--nodes", "jbo-01", "--topology", str(topo)))
    doc = json.loads(topo.read_text())
    matches = [i for i in doc["data_items"] if i["data_id"] == "obs2.ms"]
    assert len(matches) == 1
    assert matches[0]["size_bytes"] == 7


def test_data_add_unknown_node_leaves_file_alone(capsys, paths, tmp_path):
    topo = tmp_path / "topo.json"
    shutil.copy(FIXTURES / "topology-3node.json", topo)
    before = topo.read_text()
    code, _, err = run_cli(
        capsys, *cli_args(paths, "data", "add", "--id", "x", "--size", "1",
                          "--nodes", "mars-01", "--topology", str(topo)))
    assert code == 1
    assert "mars-01" in err
    assert topo.read_text() == before


def test_data_add_without_topology_exits_1(capsys, paths):
    code, _, err = run_cli(
        capsys, *cli_args(paths, "data", "add", "--id", "x", "--size", "1",
                          "--nodes", "a"))
    assert code == 1
    assert "--topology" in err


def test_plan_explain_prefers_replica_node(capsys, paths):
    run_cli(capsys, *cli_args(paths, "env", "create", "--name", "e", "--image", "img"))
    run_cli(capsys, *cli_args(paths, "fn", "create", "--name", "tclean",
                              "--env", "e", "--code", "mock-tclean"))
    argv = cli_args(paths, "plan", "explain", "--fn", "tclean",
                    "--data", '{"Input-MS": "obs1.ms"}',
                    "--topology", str(FIXTURES / "topology-3node.json"))
    code, out, _ = run_cli(capsys, *argv)
    assert code == 0
    chosen_rows = [l for l in out.splitlines() if "<- chosen" in l]
    assert len(chosen_rows) == 1
    assert chosen_rows[0].startswith("jbo-01")

    code, out, _ = run_cli(capsys, *argv, "--output", "json")
    doc = json.loads(out)
    assert doc["chosen"] == "jbo-01"
    assert doc["data_refs"] == ["obs1.ms"]
    by_node = {row["node_id"]: row for row in doc["nodes"]}
    assert by_node["jbo-01"]["transfer_cost"] == 0.0
    assert by_node["gra-01"]["transfers"][0]["source_node"] == "jbo-01"


def test_plan_explain_unknown_function_exits_1(capsys, paths):
    code, _, err = run_cli(
        capsys, *cli_args(paths, "plan", "explain", "--fn", "ghost", "--data", "{}"))
    assert code == 1
    assert "ghost" in err


# --- workflows ------------------------------------------------------------------


def seed_pipeline_catalog(capsys, paths):
    run_cli(capsys, *cli_args(paths, "env", "create", "--name", "e", "--image", "img"))
    for name, code_ref in (("flag", "mock-flag"), ("calibrate", "mock-calibrate"),
                           ("tclean", "mock-tclean")):
        run_cli(capsys, *cli_args(paths, "fn", "create", "--name", name,
                                  "--env", "e", "--code", code_ref))


def test_workflow_run_end_to_end(capsys, paths, tmp_path):
    seed_pipeline_catalog(capsys, paths)
    data_root = tmp_path / "data"
    data_root.mkdir()
    shutil.copy(FIXTURES / "obs1.ms", data_root / "obs1.ms")
    code, out, err = run_cli(
        capsys, *cli_args(paths, "workflow", "run", str(FIXTURES / "pipeline.json"),
                          "--input", "ms=obs1.ms"))
    assert (code, err) == (0, "")
    assert "workflow ms-imaging: completed" in out
    assert out.rstrip().endswith("/data/img1")
    assert (data_root / "img1").exists()
    for step in ("flag", "calibrate", "image"):
        assert f"step {step}:" in out


def test_workflow_run_json_output(capsys, paths, tmp_path):
    seed_pipeline_catalog(capsys, paths)
    data_root = tmp_path / "data"
    data_root.mkdir()
    shutil.copy(FIXTURES / "obs1.ms", data_root / "obs1.ms")
    code, out, _ = run_cli(
        capsys, *cli_args(paths, "workflow", "run", str(FIXTURES / "pipeline.json"),
                          "--input", "ms=obs1.ms", "--output", "json"))
    assert code == 0
    doc = json.loads(out)
    assert doc["status"] == "completed"
    assert doc["final_output"] == "/data/img1"
    assert [s["step_name"] for s in doc["steps"]] == ["flag", "calibrate", "image"]


def test_workflow_failure_exits_1(capsys, paths, tmp_path):
    run_cli(capsys, *cli_args(paths, "env", "create", "--name", "e", "--image", "img"))
    run_cli(capsys, *cli_args(paths, "fn", "create", "--name", "boom",
                              "--env", "e", "--code", "raise-error"))
    wf = tmp_path / "wf.json"
    wf.write_text(json.dumps({
        "name": "fails",
        "steps": [{"step_name": "only", "function_name": "boom",
                   "parameters": {"message": "nope"}}],
    }))
    code, _, err = run_cli(capsys, *cli_args(paths, "workflow", "run", str(wf)))
    assert code == 1
    assert err.startswith("error:")
    assert "only" in err


def test_workflow_bad_input_pair_exits_1(capsys, paths):
    code, _, err = run_cli(
        capsys, *cli_args(paths, "workflow", "run", str(FIXTURES / "pipeline.json"),
                          "--input", "msobs1.ms"))
    assert code == 1
    assert "KEY=VALUE" in err
