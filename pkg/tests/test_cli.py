import json

import pytest

from cfrx import standard_synth_config
from cfrx.cli import main


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """gen-data + train once; downstream commands reuse the artifacts."""
    root = tmp_path_factory.mktemp("cli")
    config_path = root / "synth.json"
    config_path.write_text(standard_synth_config(n_rows=400).to_json())
    data = root / "data.csv"
    schema = root / "schema.json"
    model = root / "model.json"
    assert main(["gen-data", "--config", str(config_path), "--seed", "7",
                 "--out", str(data), "--schema-out", str(schema)]) == 0
    assert main(["train", "--data", str(data), "--schema", str(schema),
                 "--model-kind", "forest", "--n-trees", "30", "--seed", "1",
                 "--out", str(model)]) == 0
    return {"root": root, "config": config_path, "data": data,
            "schema": schema, "model": model}


def test_gen_data_row_count(workspace):
    lines = workspace["data"].read_text().strip().splitlines()
    assert len(lines) == 401  # header + rows
    assert lines[0].startswith("ham01,")
    assert lines[0].endswith(",label")


def test_gen_data_deterministic(workspace, tmp_path):
    out = tmp_path / "again.csv"
    assert main(["gen-data", "--config", str(workspace["config"]), "--seed", "7",
                 "--out", str(out)]) == 0
    assert out.read_bytes() == workspace["data"].read_bytes()


def test_train_with_cv_writes_fold_metrics(workspace, tmp_path):
    model = tmp_path / "m.json"
    metrics = tmp_path / "metrics.json"
    assert main(["train", "--data", str(workspace["data"]), "--schema", str(workspace["schema"]),
                 "--model-kind", "tree", "--max-depth", "5", "--cv", "5", "--seed", "3",
                 "--out", str(model), "--metrics-out", str(metrics)]) == 0
    doc = json.loads(metrics.read_text())
    assert len(doc["cv"]["folds"]) == 5
    assert 0.0 <= doc["cv"]["mean"]["accuracy"] <= 1.0
    assert doc["seed"] == 3


def test_train_cv_defaults_metrics_path(workspace, tmp_path):
    model = tmp_path / "m.json"
    assert main(["train", "--data", str(workspace["data"]), "--schema", str(workspace["schema"]),
                 "--model-kind", "tree", "--max-depth", "4", "--cv", "3", "--seed", "2",
                 "--out", str(model)]) == 0
    doc = json.loads((tmp_path / "m.metrics.json").read_text())
    assert len(doc["cv"]["folds"]) == 3


def test_evaluate_writes_report_and_figure(workspace, tmp_path):
    out = tmp_path / "eval.json"
    csv_out = tmp_path / "eval.csv"
    plots = tmp_path / "figs"
    assert main(["evaluate", "--model", str(workspace["model"]), "--data", str(workspace["data"]),
                 "--schema", str(workspace["schema"]), "--out", str(out),
                 "--csv-out", str(csv_out), "--plots", str(plots)]) == 0
    doc = json.loads(out.read_text())
    assert set(doc["confusion"]) == {"tn", "fp", "fn", "tp"}
    assert (plots / "confusion_matrix.png").stat().st_size > 0
    assert csv_out.read_text().startswith("accuracy,")


def test_explain_respects_k_and_immutable(workspace, tmp_path):
    instance = tmp_path / "p.json"
    instance.write_text(json.dumps({"values": [4, 0, 0, 0, 0, 0, 0, 0, 4, 0, 0, 0, 2, 0, 0, 0, 0]}))
    out = tmp_path / "cfs.json"
    code = main(["explain", "--model", str(workspace["model"]), "--instance", str(instance),
                 "--target", "0", "--k", "10", "--immutable", "ham10", "--seed", "5",
                 "--schema", str(workspace["schema"]), "--out", str(out),
                 "--csv-out", str(tmp_path / "diffs.csv"), "--plots", str(tmp_path / "figs")])
    assert code == 0
    doc = json.loads(out.read_text())
    assert 1 <= len(doc["cfs"]) <= 10
    assert doc["seed"] == 5
    for cf in doc["cfs"]:
        assert all(d["feature"] != "ham10" for d in cf["diff"])
        assert cf["valid"] is True
    assert (tmp_path / "figs" / "counterfactual_diffs.png").stat().st_size > 0
    diff_lines = (tmp_path / "diffs.csv").read_text().strip().splitlines()
    assert diff_lines[0] == "cf_index,feature,old,new,delta"


def test_explain_deterministic_bytes(workspace, tmp_path):
    instance = tmp_path / "p.json"
    instance.write_text(json.dumps({"values": [4, 0, 0, 0, 0, 0, 0, 0, 4, 0, 0, 0, 2, 0, 0, 0, 0]}))
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    for out in (a, b):
        assert main(["explain", "--model", str(workspace["model"]), "--instance", str(instance),
                     "--target", "0", "--k", "4", "--seed", "11",
                     "--schema", str(workspace["schema"]), "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_importance_local_and_global(workspace, tmp_path):
    instance = tmp_path / "p.json"
    instance.write_text(json.dumps({"values": [4, 0, 0, 0, 0, 0, 0, 0, 4, 0, 0, 0, 2, 0, 0, 0, 0]}))
    local_out = tmp_path / "local.json"
    assert main(["importance", "--model", str(workspace["model"]), "--instance", str(instance),
                 "--schema", str(workspace["schema"]), "--k", "5", "--seed", "2",
                 "--out", str(local_out), "--csv-out", str(tmp_path / "local.csv"),
                 "--plots", str(tmp_path / "figs")]) == 0
    doc = json.loads(local_out.read_text())
    assert doc["scope"] == "local"
    assert len(doc["scores"]) == 17
    assert (tmp_path / "figs" / "importance_local.png").stat().st_size > 0
    assert (tmp_path / "local.csv").read_text().startswith("feature,score")

    global_out = tmp_path / "global.json"
    assert main(["importance", "--model", str(workspace["model"]), "--data", str(workspace["data"]),
                 "--schema", str(workspace["schema"]), "--k", "4", "--seed", "2",
                 "--limit", "4", "--out", str(global_out)]) == 0
    doc = json.loads(global_out.read_text())
    assert doc["scope"] == "global"
    assert doc["instances_covered"] + doc["failures"] == 4


def test_usage_error_exits_two():
    with pytest.raises(SystemExit) as e:
        main(["explain", "--nonsense"])
    assert e.value.code == 2


def test_runtime_error_exits_one(workspace, tmp_path):
    missing = tmp_path / "does-not-exist.csv"
    out = tmp_path / "out.json"
    code = main(["evaluate", "--model", str(workspace["model"]), "--data", str(missing),
                 "--schema", str(workspace["schema"]), "--out", str(out)])
    assert code == 1


def test_bad_data_names_offender(workspace, tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    lines = workspace["data"].read_text().splitlines()
    cells = lines[1].split(",")
    cells[2] = "9"  # ham03 beyond its range
    bad.write_text("\n".join([lines[0], ",".join(cells)]) + "\n")
    code = main(["evaluate", "--model", str(workspace["model"]), "--data", str(bad),
                 "--schema", str(workspace["schema"]), "--out", str(tmp_path / "o.json")])
    assert code == 1
    err = capsys.readouterr().err
    assert "ham03" in err
