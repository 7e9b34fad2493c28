import json
import threading
import urllib.error
import urllib.request

import pytest

from cfrx import fit_random_forest, standard_synth_config, synth_generate
from cfrx.service import ExplainerService, make_server


@pytest.fixture(scope="module")
def server_url():
    ds = synth_generate(standard_synth_config(n_rows=500), seed=3)
    model = fit_random_forest(ds.encoded(), ds.y, n_trees=30, max_depth=7, seed=1)
    service = ExplainerService(model, ds.schema, dataset=ds, global_k=4,
                               global_limit=3, seed=0)
    server = make_server(service, "127.0.0.1", 0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()


def _get(url):
    try:
        with urllib.request.urlopen(url) as resp:
            return resp.status, resp.read()
    except urllib.error.HTTPError as e:
        return e.code, e.read()


def _post(url, body):
    req = urllib.request.Request(
        url, data=json.dumps(body).encode(), method="POST",
        headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req) as resp:
            return resp.status, resp.read()
    except urllib.error.HTTPError as e:
        return e.code, e.read()


IN_RANGE = [2, 1, 0, 1, 2, 0, 3, 1, 4, 2, 1, 0, 2, 1, 0, 1, 0]


def test_health(server_url):
    status, body = _get(server_url + "/health")
    assert status == 200
    assert json.loads(body) == {"status": "ok"}


def test_schema_lists_features(server_url):
    status, body = _get(server_url + "/schema")
    assert status == 200
    doc = json.loads(body)
    assert len(doc["features"]) == 17
    assert doc["features"][0]["name"] == "ham01"
    assert doc["label_name"] == "label"


def test_predict_in_range(server_url):
    status, body = _post(server_url + "/predict", {"values": IN_RANGE})
    assert status == 200
    doc = json.loads(body)
    assert doc["class"] in (0, 1)
    assert 0.0 <= doc["probability"] <= 1.0


def test_predict_out_of_range_names_field(server_url):
    values = list(IN_RANGE)
    values[2] = 99
    status, body = _post(server_url + "/counterfactuals",
                         {"values": values, "target_class": 1})
    assert status == 400
    doc = json.loads(body)
    assert doc["field"] == "ham03"
    assert "ham03" in doc["detail"]


def test_counterfactuals_round_trip(server_url):
    status, body = _post(server_url + "/predict", {"values": IN_RANGE})
    current = json.loads(body)["class"]
    status, body = _post(server_url + "/counterfactuals", {
        "values": IN_RANGE, "target_class": 1 - current, "k": 3,
        "immutable": ["ham10"], "seed": 9,
    })
    assert status == 200
    doc = json.loads(body)
    assert doc["seed"] == 9
    assert 1 <= len(doc["cfs"]) <= 3
    for cf in doc["cfs"]:
        assert all(d["feature"] != "ham10" for d in cf["diff"])


def test_counterfactuals_deterministic_bytes(server_url):
    status, body = _post(server_url + "/predict", {"values": IN_RANGE})
    current = json.loads(body)["class"]
    req = {"values": IN_RANGE, "target_class": 1 - current, "k": 4, "seed": 21}
    _, a = _post(server_url + "/counterfactuals", req)
    _, b = _post(server_url + "/counterfactuals", req)
    assert a == b


def test_counterfactuals_unreachable_is_422(server_url):
    status, body = _post(server_url + "/predict", {"values": IN_RANGE})
    current = json.loads(body)["class"]
    status, body = _post(server_url + "/counterfactuals", {
        "values": IN_RANGE, "target_class": 1 - current, "k": 2, "seed": 1,
        "immutable": [f"ham{i:02d}" for i in range(1, 18)],
    })
    assert status == 422
    assert json.loads(body)["error"] == "NoCounterfactualFound"


def test_counterfactuals_same_class_is_422(server_url):
    status, body = _post(server_url + "/predict", {"values": IN_RANGE})
    current = json.loads(body)["class"]
    status, body = _post(server_url + "/counterfactuals",
                         {"values": IN_RANGE, "target_class": current})
    assert status == 422
    assert json.loads(body)["error"] == "TargetEqualsPrediction"


def test_importance_local(server_url):
    status, body = _post(server_url + "/importance/local",
                         {"values": IN_RANGE, "k": 3, "seed": 4})
    assert status == 200
    doc = json.loads(body)
    assert doc["scope"] == "local"
    assert len(doc["scores"]) == 17


def test_importance_global_cached(server_url):
    s1, a = _get(server_url + "/importance/global")
    s2, b = _get(server_url + "/importance/global")
    assert s1 == s2 == 200
    assert a == b
    doc = json.loads(a)
    assert doc["scope"] == "global"
    assert doc["instances_covered"] <= 3


def test_unknown_route_404(server_url):
    status, body = _get(server_url + "/nope")
    assert status == 404
    assert json.loads(body)["error"] == "UnknownRoute"


def test_malformed_json_400(server_url):
    req = urllib.request.Request(
        server_url + "/predict", data=b"{not json", method="POST",
        headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req) as resp:
            status, body = resp.status, resp.read()
    except urllib.error.HTTPError as e:
        status, body = e.code, e.read()
    assert status == 400
    assert json.loads(body)["error"] == "MalformedJson"


def test_missing_values_field_400(server_url):
    status, body = _post(server_url + "/predict", {})
    assert status == 400
    assert json.loads(body)["field"] == "values"
