"""HTTP JSON service consumed by the what-if console.

Stdlib threading server, no auth: a single-operator desk tool. The model
and schema are immutable after load, handlers keep per-request state only,
and responses are canonical JSON so identical requests (same body, same
seed) produce byte-identical bytes. The global importance report is
computed once on first request and cached.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np

from .cftypes import CFQuery, canonical_json
from .data import Dataset, mad_vector
from .errors import (
    BadConfig,
    CfrxError,
    GenerationFailed,
    MalformedRow,
    NoCounterfactualFound,
    NonIntegerOrdinal,
    OutOfRangeValue,
    TargetEqualsPrediction,
)
from .importance import global_importance, local_importance
from .schema import FeatureSchema
from .search import generate_diverse_cfs, predicted_class


class _HttpError(Exception):
    def __init__(self, status: int, kind: str, detail: str, field: str | None = None):
        self.status = status
        self.kind = kind
        self.detail = detail
        self.field = field
        super().__init__(detail)


class ExplainerService:
    """Route logic, independent of the HTTP plumbing (unit-testable)."""

    def __init__(self, model, schema: FeatureSchema, dataset: Dataset | None = None,
                 global_k: int = 10, global_limit: int | None = 50, seed: int = 0):
        self.model = model
        self.schema = schema
        self.dataset = dataset
        self.mads = mad_vector(dataset) if dataset is not None else np.ones(schema.n_features)
        self.global_k = global_k
        self.global_limit = global_limit
        self.seed = seed
        self._global_cache: str | None = None
        self._global_lock = threading.Lock()

    # -- request helpers --

    def _parse_values(self, body: dict) -> np.ndarray:
        if "values" not in body:
            raise _HttpError(400, "MissingField", "body needs a 'values' array", field="values")
        values = body["values"]
        if isinstance(values, dict):
            missing = [n for n in self.schema.feature_names if n not in values]
            if missing:
                raise _HttpError(400, "MissingField",
                                 f"values map missing {missing[0]}", field=missing[0])
            values = [values[n] for n in self.schema.feature_names]
        try:
            return self.schema.validate_row(values)
        except (OutOfRangeValue, NonIntegerOrdinal) as e:
            raise _HttpError(400, type(e).__name__, str(e), field=e.feature) from None
        except MalformedRow as e:
            raise _HttpError(400, "MalformedRow", str(e), field="values") from None

    # -- routes --

    def get_health(self) -> dict:
        return {"status": "ok"}

    def get_schema(self) -> dict:
        return self.schema.to_dict()

    def post_predict(self, body: dict) -> dict:
        values = self._parse_values(body)
        p = float(self.model.predict_proba(self.schema.encode_batch(values.reshape(1, -1)))[0])
        return {"class": predicted_class(p), "probability": p}

    def post_counterfactuals(self, body: dict) -> dict:
        values = self._parse_values(body)
        try:
            query = CFQuery(
                origin=values,
                target_class=_expect_int(body, "target_class"),
                k=_expect_int(body, "k", default=10),
                immutable=frozenset(body.get("immutable", ())),
                lambda1=float(body.get("lambda1", 0.5)),
                lambda2=float(body.get("lambda2", 1.0)),
                seed=_expect_int(body, "seed", default=self.seed),
                budget=_expect_int(body, "budget", default=20000),
            )
            query.validate_against(self.schema)
        except BadConfig as e:
            raise _HttpError(400, "BadConfig", str(e)) from None
        try:
            result = generate_diverse_cfs(query, self.model, self.schema, mads=self.mads)
        except TargetEqualsPrediction as e:
            raise _HttpError(422, "TargetEqualsPrediction", str(e)) from None
        except NoCounterfactualFound as e:
            raise _HttpError(422, "NoCounterfactualFound", str(e)) from None
        return result.to_dict(self.schema)

    def post_importance_local(self, body: dict) -> dict:
        values = self._parse_values(body)
        try:
            report = local_importance(
                values, self.model, self.schema, mads=self.mads,
                k=_expect_int(body, "k", default=10),
                constraints=frozenset(body.get("immutable", ())),
                seed=_expect_int(body, "seed", default=self.seed),
            )
        except BadConfig as e:
            raise _HttpError(400, "BadConfig", str(e)) from None
        except GenerationFailed as e:
            raise _HttpError(422, "GenerationFailed", str(e)) from None
        return report.to_dict()

    def get_importance_global(self) -> dict:
        if self.dataset is None:
            raise _HttpError(422, "NoDataset",
                             "service was started without a dataset; global importance unavailable")
        with self._global_lock:
            if self._global_cache is None:
                report = global_importance(
                    self.dataset, self.model, self.schema, mads=self.mads,
                    k=self.global_k, seed=self.seed, limit=self.global_limit)
                self._global_cache = canonical_json(report.to_dict())
        return json.loads(self._global_cache)


def _expect_int(body: dict, key: str, default=None):
    if key not in body:
        if default is None:
            raise _HttpError(400, "MissingField", f"body needs '{key}'", field=key)
        return default
    v = body[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise _HttpError(400, "BadType", f"'{key}' must be an integer", field=key)
    return v


def make_server(service: ExplainerService, host: str = "127.0.0.1",
                port: int = 0) -> ThreadingHTTPServer:
    """Bind and return the server; callers drive serve_forever themselves."""

    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # quiet by default
            pass

        def _send(self, status: int, payload: dict) -> None:
            body = canonical_json(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(body)

        def _send_error(self, e: _HttpError) -> None:
            payload = {"error": e.kind, "detail": e.detail}
            if e.field:
                payload["field"] = e.field
            self._send(e.status, payload)

        def _dispatch(self, route) -> None:
            try:
                self._send(200, route())
            except _HttpError as e:
                self._send_error(e)
            except CfrxError as e:
                self._send_error(_HttpError(500, type(e).__name__, str(e)))
            except Exception as e:  # noqa: BLE001 - last-resort 500
                self._send_error(_HttpError(500, "InternalError", str(e)))

        def _read_body(self) -> dict:
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b""
            try:
                body = json.loads(raw.decode("utf-8")) if raw else {}
            except (json.JSONDecodeError, UnicodeDecodeError) as e:
                raise _HttpError(400, "MalformedJson", str(e)) from None
            if not isinstance(body, dict):
                raise _HttpError(400, "MalformedJson", "body must be a JSON object")
            return body

        def do_OPTIONS(self):
            self.send_response(204)
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.send_header("Content-Length", "0")
            self.end_headers()

        def do_GET(self):
            routes = {
                "/health": service.get_health,
                "/schema": service.get_schema,
                "/importance/global": service.get_importance_global,
            }
            route = routes.get(self.path)
            if route is None:
                self._send_error(_HttpError(404, "UnknownRoute", f"no route {self.path}"))
                return
            self._dispatch(route)

        def do_POST(self):
            routes = {
                "/predict": service.post_predict,
                "/counterfactuals": service.post_counterfactuals,
                "/importance/local": service.post_importance_local,
            }
            route = routes.get(self.path)
            if route is None:
                self._send_error(_HttpError(404, "UnknownRoute", f"no route {self.path}"))
                return
            try:
                body = self._read_body()
            except _HttpError as e:
                self._send_error(e)
                return
            self._dispatch(lambda: route(body))

    return ThreadingHTTPServer((host, port), Handler)
