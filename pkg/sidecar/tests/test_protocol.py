"""Wire protocol conformance: responses validate against the JSON schemas
the evaluation harness expects on /generate and /nli."""

from __future__ import annotations

import jsonschema

from rcpipe.mst import read_corpus

GENERATE_RESPONSE_SCHEMA = {
    "type": "object",
    "required": ["text"],
    "properties": {"text": {"type": "string"}},
}

NLI_RESPONSE_SCHEMA = {
    "type": "object",
    "required": ["label", "scores"],
    "properties": {
        "label": {"enum": ["entail", "contradict", "neutral"]},
        "scores": {
            "type": "array",
            "minItems": 3,
            "maxItems": 3,
            "items": {"type": "number", "minimum": 0, "maximum": 1},
        },
    },
}

NLI_FIXTURES = [
    ("Dennis Graham is Drake's father", "Drake's father is Dennis Graham"),
    ("albany has 2,662 residents", "the population of albany is 2,662"),
    ("paris is the capital of france", "the capital of france is paris"),
    ("jfk airport has six terminals", "jfk airport has six passenger terminals"),
    ("water boils at 100 degrees", "water boils at 212 degrees"),
    ("jupiter is the largest planet", "the largest planet is jupiter"),
    ("gold is a metal", "the sky is blue"),
    ("the yen is the currency of japan", "the currency of japan is the yen"),
]


def test_twenty_fixture_requests_conform(service_client, toy_corpus):
    rows = list(read_corpus(toy_corpus))[:12]
    assert len(rows) + len(NLI_FIXTURES) == 20
    for row in rows:
        resp = service_client.post(
            "/generate", json={"source": row.source, "max_new_tokens": 48})
        assert resp.status_code == 200
        jsonschema.validate(resp.json(), GENERATE_RESPONSE_SCHEMA)
        assert resp.json()["text"].strip()
    for premise, hypothesis in NLI_FIXTURES:
        resp = service_client.post(
            "/nli", json={"premise": premise, "hypothesis": hypothesis})
        assert resp.status_code == 200
        body = resp.json()
        jsonschema.validate(body, NLI_RESPONSE_SCHEMA)
        assert abs(sum(body["scores"]) - 1.0) < 1e-6
        labels = ["entail", "contradict", "neutral"]
        assert labels[body["scores"].index(max(body["scores"]))] == body["label"]


def test_paraphrase_is_entailed(service_client):
    resp = service_client.post("/nli", json={
        "premise": "Dennis Graham is Drake's father",
        "hypothesis": "Drake's father is Dennis Graham",
    })
    assert resp.json()["label"] == "entail"


def test_healthz_reports_model_identifiers(service_client):
    body = service_client.get("/healthz").json()
    assert body["status"] == "ok"
    assert body["generation_model"]
    assert body["nli_model"]


def test_empty_hypothesis_is_a_protocol_error(service_client):
    resp = service_client.post("/nli", json={"premise": "x is y", "hypothesis": "  "})
    assert resp.status_code == 422


def test_oversized_generation_request_is_a_protocol_error(service_client):
    resp = service_client.post(
        "/generate", json={"source": "s:extract </s> q: hi </s> p0: hi </s>",
                           "max_new_tokens": 100000})
    assert resp.status_code == 422


def test_missing_fields_are_protocol_errors(service_client):
    assert service_client.post("/generate", json={"source": "x"}).status_code == 422
    assert service_client.post("/nli", json={"premise": "x"}).status_code == 422
