"""The HTTP mock speaks the same wire protocol the real backend client
expects: a pipeline must behave identically through either path."""

import json

import pytest
import requests

from reacts.extractor import render_article
from reacts.gateway import (
    GatewayError,
    GenerationConfig,
    HttpBackend,
    LLMGateway,
    fingerprint,
    hashed_bow_vector,
)
from reacts.mockserver import serve_background

import _helpers


@pytest.fixture()
def server(tmp_path):
    script = tmp_path / "script.json"
    script.write_text(json.dumps(_helpers.spark_script()), encoding="utf-8")
    srv, url = serve_background(script)
    yield url
    srv.shutdown()
    srv.server_close()


def test_chat_round_trip_over_http(server):
    cfg = GenerationConfig(endpoint=server)
    gw = LLMGateway(HttpBackend(backoff=0.0), cfg, _helpers.FEW_SHOT)
    answer = gw.chat("summary", keyword=_helpers.TOPIC,
                     constraint=_helpers.CONSTRAINT,
                     content=render_article(_helpers.SMALL_POOL[0]))
    assert answer == _helpers.E_FALCON


def test_unscripted_prompt_maps_to_400(server):
    cfg = GenerationConfig(endpoint=server)
    backend = HttpBackend(backoff=0.0)
    with pytest.raises(GatewayError) as exc_info:
        backend.chat("a prompt nobody scripted", "summary", cfg)
    assert exc_info.value.status == 400
    assert fingerprint("a prompt nobody scripted") in str(exc_info.value)


def test_embeddings_match_in_process_mock(server):
    cfg = GenerationConfig(endpoint=server)
    backend = HttpBackend(backoff=0.0)
    got = backend.embed(["alpha beta", "rocket engine thrust"], cfg)
    assert got == [hashed_bow_vector("alpha beta"),
                   hashed_bow_vector("rocket engine thrust")]


def test_embeddings_reject_empty_input(server):
    resp = requests.post(f"{server}/embeddings", json={"input": []}, timeout=10)
    assert resp.status_code == 400


def test_unknown_path_is_404(server):
    resp = requests.post(f"{server}/moderations", json={}, timeout=10)
    assert resp.status_code == 404


def test_non_json_body_is_400(server):
    resp = requests.post(f"{server}/chat/completions", data=b"<xml>",
                         headers={"Content-Type": "application/json"}, timeout=10)
    assert resp.status_code == 400


def test_chat_reply_shape(server):
    triple = _helpers.script_triples()[0]
    resp = requests.post(
        f"{server}/chat/completions",
        json={"model": "m", "messages": [{"role": "user", "content": triple[1]}]},
        timeout=10,
    )
    assert resp.status_code == 200
    body = resp.json()
    assert body["object"] == "chat.completion"
    assert body["choices"][0]["message"]["content"] == triple[2]
    assert body["choices"][0]["finish_reason"] == "stop"
