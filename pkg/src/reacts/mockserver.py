"""Tiny HTTP server that impersonates the chat/embeddings wire protocol.

Chat responses come from a script file (prompt fingerprint → canned text);
embeddings are the same hashed bag-of-words vectors the in-process mock
produces, so a pipeline run behaves identically whether it talks to
:class:`reacts.gateway.MockBackend` directly or to this server over HTTP.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .gateway import GenerationConfig, MockBackend, fingerprint, hashed_bow_vector

_CFG = GenerationConfig()


def _chat_reply(model: str, content: str) -> dict:
    return {
        "id": "mock-" + fingerprint(content)[:12],
        "object": "chat.completion",
        "model": model,
        "choices": [
            {
                "index": 0,
                "message": {"role": "assistant", "content": content},
                "finish_reason": "stop",
            }
        ],
    }


def _embed_reply(model: str, inputs: list[str]) -> dict:
    return {
        "object": "list",
        "model": model,
        "data": [
            {"object": "embedding", "index": i, "embedding": hashed_bow_vector(t)}
            for i, t in enumerate(inputs)
        ],
    }


class _Handler(BaseHTTPRequestHandler):
    # Injected by make_server: the shared scripted backend.
    backend: MockBackend

    def log_message(self, fmt: str, *args: object) -> None:  # keep tests quiet
        pass

    def _send(self, status: int, body: dict) -> None:
        raw = json.dumps(body).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(raw)))
        self.end_headers()
        self.wfile.write(raw)

    def do_POST(self) -> None:  # noqa: N802 (http.server API)
        try:
            length = int(self.headers.get("Content-Length", "0"))
            payload = json.loads(self.rfile.read(length) or b"{}")
        except (ValueError, json.JSONDecodeError):
            self._send(400, {"error": {"message": "request body is not JSON"}})
            return
        model = payload.get("model", "mock")
        if self.path.endswith("/chat/completions"):
            messages = payload.get("messages") or []
            if not messages or "content" not in messages[-1]:
                self._send(400, {"error": {"message": "no message content"}})
                return
            prompt = messages[-1]["content"]
            try:
                text = self.backend.chat(prompt, "http", _CFG)
            except Exception:
                self._send(
                    400,
                    {
                        "error": {
                            "message": "no scripted response for fingerprint "
                            + fingerprint(prompt)
                        }
                    },
                )
                return
            self._send(200, _chat_reply(model, text))
        elif self.path.endswith("/embeddings"):
            inputs = payload.get("input")
            if isinstance(inputs, str):
                inputs = [inputs]
            if not isinstance(inputs, list) or not inputs:
                self._send(400, {"error": {"message": "input must be a non-empty list"}})
                return
            self._send(200, _embed_reply(model, [str(t) for t in inputs]))
        else:
            self._send(404, {"error": {"message": f"unknown path {self.path}"}})


def make_server(script_path: str | Path, host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    """Build (without starting) a server loaded with the given script."""
    backend = MockBackend.from_script(script_path)

    class Handler(_Handler):
        pass

    Handler.backend = backend
    return ThreadingHTTPServer((host, port), Handler)


def serve_background(script_path: str | Path, host: str = "127.0.0.1", port: int = 0):
    """Start a server on a daemon thread; returns (server, base_url)."""
    server = make_server(script_path, host, port)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server, f"http://{server.server_address[0]}:{server.server_address[1]}/v1"
