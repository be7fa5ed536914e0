import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer
from pathlib import Path

import pytest

from abbrkit import corpus

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture()
def toy_docs():
    docs = []
    for name in ("bio1.txt", "bio2.txt"):
        text = (DATA_DIR / name).read_text(encoding="utf-8")
        docs.append(corpus.parse_markup_text(text, doc_id=name.removesuffix(".txt")))
    return docs


class _CannedHandler(BaseHTTPRequestHandler):
    """Serves recorded JSON fixtures for the bridge wire protocols."""

    responses = {}  # path -> (status, body bytes, content type)

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        self.rfile.read(length)
        status, body, ctype = self.responses.get(
            self.path, (404, b'{"error": "no such route"}', "application/json"))
        self.send_response(status)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):  # keep test output quiet
        pass


@pytest.fixture()
def fixture_server():
    """A local HTTP server answering with canned bodies per path.

    Yields (endpoint, set_response) where set_response(path, obj, status)
    installs a JSON (or raw bytes) fixture.
    """
    handler = type("Handler", (_CannedHandler,), {"responses": {}})
    server = HTTPServer(("127.0.0.1", 0), handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()

    def set_response(path, payload, status=200, raw=False):
        body = payload if raw else json.dumps(payload).encode("utf-8")
        handler.responses[path] = (status, body, "application/json")

    try:
        yield f"http://127.0.0.1:{server.server_port}", set_response
    finally:
        server.shutdown()
        thread.join()
