import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from eas.corpus import FIXTURE_DIR, SEED_TAXONOMY, verify_fixture_integrity
from eas.taxonomy import read_taxonomy


def pytest_sessionstart(session):
    # every suite leans on the shipped corpus; stop early if it is incoherent
    diags = verify_fixture_integrity()
    if diags:
        pytest.exit("fixture integrity failed:\n" + "\n".join(map(str, diags)), returncode=1)


@pytest.fixture(scope="session")
def fixture_dir():
    return FIXTURE_DIR


@pytest.fixture(scope="session")
def seed():
    return read_taxonomy(FIXTURE_DIR / SEED_TAXONOMY)


@pytest.fixture(scope="session")
def seed_dict():
    return json.loads((FIXTURE_DIR / SEED_TAXONOMY).read_text(encoding="utf-8"))


class StubServer:
    """Chat-completion stub that replays a script of responses.

    Each script step is ``(status, body)`` or ``("sleep", seconds)``; the last
    step repeats once the script runs out.
    """

    def __init__(self, script):
        self.script = list(script)
        self.hits = []
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                body = json.loads(self.rfile.read(length) or b"null")
                stub.hits.append({"headers": dict(self.headers), "body": body})
                step = stub.script[min(len(stub.hits), len(stub.script)) - 1]
                if step[0] == "sleep":
                    time.sleep(step[1])
                    return
                status, payload = step
                data = json.dumps(payload).encode()
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def log_message(self, *args):
                pass

        self.httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.httpd.daemon_threads = True
        self.url = f"http://127.0.0.1:{self.httpd.server_address[1]}/v1/chat/completions"
        self.thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self.thread.start()

    def close(self):
        self.httpd.shutdown()
        self.httpd.server_close()


def chat_body(text):
    return {"choices": [{"message": {"role": "assistant", "content": text}}]}


@pytest.fixture
def stub_server():
    servers = []

    def start(script):
        s = StubServer(script)
        servers.append(s)
        return s

    yield start
    for s in servers:
        s.close()
