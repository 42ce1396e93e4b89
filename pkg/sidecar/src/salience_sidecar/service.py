"""HTTP service exposing GET /info and POST /score over one loaded checkpoint."""

from __future__ import annotations

import argparse
import json
import sys
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .model import CausalScorer, CheckpointError, OverLengthError


@dataclass(frozen=True)
class ServiceConfig:
    checkpoint: str
    host: str = "127.0.0.1"
    port: int = 8731
    max_input_length: int | None = None


def _json_bytes(payload: dict) -> bytes:
    # sorted keys and fixed separators keep equal payloads byte-identical
    return json.dumps(payload, ensure_ascii=False, sort_keys=True,
                      separators=(",", ":")).encode("utf-8")


class _Handler(BaseHTTPRequestHandler):
    scorer: CausalScorer
    lock: threading.Lock
    protocol_version = "HTTP/1.1"
    timeout = 30

    def log_message(self, format, *args):
        pass

    def _reply(self, code: int, payload: dict) -> None:
        body = _json_bytes(payload)
        self.send_response(code)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        if self.path != "/info":
            self._reply(404, {"error": f"no such path {self.path}"})
            return
        self._reply(200, {"model": self.scorer.name,
                          "max_input_length": self.scorer.max_input_length,
                          "offsets": "codepoint"})

    def do_POST(self):
        if self.path != "/score":
            self._reply(404, {"error": f"no such path {self.path}"})
            return
        try:
            raw = self.rfile.read(int(self.headers.get("Content-Length", 0)))
            body = json.loads(raw.decode("utf-8"))
        except (ValueError, UnicodeDecodeError):
            self._reply(400, {"error": "request body is not valid JSON"})
            return
        if not isinstance(body, dict) or not isinstance(body.get("text"), str):
            self._reply(400, {"error": "request needs a string 'text' field"})
            return
        include_eot = body.get("include_eot", True)
        if not isinstance(include_eot, bool):
            self._reply(400, {"error": "'include_eot' must be a boolean"})
            return
        text = body["text"]
        try:
            text.encode("utf-8")
        except UnicodeEncodeError as e:
            self._reply(400, {"error": f"text is not encodable: {e}"})
            return
        try:
            with self.lock:  # one model, inference is serialized
                result = self.scorer.score(text, include_eot)
        except OverLengthError as e:
            self._reply(413, {"error": str(e)})
            return
        self._reply(200, result)


def make_server(config: ServiceConfig) -> ThreadingHTTPServer:
    """Load the checkpoint, then bind; a load failure never opens the socket."""
    scorer = CausalScorer(config.checkpoint, config.max_input_length)
    handler = type("_BoundHandler", (_Handler,),
                   {"scorer": scorer, "lock": threading.Lock()})
    server = ThreadingHTTPServer((config.host, config.port), handler)
    server.daemon_threads = True
    return server


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="salience-sidecar",
        description="serve causal-LM token log-probabilities over HTTP")
    parser.add_argument("--checkpoint", required=True,
                        help="directory holding the model and tokenizer files")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8731)
    parser.add_argument("--max-input-length", type=int, default=None,
                        help="advertise a smaller limit than the checkpoint allows")
    args = parser.parse_args(argv)
    config = ServiceConfig(checkpoint=args.checkpoint, host=args.host,
                           port=args.port, max_input_length=args.max_input_length)
    try:
        server = make_server(config)
    except CheckpointError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    scorer = server.RequestHandlerClass.scorer
    host, port = server.server_address[:2]
    print(f"serving {scorer.name} at http://{host}:{port} "
          f"(max_input_length={scorer.max_input_length})", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
