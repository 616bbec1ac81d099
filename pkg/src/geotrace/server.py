"""Read-only HTTP server for a single diagram.

GET /api/diagram hands out the canonical document, GET /api/causal-past
returns the event-id cone for ?event=ID, and everything else is treated as
a UI asset path under the directory given at startup.  Without an asset
directory a built-in placeholder page is served at / so the endpoints can
be poked by hand.  The diagram is immutable, so concurrent requests need
no locking; writes are refused wholesale.
"""

from __future__ import annotations

import json
import mimetypes
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlsplit

from . import docio, query

_FALLBACK_PAGE = b"""<!doctype html>
<meta charset="utf-8">
<title>geotrace</title>
<style>body{font-family:monospace;margin:2em}td{padding:0 .6em}</style>
<h1>geotrace diagram</h1>
<p>No UI assets were installed; this is the raw transaction table.
The document itself is at <a href="/api/diagram">/api/diagram</a>.</p>
<table id="t"></table>
<script>
fetch("/api/diagram").then(r => r.json()).then(doc => {
  const rows = doc.transactions.map(tx =>
    `<tr><td>${tx.row}</td><td>${tx.issuer === "environment" ? "env"
      : doc.lifelines[tx.issuer].name}</td><td>${tx.label}</td></tr>`);
  document.getElementById("t").innerHTML =
    "<tr><th>row</th><th>issuer</th><th>step</th></tr>" + rows.join("");
});
</script>
"""


class _Handler(BaseHTTPRequestHandler):
    def log_message(self, fmt, *args):
        if not self.server.quiet:
            super().log_message(fmt, *args)

    def _reply(self, code, body, ctype="application/json"):
        self.send_response(code)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Cache-Control", "no-store")
        self.end_headers()
        self.wfile.write(body)

    def _json_error(self, code, message):
        self._reply(code, json.dumps({"error": message}).encode("ascii"))

    def do_GET(self):
        url = urlsplit(self.path)
        if url.path == "/api/diagram":
            self._reply(200, self.server.document)
        elif url.path == "/api/causal-past":
            self._causal_past(url)
        else:
            self._asset(url.path)

    def _causal_past(self, url):
        params = parse_qs(url.query)
        raw = params.get("event", [])
        if len(raw) != 1 or not raw[0].lstrip("-").isdigit():
            self._json_error(400, "expected a single integer ?event=ID")
            return
        try:
            cone = query.causal_past(self.server.diagram, int(raw[0]))
        except query.UnknownEvent as err:
            self._json_error(404, str(err))
            return
        self._reply(200, json.dumps(sorted(cone)).encode("ascii"))

    def _asset(self, path):
        root = self.server.ui_dir
        if root is None:
            if path == "/" or path == "/index.html":
                self._reply(200, _FALLBACK_PAGE, "text/html; charset=utf-8")
            else:
                self._json_error(404, "no such resource")
            return
        name = path[1:] or "index.html"
        target = (root / name).resolve()
        # refuses ../ escapes: the resolved path must stay under the root
        if root not in target.parents and target != root:
            self._json_error(404, "no such resource")
            return
        if not target.is_file():
            self._json_error(404, "no such resource")
            return
        ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        self._reply(200, target.read_bytes(), ctype)

    def _refuse_write(self):
        self._json_error(405, "read-only server")

    do_POST = _refuse_write
    do_PUT = _refuse_write
    do_DELETE = _refuse_write
    do_PATCH = _refuse_write


def make_server(diagram, port=0, ui_dir=None, quiet=False):
    """A ThreadingHTTPServer ready for serve_forever(); port 0 picks one."""
    srv = ThreadingHTTPServer(("127.0.0.1", port), _Handler)
    srv.diagram = diagram
    srv.document = docio.serialize(diagram)
    srv.ui_dir = None if ui_dir is None else Path(ui_dir).resolve()
    srv.quiet = quiet
    return srv


def serve(diagram, port, ui_dir=None):
    srv = make_server(diagram, port, ui_dir)
    host, actual = srv.server_address
    print(f"serving on http://{host}:{actual}/ (ctrl-c stops)")
    try:
        srv.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        srv.server_close()
