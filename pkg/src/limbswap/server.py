"""Live session service.

One TCP listener, two framings on the same port: newline-delimited JSON
for plain socket clients, and WebSocket text frames for browsers (the
connection is sniffed: an HTTP ``GET`` upgrades to WebSocket, anything
else is treated as line-delimited JSON). Optionally serves the static
play-station UI over plain HTTP GET.

Each connection owns exactly one session (single writer, no shared mutable
state). The engine clock is authoritative: pose timestamps advance the
session's fixed-tick clock, so flooding poses does not create extra ticks,
and an idle client's session keeps ticking on a real-time keepalive so
frames keep flowing with the held pose.
"""

from __future__ import annotations

import base64
import hashlib
import json
import logging
import math
import os
import socket
import struct
import threading
from dataclasses import dataclass, replace

from . import protocol
from .engine import SessionConfig, create_session, session_metrics, step
from .errors import BadConfig, LimbswapError, UnknownProsthesis, UnknownTask
from .prosthesis import ProsthesisSpec, catalog_by_id, serialize_spec

logger = logging.getLogger("limbswap.server")

_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"
_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".map": "application/json",
    ".png": "image/png",
    ".svg": "image/svg+xml",
    ".ico": "image/x-icon",
}


class _ConnectionClosed(Exception):
    pass


class _Timeout(Exception):
    pass


class _LineTransport:
    """Newline-delimited JSON over a stream socket."""

    def __init__(self, sock: socket.socket, initial: bytes = b""):
        self.sock = sock
        self.buf = bytearray(initial)

    def recv_message(self, timeout: float | None) -> bytes:
        while True:
            nl = self.buf.find(b"\n")
            if nl >= 0:
                line = bytes(self.buf[:nl])
                del self.buf[: nl + 1]
                if line.strip():
                    return line
                continue
            self.sock.settimeout(timeout)
            try:
                chunk = self.sock.recv(65536)
            except (socket.timeout, TimeoutError):
                raise _Timeout()
            if not chunk:
                raise _ConnectionClosed()
            self.buf.extend(chunk)

    def send_message(self, payload: bytes) -> None:
        self.sock.sendall(payload + b"\n")

    def close(self) -> None:
        try:
            self.sock.close()
        except OSError:
            pass


class _WebSocketTransport:
    """Server side of RFC 6455, text frames only, no extensions."""

    def __init__(self, sock: socket.socket):
        self.sock = sock
        self.buf = bytearray()

    def _parse_frame(self):
        buf = self.buf
        if len(buf) < 2:
            return None
        b0, b1 = buf[0], buf[1]
        opcode = b0 & 0x0F
        masked = bool(b1 & 0x80)
        length = b1 & 0x7F
        offset = 2
        if length == 126:
            if len(buf) < 4:
                return None
            length = struct.unpack(">H", buf[2:4])[0]
            offset = 4
        elif length == 127:
            if len(buf) < 10:
                return None
            length = struct.unpack(">Q", buf[2:10])[0]
            offset = 10
        mask = b""
        if masked:
            if len(buf) < offset + 4:
                return None
            mask = bytes(buf[offset : offset + 4])
            offset += 4
        if len(buf) < offset + length:
            return None
        payload = bytes(buf[offset : offset + length])
        if masked:
            payload = bytes(c ^ mask[i % 4] for i, c in enumerate(payload))
        del buf[: offset + length]
        return opcode, payload

    def recv_message(self, timeout: float | None) -> bytes:
        while True:
            frame = self._parse_frame()
            if frame is not None:
                opcode, payload = frame
                if opcode in (0x1, 0x2):
                    return payload
                if opcode == 0x8:  # close
                    raise _ConnectionClosed()
                if opcode == 0x9:  # ping -> pong
                    self._send_frame(0xA, payload)
                continue
            self.sock.settimeout(timeout)
            try:
                chunk = self.sock.recv(65536)
            except (socket.timeout, TimeoutError):
                raise _Timeout()
            if not chunk:
                raise _ConnectionClosed()
            self.buf.extend(chunk)

    def _send_frame(self, opcode: int, payload: bytes) -> None:
        header = bytearray([0x80 | opcode])
        n = len(payload)
        if n < 126:
            header.append(n)
        elif n < 1 << 16:
            header.append(126)
            header.extend(struct.pack(">H", n))
        else:
            header.append(127)
            header.extend(struct.pack(">Q", n))
        self.sock.sendall(bytes(header) + payload)

    def send_message(self, payload: bytes) -> None:
        self._send_frame(0x1, payload)

    def close(self) -> None:
        try:
            self._send_frame(0x8, b"")
        except OSError:
            pass
        try:
            self.sock.close()
        except OSError:
            pass


def _read_http_request(sock: socket.socket) -> tuple[str, dict[str, str]]:
    sock.settimeout(5.0)
    data = bytearray()
    while b"\r\n\r\n" not in data:
        chunk = sock.recv(65536)
        if not chunk:
            raise _ConnectionClosed()
        data.extend(chunk)
        if len(data) > 65536:
            raise _ConnectionClosed()
    head = bytes(data).split(b"\r\n\r\n", 1)[0].decode("latin-1")
    lines = head.split("\r\n")
    request_line = lines[0]
    headers = {}
    for line in lines[1:]:
        if ":" in line:
            k, v = line.split(":", 1)
            headers[k.strip().lower()] = v.strip()
    return request_line, headers


def catalog_summary(spec: ProsthesisSpec) -> dict:
    return {
        "id": spec.id,
        "display_name": spec.display_name,
        "static": spec.is_static,
        "joints": len(spec.articulation),
        "anchor_roles": sorted({a.role for a in spec.anchors}),
        "affordances": [
            {"gesture": a.gesture, "action": a.action.kind} for a in spec.affordances
        ],
        # Full document so clients can draw the geometry and articulate it.
        "spec": serialize_spec(spec),
    }


class LimbswapServer:
    """Socket service exposing sessions over protocol v1."""

    def __init__(
        self,
        host: str = "127.0.0.1",
        port: int = 0,
        catalog_dir: str | None = None,
        defaults: SessionConfig | None = None,
        ui_dir: str | None = None,
        idle_keepalive_s: float = 0.25,
    ):
        self.catalog = catalog_by_id(catalog_dir)
        if not self.catalog:
            raise BadConfig("catalog directory contains no prosthesis specs")
        self.defaults = defaults or SessionConfig()
        if self.defaults.prosthesis_id not in self.catalog:
            self.defaults = replace(self.defaults, prosthesis_id=sorted(self.catalog)[0])
        self.ui_dir = ui_dir
        self.idle_keepalive_s = idle_keepalive_s
        self._host, self._port = host, port
        self._listener: socket.socket | None = None
        self._threads: list[threading.Thread] = []
        self._conns: set[socket.socket] = set()
        self._lock = threading.Lock()
        self._stopping = threading.Event()

    # -- lifecycle --

    def start(self) -> tuple[str, int]:
        self._listener = socket.create_server((self._host, self._port))
        self._host, self._port = self._listener.getsockname()[:2]
        t = threading.Thread(target=self._accept_loop, name="limbswap-accept", daemon=True)
        t.start()
        self._threads.append(t)
        logger.info("listening on %s:%d", self._host, self._port)
        return self._host, self._port

    @property
    def address(self) -> tuple[str, int]:
        return self._host, self._port

    def shutdown(self) -> None:
        self._stopping.set()
        if self._listener is not None:
            try:
                self._listener.close()
            except OSError:
                pass
        with self._lock:
            conns = list(self._conns)
        for c in conns:
            try:
                c.shutdown(socket.SHUT_RDWR)  # wakes any blocked recv
            except OSError:
                pass
            try:
                c.close()
            except OSError:
                pass
        for t in self._threads:
            t.join(timeout=0.5)

    def serve_forever(self) -> None:
        self.start()
        try:
            self._stopping.wait()
        except KeyboardInterrupt:
            pass
        finally:
            self.shutdown()

    def _accept_loop(self) -> None:
        assert self._listener is not None
        while not self._stopping.is_set():
            try:
                sock, addr = self._listener.accept()
            except OSError:
                return
            with self._lock:
                self._conns.add(sock)
            t = threading.Thread(
                target=self._handle_connection, args=(sock, addr), daemon=True
            )
            t.start()
            self._threads.append(t)

    # -- connection handling --

    def _handle_connection(self, sock: socket.socket, addr) -> None:
        transport = None
        try:
            sock.settimeout(5.0)
            first = sock.recv(4, socket.MSG_PEEK)
            if first.startswith(b"GET"):
                transport = self._http_entry(sock)
                if transport is None:
                    return  # plain HTTP request served and closed
            else:
                transport = _LineTransport(sock)
            self._drive_session(transport)
        except (_ConnectionClosed, ConnectionError, OSError):
            pass
        except Exception:
            logger.exception("connection %s failed", addr)
        finally:
            if transport is not None:
                transport.close()
            else:
                try:
                    sock.close()
                except OSError:
                    pass
            with self._lock:
                self._conns.discard(sock)

    def _http_entry(self, sock: socket.socket) -> _WebSocketTransport | None:
        request_line, headers = _read_http_request(sock)
        parts = request_line.split()
        path = parts[1] if len(parts) >= 2 else "/"
        if headers.get("upgrade", "").lower() == "websocket":
            key = headers.get("sec-websocket-key", "")
            accept = base64.b64encode(hashlib.sha1((key + _WS_GUID).encode()).digest()).decode()
            sock.sendall(
                (
                    "HTTP/1.1 101 Switching Protocols\r\n"
                    "Upgrade: websocket\r\nConnection: Upgrade\r\n"
                    f"Sec-WebSocket-Accept: {accept}\r\n\r\n"
                ).encode()
            )
            return _WebSocketTransport(sock)
        self._serve_static(sock, path)
        return None

    def _serve_static(self, sock: socket.socket, path: str) -> None:
        def respond(status: str, body: bytes, ctype: str = "text/plain") -> None:
            head = (
                f"HTTP/1.1 {status}\r\nContent-Type: {ctype}\r\n"
                f"Content-Length: {len(body)}\r\nConnection: close\r\n\r\n"
            )
            sock.sendall(head.encode() + body)

        if self.ui_dir is None:
            respond("404 Not Found", b"no UI is being served; connect via the message protocol\n")
            return
        rel = path.split("?", 1)[0].lstrip("/") or "index.html"
        full = os.path.normpath(os.path.join(self.ui_dir, rel))
        if not full.startswith(os.path.normpath(self.ui_dir)) or not os.path.isfile(full):
            respond("404 Not Found", b"not found\n")
            return
        ctype = _CONTENT_TYPES.get(os.path.splitext(full)[1], "application/octet-stream")
        with open(full, "rb") as fh:
            respond("200 OK", fh.read(), ctype)

    def _drive_session(self, transport) -> None:
        def send(msg) -> None:
            transport.send_message(protocol.encode(msg))

        # Handshake: the first message must be a version-compatible hello.
        try:
            raw = transport.recv_message(timeout=10.0)
        except _Timeout:
            return
        try:
            msg = protocol.decode(raw)
        except LimbswapError as exc:
            send(protocol.Error(code=getattr(exc, "code", "MALFORMED"), message=str(exc)))
            return
        if not isinstance(msg, protocol.Hello):
            send(protocol.Error(code="UNKNOWN_STATE", message="expected hello before anything else"))
            return
        if msg.version != protocol.PROTOCOL_VERSION:
            send(
                protocol.Error(
                    code="VERSION_MISMATCH",
                    message=f"server speaks version {protocol.PROTOCOL_VERSION}, client sent {msg.version}",
                )
            )
            return
        summaries = [catalog_summary(s) for s in sorted(self.catalog.values(), key=lambda s: s.id)]
        send(protocol.HelloAck(version=protocol.PROTOCOL_VERSION, catalog=summaries))

        config = self.defaults
        session = create_session(config, self.catalog)
        pending: dict | None = None
        goal_reported = False

        def run_ticks(target: int, first_input: dict | None) -> None:
            nonlocal session, goal_reported
            inp = first_input
            while session.tick < target:
                session, frame = step(session, inp)
                inp = None
                if frame is not None:
                    send(protocol.Frame(frame=frame.to_record()))
                    if not goal_reported and any(e.get("kind") == "ball_goal" for e in frame.events):
                        goal_reported = True
                        send(protocol.Metrics(metrics=session_metrics(session).to_record()))

        while not self._stopping.is_set():
            try:
                raw = transport.recv_message(timeout=self.idle_keepalive_s)
            except _Timeout:
                # Idle keepalive: frames keep flowing with the held pose.
                ticks = max(1, int(round(self.idle_keepalive_s * config.tick_rate_hz)))
                run_ticks(session.tick + ticks, pending)
                pending = None
                continue
            try:
                msg = protocol.decode(raw)
            except LimbswapError as exc:
                send(protocol.Error(code=getattr(exc, "code", "MALFORMED"), message=str(exc)))
                continue

            if isinstance(msg, protocol.Pose):
                ts = msg.frame.get("timestamp_s")
                if not isinstance(ts, (int, float)) or not math.isfinite(ts) or ts < 0:
                    send(protocol.Event(event={"kind": "dropped_input", "tick": session.tick, "reason": "bad timestamp"}))
                    continue
                target = int(math.floor(ts * config.tick_rate_hz + 1e-9))
                if target <= session.tick:
                    if pending is not None:
                        send(
                            protocol.Event(
                                event={"kind": "dropped_input", "tick": session.tick, "reason": "superseded"}
                            )
                        )
                    pending = msg.frame
                else:
                    first = pending if pending is not None else msg.frame
                    consumed_new = pending is None
                    run_ticks(target, first)
                    pending = None if consumed_new else msg.frame
            elif isinstance(msg, protocol.SelectProsthesis):
                if msg.id not in self.catalog:
                    send(protocol.Error(code="UNKNOWN_PROSTHESIS", message=msg.id))
                    continue
                config = replace(config, prosthesis_id=msg.id)
                session = create_session(config, self.catalog)
                pending, goal_reported = None, False
            elif isinstance(msg, protocol.SelectTask):
                try:
                    new_config = replace(config, task_id=msg.id, task_config=msg.config)
                    session = create_session(new_config, self.catalog)
                except (UnknownTask, BadConfig, LimbswapError) as exc:
                    send(protocol.Error(code="BAD_CONFIG", message=str(exc)))
                    continue
                config = new_config
                pending, goal_reported = None, False
            elif isinstance(msg, protocol.Reset):
                session = create_session(config, self.catalog)
                pending, goal_reported = None, False
            elif isinstance(msg, protocol.ListProstheses):
                send(protocol.Catalog(catalog=summaries))
            elif isinstance(msg, protocol.Hello):
                send(protocol.Error(code="UNKNOWN_STATE", message="hello already completed"))
            else:
                send(protocol.Error(code="UNKNOWN_STATE", message=f"unexpected {type(msg).__name__}"))


@dataclass
class ClientConnection:
    """Minimal blocking client for tests, demos and scripted play."""

    sock: socket.socket
    transport: _LineTransport

    @classmethod
    def connect(cls, host: str, port: int, timeout: float = 10.0) -> "ClientConnection":
        sock = socket.create_connection((host, port), timeout=timeout)
        return cls(sock=sock, transport=_LineTransport(sock))

    def send(self, msg) -> None:
        self.transport.send_message(protocol.encode(msg))

    def recv(self, timeout: float = 10.0):
        return protocol.decode(self.transport.recv_message(timeout))

    def handshake(self, client_name: str = "client") -> protocol.HelloAck:
        self.send(protocol.Hello(version=protocol.PROTOCOL_VERSION, client_name=client_name))
        msg = self.recv()
        if isinstance(msg, protocol.Error):
            raise LimbswapError(f"handshake failed: {msg.code}: {msg.message}")
        assert isinstance(msg, protocol.HelloAck)
        return msg

    def close(self) -> None:
        self.transport.close()
