"""Wire protocol: JSON message envelopes, version 1.

Every message is a single JSON object carrying a ``type`` token with the
payload flattened beside it. Transports frame messages as lines (plain
sockets) or as WebSocket text frames (browsers); the envelope bytes are
identical either way.

``decode(encode(m)) == m`` for every message kind; unknown types and
missing fields raise :class:`ProtocolError` with a stable code.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .errors import ProtocolError

PROTOCOL_VERSION = 1

POSE_FIELDS = (
    "timestamp_s",
    "palm_pos",
    "palm_quat",
    "wrist_pos",
    "fingers",
    "pinch_strength",
    "grab_strength",
    "confidence",
)
FRAME_FIELDS = ("tick", "object", "hand_visible", "task_view", "events", "metrics")
METRICS_FIELDS = ("time_to_goal_s", "path_efficiency", "stroke_rms_deviation_m", "ink_coverage")


@dataclass(frozen=True)
class Hello:
    version: int = PROTOCOL_VERSION
    client_name: str = ""


@dataclass(frozen=True)
class Pose:
    frame: dict  # pose record, fields as in the .poses.jsonl format


@dataclass(frozen=True)
class SelectProsthesis:
    id: str


@dataclass(frozen=True)
class SelectTask:
    id: str
    config: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Reset:
    pass


@dataclass(frozen=True)
class ListProstheses:
    pass


@dataclass(frozen=True)
class HelloAck:
    version: int
    catalog: list


@dataclass(frozen=True)
class Frame:
    frame: dict  # render frame record


@dataclass(frozen=True)
class Metrics:
    metrics: dict


@dataclass(frozen=True)
class Event:
    event: dict


@dataclass(frozen=True)
class Error:
    code: str
    message: str


@dataclass(frozen=True)
class Catalog:
    catalog: list


Message = (
    Hello
    | Pose
    | SelectProsthesis
    | SelectTask
    | Reset
    | ListProstheses
    | HelloAck
    | Frame
    | Metrics
    | Event
    | Error
    | Catalog
)


def _require(rec: dict, name: str, path: str = "") -> Any:
    if name not in rec:
        raise ProtocolError("MISSING_FIELD", f"{path}{name}")
    return rec[name]


def _check_pose_record(rec: dict) -> dict:
    for f in POSE_FIELDS:
        _require(rec, f)
    fingers = rec["fingers"]
    if not isinstance(fingers, list) or len(fingers) != 5:
        raise ProtocolError("MISSING_FIELD", "fingers (expected 5 entries)")
    for i, fr in enumerate(fingers):
        if not isinstance(fr, dict):
            raise ProtocolError("MISSING_FIELD", f"fingers[{i}]")
        for f in ("flex", "tip"):
            if f not in fr:
                raise ProtocolError("MISSING_FIELD", f"fingers[{i}].{f}")
    return {f: rec[f] for f in POSE_FIELDS}


def encode(msg: Message) -> bytes:
    """Envelope bytes for a message (no framing newline)."""
    if isinstance(msg, Hello):
        env: dict = {"type": "hello", "version": msg.version, "client_name": msg.client_name}
    elif isinstance(msg, Pose):
        env = {"type": "pose", **msg.frame}
    elif isinstance(msg, SelectProsthesis):
        env = {"type": "select_prosthesis", "id": msg.id}
    elif isinstance(msg, SelectTask):
        env = {"type": "select_task", "id": msg.id, "config": msg.config}
    elif isinstance(msg, Reset):
        env = {"type": "reset"}
    elif isinstance(msg, ListProstheses):
        env = {"type": "list_prostheses"}
    elif isinstance(msg, HelloAck):
        env = {"type": "hello_ack", "version": msg.version, "catalog": msg.catalog}
    elif isinstance(msg, Frame):
        env = {"type": "frame", **msg.frame}
    elif isinstance(msg, Metrics):
        env = {"type": "metrics", **msg.metrics}
    elif isinstance(msg, Event):
        env = {"type": "event", **msg.event}
    elif isinstance(msg, Error):
        env = {"type": "error", "code": msg.code, "message": msg.message}
    elif isinstance(msg, Catalog):
        env = {"type": "catalog", "catalog": msg.catalog}
    else:
        raise ProtocolError("UNKNOWN_TYPE", type(msg).__name__)
    return json.dumps(env, separators=(",", ":")).encode()


def decode(data: bytes | str) -> Message:
    if isinstance(data, bytes):
        data = data.decode("utf-8", errors="replace")
    try:
        rec = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ProtocolError("MALFORMED", exc.msg) from exc
    if not isinstance(rec, dict):
        raise ProtocolError("MALFORMED", "message must be a JSON object")
    kind = _require(rec, "type")

    if kind == "hello":
        version = _require(rec, "version")
        if not isinstance(version, int):
            raise ProtocolError("MISSING_FIELD", "version (must be an integer)")
        return Hello(version=version, client_name=str(rec.get("client_name", "")))
    if kind == "pose":
        body = dict(rec)
        body.pop("type")
        return Pose(frame=_check_pose_record(body))
    if kind == "select_prosthesis":
        return SelectProsthesis(id=str(_require(rec, "id")))
    if kind == "select_task":
        config = rec.get("config") or {}
        if not isinstance(config, dict):
            raise ProtocolError("MISSING_FIELD", "config (must be an object)")
        return SelectTask(id=str(_require(rec, "id")), config=config)
    if kind == "reset":
        return Reset()
    if kind == "list_prostheses":
        return ListProstheses()
    if kind == "hello_ack":
        version = _require(rec, "version")
        catalog = _require(rec, "catalog")
        if not isinstance(catalog, list):
            raise ProtocolError("MISSING_FIELD", "catalog (must be an array)")
        return HelloAck(version=version, catalog=catalog)
    if kind == "frame":
        body = dict(rec)
        body.pop("type")
        for f in FRAME_FIELDS:
            _require(body, f)
        return Frame(frame={f: body[f] for f in FRAME_FIELDS})
    if kind == "metrics":
        body = dict(rec)
        body.pop("type")
        for f in METRICS_FIELDS:
            _require(body, f)
        return Metrics(metrics={f: body[f] for f in METRICS_FIELDS})
    if kind == "event":
        body = dict(rec)
        body.pop("type")
        _require(body, "kind")
        return Event(event=body)
    if kind == "error":
        return Error(code=str(_require(rec, "code")), message=str(_require(rec, "message")))
    if kind == "catalog":
        catalog = _require(rec, "catalog")
        if not isinstance(catalog, list):
            raise ProtocolError("MISSING_FIELD", "catalog (must be an array)")
        return Catalog(catalog=catalog)
    raise ProtocolError("UNKNOWN_TYPE", str(kind))
