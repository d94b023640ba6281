"""Prosthesis specifications: geometry, attachment, anchors, affordances.

A spec describes the digital object that replaces the hand: collision
primitives (spheres/capsules/boxes), a rigid attachment into the wrist
frame, named interaction anchors (tip, nozzle, grip, ...), a gesture ->
action affordance table, and optional single-axis articulation joints
driven by finger/pinch/grab channels.

Specs live in strict-schema ``.prosthesis.json`` documents; unknown fields
are rejected so replay golden files cannot silently absorb typos. The
builtin catalog ships as data files so users can add their own objects.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from importlib import resources
from typing import Any

import numpy as np

from . import quat
from .errors import InvariantError, ParseError, SchemaError

SPEC_VERSION = 1
UNIT_TOL = 1e-6

ROLES = ("tip", "nozzle", "grip", "surface", "effector_base")
GESTURES = ("pinch", "grab", "swipe", "stillness")
ACTION_KINDS = ("trigger", "grab_attach", "push", "delicate_touch")
CHANNEL_SOURCES = ("finger_flexion", "grab_strength", "pinch_strength")

# Default action parameters, applied when a document omits them.
DEFAULT_EMISSION_RATE = 120.0
DEFAULT_IMPULSE_GAIN = 1.0
DEFAULT_MAX_SPEED = 0.25


@dataclass(frozen=True, eq=False)
class Sphere:
    center: np.ndarray
    radius: float
    joint: str | None = None


@dataclass(frozen=True, eq=False)
class Capsule:
    p0: np.ndarray
    p1: np.ndarray
    radius: float
    joint: str | None = None


@dataclass(frozen=True, eq=False)
class Box:
    center: np.ndarray
    half_extents: np.ndarray
    orientation: np.ndarray  # unit quaternion (w, x, y, z)
    joint: str | None = None


Primitive = Sphere | Capsule | Box


@dataclass(frozen=True, eq=False)
class Attachment:
    translation: np.ndarray
    rotation: np.ndarray  # unit quaternion
    scale: float


@dataclass(frozen=True, eq=False)
class Anchor:
    name: str
    local_position: np.ndarray
    local_direction: np.ndarray  # unit
    role: str
    joint: str | None = None


@dataclass(frozen=True)
class AffordanceAction:
    kind: str
    emission_rate: float | None = None  # trigger
    impulse_gain: float | None = None  # push
    max_speed: float | None = None  # delicate_touch


@dataclass(frozen=True)
class Affordance:
    gesture: str
    action: AffordanceAction


@dataclass(frozen=True)
class Channel:
    source: str
    finger: int | None = None  # set for finger_flexion


@dataclass(frozen=True, eq=False)
class Joint:
    name: str
    axis: np.ndarray  # unit
    pivot: np.ndarray
    angle_lo: float
    angle_hi: float
    channel: Channel


@dataclass(frozen=True, eq=False)
class ProsthesisSpec:
    id: str
    display_name: str
    geometry: tuple[Primitive, ...]
    attachment: Attachment
    anchors: tuple[Anchor, ...] = ()
    affordances: tuple[Affordance, ...] = ()
    articulation: tuple[Joint, ...] = ()
    motion_smoothing_alpha: float = 0.0
    mesh_ref: str | None = None
    spec_version: int = SPEC_VERSION

    @property
    def is_static(self) -> bool:
        return not self.articulation

    def anchor(self, name: str) -> Anchor | None:
        for a in self.anchors:
            if a.name == name:
                return a
        return None

    def anchors_with_role(self, role: str) -> tuple[Anchor, ...]:
        return tuple(a for a in self.anchors if a.role == role)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProsthesisSpec):
            return NotImplemented
        return serialize_spec(self) == serialize_spec(other)


def affordance_lookup(spec: ProsthesisSpec, gesture: str) -> AffordanceAction | None:
    """First affordance declared for ``gesture``, or None."""
    for aff in spec.affordances:
        if aff.gesture == gesture:
            return aff.action
    return None


def find_action(spec: ProsthesisSpec, kind: str) -> AffordanceAction | None:
    """First affordance whose action is of ``kind``, regardless of gesture."""
    for aff in spec.affordances:
        if aff.action.kind == kind:
            return aff.action
    return None


def action_gesture(spec: ProsthesisSpec, kind: str) -> str | None:
    for aff in spec.affordances:
        if aff.action.kind == kind:
            return aff.gesture
    return None


# --- strict document parsing ---


_REQUIRED = object()


def _known(rec: dict, path: str, known: tuple[str, ...]) -> None:
    unknown = [k for k in rec if k not in known]
    if unknown:
        raise SchemaError(f"unknown field(s) {unknown}", path)


def _get(rec: dict, path: str, name: str, default=_REQUIRED):
    if name not in rec:
        if default is _REQUIRED:
            raise SchemaError("missing required field", f"{path}.{name}" if path else name)
        return default
    return rec[name]


def _float(x, path: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise SchemaError(f"expected a number, got {type(x).__name__}", path)
    x = float(x)
    if not math.isfinite(x):
        raise SchemaError("must be finite", path)
    return x


def _vec3(x, path: str) -> np.ndarray:
    if not isinstance(x, (list, tuple)) or len(x) != 3:
        raise SchemaError("expected a 3-element array", path)
    return np.array([_float(v, f"{path}[{i}]") for i, v in enumerate(x)])


def _quat4(x, path: str) -> np.ndarray:
    if not isinstance(x, (list, tuple)) or len(x) != 4:
        raise SchemaError("expected a 4-element [w,x,y,z] array", path)
    return np.array([_float(v, f"{path}[{i}]") for i, v in enumerate(x)])


def _str(x, path: str) -> str:
    if not isinstance(x, str):
        raise SchemaError(f"expected a string, got {type(x).__name__}", path)
    return x


def _enum(x, path: str, allowed: tuple[str, ...]) -> str:
    s = _str(x, path)
    if s not in allowed:
        raise SchemaError(f"{s!r} not one of {list(allowed)}", path)
    return s


def _joint_name(rec: dict, path: str) -> str | None:
    j = rec.get("joint")
    if j is None:
        return None
    return _str(j, f"{path}.joint")


def _parse_primitive(rec: Any, path: str) -> Primitive:
    if not isinstance(rec, dict):
        raise SchemaError("expected an object", path)
    shape = _enum(_get(rec, path, "shape"), f"{path}.shape", ("sphere", "capsule", "box"))
    if shape == "sphere":
        _known(rec, path, ("shape", "center", "radius", "joint"))
        return Sphere(
            center=_vec3(_get(rec, path, "center"), f"{path}.center"),
            radius=_float(_get(rec, path, "radius"), f"{path}.radius"),
            joint=_joint_name(rec, path),
        )
    if shape == "capsule":
        _known(rec, path, ("shape", "p0", "p1", "radius", "joint"))
        return Capsule(
            p0=_vec3(_get(rec, path, "p0"), f"{path}.p0"),
            p1=_vec3(_get(rec, path, "p1"), f"{path}.p1"),
            radius=_float(_get(rec, path, "radius"), f"{path}.radius"),
            joint=_joint_name(rec, path),
        )
    _known(rec, path, ("shape", "center", "half_extents", "orientation", "joint"))
    return Box(
        center=_vec3(_get(rec, path, "center"), f"{path}.center"),
        half_extents=_vec3(_get(rec, path, "half_extents"), f"{path}.half_extents"),
        orientation=_quat4(rec.get("orientation", [1.0, 0.0, 0.0, 0.0]), f"{path}.orientation"),
        joint=_joint_name(rec, path),
    )


def _parse_action(rec: Any, path: str) -> AffordanceAction:
    if not isinstance(rec, dict):
        raise SchemaError("expected an object", path)
    kind = _enum(_get(rec, path, "kind"), f"{path}.kind", ACTION_KINDS)
    _known(rec, path, ("kind", "emission_rate", "impulse_gain", "max_speed"))
    act = AffordanceAction(kind=kind)
    if kind == "trigger":
        act = AffordanceAction(
            kind, emission_rate=_float(rec.get("emission_rate", DEFAULT_EMISSION_RATE), f"{path}.emission_rate")
        )
    elif kind == "push":
        act = AffordanceAction(
            kind, impulse_gain=_float(rec.get("impulse_gain", DEFAULT_IMPULSE_GAIN), f"{path}.impulse_gain")
        )
    elif kind == "delicate_touch":
        act = AffordanceAction(
            kind, max_speed=_float(rec.get("max_speed", DEFAULT_MAX_SPEED), f"{path}.max_speed")
        )
    for extra in ("emission_rate", "impulse_gain", "max_speed"):
        if extra in rec and getattr(act, extra) is None:
            raise SchemaError(f"parameter does not belong to action kind {kind!r}", f"{path}.{extra}")
    return act


def _parse_channel(rec: Any, path: str) -> Channel:
    if not isinstance(rec, dict):
        raise SchemaError("expected an object", path)
    source = _enum(_get(rec, path, "source"), f"{path}.source", CHANNEL_SOURCES)
    if source == "finger_flexion":
        _known(rec, path, ("source", "finger"))
        finger = _get(rec, path, "finger")
        if isinstance(finger, bool) or not isinstance(finger, int):
            raise SchemaError("finger index must be an integer", f"{path}.finger")
        return Channel(source, finger=finger)
    _known(rec, path, ("source",))
    return Channel(source)


def parse_spec_document(doc: Any) -> ProsthesisSpec:
    """Parse a decoded JSON document into a spec (no invariant checking)."""
    if not isinstance(doc, dict):
        raise SchemaError("spec document must be a JSON object")
    _known(
        doc,
        "",
        (
            "spec_version",
            "id",
            "display_name",
            "geometry",
            "mesh_ref",
            "attachment",
            "anchors",
            "affordances",
            "articulation",
            "motion_smoothing_alpha",
        ),
    )
    version = _get(doc, "", "spec_version")
    if version != SPEC_VERSION:
        raise SchemaError(f"unsupported version {version!r} (expected {SPEC_VERSION})", "spec_version")

    geometry_rec = _get(doc, "", "geometry")
    if not isinstance(geometry_rec, list):
        raise SchemaError("expected an array", "geometry")
    geometry = tuple(_parse_primitive(g, f"geometry[{i}]") for i, g in enumerate(geometry_rec))

    att_rec = _get(doc, "", "attachment")
    if not isinstance(att_rec, dict):
        raise SchemaError("expected an object", "attachment")
    _known(att_rec, "attachment", ("translation", "rotation", "scale"))
    attachment = Attachment(
        translation=_vec3(_get(att_rec, "attachment", "translation"), "attachment.translation"),
        rotation=_quat4(_get(att_rec, "attachment", "rotation"), "attachment.rotation"),
        scale=_float(_get(att_rec, "attachment", "scale"), "attachment.scale"),
    )

    anchors = []
    anchors_rec = doc.get("anchors", [])
    if not isinstance(anchors_rec, list):
        raise SchemaError("expected an array", "anchors")
    for i, a in enumerate(anchors_rec):
        path = f"anchors[{i}]"
        if not isinstance(a, dict):
            raise SchemaError("expected an object", path)
        _known(a, path, ("name", "local_position", "local_direction", "role", "joint"))
        anchors.append(
            Anchor(
                name=_str(_get(a, path, "name"), f"{path}.name"),
                local_position=_vec3(_get(a, path, "local_position"), f"{path}.local_position"),
                local_direction=_vec3(_get(a, path, "local_direction"), f"{path}.local_direction"),
                role=_enum(_get(a, path, "role"), f"{path}.role", ROLES),
                joint=_joint_name(a, path),
            )
        )

    affordances = []
    aff_rec = doc.get("affordances", [])
    if not isinstance(aff_rec, list):
        raise SchemaError("expected an array", "affordances")
    for i, a in enumerate(aff_rec):
        path = f"affordances[{i}]"
        if not isinstance(a, dict):
            raise SchemaError("expected an object", path)
        _known(a, path, ("gesture", "action"))
        affordances.append(
            Affordance(
                gesture=_enum(_get(a, path, "gesture"), f"{path}.gesture", GESTURES),
                action=_parse_action(_get(a, path, "action"), f"{path}.action"),
            )
        )

    joints = []
    art_rec = doc.get("articulation", [])
    if not isinstance(art_rec, list):
        raise SchemaError("expected an array", "articulation")
    for i, j in enumerate(art_rec):
        path = f"articulation[{i}]"
        if not isinstance(j, dict):
            raise SchemaError("expected an object", path)
        _known(j, path, ("name", "axis", "pivot", "angle_lo", "angle_hi", "channel"))
        joints.append(
            Joint(
                name=_str(_get(j, path, "name"), f"{path}.name"),
                axis=_vec3(_get(j, path, "axis"), f"{path}.axis"),
                pivot=_vec3(_get(j, path, "pivot"), f"{path}.pivot"),
                angle_lo=_float(_get(j, path, "angle_lo"), f"{path}.angle_lo"),
                angle_hi=_float(_get(j, path, "angle_hi"), f"{path}.angle_hi"),
                channel=_parse_channel(_get(j, path, "channel"), f"{path}.channel"),
            )
        )

    mesh_ref = doc.get("mesh_ref")
    if mesh_ref is not None:
        mesh_ref = _str(mesh_ref, "mesh_ref")

    return ProsthesisSpec(
        id=_str(_get(doc, "", "id"), "id"),
        display_name=_str(_get(doc, "", "display_name"), "display_name"),
        geometry=geometry,
        attachment=attachment,
        anchors=tuple(anchors),
        affordances=tuple(affordances),
        articulation=tuple(joints),
        motion_smoothing_alpha=_float(doc.get("motion_smoothing_alpha", 0.0), "motion_smoothing_alpha"),
        mesh_ref=mesh_ref,
        spec_version=SPEC_VERSION,
    )


# --- invariants ---


def _unit_violation(v: np.ndarray, what: str) -> str | None:
    n = float(np.linalg.norm(v))
    if n == 0.0:
        return f"{what}: zero axis"
    if abs(n - 1.0) > UNIT_TOL:
        return f"{what}: not unit length (norm {n:.9f})"
    return None


def bounding_radius(spec: ProsthesisSpec) -> float:
    """Radius of the smallest origin-centered sphere containing the geometry."""
    r = 0.0
    for g in spec.geometry:
        if isinstance(g, Sphere):
            r = max(r, float(np.linalg.norm(g.center)) + g.radius)
        elif isinstance(g, Capsule):
            r = max(r, max(float(np.linalg.norm(g.p0)), float(np.linalg.norm(g.p1))) + g.radius)
        else:
            r = max(r, float(np.linalg.norm(g.center)) + float(np.linalg.norm(g.half_extents)))
    return r


def type_violations(spec: ProsthesisSpec) -> list[str]:
    """Violations of the structural invariants every spec must satisfy."""
    out: list[str] = []
    if not spec.id:
        out.append("id: must be non-empty")

    for i, g in enumerate(spec.geometry):
        where = f"geometry[{i}]"
        if isinstance(g, (Sphere, Capsule)) and not g.radius > 0:
            out.append(f"{where}: radius must be positive")
        if isinstance(g, Box):
            if not np.all(g.half_extents > 0):
                out.append(f"{where}: half_extents must be positive")
            v = _unit_violation(g.orientation, f"{where}.orientation")
            if v:
                out.append(v)

    if not spec.attachment.scale > 0:
        out.append("attachment.scale: must be positive")
    v = _unit_violation(spec.attachment.rotation, "attachment.rotation")
    if v:
        out.append(v)

    seen = set()
    for i, a in enumerate(spec.anchors):
        v = _unit_violation(a.local_direction, f"anchors[{i}].local_direction")
        if v:
            out.append(v)
        if a.name in seen:
            out.append(f"anchors[{i}]: duplicate anchor name {a.name!r}")
        seen.add(a.name)

    roles = {a.role for a in spec.anchors}
    for i, aff in enumerate(spec.affordances):
        act = aff.action
        if act.kind == "grab_attach" and "grip" not in roles:
            out.append(f"affordances[{i}]: grab_attach requires a grip anchor, none present")
        if act.kind == "trigger" and not roles & {"nozzle", "tip"}:
            out.append(f"affordances[{i}]: trigger requires a nozzle or tip anchor, none present")
        for pname in ("emission_rate", "impulse_gain", "max_speed"):
            val = getattr(act, pname)
            if val is not None and not val > 0:
                out.append(f"affordances[{i}].action.{pname}: must be positive")

    joint_names = set()
    for i, j in enumerate(spec.articulation):
        where = f"articulation[{i}]"
        v = _unit_violation(j.axis, f"{where}.axis")
        if v:
            out.append(v)
        if j.angle_lo > j.angle_hi:
            out.append(f"{where}: angle_lo > angle_hi")
        if j.name in joint_names:
            out.append(f"{where}: duplicate joint name {j.name!r}")
        joint_names.add(j.name)
        if j.channel.source == "finger_flexion" and not 0 <= (j.channel.finger or 0) <= 4:
            out.append(f"{where}.channel.finger: index {j.channel.finger} outside 0..4")

    for i, g in enumerate(spec.geometry):
        if g.joint is not None and g.joint not in joint_names:
            out.append(f"geometry[{i}].joint: unknown joint {g.joint!r}")
    for i, a in enumerate(spec.anchors):
        if a.joint is not None and a.joint not in joint_names:
            out.append(f"anchors[{i}].joint: unknown joint {a.joint!r}")

    if not 0.0 <= spec.motion_smoothing_alpha <= 1.0:
        out.append("motion_smoothing_alpha: outside [0, 1]")
    return out


def validate_spec(spec: ProsthesisSpec) -> list[str]:
    """Full validation report: type invariants plus placement lints."""
    out = type_violations(spec)
    bound = 2.0 * bounding_radius(spec)
    for i, a in enumerate(spec.anchors):
        d = float(np.linalg.norm(a.local_position))
        if d > bound + 1e-12:
            out.append(
                f"anchors[{i}] ({a.name!r}): anchor outside bounds "
                f"(|position| {d:.3f} m > 2x bounding radius {bound:.3f} m)"
            )
    return out


def load_spec(document: str | bytes | dict) -> ProsthesisSpec:
    """Parse and validate a spec document (text, bytes, or decoded object)."""
    if isinstance(document, (str, bytes)):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    else:
        doc = document
    spec = parse_spec_document(doc)
    violations = type_violations(spec)
    if violations:
        raise InvariantError("; ".join(violations))
    return spec


def load_spec_file(path: str) -> ProsthesisSpec:
    with open(path, "r") as fh:
        return load_spec(fh.read())


# --- serialization ---


def _vec_list(v: np.ndarray) -> list[float]:
    return [float(x) for x in v]


def _primitive_record(g: Primitive) -> dict:
    if isinstance(g, Sphere):
        rec: dict = {"shape": "sphere", "center": _vec_list(g.center), "radius": g.radius}
    elif isinstance(g, Capsule):
        rec = {"shape": "capsule", "p0": _vec_list(g.p0), "p1": _vec_list(g.p1), "radius": g.radius}
    else:
        rec = {
            "shape": "box",
            "center": _vec_list(g.center),
            "half_extents": _vec_list(g.half_extents),
            "orientation": _vec_list(g.orientation),
        }
    if g.joint is not None:
        rec["joint"] = g.joint
    return rec


def _action_record(a: AffordanceAction) -> dict:
    rec: dict = {"kind": a.kind}
    for pname in ("emission_rate", "impulse_gain", "max_speed"):
        val = getattr(a, pname)
        if val is not None:
            rec[pname] = val
    return rec


def serialize_spec(spec: ProsthesisSpec) -> dict:
    """Canonical document form; ``load_spec(serialize_spec(s)) == s``."""
    doc: dict = {
        "spec_version": spec.spec_version,
        "id": spec.id,
        "display_name": spec.display_name,
        "geometry": [_primitive_record(g) for g in spec.geometry],
        "attachment": {
            "translation": _vec_list(spec.attachment.translation),
            "rotation": _vec_list(spec.attachment.rotation),
            "scale": spec.attachment.scale,
        },
        "anchors": [
            {
                "name": a.name,
                "local_position": _vec_list(a.local_position),
                "local_direction": _vec_list(a.local_direction),
                "role": a.role,
                **({"joint": a.joint} if a.joint is not None else {}),
            }
            for a in spec.anchors
        ],
        "affordances": [
            {"gesture": a.gesture, "action": _action_record(a.action)} for a in spec.affordances
        ],
        "articulation": [
            {
                "name": j.name,
                "axis": _vec_list(j.axis),
                "pivot": _vec_list(j.pivot),
                "angle_lo": j.angle_lo,
                "angle_hi": j.angle_hi,
                "channel": (
                    {"source": j.channel.source, "finger": j.channel.finger}
                    if j.channel.source == "finger_flexion"
                    else {"source": j.channel.source}
                ),
            }
            for j in spec.articulation
        ],
        "motion_smoothing_alpha": spec.motion_smoothing_alpha,
    }
    if spec.mesh_ref is not None:
        doc["mesh_ref"] = spec.mesh_ref
    return doc


def spec_to_json(spec: ProsthesisSpec) -> str:
    return json.dumps(serialize_spec(spec), indent=2) + "\n"


# --- catalog ---


def catalog_dir_default() -> str:
    env = os.environ.get("LIMBSWAP_CATALOG")
    if env:
        return env
    return str(resources.files("limbswap").joinpath("catalog"))


def builtin_catalog(catalog_dir: str | None = None) -> list[ProsthesisSpec]:
    """Load every ``*.prosthesis.json`` in the catalog directory, sorted by id."""
    d = catalog_dir or catalog_dir_default()
    specs = []
    for name in sorted(os.listdir(d)):
        if name.endswith(".prosthesis.json"):
            specs.append(load_spec_file(os.path.join(d, name)))
    return sorted(specs, key=lambda s: s.id)


def catalog_by_id(catalog_dir: str | None = None) -> dict[str, ProsthesisSpec]:
    return {s.id: s for s in builtin_catalog(catalog_dir)}


# --- display mesh (OBJ subset: v/f triangles only) ---


def load_obj(source: str) -> tuple[np.ndarray, np.ndarray]:
    """Parse an OBJ subset: ``v x y z`` and triangular ``f i j k`` lines."""
    verts: list[list[float]] = []
    faces: list[list[int]] = []
    for lineno, line in enumerate(source.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if parts[0] == "v" and len(parts) == 4:
            try:
                verts.append([float(x) for x in parts[1:]])
            except ValueError as exc:
                raise ParseError(f"bad vertex: {stripped}", line=lineno) from exc
        elif parts[0] == "f":
            if len(parts) != 4:
                raise ParseError("only triangular faces are supported", line=lineno)
            try:
                idx = [int(p.split("/")[0]) - 1 for p in parts[1:]]
            except ValueError as exc:
                raise ParseError(f"bad face: {stripped}", line=lineno) from exc
            faces.append(idx)
        else:
            raise ParseError(f"unsupported OBJ directive {parts[0]!r}", line=lineno)
    v = np.array(verts, dtype=np.float64) if verts else np.zeros((0, 3))
    f = np.array(faces, dtype=np.int64) if faces else np.zeros((0, 3), dtype=np.int64)
    if len(f) and (f.min() < 0 or f.max() >= len(v)):
        raise ParseError("face index out of range")
    return v, f
