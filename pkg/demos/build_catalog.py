"""Regenerate the builtin prosthesis catalog data files.

Every shipped object is authored here as plain data and written through the
canonical serializer, so the files are guaranteed to parse and validate.
Run from the repository root:

    python demos/build_catalog.py
"""

from __future__ import annotations

import math
import os

import numpy as np

from limbswap.prosthesis import (
    Affordance,
    AffordanceAction,
    Anchor,
    Attachment,
    Box,
    Capsule,
    Channel,
    Joint,
    ProsthesisSpec,
    Sphere,
    spec_to_json,
    validate_spec,
)

IDENTITY = [1.0, 0.0, 0.0, 0.0]


def att(tz: float = 0.02, scale: float = 1.0) -> Attachment:
    """Standard attachment: object extends along wrist-local +Z."""
    return Attachment(np.array([0.0, 0.0, tz]), np.array(IDENTITY), scale)


def push(gain: float) -> Affordance:
    return Affordance("swipe", AffordanceAction("push", impulse_gain=gain))


def specs() -> list[ProsthesisSpec]:
    out = []

    out.append(
        ProsthesisSpec(
            id="whisk",
            display_name="Egg Whisk",
            geometry=(
                Capsule(np.array([0.0, 0.0, 0.0]), np.array([0.0, 0.0, 0.14]), 0.012),
                Sphere(np.array([0.0, 0.0, 0.19]), 0.045),
            ),
            attachment=att(),
            anchors=(
                Anchor("head", np.array([0.0, 0.0, 0.19]), np.array([0.0, 0.0, 1.0]), "surface"),
            ),
            affordances=(push(1.0),),
        )
    )

    out.append(
        ProsthesisSpec(
            id="hammer",
            display_name="Claw Hammer",
            geometry=(
                Capsule(np.array([0.0, 0.0, 0.0]), np.array([0.0, 0.0, 0.22]), 0.015),
                Box(
                    np.array([0.0, 0.0, 0.24]),
                    np.array([0.05, 0.02, 0.02]),
                    np.array(IDENTITY),
                ),
            ),
            attachment=att(),
            anchors=(
                Anchor("face", np.array([0.0, 0.0, 0.26]), np.array([0.0, 0.0, 1.0]), "tip"),
            ),
            affordances=(push(2.0),),
        )
    )

    out.append(
        ProsthesisSpec(
            id="paintbrush",
            display_name="Paintbrush",
            geometry=(
                Capsule(np.array([0.0, 0.0, 0.0]), np.array([0.0, 0.0, 0.16]), 0.008),
                Capsule(np.array([0.0, 0.0, 0.16]), np.array([0.0, 0.0, 0.21]), 0.010),
            ),
            attachment=att(),
            anchors=(
                Anchor("bristles", np.array([0.0, 0.0, 0.21]), np.array([0.0, 0.0, 1.0]), "tip"),
            ),
            motion_smoothing_alpha=0.1,
        )
    )

    # Pen tip sits 0.15 m from the wrist origin (attachment 0.02 + local 0.13),
    # matching the pen_stroke generator's default tip_offset.
    out.append(
        ProsthesisSpec(
            id="pen",
            display_name="Ballpoint Pen",
            geometry=(
                Capsule(np.array([0.0, 0.0, 0.0]), np.array([0.0, 0.0, 0.12]), 0.006),
                Sphere(np.array([0.0, 0.0, 0.13]), 0.004),
            ),
            attachment=att(),
            anchors=(
                Anchor("tip", np.array([0.0, 0.0, 0.13]), np.array([0.0, 0.0, 1.0]), "tip"),
            ),
        )
    )

    # Airbrush nozzle also sits 0.15 m out, so the same trace exercises
    # pen (contact) and airbrush (ray) drawing.
    out.append(
        ProsthesisSpec(
            id="airbrush",
            display_name="Airbrush Gun",
            geometry=(
                Box(np.array([0.0, -0.03, 0.04]), np.array([0.015, 0.03, 0.025]), np.array(IDENTITY)),
                Capsule(np.array([0.0, 0.0, 0.06]), np.array([0.0, 0.0, 0.13]), 0.012),
            ),
            attachment=att(),
            anchors=(
                Anchor("nozzle", np.array([0.0, 0.0, 0.13]), np.array([0.0, 0.0, 1.0]), "nozzle"),
            ),
            affordances=(Affordance("pinch", AffordanceAction("trigger", emission_rate=120.0)),),
        )
    )

    # Paw: pads push, toes curl with the index finger; deliberately no
    # grab_attach -- a paw has no opposable thumb.
    out.append(
        ProsthesisSpec(
            id="paw",
            display_name="Animal Paw",
            geometry=(
                Sphere(np.array([0.0, 0.0, 0.05]), 0.045),
                Sphere(np.array([-0.03, 0.0, 0.095]), 0.018, joint="toes"),
                Sphere(np.array([0.0, 0.0, 0.10]), 0.018, joint="toes"),
                Sphere(np.array([0.03, 0.0, 0.095]), 0.018, joint="toes"),
            ),
            attachment=att(),
            anchors=(
                Anchor("pad", np.array([0.0, 0.0, 0.05]), np.array([0.0, 0.0, 1.0]), "surface"),
            ),
            affordances=(push(1.2),),
            articulation=(
                Joint(
                    "toes",
                    np.array([1.0, 0.0, 0.0]),
                    np.array([0.0, 0.0, 0.07]),
                    0.0,
                    0.9,
                    Channel("finger_flexion", finger=1),
                ),
            ),
        )
    )

    # Butterfly: a delicate-touch object; above max_speed its contact
    # imparts nothing.
    out.append(
        ProsthesisSpec(
            id="butterfly",
            display_name="Butterfly",
            geometry=(
                Capsule(np.array([0.0, 0.0, 0.03]), np.array([0.0, 0.0, 0.08]), 0.008),
                Box(
                    np.array([-0.04, 0.0, 0.055]),
                    np.array([0.035, 0.002, 0.025]),
                    np.array(IDENTITY),
                    joint="wing_left",
                ),
                Box(
                    np.array([0.04, 0.0, 0.055]),
                    np.array([0.035, 0.002, 0.025]),
                    np.array(IDENTITY),
                    joint="wing_right",
                ),
            ),
            attachment=att(),
            anchors=(
                Anchor("body", np.array([0.0, 0.0, 0.055]), np.array([0.0, 0.0, 1.0]), "surface"),
            ),
            affordances=(
                Affordance("stillness", AffordanceAction("delicate_touch", max_speed=0.25)),
            ),
            articulation=(
                Joint(
                    "wing_left",
                    np.array([0.0, 0.0, 1.0]),
                    np.array([0.0, 0.0, 0.055]),
                    0.0,
                    0.9,
                    Channel("finger_flexion", finger=1),
                ),
                Joint(
                    "wing_right",
                    np.array([0.0, 0.0, -1.0]),
                    np.array([0.0, 0.0, 0.055]),
                    0.0,
                    0.9,
                    Channel("finger_flexion", finger=2),
                ),
            ),
            motion_smoothing_alpha=0.15,
        )
    )

    out.append(
        ProsthesisSpec(
            id="hook",
            display_name="Hook",
            geometry=(
                Capsule(np.array([0.0, 0.0, 0.0]), np.array([0.0, 0.0, 0.10]), 0.012),
                Sphere(np.array([0.02, 0.0, 0.115]), 0.015),
                Sphere(np.array([0.03, 0.0, 0.10]), 0.015),
                Sphere(np.array([0.035, 0.0, 0.085]), 0.015),
            ),
            attachment=att(),
            anchors=(
                Anchor("curl", np.array([0.025, 0.0, 0.10]), np.array([1.0, 0.0, 0.0]), "grip"),
            ),
            affordances=(Affordance("grab", AffordanceAction("grab_attach")),),
        )
    )

    # Eight tentacles radiating from the wrist; five curl with the fingers,
    # two with grab strength and one with pinch strength.
    tentacle_geometry = []
    tentacle_anchors = []
    tentacle_joints = []
    channels = [Channel("finger_flexion", finger=i) for i in range(5)]
    channels += [Channel("grab_strength"), Channel("grab_strength"), Channel("pinch_strength")]
    for k in range(8):
        theta = 2.0 * math.pi * k / 8.0
        c, s = math.cos(theta), math.sin(theta)
        base = np.array([0.03 * c, 0.03 * s, 0.03])
        tip = np.array([0.09 * c, 0.09 * s, 0.12])
        name = f"tentacle_{k}"
        tentacle_geometry.append(Capsule(base, tip, 0.012, joint=name))
        tentacle_anchors.append(
            Anchor(f"effector_{k}", base, np.array([c, s, 0.0]), "effector_base", joint=name)
        )
        tentacle_joints.append(
            Joint(name, np.array([-s, c, 0.0]), base, 0.0, 1.2, channels[k])
        )
    out.append(
        ProsthesisSpec(
            id="tentacle_octet",
            display_name="Tentacle Octet",
            geometry=tuple(tentacle_geometry),
            attachment=att(),
            anchors=tuple(tentacle_anchors),
            affordances=(push(1.0),),
            articulation=tuple(tentacle_joints),
            motion_smoothing_alpha=0.1,
        )
    )

    # Vehicles appear in testing lore only as trivially mappable objects;
    # a wheel with push is the one we ship.
    out.append(
        ProsthesisSpec(
            id="wheel",
            display_name="Wheel",
            geometry=(
                Capsule(np.array([-0.015, 0.0, 0.10]), np.array([0.015, 0.0, 0.10]), 0.09),
            ),
            attachment=att(),
            anchors=(
                Anchor("rim", np.array([0.0, 0.0, 0.19]), np.array([0.0, 0.0, 1.0]), "surface"),
            ),
            affordances=(push(1.5),),
        )
    )

    return out


def main() -> None:
    here = os.path.dirname(os.path.abspath(__file__))
    catalog_dir = os.path.join(here, "..", "src", "limbswap", "catalog")
    os.makedirs(catalog_dir, exist_ok=True)
    for spec in specs():
        report = validate_spec(spec)
        if report:
            raise SystemExit(f"{spec.id}: {report}")
        path = os.path.join(catalog_dir, f"{spec.id}.prosthesis.json")
        with open(path, "w") as fh:
            fh.write(spec_to_json(spec))
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
