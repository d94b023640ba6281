"""Retargeting: a hand pose becomes a whisk (or eight tentacles).

The wrist frame composes with each spec's attachment transform; finger
channels drive articulation joints; geometry becomes world-space collision
spheres.
"""

import numpy as np

from limbswap.prosthesis import catalog_by_id
from limbswap.retarget import collision_proxy_world, object_pose
from limbswap.synth import make_frame

catalog = catalog_by_id()

# Identity-ish pose: the hand points its tool at the screen (world -Z).
pose = make_frame(0.0, wrist=(0.0, 0.1, 0.25))

whisk = catalog["whisk"]
placed = object_pose(pose, whisk)
print("whisk origin:", np.round(placed.transform.translation, 3))
head = placed.anchors_world[0]
print(f"whisk head anchor at {np.round(head.position, 3)} pointing {np.round(head.direction, 2)}")
print(f"collision proxy: {len(collision_proxy_world(whisk, placed))} spheres")

# The tentacle octet curls each arm from its own channel: five fingers,
# two grab, one pinch.
tentacles = catalog["tentacle_octet"]
open_hand = make_frame(0.0, wrist=(0, 0.1, 0.25))
fist = make_frame(0.0, wrist=(0, 0.1, 0.25), flexions=(1.0,) * 5, grab=1.0, pinch=1.0)
for label, p in (("open hand", open_hand), ("closed fist", fist)):
    angles = object_pose(p, tentacles).joint_angles
    print(f"{label}: joint angles", [round(a, 2) for a in angles])
