"""Scanned-object ingestion: point cloud -> prosthesis spec.

Reads ASCII PLY clouds, fits an oriented bounding box by PCA with
deterministic axis ordering, derives a held-tool attachment (near end at
the wrist, long axis forward), builds a covering sphere proxy by voxel
downsampling, and assembles a ready-to-load spec.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import quat
from .errors import BadParameter, DegenerateCloud, ParseError, UnsupportedFormat
from .prosthesis import (
    Affordance,
    AffordanceAction,
    Anchor,
    Attachment,
    ProsthesisSpec,
    Sphere,
    validate_spec,
)


@dataclass(frozen=True, eq=False)
class PointCloud:
    points: np.ndarray  # (N, 3)
    source_label: str = ""

    def __post_init__(self):
        if self.points.ndim != 2 or self.points.shape[1] != 3 or len(self.points) == 0:
            raise BadParameter("point cloud must be a non-empty (N, 3) array")
        if not np.all(np.isfinite(self.points)):
            raise BadParameter("point cloud contains non-finite coordinates")


@dataclass(frozen=True, eq=False)
class OrientedBox:
    centroid: np.ndarray
    axes: np.ndarray  # rows, orthonormal, descending extent, right-handed
    half_extents: np.ndarray


def load_ply(content: str | bytes, source_label: str = "") -> PointCloud:
    """Parse an ASCII PLY with x, y, z vertex properties."""
    if isinstance(content, bytes):
        if b"format binary" in content[:256]:
            raise UnsupportedFormat("binary PLY is not supported; export ASCII PLY")
        try:
            content = content.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise UnsupportedFormat("not an ASCII PLY file") from exc
    lines = content.splitlines()
    if not lines or lines[0].strip() != "ply":
        raise ParseError("missing 'ply' magic", line=1)

    vertex_count = None
    fields: list[str] = []
    in_vertex_element = False
    body_start = None
    for i, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("comment"):
            continue
        parts = line.split()
        if parts[0] == "format":
            if parts[1] != "ascii":
                raise UnsupportedFormat(f"PLY format {parts[1]!r} not supported; use ascii")
        elif parts[0] == "element":
            in_vertex_element = parts[1] == "vertex"
            if in_vertex_element:
                try:
                    vertex_count = int(parts[2])
                except (IndexError, ValueError) as exc:
                    raise ParseError("bad vertex element declaration", line=i) from exc
        elif parts[0] == "property" and in_vertex_element:
            fields.append(parts[-1])
        elif parts[0] == "end_header":
            body_start = i
            break
    if body_start is None:
        raise ParseError("missing end_header")
    if vertex_count is None:
        raise ParseError("header declares no vertex element")
    for axis in ("x", "y", "z"):
        if axis not in fields:
            raise ParseError(f"vertex element lacks property {axis!r}")
    ix, iy, iz = fields.index("x"), fields.index("y"), fields.index("z")

    pts = np.empty((vertex_count, 3))
    row = 0
    for lineno, raw in enumerate(lines[body_start:], start=body_start + 1):
        line = raw.strip()
        if not line:
            continue
        if row >= vertex_count:
            break  # face data or trailing elements; vertices come first
        parts = line.split()
        if len(parts) < len(fields):
            raise ParseError(
                f"vertex line has {len(parts)} values, header declares {len(fields)}", line=lineno
            )
        try:
            pts[row] = (float(parts[ix]), float(parts[iy]), float(parts[iz]))
        except ValueError as exc:
            raise ParseError(f"bad vertex value: {exc}", line=lineno) from exc
        row += 1
    if row != vertex_count:
        raise ParseError(f"header declares {vertex_count} vertices, file has {row}")
    return PointCloud(pts, source_label=source_label)


def load_ply_file(path: str) -> PointCloud:
    with open(path, "rb") as fh:
        return load_ply(fh.read(), source_label=path)


def pca_obb(cloud: PointCloud) -> OrientedBox:
    """PCA-oriented bounding box with deterministic ordering.

    Axes are covariance eigenvectors in descending eigenvalue order; ties
    (within 1e-6 relative) are broken by dot with +X then +Y; each axis is
    sign-fixed to make its largest component positive and the triple is
    made right-handed by flipping the third axis.
    """
    pts = cloud.points
    if len(pts) < 4:
        raise DegenerateCloud(f"need at least 4 points, got {len(pts)}")
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    cov = centered.T @ centered / len(pts)
    evals, evecs = np.linalg.eigh(cov)  # ascending
    order = np.argsort(evals)[::-1]
    evals = evals[order]
    axes = evecs[:, order].T  # rows

    scale = max(float(evals[0]), 1e-300)
    if evals[1] / scale < 1e-12:
        raise DegenerateCloud("cloud rank < 2 (collinear or single point)")

    # Sign convention: largest-magnitude component positive.
    for i in range(3):
        j = int(np.argmax(np.abs(axes[i])))
        if axes[i][j] < 0:
            axes[i] = -axes[i]
    # Near-equal eigenvalues: order the tied group by dot with +X, then +Y.
    for i in range(2):
        if abs(evals[i] - evals[i + 1]) <= 1e-6 * scale:
            ki = (axes[i][0], axes[i][1])
            kj = (axes[i + 1][0], axes[i + 1][1])
            if kj > ki:
                axes[[i, i + 1]] = axes[[i + 1, i]]
                evals[[i, i + 1]] = evals[[i + 1, i]]
    proj = np.abs(centered @ axes.T)
    half = np.maximum(proj.max(axis=0), 1e-9)
    # Eigenvalue order and extent order can disagree on near-ties; the box
    # contract is descending extent, so that ordering wins.
    order = np.argsort(-half, kind="stable")
    axes, half = axes[order], half[order]
    if float(np.dot(np.cross(axes[0], axes[1]), axes[2])) < 0:
        axes[2] = -axes[2]
    return OrientedBox(centroid=centroid, axes=axes, half_extents=half)


def derive_attachment(obb: OrientedBox) -> Attachment:
    """Held-tool attachment: long axis to wrist +Z, second axis to +Y,
    near end of the box at the wrist origin."""
    a0, a1 = obb.axes[0], obb.axes[1]
    a2 = np.cross(a0, a1)
    # Columns are the images of (a0, a1, a0 x a1): +Z, +Y, and Z x Y = -X.
    target = np.array([[0.0, 0.0, -1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]])
    source = np.stack([a0, a1, a2], axis=1)
    rot_matrix = target @ source.T
    rotation = quat.from_matrix(rot_matrix)
    near_end = obb.centroid - obb.half_extents[0] * a0
    translation = -(rot_matrix @ near_end)
    return Attachment(translation=translation, rotation=rotation, scale=1.0)


def sphere_proxy(cloud: PointCloud, voxel: float) -> list[Sphere]:
    """Voxel-grid downsample to covering spheres.

    One sphere per occupied voxel at the mean of its points; the radius is
    voxel * sqrt(3)/2, grown when needed so every member point is covered.
    """
    if not voxel > 0:
        raise BadParameter(f"voxel = {voxel} must be positive")
    pts = cloud.points
    keys = np.floor(pts / voxel).astype(np.int64)
    groups: dict[tuple[int, int, int], list[int]] = {}
    for i, k in enumerate(map(tuple, keys)):
        groups.setdefault(k, []).append(i)
    base_r = voxel * math.sqrt(3.0) / 2.0
    spheres = []
    for key in sorted(groups):
        members = pts[groups[key]]
        center = members.mean(axis=0)
        max_dist = float(np.max(np.linalg.norm(members - center, axis=1)))
        spheres.append(Sphere(center=center, radius=max(base_r, max_dist)))
    return spheres


def scan_to_spec(
    cloud: PointCloud,
    id: str,
    voxel: float = 0.02,
    display_name: str | None = None,
) -> ProsthesisSpec:
    """Full pipeline: OBB -> attachment -> proxy spheres -> anchors."""
    obb = pca_obb(cloud)
    attachment = derive_attachment(obb)
    geometry = tuple(sphere_proxy(cloud, voxel))
    tip_pos = obb.centroid + obb.half_extents[0] * obb.axes[0]
    spec = ProsthesisSpec(
        id=id,
        display_name=display_name or id,
        geometry=geometry,
        attachment=attachment,
        anchors=(
            Anchor("tip", tip_pos, obb.axes[0].copy(), "tip"),
            Anchor("grip", obb.centroid.copy(), obb.axes[0].copy(), "grip"),
        ),
        affordances=(Affordance("swipe", AffordanceAction("push", impulse_gain=1.0)),),
    )
    report = validate_spec(spec)
    if report:
        raise BadParameter(f"scan produced an invalid spec: {report}")
    return spec
