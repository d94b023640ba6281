"""Command-line entry points.

Subcommands: simulate (replay a trace through a session), serve (live
service), validate (check a prosthesis spec), ingest-scan (point cloud ->
spec), replay (frame-log inspection/digest), catalog (list builtin ids).

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

from .engine import SessionConfig, frames_digest, load_frames, record_frames, run_replay
from .errors import LimbswapError
from .gestures import gesture_config_from_mapping
from .pose import load_trace
from .prosthesis import (
    builtin_catalog,
    catalog_by_id,
    load_spec_file,
    spec_to_json,
    validate_spec,
)
from .scan import load_ply_file, scan_to_spec
from .server import LimbswapServer

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    p = _Parser(prog="limbswap", description="virtual prosthesis engine and live service")
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="replay a pose trace through a session", parents=[])
    sim.add_argument("--trace", required=True, help="pose trace file (.poses.jsonl)")
    sim.add_argument("--prosthesis", required=True, help="catalog id or spec file path")
    sim.add_argument("--task", required=True, choices=["ball", "draw"])
    sim.add_argument("--task-config", help="task config JSON file")
    sim.add_argument("--gesture-config", help="gesture threshold JSON file, merged over defaults")
    sim.add_argument("--out", help="write metrics JSON here (default: stdout)")
    sim.add_argument("--frames", help="write the frame log here (.frames.jsonl)")
    sim.add_argument("--catalog", help="catalog directory override")

    srv = sub.add_parser("serve", help="run the live session service")
    srv.add_argument("--bind", default="127.0.0.1:7877", help="address:port (default %(default)s)")
    srv.add_argument("--catalog", help="catalog directory override")
    srv.add_argument("--serve-ui", help="static UI directory to serve over HTTP")
    srv.add_argument("--prosthesis", default="whisk", help="default prosthesis id")
    srv.add_argument("--task", default="ball", choices=["ball", "draw"], help="default task")

    val = sub.add_parser("validate", help="validate a prosthesis spec file")
    val.add_argument("spec", help="spec file (.prosthesis.json)")

    scan = sub.add_parser("ingest-scan", help="convert an ASCII PLY cloud to a prosthesis spec")
    scan.add_argument("cloud", help="point cloud file (.ply)")
    scan.add_argument("--id", required=True, help="id token for the new spec")
    scan.add_argument("--voxel", type=float, default=0.02, help="proxy voxel size in meters")
    scan.add_argument("--out", required=True, help="output spec file")

    rep = sub.add_parser("replay", help="inspect a recorded frame log")
    rep.add_argument("--frames", required=True, help="frame log (.frames.jsonl)")
    rep.add_argument("--hash", action="store_true", help="print the 64-bit digest of the log")

    sub.add_parser("catalog", help="list builtin prosthesis ids")
    return p


def _load_json_file(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _resolve_prosthesis(token: str, catalog_dir: str | None):
    """A catalog id, or a path to a spec file (added to the catalog)."""
    catalog = catalog_by_id(catalog_dir)
    if token in catalog:
        return token, catalog
    if os.path.exists(token):
        spec = load_spec_file(token)
        catalog[spec.id] = spec
        return spec.id, catalog
    raise LimbswapError(
        f"prosthesis {token!r} is neither a catalog id ({', '.join(sorted(catalog))}) nor a file"
    )


def _cmd_simulate(args) -> int:
    trace = load_trace(args.trace)
    prosthesis_id, catalog = _resolve_prosthesis(args.prosthesis, args.catalog)
    task_config = _load_json_file(args.task_config) if args.task_config else {}
    gesture_overrides = _load_json_file(args.gesture_config) if args.gesture_config else None
    config = SessionConfig(
        prosthesis_id=prosthesis_id,
        task_id=args.task,
        task_config=task_config,
        gesture_config=gesture_config_from_mapping(gesture_overrides),
    )
    result = run_replay(trace, config, catalog)
    if args.frames:
        record_frames(result.frames, args.frames)
    doc = {
        "trace": args.trace,
        "prosthesis_id": prosthesis_id,
        "task_id": args.task,
        "ticks": result.final_state.tick,
        "frames": len(result.frames),
        **result.metrics.to_record(),
    }
    payload = json.dumps(doc, indent=2) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)
    return EXIT_OK


def _cmd_serve(args) -> int:
    host, _, port = args.bind.rpartition(":")
    if not host or not port.isdigit():
        print(f"limbswap serve: bad --bind {args.bind!r}, expected host:port", file=sys.stderr)
        return EXIT_USAGE
    defaults = SessionConfig(prosthesis_id=args.prosthesis, task_id=args.task)
    server = LimbswapServer(
        host=host,
        port=int(port),
        catalog_dir=args.catalog,
        defaults=defaults,
        ui_dir=args.serve_ui,
    )
    addr = server.start()
    print(f"limbswap service on {addr[0]}:{addr[1]} (ctrl-c to stop)", flush=True)
    try:
        server._stopping.wait()
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
    return EXIT_OK


def _cmd_validate(args) -> int:
    spec = load_spec_file(args.spec)
    report = validate_spec(spec)
    if report:
        for violation in report:
            print(f"INVALID {args.spec}: {violation}", file=sys.stderr)
        return EXIT_DATA
    print(f"valid: {spec.id} ({spec.display_name})")
    return EXIT_OK


def _cmd_ingest_scan(args) -> int:
    cloud = load_ply_file(args.cloud)
    spec = scan_to_spec(cloud, id=args.id, voxel=args.voxel)
    # No partial writes: build the document fully, then move into place.
    payload = spec_to_json(spec)
    out_dir = os.path.dirname(os.path.abspath(args.out)) or "."
    fd, tmp_path = tempfile.mkstemp(dir=out_dir, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(payload)
        os.replace(tmp_path, args.out)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise
    print(f"wrote {args.out}: {len(spec.geometry)} proxy spheres, id {spec.id!r}")
    return EXIT_OK


def _cmd_replay(args) -> int:
    frames = load_frames(args.frames)
    if args.hash:
        print(frames_digest(frames))
    else:
        ticks = [f.tick for f in frames]
        span = f"ticks {ticks[0]}..{ticks[-1]}" if ticks else "empty"
        print(f"{args.frames}: {len(frames)} frames, {span}")
    return EXIT_OK


def _cmd_catalog(args) -> int:
    for spec in builtin_catalog():
        kind = "static" if spec.is_static else f"{len(spec.articulation)} joints"
        actions = ", ".join(f"{a.gesture}->{a.action.kind}" for a in spec.affordances) or "none"
        print(f"{spec.id:16s} {spec.display_name:18s} [{kind}] affordances: {actions}")
    return EXIT_OK


_COMMANDS = {
    "simulate": _cmd_simulate,
    "serve": _cmd_serve,
    "validate": _cmd_validate,
    "ingest-scan": _cmd_ingest_scan,
    "replay": _cmd_replay,
    "catalog": _cmd_catalog,
}


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except FileNotFoundError as exc:
        print(f"limbswap {args.command}: file not found: {exc.filename}", file=sys.stderr)
        return EXIT_DATA
    except LimbswapError as exc:
        print(f"limbswap {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    raise SystemExit(cli_main())


if __name__ == "__main__":
    main()
