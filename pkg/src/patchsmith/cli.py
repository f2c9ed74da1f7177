"""Command-line entry points: smooth, analyze, kernels, validate, serve."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import mesh as mesh_io
from .analysis import compare_modes
from .errors import PatchsmithError
from .frames import FrameSet, assign_frames
from .kernels import derive_modified_kernels, modified_kernels_exact
from .patches import build_patches
from .pipeline import PipelineConfig, run_pipeline
from .tessellate import export_obj


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("-i", "--input", required=True, help="input OBJ path")
    p.add_argument("--depth", type=int, default=4, help="max subdivision depth")
    p.add_argument("--resolution", type=int, default=5,
                   help="leaf samples per edge (power of two plus one)")
    p.add_argument("--mode", choices=("modified", "standard"), default="modified")
    p.add_argument("--ds-iterations", type=int, default=1)
    p.add_argument("--dual-iterations", type=int, default=0)
    p.add_argument("--frames", help="frame JSON to load (owners must match the mesh)")


def _config_from_args(args) -> PipelineConfig:
    return PipelineConfig(
        ds_iterations=args.ds_iterations,
        dual_iterations=args.dual_iterations,
        max_depth=args.depth,
        leaf_resolution=args.resolution,
        mode=args.mode,
    )


def _load_mesh(path: str):
    with open(path, "rb") as f:
        return mesh_io.load_obj(f.read())


def cmd_smooth(args) -> int:
    mesh = _load_mesh(args.input)
    config = _config_from_args(args)
    config.validate()
    frames = None
    if args.frames:
        layout = assign_frames(mesh, config.ds_iterations, config.dual_iterations)
        with open(args.frames) as f:
            frames = FrameSet.from_json(f.read(), layout)
    result = run_pipeline(mesh, config, frames=frames)
    if args.output:
        with open(args.output, "wb") as f:
            f.write(export_obj(result.trimesh))
    if args.dump_frames:
        with open(args.dump_frames, "w") as f:
            f.write(result.frames.to_json())
    if args.dump_patches:
        with open(args.dump_patches, "w") as f:
            f.write(result.patchset.to_json())
    stats_text = json.dumps(result.stats, indent=1, default=float)
    if args.stats:
        with open(args.stats, "w") as f:
            f.write(stats_text)
    else:
        print(stats_text, file=sys.stderr)
    return 0


def cmd_analyze(args) -> int:
    mesh = _load_mesh(args.input)
    config = _config_from_args(args)
    config.validate()
    frames = assign_frames(mesh, config.ds_iterations, config.dual_iterations)
    patchset = build_patches(mesh, frames)
    comparison = compare_modes(patchset, range(1, args.depth + 1), samples=args.samples)
    text = comparison.to_csv(args.metric) if args.format == "csv" else comparison.to_json()
    if args.output:
        with open(args.output, "w") as f:
            f.write(text)
    else:
        print(text, end="")
    return 0


def _mask_record(masks_exact) -> list[dict]:
    out = []
    for (m, n), mask in sorted(masks_exact.items()):
        out.append({
            "child_point": [m, n],
            "weights": [[str(Fraction(w)) for w in row] for row in mask],
            "weights_decimal": [[float(w) for w in row] for row in mask],
        })
    return out


def cmd_kernels(args) -> int:
    from .kernels import _standard_exact

    derived = derive_modified_kernels()  # validates the table before dumping
    payload = {
        "tables": [
            {"provenance": "standard", "masks": _mask_record(_standard_exact())},
            {"provenance": "derived-modified", "masks": _mask_record(modified_kernels_exact())},
        ],
        "derivation_check": derived.name,
    }
    text = json.dumps(payload, indent=1)
    if args.dump and args.dump != "-":
        with open(args.dump, "w") as f:
            f.write(text)
    else:
        print(text)
    return 0


def cmd_validate(args) -> int:
    try:
        mesh = _load_mesh(args.input)
        mesh.validate()
    except PatchsmithError as err:
        print(f"{type(err).__name__}: {err}", file=sys.stderr)
        return mesh_io.validation_code(err)
    print(f"valid: V={mesh.vertex_count} E={mesh.edge_count} F={mesh.face_count} "
          f"chi={mesh.euler_characteristic()} genus={mesh.genus()}")
    return 0


def cmd_serve(args) -> int:
    from .service import run_server

    run_server(host=args.host, port=args.port, static_dir=args.static)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="patchsmith",
        description="Smooth bicubic Bezier surfaces from closed polygon meshes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("smooth", help="run the full smoothing pipeline")
    _add_pipeline_flags(p)
    p.add_argument("-o", "--output", help="output OBJ path")
    p.add_argument("--dump-frames", help="write the frame set as JSON")
    p.add_argument("--dump-patches", help="write the patch set as JSON")
    p.add_argument("--stats", help="write the stats JSON here instead of stderr")
    p.set_defaults(func=cmd_smooth)

    p = sub.add_parser("analyze", help="standard-vs-modified defect table")
    _add_pipeline_flags(p)
    p.add_argument("--samples", type=int, default=9, help="samples per boundary")
    p.add_argument("--metric", choices=("c1", "g1", "c2", "ring"), default="c1",
                   help="which defect family the CSV tabulates")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("-o", "--output", help="output path (stdout otherwise)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("kernels", help="dump both kernel tables as JSON")
    p.add_argument("--dump", nargs="?", const="-", default="-",
                   help="output path (stdout otherwise)")
    p.set_defaults(func=cmd_kernels)

    p = sub.add_parser("validate", help="check a mesh; exit 0/2/3/4")
    p.add_argument("-i", "--input", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("serve", help="run the interactive modeling service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8754)
    p.add_argument("--static", help="directory of frontend assets to serve at /")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PatchsmithError as err:
        print(f"{type(err).__name__}: {err}", file=sys.stderr)
        code = mesh_io.validation_code(err)
        return code if code else 1
    except FileNotFoundError as err:
        print(f"FileNotFoundError: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
