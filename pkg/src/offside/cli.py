"""Command-line entry point.

    offside process --frames DIR --config FILE --out DIR [--dump-masks]
    offside synth --scene FILE --out DIR
    offside default-config

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import re
import sys
import time

from . import __version__
from .config import ConfigError, default_config_dict, load_config
from .imaging import PPMError, mask_to_image, read_ppm, write_ppm
from .pipeline import PipelineError, annotate_frame, new_state, process_frame
from .synthgen import SceneError, SceneSpec, emit_sequence

log = logging.getLogger("offside")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2



class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _frame_key(name: str):
    nums = re.findall(r"\d+", name)
    return (int(nums[-1]) if nums else -1, name)


def list_frames(directory: str) -> list[str]:
    """PPM files in ``directory`` ordered by the last number in their name."""
    if not os.path.isdir(directory):
        raise FileNotFoundError(f"frames directory not found: {directory}")
    names = [n for n in os.listdir(directory) if n.lower().endswith(".ppm")]
    return [os.path.join(directory, n) for n in sorted(names, key=_frame_key)]


def run_process(args) -> int:
    try:
        cfg = load_config(args.config)
    except FileNotFoundError:
        log.error("config file not found: %s", args.config)
        return EXIT_DATA
    except ConfigError as exc:
        log.error("invalid config: %s", exc)
        return EXIT_DATA
    try:
        frames = list_frames(args.frames)
    except FileNotFoundError as exc:
        log.error("%s", exc)
        return EXIT_DATA
    if not frames:
        log.error("no frames found in %s", args.frames)
        return EXIT_DATA

    os.makedirs(args.out, exist_ok=True)
    state = new_state(cfg, keep_masks=args.dump_masks)
    counts = {"detect": 0, "track": 0}
    elapsed = []
    report_path = os.path.join(args.out, "report.jsonl")
    with open(report_path, "w", encoding="utf-8") as report:
        for i, path in enumerate(frames):
            try:
                img = read_ppm(path)
                t0 = time.perf_counter()
                state, result = process_frame(state, img, i)
                elapsed.append(time.perf_counter() - t0)
            except (OSError, PPMError) as exc:
                log.error("cannot read frame %s: %s", path, exc)
                return EXIT_DATA
            except (PipelineError, ValueError) as exc:
                log.error("frame %d (%s): %s", i, os.path.basename(path), exc)
                return EXIT_DATA
            counts[result.mode] += 1
            report.write(json.dumps(result.to_dict(), sort_keys=True) + "\n")
            write_ppm(os.path.join(args.out, f"annotated_{i:04d}.ppm"), annotate_frame(img, result, cfg))
            for name, mask in result.masks.items():
                write_ppm(os.path.join(args.out, f"{name}_{i:04d}.ppm"), mask_to_image(mask))

    summary = {
        "version": __version__,
        "config": cfg.to_dict(),
        "summary": {
            "frames_processed": len(frames),
            "detect_frames": counts["detect"],
            "track_frames": counts["track"],
            "mean_frame_ms": round(1000.0 * sum(elapsed) / len(elapsed), 3),
        },
    }
    with open(os.path.join(args.out, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"processed {len(frames)} frames -> {report_path}")
    return EXIT_OK


def run_synth(args) -> int:
    try:
        with open(args.scene, encoding="utf-8") as fh:
            scene = SceneSpec.from_dict(json.load(fh))
    except FileNotFoundError:
        log.error("scene file not found: %s", args.scene)
        return EXIT_DATA
    except json.JSONDecodeError as exc:
        log.error("scene file is not valid JSON: %s", exc)
        return EXIT_DATA
    except SceneError as exc:
        log.error("invalid scene spec: %s", exc)
        return EXIT_DATA
    try:
        n = emit_sequence(scene, args.out)
    except OSError as exc:
        log.error("cannot write sequence: %s", exc)
        return EXIT_DATA
    print(n)
    return EXIT_OK


def run_default_config(args) -> int:
    json.dump(default_config_dict(), sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="offside", description="Offside-line marker for soccer broadcast frames.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("process", help="run the pipeline over a directory of PPM frames")
    p.add_argument("--frames", required=True, help="directory of numerically ordered .ppm frames")
    p.add_argument("--config", required=True, help="pipeline config (JSON)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--dump-masks", action="store_true", help="also write intermediate masks")
    p.set_defaults(func=run_process)

    s = sub.add_parser("synth", help="render a synthetic sequence with ground truth")
    s.add_argument("--scene", required=True, help="scene spec (JSON)")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=run_synth)

    d = sub.add_parser("default-config", help="print the default pipeline config")
    d.set_defaults(func=run_default_config)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(name)s: %(levelname)s: %(message)s")
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
