"""Command-line surface: label maps, rate estimation, synthesis, training.

Exit codes: 0 success, 1 usage or malformed input, 2 runtime or estimation
failure.  Set BYHE_LOG=error|info|debug to control verbosity.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .core import EstimationError, FormatError
from .filters import BandpassSpec, butter_bandpass, cwt_filter
from .hr import diagonal_profile, estimate_hr, estimate_hr_wave
from .io import read_matrix, read_wave, resample, write_matrix, write_pgm, write_wave
from .phase import default_center_offset, make_label
from .synth import SynthSpec, synth_bvp, synth_ecg_like
from .train import TrainConfig, baseline_wave_mse, grad_check, train

log = logging.getLogger("byhe.cli")

_LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


def _setup_logging() -> None:
    name = os.environ.get("BYHE_LOG", "error").strip().lower()
    logging.basicConfig(level=_LOG_LEVELS.get(name, logging.ERROR),
                        format="%(levelname)s %(name)s: %(message)s")


class _Parser(argparse.ArgumentParser):
    """argparse variant that exits 1 (not 2) on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(1)


def cmd_label_map(args) -> int:
    wave = read_wave(args.infile, fs_override=args.fs)
    # center the sampled indices in the wave: rows never sit closer to the
    # edges than they must, where filter settle-in would poison them; the
    # lower bound keeps row i aligned with head window i over the same wave
    offset = max(default_center_offset(args.window), (len(wave) - args.n) // 2)
    matrix = make_label(wave, args.kind, args.n, offset)
    write_matrix(matrix, args.out)
    if args.heatmap:
        write_pgm(matrix, args.heatmap)
    log.info("wrote %dx%d similarity matrix to %s", args.n, args.n, args.out)
    return 0


def cmd_hr(args) -> int:
    if (args.matrix is None) == (args.wave is None):
        sys.stderr.write("error: pass exactly one of --matrix or --wave\n")
        return 1
    if args.matrix is not None:
        bpm = estimate_hr(read_matrix(args.matrix, require_square=True), args.fs)
    else:
        bpm = estimate_hr_wave(read_wave(args.wave, fs_override=args.fs_override))
    print(f"bpm={bpm:.2f}")
    return 0


def cmd_synth(args) -> int:
    spec = SynthSpec(bpm=args.bpm, duration=args.dur, fs=args.fs, phase0=args.phase0,
                     envelope_depth=args.depth, envelope_freq=args.env_freq,
                     noise_snr_db=args.snr, harmonic2=args.harmonic2, seed=args.seed)
    wave = synth_ecg_like(spec) if args.kind == "ecg" else synth_bvp(spec)
    write_wave(wave, args.out)
    log.info("wrote %d samples at %g Hz to %s", len(wave), wave.fs, args.out)
    return 0


def cmd_filter(args) -> int:
    wave = read_wave(args.infile, fs_override=args.fs)
    if args.resample != 1.0:
        wave = resample(wave, args.resample)
    out = butter_bandpass(wave, BandpassSpec(args.low, args.high, args.order))
    if args.cwt:
        out = cwt_filter(out)
    write_wave(out, args.out)
    return 0


def cmd_diag_profile(args) -> int:
    matrix = read_matrix(args.matrix, require_square=True)
    write_wave(diagonal_profile(matrix, args.fs), args.out)
    return 0


def cmd_grad_check(args) -> int:
    print(grad_check(seed=args.seed, h=args.h))
    return 0


def cmd_train_toy(args) -> int:
    cfg = TrainConfig.from_json(Path(args.config).read_text())
    if args.seed is not None:
        cfg.seed = args.seed
    report = baseline_wave_mse(cfg) if args.baseline else train(cfg)
    if args.report:
        Path(args.report).write_text(report.to_json() + "\n")
    if args.curve:
        report.write_curve(args.curve)
    print(f"arm={report.arm}")
    print(f"final_loss={report.final_loss:.6g}")
    if report.val_mae is not None:
        print(f"val_mae={report.val_mae:.2f}")
    print(f"collapse={'true' if report.collapse else 'false'}")
    print(f"halvings={len(report.halvings)}")
    if report.degenerate_dataset:
        print("degenerate_dataset=true")
    if report.diverged:
        print("diverged=true")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="byhe", description="Phase self-similarity toolkit for pulse waves")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("label-map", help="wave file to similarity-matrix CSV")
    p.add_argument("--in", dest="infile", required=True, help="input wave file")
    p.add_argument("--kind", choices=["bvp", "ecg"], default="bvp")
    p.add_argument("--n", type=int, default=300, help="matrix side length")
    p.add_argument("--out", required=True, help="output matrix CSV")
    p.add_argument("--heatmap", help="optional PGM heatmap path")
    p.add_argument("--window", type=int, default=11, help="head window the labels align with")
    p.add_argument("--fs", type=float, default=None, help="override the input sampling rate")
    p.set_defaults(func=cmd_label_map)

    p = sub.add_parser("hr", help="estimate beats per minute")
    p.add_argument("--matrix", help="similarity-matrix CSV")
    p.add_argument("--fs", type=float, default=30.0, help="frame rate of the matrix rows")
    p.add_argument("--wave", help="wave file (alternative to --matrix)")
    p.add_argument("--fs-override", type=float, default=None, help="override the wave sampling rate")
    p.set_defaults(func=cmd_hr)

    p = sub.add_parser("synth", help="generate a synthetic wave file")
    p.add_argument("--bpm", type=float, required=True)
    p.add_argument("--dur", type=float, default=20.0, help="duration in seconds")
    p.add_argument("--fs", type=float, default=30.0)
    p.add_argument("--kind", choices=["bvp", "ecg"], default="bvp")
    p.add_argument("--phase0", type=float, default=0.0)
    p.add_argument("--depth", type=float, default=0.0, help="envelope modulation depth")
    p.add_argument("--env-freq", type=float, default=0.1, help="envelope frequency in Hz")
    p.add_argument("--snr", type=float, default=None, help="additive noise SNR in dB")
    p.add_argument("--harmonic2", type=float, default=0.0, help="second-harmonic amplitude")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("filter", help="band-pass (and optionally narrow-band) a wave")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--low", type=float, default=0.7)
    p.add_argument("--high", type=float, default=4.0)
    p.add_argument("--order", type=int, default=4)
    p.add_argument("--cwt", action="store_true", help="apply wavelet narrow-banding after the band-pass")
    p.add_argument("--resample", type=float, default=1.0, help="resample factor applied first")
    p.add_argument("--fs", type=float, default=None, help="override the input sampling rate")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("diag-profile", help="diagonal-group means of a similarity matrix")
    p.add_argument("--matrix", required=True)
    p.add_argument("--fs", type=float, default=30.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_diag_profile)

    p = sub.add_parser("grad-check", help="finite-difference check of all gradients")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--h", type=float, default=1e-5)
    p.set_defaults(func=cmd_grad_check)

    p = sub.add_parser("train-toy", help="run a training arm from a JSON config")
    p.add_argument("--config", required=True, help="TrainConfig JSON file")
    p.add_argument("--baseline", action="store_true", help="run the wave-regression arm instead")
    p.add_argument("--report", help="write the full report JSON here")
    p.add_argument("--curve", help="write the per-epoch loss CSV here")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.set_defaults(func=cmd_train_toy)

    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return int(args.func(args) or 0)
    except FormatError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except EstimationError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except Exception as exc:  # malformed inputs must never produce a bare traceback
        log.debug("unexpected failure", exc_info=True)
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
