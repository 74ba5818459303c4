"""Command-line front end.

Exit codes: 0 ok, 2 I/O or file format, 3 rate estimation, 4 segmentation
infeasible, 5 invalid input or arguments.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .errors import BreathSegError, ValidationError
from .metrics import compute_report
from .noise import noise_sweep, snr_grid, sweep_to_csv
from .pipeline import load_config, run_pipeline, compute_energy
from .rate import ROUND_MODES, estimate_rate
from .signal_io import (
    LABELS,
    dumps_report,
    format_labels,
    read_labels,
    read_wav,
    write_labels,
    write_report,
    write_text,
)
from .synth import SynthSpec, synth_corpus

EXIT_OK = 0
EXIT_VALIDATION = ValidationError.exit_code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _pipeline_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("pipeline")
    g.add_argument("--config", help="flat key=value config file (also $BREATHSEG_CONFIG)")
    g.add_argument("--cutoff", dest="cutoff_hz", type=float, help="low-pass cutoff in Hz (2000)")
    g.add_argument("--win", dest="win_s", type=float, help="energy window in s (0.1)")
    g.add_argument("--hop", dest="hop_s", type=float, help="energy hop in s (0.01)")
    g.add_argument("--downsample", type=int, help="energy downsampling factor (10)")
    g.add_argument("--delta", type=float, help="boundary search half-width fraction (0.3)")
    g.add_argument("--fmin", type=float, help="lowest breathing frequency in Hz (0.089)")
    g.add_argument("--fmax", type=float, help="highest breathing frequency in Hz (0.833)")
    g.add_argument("--round", dest="rounding", choices=sorted(ROUND_MODES), help="breath-count rounding")
    g.add_argument("--threshold", dest="match_threshold_s", type=float, help="match tolerance in s (0.5)")
    g.add_argument("--phases", type=int, help="fix the phase count P instead of estimating it")
    g.add_argument("--duration", type=float, help="fix the mean phase duration d, in seconds")
    g.add_argument("--first-label", choices=LABELS, help="label of the first phase (inhale)")


_CONFIG_KEYS = (
    "cutoff_hz", "win_s", "hop_s", "downsample", "delta", "fmin", "fmax", "rounding",
    "match_threshold_s", "phases", "duration", "first_label",
)


def _config(args):
    return load_config(args.config, **{k: getattr(args, k, None) for k in _CONFIG_KEYS})


def cmd_segment(args) -> int:
    config = _config(args)
    audio = read_wav(args.input)
    out = run_pipeline(audio, config)
    if args.labels:
        write_labels(out.track, args.labels)
    if args.json:
        write_report(out, args.json)
    if not args.labels and not args.json:
        sys.stdout.write(format_labels(out.track))
    return EXIT_OK


def cmd_evaluate(args) -> int:
    ref = read_labels(args.ref)
    hyp = read_labels(args.hyp)
    threshold = args.threshold if args.threshold is not None else _config(args).match_threshold_s
    report = compute_report(ref, hyp, threshold)
    if args.json:
        write_report(report, args.json)
    else:
        print(f"boundaries  ref {report.n_ref_boundaries}  hyp {report.n_hyp_boundaries}")
        print(f"M   {report.match_pct:7.2f} %")
        print(f"D   {report.deletion_pct:7.2f} %")
        print(f"I   {report.insertion_pct:7.2f} %")
        print(f"S   {report.segment_match_pct:7.2f} %")
        print(f"OvR {report.ovr_mean:7.4f} (std {report.ovr_std:.4f})")
    return EXIT_OK


def cmd_synth(args) -> int:
    specs = [
        SynthSpec(
            n_breaths=args.breaths,
            mean_phase_s=args.phase_s,
            jitter=args.jitter,
            amp_range=(args.amp_min, args.amp_max),
            sample_rate=args.rate,
            seed=args.seed + i,
            inhale_gain=args.inhale_gain,
        )
        for i in range(args.count)
    ]
    manifest = synth_corpus(specs, args.out)
    failed = [e for e in manifest["entries"] if e["status"] != "ok"]
    for e in failed:
        print(f"entry {e['index']}: {e['error']}", file=sys.stderr)
    if args.json:
        sys.stdout.write(dumps_report(manifest))
    else:
        print(f"wrote {manifest['count'] - len(failed)} of {manifest['count']} files to {args.out}")
    return EXIT_VALIDATION if failed else EXIT_OK


def cmd_noise_bench(args) -> int:
    config = _config(args)
    if args.type == "file" and not args.noise_file:
        raise ValidationError("--type file requires --noise-file")
    audio = read_wav(args.input)
    ref = read_labels(args.ref)
    snrs = snr_grid(args.snr_from, args.snr_to, args.snr_step)
    rows = noise_sweep(audio, ref, args.type, snrs, config, args.seed, args.noise_file)
    table = sweep_to_csv(rows)
    if args.out:
        write_text(table, args.out)
    else:
        sys.stdout.write(table)
    if args.json:
        write_report(
            {"config": config.to_dict(), "noise": args.type, "seed": args.seed,
             "rows": [r.to_dict() for r in rows]},
            args.json,
        )
    return EXIT_OK


def cmd_estimate_rate(args) -> int:
    config = _config(args)
    audio = read_wav(args.input)
    energy, _ = compute_energy(audio, config)
    est = estimate_rate(energy, config.fmin, config.fmax, config.downsample, config.rounding)
    if args.json:
        write_report({**est.to_dict(), "config": config.to_dict()}, args.json)
    else:
        print(f"f_peak   {est.f_peak:.4f} Hz ({60 * est.f_peak:.1f} breaths/min)")
        print(f"breaths  {est.n_breaths}")
        print(f"P        {est.P}")
        print(f"d        {est.d:.3f} frames")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="breathseg", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("segment", help="segment a breath recording into phases")
    p.add_argument("--in", dest="input", required=True, help="input WAV")
    p.add_argument("--labels", "--out", dest="labels", help="output label file")
    p.add_argument("--json", help="output JSON report")
    _pipeline_flags(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("evaluate", help="score predicted labels against a reference")
    p.add_argument("--ref", required=True)
    p.add_argument("--hyp", required=True)
    p.add_argument("--threshold", type=float, help="match tolerance in s (0.5)")
    p.add_argument("--config")
    p.add_argument("--json", help="write the report as JSON instead of printing a table")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", help="generate synthetic breath recordings with labels")
    p.add_argument("--breaths", type=int, default=4)
    p.add_argument("--phase-s", type=float, default=2.0)
    p.add_argument("--jitter", type=float, default=0.2)
    p.add_argument("--rate", type=int, default=16000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1, help="number of files (seeds seed..seed+count-1)")
    p.add_argument("--amp-min", type=float, default=0.08)
    p.add_argument("--amp-max", type=float, default=0.15)
    p.add_argument("--inhale-gain", type=float, default=0.4)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--json", action="store_true", help="print the manifest")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("noise-bench", help="segmentation accuracy across noise levels")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--type", choices=("gaussian", "pink", "file"), default="gaussian")
    p.add_argument("--noise-file")
    p.add_argument("--snr-from", type=float, default=-30.0)
    p.add_argument("--snr-to", type=float, default=20.0)
    p.add_argument("--snr-step", type=float, default=5.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output CSV (stdout if omitted)")
    p.add_argument("--json", help="output JSON table")
    _pipeline_flags(p)
    p.set_defaults(func=cmd_noise_bench)

    p = sub.add_parser("estimate-rate", help="estimate breathing rate, P and d")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--json")
    _pipeline_flags(p)
    p.set_defaults(func=cmd_estimate_rate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BreathSegError as exc:
        print(f"breathseg {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
