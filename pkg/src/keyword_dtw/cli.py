"""Batch command-line front end: ``keyword-dtw <command> [flags]``.

Exit codes: 0 success, 2 usage or corpus error, 3 internal numerical error.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from contextlib import contextmanager
from dataclasses import dataclass, fields, replace
from pathlib import Path

from . import errors
from .classify import DistanceSpec, cross_validate, preset, sound_distance
from .features import parse_descriptors
from .fixtures import generate_corpus
from .pipeline import Pipeline
from .signal_io import read_wav, scan_corpus, synthesize_sequence, write_wav

log = logging.getLogger("keyword_dtw")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


@dataclass(frozen=True)
class RunConfig:
    frame_ms: float = 30.0
    overlap: float = 0.25
    window: str = "hamming"
    resample: bool = True
    preemph: bool = False
    metric: str = "distance2"
    folds: int = 5
    seed: int = 42
    descriptors: str = "PMCT"
    delta: int | None = None
    kind: str | None = None
    workers: int = 1

    @property
    def pipeline(self) -> Pipeline:
        return Pipeline(
            frame_duration=self.frame_ms / 1000.0,
            overlap=self.overlap,
            window=self.window,
            resample=self.resample,
            preemph=self.preemph,
        )

    def distance_spec(self) -> DistanceSpec:
        if self.kind:
            return DistanceSpec(self.kind, tuple(parse_descriptors(self.descriptors)), self.delta, name="custom")
        return preset(self.metric, self.delta)


def _coerce(name: str, raw: str):
    kinds = {f.name: f.type for f in fields(RunConfig)}
    if name not in kinds:
        raise errors.UsageError(f"unknown config key {name!r}")
    raw = raw.strip().strip('"').strip("'")
    kind = kinds[name]
    if "bool" in kind:
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise errors.UsageError(f"{name}: expected a boolean, got {raw!r}")
    try:
        if "int" in kind:
            return None if raw.lower() in ("", "none") else int(raw)
        if "float" in kind:
            return float(raw)
    except ValueError:
        raise errors.UsageError(f"{name}: cannot parse {raw!r}") from None
    return raw


def load_config(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line or line.startswith("["):
                continue
            if "=" not in line:
                raise errors.UsageError(f"{path}:{lineno}: expected key = value")
            key, value = line.split("=", 1)
            key = key.strip().replace("-", "_")
            values[key] = _coerce(key, value)
    return values


def build_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        cfg = replace(cfg, **load_config(args.config))
    overrides = {
        "frame_ms": args.frame_ms,
        "overlap": args.overlap,
        "window": args.window,
        "metric": args.metric,
        "folds": args.folds,
        "seed": args.seed,
        "descriptors": args.descriptors,
        "delta": args.delta,
        "kind": args.kind,
        "workers": args.workers,
    }
    if args.no_resample:
        overrides["resample"] = False
    if args.preemph:
        overrides["preemph"] = True
    return replace(cfg, **{k: v for k, v in overrides.items() if v is not None})


@contextmanager
def _output(path, newline=""):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline=newline) as fh:
            yield fh


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_prepare(args, cfg: RunConfig) -> int:
    corpus = scan_corpus(args.root)
    pipeline = cfg.pipeline
    with _output(args.out) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["class", "file", "duration_s", "t_de", "t_fin", "status"])
        for class_id, path in corpus.items:
            sig = read_wav(path)
            row = [corpus.classes[class_id], path.name, repr(sig.duration)]
            try:
                _, tr = pipeline.prepare_with_bounds(sig)
                row += [repr(tr.t_de), repr(tr.t_fin), "ok"]
            except (errors.SilentSignalError, errors.TooShortError) as exc:
                log.warning("%s: %s", path, exc)
                row += ["", "", "silent" if isinstance(exc, errors.SilentSignalError) else "too-short"]
            writer.writerow(row)
    return EXIT_OK


def cmd_features(args, cfg: RunConfig) -> int:
    descriptors = parse_descriptors(cfg.descriptors)
    fm = cfg.pipeline.load(args.file, descriptors)
    with _output(args.out) as fh:
        fm.to_csv(fh)
    return EXIT_OK


def cmd_dist(args, cfg: RunConfig) -> int:
    spec = cfg.distance_spec()
    pipeline = cfg.pipeline
    a = pipeline.load(args.file_a, spec.descriptors)
    b = pipeline.load(args.file_b, spec.descriptors)
    print(repr(sound_distance(a, b, spec)))
    return EXIT_OK


def cmd_evaluate(args, cfg: RunConfig) -> int:
    corpus = scan_corpus(args.root)
    report = cross_validate(corpus, cfg.distance_spec(), cfg.folds, cfg.seed, cfg.pipeline, cfg.workers)
    with _output(args.out, newline="\n") as fh:
        fh.write(report.to_json())
        fh.write("\n")
    if args.confusion_csv:
        with open(args.confusion_csv, "w", encoding="utf-8", newline="") as fh:
            report.confusion.to_csv(fh, report.classes)
    label = cfg.metric if not cfg.kind else "custom"
    print(f"{label}: OA = {report.oa!r}", file=sys.stderr)
    if args.compare:
        other = cross_validate(corpus, preset(args.compare), cfg.folds, cfg.seed, cfg.pipeline, cfg.workers)
        print(f"{args.compare}: OA = {other.oa!r}", file=sys.stderr)
        relation = ">=" if report.oa >= other.oa else "<"
        print(f"{label} {relation} {args.compare}", file=sys.stderr)
    return EXIT_OK


def parse_digits(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.replace(" ", "").split(",") if tok]
    except ValueError:
        raise errors.UsageError(f"cannot parse digit sequence {text!r}") from None


def cmd_synth(args, cfg: RunConfig) -> int:
    corpus = scan_corpus(args.root)
    digits = parse_digits(args.digits)
    bad = [d for d in digits if not 1 <= d <= len(corpus.classes)]
    if bad:
        raise errors.UsageError(f"digits {bad} outside 1..{len(corpus.classes)} (classes: {', '.join(corpus.classes)})")
    prototypes = {}
    for class_id, path in corpus.items:
        prototypes.setdefault(class_id + 1, path)
    signals = {d: read_wav(prototypes[d]) for d in set(digits)}
    out = synthesize_sequence(digits, signals, args.gap)
    write_wav(out, args.out)
    return EXIT_OK


def cmd_gen_fixtures(args, cfg: RunConfig) -> int:
    manifest = generate_corpus(args.out, cfg.seed)
    n = sum(len(c["files"]) for c in manifest["classes"].values())
    print(f"wrote {n} files under {args.out}", file=sys.stderr)
    return EXIT_OK


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

def _common_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="key = value settings file; flags override it")
    p.add_argument("--frame-ms", type=float, help="frame duration in ms (default 30)")
    p.add_argument("--overlap", type=float, help="overlap between frames in [0, 1) (default 0.25)")
    p.add_argument("--window", choices=("rectangular", "triangular", "hamming"), help="power window (default hamming)")
    p.add_argument("--metric", help="distance preset distance1..distance4 (default distance2)")
    p.add_argument("--kind", choices=("summary", "framewise", "dtw"), help="custom distance over --descriptors")
    p.add_argument("--descriptors", help="comma-separated list, e.g. PMCT,SPC,FB(5)")
    p.add_argument("--folds", type=int, help="cross-validation folds (default 5)")
    p.add_argument("--seed", type=int, help="random seed (default 42)")
    p.add_argument("--delta", type=int, help="DTW band half-width override")
    p.add_argument("--workers", type=int, help="threads for distance computations (default 1)")
    p.add_argument("--no-resample", action="store_true", help="keep the input sample rate")
    p.add_argument("--preemph", action="store_true", help="apply pre-emphasis")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(prog="keyword-dtw", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", parents=[common], help="trim report for a corpus (CSV)")
    p.add_argument("root")
    p.add_argument("--out")
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("features", parents=[common], help="dump per-frame descriptors (CSV)")
    p.add_argument("file")
    p.add_argument("--out")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("dist", parents=[common], help="distance between two sounds")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("evaluate", parents=[common], help="cross-validated 1-NN evaluation (JSON)")
    p.add_argument("root")
    p.add_argument("--out")
    p.add_argument("--confusion-csv")
    p.add_argument("--compare", help="also evaluate this preset and print both OAs")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", parents=[common], help="synthesize a digit sequence from corpus prototypes")
    p.add_argument("digits", help="1-based class positions, e.g. 1,2,3")
    p.add_argument("root")
    p.add_argument("--gap", type=float, default=0.4, help="silence between digits in s (default 0.4)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("gen-fixtures", parents=[common], help="write the synthetic warped-tone corpus")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_fixtures)
    return parser


def _setup_logging(verbose: bool) -> None:
    # a handler of our own, so warnings reach stderr even when the root logger is already configured
    for h in list(log.handlers):
        if getattr(h, "_keyword_dtw_cli", False):
            log.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    handler._keyword_dtw_cli = True
    log.addHandler(handler)
    log.setLevel(logging.INFO if verbose else logging.WARNING)
    log.propagate = False


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    _setup_logging(args.verbose)
    try:
        cfg = build_config(args)
        return args.func(args, cfg)
    except (errors.UsageError, errors.CorpusError, errors.FormatError, errors.UnsupportedError,
            errors.SilentSignalError, FileNotFoundError) as exc:
        print(f"keyword-dtw: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (errors.KeywordDTWError, FloatingPointError, ArithmeticError) as exc:
        print(f"keyword-dtw: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
