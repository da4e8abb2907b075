"""Command-line orchestration: train, eval, predict, scan, bench.

Model files are versioned JSON documents; every rational is stored as an
exact [numerator, denominator] pair so a round-trip preserves
classification behavior bit for bit.  Reports render here, computation
lives in the library modules.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import clonal, fca, metrics, seqio
from .classifier import (
    BasinVote,
    ClassLabel,
    FmacaChromosome,
    MacaCcTree,
    dichotomy_mask,
)
from .fca import ComplementVector, DependencyMatrix, EvolutionParams
from .seqio import WINDOW, FuzzyEncoder, GenomicSequence

__all__ = [
    "ModelFormatError",
    "ModelVersionError",
    "ScanRow",
    "ScanReport",
    "BenchStats",
    "save_model",
    "load_model",
    "scan",
    "render_scan_report",
    "bench",
    "render_bench_stats",
    "run",
    "main",
]

MODEL_VERSION = 1

#: the reported latency figure this toolkit benchmarks itself against
REFERENCE_LATENCY_MS = 0.02


class ModelFormatError(ValueError):
    """Model document malformed or missing a required field."""


class ModelVersionError(ModelFormatError):
    """Model document written by an unsupported format version."""


def _pair(f: Fraction) -> list[int]:
    return [f.numerator, f.denominator]


def _float_pair(x: float) -> list[int]:
    num, den = float(x).as_integer_ratio()
    return [num, den]


def _stage_payload(stage: FmacaChromosome) -> dict:
    basins = [
        [key, vote.positive, _pair(vote.confidence)]
        for key, vote in sorted(stage.basin_map.items())
    ]
    return {
        "dependencies": [list(row) for row in stage.T.rows()],
        "complement": stage.F.bits.tolist(),
        "basins": basins,
        "fitness": _pair(stage.fitness),
    }


def save_model(tree: MacaCcTree, metadata: dict) -> bytes:
    """Serialize a fitted tree (deterministic bytes for identical input)."""
    doc = {
        "version": MODEL_VERSION,
        "window": WINDOW,
        "encoder": {
            "levels": tree.encoder.n,
            "symbol_map": {
                sym: _float_pair(code) for sym, code in sorted(tree.encoder.symbol_map.items())
            },
        },
        "evolution": {
            "max_steps": tree.evolution.max_steps,
            "epsilon": tree.evolution.epsilon,
            "quant_levels": tree.evolution.quant_levels,
        },
        "stages": {
            "donor": _stage_payload(tree.donor_stage),
            "acceptor": _stage_payload(tree.acceptor_stage),
        },
        "training": metadata,
    }
    return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("ascii")


def _require(obj: dict, field: str, where: str):
    if field not in obj:
        raise ModelFormatError(f"model document missing required field {where}.{field}")
    return obj[field]


def _warn_unknown(obj: dict, known: set, where: str):
    extra = sorted(set(obj) - known)
    if extra:
        warnings.warn(f"ignoring unknown model field(s) at {where}: {extra}")


def _frac(value, where: str) -> Fraction:
    if (
        not isinstance(value, list)
        or len(value) != 2
        or not all(isinstance(v, int) for v in value)
    ):
        raise ModelFormatError(f"{where} must be a [numerator, denominator] pair")
    return Fraction(value[0], value[1])


def _load_stage(payload: dict, params: EvolutionParams, where: str) -> FmacaChromosome:
    _warn_unknown(payload, {"dependencies", "complement", "basins", "fitness"}, where)
    rows = _require(payload, "dependencies", where)
    bits = _require(payload, "complement", where)
    basins = _require(payload, "basins", where)
    fitness = _frac(_require(payload, "fitness", where), f"{where}.fitness")
    try:
        T = DependencyMatrix.from_rows(rows)
        F = ComplementVector(np.array(bits, dtype=np.uint8))
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"{where}: invalid rule: {exc}") from exc
    basin_map = {}
    for entry in basins:
        if not isinstance(entry, list) or len(entry) != 3:
            raise ModelFormatError(f"{where}.basins entries must be [key, positive, confidence]")
        key, positive, confidence = entry
        basin_map[str(key)] = BasinVote(bool(positive), _frac(confidence, f"{where}.basins"))
    return FmacaChromosome(T, F, basin_map, fitness)


def load_model(data: bytes | str) -> MacaCcTree:
    """Parse a version-1 model document back into a classification tree."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"model document is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelFormatError("model document must be a JSON object")
    version = _require(doc, "version", "$")
    if version != MODEL_VERSION:
        raise ModelVersionError(f"unsupported model version {version!r} (expected {MODEL_VERSION})")
    _warn_unknown(doc, {"version", "window", "encoder", "evolution", "stages", "training"}, "$")

    window = _require(doc, "window", "$")
    if window != WINDOW:
        raise ModelFormatError(f"model window {window} unsupported (expected {WINDOW})")

    enc_doc = _require(doc, "encoder", "$")
    _warn_unknown(enc_doc, {"levels", "symbol_map"}, "$.encoder")
    symbol_map = {
        sym: pair[0] / pair[1]
        for sym, pair in _require(enc_doc, "symbol_map", "$.encoder").items()
    }
    try:
        encoder = FuzzyEncoder(n=_require(enc_doc, "levels", "$.encoder"), symbol_map=symbol_map)
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"$.encoder: {exc}") from exc

    evo_doc = _require(doc, "evolution", "$")
    _warn_unknown(evo_doc, {"max_steps", "epsilon", "quant_levels"}, "$.evolution")
    try:
        params = EvolutionParams(
            max_steps=_require(evo_doc, "max_steps", "$.evolution"),
            epsilon=_require(evo_doc, "epsilon", "$.evolution"),
            quant_levels=_require(evo_doc, "quant_levels", "$.evolution"),
        )
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"$.evolution: {exc}") from exc

    stages = _require(doc, "stages", "$")
    _warn_unknown(stages, {"donor", "acceptor"}, "$.stages")
    donor = _load_stage(_require(stages, "donor", "$.stages"), params, "$.stages.donor")
    acceptor = _load_stage(_require(stages, "acceptor", "$.stages"), params, "$.stages.acceptor")
    return MacaCcTree(donor, acceptor, encoder, params)


@dataclass(frozen=True)
class ScanRow:
    """One called site: 1-based inclusive forward-strand coordinates."""

    start: int
    end: int
    score: Fraction
    subsequence: str


@dataclass(frozen=True)
class ScanReport:
    genome: str
    threshold: Fraction
    strands: tuple[str, ...]  # subset of ("direct", "reverse")
    sections: dict[tuple[str, str], tuple[ScanRow, ...]]  # (strand, site) -> rows


_SITES = (("donor", ClassLabel.DONOR), ("acceptor", ClassLabel.ACCEPTOR))


def _windows(codes: np.ndarray) -> np.ndarray:
    view = np.lib.stride_tricks.sliding_window_view(codes, WINDOW)
    return np.ascontiguousarray(view)


def _collect(predictions, threshold, positions, subsequences):
    """Group window predictions into per-site rows, sorted by start."""
    rows = {site: [] for site, _ in _SITES}
    for pred, (start, end), text in zip(predictions, positions, subsequences):
        for site, label in _SITES:
            if pred.label == label and pred.score >= threshold:
                rows[site].append(ScanRow(start, end, pred.score, text))
    return {site: tuple(sorted(got, key=lambda r: r.start)) for site, got in rows.items()}


def scan(
    genome: GenomicSequence,
    tree: MacaCcTree,
    threshold: Fraction | float = Fraction(1, 2),
    strands: str = "both",
) -> ScanReport:
    """Slide a 60-base window (step 1) over one or both strands.

    Reverse-strand windows are classified on reverse-complement codes; row
    coordinates and subsequence text always refer to the forward strand.
    """
    threshold = Fraction(threshold)
    if not 0 <= threshold <= 1:
        raise ValueError("threshold must lie in [0, 1]")
    if strands not in ("direct", "reverse", "both"):
        raise ValueError("strands must be one of direct, reverse, both")
    n = len(genome)
    if n < WINDOW:
        raise ValueError(f"genome {genome.name!r} is shorter than one {WINDOW}-base window")

    wanted = ("direct", "reverse") if strands == "both" else (strands,)
    sections: dict[tuple[str, str], tuple[ScanRow, ...]] = {}

    if "direct" in wanted:
        codes = tree.encoder.encode(genome.bases)
        preds = tree.classify_codes(_windows(codes))
        positions = [(i + 1, i + WINDOW) for i in range(n - WINDOW + 1)]
        texts = [genome.bases[i : i + WINDOW] for i in range(n - WINDOW + 1)]
        for site, rows in _collect(preds, threshold, positions, texts).items():
            sections[("direct", site)] = rows

    if "reverse" in wanted:
        rc = seqio.reverse_complement_codes(genome.bases, tree.encoder)
        preds = tree.classify_codes(_windows(rc))
        # window j of the reverse strand covers forward bases n-j-60 .. n-j-1
        positions = [(n - j - WINDOW + 1, n - j) for j in range(n - WINDOW + 1)]
        texts = [genome.bases[n - j - WINDOW : n - j] for j in range(n - WINDOW + 1)]
        for site, rows in _collect(preds, threshold, positions, texts).items():
            sections[("reverse", site)] = rows

    return ScanReport(genome.name, threshold, wanted, sections)


_STRAND_HEADERS = {"direct": "Direct chain.", "reverse": "Reverse chain."}
_SITE_HEADERS = {"donor": "Donor site predictions", "acceptor": "Acceptor site predictions"}


def render_scan_report(report: ScanReport) -> str:
    lines = [f"Sequence: {report.genome}", f"Threshold: {float(report.threshold):g}"]
    for strand in report.strands:
        lines.append("")
        lines.append(_STRAND_HEADERS[strand])
        for site, _ in _SITES:
            rows = report.sections.get((strand, site), ())
            lines.append(_SITE_HEADERS[site])
            lines.append("Start      End        Score")
            if rows:
                for row in rows:
                    lines.append(
                        f"{row.start:<10d} {row.end:<10d} {float(row.score):<9.3f} {row.subsequence}"
                    )
            else:
                lines.append("(none)")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class BenchStats:
    backend: str
    count: int
    mean_ms: float
    median_ms: float
    p95_ms: float


def bench(tree: MacaCcTree, configs, repetitions: int = 3) -> BenchStats:
    """Wall-clock per-classification statistics on the active kernel."""
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    configs = np.ascontiguousarray(configs, dtype=np.float64)
    if configs.ndim != 2 or configs.shape[0] == 0:
        raise ValueError("need at least one configuration to time")
    times = np.empty(configs.shape[0] * repetitions)
    k = 0
    for _ in range(repetitions):
        for i in range(configs.shape[0]):
            row = configs[i : i + 1]
            t0 = time.perf_counter()
            tree.classify_codes(row)
            times[k] = time.perf_counter() - t0
            k += 1
    ms = times * 1e3
    return BenchStats(
        backend=fca.get_backend(),
        count=int(ms.size),
        mean_ms=float(ms.mean()),
        median_ms=float(np.median(ms)),
        p95_ms=float(np.percentile(ms, 95)),
    )


def render_bench_stats(stats: BenchStats) -> str:
    return (
        f"Backend: {stats.backend}\n"
        f"Predictions timed: {stats.count}\n"
        f"Mean:   {stats.mean_ms:.3g} ms\n"
        f"Median: {stats.median_ms:.3g} ms\n"
        f"P95:    {stats.p95_ms:.3g} ms\n"
        f"Reference figure (published): {REFERENCE_LATENCY_MS:g} ms\n"
    )


def _read_records(path: str):
    try:
        with open(path, "r", encoding="ascii") as fh:
            return seqio.parse_splice_records(fh)
    except OSError as exc:
        raise SystemExit(f"error: cannot read {path}: {exc.strerror}")
    except seqio.ParseError as exc:
        raise SystemExit(f"error: {path}: {exc}")


def _read_fasta(path: str):
    try:
        with open(path, "r", encoding="ascii") as fh:
            return seqio.parse_fasta(fh)
    except OSError as exc:
        raise SystemExit(f"error: cannot read {path}: {exc.strerror}")
    except seqio.ParseError as exc:
        raise SystemExit(f"error: {path}: {exc}")


def _read_model(path: str) -> MacaCcTree:
    try:
        with open(path, "rb") as fh:
            return load_model(fh.read())
    except OSError as exc:
        raise SystemExit(f"error: cannot read {path}: {exc.strerror}")
    except ModelFormatError as exc:
        raise SystemExit(f"error: {path}: {exc}")


def _split(records, args):
    if args.test_fraction == 0:
        return records, []
    return seqio.stratified_split(records, args.test_fraction, args.split_seed)


def _encode(records, encoder):
    return seqio.encode_batch([r.sequence for r in records], encoder)


def _cmd_train(args) -> int:
    records = _read_records(args.data)
    train_recs, test_recs = _split(records, args)
    if not train_recs:
        raise SystemExit("error: training split is empty")
    encoder = FuzzyEncoder()
    params = EvolutionParams()
    configs = _encode(train_recs, encoder)
    labels = [r.label for r in train_recs]

    def stage_config(seed):
        return clonal.TrainerConfig(
            population_size=args.population,
            g_max=args.gmax,
            p_max=args.pmax,
            replacement_count=args.replacements,
            seed=seed,
        )

    t0 = time.perf_counter()
    donor, donor_state = clonal.train(
        configs, dichotomy_mask(labels, {ClassLabel.DONOR}), stage_config(args.seed), params
    )
    non_donor = [i for i, lab in enumerate(labels) if lab != ClassLabel.DONOR]
    acceptor, acceptor_state = clonal.train(
        configs[non_donor],
        dichotomy_mask([labels[i] for i in non_donor], {ClassLabel.ACCEPTOR}),
        stage_config(args.seed + 1),
        params,
    )
    elapsed = time.perf_counter() - t0

    tree = MacaCcTree(donor, acceptor, encoder, params)
    metadata = {
        "seed": args.seed,
        "generations": {"donor": donor_state.gc, "acceptor": acceptor_state.gc},
    }
    payload = save_model(tree, metadata)
    try:
        with open(args.out, "wb") as fh:
            fh.write(payload)
    except OSError as exc:
        raise SystemExit(f"error: cannot write {args.out}: {exc.strerror}")

    print(f"trained on {len(train_recs)} instances ({len(test_recs)} held out)")
    print(
        f"donor stage:    fitness {float(donor.fitness):.4f}  "
        f"generations {donor_state.gc}  basins {len(donor.basin_map)}"
    )
    print(
        f"acceptor stage: fitness {float(acceptor.fitness):.4f}  "
        f"generations {acceptor_state.gc}  basins {len(acceptor.basin_map)}"
    )
    print(f"wall time: {elapsed:.1f} s")
    print(f"model written to {args.out}")
    return 0


def _cmd_eval(args) -> int:
    tree = _read_model(args.model)
    records = _read_records(args.data)
    train_recs, test_recs = _split(records, args)
    chosen = {"train": train_recs, "test": test_recs, "all": records}[args.on]
    if not chosen:
        raise SystemExit(f"error: selected evaluation split ({args.on}) is empty")
    predictions = tree.classify_codes(_encode(chosen, tree.encoder))
    pairs = [(pred.label, rec.label) for pred, rec in zip(predictions, chosen)]
    correct = sum(1 for predicted, actual in pairs if predicted == actual)
    accuracy = Fraction(correct, len(pairs))
    donor_counts, acceptor_counts = metrics.tally(pairs)
    try:
        donor_m = metrics.derive(donor_counts)
        acceptor_m = metrics.derive(acceptor_counts)
    except metrics.MetricUndefinedError as exc:
        raise SystemExit(f"error: {exc}")

    print(f"Instances evaluated: {len(pairs)} ({args.on} split)")
    print(f"Accuracy: {float(accuracy):.4f} ({correct}/{len(pairs)})")
    print(
        f"Donor:    SN {float(donor_m.sn):.4f}  SP {float(donor_m.sp):.4f}  "
        f"(TP {donor_counts.tp} FP {donor_counts.fp} TN {donor_counts.tn} FN {donor_counts.fn})"
    )
    print(
        f"Acceptor: SN {float(acceptor_m.sn):.4f}  SP {float(acceptor_m.sp):.4f}  "
        f"(TP {acceptor_counts.tp} FP {acceptor_counts.fp} TN {acceptor_counts.tn} FN {acceptor_counts.fn})"
    )
    print()
    print(metrics.comparison_report(donor_m, acceptor_m), end="")
    return 0


def _cmd_predict(args) -> int:
    tree = _read_model(args.model)
    if args.seq is not None:
        sequences = [args.seq]
    else:
        try:
            with open(args.file, "r", encoding="ascii") as fh:
                sequences = [line.strip().upper() for line in fh if line.strip()]
        except OSError as exc:
            raise SystemExit(f"error: cannot read {args.file}: {exc.strerror}")
    if not sequences:
        raise SystemExit("error: no sequences to classify")
    for seq in sequences:
        seq = seq.upper()
        if len(seq) != WINDOW:
            raise SystemExit(f"error: sequence length {len(seq)} != {WINDOW}")
        try:
            codes = tree.encoder.encode(seq)
        except ValueError as exc:
            raise SystemExit(f"error: {exc}")
        pred = tree.classify_one_codes(codes)
        print(f"{pred.label.value}\t{float(pred.score):.6f}")
    return 0


def _cmd_scan(args) -> int:
    tree = _read_model(args.model)
    genomes = _read_fasta(args.fasta)
    for i, genome in enumerate(genomes):
        try:
            report = scan(genome, tree, Fraction(str(args.threshold)), args.strand)
        except ValueError as exc:
            raise SystemExit(f"error: {exc}")
        if i:
            print()
        print(render_scan_report(report), end="")
    return 0


def _cmd_bench(args) -> int:
    tree = _read_model(args.model)
    records = _read_records(args.data)
    if args.limit is not None:
        records = records[: args.limit]
    configs = _encode(records, tree.encoder)
    backends = fca.available_backends() if args.backends == "all" else [fca.get_backend()]
    saved = fca.get_backend()
    try:
        for i, backend in enumerate(backends):
            fca.set_backend(backend)
            try:
                stats = bench(tree, configs, args.reps)
            except ValueError as exc:
                raise SystemExit(f"error: {exc}")
            if i:
                print()
            print(render_bench_stats(stats), end="")
    finally:
        fca.set_backend(saved)
    return 0


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="macasplice",
        description="Splice-site classification with fuzzy cellular automata.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_split_flags(p):
        p.add_argument("--test-fraction", type=float, default=0.2,
                       help="held-out fraction of the stratified split (default 0.2)")
        p.add_argument("--split-seed", type=int, default=42,
                       help="stratified split seed (default 42)")

    p = sub.add_parser("train", help="train a model on a splice dataset")
    p.add_argument("--data", required=True, help="splice records (CLASS,ID,SEQUENCE lines)")
    p.add_argument("--out", required=True, help="output model path (JSON)")
    p.add_argument("--seed", type=int, default=0, help="training seed (default 0)")
    p.add_argument("--population", type=int, default=500, help="population size (default 500)")
    p.add_argument("--gmax", type=int, default=100, help="generation cap (default 100)")
    p.add_argument("--pmax", type=float, default=0.1, help="mutation ceiling (default 0.1)")
    p.add_argument("--replacements", type=int, default=None,
                   help="fresh random rules per generation (default 5%% of population)")
    add_split_flags(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a model and print the comparison table")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--on", choices=("train", "test", "all"), default="test",
                   help="which side of the split to score (default test)")
    add_split_flags(p)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("predict", help="classify 60-base windows")
    p.add_argument("--model", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--seq", help="one 60-base sequence")
    group.add_argument("--file", help="file with one sequence per line")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("scan", help="scan FASTA genomes for candidate sites")
    p.add_argument("--model", required=True)
    p.add_argument("--fasta", required=True)
    p.add_argument("--threshold", type=float, default=0.5,
                   help="minimum score to report a site (default 0.5)")
    p.add_argument("--strand", choices=("direct", "reverse", "both"), default="both")
    p.set_defaults(func=_cmd_scan)

    p = sub.add_parser("bench", help="measure per-prediction latency")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--reps", type=int, default=3, help="repetitions over the dataset (default 3)")
    p.add_argument("--limit", type=int, default=None, help="use only the first N records")
    p.add_argument("--backends", choices=("active", "all"), default="all",
                   help="time the active kernel or every available one (default all)")
    p.set_defaults(func=_cmd_bench)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    """Entry point; returns the process exit status."""
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except SystemExit as exc:
        if isinstance(exc.code, str):
            print(exc.code, file=sys.stderr)
            return 1
        return int(exc.code or 0)


def main() -> None:
    sys.exit(run())
