"""Sound-to-sound distances, 1-NN prediction and cross-validated evaluation."""
from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .dtw import DtwConfig, dtw_distance
from .errors import PartitionError, SilentSignalError, TooShortError, UsageError
from .features import FeatureMatrix, parse_descriptors, summarize
from .pipeline import Pipeline
from .signal_io import CorpusIndex

log = logging.getLogger(__name__)

DISTANCE_KINDS = ("summary", "framewise", "dtw")


@dataclass(frozen=True)
class DistanceSpec:
    kind: str
    descriptors: tuple[str, ...] = ("PMCT",)
    delta: int | None = None
    weighting: str = "plain"
    name: str | None = None

    def __post_init__(self):
        if self.kind not in DISTANCE_KINDS:
            raise UsageError(f"unknown distance {self.kind!r}; expected one of {DISTANCE_KINDS}")
        object.__setattr__(self, "descriptors", tuple(parse_descriptors(list(self.descriptors))))
        DtwConfig(self.delta, self.weighting)

    @property
    def dtw_config(self) -> DtwConfig:
        return DtwConfig(self.delta, self.weighting)

    def __call__(self, a: FeatureMatrix, b: FeatureMatrix) -> float:
        return sound_distance(a, b, self)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "descriptors": list(self.descriptors),
            "delta": self.delta,
            "weighting": self.weighting,
        }


PRESETS = {
    "distance1": DistanceSpec("summary", ("PMCT",), name="distance1"),
    "distance2": DistanceSpec("dtw", ("PMCT",), name="distance2"),
    "distance3": DistanceSpec("dtw", ("F0_ZCR",), name="distance3"),
    "distance4": DistanceSpec("dtw", ("FB(5)",), name="distance4"),
}


def preset(name: str, delta: int | None = None) -> DistanceSpec:
    try:
        spec = PRESETS[name]
    except KeyError:
        raise UsageError(f"unknown distance preset {name!r}; expected one of {sorted(PRESETS)}") from None
    if delta is not None:
        spec = DistanceSpec(spec.kind, spec.descriptors, delta, spec.weighting, spec.name)
    return spec


def summary_distance(a: FeatureMatrix, b: FeatureMatrix) -> float:
    """Euclidean distance between the (mean, std) summaries of all columns."""
    sa, sb = summarize(a), summarize(b)
    return float(np.sqrt(np.sum((sa.mean - sb.mean) ** 2 + (sa.std - sb.std) ** 2)))


def framewise_distance(a: FeatureMatrix, b: FeatureMatrix) -> float:
    """Frame-by-frame comparison over the first ``min(K_a, K_b)`` frames."""
    k = min(a.n_frames, b.n_frames)
    d = a.values[:k] - b.values[:k]
    return float(np.sqrt(np.sum(d**2) / k))


def sound_distance(a: FeatureMatrix, b: FeatureMatrix, spec: DistanceSpec) -> float:
    if a.descriptor_names != b.descriptor_names:
        raise UsageError(f"descriptor mismatch: {a.descriptor_names} vs {b.descriptor_names}")
    if spec.kind == "summary":
        return summary_distance(a, b)
    if spec.kind == "framewise":
        return framewise_distance(a, b)
    return dtw_distance(a.values, b.values, spec.dtw_config)


Distance = Callable[[FeatureMatrix, FeatureMatrix], float]


def predict(query: FeatureMatrix, training: Sequence[tuple[int, FeatureMatrix]], spec: Distance):
    """1-NN: class of the nearest training sound.

    Exact ties go to the lowest class id, then the lowest training index.

    Returns:
        (class_id, nearest_index, distance)
    """
    if not training:
        raise UsageError("training set is empty")
    best = None
    for idx, (class_id, item) in enumerate(training):
        d = spec(query, item)
        key = (d, class_id, idx)
        if best is None or key < best:
            best = key
    d, class_id, idx = best
    return class_id, idx, d


# --------------------------------------------------------------------------
# confusion matrix and scores
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """``counts[i, j]``: queries of true class ``i`` predicted as ``j``."""

    counts: np.ndarray

    @property
    def n_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.counts + other.counts)

    def to_csv(self, fh, classes: Sequence[str] | None = None) -> None:
        classes = list(classes) if classes is not None else [str(i) for i in range(self.n_classes)]
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["true\\predicted"] + classes)
        for name, row in zip(classes, self.counts):
            writer.writerow([name] + [int(v) for v in row])


def confusion(truth, predicted, c: int) -> ConfusionMatrix:
    truth = np.asarray(truth, dtype=int)
    predicted = np.asarray(predicted, dtype=int)
    if truth.shape != predicted.shape:
        raise UsageError(f"length mismatch: {truth.size} truths vs {predicted.size} predictions")
    if truth.size and (truth.min() < 0 or predicted.min() < 0 or truth.max() >= c or predicted.max() >= c):
        raise UsageError(f"class ids must lie in [0, {c})")
    counts = np.zeros((c, c), dtype=int)
    np.add.at(counts, (truth, predicted), 1)
    return ConfusionMatrix(counts)


def metrics(cm: ConfusionMatrix):
    """Overall accuracy, per-class precision and recall.

    Precision (recall) of a class whose column (row) is empty is reported as 0.

    Returns:
        (oa, precision, recall)
    """
    c = cm.counts.astype(float)
    total = c.sum()
    if total <= 0:
        raise UsageError("confusion matrix is empty")
    diag = np.diag(c)
    cols, rows = c.sum(axis=0), c.sum(axis=1)
    precision = np.divide(diag, cols, out=np.zeros_like(diag), where=cols > 0)
    recall = np.divide(diag, rows, out=np.zeros_like(diag), where=rows > 0)
    return float(diag.sum() / total), precision, recall


# --------------------------------------------------------------------------
# cross-validation
# --------------------------------------------------------------------------

def stratified_folds(labels, folds: int, seed: int) -> np.ndarray:
    """Fold index per item.

    Each class is shuffled with ``seed`` and its members are dealt to the
    folds in turn, the deal continuing from class to class so fold sizes
    differ by at most one. Every class must hold at least ``folds`` items,
    except in leave-one-out (``folds`` equal to the item count).
    """
    labels = np.asarray(labels, dtype=int)
    if folds < 2:
        raise PartitionError("cross-validation needs at least 2 folds")
    if folds > len(labels):
        raise PartitionError(f"{folds} folds requested for {len(labels)} items")
    rng = np.random.default_rng(seed)
    assignment = np.full(len(labels), -1, dtype=int)
    dealt = 0
    for class_id in np.unique(labels):
        members = np.flatnonzero(labels == class_id)
        if len(members) < folds and folds != len(labels):
            raise PartitionError(f"class {class_id} has {len(members)} items, fewer than {folds} folds")
        shuffled = members[rng.permutation(len(members))]
        assignment[shuffled] = (dealt + np.arange(len(shuffled))) % folds
        dealt += len(shuffled)
    return assignment


@dataclass
class EvaluationReport:
    classes: list[str]
    confusion: ConfusionMatrix
    oa: float
    precision: np.ndarray
    recall: np.ndarray
    per_fold_oa: list[float]
    folds: list[int]
    predictions: list[int]
    seed: int
    spec: dict
    pipeline: dict = field(default_factory=dict)
    items: list[str] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)

    @property
    def undefined_precision(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.confusion.counts.sum(axis=0) == 0)]

    @property
    def undefined_recall(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.confusion.counts.sum(axis=1) == 0)]

    def to_dict(self) -> dict:
        return {
            "classes": list(self.classes),
            "confusion": self.confusion.counts.tolist(),
            "oa": self.oa,
            "per_fold_oa": list(self.per_fold_oa),
            "precision": [float(v) for v in self.precision],
            "recall": [float(v) for v in self.recall],
            "undefined_precision": self.undefined_precision,
            "undefined_recall": self.undefined_recall,
            "seed": self.seed,
            "spec": self.spec,
            "pipeline": self.pipeline,
            "folds": list(self.folds),
            "predictions": list(self.predictions),
            "items": list(self.items),
            "skipped": list(self.skipped),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False)


def cross_validate_features(
    labels: Sequence[int],
    features: Sequence[FeatureMatrix],
    classes: Sequence[str],
    spec: Distance,
    folds: int,
    seed: int,
    workers: int = 1,
) -> EvaluationReport:
    """K-fold evaluation of 1-NN over already featurized sounds.

    Each fold in turn is the query set and the remaining folds are the
    training set. Confusion counts are summed over folds.
    """
    labels = np.asarray(labels, dtype=int)
    if len(labels) != len(features):
        raise UsageError("labels and features differ in length")
    n_classes = len(classes)
    assignment = stratified_folds(labels, folds, seed)
    predicted = np.full(len(labels), -1, dtype=int)

    def run_query(q, train_idx):
        training = [(int(labels[t]), features[t]) for t in train_idx]
        class_id, _, _ = predict(features[q], training, spec)
        return class_id

    per_fold = []
    executor = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for k in range(folds):
            queries = np.flatnonzero(assignment == k)
            train_idx = np.flatnonzero(assignment != k)
            if executor is None:
                results = [run_query(q, train_idx) for q in queries]
            else:
                results = list(executor.map(lambda q: run_query(q, train_idx), queries))
            predicted[queries] = results
            per_fold.append(float(np.mean(predicted[queries] == labels[queries])))
    finally:
        if executor is not None:
            executor.shutdown()

    cm = confusion(labels, predicted, n_classes)
    oa, precision, recall = metrics(cm)
    spec_info = spec.to_dict() if hasattr(spec, "to_dict") else {"name": getattr(spec, "__name__", repr(spec))}
    return EvaluationReport(
        classes=list(classes),
        confusion=cm,
        oa=oa,
        precision=precision,
        recall=recall,
        per_fold_oa=per_fold,
        folds=[int(f) for f in assignment],
        predictions=[int(p) for p in predicted],
        seed=seed,
        spec=spec_info,
    )


def load_corpus_features(corpus: CorpusIndex, descriptors, pipeline: Pipeline = Pipeline()):
    """Featurize every corpus file; silent or too-short files are skipped.

    Returns:
        (labels, features, kept_paths, skipped_paths)
    """
    labels, feats, kept, skipped = [], [], [], []
    for class_id, path in corpus.items:
        try:
            fm = pipeline.load(path, descriptors)
        except (SilentSignalError, TooShortError) as exc:
            log.warning("skipping %s: %s", path, exc)
            skipped.append(str(path))
            continue
        labels.append(class_id)
        feats.append(fm)
        kept.append(str(path))
    return labels, feats, kept, skipped


def cross_validate(
    corpus: CorpusIndex,
    spec: DistanceSpec,
    folds: int = 5,
    seed: int = 0,
    pipeline: Pipeline = Pipeline(),
    workers: int = 1,
) -> EvaluationReport:
    labels, feats, kept, skipped = load_corpus_features(corpus, spec.descriptors, pipeline)
    report = cross_validate_features(labels, feats, corpus.classes, spec, folds, seed, workers)
    report.pipeline = pipeline.to_dict()
    report.items = [_relative(p, corpus.root) for p in kept]
    report.skipped = [_relative(p, corpus.root) for p in skipped]
    return report


def _relative(path, root) -> str:
    path = Path(path)
    try:
        return path.relative_to(root).as_posix()
    except ValueError:
        return str(path)
