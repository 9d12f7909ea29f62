"""Dataset ingestion, seeded splits, the batch-size schedule, and evaluation.

Training runs the staged minibatch schedule (50 then 300 then 600 by
default, 120 epochs total) with per-sample horizontal-flip augmentation,
averages gradients within each batch for one Adam step, and keeps the
snapshot from the epoch with the highest validation accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .landmarks import (
    DATASET_HEADER,
    FEATURE_DIM,
    NUM_JOINTS,
    LandmarkFrame,
    Observation,
    UnknownLabelError,
    featurize,
    label_token,
    parse_label,
)
from .neuralnet import (
    LOSS_FLOOR,
    Model,
    adam_step,
    backward_batch,
    copy_model,
    forward_batch,
    init_adam,
    init_model,
)

# Feature columns touched by a horizontal flip: the 21 x slots plus handedness.
_FLIP_COLUMNS = np.append(np.arange(0, 63, 3), 63)

DEFAULT_SCHEDULE = ((50, 30), (300, 30), (600, 60))
DEFAULT_DIMS = (64, 70, 50, 29)
DEFAULT_FRACTIONS = (0.8, 0.1, 0.1)


class DatasetFormatError(ValueError):
    """A dataset CSV violating the file format, located by line number."""

    def __init__(self, path, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = path
        self.line_no = line_no


class DivergenceError(RuntimeError):
    """Training hit a non-finite loss."""

    def __init__(self, epoch: int, batch: int):
        super().__init__(f"non-finite training loss at epoch {epoch}, batch {batch}")
        self.epoch = epoch
        self.batch = batch


@dataclass
class Dataset:
    """Ordered (frame, label index) rows, typically loaded from a CSV."""

    rows: list[tuple[LandmarkFrame, int]]
    source: str | None = None

    def __len__(self) -> int:
        return len(self.rows)

    def class_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for _, label in self.rows:
            token = label_token(label)
            counts[token] = counts.get(token, 0) + 1
        return counts


@dataclass(frozen=True)
class SplitSpec:
    fractions: tuple[float, float, float] = DEFAULT_FRACTIONS
    seed: int = 0

    def __post_init__(self):
        if any(f <= 0.0 for f in self.fractions):
            raise ValueError(f"split fractions must be positive: {self.fractions}")
        if abs(sum(self.fractions) - 1.0) > 1e-9:
            raise ValueError(f"split fractions must sum to 1: {self.fractions}")


@dataclass(frozen=True)
class TrainConfig:
    """Epoch/batch schedule plus augmentation and optimizer settings."""

    dims: tuple[int, ...] = DEFAULT_DIMS
    schedule: tuple[tuple[int, int], ...] = DEFAULT_SCHEDULE
    flip_probability: float = 0.5
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    shuffle_seed: int = 0

    def __post_init__(self):
        if not self.schedule:
            raise ValueError("schedule must have at least one segment")
        for batch_size, epochs in self.schedule:
            if batch_size < 1 or epochs < 1:
                raise ValueError(f"bad schedule segment ({batch_size}, {epochs})")
        if not 0.0 <= self.flip_probability <= 1.0:
            raise ValueError(f"flip probability out of range: {self.flip_probability}")

    @property
    def total_epochs(self) -> int:
        return sum(epochs for _, epochs in self.schedule)


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    batch_size: int
    mean_train_loss: float
    val_accuracy: float


@dataclass
class TrainHistory:
    epochs: list[EpochStats] = field(default_factory=list)
    best_epoch: int = 0
    best_val_accuracy: float = 0.0
    best_model: Model | None = None


@dataclass
class EvalReport:
    """Accuracy over scored samples, confusion[predicted][target], skips."""

    vocab: tuple[str, ...]
    evaluated_count: int
    skipped_count: int
    accuracy: float
    confusion: np.ndarray
    skipped_per_class: np.ndarray


def load_dataset(path) -> Dataset:
    """Parse the 66-column landmark CSV, preserving row order."""
    rows = []
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().rstrip("\r\n")
        if header != DATASET_HEADER:
            raise DatasetFormatError(path, 1, "missing or malformed header row")
        for line_no, raw in enumerate(f, start=2):
            line = raw.rstrip("\r\n")
            if not line:
                continue
            rows.append(_parse_row(path, line_no, line, allow_nohand=False))
    return Dataset(rows=rows, source=str(path))


def load_eval_data(path) -> list[tuple[Observation, int]]:
    """Like load_dataset, but rows with empty hand and coordinate cells are
    no-hand observations (label kept, frame absent)."""
    data = []
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().rstrip("\r\n")
        if header != DATASET_HEADER:
            raise DatasetFormatError(path, 1, "missing or malformed header row")
        for line_no, raw in enumerate(f, start=2):
            line = raw.rstrip("\r\n")
            if not line:
                continue
            data.append(_parse_row(path, line_no, line, allow_nohand=True))
    return data


def _parse_row(path, line_no: int, line: str, allow_nohand: bool):
    cells = line.split(",")
    if len(cells) != 65:
        raise DatasetFormatError(path, line_no, f"expected 65 columns, got {len(cells)}")
    try:
        label = parse_label(cells[0])
    except UnknownLabelError as exc:
        raise DatasetFormatError(path, line_no, str(exc)) from None
    if allow_nohand and cells[1] == "" and all(c == "" for c in cells[2:]):
        return None, label
    if cells[1] not in ("0", "1"):
        raise DatasetFormatError(path, line_no, f"hand must be 0 or 1, got {cells[1]!r}")
    try:
        coords = [float(c) for c in cells[2:]]
    except ValueError:
        raise DatasetFormatError(path, line_no, "unparseable coordinate") from None
    if not all(math.isfinite(c) for c in coords):
        raise DatasetFormatError(path, line_no, "non-finite coordinate")
    joints = tuple(
        (coords[3 * i], coords[3 * i + 1], coords[3 * i + 2]) for i in range(NUM_JOINTS)
    )
    frame = LandmarkFrame(joints=joints, handedness=int(cells[1]))
    return frame, label


def split(dataset: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset, Dataset]:
    """Seeded shuffle then contiguous cuts; unstratified by design."""
    n = len(dataset)
    if n == 0:
        raise ValueError("cannot split an empty dataset")
    rng = np.random.default_rng(spec.seed)
    order = rng.permutation(n)
    f_train, f_val, _ = spec.fractions
    cut1 = math.floor(f_train * n)
    cut2 = math.floor((f_train + f_val) * n)
    shuffled = [dataset.rows[i] for i in order]
    return (
        Dataset(rows=shuffled[:cut1], source=dataset.source),
        Dataset(rows=shuffled[cut1:cut2], source=dataset.source),
        Dataset(rows=shuffled[cut2:], source=dataset.source),
    )


def features_matrix(dataset: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """Featurize every row into (n, 64) inputs plus the label vector."""
    n = len(dataset)
    features = np.empty((n, FEATURE_DIM), dtype=np.float64)
    labels = np.empty(n, dtype=np.int64)
    for i, (frame, label) in enumerate(dataset.rows):
        features[i] = featurize(frame)
        labels[i] = label
    return features, labels


def _flip_features(features: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Apply the landmark-space horizontal flip to the masked rows."""
    flipped = features.copy()
    cols = np.ix_(mask, _FLIP_COLUMNS)
    flipped[cols] = 1.0 - flipped[cols]
    return flipped


def _val_accuracy(model: Model, features: np.ndarray, labels: np.ndarray) -> float:
    probs, _ = forward_batch(model, features)
    return float(np.mean(np.argmax(probs, axis=1) == labels))


def train(
    train_set: Dataset,
    val_set: Dataset,
    config: TrainConfig,
    model_seed: int = 0,
) -> tuple[Model, TrainHistory]:
    """Run the full schedule; return the best-validation snapshot and history.

    Deterministic given (datasets, config, model_seed): all shuffles and
    flip draws come from one seeded generator consumed in a fixed order.
    """
    if len(train_set) == 0 or len(val_set) == 0:
        raise ValueError("training and validation sets must be nonempty")

    base_features, labels = features_matrix(train_set)
    val_features, val_labels = features_matrix(val_set)
    n = len(train_set)

    model = init_model(config.dims, seed=model_seed)
    state = init_adam(
        model,
        learning_rate=config.learning_rate,
        beta1=config.beta1,
        beta2=config.beta2,
        epsilon=config.epsilon,
    )
    rng = np.random.default_rng(config.shuffle_seed)
    history = TrainHistory()

    epoch = 0
    for batch_size, segment_epochs in config.schedule:
        for _ in range(segment_epochs):
            order = rng.permutation(n)
            flips = rng.random(n) < config.flip_probability
            features = _flip_features(base_features[order], flips)
            epoch_labels = labels[order]

            loss_sum = 0.0
            for batch_no, start in enumerate(range(0, n, batch_size)):
                xb = features[start : start + batch_size]
                yb = epoch_labels[start : start + batch_size]
                probs, cache = forward_batch(model, xb)
                picked = np.clip(probs[np.arange(len(yb)), yb], LOSS_FLOOR, None)
                batch_losses = -np.log(picked)
                if not np.all(np.isfinite(batch_losses)):
                    raise DivergenceError(epoch, batch_no)
                loss_sum += float(batch_losses.sum())
                grads = backward_batch(model, cache, yb)
                model, state = adam_step(model, grads, state)

            val_accuracy = _val_accuracy(model, val_features, val_labels)
            history.epochs.append(
                EpochStats(
                    epoch=epoch,
                    batch_size=batch_size,
                    mean_train_loss=loss_sum / n,
                    val_accuracy=val_accuracy,
                )
            )
            # Strict > keeps the earliest epoch on ties.
            if history.best_model is None or val_accuracy > history.best_val_accuracy:
                history.best_model = copy_model(model)
                history.best_epoch = epoch
                history.best_val_accuracy = val_accuracy
            epoch += 1

    assert history.best_model is not None
    return history.best_model, history


def evaluate(model: Model, data) -> EvalReport:
    """Score (observation, label) pairs, skipping no-hand observations.

    Confusion is indexed [predicted][target]; argmax ties resolve to the
    lowest class index.
    """
    n_classes = model.dims[-1]
    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    skipped_per_class = np.zeros(n_classes, dtype=np.int64)

    hands: list[np.ndarray] = []
    hand_labels: list[int] = []
    for observation, label in data:
        if observation is None:
            skipped_per_class[label] += 1
        else:
            hands.append(featurize(observation))
            hand_labels.append(label)

    if hands:
        probs, _ = forward_batch(model, np.stack(hands))
        predictions = np.argmax(probs, axis=1)
        np.add.at(confusion, (predictions, np.asarray(hand_labels)), 1)

    evaluated = len(hands)
    accuracy = float(np.trace(confusion)) / evaluated if evaluated else 0.0
    return EvalReport(
        vocab=model.vocab,
        evaluated_count=evaluated,
        skipped_count=int(skipped_per_class.sum()),
        accuracy=accuracy,
        confusion=confusion,
        skipped_per_class=skipped_per_class,
    )


def write_confusion_csv(report: EvalReport, path) -> None:
    """Header row carries target labels; each data row is one predicted label."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write("," + ",".join(report.vocab) + "\n")
        for predicted, token in enumerate(report.vocab):
            counts = ",".join(str(c) for c in report.confusion[predicted])
            f.write(f"{token},{counts}\n")


def write_history(history: TrainHistory, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write("epoch,mean_train_loss,val_accuracy\n")
        for stats in history.epochs:
            f.write(f"{stats.epoch},{stats.mean_train_loss!r},{stats.val_accuracy!r}\n")
