"""Hashed logistic regression trained one day at a time on logged examples,
plus the normalized-entropy stability metric.

Buckets come from FNV-1a 64 over a per-feature key string, modulo the table
size: ``name=value`` for sparse ids, ``name[i]`` per embedding component,
and the bare name for dense features (the scalar rides in the magnitude).
Training is strictly sequential in logged order; that ordering is part of
the determinism contract.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .domain import LoggedExample
from .errors import DegenerateLabelsError, OutOfOrderDayError
from .gating import fnv1a64
from .kernels import predict_rows, sgd_rows

DEFAULT_N_BUCKETS = 2**16
DEFAULT_LEARNING_RATE = 0.05
PREDICTION_CLIP = 1e-6
CHECKPOINT_FORMAT_VERSION = 1


def sparse_bucket(name: str, value: int, n_buckets: int) -> int:
    return fnv1a64(f"{name}={value}".encode("utf-8")) % n_buckets


def dense_bucket(name: str, n_buckets: int) -> int:
    return fnv1a64(name.encode("utf-8")) % n_buckets


def embedding_bucket(name: str, component: int, n_buckets: int) -> int:
    return fnv1a64(f"{name}[{component}]".encode("utf-8")) % n_buckets


def example_slots(
    features, n_buckets: int
) -> tuple[np.ndarray, np.ndarray]:
    """(buckets, magnitudes) for a feature map, in canonical (name-sorted,
    embedding components in index order) slot order."""
    buckets: list[int] = []
    values: list[float] = []
    for name in sorted(features):
        value = features[name]
        if isinstance(value, tuple):
            for i, component in enumerate(value):
                buckets.append(embedding_bucket(name, i, n_buckets))
                values.append(float(component))
        elif isinstance(value, int):
            buckets.append(sparse_bucket(name, value, n_buckets))
            values.append(1.0)
        else:
            buckets.append(dense_bucket(name, n_buckets))
            values.append(float(value))
    return (
        np.asarray(buckets, dtype=np.int32),
        np.asarray(values, dtype=np.float64),
    )


@dataclass
class ModelState:
    """Weight table + bias + hyperparameters + training progress marker."""

    weights: np.ndarray
    bias: float
    learning_rate: float
    day_trained_through: int

    @classmethod
    def initial(
        cls,
        n_buckets: int = DEFAULT_N_BUCKETS,
        learning_rate: float = DEFAULT_LEARNING_RATE,
        day_trained_through: int = 0,
    ) -> "ModelState":
        if learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        return cls(
            weights=np.zeros(n_buckets, dtype=np.float64),
            bias=0.0,
            learning_rate=learning_rate,
            day_trained_through=day_trained_through,
        )

    @property
    def n_buckets(self) -> int:
        return self.weights.shape[0]

    def copy(self) -> "ModelState":
        return ModelState(
            weights=self.weights.copy(),
            bias=self.bias,
            learning_rate=self.learning_rate,
            day_trained_through=self.day_trained_through,
        )

    # -- scoring -------------------------------------------------------------

    def predict_arrays(self, buckets, values, present) -> np.ndarray:
        return predict_rows(self.weights, self.bias, buckets, values, present)

    def predict(self, example: LoggedExample) -> float:
        """Probability for one example; same kernel as the batch path."""
        buckets, values = example_slots(example.features, self.n_buckets)
        return float(
            predict_rows(
                self.weights,
                self.bias,
                buckets.reshape(1, -1),
                values.reshape(1, -1),
                np.ones((1, buckets.shape[0]), dtype=np.bool_),
            )[0]
        )

    # -- training ------------------------------------------------------------

    def train_day_arrays(self, day: int, buckets, values, present, labels) -> "ModelState":
        if day != self.day_trained_through + 1:
            raise OutOfOrderDayError(
                f"expected day {self.day_trained_through + 1}, got {day}"
            )
        self.bias = sgd_rows(
            self.weights,
            self.bias,
            self.learning_rate,
            buckets,
            values,
            present,
            labels,
        )
        self.day_trained_through = day
        return self

    def train_day(self, logged: Sequence[LoggedExample]) -> "ModelState":
        """One SGD pass over one day of logged examples, in logged order."""
        if not logged:
            self.day_trained_through += 1
            return self
        day = logged[0].day
        for ex in logged:
            if ex.day != day:
                raise OutOfOrderDayError(
                    f"mixed days in batch: {ex.day} != {day}"
                )
        rows = [example_slots(ex.features, self.n_buckets) for ex in logged]
        width = max(b.shape[0] for b, _ in rows)
        n = len(rows)
        buckets = np.zeros((n, width), dtype=np.int32)
        values = np.zeros((n, width), dtype=np.float64)
        present = np.zeros((n, width), dtype=np.bool_)
        for i, (b, v) in enumerate(rows):
            buckets[i, : b.shape[0]] = b
            values[i, : v.shape[0]] = v
            present[i, : b.shape[0]] = True
        labels = np.asarray([float(ex.label) for ex in logged], dtype=np.float64)
        return self.train_day_arrays(day, buckets, values, present, labels)

    # -- checkpointing ---------------------------------------------------------

    def save(self, path: str | Path) -> None:
        payload = {
            "format_version": CHECKPOINT_FORMAT_VERSION,
            "n_buckets": self.n_buckets,
            "bias": self.bias,
            "learning_rate": self.learning_rate,
            "day_trained_through": self.day_trained_through,
            "weights_dtype": "<f8",
            "weights_b64": base64.b64encode(
                np.ascontiguousarray(self.weights, dtype="<f8").tobytes()
            ).decode("ascii"),
        }
        Path(path).write_text(json.dumps(payload, indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "ModelState":
        payload = json.loads(Path(path).read_text())
        if payload["format_version"] != CHECKPOINT_FORMAT_VERSION:
            raise ValueError(
                f"unsupported checkpoint format {payload['format_version']!r}"
            )
        weights = np.frombuffer(
            base64.b64decode(payload["weights_b64"]), dtype=payload["weights_dtype"]
        ).copy()
        if weights.shape[0] != payload["n_buckets"]:
            raise ValueError("checkpoint weight table size mismatch")
        return cls(
            weights=weights,
            bias=float(payload["bias"]),
            learning_rate=float(payload["learning_rate"]),
            day_trained_through=int(payload["day_trained_through"]),
        )


def ne_from_arrays(predictions: np.ndarray, labels: np.ndarray) -> float:
    """Normalized entropy: mean log-loss over the entropy of the label mean.

    Predictions are clipped to [1e-6, 1 - 1e-6] before the logs. 1.0 means no
    better than always predicting the prior; lower is better.
    """
    labels = np.asarray(labels, dtype=np.float64)
    predictions = np.asarray(predictions, dtype=np.float64)
    if labels.size == 0:
        raise DegenerateLabelsError("cannot evaluate NE on an empty holdout")
    p_bar = float(labels.mean())
    if p_bar <= 0.0 or p_bar >= 1.0:
        raise DegenerateLabelsError(f"degenerate label mean {p_bar}")
    clipped = np.clip(predictions, PREDICTION_CLIP, 1.0 - PREDICTION_CLIP)
    log_loss = -float(
        np.mean(labels * np.log(clipped) + (1.0 - labels) * np.log(1.0 - clipped))
    )
    prior_entropy = -(p_bar * np.log(p_bar) + (1.0 - p_bar) * np.log(1.0 - p_bar))
    return log_loss / float(prior_entropy)


def normalized_entropy(model: ModelState, holdout: Iterable[LoggedExample]) -> float:
    """NE of the model on a holdout of logged (post-fading) examples."""
    holdout = list(holdout)
    if not holdout:
        raise DegenerateLabelsError("cannot evaluate NE on an empty holdout")
    preds = np.asarray([model.predict(ex) for ex in holdout], dtype=np.float64)
    labels = np.asarray([ex.label for ex in holdout], dtype=np.float64)
    return ne_from_arrays(preds, labels)
