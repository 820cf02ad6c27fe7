"""Synthetic CTR world: seeded deterministic traffic, ground truth, and the
columnar day-batch representation the harness trains on.

Everything derives from (seed, day) through counter-based Philox streams, so
any day can be regenerated independently and two runs with the same seed are
bit-identical. Request ids are counter blocks with a seeded base offset that
does not vary by day (requests model a recurring population, so nested gating
gives flicker-free fade-outs on the same ids day after day); traffic ids are
even and holdout ids odd, which keeps them disjoint within a day.

The five designated informative sparse features carry one shared latent id
per request (a redundant signal group, as in real systems where co-moving
features are exactly the deprecation candidates). Redundancy makes the
damage of a partial fade convex in removed coverage: losing one copy is
cheap while losing the last copies is expensive, which is what separates the
trajectory of a gradual fade from an abrupt zero-out mid-rollout.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property
from typing import Any, Mapping

import numpy as np

from .adapter import CoverageSnapshot
from .domain import Example, FeatureId, FeatureKind, LoggedExample, ScheduleMode
from .errors import InvalidScheduleError
from .gating import gate_mask
from .trainer import dense_bucket, embedding_bucket, sparse_bucket

_STREAM_GROUND_TRUTH = 0xF0
_STREAM_TRAFFIC = 0x01
_STREAM_HOLDOUT = 0x02
_STREAM_RID_BASE = 0x03


@dataclass(frozen=True)
class WorldConfig:
    """All knobs of the synthetic world; the seed determines all data.

    The informative group: the first `informative_top_k` sparse features all
    carry one shared latent id per request (ids drawn over
    `latent_cardinality`), and when `has_absorber` is set the next sparse
    feature carries a noisy copy of the same latent (`absorber_noise` is the
    probability its id is random instead). The absorber is not part of the
    shipped rollouts; after a removal the model can slowly re-route part of
    the lost signal onto it, at a pace set by samples-per-id-per-day.
    """

    seed: int = 1001
    n_sparse: int = 30
    sparse_cardinality: int = 100
    latent_cardinality: int = 800
    n_dense: int = 4
    n_embedding: int = 2
    embedding_dim: int = 8
    requests_per_day: int = 20000
    holdout_per_day: int = 30000
    n_days: int = 75
    informative_top_k: int = 5
    informative_shared_signal: bool = True
    has_absorber: bool = True
    absorber_noise: float = 0.5
    gt_bias: float = -1.2
    gt_sigma_latent: float = 1.3
    gt_sigma_sparse: float = 0.12
    gt_sigma_dense: float = 0.2
    gt_sigma_embedding: float = 0.07
    learning_rate: float = 0.01
    model_buckets: int = 2**16

    def __post_init__(self):
        reserved = self.informative_top_k + (1 if self.has_absorber else 0)
        if reserved > self.n_sparse:
            raise ValueError("informative group + absorber cannot exceed n_sparse")
        if not (0.0 <= self.absorber_noise <= 1.0):
            raise ValueError("absorber_noise must be in [0, 1]")
        for name in ("n_sparse", "sparse_cardinality", "latent_cardinality",
                     "n_dense", "n_embedding", "embedding_dim",
                     "requests_per_day", "holdout_per_day", "n_days"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        # feature names must sort lexicographically in numeric order: the
        # batch slot layout and the name-sorted scalar path must agree
        if self.n_dense > 10 or self.n_embedding > 10 or self.n_sparse > 100:
            raise ValueError(
                "desk-scale naming supports at most 10 dense, 10 embedding, "
                "and 100 sparse features"
            )

    @property
    def absorber_index(self) -> int | None:
        if self.has_absorber and self.informative_shared_signal:
            return self.informative_top_k
        return None

    def sparse_cardinality_of(self, index: int) -> int:
        """Per-feature id range: the latent group is wider than background."""
        if not self.informative_shared_signal:
            return self.sparse_cardinality
        reserved = self.informative_top_k + (1 if self.has_absorber else 0)
        return self.latent_cardinality if index < reserved else self.sparse_cardinality

    # -- feature naming -------------------------------------------------------

    @property
    def sparse_names(self) -> tuple[str, ...]:
        return tuple(f"sparse_{i:02d}" for i in range(self.n_sparse))

    @property
    def dense_names(self) -> tuple[str, ...]:
        return tuple(f"dense_{i}" for i in range(self.n_dense))

    @property
    def embedding_names(self) -> tuple[str, ...]:
        return tuple(f"embed_{i}" for i in range(self.n_embedding))

    @property
    def informative_names(self) -> tuple[str, ...]:
        return self.sparse_names[: self.informative_top_k]

    def features(self) -> tuple[FeatureId, ...]:
        feats = (
            [FeatureId(n, FeatureKind.DENSE) for n in self.dense_names]
            + [FeatureId(n, FeatureKind.EMBEDDING) for n in self.embedding_names]
            + [FeatureId(n, FeatureKind.SPARSE_ID) for n in self.sparse_names]
        )
        return tuple(sorted(feats, key=lambda f: f.name))

    def feature_kind(self, name: str) -> FeatureKind:
        if name in self.sparse_names:
            return FeatureKind.SPARSE_ID
        if name in self.dense_names:
            return FeatureKind.DENSE
        if name in self.embedding_names:
            return FeatureKind.EMBEDDING
        raise KeyError(name)

    # -- serialization ----------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        return {
            "seed": self.seed,
            "n_sparse": self.n_sparse,
            "sparse_cardinality": self.sparse_cardinality,
            "latent_cardinality": self.latent_cardinality,
            "n_dense": self.n_dense,
            "n_embedding": self.n_embedding,
            "embedding_dim": self.embedding_dim,
            "requests_per_day": self.requests_per_day,
            "holdout_per_day": self.holdout_per_day,
            "n_days": self.n_days,
            "informative_top_k": self.informative_top_k,
            "informative_shared_signal": self.informative_shared_signal,
            "has_absorber": self.has_absorber,
            "absorber_noise": self.absorber_noise,
            "gt_bias": self.gt_bias,
            "gt_sigma_latent": self.gt_sigma_latent,
            "gt_sigma_sparse": self.gt_sigma_sparse,
            "gt_sigma_dense": self.gt_sigma_dense,
            "gt_sigma_embedding": self.gt_sigma_embedding,
            "learning_rate": self.learning_rate,
            "model_buckets": self.model_buckets,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "WorldConfig":
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in d.items() if k in known})

    def with_seed(self, seed: int) -> "WorldConfig":
        return replace(self, seed=seed)


@dataclass(frozen=True)
class GroundTruth:
    """Fixed per-world weights behind the Bernoulli labels.

    Latent-group carriers (and the absorber) contribute through `latent_w`
    once per request, never through their own rows of `sparse_w`.
    """

    bias: float
    latent_w: np.ndarray | None  # (latent_cardinality,) shared signal
    sparse_w: np.ndarray  # (n_sparse, max cardinality); carrier rows zero
    dense_w: np.ndarray  # (n_dense,)
    emb_w: np.ndarray  # (n_embedding, embedding_dim)


def _generator(*key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def ground_truth(config: WorldConfig) -> GroundTruth:
    rng = _generator(config.seed, _STREAM_GROUND_TRUTH)
    max_card = max(
        config.sparse_cardinality_of(f) for f in range(config.n_sparse)
    )
    sparse_w = np.zeros((config.n_sparse, max_card), dtype=np.float64)
    sparse_w[:, : config.sparse_cardinality] = (
        rng.standard_normal((config.n_sparse, config.sparse_cardinality))
        * config.gt_sigma_sparse
    )
    latent_w = None
    if config.informative_shared_signal:
        latent_w = (
            rng.standard_normal(config.latent_cardinality) * config.gt_sigma_latent
        )
        reserved = config.informative_top_k + (1 if config.has_absorber else 0)
        sparse_w[:reserved, :] = 0.0
    else:
        sparse_w[: config.informative_top_k, :] *= (
            config.gt_sigma_latent / config.gt_sigma_sparse
        )
    dense_w = rng.standard_normal(config.n_dense) * config.gt_sigma_dense
    emb_w = rng.standard_normal(
        (config.n_embedding, config.embedding_dim)
    ) * config.gt_sigma_embedding
    return GroundTruth(
        bias=config.gt_bias,
        latent_w=latent_w,
        sparse_w=sparse_w,
        dense_w=dense_w,
        emb_w=emb_w,
    )


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass
class BucketTables:
    """Precomputed hash buckets for every (feature, value) the world can emit."""

    sparse: np.ndarray  # (n_sparse, cardinality) int32
    dense: np.ndarray  # (n_dense,) int32
    emb: np.ndarray  # (n_embedding, embedding_dim) int32

    @classmethod
    def build(cls, config: WorldConfig) -> "BucketTables":
        nb = config.model_buckets
        max_card = max(config.sparse_cardinality_of(f) for f in range(config.n_sparse))
        sparse = np.zeros((config.n_sparse, max_card), dtype=np.int32)
        for f, name in enumerate(config.sparse_names):
            for v in range(config.sparse_cardinality_of(f)):
                sparse[f, v] = sparse_bucket(name, v, nb)
        dense = np.asarray(
            [dense_bucket(n, nb) for n in config.dense_names], dtype=np.int32
        )
        emb = np.empty((config.n_embedding, config.embedding_dim), dtype=np.int32)
        for f, name in enumerate(config.embedding_names):
            for i in range(config.embedding_dim):
                emb[f, i] = embedding_bucket(name, i, nb)
        return cls(sparse=sparse, dense=dense, emb=emb)


@dataclass
class DayBatch:
    """One day of requests in columnar form.

    Presence flags start all-true; fading clears them (coverage mode) or
    scales values (distribution mode). The faded batch is simultaneously the
    serving input, the training log, and the evaluation input — one value.
    """

    config: WorldConfig
    day: int
    request_ids: np.ndarray  # (n,) uint64
    sparse_ids: np.ndarray  # (n, n_sparse) int32
    sparse_present: np.ndarray  # (n, n_sparse) bool
    dense_values: np.ndarray  # (n, n_dense) f64
    dense_present: np.ndarray  # (n, n_dense) bool
    emb_values: np.ndarray  # (n, n_embedding, dim) f64
    emb_present: np.ndarray  # (n, n_embedding) bool
    labels: np.ndarray  # (n,) f64 in {0.0, 1.0}
    applied_snapshot: CoverageSnapshot | None = None

    def __len__(self) -> int:
        return self.request_ids.shape[0]

    # -- fading ----------------------------------------------------------------

    def apply_snapshot(self, snapshot: CoverageSnapshot) -> "DayBatch":
        """Columnar apply_fading: same gating hash, same arithmetic, applied
        to every row; returns a new batch, the input is untouched."""
        faded = DayBatch(
            config=self.config,
            day=self.day,
            request_ids=self.request_ids,
            sparse_ids=self.sparse_ids,
            sparse_present=self.sparse_present.copy(),
            dense_values=self.dense_values.copy(),
            dense_present=self.dense_present.copy(),
            emb_values=self.emb_values.copy(),
            emb_present=self.emb_present.copy(),
            labels=self.labels,
            applied_snapshot=snapshot,
        )
        cfg = self.config
        for name, (mode, fraction) in snapshot.entries.items():
            try:
                kind = cfg.feature_kind(name)
            except KeyError:
                continue
            if mode is ScheduleMode.COVERAGE:
                keep = gate_mask(name, self.request_ids, fraction)
                if kind is FeatureKind.SPARSE_ID:
                    col = cfg.sparse_names.index(name)
                    faded.sparse_present[:, col] &= keep
                elif kind is FeatureKind.DENSE:
                    col = cfg.dense_names.index(name)
                    faded.dense_present[:, col] &= keep
                else:
                    col = cfg.embedding_names.index(name)
                    faded.emb_present[:, col] &= keep
            else:
                if kind is FeatureKind.SPARSE_ID:
                    raise InvalidScheduleError(
                        f"distribution mode cannot scale sparse-id feature {name!r}"
                    )
                if kind is FeatureKind.DENSE:
                    col = cfg.dense_names.index(name)
                    faded.dense_values[:, col] *= fraction
                else:
                    col = cfg.embedding_names.index(name)
                    faded.emb_values[:, col, :] *= fraction
        return faded

    # -- kernel layout -----------------------------------------------------------

    def slot_arrays(self, tables: BucketTables):
        """(buckets, values, present) rows in canonical slot order:
        dense features, embedding components, sparse features (name order)."""
        cfg = self.config
        n = len(self)
        dim = cfg.embedding_dim
        width = cfg.n_dense + cfg.n_embedding * dim + cfg.n_sparse
        buckets = np.empty((n, width), dtype=np.int32)
        values = np.empty((n, width), dtype=np.float64)
        present = np.empty((n, width), dtype=np.bool_)

        d_end = cfg.n_dense
        e_end = d_end + cfg.n_embedding * dim
        buckets[:, :d_end] = tables.dense[None, :]
        values[:, :d_end] = self.dense_values
        present[:, :d_end] = self.dense_present

        buckets[:, d_end:e_end] = tables.emb.reshape(1, -1)
        values[:, d_end:e_end] = self.emb_values.reshape(n, -1)
        present[:, d_end:e_end] = np.repeat(self.emb_present, dim, axis=1)

        cols = np.arange(cfg.n_sparse)[None, :]
        buckets[:, e_end:] = tables.sparse[cols, self.sparse_ids]
        values[:, e_end:] = 1.0
        present[:, e_end:] = self.sparse_present
        return buckets, values, present

    # -- object views --------------------------------------------------------------

    def feature_map(self, i: int) -> dict:
        """Feature dict for row i, honoring presence flags."""
        cfg = self.config
        out: dict = {}
        for f, name in enumerate(cfg.dense_names):
            if self.dense_present[i, f]:
                out[name] = float(self.dense_values[i, f])
        for f, name in enumerate(cfg.embedding_names):
            if self.emb_present[i, f]:
                out[name] = tuple(float(v) for v in self.emb_values[i, f])
        for f, name in enumerate(cfg.sparse_names):
            if self.sparse_present[i, f]:
                out[name] = int(self.sparse_ids[i, f])
        return out

    def example(self, i: int) -> Example:
        return Example(
            request_id=int(self.request_ids[i]),
            features=self.feature_map(i),
            label=int(self.labels[i]),
            day=self.day,
        )

    def logged_example(self, i: int) -> LoggedExample:
        if self.applied_snapshot is None:
            raise ValueError("batch has not been through apply_snapshot")
        return LoggedExample(
            request_id=int(self.request_ids[i]),
            features=self.feature_map(i),
            label=int(self.labels[i]),
            day=self.day,
            effective_coverage_snapshot=self.applied_snapshot.coverages(),
        )


@dataclass
class World:
    """A config bound to its derived ground truth, id bases, and bucket tables."""

    config: WorldConfig

    @cached_property
    def truth(self) -> GroundTruth:
        return ground_truth(self.config)

    @cached_property
    def tables(self) -> BucketTables:
        return BucketTables.build(self.config)

    @cached_property
    def _rid_bases(self) -> tuple[int, int]:
        rng = _generator(self.config.seed, _STREAM_RID_BASE)
        base = rng.integers(0, 2**64, size=2, dtype=np.uint64)
        return int(base[0]), int(base[1])

    def _request_ids(self, n: int, holdout: bool) -> np.ndarray:
        base = self._rid_bases[1] if holdout else self._rid_bases[0]
        idx = np.arange(n, dtype=np.uint64)
        rids = (np.uint64(base) + idx) * np.uint64(2)
        if holdout:
            rids = rids + np.uint64(1)
        return rids

    def _generate(self, day: int, n: int, stream: int, holdout: bool) -> DayBatch:
        cfg = self.config
        rng = _generator(cfg.seed, stream, day)
        sparse_ids = rng.integers(
            0, cfg.sparse_cardinality, size=(n, cfg.n_sparse), dtype=np.int32
        )
        latent = None
        if cfg.informative_shared_signal and cfg.informative_top_k > 0:
            latent = rng.integers(0, cfg.latent_cardinality, size=n, dtype=np.int32)
            sparse_ids[:, : cfg.informative_top_k] = latent[:, None]
            if cfg.has_absorber:
                noise_u = rng.random(n)
                noise_ids = rng.integers(
                    0, cfg.latent_cardinality, size=n, dtype=np.int32
                )
                absorber = np.where(noise_u < cfg.absorber_noise, noise_ids, latent)
                sparse_ids[:, cfg.informative_top_k] = absorber
        dense = rng.standard_normal((n, cfg.n_dense))
        emb = rng.standard_normal((n, cfg.n_embedding, cfg.embedding_dim))
        label_u = rng.random(n)

        truth = self.truth
        score = np.full(n, truth.bias, dtype=np.float64)
        if truth.latent_w is not None and latent is not None:
            score += truth.latent_w[latent]
            start = cfg.informative_top_k + (1 if cfg.has_absorber else 0)
        else:
            start = 0
        for f in range(start, cfg.n_sparse):
            score += truth.sparse_w[f, sparse_ids[:, f]]
        score += dense @ truth.dense_w
        for f in range(cfg.n_embedding):
            score += emb[:, f, :] @ truth.emb_w[f]
        labels = (label_u < _sigmoid(score)).astype(np.float64)

        return DayBatch(
            config=cfg,
            day=day,
            request_ids=self._request_ids(n, holdout),
            sparse_ids=sparse_ids,
            sparse_present=np.ones((n, cfg.n_sparse), dtype=np.bool_),
            dense_values=dense,
            dense_present=np.ones((n, cfg.n_dense), dtype=np.bool_),
            emb_values=emb,
            emb_present=np.ones((n, cfg.n_embedding), dtype=np.bool_),
            labels=labels,
        )

    def generate_day(self, day: int) -> DayBatch:
        """Deterministic traffic for a day: ids, features, Bernoulli labels."""
        if day >= self.config.n_days + 1:
            raise ValueError(
                f"day {day} beyond simulation length {self.config.n_days}"
            )
        return self._generate(
            day, self.config.requests_per_day, _STREAM_TRAFFIC, holdout=False
        )

    def generate_holdout(self, day: int) -> DayBatch:
        """A fresh same-day evaluation sample on the disjoint odd-id stream."""
        return self._generate(
            day, self.config.holdout_per_day, _STREAM_HOLDOUT, holdout=True
        )
