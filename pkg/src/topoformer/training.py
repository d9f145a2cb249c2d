"""Dataset splitting, Adam, the training loop, and the ablation suite."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import ParameterError, SplitError, TopoformerError
from .graphs import LabeledGraph, adjacency_matrix, generate_csl_dataset
from .model import (
    GraphBatch,
    TigtConfig,
    cross_entropy,
    forward,
    init_params,
    predictions,
)
from .topology import clique_adjacency, cycle_basis

__all__ = [
    "CSL_SKIPS",
    "TrainConfig",
    "SeedResult",
    "RunReport",
    "AblationTable",
    "ABLATION_AXES",
    "stratified_split",
    "AdamState",
    "adam_step",
    "encode_dataset",
    "evaluate",
    "train_csl",
    "run_ablation_suite",
]

# Skip lengths of the standard 41-node, 10-class benchmark.
CSL_SKIPS = (2, 3, 4, 5, 6, 9, 11, 12, 13, 16)


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 4
    learning_rate: float = 1e-3
    epochs: int = 200
    weight_decay: float = 1e-5
    seeds: tuple[int, ...] = (0, 1, 2, 3)
    split: tuple[float, float, float] = (0.6, 0.2, 0.2)

    def __post_init__(self):
        if not self.seeds:
            raise ParameterError("seeds must be non-empty")
        if self.batch_size < 1:
            raise ParameterError("batch_size must be >= 1")
        if self.epochs < 0:
            raise ParameterError("epochs must be >= 0")
        if len(self.split) != 3 or any(f < 0 for f in self.split):
            raise ParameterError("split must be three non-negative fractions")
        if not math.isclose(sum(self.split), 1.0, abs_tol=1e-9):
            raise ParameterError(f"split fractions must sum to 1, got {sum(self.split)}")

    def with_overrides(self, **kw) -> "TrainConfig":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["seeds"] = list(self.seeds)
        d["split"] = list(self.split)
        return d


@dataclass
class SeedResult:
    seed: int
    epoch_losses: list[float]
    val_accuracy: list[float]
    best_epoch: int
    test_accuracy: float

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "epoch_losses": self.epoch_losses,
            "val_accuracy": self.val_accuracy,
            "best_epoch": self.best_epoch,
            "test_accuracy": self.test_accuracy,
        }


@dataclass
class RunReport:
    seed_results: list[SeedResult]
    mean_test_accuracy: float
    std_test_accuracy: float
    model_config: dict
    train_config: dict
    dataset_info: dict = field(default_factory=dict)

    @classmethod
    def from_seed_results(cls, results, model_config, train_config, dataset_info=None):
        accs = np.array([r.test_accuracy for r in results])
        return cls(
            seed_results=list(results),
            mean_test_accuracy=float(accs.mean()),
            std_test_accuracy=float(accs.std()),
            model_config=model_config,
            train_config=train_config,
            dataset_info=dict(dataset_info or {}),
        )

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "seeds": [r.to_dict() for r in self.seed_results],
            "mean_test_accuracy": self.mean_test_accuracy,
            "std_test_accuracy": self.std_test_accuracy,
            "model_config": self.model_config,
            "train_config": self.train_config,
            "dataset_info": self.dataset_info,
        }


def stratified_split(labels, fractions, seed: int):
    """Class-stratified, seed-deterministic index split.

    ``labels`` is a sequence of class labels, one per sample.  Returns three
    sorted index lists (train, val, test).  Every class must receive at
    least one sample in each split whose fraction is positive.
    """
    if len(fractions) != 3 or not math.isclose(sum(fractions), 1.0, abs_tol=1e-9):
        raise SplitError(f"fractions must be three values summing to 1, got {fractions}")
    by_class: dict[int, list[int]] = {}
    for idx, label in enumerate(labels):
        by_class.setdefault(label, []).append(idx)
    rng = random.Random(seed)
    out: tuple[list[int], ...] = ([], [], [])
    for label in sorted(by_class):
        members = by_class[label][:]
        rng.shuffle(members)
        m = len(members)
        counts = [int(math.floor(f * m)) for f in fractions]
        remainder = m - sum(counts)
        fractional = sorted(
            range(3), key=lambda i: (fractions[i] * m - counts[i], fractions[i]), reverse=True
        )
        for i in range(remainder):
            counts[fractional[i % 3]] += 1
        for i, f in enumerate(fractions):
            if f > 0 and counts[i] == 0:
                raise SplitError(
                    f"class {label} has {m} samples; cannot give every split a sample "
                    f"under fractions {tuple(fractions)}"
                )
        start = 0
        for i, c in enumerate(counts):
            out[i].extend(members[start : start + c])
            start += c
    return tuple(sorted(part) for part in out)


@dataclass
class AdamState:
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def adam_step(
    params: dict[str, Tensor],
    grads: dict[str, np.ndarray],
    state: AdamState,
    lr: float,
    weight_decay: float = 0.0,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    """One Adam update with decoupled weight decay, in place."""
    state.step += 1
    t = state.step
    for name, p in params.items():
        g = grads.get(name)
        if g is None:
            continue
        m = state.m.get(name)
        if m is None:
            m = state.m[name] = np.zeros_like(p.data)
        v = state.v.get(name)
        if v is None:
            v = state.v[name] = np.zeros_like(p.data)
        m += (1.0 - beta1) * (g - m)
        v += (1.0 - beta2) * (g * g - v)
        mhat = m / (1.0 - beta1**t)
        vhat = v / (1.0 - beta2**t)
        p.data = p.data - lr * (mhat / (np.sqrt(vhat) + eps) + weight_decay * p.data)


def encode_dataset(samples: list[LabeledGraph]) -> tuple[list[GraphBatch], list[int]]:
    """Wrap each graph as constant tensors with its clique adjacency
    precomputed once."""
    batches = []
    labels = []
    for sample in samples:
        g = sample.graph
        feats = g.node_features
        if feats is None:
            feats = np.ones((g.num_nodes, 1))
        a = adjacency_matrix(g)
        ac = clique_adjacency(cycle_basis(g), g.num_nodes).matrix
        batches.append(GraphBatch(Tensor(feats), Tensor(a), Tensor(ac), sample.label))
        labels.append(sample.label)
    return batches, labels


def evaluate(params, config: TigtConfig, batches, indices) -> float:
    """Classification accuracy over the indexed subset (no tape recorded)."""
    if not indices:
        return float("nan")
    correct = 0
    with ad.no_grad():
        for i in indices:
            logits = forward([batches[i]], params, config)
            correct += int(predictions(logits)[0] == batches[i].label)
    return correct / len(indices)


def _train_one_seed(seed, batches, labels, model_config, train_config):
    train_idx, val_idx, test_idx = stratified_split(labels, train_config.split, seed)
    params = init_params(model_config, seed)
    state = AdamState()
    shuffle_rng = random.Random(10_000 + seed)
    dropout_rng = np.random.default_rng(20_000 + seed)

    best_val = -1.0
    best_epoch = -1
    best_params = {k: t.data.copy() for k, t in params.items()}
    epoch_losses: list[float] = []
    val_curve: list[float] = []

    for epoch in range(train_config.epochs):
        order = list(train_idx)
        shuffle_rng.shuffle(order)
        losses = []
        for start in range(0, len(order), train_config.batch_size):
            chunk = order[start : start + train_config.batch_size]
            batch = [batches[i] for i in chunk]
            logits = forward(batch, params, model_config, rng=dropout_rng, training=True)
            loss = cross_entropy(logits, [batches[i].label for i in chunk])
            value = loss.item()
            if not math.isfinite(value):
                raise TopoformerError(
                    f"non-finite training loss (seed={seed}, epoch={epoch}, "
                    f"batch starting at {start})"
                )
            ad.zero_grad(params.values())
            ad.backward(loss)
            grads = {k: t.grad for k, t in params.items() if t.grad is not None}
            adam_step(
                params,
                grads,
                state,
                lr=train_config.learning_rate,
                weight_decay=train_config.weight_decay,
            )
            losses.append(value)
        epoch_losses.append(float(np.mean(losses)) if losses else float("nan"))
        val_acc = evaluate(params, model_config, batches, val_idx)
        val_curve.append(val_acc)
        if val_acc > best_val:
            best_val = val_acc
            best_epoch = epoch
            best_params = {k: t.data.copy() for k, t in params.items()}

    final = {k: Tensor(v, requires_grad=True) for k, v in best_params.items()}
    test_acc = evaluate(final, model_config, batches, test_idx)
    return SeedResult(seed, epoch_losses, val_curve, best_epoch, test_acc)


def train_csl(
    model_config: TigtConfig,
    train_config: TrainConfig,
    dataset: list[LabeledGraph] | None = None,
    dataset_info: dict | None = None,
    workers: int = 1,
) -> RunReport:
    """Train/evaluate once per seed on the CSL classification task.

    The checkpoint reported per seed is the epoch with the best validation
    accuracy (earliest epoch on ties).  With ``epochs=0`` the untrained
    initialization is evaluated directly.  Seeds are independent jobs;
    ``workers > 1`` runs them in separate processes with identical results.
    """
    if dataset is None:
        dataset = generate_csl_dataset(41, list(CSL_SKIPS), 15, seed=0)
        dataset_info = {"nodes": 41, "skips": list(CSL_SKIPS), "copies": 15, "seed": 0}
    batches, labels = encode_dataset(dataset)
    seeds = list(train_config.seeds)
    if workers > 1 and len(seeds) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=min(workers, len(seeds))) as pool:
            futures = [
                pool.submit(_train_one_seed, seed, batches, labels, model_config, train_config)
                for seed in seeds
            ]
            results = [f.result() for f in futures]
    else:
        results = [
            _train_one_seed(seed, batches, labels, model_config, train_config)
            for seed in seeds
        ]
    return RunReport.from_seed_results(
        results, model_config.to_dict(), train_config.to_dict(), dataset_info
    )


# Ablation axes: one switched configuration per row, mirroring the study grid.
ABLATION_AXES: tuple[tuple[str, dict], ...] = (
    ("no_graph_info", {"use_graph_info": False}),
    ("no_topo_pe", {"use_topo_pe": False}),
    ("pe_not_shared", {"pe_share_weights": False}),
    ("no_global_attention", {"use_global_attention": False}),
    ("pe_relu", {"pe_activation": "relu"}),
    ("single_path", {"dual_path": "single"}),
    ("mean_readout", {"readout": "mean"}),
)


@dataclass
class AblationTable:
    rows: list[tuple[str, RunReport]]
    flagged: list[str]

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "rows": [
                {
                    "name": name,
                    "mean_test_accuracy": rep.mean_test_accuracy,
                    "std_test_accuracy": rep.std_test_accuracy,
                    "per_seed": [r.test_accuracy for r in rep.seed_results],
                    "flagged": name in self.flagged,
                }
                for name, rep in self.rows
            ],
        }

    def to_csv(self) -> str:
        lines = ["name,mean_test_accuracy,std_test_accuracy,per_seed,flagged"]
        for name, rep in self.rows:
            per_seed = ";".join(f"{r.test_accuracy:.6f}" for r in rep.seed_results)
            lines.append(
                f"{name},{rep.mean_test_accuracy:.6f},{rep.std_test_accuracy:.6f},"
                f"{per_seed},{str(name in self.flagged).lower()}"
            )
        return "\n".join(lines) + "\n"


def run_ablation_suite(
    model_config: TigtConfig,
    train_config: TrainConfig,
    dataset: list[LabeledGraph] | None = None,
    workers: int = 1,
) -> AblationTable:
    """Train the full model plus one run per ablation axis on identical
    splits and seeds; rows whose mean beats the full model by more than two
    of their standard deviations are flagged (soft report, not a failure)."""
    if dataset is None:
        dataset = generate_csl_dataset(41, list(CSL_SKIPS), 15, seed=0)
    rows = [("full", train_csl(model_config, train_config, dataset, workers=workers))]
    for name, overrides in ABLATION_AXES:
        rows.append(
            (
                name,
                train_csl(
                    model_config.with_overrides(**overrides), train_config, dataset,
                    workers=workers,
                ),
            )
        )
    full_mean = rows[0][1].mean_test_accuracy
    flagged = [
        name
        for name, rep in rows[1:]
        if full_mean < rep.mean_test_accuracy - 2.0 * rep.std_test_accuracy
    ]
    return AblationTable(rows, flagged)
