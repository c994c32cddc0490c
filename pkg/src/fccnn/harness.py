"""Two-stage training strategy, evaluation, and report generation.

Stage 1 trains the whole network; at the end of its final epoch the
flattened backbone outputs of every training sample are captured with the
epoch-end weights into a feature store. Stage 2 re-trains only the linear
head on those stored features (warm start by default) with a fresh gate
schedule; the final model is the stage-1 backbone plus the stage-2 head.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field, asdict

import numpy as np

from . import data as data_mod
from . import models, objective
from .autograd import Tape, backward
from .ctensor import ComplexTensor, read_ctns, write_ctns
from .models import CostReport, Model
from .optim import AdamW

DATA_DIR_ENV = "FCCNN_DATA_DIR"

CSV_HEADER = "epoch,stage,train_loss,train_acc,test_acc,e_thr,wall_s"

DATASET_CLASSES = {"cifar10": 10, "cifar100": 100, "svhn-ctns": 10}


@dataclass
class RunConfig:
    model: str = "fc-cnn"
    dataset: str = "cifar10"
    encoding: str = "rgb"
    data_dir: str | None = None
    epochs: int = 20
    batch_size: int = 256
    lr: float = 0.001
    beta1: float = 0.99
    beta2: float = 0.999
    weight_decay: float = 0.1
    seed: int = 0
    out_dir: str | None = None
    stage2: bool = True
    stage2_reinit: bool = False
    gate_mode: str = "sample"
    dcn_activation: str = "crelu"
    train_limit: int | None = None
    test_limit: int | None = None

    def __post_init__(self):
        if self.model not in models.MODEL_KINDS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.dataset not in DATASET_CLASSES:
            raise ValueError(f"unknown dataset {self.dataset!r}")
        if self.encoding not in data_mod.ENCODINGS:
            raise ValueError(f"unknown encoding {self.encoding!r}")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")

    @property
    def num_classes(self) -> int:
        return DATASET_CLASSES[self.dataset]

    def resolved_data_dir(self) -> str:
        d = self.data_dir or os.environ.get(DATA_DIR_ENV)
        if not d:
            raise ValueError(
                f"no data directory: pass data_dir or set ${DATA_DIR_ENV}"
            )
        return d


@dataclass
class MetricsRecord:
    epoch: int
    stage: int
    train_loss: float
    train_acc: float
    test_acc: float
    e_thr: float
    wall_s: float


@dataclass
class FeatureStore:
    features: ComplexTensor  # [N, width]
    labels: np.ndarray
    provenance: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return int(self.features.shape[0])


def load_dataset(config: RunConfig, split: str) -> data_mod.LabeledImageSet:
    base = config.resolved_data_dir()
    if config.dataset in ("cifar10", "cifar100"):
        dset = data_mod.load_cifar(base, config.dataset, split)
    else:
        dset = data_mod.load_ctns_dataset(os.path.join(base, "svhn-ctns", split), split)
    dset = data_mod.encode(dset, config.encoding)
    limit = config.train_limit if split == "train" else config.test_limit
    if limit is not None and limit < dset.n:
        dset = seeded_subset(dset, limit, config.seed, split)
    return dset


def seeded_subset(dset: data_mod.LabeledImageSet, limit: int, seed: int, tag: str):
    rng = np.random.default_rng([seed, sum(tag.encode())])
    idx = rng.permutation(dset.n)[:limit]
    return dset.take(idx)


def _batch_tensor(images: ComplexTensor, idx) -> ComplexTensor:
    return ComplexTensor._wrap(images.re[idx], images.im[idx])


def _sequential_batches(n: int, batch_size: int):
    for start in range(0, n, batch_size):
        yield np.arange(start, min(start + batch_size, n))


def evaluate(model: Model, dset: data_mod.LabeledImageSet, batch_size: int = 256):
    """Deterministic accuracy and loss over a dataset split."""
    if dset.n == 0:
        return 0.0, 0.0
    correct = 0
    loss_sum = 0.0
    for idx in _sequential_batches(dset.n, batch_size):
        xb = _batch_tensor(dset.images, idx)
        yb = dset.labels[idx]
        out = model.forward(xb)
        correct += int((model.predict_from_output(out) == yb).sum())
        loss_sum += model.eval_loss(out, yb) * len(idx)
    return correct / dset.n, loss_sum / dset.n


def _collect_features(model: Model, dset: data_mod.LabeledImageSet, batch_size: int):
    chunks_re, chunks_im = [], []
    for idx in _sequential_batches(dset.n, batch_size):
        f = model.features(_batch_tensor(dset.images, idx))
        chunks_re.append(f.re)
        chunks_im.append(f.im)
    feats = ComplexTensor._wrap(np.concatenate(chunks_re), np.concatenate(chunks_im))
    return FeatureStore(
        features=feats,
        labels=dset.labels.copy(),
        provenance={
            "weights_sha256": model.weights_sha256(),
            "stage": 1,
            "feature_width": int(feats.shape[1]),
        },
    )


def _train_epochs(
    model: Model,
    forward,  # (tape, batch ComplexTensor) -> output Node
    images: ComplexTensor,
    labels: np.ndarray,
    config: RunConfig,
    opt: AdamW,
    stage: int,
    epochs: int,
    test_eval,  # () -> float test accuracy, or None
    rng: np.random.Generator,
) -> list[MetricsRecord]:
    n = images.shape[0]
    state = objective.HingeState()
    records = []
    for epoch in range(epochs):
        t0 = time.perf_counter()
        e_thr = state.e_thr
        perm = rng.permutation(n)
        loss_sum = 0.0
        correct = 0
        for bno, start in enumerate(range(0, n, config.batch_size)):
            idx = perm[start : start + config.batch_size]
            xb = _batch_tensor(images, idx)
            yb = labels[idx]
            tape = Tape()
            out = forward(tape, xb)
            loss_node, _ = model.loss_node(tape, out, yb, state, config.gate_mode)
            loss_value = float(loss_node.value.re)
            if not np.isfinite(loss_value):
                raise ValueError(
                    f"non-finite loss at stage {stage} epoch {epoch} batch {bno}"
                )
            opt.zero_grad()
            backward(tape, loss_node)
            opt.step()
            loss_sum += loss_value * len(idx)
            correct += int((model.predict_from_output(out.value) == yb).sum())
        state.advance()
        test_acc = test_eval() if test_eval is not None else float("nan")
        records.append(
            MetricsRecord(
                epoch=epoch,
                stage=stage,
                train_loss=loss_sum / n,
                train_acc=correct / n,
                test_acc=test_acc,
                e_thr=e_thr,
                wall_s=time.perf_counter() - t0,
            )
        )
    return records


def train_stage1(
    config: RunConfig,
    train_set: data_mod.LabeledImageSet | None = None,
    test_set: data_mod.LabeledImageSet | None = None,
):
    """End-to-end training; returns (model, feature store, metrics)."""
    if train_set is None:
        train_set = load_dataset(config, "train")
    model = models.build_model(
        config.model,
        train_set.num_classes,
        seed=config.seed,
        dcn_activation=config.dcn_activation,
    )
    opt = AdamW(
        model.parameters,
        lr=config.lr,
        beta1=config.beta1,
        beta2=config.beta2,
        weight_decay=config.weight_decay,
    )
    rng = np.random.default_rng([config.seed, 1])
    test_eval = None
    if test_set is not None:
        test_eval = lambda: evaluate(model, test_set, config.batch_size)[0]
    records = _train_epochs(
        model,
        lambda tape, xb: model.forward(tape.leaf(xb), tape),
        train_set.images,
        train_set.labels,
        config,
        opt,
        stage=1,
        epochs=config.epochs,
        test_eval=test_eval,
        rng=rng,
    )
    store = _collect_features(model, train_set, config.batch_size)
    store.provenance["epoch"] = config.epochs - 1
    return model, store, records


def train_stage2(
    model: Model,
    store: FeatureStore,
    config: RunConfig,
    test_set: data_mod.LabeledImageSet | None = None,
    epochs: int | None = None,
):
    """Re-train only the linear head on stored features; backbone frozen."""
    epochs = config.epochs if epochs is None else epochs
    head_width = model.spec.layers[-1][1].in_features
    if store.features.shape[1] != head_width:
        raise ValueError(
            f"feature width {store.features.shape[1]} != head width {head_width}"
        )
    if epochs == 0:
        return model, []
    conv_params = model.conv_parameters()
    for p in conv_params:
        p.trainable = False
    try:
        if config.stage2_reinit:
            _reinit_head(model, config.seed)
        opt = AdamW(
            model.head_parameters(),
            lr=config.lr,
            beta1=config.beta1,
            beta2=config.beta2,
            weight_decay=config.weight_decay,
        )
        rng = np.random.default_rng([config.seed, 2])
        test_eval = None
        if test_set is not None:
            test_eval = lambda: evaluate(model, test_set, config.batch_size)[0]
        records = _train_epochs(
            model,
            lambda tape, fb: model.head(tape.leaf(fb), tape),
            store.features,
            store.labels,
            config,
            opt,
            stage=2,
            epochs=epochs,
            test_eval=test_eval,
            rng=rng,
        )
    finally:
        for p in conv_params:
            p.trainable = True
    return model, records


def _reinit_head(model: Model, seed: int) -> None:
    rng = np.random.default_rng([seed, 3])
    lin = model.spec.layers[-1][1]
    bound = 1.0 / float(np.sqrt(lin.in_features))
    dtype = model.params["linear.weight"].value.dtype
    shape = lin.weight_shape
    re = rng.uniform(-bound, bound, shape)
    im = (
        rng.uniform(-bound, bound, shape)
        if model.spec.arithmetic == "complex"
        else np.zeros(shape)
    )
    model.params["linear.weight"].set_value(ComplexTensor(re, im, dtype=dtype))
    if "linear.bias" in model.params:
        model.params["linear.bias"].set_value(
            ComplexTensor.zeros((lin.out_features,), dtype=dtype)
        )


# ---- feature store io --------------------------------------------------------


def save_feature_store(store: FeatureStore, out_dir) -> None:
    os.makedirs(out_dir, exist_ok=True)
    write_ctns(store.features, os.path.join(out_dir, "features.ctns"))
    write_ctns(
        ComplexTensor(store.labels.astype(np.float32)),
        os.path.join(out_dir, "labels.ctns"),
    )
    with open(os.path.join(out_dir, "provenance.json"), "w") as fh:
        json.dump(store.provenance, fh, indent=2, sort_keys=True)


def load_feature_store(store_dir) -> FeatureStore:
    features = read_ctns(os.path.join(store_dir, "features.ctns"))
    labels_t = read_ctns(os.path.join(store_dir, "labels.ctns"))
    with open(os.path.join(store_dir, "provenance.json")) as fh:
        provenance = json.load(fh)
    return FeatureStore(features, labels_t.re.astype(np.int64), provenance)


# ---- reports -------------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def report(records: list[MetricsRecord], cost: CostReport, out_dir) -> dict[str, str]:
    """Write metrics.csv, summary.txt, and curves.svg; nothing on empty input."""
    if not records:
        raise ValueError("no metrics to report")
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "csv": os.path.join(out_dir, "metrics.csv"),
        "summary": os.path.join(out_dir, "summary.txt"),
        "svg": os.path.join(out_dir, "curves.svg"),
    }
    lines = [CSV_HEADER]
    for r in records:
        lines.append(
            f"{r.epoch},{r.stage},{_fmt(r.train_loss)},{_fmt(r.train_acc)},"
            f"{_fmt(r.test_acc)},{_fmt(r.e_thr)},{_fmt(r.wall_s)}"
        )
    with open(paths["csv"], "w") as fh:
        fh.write("\n".join(lines) + "\n")

    summary = [f"counting convention: {cost.convention}", ""]
    summary.append(f"{'layer':<12}{'params':>10}{'macs':>12}")
    for name, n_params, macs in cost.rows:
        summary.append(f"{name:<12}{n_params:>10}{macs:>12}")
    summary.append(f"{'total':<12}{cost.total_params:>10}{cost.total_macs:>12}")
    summary.append("")
    last = records[-1]
    summary.append(
        f"final: stage {last.stage} epoch {last.epoch} "
        f"train_acc {last.train_acc:.4f} test_acc {last.test_acc:.4f}"
    )
    with open(paths["summary"], "w") as fh:
        fh.write("\n".join(summary) + "\n")

    with open(paths["svg"], "w") as fh:
        fh.write(_curves_svg(records))
    return paths


def _curves_svg(records: list[MetricsRecord]) -> str:
    """Test-accuracy-vs-iteration curves, one polyline per stage."""
    width, height = 640, 400
    ml, mr, mt, mb = 60, 20, 20, 50
    plot_w, plot_h = width - ml - mr, height - mt - mb
    total = len(records)

    def sx(i):
        return ml + (plot_w * i / max(total - 1, 1))

    def sy(acc):
        return mt + plot_h * (1.0 - acc)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt+plot_h}" stroke="black"/>',
        f'<line x1="{ml}" y1="{mt+plot_h}" x2="{ml+plot_w}" y2="{mt+plot_h}" stroke="black"/>',
        f'<text x="{ml+plot_w/2:.0f}" y="{height-12}" text-anchor="middle" '
        f'font-size="14">iteration (epoch)</text>',
        f'<text x="16" y="{mt+plot_h/2:.0f}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 16 {mt+plot_h/2:.0f})">test accuracy</text>',
    ]
    for tick in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = sy(tick)
        parts.append(
            f'<line x1="{ml-4}" y1="{y:.1f}" x2="{ml}" y2="{y:.1f}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{ml-8}" y="{y+4:.1f}" text-anchor="end" font-size="11">{tick:g}</text>'
        )
    colors = {1: "#1f77b4", 2: "#d62728"}
    for stage in sorted({r.stage for r in records}):
        pts = [
            f"{sx(i):.1f},{sy(r.test_acc):.1f}"
            for i, r in enumerate(records)
            if r.stage == stage and np.isfinite(r.test_acc)
        ]
        if pts:
            parts.append(
                f'<polyline fill="none" stroke="{colors.get(stage, "#2ca02c")}" '
                f'stroke-width="1.5" points="{" ".join(pts)}"/>'
            )
            parts.append(
                f'<text x="{ml+plot_w-4}" y="{mt+14*stage}" text-anchor="end" '
                f'font-size="11" fill="{colors.get(stage, "#2ca02c")}">stage {stage}</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# ---- full pipeline -------------------------------------------------------------


def run(config: RunConfig) -> dict:
    """Load data, train (two stages unless disabled), evaluate, write reports."""
    if not config.out_dir:
        raise ValueError("run() needs an output directory")
    train_set = load_dataset(config, "train")
    test_set = load_dataset(config, "test")
    model, store, records = train_stage1(config, train_set, test_set)
    out = config.out_dir
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "config.json"), "w") as fh:
        json.dump(asdict(config), fh, indent=2, sort_keys=True)
    provenance = {"seed": config.seed, "dataset": config.dataset, "encoding": config.encoding}
    models.save_checkpoint(model, os.path.join(out, "stage1"), extra=provenance)
    save_feature_store(store, os.path.join(out, "features"))
    stage1_acc, _ = evaluate(model, test_set, config.batch_size)
    if config.stage2:
        model, records2 = train_stage2(model, store, config, test_set)
        records = records + records2
    models.save_checkpoint(model, os.path.join(out, "final"), extra=provenance)
    final_acc, final_loss = evaluate(model, test_set, config.batch_size)
    cost = models.count_costs(model.spec)
    report(records, cost, out)
    summary = {
        "model": config.model,
        "dataset": config.dataset,
        "encoding": config.encoding,
        "stage1_test_acc": stage1_acc,
        "final_test_acc": final_acc,
        "final_test_loss": final_loss,
        "out_dir": out,
    }
    with open(os.path.join(out, "result.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
    return summary
