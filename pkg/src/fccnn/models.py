"""Model builders for the complex hinge-trained CNN and its real/DCN-style
baselines, plus parameter and MAC accounting.

All three kinds share one topology: three stride-2 convolutions (groups
1/2/4), a grouped 4x4 "learnable pooling" convolution (groups 64, channel
multiplier 2), flatten, and a linear head. Counting convention `cv-count-1`:
a complex weight counts as one parameter and one complex multiply-accumulate
counts as one MAC; convolutions carry no bias, the linear head carries one;
activations cost one op per element, bias adds and flatten moves one each.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass

import numpy as np

from . import nn, objective
from .autograd import Node, Parameter, Tape
from .ctensor import ComplexTensor, read_ctns, write_ctns

COUNT_CONVENTION = "cv-count-1"

MODEL_KINDS = ("fc-cnn", "real-cnn", "dcn")


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    arithmetic: str  # complex | real
    activation: str  # cardioid | crelu | relu
    head: str  # complex-hinge | real-crossentropy | real-crossentropy-on-magnitude
    num_classes: int
    layers: tuple  # of (name, Conv2dSpec | LinearSpec | activation tag | "flatten")


def backbone_layers(num_classes: int, activation: str, depthwise_activation: bool = False):
    layers = [
        ("conv1", nn.Conv2dSpec(3, 32, (3, 3), stride=2, groups=1, padding=1)),
        ("act1", activation),
        ("conv2", nn.Conv2dSpec(32, 64, (3, 3), stride=2, groups=2, padding=1)),
        ("act2", activation),
        ("conv3", nn.Conv2dSpec(64, 64, (3, 3), stride=2, groups=4, padding=1)),
        ("act3", activation),
        ("depthwise", nn.Conv2dSpec(64, 128, (4, 4), stride=2, groups=64, padding=0)),
    ]
    if depthwise_activation:
        layers.append(("act4", activation))
    layers.append(("flatten", "flatten"))
    layers.append(("linear", nn.LinearSpec(128, num_classes, bias=True)))
    return tuple(layers)


def _init_params(spec: ModelSpec, seed: int, dtype: str) -> dict[str, Parameter]:
    """Uniform init: re and im drawn independently from U(-b, b) with
    b = 1/sqrt(fan_in); real models keep the im plane at zero; biases zero."""
    rng = np.random.default_rng(seed)
    is_complex = spec.arithmetic == "complex"
    params: dict[str, Parameter] = {}
    for name, layer in spec.layers:
        if isinstance(layer, nn.Conv2dSpec):
            fan_in = (layer.in_channels // layer.groups) * layer.kernel[0] * layer.kernel[1]
            shape = layer.weight_shape
        elif isinstance(layer, nn.LinearSpec):
            fan_in = layer.in_features
            shape = layer.weight_shape
        else:
            continue
        bound = 1.0 / float(np.sqrt(fan_in))
        re = rng.uniform(-bound, bound, shape)
        im = rng.uniform(-bound, bound, shape) if is_complex else np.zeros(shape)
        params[f"{name}.weight"] = Parameter(f"{name}.weight", ComplexTensor(re, im, dtype=dtype))
        if layer.bias:
            params[f"{name}.bias"] = Parameter(
                f"{name}.bias", ComplexTensor.zeros((shape[0],), dtype=dtype)
            )
    return params


class Model:
    def __init__(self, spec: ModelSpec, params: dict[str, Parameter]):
        self.spec = spec
        self.params = params

    @property
    def parameters(self) -> list[Parameter]:
        return list(self.params.values())

    def conv_parameters(self) -> list[Parameter]:
        return [p for n, p in self.params.items() if not n.startswith("linear.")]

    def head_parameters(self) -> list[Parameter]:
        return [p for n, p in self.params.items() if n.startswith("linear.")]

    # ---- forward ---------------------------------------------------------

    def _apply_layer(self, name, layer, x, tape: Tape | None):
        if isinstance(layer, nn.Conv2dSpec):
            w = self.params[f"{name}.weight"]
            b = self.params.get(f"{name}.bias")
            if tape is None:
                return nn.complex_conv2d(x, layer, w.value, None if b is None else b.value)
            return tape.conv2d(x, layer, tape.param(w), None if b is None else tape.param(b))
        if isinstance(layer, nn.LinearSpec):
            w = self.params[f"{name}.weight"]
            b = self.params.get(f"{name}.bias")
            if tape is None:
                return nn.complex_linear(x, layer, w.value, None if b is None else b.value)
            return tape.linear(x, layer, tape.param(w), None if b is None else tape.param(b))
        if layer == "flatten":
            shape = x.value.shape if tape is not None else x.shape
            flat = (shape[0], int(np.prod(shape[1:])))
            return tape.reshape(x, flat) if tape is not None else x.reshape(flat)
        if layer in ("cardioid", "crelu", "relu"):
            if tape is None:
                return getattr(nn, layer)(x)
            return getattr(tape, layer)(x)
        raise ValueError(f"unknown layer entry {layer!r}")

    def _walk(self, x, tape, stop_after=None, start_after=None):
        active = start_after is None
        for name, layer in self.spec.layers:
            if not active:
                if name == start_after:
                    active = True
                continue
            x = self._apply_layer(name, layer, x, tape)
            if name == stop_after:
                break
        return x

    def forward(self, x, tape: Tape | None = None):
        """Full forward pass; with a tape, x must already be a Node."""
        return self._walk(x, tape)

    def features(self, x, tape: Tape | None = None):
        """Backbone output after flatten (the stored-feature interface)."""
        return self._walk(x, tape, stop_after="flatten")

    def head(self, feats, tape: Tape | None = None):
        """Linear head on flattened features."""
        return self._walk(feats, tape, start_after="flatten")

    # ---- prediction and losses --------------------------------------------

    def predict_from_output(self, out: ComplexTensor) -> np.ndarray:
        if self.spec.head == "real-crossentropy-on-magnitude":
            return np.argmax(np.hypot(out.re, out.im), axis=1)
        return objective.predict_class(out)

    def predict(self, x: ComplexTensor) -> np.ndarray:
        return self.predict_from_output(self.forward(x))

    def loss_node(
        self,
        tape: Tape,
        out: Node,
        labels: np.ndarray,
        state: objective.HingeState | None = None,
        gate_mode: str = "sample",
    ) -> tuple[Node, float]:
        """Head-appropriate training loss; returns (terminal node, e_M or nan)."""
        if self.spec.head == "complex-hinge":
            if state is None:
                raise ValueError("complex-hinge loss needs a HingeState")
            codes = objective.encode_one_hot(
                labels, self.spec.num_classes, dtype=out.value.dtype
            ).codes
            e = tape.hinge_error(codes, out)
            mask, e_m = objective.gate_mask(e.value, labels, out.value, state, gate_mode)
            gated = tape.gate(e, mask)
            return tape.quadratic_loss(gated), e_m
        if self.spec.head == "real-crossentropy":
            return cross_entropy(tape, out, labels), float("nan")
        if self.spec.head == "real-crossentropy-on-magnitude":
            return cross_entropy(tape, tape.abs(out), labels), float("nan")
        raise ValueError(f"unknown head {self.spec.head!r}")

    def eval_loss(self, out: ComplexTensor, labels: np.ndarray) -> float:
        """Deterministic evaluation loss: ungated hinge for the complex head,
        mean NLL for the cross-entropy heads."""
        if self.spec.head == "complex-hinge":
            codes = objective.encode_one_hot(labels, self.spec.num_classes, dtype=out.dtype)
            return objective.loss(objective.hinge_error(codes, out))
        z = np.hypot(out.re, out.im) if self.spec.head.endswith("magnitude") else out.re
        return float(_nll(z.astype(np.float64), np.asarray(labels)))

    def weights_sha256(self) -> str:
        h = hashlib.sha256()
        for name in sorted(self.params):
            p = self.params[name]
            h.update(name.encode())
            h.update(p.value.re.tobytes())
            h.update(p.value.im.tobytes())
        return h.hexdigest()


def _nll(z: np.ndarray, labels: np.ndarray) -> float:
    zmax = z.max(axis=1, keepdims=True)
    logsum = np.log(np.exp(z - zmax).sum(axis=1)) + zmax[:, 0]
    return float(np.mean(logsum - z[np.arange(z.shape[0]), labels]))


def cross_entropy(tape: Tape, logits: Node, labels) -> Node:
    """Softmax cross-entropy on the real plane of `logits` (mean over rows)."""
    labels = np.asarray(labels)
    z = logits.value.re
    n = z.shape[0]
    dt = logits.value.np_dtype
    z64 = z.astype(np.float64)
    zmax = z64.max(axis=1, keepdims=True)
    expz = np.exp(z64 - zmax)
    softmax = expz / expz.sum(axis=1, keepdims=True)
    value = _nll(z64, labels)
    onehot = np.zeros_like(softmax)
    onehot[np.arange(n), labels] = 1.0
    dz = ((softmax - onehot) / n).astype(dt)
    out = ComplexTensor._wrap(np.asarray(value, dtype=dt), np.asarray(0.0, dtype=dt))

    def bwd(gre, gim):
        return ((gre * dz, None),)

    return tape.apply("cross_entropy", (logits,), out, bwd)


# ---- builders --------------------------------------------------------------


def build_fc_cnn(
    num_classes: int,
    seed: int = 0,
    dtype: str = "f32",
    depthwise_activation: bool = False,
) -> Model:
    if num_classes < 2:
        raise ValueError("num_classes must be >= 2")
    spec = ModelSpec(
        kind="fc-cnn",
        arithmetic="complex",
        activation="cardioid",
        head="complex-hinge",
        num_classes=num_classes,
        layers=backbone_layers(num_classes, "cardioid", depthwise_activation),
    )
    return Model(spec, _init_params(spec, seed, dtype))


def build_baseline(
    kind: str,
    num_classes: int,
    seed: int = 0,
    dtype: str = "f32",
    dcn_activation: str = "crelu",
) -> Model:
    if num_classes < 2:
        raise ValueError("num_classes must be >= 2")
    if kind == "real-cnn":
        spec = ModelSpec(
            kind="real-cnn",
            arithmetic="real",
            activation="relu",
            head="real-crossentropy",
            num_classes=num_classes,
            layers=backbone_layers(num_classes, "relu"),
        )
    elif kind == "dcn":
        if dcn_activation not in ("crelu", "cardioid"):
            raise ValueError(f"dcn activation must be crelu or cardioid, got {dcn_activation}")
        spec = ModelSpec(
            kind="dcn",
            arithmetic="complex",
            activation=dcn_activation,
            head="real-crossentropy-on-magnitude",
            num_classes=num_classes,
            layers=backbone_layers(num_classes, dcn_activation),
        )
    else:
        raise ValueError(f"unknown baseline kind {kind!r}")
    return Model(spec, _init_params(spec, seed, dtype))


def build_model(kind: str, num_classes: int, **kwargs) -> Model:
    if kind == "fc-cnn":
        kwargs.pop("dcn_activation", None)
        return build_fc_cnn(num_classes, **kwargs)
    return build_baseline(kind, num_classes, **kwargs)


# ---- cost accounting --------------------------------------------------------


@dataclass(frozen=True)
class CostReport:
    rows: tuple  # of (layer name, params, macs)
    total_params: int
    total_macs: int
    convention: str

    def layer(self, name: str) -> tuple[int, int]:
        for row in self.rows:
            if row[0] == name:
                return row[1], row[2]
        raise KeyError(name)


def count_costs(spec: ModelSpec, input_shape=(3, 32, 32)) -> CostReport:
    c, h, w = input_shape
    rows = []
    elements = c * h * w
    for name, layer in spec.layers:
        if isinstance(layer, nn.Conv2dSpec):
            oh, ow = layer.out_hw(h, w)
            k_macs = (layer.in_channels // layer.groups) * layer.kernel[0] * layer.kernel[1]
            macs = layer.out_channels * oh * ow * k_macs
            n_params = layer.out_channels * k_macs
            if layer.bias:
                n_params += layer.out_channels
                macs += layer.out_channels * oh * ow
            c, h, w = layer.out_channels, oh, ow
            elements = c * h * w
            rows.append((name, n_params, macs))
        elif isinstance(layer, nn.LinearSpec):
            n_params = layer.out_features * layer.in_features
            macs = layer.out_features * layer.in_features
            if layer.bias:
                n_params += layer.out_features
                macs += layer.out_features
            elements = layer.out_features
            rows.append((name, n_params, macs))
        elif layer == "flatten":
            rows.append((name, 0, elements))
        else:
            rows.append((name, 0, elements))
    total_p = sum(r[1] for r in rows)
    total_m = sum(r[2] for r in rows)
    return CostReport(tuple(rows), total_p, total_m, COUNT_CONVENTION)


def count_params(model: Model | ModelSpec) -> CostReport:
    spec = model.spec if isinstance(model, Model) else model
    return count_costs(spec)


def count_macs(model: Model | ModelSpec, input_shape=(3, 32, 32)) -> CostReport:
    spec = model.spec if isinstance(model, Model) else model
    return count_costs(spec, input_shape)


def format_cost_table(spec: ModelSpec, input_shape=(3, 32, 32)) -> str:
    report = count_costs(spec, input_shape)
    lines = [
        f"model: {spec.kind} ({spec.arithmetic} arithmetic, {spec.activation} "
        f"activation, {spec.num_classes} classes)",
        f"counting convention: {report.convention}",
        f"{'layer':<12}{'params':>10}{'macs':>12}",
    ]
    for name, n_params, macs in report.rows:
        lines.append(f"{name:<12}{n_params:>10}{macs:>12}")
    lines.append(f"{'total':<12}{report.total_params:>10}{report.total_macs:>12}")
    return "\n".join(lines)


# ---- checkpoints -------------------------------------------------------------


def _layer_to_json(name, layer):
    if isinstance(layer, nn.Conv2dSpec):
        return {
            "name": name,
            "kind": "conv",
            "in_channels": layer.in_channels,
            "out_channels": layer.out_channels,
            "kernel": list(layer.kernel),
            "stride": layer.stride,
            "groups": layer.groups,
            "padding": layer.padding,
            "bias": layer.bias,
        }
    if isinstance(layer, nn.LinearSpec):
        return {
            "name": name,
            "kind": "linear",
            "in_features": layer.in_features,
            "out_features": layer.out_features,
            "bias": layer.bias,
        }
    if layer == "flatten":
        return {"name": name, "kind": "flatten"}
    return {"name": name, "kind": "activation", "fn": layer}


def _layer_from_json(d):
    if d["kind"] == "conv":
        return (
            d["name"],
            nn.Conv2dSpec(
                d["in_channels"],
                d["out_channels"],
                tuple(d["kernel"]),
                stride=d["stride"],
                groups=d["groups"],
                padding=d["padding"],
                bias=d["bias"],
            ),
        )
    if d["kind"] == "linear":
        return (d["name"], nn.LinearSpec(d["in_features"], d["out_features"], d["bias"]))
    if d["kind"] == "flatten":
        return (d["name"], "flatten")
    return (d["name"], d["fn"])


def save_checkpoint(model: Model, out_dir, extra: dict | None = None) -> str:
    """Write CTNS weight tensors plus a JSON manifest; returns the weights hash."""
    os.makedirs(out_dir, exist_ok=True)
    params_dir = os.path.join(out_dir, "params")
    os.makedirs(params_dir, exist_ok=True)
    digest = model.weights_sha256()
    spec = model.spec
    manifest = {
        "format": "fccnn-checkpoint-1",
        "kind": spec.kind,
        "arithmetic": spec.arithmetic,
        "activation": spec.activation,
        "head": spec.head,
        "num_classes": spec.num_classes,
        "layers": [_layer_to_json(n, l) for n, l in spec.layers],
        "params": sorted(model.params),
        "dtype": next(iter(model.params.values())).value.dtype,
        "count_convention": COUNT_CONVENTION,
        "weights_sha256": digest,
    }
    if extra:
        manifest.update(extra)
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    for name, p in model.params.items():
        write_ctns(p.value, os.path.join(params_dir, f"{name}.ctns"))
    return digest


def load_checkpoint(ckpt_dir) -> Model:
    with open(os.path.join(ckpt_dir, "manifest.json")) as fh:
        manifest = json.load(fh)
    if manifest.get("format") != "fccnn-checkpoint-1":
        raise ValueError(f"{ckpt_dir}: not a recognized checkpoint manifest")
    layers = tuple(_layer_from_json(d) for d in manifest["layers"])
    spec = ModelSpec(
        kind=manifest["kind"],
        arithmetic=manifest["arithmetic"],
        activation=manifest["activation"],
        head=manifest["head"],
        num_classes=manifest["num_classes"],
        layers=layers,
    )
    params = {}
    for name in manifest["params"]:
        t = read_ctns(os.path.join(ckpt_dir, "params", f"{name}.ctns"))
        params[name] = Parameter(name, t)
    return Model(spec, params)
