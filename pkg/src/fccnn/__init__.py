"""Fully complex-valued convolutional networks on split-plane tensors."""

from .ctensor import ComplexTensor, read_ctns, write_ctns
from .autograd import Parameter, Tape, backward, grad_check
from .nn import (
    Conv2dSpec,
    LinearSpec,
    cardioid,
    complex_conv2d,
    complex_linear,
    crelu,
    relu,
)
from .objective import (
    ComplexOneHot,
    HingeError,
    HingeState,
    encode_one_hot,
    error_threshold,
    gate_error,
    hinge_error,
    loss,
    predict_class,
)
from .optim import AdamW
from .models import (
    CostReport,
    Model,
    ModelSpec,
    build_baseline,
    build_fc_cnn,
    build_model,
    count_macs,
    count_params,
    load_checkpoint,
    save_checkpoint,
)
from .data import LabeledImageSet, encode, load_cifar, load_ctns_dataset
from .harness import (
    FeatureStore,
    MetricsRecord,
    RunConfig,
    evaluate,
    report,
    train_stage1,
    train_stage2,
)

__version__ = "0.1.0"
