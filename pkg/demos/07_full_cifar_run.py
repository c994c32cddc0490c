"""Full CIFAR training run (long-running; hours on a CPU).

Accuracy targets for the default recipe (AdamW (0.99, 0.999), lr 1e-3,
batch 256, weight decay 0.1, two-stage training): CIFAR-10 RGB test
accuracy ~0.70 and CIFAR-100 RGB ~0.42 after finetuning. The extended
acceptance gate (FCCNN_FULL_REPRO=1) asserts them within two points.

Needs the CIFAR binary batch files on disk, e.g.:
  data/cifar-10-batches-bin/data_batch_{1..5}.bin, test_batch.bin
  data/cifar-100-binary/train.bin, test.bin

Run: python3 demos/07_full_cifar_run.py --data-dir data --dataset cifar10 \
         --epochs 60 --out runs/cifar10-full

The same run is available through the CLI:
  fccnn train --model fc-cnn --dataset cifar10 --data-dir data \
      --epochs 60 --out runs/cifar10-full
"""

import argparse

from fccnn.harness import RunConfig, run

parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
parser.add_argument("--data-dir", required=True)
parser.add_argument("--dataset", choices=("cifar10", "cifar100"), default="cifar10")
parser.add_argument("--encoding", choices=("rgb", "lab", "sliding"), default="rgb")
parser.add_argument("--epochs", type=int, default=60)
parser.add_argument("--seed", type=int, default=0)
parser.add_argument("--out", required=True)
args = parser.parse_args()

summary = run(
    RunConfig(
        model="fc-cnn",
        dataset=args.dataset,
        encoding=args.encoding,
        data_dir=args.data_dir,
        epochs=args.epochs,
        seed=args.seed,
        out_dir=args.out,
    )
)
print(summary)
