"""Train the smallest detector: separable vs maximally entangled.

A 16:8:1 perceptron on density-matrix features tells Bell-orbit states
from product states essentially perfectly; this is the desk-scale
version of the headline learning curve (2000 states instead of 20000).
"""

import numpy as np

from entdetect.nn import TrainConfig, asr, fit, glorot_uniform_init
from entdetect.pipeline import assemble
from entdetect.stategen import GenSpec, build_dataset

S_HALF = 1000

print(f"generating {S_HALF} separable + {S_HALF} maximally entangled states ...")
sep = build_dataset(GenSpec("sep2pure", S_HALF, seed=1))
bell = build_dataset(GenSpec("bellrandom", S_HALF, seed=2))
split = assemble([sep, bell], f=0.8, seed=3)

model = glorot_uniform_init([16, 8, 1], seed=4)
cfg = TrainConfig(batch_size=40, max_epochs=100, patience=10, seed=4)
best, metrics = fit(
    model,
    (split.train_inputs, split.train_labels),
    (split.test_inputs, split.test_labels),
    cfg,
    optimizer="rmsprop",
)

print()
print("epoch  test-BCE  test-ASR")
for e in range(0, metrics.epochs_run, max(1, metrics.epochs_run // 12)):
    print(f"{e + 1:5d}  {metrics.test_losses[e]:8.4f}  {metrics.test_asrs[e]:8.4f}")
print()
print(f"best epoch {metrics.best_epoch}, final test ASR {metrics.final_asr:.4f}")
print("held-out ASR of restored model:",
      asr(best, (split.test_inputs, split.test_labels)))
