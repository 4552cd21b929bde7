"""Dataset preparation: featurization, stacking, shuffling, splitting.

The processing chain mirrors how the training harness consumes generated
states: per-class feature arrays are built and stacked, globally
shuffled with a seeded permutation, split into train/test by a fraction
f, and separated into input and label arrays.  All transformations are
pure; shuffle determinism is a function of (seed, input order) only.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass

import numpy as np

from .qlinalg import DensityMatrix, PureState


class WidthMismatch(ValueError):
    """Input files disagree on feature width, qubit count or source kind."""


def featurize_density(rho: DensityMatrix) -> np.ndarray:
    """Pack a Hermitian density matrix into 2^{2N} real features.

    Canonical order: Re of the diagonal (ascending index), then for each
    upper-triangle pair (i < j) in row-major order Re then Im.  This is a
    linear bijection; see defeaturize_density.
    """
    m = rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho)
    d = m.shape[0]
    out = np.empty(d * d)
    out[:d] = m.diagonal().real
    k = d
    for i in range(d):
        for j in range(i + 1, d):
            out[k] = m[i, j].real
            out[k + 1] = m[i, j].imag
            k += 2
    return out


def defeaturize_density(vec: np.ndarray, num_qubits: int) -> DensityMatrix:
    """Inverse of featurize_density."""
    d = 2**num_qubits
    vec = np.asarray(vec, dtype=float)
    if vec.shape != (d * d,):
        raise WidthMismatch(f"expected {d * d} features, got {vec.shape}")
    m = np.zeros((d, d), dtype=complex)
    m[np.arange(d), np.arange(d)] = vec[:d]
    k = d
    for i in range(d):
        for j in range(i + 1, d):
            m[i, j] = vec[k] + 1j * vec[k + 1]
            m[j, i] = vec[k] - 1j * vec[k + 1]
            k += 2
    return DensityMatrix(m, num_qubits)


def featurize_purevec(psi: PureState) -> np.ndarray:
    """Interleave (Re, Im) of the 2^N amplitudes: 2^{N+1} real features.

    No global-phase fixing; e^{i theta} psi maps to a different vector.
    """
    v = psi.vec if isinstance(psi, PureState) else np.asarray(psi, dtype=complex)
    out = np.empty(2 * v.shape[0])
    out[0::2] = v.real
    out[1::2] = v.imag
    return out


def defeaturize_purevec(vec: np.ndarray, num_qubits: int) -> PureState:
    """Inverse of featurize_purevec."""
    d = 2**num_qubits
    vec = np.asarray(vec, dtype=float)
    if vec.shape != (2 * d,):
        raise WidthMismatch(f"expected {2 * d} features, got {vec.shape}")
    return PureState(vec[0::2] + 1j * vec[1::2], num_qubits)


@dataclass
class SplitDataset:
    """Shuffled train/test split with separated inputs and labels."""

    train_inputs: np.ndarray
    train_labels: np.ndarray
    test_inputs: np.ndarray
    test_labels: np.ndarray
    f: float
    seed: int

    @property
    def size(self) -> int:
        return self.train_inputs.shape[0] + self.test_inputs.shape[0]


def _load(entry):
    from .stategen import Dataset, read_dataset

    if isinstance(entry, Dataset):
        return entry
    return read_dataset(entry)


def assemble(entries, f: float, seed: int, class_labels=None, redundancy: int = 1) -> SplitDataset:
    """Stack per-class datasets, shuffle, split and separate inputs/labels.

    ``entries`` are dataset file paths (or in-memory Datasets).  With
    ``class_labels=None`` the binary label column of each file is used;
    otherwise ``class_labels[i]`` assigns file i to one of four classes
    and labels become 4-wide one-hot rows.  ``redundancy`` repeats the
    feature block k times (off unless explicitly requested).
    """
    if not 0.0 < f < 1.0:
        raise ValueError(f"train fraction f={f} outside (0, 1)")
    if redundancy < 1:
        raise ValueError("redundancy factor must be >= 1")
    datasets = [_load(e) for e in entries]
    widths = {ds.features.shape[1] for ds in datasets}
    kinds = {(ds.num_qubits, ds.source_kind) for ds in datasets}
    if len(widths) != 1 or len(kinds) != 1:
        raise WidthMismatch(f"inconsistent inputs: widths {widths}, kinds {kinds}")

    blocks, label_blocks = [], []
    for i, ds in enumerate(datasets):
        blocks.append(ds.features)
        if class_labels is None:
            label_blocks.append(ds.binary_labels.astype(float))
        else:
            onehot = np.zeros((ds.count, 4))
            onehot[:, int(class_labels[i])] = 1.0
            label_blocks.append(onehot)
    inputs = np.concatenate(blocks, axis=0)
    labels = np.concatenate(label_blocks, axis=0)
    if redundancy > 1:
        inputs = np.tile(inputs, (1, redundancy))

    order = np.random.default_rng(np.random.SeedSequence([int(seed)])).permutation(
        inputs.shape[0]
    )
    inputs, labels = inputs[order], labels[order]
    n_train = round(f * inputs.shape[0])
    return SplitDataset(
        train_inputs=inputs[:n_train],
        train_labels=labels[:n_train],
        test_inputs=inputs[n_train:],
        test_labels=labels[n_train:],
        f=f,
        seed=seed,
    )


def batches(order, m: int) -> list:
    """Cut a training order into ceil(n/m) batches; the last may be short."""
    if m < 1:
        raise ValueError("batch size must be >= 1")
    if isinstance(order, (int, np.integer)):
        order = np.arange(order)
    order = np.asarray(order)
    return [order[i : i + m] for i in range(0, order.shape[0], m)]


def row_hashes(inputs: np.ndarray, labels: np.ndarray) -> list:
    """Content hash per (input row, label row) pair."""
    labels = np.atleast_2d(labels.T).T
    out = []
    for x, y in zip(inputs, labels):
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(x).tobytes())
        h.update(np.ascontiguousarray(y).tobytes())
        out.append(h.hexdigest())
    return out


def write_split_manifest(split: SplitDataset, path) -> str:
    """Audit file: one `<split>,<sha256>` line per sample row."""
    path = os.fspath(path)
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        for tag, xs, ys in (
            ("train", split.train_inputs, split.train_labels),
            ("test", split.test_inputs, split.test_labels),
        ):
            for digest in row_hashes(xs, ys):
                fh.write(f"{tag},{digest}\n")
    os.replace(tmp, path)
    return path
