"""Tests for featurization and the stack/shuffle/split/batch chain."""

import numpy as np
import pytest

from entdetect.pipeline import (
    WidthMismatch,
    assemble,
    batches,
    defeaturize_density,
    defeaturize_purevec,
    featurize_density,
    featurize_purevec,
    row_hashes,
    write_split_manifest,
)
from entdetect.qlinalg import DensityMatrix, PureState
from entdetect.stategen import GenSpec, build_dataset


class TestFeaturize:
    def test_density_basis_projector(self):
        rho = PureState(np.array([1, 0, 0, 0], dtype=complex), 2).to_density()
        v = featurize_density(rho)
        expected = np.zeros(16)
        expected[0] = 1.0
        np.testing.assert_array_equal(v, expected)

    def test_density_maximally_mixed(self):
        v = featurize_density(DensityMatrix(np.eye(4) / 4, 2))
        np.testing.assert_array_equal(v[:4], 0.25)
        np.testing.assert_array_equal(v[4:], 0.0)

    def test_density_roundtrip_exact(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
            m = a @ a.conj().T
            rho = DensityMatrix(m / np.trace(m).real, 2)
            back = defeaturize_density(featurize_density(rho), 2)
            np.testing.assert_array_equal(back.mat, rho.mat)

    def test_purevec_layouts(self):
        v = featurize_purevec(PureState(np.eye(8, dtype=complex)[0], 3))
        expected = np.zeros(16)
        expected[0] = 1.0
        np.testing.assert_array_equal(v, expected)
        ghz = np.zeros(8, dtype=complex)
        ghz[0] = ghz[7] = 1 / np.sqrt(2)
        v = featurize_purevec(PureState(ghz, 3))
        assert v[0] == pytest.approx(1 / np.sqrt(2))
        assert v[14] == pytest.approx(1 / np.sqrt(2))
        assert np.sum(v != 0) == 2

    def test_purevec_no_phase_fixing(self):
        psi = PureState(np.array([1, 1j, 0, 0]) / np.sqrt(2), 2)
        rotated = PureState(psi.vec * np.exp(0.3j), 2)
        assert not np.allclose(featurize_purevec(psi), featurize_purevec(rotated))

    def test_purevec_roundtrip(self):
        rng = np.random.default_rng(1)
        v = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        psi = PureState(v / np.linalg.norm(v), 3)
        np.testing.assert_array_equal(defeaturize_purevec(featurize_purevec(psi), 3).vec, psi.vec)


def two_class_datasets(n=20, seed=0):
    sep = build_dataset(GenSpec("sep2pure", n, seed))
    bell = build_dataset(GenSpec("bellrandom", n, seed + 1))
    return sep, bell


class TestAssemble:
    def test_split_sizes(self):
        sep, bell = two_class_datasets(5)
        split = assemble([sep, bell], f=0.8, seed=1)
        assert split.train_inputs.shape[0] == 8
        assert split.test_inputs.shape[0] == 2
        assert split.size == 10

    def test_same_seed_same_split(self):
        sep, bell = two_class_datasets()
        s1 = assemble([sep, bell], f=0.8, seed=3)
        s2 = assemble([sep, bell], f=0.8, seed=3)
        np.testing.assert_array_equal(s1.train_inputs, s2.train_inputs)
        np.testing.assert_array_equal(s1.test_labels, s2.test_labels)

    def test_binary_label_column(self):
        sep, bell = two_class_datasets()
        split = assemble([sep, bell], f=0.5, seed=0)
        assert split.train_labels.ndim == 1
        assert set(np.unique(split.train_labels)) <= {0.0, 1.0}

    def test_categorical_onehot(self):
        sep, bell = two_class_datasets()
        split = assemble([sep, bell], f=0.5, seed=0, class_labels=[0, 3])
        assert split.train_labels.shape[1] == 4
        np.testing.assert_array_equal(split.train_labels.sum(axis=1), 1.0)
        assert np.all(split.train_labels[:, [1, 2]] == 0)

    def test_no_leakage_by_content_hash(self):
        sep, bell = two_class_datasets(50)
        split = assemble([sep, bell], f=0.8, seed=7)
        train = set(row_hashes(split.train_inputs, split.train_labels))
        test = set(row_hashes(split.test_inputs, split.test_labels))
        assert not train & test

    def test_shuffle_fairness(self):
        # class fraction of the train split stays near 1/2 across seeds
        sep, bell = two_class_datasets(100)
        fracs = [
            assemble([sep, bell], f=0.8, seed=s).train_labels.mean()
            for s in range(100)
        ]
        # hypergeometric sigma for 160 draws from 100/100 is ~0.02
        assert abs(np.mean(fracs) - 0.5) < 0.01
        assert np.all(np.abs(np.array(fracs) - 0.5) < 6 * 0.02)

    def test_file_and_memory_agree(self, tmp_path):
        from entdetect.stategen import write_dataset

        sep, bell = two_class_datasets(10)
        p1, p2 = tmp_path / "s.csv", tmp_path / "b.csv"
        write_dataset(sep, p1)
        write_dataset(bell, p2)
        s_mem = assemble([sep, bell], f=0.8, seed=2)
        s_file = assemble([p1, p2], f=0.8, seed=2)
        np.testing.assert_array_equal(s_mem.train_inputs, s_file.train_inputs)

    def test_width_mismatch(self):
        sep, _ = two_class_datasets(5)
        ghz = build_dataset(GenSpec("ghz3", 5, 2))
        with pytest.raises(WidthMismatch):
            assemble([sep, ghz], f=0.5, seed=0)

    def test_redundancy_factor(self):
        sep, bell = two_class_datasets(5)
        split = assemble([sep, bell], f=0.5, seed=0, redundancy=3)
        assert split.train_inputs.shape[1] == 48
        np.testing.assert_array_equal(
            split.train_inputs[:, :16], split.train_inputs[:, 16:32]
        )

    def test_f_validation(self):
        sep, bell = two_class_datasets(5)
        with pytest.raises(ValueError):
            assemble([sep, bell], f=1.0, seed=0)


class TestBatches:
    def test_sizes_and_coverage(self):
        got = batches(100, 40)
        assert [len(b) for b in got] == [40, 40, 20]
        np.testing.assert_array_equal(np.sort(np.concatenate(got)), np.arange(100))

    def test_single_batch_and_online(self):
        assert len(batches(64, 64)) == 1
        assert len(batches(64, 1)) == 64

    def test_order_respected(self):
        order = np.array([5, 3, 1, 2])
        got = batches(order, 3)
        np.testing.assert_array_equal(got[0], [5, 3, 1])
        np.testing.assert_array_equal(got[1], [2])
        with pytest.raises(ValueError):
            batches(10, 0)


def test_split_manifest(tmp_path):
    sep, bell = two_class_datasets(10)
    split = assemble([sep, bell], f=0.8, seed=1)
    path = write_split_manifest(split, tmp_path / "manifest.csv")
    lines = open(path).read().splitlines()
    assert len(lines) == 20
    assert sum(1 for ln in lines if ln.startswith("train,")) == 16
    assert all(len(ln.split(",")[1]) == 64 for ln in lines)
