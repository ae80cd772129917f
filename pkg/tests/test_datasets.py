import gzip
import os
import tempfile
import unittest

import numpy as np

from core.datasets import (
    LabeledDataset,
    augment,
    batches,
    idx_bytes,
    load_idx,
    normalize_splits,
    parse_idx,
    read_idx,
    split_dataset,
    synth_bars,
    synth_gaussians,
    write_idx,
)
from core.errors import IdxFormatError, ShapeError
from tests.helpers import idx_fixture


class IdxTestCase(unittest.TestCase):

    def test_parse(self):
        array = parse_idx(idx_fixture([2, 3], bytes(range(6))))
        self.assertEqual(array.shape, (2, 3))
        self.assertEqual(array[1, 2], 5)

    def test_bad_magic(self):
        with self.assertRaises(IdxFormatError):
            parse_idx(b"\x00\x00\x0d\x01" + b"\x00\x00\x00\x01" + b"\x00")
        with self.assertRaises(IdxFormatError):
            parse_idx(b"\x01\x00\x08\x01" + b"\x00\x00\x00\x01" + b"\x00")

    def test_truncation(self):
        with self.assertRaises(IdxFormatError):
            parse_idx(b"\x00\x00")
        with self.assertRaises(IdxFormatError):
            parse_idx(b"\x00\x00\x08\x03" + b"\x00\x00\x00\x02")
        with self.assertRaises(IdxFormatError):
            parse_idx(idx_fixture([2, 3], bytes(5)))

    def test_trailing_bytes(self):
        with self.assertRaises(IdxFormatError) as error:
            parse_idx(idx_fixture([2, 3], bytes(7)))
        self.assertIn("trailing", str(error.exception))

    def test_overflowing_dimensions(self):
        with self.assertRaises(IdxFormatError) as error:
            parse_idx(idx_fixture([65536, 65536, 2], b""))
        self.assertIn("overflow", str(error.exception))

    def test_only_unsigned_bytes_are_written(self):
        with self.assertRaises(IdxFormatError):
            idx_bytes(np.zeros(3, dtype=np.float32))

    def test_files(self):
        rng = np.random.default_rng(0)
        images = rng.integers(0, 256, (5, 4, 3), dtype=np.uint8)
        labels = np.array([0, 2, 1, 2, 0], dtype=np.uint8)
        with tempfile.TemporaryDirectory() as folder:
            image_path = os.path.join(folder, "images-idx3-ubyte.gz")
            label_path = os.path.join(folder, "labels-idx1-ubyte")
            write_idx(image_path, images)
            write_idx(label_path, labels)
            with open(image_path, "rb") as handle:
                first = handle.read()
            write_idx(image_path, images)
            with open(image_path, "rb") as handle:
                self.assertEqual(handle.read(), first)
            self.assertEqual(gzip.decompress(first), idx_bytes(images))
            np.testing.assert_array_equal(read_idx(image_path), images)

            dataset = load_idx(image_path, label_path, split="test")
            self.assertEqual(dataset.images.shape, (5, 1, 4, 3))
            self.assertEqual(dataset.classes, 3)
            self.assertEqual(dataset.split, "test")
            np.testing.assert_array_equal(dataset.images[:, 0], images / 255.0)

            with self.assertRaises(IdxFormatError):
                load_idx(label_path, label_path)
            with self.assertRaises(FileNotFoundError):
                load_idx(os.path.join(folder, "missing"), label_path)


class DatasetTestCase(unittest.TestCase):

    def test_validation(self):
        with self.assertRaises(ShapeError):
            LabeledDataset(np.zeros((3, 2)), np.zeros(2), classes=2)
        with self.assertRaises(ValueError):
            LabeledDataset(np.zeros((2, 2)), np.array([0, 2]), classes=2)

    def test_gaussians(self):
        dataset = synth_gaussians(101, d=3, seed=2)
        self.assertEqual(len(dataset), 100)
        self.assertEqual(dataset.sample_shape, (3,))
        self.assertEqual(int(dataset.labels.sum()), 50)
        positive = dataset.images[dataset.labels == 1, 0].mean()
        negative = dataset.images[dataset.labels == 0, 0].mean()
        self.assertGreater(positive - negative, 5.0)
        np.testing.assert_array_equal(synth_gaussians(101, d=3, seed=2).images, dataset.images)
        with self.assertRaises(ValueError):
            synth_gaussians(3)

    def test_bars(self):
        dataset = synth_bars(10, seed=1, noise=0.0)
        self.assertEqual(dataset.images.shape, (10, 1, 8, 8))
        for image, label in zip(dataset.images[:, 0], dataset.labels):
            rows = np.flatnonzero(image.sum(axis=1) == 8)
            columns = np.flatnonzero(image.sum(axis=0) == 8)
            self.assertEqual(len(rows if label == 0 else columns), 1)
        with self.assertRaises(ValueError):
            synth_bars(9)

    def test_channel_statistics_and_normalization(self):
        images = np.zeros((4, 2, 3, 3))
        images[:, 0] = np.arange(4.0)[:, None, None]
        train = LabeledDataset(images, np.zeros(4), classes=1)
        mean, std = train.channel_stats()
        np.testing.assert_allclose(mean, [1.5, 0.0])
        np.testing.assert_array_equal(std[1], 1.0)
        other = LabeledDataset(images[:2] + 1.0, np.zeros(2), classes=1)
        normalized_train, normalized_other = normalize_splits(train, other)
        np.testing.assert_allclose(normalized_train.images[:, 0].mean(), 0.0, atol=1e-12)
        np.testing.assert_allclose(normalized_train.images[:, 0].std(), 1.0)
        np.testing.assert_allclose(normalized_other.images[:, 1], 1.0)

    def test_split(self):
        train, val = split_dataset(synth_gaussians(200), 0.2, seed=1)
        self.assertEqual((len(train), len(val)), (160, 40))
        self.assertEqual((train.split, val.split), ("train", "val"))
        again, _ = split_dataset(synth_gaussians(200), 0.2, seed=1)
        np.testing.assert_array_equal(again.images, train.images)
        with self.assertRaises(ValueError):
            split_dataset(train, 1.0)


class BatchingTestCase(unittest.TestCase):

    def test_every_sample_once(self):
        dataset = LabeledDataset(np.arange(10.0)[:, None], np.zeros(10), classes=1)
        chunks = list(batches(dataset, 4, seed=3, epoch=1))
        self.assertEqual([len(labels) for _, labels in chunks], [4, 4, 2])
        seen = np.concatenate([images[:, 0] for images, _ in chunks])
        self.assertEqual(sorted(seen.tolist()), list(range(10)))

    def test_order_depends_on_seed_and_epoch(self):
        dataset = LabeledDataset(np.arange(50.0)[:, None], np.zeros(50), classes=1)

        def order(seed, epoch, shuffle=True):
            return np.concatenate([images[:, 0] for images, _ in batches(dataset, 7, seed, shuffle, epoch)])

        np.testing.assert_array_equal(order(1, 2), order(1, 2))
        self.assertFalse(np.array_equal(order(1, 2), order(1, 3)))
        self.assertFalse(np.array_equal(order(1, 2), order(2, 2)))
        np.testing.assert_array_equal(order(1, 2, shuffle=False), np.arange(50.0))
        with self.assertRaises(ValueError):
            list(batches(dataset, 0))

    def test_augment(self):
        rng = np.random.default_rng(0)
        images = rng.standard_normal((6, 1, 5, 5))
        pristine = images.copy()
        self.assertIs(augment(images, rng), images)
        vectors = rng.standard_normal((6, 3))
        self.assertIs(augment(vectors, rng, crop_padding=2, flip=True), vectors)

        out = augment(images, np.random.default_rng(1), flip=True)
        for original, flipped in zip(images, out):
            self.assertTrue(
                np.array_equal(original, flipped) or np.array_equal(original[:, :, ::-1], flipped)
            )
        cropped = augment(images, np.random.default_rng(2), crop_padding=1)
        self.assertEqual(cropped.shape, images.shape)
        np.testing.assert_array_equal(images, pristine)
