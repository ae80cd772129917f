import os
import unittest

import numpy as np
import pytest

from core.datasets import load_idx, normalize_splits, split_dataset, synth_bars
from core.training import ablation_suite
from core.utils.config import RunConfig

# Set to a directory holding the four MNIST-style IDX files to run the grid on them.
IDX_DIR_ENV = "LIFB_IDX_DIR"
IDX_FILES = ("train-images-idx3-ubyte", "train-labels-idx1-ubyte", "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte")


def trend_splits():
    directory = os.getenv(IDX_DIR_ENV)
    if directory:
        paths = [os.path.join(directory, name) for name in IDX_FILES]
        paths = [path if os.path.exists(path) else path + ".gz" for path in paths]
        train_set = load_idx(paths[0], paths[1], split="train").head(2000)
        test_set = load_idx(paths[2], paths[3], train_set.classes, split="test").head(500)
        return normalize_splits(train_set, test_set)
    train_set, val_set = split_dataset(synth_bars(240, seed=11, noise=0.3), 0.25, seed=11)
    return normalize_splits(train_set, val_set)


def pooled_std(*groups):
    return float(np.sqrt(np.mean([np.var(group) for group in groups])))


@pytest.mark.slow
class AblationTrendTestCase(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        train_set, val_set = trend_splits()
        config = RunConfig.resolve(
            {
                "net.arch": "snn6-small",
                "train.epochs": "8",
                "train.batch_size": "32",
                "train.lr": "0.05",
                "logging.events": "false",
                "ablation.variants": "lif,lifb,posneg,decoupled-scratch,lifb-fixed",
                "ablation.fixed_kappa": "0.5,1.5,2.0",
                "ablation.steps": "1,2",
                "ablation.seeds": "3",
            }
        )
        cls.report = ablation_suite(config, train_set, val_set)

    def accuracies(self, variant):
        return np.concatenate([self.report.accuracies(variant, steps) for steps in self.report.steps])

    def test_grid_is_complete(self):
        self.assertEqual(len(self.report.runs), 7 * 2 * 3)

    def test_bursts_do_not_lose_to_lif(self):
        self.assertGreaterEqual(self.accuracies("lifb").mean(), self.accuracies("lif").mean() - 0.001)

    def test_learnable_kappa_keeps_up_with_fixed_kappa(self):
        lifb = self.accuracies("lifb")
        for kappa in ("0.5", "1.5", "2"):
            fixed = self.accuracies(f"lifb-fixed-{kappa}")
            self.assertGreaterEqual(lifb.mean(), fixed.mean() - pooled_std(lifb, fixed), kappa)

    def test_bursts_keep_up_with_negative_spikes(self):
        lifb, posneg = self.accuracies("lifb"), self.accuracies("posneg")
        self.assertGreaterEqual(lifb.mean(), posneg.mean() - pooled_std(lifb, posneg))

    def test_bursts_keep_up_with_pairs_trained_from_scratch(self):
        lifb, scratch = self.accuracies("lifb"), self.accuracies("decoupled-scratch")
        self.assertGreaterEqual(lifb.mean(), scratch.mean() - pooled_std(lifb, scratch))
