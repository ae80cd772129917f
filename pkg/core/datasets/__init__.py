from .dataset import LabeledDataset
from .idx import idx_bytes, load_idx, parse_idx, read_idx, write_idx
from .synthetic import synth_bars, synth_gaussians
from .batching import augment, batches, normalize_splits, split_dataset
