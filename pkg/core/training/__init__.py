from .optim import MomentumSGD, OptimState, kappa_update, step_decay
from .metrics import EvalMetrics, KappaSummary, kappa_distribution
from .checkpoint import Checkpoint, load_checkpoint, restore_network, save_checkpoint
from .trainer import EpochRecord, TrainResult, evaluate, metric_rows, train
from .ablation import AblationReport, ablation_suite, expand_variants
