"""Configuration, folds, training/search/eval loops and output tables."""

from autohr.harness.config import ExperimentConfig, load_config
from autohr.harness.evaluate import evaluate, evaluate_with
from autohr.harness.folds import Fold, FoldPlan, make_folds
from autohr.harness.train import train
