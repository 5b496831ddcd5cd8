"""Pair recognition: feature vectors, classifiers, and evaluation."""

from .evaluate import EvalReport, evaluate, f_beta
from .features import (
    INSTANCE,
    INSTANCE_FEATURES,
    SCHEMA,
    SCHEMA_FEATURES,
    FeatureContext,
    LabeledPair,
    balance,
    dump_features_csv,
    feature_names,
    featurize,
    featurize_pairs,
    load_features_csv,
    parse_features_csv,
    save_features_csv,
    sim_lookup,
)
from .models import (
    ConstantModel,
    GbtModel,
    LogisticModel,
    Model,
    ThresholdModel,
    TreeModel,
    TreeNode,
    dump_model,
    load_model,
    logreg_loss_grad,
    model_from_obj,
    model_to_obj,
    predict,
    save_model,
    train_gbt,
    train_logreg,
    train_tree,
)

__all__ = [
    "EvalReport",
    "evaluate",
    "f_beta",
    "INSTANCE",
    "INSTANCE_FEATURES",
    "SCHEMA",
    "SCHEMA_FEATURES",
    "FeatureContext",
    "LabeledPair",
    "balance",
    "dump_features_csv",
    "feature_names",
    "featurize",
    "featurize_pairs",
    "load_features_csv",
    "parse_features_csv",
    "save_features_csv",
    "sim_lookup",
    "ConstantModel",
    "GbtModel",
    "LogisticModel",
    "Model",
    "ThresholdModel",
    "TreeModel",
    "TreeNode",
    "dump_model",
    "load_model",
    "logreg_loss_grad",
    "model_from_obj",
    "model_to_obj",
    "predict",
    "save_model",
    "train_gbt",
    "train_logreg",
    "train_tree",
]
