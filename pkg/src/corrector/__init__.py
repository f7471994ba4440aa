from .clustering import Cluster, cluster_errors
from .data import LabeledData
from .model import (
    CascadeDecision,
    CorrectorModel,
    CorrectorOptions,
    Decision,
    KnowledgeUnit,
    apply,
    apply_many,
    cascade_apply,
    cascade_apply_many,
    fit,
    fit_cascade,
    fit_stage,
    residual_errors,
    training_recall,
)
from .persistence import dumps_model, load_model, save_model
from .pipeline import PreprocessingPipeline, fit_pipeline, transform
