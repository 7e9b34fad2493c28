"""Counterfactual what-if engine for ordinal symptom data.

Train interpretable-by-counterfactual binary classifiers, ask for the
minimal diverse symptom changes that flip a predicted medication class,
and aggregate those changes into local and global feature importance.
"""

from .cftypes import CFQuery, Counterfactual, CounterfactualSet, DiffEntry, canonical_json
from .data import (
    Dataset,
    SynthConfig,
    kfold_split,
    load_csv,
    mad,
    mad_vector,
    save_csv,
    smote_oversample,
    standard_synth_config,
    synth_generate,
)
from .distance import (
    ORDINAL_AS_CATEGORICAL,
    ORDINAL_AS_CONTINUOUS,
    dice_objective,
    distance,
    dpp_diversity,
    hinge_loss,
)
from .importance import ImportanceReport, global_importance, local_importance
from .metrics import (
    CrossValidationResult,
    MetricsReport,
    compute_metrics,
    confusion_matrix,
    cross_validate,
    roc_auc,
)
from .models import (
    DecisionTreeModel,
    LogisticModel,
    ModelConfig,
    RandomForestModel,
    fit_decision_tree,
    fit_logistic_regression,
    fit_model,
    fit_random_forest,
    load_model,
    predict_class,
    predict_proba,
    save_model,
)
from .schema import FeatureSchema, FeatureSpec, default_hamd_schema
from .search import (
    apply_sparsity,
    generate,
    generate_diverse_cfs,
    generate_single_cf,
    predicted_class,
)

__version__ = "0.1.0"
