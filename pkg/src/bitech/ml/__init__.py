from .baselines import KNeighborsClassifier, LinearRegressor
from .forest import EmptyDataset, ForestRegressor
from .gridsearch import GridSearchResult, GridSpec, cv_accuracy, grid_search, kfold_indices
from .importance import feature_importance_prune, permutation_importance
from .learning import CurvePoint, default_sizes, learning_curve
from .scaler import Scaler
from .stats import (
    ConstantColumn,
    FeatureMatrix,
    LengthMismatch,
    Metrics,
    accuracy,
    evaluate,
    pearson_matrix,
)
from .svm import SingleClass, SvmClassifier, rbf_kernel
from .two_stage import (
    DEFAULT_TWO_STAGE,
    InsufficientData,
    SchemaMismatch,
    TooFewDistinct,
    TwoStageConfig,
    TwoStageModel,
    assign_bins,
    discretize_energy,
    load_model,
    model_from_dict,
    model_to_dict,
    save_model,
    train_two_stage,
)
