"""Cost-aware sequential feature acquisition at test time."""

from .attribution import (
    AttributionVector,
    IgConfig,
    accumulated_ig,
    integrated_gradients,
    plain_gradient_attribution,
)
from .data import (
    DatasetSchema,
    SplitSpec,
    TabularDataset,
    generate_synthesized,
    load_mnist,
    load_tabular,
    split,
    winsorize_and_scale,
)
from .engine import (
    AcquisitionSession,
    AigPolicy,
    PlainGradientPolicy,
    RandomPolicy,
    Trajectory,
    make_policy,
    new_session,
    run_episode,
    run_episodes_batch,
)
from .errors import (
    BudgetError,
    ConfigError,
    DataError,
    FeatacqError,
    ModelFormatError,
    SchemaError,
    SessionStateError,
    TrainingError,
)
from .model_io import ModelBundle, load_model, save_model
from .nnet import (
    DaeNetwork,
    DenseNetwork,
    TrainConfig,
    sample_dropout_mask,
    train_dae_predictor,
    train_mlp,
)

__version__ = "0.1.0"
