"""Deep robust one-class classification.

Trains a scorer to separate normal data from hard negatives generated
adversarially inside an annulus around each training point, under the
assumption that normal data lies on a well-sampled low-dimensional
manifold. Includes the limited-negatives extension with a learned
diagonal-Mahalanobis local metric, synthetic manifold benchmarks, and
evaluation utilities.
"""

__version__ = "0.1.0"

from ._backend import backend_name
from .datasets import (
    Dataset,
    gen_ball,
    gen_noisy_sine10d,
    gen_noisy_sine10d_displaced,
    gen_sine2d,
    gen_sine_displaced,
    gen_sphere_surface,
    load_csv,
    normalize,
    split,
)
from .metrics import (
    EvalReport,
    auroc,
    evaluate,
    f1_at_contamination,
    nearest_neighbor_scores,
    recall_at_fpr,
)
from .nn import GradientBundle, MlpModel, backward, bce_logit_loss, forward, input_gradients
from .optim import OptimizerState, optimizer_step
from .projection import (
    EuclideanAnnulus,
    MahalanobisAnnulus,
    ProjectionResult,
    project_displacement,
    project_displacements,
    project_euclidean,
    project_mahalanobis,
    sample_uniform_annulus,
)
from .training import DroccConfig, TrainReport, adversarial_search, score, train, warmup
from .training_lf import (
    LfConfig,
    SigmaWeights,
    lf_adversarial_search,
    train_lf,
    train_oe,
    update_sigma,
)

__all__ = [
    "__version__",
    "backend_name",
    "Dataset",
    "gen_ball",
    "gen_noisy_sine10d",
    "gen_noisy_sine10d_displaced",
    "gen_sine2d",
    "gen_sine_displaced",
    "gen_sphere_surface",
    "load_csv",
    "normalize",
    "split",
    "EvalReport",
    "auroc",
    "evaluate",
    "f1_at_contamination",
    "nearest_neighbor_scores",
    "recall_at_fpr",
    "GradientBundle",
    "MlpModel",
    "backward",
    "bce_logit_loss",
    "forward",
    "input_gradients",
    "OptimizerState",
    "optimizer_step",
    "EuclideanAnnulus",
    "MahalanobisAnnulus",
    "ProjectionResult",
    "project_displacement",
    "project_displacements",
    "project_euclidean",
    "project_mahalanobis",
    "sample_uniform_annulus",
    "DroccConfig",
    "TrainReport",
    "adversarial_search",
    "score",
    "train",
    "warmup",
    "LfConfig",
    "SigmaWeights",
    "lf_adversarial_search",
    "train_lf",
    "train_oe",
    "update_sigma",
]
