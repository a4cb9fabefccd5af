"""Low-light degradation modeling, enhancement, and saliency evaluation.

Numerical kernels for the point-wise scattering model I = J*t + A*(1-t)
and its inversion, classical dark-channel estimators, a non-local
attention block with analytic gradients, saliency losses and metrics,
and dataset tooling (box consensus, manifests, synthetic pairs).
"""

from .attention import (AffinityWeights, NlCache, gradient_check, nl_backward,
                        nl_forward, softmax_rows)
from .dataset import (AnnotationRecord, BoundingBox, Manifest, ManifestEntry,
                      box_iou, box_mask, consensus_region, load_manifest,
                      save_manifest, smooth_transmission_field, split_manifest,
                      split_summary, synthesize_pair)
from .errors import (DegenerateGroundTruthError, DimensionError, DomainError,
                     EmptyDatasetError, InsufficientAnnotationsError,
                     SingularParameterError)
from .estimate import (DarkChannel, RefineConfig, dark_channel,
                       estimate_atmospheric_light, init_transmission,
                       refine_transmission, smoothness_objective)
from .grid import (FeatureMap, ImageGrid, from_bytes, load_png, save_png,
                   to_bytes)
from .lighting import (AtmosphericLightMap, ScatterParams, TransmissionMap,
                       degrade, enhance, rng_from_seed,
                       synth_atmospheric_light)
from .losses import (FusionParams, LossWeights, cross_entropy, fuse_saliency,
                     iou_boundary_loss, joint_gan_objective, mse_atmospheric,
                     total_loss)
from .metrics import (EvalReport, PRCurve, binarize, evaluate_dataset, f_beta,
                      mae, pr_curve, precision_recall, threshold_grid)

__version__ = "0.1.0"

__all__ = [
    "AffinityWeights", "AnnotationRecord", "AtmosphericLightMap",
    "BoundingBox", "DarkChannel", "DegenerateGroundTruthError",
    "DimensionError", "DomainError", "EmptyDatasetError", "EvalReport",
    "FeatureMap", "FusionParams", "ImageGrid",
    "InsufficientAnnotationsError", "LossWeights", "Manifest",
    "ManifestEntry", "NlCache", "PRCurve", "RefineConfig", "ScatterParams",
    "SingularParameterError", "TransmissionMap", "binarize", "box_iou",
    "box_mask", "consensus_region", "cross_entropy", "dark_channel",
    "degrade", "enhance", "estimate_atmospheric_light", "evaluate_dataset",
    "f_beta", "from_bytes", "fuse_saliency", "gradient_check",
    "init_transmission", "iou_boundary_loss", "joint_gan_objective",
    "load_manifest", "load_png", "mae", "mse_atmospheric", "nl_backward",
    "nl_forward", "pr_curve", "precision_recall", "refine_transmission",
    "rng_from_seed", "save_manifest", "save_png",
    "smooth_transmission_field", "smoothness_objective", "softmax_rows",
    "split_manifest", "split_summary", "synth_atmospheric_light",
    "synthesize_pair", "threshold_grid", "to_bytes", "total_loss",
]
