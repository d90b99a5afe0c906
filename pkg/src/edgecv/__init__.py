"""Edge cross-validation for networks.

Model selection and parameter tuning by holding out node pairs at random,
reconstructing the network with low-rank matrix completion, fitting candidate
models on the reconstruction, and scoring them on the held-out pairs.
"""

from .netgraph import (
    AdjacencyMatrix,
    build_adjacency,
    degrees,
    extract_core,
    load_edge_list,
    normalized_laplacian,
    regularize,
    save_edge_list,
)
from .holdout import HoldoutMask, sample_mask, zero_fill
from .lowrank import (
    CompletedMatrix,
    complete,
    partial_svd,
    truncate_entries,
    zero_fill_rescale,
)
from .cluster import (
    CommunityAssignment,
    kmeans,
    regularized_spectral_clustering,
    spectral_clustering,
    spherical_spectral_clustering,
)
from .blockmodel import FittedBlockModel, estimate_dcsbm, estimate_sbm, probability_matrix
from .metrics import (
    PairScoreSet,
    auc,
    ccd,
    clustering_accuracy,
    deviance_loss,
    nmi,
    sse_loss,
)
from .ecv import (
    CandidateId,
    SelectionResult,
    ecv_generic,
    select_block_model,
    select_rank,
    stability_select,
    tune_graphon,
    tune_regularization,
)
from .graphon import SmootherConfig, neighborhood_smoothing
from .simgen import (
    BlockDesign,
    PlantedInstance,
    export_instance,
    gen_block_model,
    gen_graphon,
    gen_rdpg_directed,
)

__version__ = "0.1.0"
