"""Graphlet sampling and averaging with random-feature maps.

Structure-only graph classification: sample k-node induced subgraphs,
push each through a feature map (exact isomorphism matching, Gaussian
random Fourier features on the adjacency or its spectrum, or a simulated
optical quadratic map), average into a per-graph embedding, and train a
linear classifier.  Includes an MMD concentration verifier, a two-class
SBM generator, and a timing benchmark.
"""

from .atlas import (
    Atlas,
    build_atlas,
    canonical_code,
    is_isomorphic,
    load_atlas,
    load_or_build_atlas,
    match_index,
    save_atlas,
)
from .classifier import (
    LinearModel,
    TrainConfig,
    evaluate,
    load_model,
    predict,
    save_model,
    train,
)
from .datasets import (
    LabeledDataset,
    SbmSpec,
    generate_sbm,
    load_tu_dataset,
    solve_sbm_probs,
    split,
)
from .embedding import (
    ConcentrationReport,
    Embedding,
    embed_dataset,
    exact_spectrum,
    gsa_embed,
    mmd_sq_estimate,
    run_concentration_trials,
    theorem1_bound,
)
from .errors import InputError, InternalError
from .estimators import GraphletClassifier, GraphletEmbedder, HingeClassifier
from .feature_maps import (
    FeatureMapSpec,
    RealizedMap,
    opu_kernel_closed_form,
    phi_gaussian,
    phi_match,
    phi_opu_sim,
    realize,
    sorted_eigenvalues,
)
from .graphs import (
    Graph,
    GraphletCode,
    flatten_adjacency,
    from_edge_list,
    induced_subgraph,
    permute_graph,
)
from .rng import RngStream
from .sampling import SamplerSpec, sample_rw, sample_uniform

__version__ = "0.1.0"
