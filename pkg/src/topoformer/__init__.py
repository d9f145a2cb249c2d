"""Cycle-basis graph toolkit, expressiveness tests, and a topology-aware
graph transformer trained on the circular skip-link benchmark."""

from .autodiff import Tensor, backward, no_grad
from .errors import (
    CapabilityError,
    HypothesisError,
    ParameterError,
    ParseError,
    ShapeError,
    SplitError,
    TopoformerError,
)
from .expressiveness import (
    ColorRefinement,
    ConvergenceReport,
    RrwpEncoding,
    StationaryDistribution,
    Verdict,
    chordless_cycles,
    chordless_length_profile,
    distinguish_by_biconnectivity,
    distinguish_by_cycles,
    rrwp,
    rrwp_convergence_report,
    stationary,
    wl1_distinguishes,
    wl1_refine,
    wl1_with_clique_augmentation,
    wl3_distinguishes,
)
from .graphs import (
    Graph,
    LabeledGraph,
    adjacency_matrix,
    degree_sequence,
    generate_csl,
    generate_csl_dataset,
    generate_rook_4x4,
    generate_shrikhande,
    graph_key,
    permute_graph,
    read_graph,
    write_graph,
)
from .model import (
    GraphBatch,
    TigtConfig,
    count_parameters,
    cross_entropy,
    forward,
    init_params,
    load_checkpoint,
    save_checkpoint,
)
from .topology import (
    CliqueAdjacency,
    CycleBasis,
    articulation_vertices,
    bridges,
    clique_adjacency,
    connected_components,
    cycle_basis,
    cycle_length_histogram,
    delete_edge,
    delete_vertex,
    euler_invariant,
)
from .training import (
    CSL_SKIPS,
    AblationTable,
    RunReport,
    TrainConfig,
    adam_step,
    encode_dataset,
    run_ablation_suite,
    stratified_split,
    train_csl,
)

__version__ = "0.1.0"
