"""graphboot: bootstrap methods for networks with latent space structure.

Two bootstrap families for a single observed network: replicate network
statistics that are U-statistics of latent positions by reweighting their
plug-in spectral estimates, or replicate whole networks by resampling from
the empirical distribution of the estimated positions (with empirical-
graphon and parametric block model baselines).
"""

from .graphs import (
    AdjacencyMatrix,
    EdgeListError,
    is_connected,
    read_edge_list,
    shortest_path_matrix,
    write_edge_list,
)
from .inference import BootstrapSample, ConfidenceInterval, CoverageReport, ci, coverage_report, mc_truth
from .models import (
    BetaScalar,
    Empirical,
    PointMix,
    SbmParams,
    sample_connected,
    sample_latents,
    sample_rdpg,
    sample_sbm,
    sbm_to_latents,
)
from .netboot import (
    EmpiricalGraphonResampler,
    ParametricSbmResampler,
    RdpgResampler,
    bootstrap_statistic,
    fit_resampler,
    resample_connected,
)
from .netstats import (
    STATISTICS,
    average_degree,
    average_shortest_path,
    edge_density,
    global_clustering,
    induced_subgraph_density,
    triangle_density,
)
from .graphdist import MatchResult, empirical_wasserstein, matching_distance_approx, matching_distance_exact
from .rng import SeededRng
from .spectral import EigenPairs, ase, augment_diagonal, clamp_probabilities, procrustes_align, top_eigenpairs
from .ustat import (
    KernelSpec,
    UStatResult,
    average_degree_kernel,
    bootstrap_u_statistic,
    degree_variance_vstatistic,
    mmd_statistic,
    normalized_subgraph_density,
    plug_in_u_statistic,
    subgraph_density_kernel,
    u_statistic_exact,
    u_statistic_mc,
    vertex_inclusion_means,
)

__version__ = "0.1.0"
