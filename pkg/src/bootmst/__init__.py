"""Bootstrap validation of minimum spanning tree and PMFG links."""

__version__ = "0.1.0"

from .bootstrap import (
    BootstrapMethod,
    BootstrapTally,
    ReplicaSeedPolicy,
    distinct_link_count,
    pair_replica,
    row_replica,
    run_bootstrap,
)
from .correlation import CorrelationMatrix, Spectrum, pearson, shrink_to_psd, spectrum, to_distance
from .data import ReturnsPanel, SectorMap, SynthSpec, load_panel, load_sectors, returns_from_prices, synthesize_panel
from .estimators import BootstrapMST, CorrelationFilter
from .exceptions import BootMSTError, PanelError, ReplicaError
from .filtering import EdgeNetwork, mst, mst_kruskal, pmfg, threshold_network
from .partitions import Partition, ari, awi, metric_curves, sector_association_test
from .topology import clique_pmfg_inclusion, components, count_cliques, mst_overlap_curve, scatter
