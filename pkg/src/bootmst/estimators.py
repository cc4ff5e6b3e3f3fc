"""scikit-learn style front end.

Both estimators follow the feature-clustering convention: ``X`` has shape
``(n_samples, n_features)`` with time records as samples and elements as
features, and fitted per-element results have length ``n_features``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_is_fitted

from .bootstrap import BootstrapMethod, ReplicaSeedPolicy, run_bootstrap
from .correlation import pearson, to_distance
from .filtering import mst, pmfg, threshold_network
from .topology import components
from .validation import check_panel, seed_from_random_state

__all__ = ["CorrelationFilter", "BootstrapMST"]


class CorrelationFilter(BaseEstimator):
    """Filtered correlation graph (MST or PMFG) of the columns of ``X``.

    Parameters
    ----------
    kind : {'mst', 'pmfg'}
        Which filtered graph to extract.

    Attributes
    ----------
    correlation_ : CorrelationMatrix
    distance_ : ndarray of shape (n_features, n_features)
    graph_ : EdgeNetwork
    """

    def __init__(self, kind="mst"):
        self.kind = kind

    def fit(self, X, y=None):
        if self.kind not in ("mst", "pmfg"):
            raise ValueError(f"kind must be 'mst' or 'pmfg', got {self.kind!r}")
        panel = check_panel(X)
        self.elements_ = np.array(panel.elements, dtype=object)
        self.n_features_in_ = panel.n
        self.correlation_ = pearson(panel)
        self.distance_ = to_distance(self.correlation_)
        self.graph_ = mst(self.distance_) if self.kind == "mst" else pmfg(self.correlation_)
        return self

    def adjacency(self) -> np.ndarray:
        check_is_fitted(self, "graph_")
        A = np.zeros((self.n_features_in_, self.n_features_in_), dtype=bool)
        for a, b in self.graph_.edges:
            A[a, b] = A[b, a] = True
        return A


class BootstrapMST(ClusterMixin, BaseEstimator):
    """Bootstrap values of MST links, and the components they induce.

    Every replica resamples the time records (``method='row'``) or resamples
    them independently for each pair of elements (``method='pair'``), then
    extracts the MST of the replica correlation matrix. ``labels_`` assigns
    each element to a connected component of the network of links whose
    bootstrap value is higher than ``threshold``; isolated elements get -1.

    Parameters
    ----------
    method : {'row', 'pair'}
    n_replicas : int, default=1000
    threshold : int or None
        Defaults to ``0.15 * n_replicas`` rounded down.
    inclusive : bool, default=False
        Keep links whose value equals the threshold as well.
    random_state : int, numpy Generator or None
        Master seed; a fixed int makes the fit reproducible for any ``n_jobs``.
    n_jobs : int or None
        Worker processes; ``None`` reads ``$BOOTMST_WORKERS`` (default 1).
    """

    def __init__(self, method="row", n_replicas=1000, threshold=None, inclusive=False,
                 random_state=0, n_jobs=None):
        self.method = method
        self.n_replicas = n_replicas
        self.threshold = threshold
        self.inclusive = inclusive
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _threshold(self, threshold=None):
        if threshold is None:
            threshold = self.threshold
        if threshold is None:
            threshold = int(0.15 * self.n_replicas)
        return int(threshold)

    def fit(self, X, y=None):
        method = BootstrapMethod(self.method)
        panel = check_panel(X)
        self.elements_ = np.array(panel.elements, dtype=object)
        self.n_features_in_ = panel.n
        self.seed_ = seed_from_random_state(self.random_state)
        self.correlation_ = pearson(panel)
        self.mst_ = mst(to_distance(self.correlation_))
        self.tally_ = run_bootstrap(
            panel, method, self.n_replicas, ReplicaSeedPolicy(self.seed_), self.n_jobs
        )
        self.labels_ = self.component_labels()
        return self

    @property
    def bootstrap_values_(self) -> np.ndarray:
        """Symmetric ``(n_features, n_features)`` matrix of link counts."""
        check_is_fitted(self, "tally_")
        V = np.zeros((self.n_features_in_, self.n_features_in_), dtype=np.int64)
        for (a, b), c in self.tally_.counts.items():
            V[a, b] = V[b, a] = c
        return V

    def threshold_network(self, threshold=None):
        check_is_fitted(self, "tally_")
        return threshold_network(self.tally_, self._threshold(threshold), self.inclusive)

    def component_labels(self, threshold=None) -> np.ndarray:
        comps = components(self.threshold_network(threshold))
        labels = np.full(self.n_features_in_, -1, dtype=np.int64)
        for k, block in enumerate(comps.blocks):
            labels[list(block)] = k
        return labels
