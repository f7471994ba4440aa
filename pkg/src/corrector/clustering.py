"""Partition of the whitened error points into positively correlated clusters.

Correlation is measured on the normalized scale: for a cluster of k >= 2
unit vectors u_1..u_k, the average inner product of u_i with the others is
s_i = sum_{j != i} (u_i, u_j) / (k - 1), and the cluster reports
beta1 = max s_i and beta2 = min s_i. A cluster is admissible when
beta2 >= beta_threshold; singletons always are.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import squareform

from ..errors import ParameterError
from ..sampling import PointSet

logger = logging.getLogger("Clustering")

DEFAULT_BETA_THRESHOLD = 0.5
AUTO = "auto"


@dataclass(frozen=True)
class Cluster:
    members: tuple
    beta1: float
    beta2: float
    admissible: bool = True

    @property
    def size(self):
        return len(self.members)


def _normalized(points):
    norms = np.linalg.norm(points, axis=1, keepdims=True)
    units = np.zeros_like(points)
    nonzero = norms[:, 0] > 0
    units[nonzero] = points[nonzero] / norms[nonzero]
    return units


def _average_correlations(gram, members):
    members = list(members)
    block = gram[np.ix_(members, members)]
    return (block.sum(axis=1) - np.diag(block)) / (len(members) - 1)


def _make_cluster(gram, members, beta_threshold):
    members = tuple(sorted(int(i) for i in members))
    if len(members) == 1:
        return Cluster(members, 1.0, 1.0, True)
    averages = _average_correlations(gram, members)
    beta1 = float(averages.max())
    beta2 = float(averages.min())
    return Cluster(members, beta1, beta2, beta2 >= beta_threshold)


def _greedy(points, gram, beta_threshold):
    norms = np.linalg.norm(points, axis=1)
    # descending norm, ties broken lexicographically on the coordinates
    keys = [points[:, j] for j in reversed(range(points.shape[1]))] + [-norms]
    order = np.lexsort(keys)
    self_corr = np.diag(gram)

    free = np.ones(points.shape[0], dtype=bool)
    groups = []
    for start in order:
        if not free[start]:
            continue
        free[start] = False
        members = [int(start)]
        # row_sums[j] = sum of gram[i, j] over the members i
        row_sums = gram[start].copy()
        while True:
            candidates = order[free[order]]
            if candidates.size == 0:
                break
            size = len(members)
            others = row_sums[members] - self_corr[members]
            member_averages = (others[:, None] + gram[np.ix_(members, candidates)]) / size
            beta2 = np.minimum(member_averages.min(axis=0), row_sums[candidates] / size)
            # argmax keeps the first of equal scores in `order`
            best = int(np.argmax(beta2))
            if not beta2[best] >= beta_threshold:
                break
            chosen = int(candidates[best])
            members.append(chosen)
            free[chosen] = False
            row_sums += gram[chosen]
        groups.append(members)
    return groups


def _split(points, gram, group, beta_threshold):
    """Greedy partition of one group into clusters that meet the threshold."""
    rows = np.asarray(group, dtype=int)
    local = _greedy(points[rows], gram[np.ix_(rows, rows)], beta_threshold)
    return [[int(rows[i]) for i in members] for members in local]


def _hierarchical(gram, p):
    distances = np.clip(1.0 - gram, 0.0, 2.0)
    np.fill_diagonal(distances, 0.0)
    distances = (distances + distances.T) / 2
    tree = linkage(squareform(distances, checks=False), method="average")
    labels = fcluster(tree, t=p, criterion="maxclust")
    return [list(np.flatnonzero(labels == label)) for label in np.unique(labels)]


def cluster_errors(Yw, p=AUTO, beta_threshold=DEFAULT_BETA_THRESHOLD, split_inadmissible=True):
    """Clusters of the rows of ``Yw``, ordered by their smallest row index.

    ``p="auto"`` grows clusters greedily while every member keeps an average
    correlation >= ``beta_threshold``. An explicit ``p`` cuts an
    average-linkage tree on the cosine distance into at most ``p`` clusters;
    a cluster that misses the threshold is split greedily, so more than ``p``
    clusters may come back. With ``split_inadmissible=False`` it is kept and
    reported as not admissible instead.
    """
    points = Yw.points if isinstance(Yw, PointSet) else np.atleast_2d(np.asarray(Yw, float))
    k = points.shape[0]
    if k < 1:
        raise ParameterError("Yw", "at least one error point is required")
    if not 0 < beta_threshold < 1:
        raise ParameterError("beta_threshold", "must lie in (0, 1)")

    units = _normalized(points)
    gram = units @ units.T

    if p == AUTO:
        groups = _greedy(points, gram, beta_threshold)
    else:
        if isinstance(p, bool) or not isinstance(p, (int, np.integer)) or p < 1:
            raise ParameterError("clusters", f"must be a positive integer or `auto`, got {p!r}")
        p = min(int(p), k)
        if p == k:
            groups = [[i] for i in range(k)]
        elif p == 1:
            groups = [list(range(k))]
        else:
            groups = _hierarchical(gram, p)
        if split_inadmissible:
            groups = _split_inadmissible(points, gram, groups, beta_threshold)

    clusters = sorted(
        (_make_cluster(gram, group, beta_threshold) for group in groups),
        key=lambda cluster: cluster.members[0],
    )
    for cluster in clusters:
        if not cluster.admissible:
            logger.warning(
                f"Cluster of {cluster.size} errors has beta2={cluster.beta2:.3f} "
                f"below the threshold {beta_threshold}"
            )
    logger.debug(f"{k} errors grouped into {len(clusters)} cluster(s)")
    return clusters


def _split_inadmissible(points, gram, groups, beta_threshold):
    result = []
    for group in groups:
        if _make_cluster(gram, group, beta_threshold).admissible:
            result.append(group)
            continue
        parts = _split(points, gram, group, beta_threshold)
        logger.info(
            f"Cluster of {len(group)} errors misses beta2 >= {beta_threshold}; "
            f"split into {len(parts)}"
        )
        result.extend(parts)
    return result
