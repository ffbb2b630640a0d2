"""Space-time activation clusters from snapshot streams.

A site-frame (i, t_k) is active iff rho_i(t_k) > threshold.  Adjacency is
spatial nearest neighbors (periodic) within a frame plus the same site in
the next frame.  Components are tracked streamingly: only the previous and
the current frame are held in memory, finished clusters are finalized as
they die out.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage


@dataclass
class Cluster:
    site_count_spacetime: int
    distinct_spatial_sites: int
    t_start: float
    t_end: float


@dataclass
class AvalancheStats:
    clusters: list          # finalized Cluster records
    n_sites_total: int
    king_count: int = 0
    total_count: int = 0

    def recount(self, min_size: int = 2):
        """King = cluster spanning more than half of all sites; the
        denominator keeps only clusters with >= min_size site-frames."""
        counted = [c for c in self.clusters if c.site_count_spacetime >= min_size]
        self.total_count = len(counted)
        self.king_count = sum(c.distinct_spatial_sites > self.n_sites_total / 2
                              for c in counted)
        return self


class _LiveCluster:
    __slots__ = ("mask", "count", "t_start", "t_end")

    def __init__(self, nsites):
        self.mask = np.zeros(nsites, dtype=bool)
        self.count = 0
        self.t_start = None
        self.t_end = None

    def absorb(self, other: "_LiveCluster"):
        self.mask |= other.mask
        self.count += other.count
        self.t_start = min(self.t_start, other.t_start)
        self.t_end = max(self.t_end, other.t_end)


def _frame_components(active: np.ndarray) -> np.ndarray:
    """Label spatial nearest-neighbor components with periodic wrap.

    Returns an int array, 0 = inactive, labels 1..k (not necessarily dense
    after the wrap merge; callers treat them as opaque ids).
    """
    structure = ndimage.generate_binary_structure(active.ndim, 1)
    labels, _ = ndimage.label(active, structure=structure)
    if labels.max() == 0:
        return labels
    # merge across each periodic seam with a tiny union-find over label ids
    parent = np.arange(labels.max() + 1)

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for ax in range(active.ndim):
        lo = np.take(labels, 0, axis=ax).ravel()
        hi = np.take(labels, -1, axis=ax).ravel()
        for a, b in zip(lo, hi):
            if a and b:
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[rb] = ra
    roots = np.array([find(i) for i in range(len(parent))])
    return roots[labels]


def label_avalanches(frames, threshold: float = 1e-7,
                     min_size: int = 2) -> AvalancheStats:
    """Stream (t, rho-field) frames into space-time cluster statistics."""
    if threshold <= 0:
        raise ValueError("threshold must be > 0")
    finalized: list[Cluster] = []
    live: dict[int, _LiveCluster] = {}   # cluster id -> aggregates
    prev_owner = None                    # flat array: site -> cluster id, -1 inactive
    next_id = 0
    geometry = None
    nsites = 0

    for t, rho in frames:
        if geometry is None:
            geometry = rho.shape
            nsites = rho.size
        elif rho.shape != geometry:
            raise ValueError(f"inconsistent frame geometry {rho.shape} vs {geometry}")

        active = rho > threshold
        comp = _frame_components(active).ravel()
        owner = np.full(nsites, -1, dtype=np.int64)
        current_ids = set()

        if comp.max(initial=0) > 0:
            flat_active = comp != 0
            idx_active = np.nonzero(flat_active)[0]
            comp_active = comp[idx_active]
            for label in np.unique(comp_active):
                sites = idx_active[comp_active == label]
                # clusters continued by time-forward links (same site active
                # in the previous frame)
                linked = set()
                if prev_owner is not None:
                    prev_ids = prev_owner[sites]
                    linked = set(prev_ids[prev_ids >= 0].tolist())
                if linked:
                    target = linked.pop()
                    for other in linked:
                        live[target].absorb(live.pop(other))
                        # re-point ownership of this frame's already-assigned sites
                        owner[owner == other] = target
                        prev_owner[prev_owner == other] = target
                else:
                    target = next_id
                    next_id += 1
                    lc = _LiveCluster(nsites)
                    lc.t_start = t
                    lc.t_end = t
                    live[target] = lc
                cl = live[target]
                cl.mask[sites] = True
                cl.count += len(sites)
                cl.t_end = t
                owner[sites] = target
                current_ids.add(target)

        # clusters absent from the current frame are finished
        for cid in [cid for cid in live if cid not in current_ids]:
            cl = live.pop(cid)
            finalized.append(Cluster(cl.count, int(cl.mask.sum()),
                                     cl.t_start, cl.t_end))
        prev_owner = owner

    for cl in live.values():
        finalized.append(Cluster(cl.count, int(cl.mask.sum()),
                                 cl.t_start, cl.t_end))
    return AvalancheStats(finalized, nsites).recount(min_size)


def king_probability(stats: AvalancheStats):
    """Fraction of counted avalanches spanning more than half of all sites.

    Returns None (undefined) when no avalanche was counted.
    """
    if stats.total_count == 0:
        return None
    return stats.king_count / stats.total_count
