"""Synthetic dominating-mode datasets with known ground truth.

Each user owns a spherical Gaussian mode; a tail_eps fraction of a
user's samples is drawn instead from a broadened (3 sigma) Gaussian
centered on a uniformly chosen OTHER user's mean, creating the
cross-user contamination that diverse selection chases and tight
selection avoids.

Generation is stream-ordered on a seeded PCG64 generator, so a given
parameter set always yields the identical dataset.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Sample

_PLACEMENT_ATTEMPTS = 1000


@dataclass(frozen=True)
class SynthParams:
    k_users: int
    dim: int
    sigma: float = 1.0
    separation: float = 8.0  # min distance between user means, in sigmas
    tail_eps: float = 0.1
    samples_per_user: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.k_users < 2:
            raise ValueError("need at least 2 users")
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if self.sigma <= 0 or self.separation <= 0:
            raise ValueError("sigma and separation must be positive")
        if not (0.0 <= self.tail_eps < 1.0):
            raise ValueError("tail_eps must be in [0, 1)")
        if self.samples_per_user < 1:
            raise ValueError("samples_per_user must be positive")


def user_means(params: SynthParams) -> np.ndarray:
    """Deterministic user mean placement, pairwise distance >= separation*sigma.

    With dim >= k_users the means sit on scaled coordinate axes (exact
    pairwise distance separation*sigma); otherwise they are rejection
    sampled from a seeded uniform cube.
    """
    k, d = params.k_users, params.dim
    min_dist = params.separation * params.sigma
    if d >= k:
        means = np.zeros((k, d))
        scale = min_dist / np.sqrt(2.0)
        for i in range(k):
            means[i, i] = scale
        return means
    # smallest feasible cube first: tight packing keeps the modes overlapped,
    # which is the regime the dominating-mode model is about
    for factor in (0.75, 1.0, 1.5, 2.5, 4.0, 8.0):
        rng = np.random.default_rng(np.random.SeedSequence([params.seed, 0xA11CE]))
        side = factor * min_dist * max(1.0, k ** (1.0 / d))
        means = np.empty((k, d))
        placed = 0
        for _ in range(_PLACEMENT_ATTEMPTS * k):
            cand = rng.uniform(0.0, side, size=d)
            if placed == 0 or np.min(
                np.sqrt(np.sum((means[:placed] - cand) ** 2, axis=1))
            ) >= min_dist:
                means[placed] = cand
                placed += 1
                if placed == k:
                    return means
    raise ValueError(
        f"could not place {k} means at separation {params.separation} in dim {d}; "
        "lower the separation or raise the dimension"
    )


def generate(params: SynthParams) -> list[Sample]:
    """Labeled samples for all users, user-major, ids sequential from 0."""
    means = user_means(params)
    rng = np.random.default_rng(np.random.SeedSequence([params.seed, 1]))
    samples: list[Sample] = []
    sid = 0
    for user in range(1, params.k_users + 1):
        own_mean = means[user - 1]
        others = [u for u in range(params.k_users) if u != user - 1]
        for _ in range(params.samples_per_user):
            if rng.random() < params.tail_eps:
                center = means[others[rng.integers(len(others))]]
                spread = 3.0 * params.sigma
            else:
                center = own_mean
                spread = params.sigma
            vec = center + spread * rng.standard_normal(params.dim)
            samples.append(Sample(id=sid, vector=vec, true_user=user))
            sid += 1
    return samples
