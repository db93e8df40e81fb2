"""Verification metrics: EER, impostor fraction, storage accounting,
and the score-scatter export.

Score convention everywhere: raw distances, accept if score < t, so FAR
rises and FRR falls as the threshold increases. FRR counts scores >= t
to pair with the strict acceptance rule in matching.
"""

from __future__ import annotations

import csv
from typing import Optional, Sequence, TextIO

import numpy as np

from .core import Batch, Gallery
from .matching import EUCLIDEAN, score_sets

DEFAULT_BYTES_PER_COORD = 4  # one 32-bit value per coordinate unless overridden


def fmt9(x: float) -> str:
    """Fixed output format: 9 significant digits, '.' decimal separator."""
    return format(float(x), ".9g")


def compute_eer(genuine: Sequence[float], impostor: Sequence[float]) -> float:
    """Equal error rate of distance score sets.

    Sweeps thresholds over the union of scores (plus +inf), with
    FAR(t) = fraction of impostor scores < t and FRR(t) = fraction of
    genuine scores >= t, and linearly interpolates between the two ROC
    points where FAR - FRR first changes sign.
    """
    gen = np.sort(np.asarray(genuine, dtype=np.float64))
    imp = np.sort(np.asarray(impostor, dtype=np.float64))
    if gen.size == 0 or imp.size == 0:
        raise ValueError("both score sets must be nonempty")
    thresholds = np.unique(np.concatenate([gen, imp]))
    far = np.searchsorted(imp, thresholds, side="left") / imp.size
    frr = 1.0 - np.searchsorted(gen, thresholds, side="left") / gen.size
    far = np.append(far, 1.0)  # t beyond every score
    frr = np.append(frr, 0.0)
    diff = far - frr
    if diff[0] >= 0.0:
        return float((far[0] + frr[0]) / 2.0)
    i = int(np.argmax(diff >= 0.0))  # first non-negative; diff[-1] = 1 > 0
    d1, d2 = diff[i - 1], diff[i]
    alpha = d1 / (d1 - d2)
    return float(far[i - 1] + alpha * (far[i] - far[i - 1]))


def impostor_fraction(gallery: Gallery) -> tuple[float, dict[int, float]]:
    """Share of gallery templates whose true identity differs from the owner.

    Ground truth is read here and nowhere else in the update path.
    """
    per_user: dict[int, float] = {}
    wrong_total = 0
    n_total = 0
    for u in gallery.user_ids:
        ts = gallery.users[u].templates
        wrong = sum(1 for t in ts if t.sample.true_user != u)
        per_user[u] = wrong / len(ts)
        wrong_total += wrong
        n_total += len(ts)
    return wrong_total / n_total, per_user


def storage_capped(p: int, k: int, s: int) -> int:
    """Hard storage bound of a capped gallery: p * k * S bytes."""
    if p < 1 or k < 1 or s < 1:
        raise ValueError("p, k and S must be positive")
    return p * k * s


def storage_uncapped(beta: float, i: int, m_bar: float, k: int, s: int) -> float:
    """Storage of an uncapped classification-selection system after i
    iterations: beta * i * m_bar * k * S bytes (beta = 1 is the
    traditional self-update)."""
    if not (0.0 < beta <= 1.0):
        raise ValueError("beta must be in (0, 1]")
    if i < 0:
        raise ValueError("iteration count must be non-negative")
    if m_bar <= 0 or k < 1 or s < 1:
        raise ValueError("m_bar, k and S must be positive")
    return beta * i * m_bar * k * s


def gallery_bytes(gallery: Gallery, bytes_per_template: Optional[int] = None) -> int:
    s = bytes_per_template
    if s is None:
        s = DEFAULT_BYTES_PER_COORD * gallery.dim
    return gallery.n_templates * s


def evaluate_snapshot(
    gallery: Gallery,
    test: Batch,
    metric: str = EUCLIDEAN,
    bytes_per_template: Optional[int] = None,
):
    """EER and storage of one gallery snapshot against the fixed test batch."""
    genuine, impostor, per_subject = score_sets(test, gallery, metric)
    eer = compute_eer(genuine, impostor)
    return {
        "eer": eer,
        "gallery_bytes": gallery_bytes(gallery, bytes_per_template),
        "per_subject": per_subject,
    }


def export_score_scatter(per_subject: dict, out: TextIO) -> int:
    """Write one row per (subject, score, kind) for external plotting.

    Returns the number of data rows written.
    """
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["subject", "score", "kind"])
    n = 0
    for subject in sorted(per_subject):
        for kind in ("genuine", "impostor"):
            for score in per_subject[subject][kind]:
                writer.writerow([subject, fmt9(score), kind])
                n += 1
    return n
