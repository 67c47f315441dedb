"""Labelling models, the sign function, and the fidelity weight.

Labelling model 1 labels every sampled point falling in one of two separated
regions (fidelity weight r_n = 1/n); labelling model 2 prepends a fixed set
of labeled points to the cloud (r_n = 1).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from graphssl.density import PointCloud


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def contains(self, pts: np.ndarray) -> np.ndarray:
        c = np.asarray(self.center, dtype=float)
        return np.linalg.norm(pts - c, axis=1) <= self.radius

    def distance(self, other: "Region") -> float:
        if isinstance(other, Ball):
            gap = np.linalg.norm(np.asarray(self.center) - np.asarray(other.center))
            return gap - self.radius - other.radius
        return other.distance(self)


@dataclass(frozen=True)
class Box:
    lower: tuple
    upper: tuple

    def contains(self, pts: np.ndarray) -> np.ndarray:
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        return np.all((pts >= lo) & (pts <= hi), axis=1)

    def distance(self, other) -> float:
        # conservative gap between bounding descriptions
        if isinstance(other, Box):
            lo1, hi1 = np.asarray(self.lower), np.asarray(self.upper)
            lo2, hi2 = np.asarray(other.lower), np.asarray(other.upper)
            gaps = np.maximum(lo2 - hi1, lo1 - hi2)
            return float(np.max(gaps))
        c = np.asarray(other.center, dtype=float)
        lo, hi = np.asarray(self.lower), np.asarray(self.upper)
        nearest = np.clip(c, lo, hi)
        return float(np.linalg.norm(c - nearest) - other.radius)


Region = Ball | Box


@dataclass(frozen=True)
class Model1Spec:
    """Region-based labelling: positive region, negative region."""
    omega_plus: tuple
    omega_minus: tuple


@dataclass(frozen=True)
class Model2Spec:
    """Fixed labeled points with signs, prepended to the cloud."""
    points: np.ndarray
    signs: np.ndarray


@dataclass(frozen=True)
class LabelSet:
    """Labeled index set Z', labels y in {-1,+1}, and fidelity weight r_n."""

    model: int
    indices: np.ndarray
    y: np.ndarray
    r_n: float

    @property
    def size(self) -> int:
        return len(self.indices)

    def column(self, n: int) -> np.ndarray:
        """Dense label column over all n nodes, 0 at unlabeled nodes."""
        out = np.zeros(n)
        out[self.indices] = self.y
        return out


class LabelValidationError(ValueError):
    pass


def _as_regions(spec) -> tuple:
    return spec if isinstance(spec, (tuple, list)) else (spec,)


def assign_labels(cloud: PointCloud, spec) -> tuple[PointCloud, LabelSet]:
    """Apply a labelling model; returns the (possibly augmented) cloud and labels.

    Model 1 leaves the cloud unchanged and labels points falling in the
    regions; model 2 prepends the fixed labeled points, which then take part
    in graph construction identically to sampled points.
    """
    if isinstance(spec, Model1Spec):
        plus = _as_regions(spec.omega_plus)
        minus = _as_regions(spec.omega_minus)
        gap = min(p.distance(m) for p in plus for m in minus)
        if gap <= 0:
            raise LabelValidationError("labelled regions must have positive separation")
        pts = cloud.points
        in_plus = np.any([r.contains(pts) for r in plus], axis=0)
        in_minus = np.any([r.contains(pts) for r in minus], axis=0)
        idx = np.flatnonzero(in_plus | in_minus)
        if len(idx) == 0:
            warnings.warn("no samples fell in the labelled regions", stacklevel=2)
        y = np.where(in_plus[idx], 1.0, -1.0)
        return cloud, LabelSet(model=1, indices=idx, y=y, r_n=1.0 / cloud.n)

    if isinstance(spec, Model2Spec):
        fixed = np.atleast_2d(np.asarray(spec.points, dtype=float))
        signs = np.asarray(spec.signs, dtype=float)
        if len(fixed) != len(signs) or not np.all(np.abs(signs) == 1):
            raise LabelValidationError("model 2 needs one sign in {-1,+1} per fixed point")
        pts = np.vstack([fixed, cloud.points])
        new_cloud = PointCloud(points=pts, seed=cloud.seed)
        idx = np.arange(len(fixed))
        return new_cloud, LabelSet(model=2, indices=idx, y=signs, r_n=1.0)

    raise TypeError(f"unknown labelling spec {type(spec)!r}")


def sign(u: np.ndarray) -> np.ndarray:
    """Elementwise sign with S(0) = 0."""
    return np.sign(np.asarray(u, dtype=float))
