"""Locating and classifying bifurcations along families of critical orbits.

Along a family the B-matrix spectrum is sampled on a grid. Wherever the
Morse index of B changes between two nondegenerate samples, the bracket is
refined by bisection and classified:

* parity change: the degree at the two ends differs, so the bifurcation
  index is nonzero and the bifurcation is global;
* same parity, different index: local bifurcation only;
* a degenerate sample with no index change around it: candidate (the
  kernel condition is necessary, not sufficient).

At a free orbit the degree lives on a single Euler-ring coordinate, which is
all the bookkeeping here needs.
"""
from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import families, spectral
from .errors import (CCBifError, DegenerateOrbit, EvaluationError,
                     GridTooCoarse, InvalidMasses)

FREE_ORBIT = "SO(2)/Id"
REFINE_LEVELS = 20


class EulerRingElement:
    """Integer combination of orbit-type labels (additive structure only)."""

    __slots__ = ("_coeffs",)

    def __init__(self, coefficients=None):
        items = dict(coefficients or {}).items()
        self._coeffs = {str(k): int(v) for k, v in items if int(v) != 0}

    @classmethod
    def basis(cls, label=FREE_ORBIT):
        return cls({label: 1})

    @property
    def coefficients(self):
        return dict(self._coeffs)

    def __getitem__(self, label):
        return self._coeffs.get(label, 0)

    def __add__(self, other):
        out = dict(self._coeffs)
        for k, v in other._coeffs.items():
            out[k] = out.get(k, 0) + v
        return EulerRingElement(out)

    def __neg__(self):
        return EulerRingElement({k: -v for k, v in self._coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, n):
        if not isinstance(n, (int, np.integer)):
            return NotImplemented
        return EulerRingElement({k: n * v for k, v in self._coeffs.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, int) and other == 0:
            return not self._coeffs
        if not isinstance(other, EulerRingElement):
            return NotImplemented
        return self._coeffs == other._coeffs

    def __hash__(self):
        return hash(frozenset(self._coeffs.items()))

    def __bool__(self):
        return bool(self._coeffs)

    def __repr__(self):
        if not self._coeffs:
            return "0"
        return " + ".join(f"{v}*[{k}]" for k, v in sorted(self._coeffs.items()))

    def to_json(self):
        return dict(sorted(self._coeffs.items()))

    @classmethod
    def from_json(cls, doc):
        return cls(doc)


ZERO = EulerRingElement()


def degree_from_morse(morse_index):
    return (-1) ** int(morse_index) * EulerRingElement.basis(FREE_ORBIT)


def degree_at(point, tau_zero=spectral.TAU_ZERO):
    """Gradient degree at a nondegenerate free critical orbit.

    Equal to ``(-1)^{m^-(B)}`` times the free orbit type. ``point`` is a
    FamilyPoint or an already computed ``spectral.PointAnalysis``.
    """
    if isinstance(point, families.FamilyPoint):
        if not families.has_trivial_isotropy(point.positions):
            raise DegenerateOrbit("orbit has nontrivial isotropy")
        point = point.analyze(tau_zero)
    if point.kernel_dim != 1:
        raise DegenerateOrbit(f"kernel dimension {point.kernel_dim} > 1")
    return degree_from_morse(point.morse_index)


def bifurcation_index(left, right, tau_zero=spectral.TAU_ZERO):
    """``degree(right) - degree(left)``; nonzero forces a global bifurcation."""
    return degree_at(right, tau_zero) - degree_at(left, tau_zero)


def classify(left_morse, right_morse):
    if (left_morse - right_morse) % 2:
        return "global"
    if left_morse != right_morse:
        return "local"
    return "candidate"


@dataclass(frozen=True)
class BifurcationEvent:
    bracket: tuple
    left_morse: int
    right_morse: int
    kernel_jump: int
    classification: str
    bif_index: EulerRingElement
    merged: bool = False

    @classmethod
    def build(cls, lo, hi, left_morse, right_morse, kernel_jump, merged=False):
        return cls((float(lo), float(hi)), int(left_morse), int(right_morse),
                   int(kernel_jump), classify(left_morse, right_morse),
                   degree_from_morse(right_morse) - degree_from_morse(left_morse),
                   merged)

    @property
    def width(self):
        return self.bracket[1] - self.bracket[0]

    def to_json(self):
        doc = {
            "bracket": list(self.bracket),
            "left_morse": self.left_morse,
            "right_morse": self.right_morse,
            "kernel_jump": self.kernel_jump,
            "classification": self.classification,
            "bif_index": self.bif_index.to_json(),
        }
        if self.merged:
            doc["merged"] = True
        return doc

    @classmethod
    def from_json(cls, doc):
        return cls(tuple(doc["bracket"]), doc["left_morse"], doc["right_morse"],
                   doc.get("kernel_jump", 1), doc["classification"],
                   EulerRingElement.from_json(doc["bif_index"]),
                   doc.get("merged", False))


def index_sum_check(events):
    """Total of the bifurcation indices of ``events`` (reported, not asserted)."""
    total = EulerRingElement()
    for ev in events:
        total = total + ev.bif_index
    return total


# -- evaluation helpers ---------------------------------------------------------------

def worker_count(workers=None):
    if workers is not None:
        return max(1, int(workers))
    try:
        return max(1, int(os.environ.get("CC_BIF_THREADS", "1")))
    except ValueError:
        return 1


def parallel_map(fn, items, workers=None):
    """``list(map(fn, items))`` on a thread pool; result order follows ``items``."""
    items = list(items)
    n = worker_count(workers)
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class Sample:
    parameter: float
    point: families.FamilyPoint
    analysis: spectral.PointAnalysis

    @property
    def morse(self):
        return self.analysis.morse_index

    @property
    def kernel_dim(self):
        return self.analysis.kernel_dim

    @property
    def nondegenerate(self):
        return self.analysis.kernel_dim == 1


def evaluate(family, rho, tau_zero=spectral.TAU_ZERO):
    try:
        point = family(rho)
        return Sample(float(rho), point, point.analyze(tau_zero))
    except CCBifError as exc:
        raise EvaluationError(rho, exc) from exc


# -- 1D scans ----------------------------------------------------------------------------

@dataclass
class ScanResult:
    events: list
    samples: list
    resolution: float
    warnings: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.events)

    def __len__(self):
        return len(self.events)

    def __getitem__(self, i):
        return self.events[i]

    def by_class(self, classification):
        return [e for e in self.events if e.classification == classification]


def _refine(family, left, right, resolution, tau_zero, max_kernel):
    """Bisect ``[left, right]`` down to ``resolution``, splitting whenever the
    midpoint's Morse index matches neither end."""
    out = []
    stack = [(left, right, max_kernel)]
    while stack:
        a, b, kmax = stack.pop()
        while b.parameter - a.parameter > resolution:
            width = b.parameter - a.parameter
            mid = None
            for frac in (0.5, 0.5 - 1 / 16, 0.5 + 1 / 16, 0.25, 0.75):
                s = evaluate(family, a.parameter + frac * width, tau_zero)
                kmax = max(kmax, s.kernel_dim)
                if s.nondegenerate:
                    mid = s
                    break
            if mid is None:
                break
            if mid.morse == a.morse:
                a = mid
            elif mid.morse == b.morse:
                b = mid
            else:
                stack.append((mid, b, kmax))
                b = mid
        out.append(BifurcationEvent.build(a.parameter, b.parameter,
                                          a.morse, b.morse, kmax))
    return sorted(out, key=lambda e: e.bracket)


def _merge_close(events, resolution):
    merged = []
    for ev in events:
        if merged and ev.bracket[0] - merged[-1].bracket[1] < resolution:
            prev = merged.pop()
            ev = BifurcationEvent.build(prev.bracket[0], ev.bracket[1],
                                        prev.left_morse, ev.right_morse,
                                        max(prev.kernel_jump, ev.kernel_jump),
                                        merged=True)
        merged.append(ev)
    return merged


def scan_1d(family, lo, hi, n_steps, tau_zero=spectral.TAU_ZERO, workers=None,
            refine_levels=REFINE_LEVELS):
    """Scan a one-parameter family on ``n_steps`` equally spaced points.

    ``family`` maps a parameter to a FamilyPoint. Every Morse-index change of
    B between neighbouring nondegenerate samples is refined to a bracket of
    width at most ``(hi - lo) / 2**refine_levels``. Degenerate samples with
    equal indices on both sides become ``candidate`` events.
    """
    lo, hi = float(lo), float(hi)
    if not hi > lo:
        raise ValueError(f"empty scan range [{lo}, {hi}]")
    if n_steps < 2:
        raise ValueError("n_steps must be at least 2")
    resolution = (hi - lo) / 2 ** refine_levels
    grid = np.linspace(lo, hi, int(n_steps))
    samples = parallel_map(lambda rho: evaluate(family, rho, tau_zero), grid, workers)

    result = ScanResult([], samples, resolution)
    good = [i for i, s in enumerate(samples) if s.nondegenerate]
    if len(good) < len(samples):
        edge = [samples[i].parameter for i in range(len(samples))
                if not samples[i].nondegenerate and (not good or i < good[0] or i > good[-1])]
        if edge:
            result.warnings.append(f"degenerate samples at the range ends ignored: {edge}")

    brackets = []
    for i, j in zip(good, good[1:]):
        a, b = samples[i], samples[j]
        kmax = max([1] + [samples[k].kernel_dim for k in range(i + 1, j)])
        jump = abs(a.morse - b.morse)
        if jump >= 3 and jump % 2:
            msg = (f"Morse index jumps {a.morse} -> {b.morse} between "
                   f"{a.parameter!r} and {b.parameter!r}; refine the grid")
            result.warnings.append(msg)
            warnings.warn(msg, GridTooCoarse, stacklevel=2)
        if a.morse != b.morse or kmax > 1:
            brackets.append((a, b, kmax))

    def work(br):
        a, b, kmax = br
        if a.morse == b.morse:
            return [BifurcationEvent.build(a.parameter, b.parameter, a.morse, b.morse, kmax)]
        return _refine(family, a, b, resolution, tau_zero, kmax)

    found = [ev for evs in parallel_map(work, brackets, workers) for ev in evs]
    result.events = _merge_close(found, resolution)
    return result


def scan_points(samples_or_points, tau_zero=spectral.TAU_ZERO):
    """Events between consecutive points of a discrete family (no refinement)."""
    samples = []
    for p in samples_or_points:
        if isinstance(p, Sample):
            samples.append(p)
        else:
            par = p.parameter[-1] if isinstance(p.parameter, tuple) else p.parameter
            samples.append(Sample(float(par), p, p.analyze(tau_zero)))
    samples.sort(key=lambda s: s.parameter)
    good = [i for i, s in enumerate(samples) if s.nondegenerate]
    events = []
    for i, j in zip(good, good[1:]):
        a, b = samples[i], samples[j]
        kmax = max([1] + [samples[k].kernel_dim for k in range(i + 1, j)])
        if a.morse != b.morse or kmax > 1:
            events.append(BifurcationEvent.build(a.parameter, b.parameter,
                                                 a.morse, b.morse, kmax))
    return ScanResult(events, samples, 0.0)


# -- 2D maps --------------------------------------------------------------------------------

EXCLUDED = -1


@dataclass
class RegionMap:
    m0: np.ndarray
    m1: np.ndarray
    morse: np.ndarray        # EXCLUDED where the family point is invalid
    kernel: np.ndarray       # 0 where excluded
    det_b: np.ndarray        # nan where excluded
    labels: np.ndarray       # 0 for excluded or degenerate cells
    regions: list
    boundaries: list

    @property
    def excluded(self):
        return self.morse == EXCLUDED

    @property
    def nondegenerate(self):
        return (self.kernel == 1) & ~self.excluded

    def index_set(self):
        return sorted({int(v) for v in self.morse[self.nondegenerate]})

    def global_boundaries(self):
        return [b for b in self.boundaries if b["global"]]

    def cell_rows(self):
        for i, a in enumerate(self.m0):
            for j, b in enumerate(self.m1):
                yield (float(a), float(b), int(self.morse[i, j]),
                       int(self.kernel[i, j] > 1), float(self.det_b[i, j]))

    def summary(self):
        return {
            "shape": list(self.morse.shape),
            "m0_range": [float(self.m0[0]), float(self.m0[-1])],
            "m1_range": [float(self.m1[0]), float(self.m1[-1])],
            "index_set": self.index_set(),
            "excluded_cells": int(self.excluded.sum()),
            "degenerate_cells": int(((self.kernel > 1) & ~self.excluded).sum()),
            "regions": self.regions,
            "boundaries": [{k: v for k, v in b.items() if k != "edges"}
                           for b in self.boundaries],
        }


def _cell(fam, m0, m1, tau_zero):
    try:
        a = fam(m0, m1).analyze(tau_zero)
    except InvalidMasses:
        return EXCLUDED, 0, np.nan
    return a.morse_index, a.kernel_dim, a.det_b


def map_2d(m0_values, m1_values, tau_zero=spectral.TAU_ZERO, workers=None,
           family=families.rosette_point):
    """Morse-index map of a two-parameter family over a rectangular grid.

    Constant-index regions are labeled as 4-connected components of
    nondegenerate cells. Each pair of adjacent regions with different indices
    shares a boundary (a set of cell edges); boundaries across which the
    index changes parity are flagged global.
    """
    m0 = np.asarray(m0_values, dtype=float)
    m1 = np.asarray(m1_values, dtype=float)
    if m0.size < 2 or m1.size < 2:
        raise ValueError("grid needs at least 2 values per axis")
    cells = [(a, b) for a in m0 for b in m1]
    out = parallel_map(lambda c: _cell(family, c[0], c[1], tau_zero), cells, workers)
    shape = (m0.size, m1.size)
    morse = np.array([o[0] for o in out], dtype=int).reshape(shape)
    kernel = np.array([o[1] for o in out], dtype=int).reshape(shape)
    det_b = np.array([o[2] for o in out], dtype=float).reshape(shape)

    good = (kernel == 1) & (morse != EXCLUDED)
    labels = np.zeros(shape, dtype=int)
    regions = []
    for value in sorted(set(morse[good].tolist())):
        lab, n = ndimage.label(good & (morse == value))
        for k in range(1, n + 1):
            mask = lab == k
            rid = len(regions) + 1
            labels[mask] = rid
            depth = ndimage.distance_transform_cdt(np.pad(mask, 1), metric="taxicab")[1:-1, 1:-1]
            si, sj = np.unravel_index(int(np.argmax(depth)), shape)
            ii, jj = np.nonzero(mask)
            regions.append({
                "id": rid,
                "morse_index": int(value),
                "cells": int(mask.sum()),
                "m0_bounds": [float(m0[ii.min()]), float(m0[ii.max()])],
                "m1_bounds": [float(m1[jj.min()]), float(m1[jj.max()])],
                "sample": [float(m0[si]), float(m1[sj])],
                "sample_cell": [int(si), int(sj)],
                "resolved": bool(depth.max() >= 2),
            })

    pairs = {}
    for axis in (0, 1):
        la = labels[:-1, :] if axis == 0 else labels[:, :-1]
        lb = labels[1:, :] if axis == 0 else labels[:, 1:]
        ii, jj = np.nonzero((la > 0) & (lb > 0) & (la != lb))
        for i, j in zip(ii.tolist(), jj.tolist()):
            r1, r2 = int(la[i, j]), int(lb[i, j])
            i2, j2 = (i + 1, j) if axis == 0 else (i, j + 1)
            if morse[i, j] == morse[i2, j2]:
                continue
            key = (min(r1, r2), max(r1, r2))
            mid = [0.5 * float(m0[i] + m0[i2]), 0.5 * float(m1[j] + m1[j2])]
            pairs.setdefault(key, []).append(mid)
    boundaries = []
    for (r1, r2), edges in sorted(pairs.items()):
        i1 = regions[r1 - 1]["morse_index"]
        i2 = regions[r2 - 1]["morse_index"]
        edges.sort()
        boundaries.append({
            "regions": [r1, r2],
            "indices": [i1, i2],
            "edge_count": len(edges),
            "global": bool((i1 - i2) % 2),
            "classification": classify(i1, i2),
            "bif_index": (degree_from_morse(i2) - degree_from_morse(i1)).to_json(),
            "edges": edges,
        })
    return RegionMap(m0, m1, morse, kernel, det_b, labels, regions, boundaries)


def select_slice(region_map):
    """Row ``m0`` of the map crossing the most index changes along ``m1``.

    Only nondegenerate cells count; ties go to the smallest ``m0``.
    """
    best, best_count = None, -1
    for i, a in enumerate(region_map.m0):
        row = region_map.morse[i][region_map.nondegenerate[i]]
        count = int(np.count_nonzero(np.diff(row)))
        if count > best_count:
            best, best_count = float(a), count
    return best, best_count


def refine_region_sample(region, region_map, factor=10, family=families.rosette_point,
                         tau_zero=spectral.TAU_ZERO):
    """Morse indices on a ``factor``-times finer grid spanning the sample cell.

    The local grid covers half a coarse spacing on each side of the sample.
    Returns the set of indices seen on nondegenerate fine nodes.
    """
    si, sj = region["sample_cell"]
    d0 = (region_map.m0[-1] - region_map.m0[0]) / (len(region_map.m0) - 1)
    d1 = (region_map.m1[-1] - region_map.m1[0]) / (len(region_map.m1) - 1)
    a0, a1 = region_map.m0[si], region_map.m1[sj]
    offsets = np.linspace(-0.5, 0.5, factor + 1)
    seen = set()
    for u in offsets:
        for v in offsets:
            m0, m1 = a0 + u * d0, a1 + v * d1
            if m0 <= 0 or m1 <= 0:
                continue
            a = family(m0, m1).analyze(tau_zero)
            if a.kernel_dim == 1:
                seen.add(a.morse_index)
    return seen
