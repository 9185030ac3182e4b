"""Inverse problem: from an impedance trace back to the pressed cell.

The forward chain (press -> perturbed network -> impedance shift) is inverted
in three steps: find excursions in a drift-corrected series, read their
(deltaR, deltaX) signature to pick a response family, then rank the cells of
that family by how well their simulated press signature matches the event.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .circuit import AdmittanceSystem, MaterialParams, impedance
from .errors import (
    DomainError,
    InsufficientDataError,
    UnclassifiableEventError,
)
from .geometry import CellId, Network
from .stimulus import (
    Family,
    PerturbCoeffs,
    TimeSeries,
    family_map,
    press_signature,
)

#: Smallest excursion magnitude treated as a press (Ohm at the probe frequency).
DETECTION_THRESHOLD_OHM = 0.003
#: Events closer than this in time are merged into one.
MIN_SEPARATION_S = 1.0
#: Below this fraction of the dominant component, the other one is "no feature".
NO_FEATURE_RATIO = 0.15


@dataclass(frozen=True)
class Event:
    """A single detected press excursion."""

    t_peak_s: float
    delta_r_ohm: float
    delta_x_ohm: float
    width_s: float

    def __post_init__(self):
        if not self.width_s > 0:
            raise DomainError(f"event width must be positive, got {self.width_s}")


@dataclass(frozen=True)
class LocalizationResult:
    """Ranked explanation of one event."""

    family: Family
    candidates: tuple[tuple[CellId, float], ...]

    @property
    def best(self) -> CellId | None:
        return self.candidates[0][0] if self.candidates else None

    def top(self, k: int) -> tuple[CellId, ...]:
        return tuple(cell for cell, _ in self.candidates[:k])


def detect_events(
    series: TimeSeries,
    threshold_ohm: float = DETECTION_THRESHOLD_OHM,
    min_separation_s: float = MIN_SEPARATION_S,
) -> list[Event]:
    """Find press excursions in a drift-corrected series.

    The series is expected to hover around zero between presses (see
    :func:`liquidskin.stimulus.subtract_drift`).  Consecutive samples whose
    deviation exceeds ``threshold_ohm`` in either component form one event;
    events separated by less than ``min_separation_s`` are merged.  For each
    event the signed extremum of each component is reported, with the peak
    time taken at the largest combined deviation.
    """
    if threshold_ohm <= 0:
        raise DomainError("detection threshold must be positive")
    if len(series.samples) < 3:
        raise InsufficientDataError(
            f"need at least 3 samples to detect events, got {len(series.samples)}"
        )
    t = series.times()
    r = series.resistances()
    x = series.reactances()
    active = (np.abs(r) > threshold_ohm) | (np.abs(x) > threshold_ohm)
    if not active.any():
        return []

    # Group consecutive active samples, then merge groups across short gaps.
    idx = np.flatnonzero(active)
    breaks = np.flatnonzero(np.diff(idx) > 1)
    groups = np.split(idx, breaks + 1)
    merged: list[np.ndarray] = [groups[0]]
    for g in groups[1:]:
        if t[g[0]] - t[merged[-1][-1]] < min_separation_s:
            merged[-1] = np.arange(merged[-1][0], g[-1] + 1)
        else:
            merged.append(g)

    dt = series.sample_period_s
    events = []
    for g in merged:
        gr, gx = r[g], x[g]
        magnitude = np.maximum(np.abs(gr), np.abs(gx))
        peak = g[int(np.argmax(magnitude))]
        delta_r = gr[int(np.argmax(np.abs(gr)))]
        delta_x = gx[int(np.argmax(np.abs(gx)))]
        width = t[g[-1]] - t[g[0]] + dt
        events.append(Event(float(t[peak]), float(delta_r), float(delta_x), float(width)))
    return events


def classify_signature(event: Event, no_feature_ratio: float = NO_FEATURE_RATIO) -> Family:
    """Map an event's (deltaR, deltaX) signature to a response family.

    A component is "featured" when its magnitude is at least
    ``no_feature_ratio`` times the dominant one; ties between components go
    to the reactance.  Signatures outside the four families (for instance a
    lone resistance rise, or a dominant dip in both) raise
    :class:`UnclassifiableEventError`.
    """
    if not 0 < no_feature_ratio < 1:
        raise DomainError("no_feature_ratio must lie in (0, 1)")
    dr, dx = event.delta_r_ohm, event.delta_x_ohm
    ar, ax = abs(dr), abs(dx)
    if ar == 0 and ax == 0:
        raise UnclassifiableEventError(dr, dx)
    r_featured = ar >= no_feature_ratio * ax
    x_featured = ax >= no_feature_ratio * ar
    if r_featured and x_featured:
        # Both components featured: only the joint rise fits a family.
        if dr > 0 and dx > 0:
            return Family.GRADIENT
        raise UnclassifiableEventError(dr, dx)
    if x_featured:  # resistance shows no feature
        return Family.GREEN if dx < 0 else Family.BLUE
    # reactance shows no feature
    if dr < 0:
        return Family.RED
    raise UnclassifiableEventError(dr, dx)


def signature_table(
    network: Network,
    material: MaterialParams,
    coeffs: PerturbCoeffs,
    pair,
    mass_g: float = 100.0,
    probe_frequency_hz: float = 1000.0,
) -> dict[CellId, tuple[Family, float, float]]:
    """Forward-simulated noiseless signature of a press on every cell."""
    system = AdmittanceSystem.from_network(network, material)
    rest = impedance(system, pair, probe_frequency_hz)
    return {
        cell: press_signature(
            network, material, coeffs, pair, cell, mass_g, probe_frequency_hz,
            system=system, rest=rest,
        )
        for cell in family_map(network, pair)
    }


def localize(
    event: Event,
    network: Network,
    pair,
    coeffs: PerturbCoeffs,
    material: MaterialParams,
    no_feature_ratio: float = NO_FEATURE_RATIO,
    *,
    signatures: dict[CellId, tuple[Family, float, float]] | None = None,
) -> LocalizationResult:
    """Rank the cells of the event's family by signature similarity.

    The score compares the event vector with each candidate's simulated
    (deltaR, deltaX), both scaled by the candidate's magnitude, and maps the
    remaining distance into (0, 1] — identical vectors score 1.  Ranking is
    deterministic: equal scores fall back to cell order.
    """
    family = classify_signature(event, no_feature_ratio)
    if signatures is None:
        signatures = signature_table(network, material, coeffs, pair)
    e = np.array([event.delta_r_ohm, event.delta_x_ohm])
    scored = []
    for cell, (fam, dr, dx) in signatures.items():
        if fam is not family:
            continue
        s = np.array([dr, dx])
        norm = float(np.hypot(dr, dx))
        score = 1.0 / (1.0 + float(np.linalg.norm(e - s)) / norm)
        scored.append((cell, score))
    scored.sort(key=lambda item: (-item[1], item[0]))
    return LocalizationResult(family, tuple(scored))


class TouchLocalizer(BaseEstimator):
    """Estimator-style wrapper around the detect/classify/localize chain.

    ``fit`` precomputes the per-cell signature table for the configured
    network and electrode pair; ``predict`` maps rows of (deltaR, deltaX)
    to cell labels.  Events whose signature fits no family predict ``None``.
    """

    def __init__(
        self,
        network: Network | None = None,
        material: MaterialParams | None = None,
        coeffs: PerturbCoeffs | None = None,
        pair=("BL", "C"),
        no_feature_ratio: float = NO_FEATURE_RATIO,
    ):
        self.network = network
        self.material = material
        self.coeffs = coeffs
        self.pair = pair
        self.no_feature_ratio = no_feature_ratio

    def fit(self, X=None, y=None):
        from .files import default_network

        self.network_ = self.network if self.network is not None else default_network()
        self.material_ = self.material if self.material is not None else MaterialParams()
        self.coeffs_ = self.coeffs if self.coeffs is not None else PerturbCoeffs()
        self.signatures_ = signature_table(
            self.network_, self.material_, self.coeffs_, self.pair
        )
        return self

    def localize_event(self, event: Event) -> LocalizationResult:
        self._check_fitted()
        return localize(
            event, self.network_, self.pair, self.coeffs_, self.material_,
            self.no_feature_ratio, signatures=self.signatures_,
        )

    def predict(self, X):
        self._check_fitted()
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != 2:
            raise DomainError(f"expected an (n, 2) array of deltas, got shape {X.shape}")
        labels = []
        for dr, dx in X:
            event = Event(0.0, float(dr), float(dx), 1.0)
            try:
                result = self.localize_event(event)
            except UnclassifiableEventError:
                labels.append(None)
                continue
            labels.append(result.best.label if result.best is not None else None)
        return np.array(labels, dtype=object)

    def _check_fitted(self):
        if not hasattr(self, "signatures_"):
            raise DomainError("TouchLocalizer is not fitted; call fit() first")
