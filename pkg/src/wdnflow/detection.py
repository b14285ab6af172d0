"""Leak/event detection by per-sensor linear interpolation from the others.

For every sensor i a least-squares model predicts column i from all other
columns plus an intercept. Thresholds come from the training residuals with a
safety margin; a time step is suspicious as soon as one sensor deviates more
than its threshold. Per-sensor thresholds make alarm decisions invariant
under an affine rescaling of any single sensor applied to both splits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ColumnMismatchError, InsufficientDataError
from .scada import GroundTruthRecord

__all__ = [
    "SensorInterpolationDetector", "DetectionResult", "EventOutcome",
    "Metrics", "evaluate",
]


def _impute(values: np.ndarray, lead_fill: np.ndarray) -> np.ndarray:
    """Forward-fill NaNs per column; leading NaNs take lead_fill."""
    out = np.array(values, dtype=float)
    for c in range(out.shape[1]):
        col = out[:, c]
        missing = np.isnan(col)
        if not missing.any():
            continue
        last = lead_fill[c]
        for r in range(col.size):
            if missing[r]:
                col[r] = last
            else:
                last = col[r]
    return out


@dataclass(frozen=True, eq=False)
class DetectionResult:
    times: tuple[float, ...]
    suspicious: tuple[int, ...]        # indices into times
    residuals: np.ndarray              # (n_rows, n_sensors)
    thresholds: np.ndarray

    @property
    def suspicious_times(self) -> tuple[float, ...]:
        return tuple(self.times[i] for i in self.suspicious)


class SensorInterpolationDetector:
    """Alarm when any sensor strays from its interpolation by the others."""

    def __init__(self, margin: float = 0.1, min_threshold: float = 1e-9):
        if margin < 0:
            raise ValueError("margin must be >= 0")
        self.margin = margin
        self.min_threshold = min_threshold
        self.n_sensors: int | None = None
        self.weights: np.ndarray | None = None      # (p, p-1)
        self.intercepts: np.ndarray | None = None
        self.thresholds: np.ndarray | None = None
        self.train_means: np.ndarray | None = None

    def fit(self, values: np.ndarray) -> "SensorInterpolationDetector":
        X = np.asarray(values, dtype=float)
        if X.ndim != 2:
            raise ValueError("training data must be a 2-D matrix")
        n, p = X.shape
        if p < 1:
            raise InsufficientDataError("no sensor columns to fit")
        if n < p + 1:
            raise InsufficientDataError(
                f"need at least {p + 1} training rows for {p} sensors, got {n}")
        means = np.zeros(p)
        for c in range(p):
            col = X[:, c]
            good = col[~np.isnan(col)]
            means[c] = good.mean() if good.size else 0.0
        X = _impute(X, means)

        self.n_sensors = p
        self.train_means = means
        self.weights = np.zeros((p, p - 1))
        self.intercepts = np.zeros(p)
        self.thresholds = np.zeros(p)
        for i in range(p):
            y = X[:, i]
            others = np.delete(X, i, axis=1)
            if np.ptp(y) == 0.0:
                # constant column: the mean is already a perfect predictor
                self.intercepts[i] = y[0]
                res = np.zeros(n)
            else:
                A = np.hstack([others, np.ones((n, 1))])
                coef, *_ = np.linalg.lstsq(A, y, rcond=None)
                self.weights[i] = coef[:-1]
                self.intercepts[i] = coef[-1]
                res = y - A @ coef
            self.thresholds[i] = max((1.0 + self.margin) * np.abs(res).max(),
                                     self.min_threshold)
        return self

    def _predict(self, X: np.ndarray) -> np.ndarray:
        p = self.n_sensors
        pred = np.empty_like(X)
        for i in range(p):
            others = np.delete(X, i, axis=1)
            pred[:, i] = others @ self.weights[i] + self.intercepts[i]
        return pred

    def apply(self, values: np.ndarray,
              times: tuple[float, ...] | None = None) -> DetectionResult:
        if self.n_sensors is None:
            raise InsufficientDataError("detector has not been fitted")
        X = np.asarray(values, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_sensors:
            got = X.shape[1] if X.ndim == 2 else "?"
            raise ColumnMismatchError(
                f"detector fitted on {self.n_sensors} sensors, got {got}")
        X = _impute(X, self.train_means)
        residuals = X - self._predict(X)
        flagged = np.abs(residuals) > self.thresholds
        suspicious = tuple(int(i) for i in np.where(flagged.any(axis=1))[0])
        if times is None:
            times = tuple(float(i) for i in range(X.shape[0]))
        elif len(times) != X.shape[0]:
            raise ColumnMismatchError("times length does not match rows")
        return DetectionResult(times=tuple(times), suspicious=suspicious,
                               residuals=residuals,
                               thresholds=self.thresholds.copy())


@dataclass(frozen=True)
class EventOutcome:
    event_id: str
    kind: str
    detected: bool
    delay_s: float | None


@dataclass(frozen=True)
class Metrics:
    true_positive_rate: float
    false_positive_rate: float
    precision: float
    f1: float
    events: tuple[EventOutcome, ...]

    def as_text(self) -> str:
        lines = [
            f"true_positive_rate: {self.true_positive_rate:.4f}",
            f"false_positive_rate: {self.false_positive_rate:.4f}",
            f"precision: {self.precision:.4f}",
            f"f1: {self.f1:.4f}",
        ]
        for e in self.events:
            delay = "undetected" if e.delay_s is None else f"{e.delay_s:.1f} s"
            lines.append(f"event {e.event_id} ({e.kind}): {delay}")
        return "\n".join(lines)


def evaluate(result: DetectionResult,
             truth: tuple[GroundTruthRecord, ...]) -> Metrics:
    """Step-level rates plus per-event detection delay.

    A step is positive when it falls in any event window (start inclusive,
    end exclusive). Empty denominators yield 0.0 rather than NaN.
    """
    times = np.array(result.times)
    flagged = np.zeros(times.size, dtype=bool)
    flagged[list(result.suspicious)] = True
    positive = np.zeros(times.size, dtype=bool)
    for rec in truth:
        positive |= (times >= rec.start_s) & (times < rec.end_s)

    tp = int(np.sum(flagged & positive))
    fp = int(np.sum(flagged & ~positive))
    fn = int(np.sum(~flagged & positive))
    tn = int(np.sum(~flagged & ~positive))
    tpr = tp / (tp + fn) if tp + fn else 0.0
    fpr = fp / (fp + tn) if fp + tn else 0.0
    precision = tp / (tp + fp) if tp + fp else 0.0
    f1 = (2 * precision * tpr / (precision + tpr)) if precision + tpr else 0.0

    events = []
    for rec in truth:
        in_window = (times >= rec.start_s) & (times < rec.end_s)
        hits = np.where(in_window & flagged)[0]
        if hits.size:
            events.append(EventOutcome(rec.event_id, rec.kind, True,
                                       float(times[hits[0]] - rec.start_s)))
        else:
            events.append(EventOutcome(rec.event_id, rec.kind, False, None))
    return Metrics(tpr, fpr, precision, f1, tuple(events))
