"""Adaptive explicit Runge-Kutta integration (Dormand-Prince 5(4)).

Local error is controlled in the usual mixed norm
``|err_i| <= atol + rtol * max(|y_i|, |y_new_i|)``.  Sample times are
served by the pair's fourth-order continuous extension, so step
selection is never constrained by requested output times.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

VectorField = Callable[[float, np.ndarray], np.ndarray]

# Dormand & Prince (1980) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# 5th minus 4th order weights
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# continuous extension: y(t + s*h) = y + h * K.T @ (_P @ [s, s^2, s^3, s^4])
_P = np.array([
    [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0, 0, 0, 0],
    [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
STEADY_RTOL = 1e-9
STEADY_STEPS = 10
NEGATIVE_SLACK = 10.0


class IntegrationError(RuntimeError):
    """Base class for integrator failures; ``t`` is the time reached."""

    def __init__(self, message: str, t: float):
        self.t = t
        super().__init__(message)


class StiffnessError(IntegrationError):
    pass


class NegativeStateError(IntegrationError):
    pass


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    labels: tuple[str, ...] = ()
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times.setflags(write=False)
        self.states.setflags(write=False)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def to_csv(self, path, time_label: str = "t") -> None:
        labels = self.labels or tuple(f"y{i}" for i in range(self.states.shape[1]))
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow((time_label, *labels))
            for t, row in zip(self.times, self.states):
                writer.writerow([f"{t:.17g}", *(f"{v:.17g}" for v in row)])


def _initial_step(f, t0, y0, f0, direction, rtol, atol, order=5):
    # standard starting-step heuristic: compare y and f scales, then probe one Euler step
    scale = atol + np.abs(y0) * rtol
    d0 = np.linalg.norm(y0 / scale) / np.sqrt(y0.size)
    d1 = np.linalg.norm(f0 / scale) / np.sqrt(y0.size)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + direction * h0 * f0
    f1 = f(t0 + direction * h0, y1)
    d2 = np.linalg.norm((f1 - f0) / scale) / np.sqrt(y0.size) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / (order + 1))
    return min(100 * h0, h1)


def integrate(
    rhs: VectorField,
    y0: Sequence[float],
    t_span: tuple[float, float],
    rtol: float = 1e-8,
    atol: float = 1e-10,
    t_eval: Optional[Sequence[float]] = None,
    max_step: float = np.inf,
    nonnegative: bool = True,
    stop_at_steady_state: bool = False,
    labels: Sequence[str] = (),
    max_steps: int = 5_000_000,
) -> Trajectory:
    """Integrate ``dy/dt = rhs(t, y)`` over ``t_span``.

    With ``t_eval`` the trajectory holds exactly those sample times
    (truncated at the stopping time when a steady state ends the run);
    otherwise every accepted step is recorded.

    ``nonnegative`` clamps components that dip below zero by less than
    ten times ``atol + rtol * max|y|`` and raises NegativeStateError for
    anything larger.  ``stop_at_steady_state`` ends the run once
    ``|rhs| < 1e-9 * (1 + |y|)`` has held for 10 consecutive accepted
    steps; ``meta["steady"]`` reports whether that happened.
    """
    if not (rtol > 0 and atol > 0):
        raise ValueError("tolerances must be positive")
    t0, t1 = map(float, t_span)
    if not t1 != t0:
        raise ValueError("t_span must have nonzero length")
    direction = 1.0 if t1 > t0 else -1.0
    y = np.array(y0, dtype=float)
    if nonnegative and np.any(y < 0):
        raise ValueError("initial state has negative components")

    if t_eval is not None:
        t_eval = np.asarray(t_eval, dtype=float)
        if np.any(direction * np.diff(t_eval) <= 0):
            raise ValueError("t_eval must be strictly monotone in the integration direction")
        if np.any(direction * (t_eval - t0) < 0) or np.any(direction * (t_eval - t1) > 0):
            raise ValueError("t_eval must lie inside t_span")

    def f(t, x):
        return np.asarray(rhs(t, x), dtype=float)

    t = t0
    fy = f(t, y)
    nfev = 1
    h = min(_initial_step(f, t, y, fy, direction, rtol, atol), max_step)
    nfev += 1
    K = np.empty((7, y.size))

    out_t: list[float] = []
    out_y: list[np.ndarray] = []
    next_eval = 0
    if t_eval is None:
        out_t.append(t)
        out_y.append(y.copy())
    else:
        while next_eval < len(t_eval) and t_eval[next_eval] == t0:
            out_t.append(t0)
            out_y.append(y.copy())
            next_eval += 1

    steps = rejected = quiet = 0
    steady = False
    while direction * (t1 - t) > 0:
        if steps + rejected >= max_steps:
            raise IntegrationError(f"step budget exhausted at t={t:.17g}", t)
        h = min(h, abs(t1 - t), max_step)
        min_step = 10 * abs(np.nextafter(t, direction * np.inf) - t)
        if h < min_step:
            raise StiffnessError(f"step size underflow at t={t:.17g}; the problem is too stiff", t)
        dt = direction * h
        K[0] = fy
        for i in range(1, 7):
            K[i] = f(t + _C[i] * dt, y + dt * np.dot(_A[i], K[:i]))
        nfev += 6
        y_new = y + dt * (_B @ K)
        err = dt * (_E @ K)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err_norm = np.sqrt(np.mean((err / scale) ** 2))

        if err_norm > 1.0:
            rejected += 1
            h *= max(MIN_FACTOR, SAFETY * err_norm ** -0.2)
            continue

        if nonnegative:
            low = y_new < 0
            if np.any(low):
                # tolerance measured against the whole state: a component decaying
                # to zero next to a large one only has atol + rtol*|y| accuracy
                slack = NEGATIVE_SLACK * (atol + rtol * np.max(np.abs(y)))
                if np.any(y_new[low] < -slack):
                    raise NegativeStateError(
                        f"state went negative beyond tolerance at t={t + dt:.17g}", t + dt
                    )
                y_new[low] = 0.0
                K[6] = f(t + dt, y_new)  # FSAL stage must see the clamped state
                nfev += 1

        t_new = t + dt if h < abs(t1 - t) else t1

        if t_eval is None:
            out_t.append(t_new)
            out_y.append(y_new.copy())
        else:
            while next_eval < len(t_eval) and direction * (t_eval[next_eval] - t_new) <= 0:
                s = (t_eval[next_eval] - t) / dt
                powers = np.array([s, s * s, s ** 3, s ** 4])
                y_s = y + dt * (K.T @ (_P @ powers))
                if nonnegative:
                    y_s = np.maximum(y_s, 0.0)
                out_t.append(float(t_eval[next_eval]))
                out_y.append(y_s)
                next_eval += 1

        steps += 1
        t, y, fy = t_new, y_new, K[6].copy()
        factor = MAX_FACTOR if err_norm == 0 else min(MAX_FACTOR, SAFETY * err_norm ** -0.2)
        h *= factor

        if stop_at_steady_state:
            if np.linalg.norm(fy) < STEADY_RTOL * (1.0 + np.linalg.norm(y)):
                quiet += 1
                if quiet >= STEADY_STEPS:
                    steady = True
                    break
            else:
                quiet = 0

    if t_eval is None and out_t[-1] != t:
        out_t.append(t)
        out_y.append(y.copy())
    meta = {
        "steps": steps, "rejected": rejected, "nfev": nfev,
        "steady": steady, "t_final": t, "y_final": tuple(float(v) for v in y),
    }
    return Trajectory(
        times=np.array(out_t),
        states=np.array(out_y).reshape(len(out_t), y.size),
        labels=tuple(labels),
        meta=meta,
    )
