"""Right-hand sides of the four systems and helpers to integrate them.

Slow time ``t`` and fast time ``tau`` are related by ``t = epsilon * tau``.
The primary submodel and the reduced system share one algebraic form, so
``rhs_primary`` serves both; feed it the reduced coefficients.
"""

from __future__ import annotations

from typing import NamedTuple, Optional, Sequence

import numpy as np

from .integrator import IntegrationError, Trajectory, integrate
from .params import FullParams, ParameterError, ReducedParams, Thresholds


class State3(NamedTuple):
    S: float
    U: float
    V: float


class State2(NamedTuple):
    S: float
    I: float  # noqa: E741


def _frequency_term(u: float, v: float) -> float:
    # U*V/(U+V), continuously extended by 0 at the empty population
    total = u + v
    if total <= 0.0:
        return 0.0
    return u * v / total


def rhs_primary(s: Sequence[float], rp: ReducedParams) -> State2:
    S, I = s  # noqa: E741
    dS = (rp.r * S + rp.a_bar * rp.r * I - rp.m * S
          - (rp.c_SS * S + rp.c_bar_SI * I) * S
          - rp.beta_bar * S * I + rp.gamma_bar * I)
    dI = (-rp.m * I - (rp.c_bar_IS * S + rp.c_bar_II * I) * I
          + rp.beta_bar * S * I - rp.gamma_bar * I - rp.mu_bar * I)
    return State2(dS, dI)


def rhs_rescaled(s: Sequence[float], th: Thresholds, rp: ReducedParams) -> State2:
    """Same vector field written through the thresholds S1*, A-bar and B-bar."""
    if th.s1_star is None or th.a_bar_thr is None:
        raise ParameterError("rescaled form needs r > m and beta_bar > c_bar_IS")
    S, I = s  # noqa: E741
    dS = rp.c_SS * S * (th.s1_star - S) + (rp.c_bar_SI + rp.beta_bar) * (th.b_bar_thr - S) * I
    dI = (rp.beta_bar - rp.c_bar_IS) * (S - th.a_bar_thr) * I - rp.c_bar_II * I * I
    return State2(dS, dI)


def rhs_fast(u: float, v: float, lambda_: float, delta: float) -> tuple[float, float]:
    flow = lambda_ * _frequency_term(u, v) - delta * v
    return -flow, flow


def rhs_complete(s: Sequence[float], p: FullParams) -> State3:
    """Complete three-variable system in fast time ``tau``."""
    S, U, V = s
    eps = p.epsilon
    fast_U, fast_V = rhs_fast(U, V, p.lambda_, p.delta)
    slow_S = (p.r * S + p.a_U * p.r * U + p.a_V * p.r * V - p.m * S
              - (p.c_SS * S + p.c_SU * U + p.c_SV * V) * S
              - p.beta_U * S * U - p.beta_V * S * V + p.gamma * U)
    slow_U = (-p.m * U - (p.c_US * S + p.c_UU * U + p.c_UV * V) * U
              + p.beta_U * S * U + p.beta_V * S * V - p.gamma * U - p.mu_U * U)
    slow_V = -p.m * V - (p.c_VS * S + p.c_VU * U + p.c_VV * V) * V - p.mu_V * V
    return State3(eps * slow_S, fast_U + eps * slow_U, fast_V + eps * slow_V)


def change_of_variables(s: Sequence[float]) -> tuple[State2, float]:
    """(S, U, V) -> ((S, I), V) with I = U + V."""
    S, U, V = s
    return State2(S, U + V), V


def inverse_change_of_variables(s: Sequence[float], v: float) -> State3:
    S, I = s  # noqa: E741
    if v > I:
        raise ParameterError(f"coinfected density V={v} exceeds infected density I={I}")
    return State3(S, I - v, v)


def fast_equilibrium(s: Sequence[float], nu_star: float) -> State3:
    """Lift a planar state to (S, (1 - nu*) I, nu* I)."""
    S, I = s  # noqa: E741
    return State3(S, (1.0 - nu_star) * I, nu_star * I)


# ---------------------------------------------------------------------------
# vector fields for the integrator
# ---------------------------------------------------------------------------

def primary_field(rp: ReducedParams):
    def field(t, y):
        return np.array(rhs_primary(y, rp))
    return field


def complete_field(p: FullParams):
    def field(t, y):
        return np.array(rhs_complete(y, p))
    return field


def fast_field(lambda_: float, delta: float):
    def field(t, y):
        return np.array(rhs_fast(y[0], y[1], lambda_, delta))
    return field


def simulate_reduced(
    rp: ReducedParams,
    y0: Sequence[float],
    horizon: float,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    t_eval: Optional[Sequence[float]] = None,
    stop_at_steady_state: bool = False,
) -> Trajectory:
    return integrate(primary_field(rp), y0, (0.0, horizon), rtol=rtol, atol=atol,
                     t_eval=t_eval, stop_at_steady_state=stop_at_steady_state,
                     labels=("S", "I"))


def simulate_complete(
    p: FullParams,
    y0: Sequence[float],
    horizon: float,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    t_eval: Optional[Sequence[float]] = None,
    stop_at_steady_state: bool = False,
) -> Trajectory:
    """Integrate the complete system up to slow time ``horizon``.

    The run happens in fast time (``tau = t / epsilon``); the returned
    trajectory is reported in slow time.
    """
    eps = p.epsilon
    tau_eval = None if t_eval is None else np.minimum(np.asarray(t_eval, dtype=float) / eps, horizon / eps)
    try:
        tr = integrate(complete_field(p), y0, (0.0, horizon / eps), rtol=rtol, atol=atol,
                       t_eval=tau_eval, stop_at_steady_state=stop_at_steady_state,
                       labels=("S", "U", "V"))
    except IntegrationError as exc:
        raise type(exc)(f"{exc} (fast time; slow time {exc.t * eps:.17g})", exc.t * eps) from exc
    meta = dict(tr.meta, t_final=tr.meta["t_final"] * eps, time_scale="slow")
    return Trajectory(times=tr.times * eps, states=np.array(tr.states), labels=tr.labels, meta=meta)
