"""Equilibria, nullclines, linear stability and outcome classification
for the reduced planar system."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .dynamics import State2
from .params import FullParams, ParameterError, ReducedParams, Thresholds, compute_thresholds, quadratic_coefficients, reduce

TANGENCY_ATOL = 1e-10
BOUNDARY_RTOL = 1e-12
HYPERBOLIC_RTOL = 1e-9


class PoleError(ParameterError):
    """Evaluation at the vertical asymptote S = B-bar of the S-nullcline."""


class Kind(str, Enum):
    ORIGIN = "origin"
    DISEASE_FREE = "disease_free"
    INTERIOR = "interior"


class Stability(str, Enum):
    STABLE = "stable"
    SADDLE = "saddle"
    UNSTABLE = "unstable"
    NONHYPERBOLIC = "nonhyperbolic"


class Label(str, Enum):
    EXTINCTION = "Extinction"
    DISEASE_FREE_GLOBAL = "DiseaseFreeGlobal"
    ENDEMIC_GLOBAL = "EndemicGlobal"
    ENDEMIC_LOCAL = "EndemicLocal"
    BISTABLE = "Bistable"
    DEGENERATE_TANGENT = "DegenerateTangent"
    BOUNDARY = "Boundary"


@dataclass(frozen=True)
class Equilibrium:
    location: State2
    kind: Kind
    stability: Stability
    eigenvalues: tuple[complex, complex]


@dataclass(frozen=True)
class Scenario:
    label: Label
    coinfection_active: bool
    equilibria: tuple[Equilibrium, ...]
    thresholds: Thresholds
    reduced: Optional[ReducedParams] = field(default=None, compare=False)

    @property
    def interior(self) -> tuple[Equilibrium, ...]:
        return tuple(e for e in self.equilibria if e.kind is Kind.INTERIOR)

    def stable_equilibria(self) -> tuple[Equilibrium, ...]:
        return tuple(e for e in self.equilibria if e.stability is Stability.STABLE)


# ---------------------------------------------------------------------------
# nullclines
# ---------------------------------------------------------------------------

def s_nullcline_is_vertical(th: Thresholds) -> bool:
    """True when S1* == B-bar: the S-nullcline in the open quadrant is the line S = B-bar."""
    return th.s1_star is not None and math.isclose(th.s1_star, th.b_bar_thr, rel_tol=BOUNDARY_RTOL)


def nullcline_phi(S: float, th: Thresholds, rp: ReducedParams) -> float:
    """I-value of the S-nullcline at S."""
    if th.s1_star is None:
        raise ParameterError("S-nullcline needs r > m")
    if S == th.b_bar_thr:
        raise PoleError(f"S-nullcline has a pole at S = B-bar = {th.b_bar_thr}")
    return rp.c_SS / (rp.c_bar_SI + rp.beta_bar) * S * (th.s1_star - S) / (S - th.b_bar_thr)


def nullcline_psi(S: float, th: Thresholds, rp: ReducedParams) -> float:
    """I-value of the (non-trivial) I-nullcline at S."""
    if th.a_bar_thr is None:
        raise ParameterError("I-nullcline threshold undefined: beta_bar <= c_bar_IS")
    return (rp.beta_bar - rp.c_bar_IS) / rp.c_bar_II * (S - th.a_bar_thr)


# ---------------------------------------------------------------------------
# linearisation
# ---------------------------------------------------------------------------

def jacobian(at, rp: ReducedParams) -> np.ndarray:
    S, I = at  # noqa: E741
    k = rp.c_bar_SI + rp.beta_bar
    return np.array([
        [rp.r - rp.m - 2 * rp.c_SS * S - k * I,
         rp.a_bar * rp.r + rp.gamma_bar - k * S],
        [(rp.beta_bar - rp.c_bar_IS) * I,
         -rp.m - rp.c_bar_IS * S - 2 * rp.c_bar_II * I + rp.beta_bar * S - rp.gamma_bar - rp.mu_bar],
    ])


def eigenvalues(J: np.ndarray) -> tuple[complex, complex]:
    """Roots of x**2 - tr*x + det, ordered by real part then imaginary part."""
    tr = J[0, 0] + J[1, 1]
    det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
    disc = tr * tr - 4 * det
    if disc >= 0:
        root = math.sqrt(disc)
        # avoid cancellation in the smaller-magnitude root
        big = 0.5 * (tr + math.copysign(root, tr)) if tr != 0 else 0.5 * root
        small = det / big if big != 0 else 0.5 * (tr - root)
        pair = sorted((complex(big), complex(small)), key=lambda z: z.real)
        return pair[0], pair[1]
    root = cmath.sqrt(disc)
    return (0.5 * (tr - root), 0.5 * (tr + root))


def stability_of(J: np.ndarray) -> Stability:
    tr = J[0, 0] + J[1, 1]
    det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
    scale = float(np.sum(J * J))
    if abs(det) <= HYPERBOLIC_RTOL * scale:
        return Stability.NONHYPERBOLIC
    if det < 0:
        return Stability.SADDLE
    if abs(tr) <= HYPERBOLIC_RTOL * math.sqrt(scale):
        return Stability.NONHYPERBOLIC
    return Stability.STABLE if tr < 0 else Stability.UNSTABLE


def make_equilibrium(location, kind: Kind, rp: ReducedParams, force_nonhyperbolic: bool = False) -> Equilibrium:
    J = jacobian(location, rp)
    stab = Stability.NONHYPERBOLIC if force_nonhyperbolic else stability_of(J)
    return Equilibrium(State2(*map(float, location)), kind, stab, eigenvalues(J))


# ---------------------------------------------------------------------------
# equilibria
# ---------------------------------------------------------------------------

def interior_equilibria(th: Thresholds, rp: ReducedParams) -> list[Equilibrium]:
    """Positive intersections of the two nullclines, sorted by S."""
    if th.s1_star is None:
        raise ParameterError("interior equilibria need r > m")
    if th.a_bar_thr is None:
        raise ParameterError("interior equilibria need beta_bar > c_bar_IS")
    a, b, c = quadratic_coefficients(rp)
    tangent = th.r_script is not None and abs(th.r_script - 1.0) <= TANGENCY_ATOL
    if tangent:
        roots = [b / (2 * a)]
    else:
        disc = b * b - 4 * a * c
        if disc < 0:
            return []
        sq = math.sqrt(disc)
        q = 0.5 * (b + sq)  # b > 0 always, so no cancellation here
        roots = sorted({q / a, c / q})
    found = []
    for S in roots:
        I = nullcline_psi(S, th, rp)  # noqa: E741
        if S > 0 and I > 0:
            found.append(make_equilibrium((S, I), Kind.INTERIOR, rp, force_nonhyperbolic=tangent))
    return found


def _close(x: float, y: float) -> bool:
    return math.isclose(x, y, rel_tol=BOUNDARY_RTOL)


def classify_reduced(rp: ReducedParams) -> Scenario:
    th = compute_thresholds(rp)
    active = rp.nu_star > 0
    origin = make_equilibrium((0.0, 0.0), Kind.ORIGIN, rp)

    def scenario(label, *interior):
        eqs = [origin]
        if th.s1_star is not None:
            eqs.append(make_equilibrium((th.s1_star, 0.0), Kind.DISEASE_FREE, rp))
        eqs.extend(interior)
        return Scenario(label, active, tuple(eqs), th, rp)

    if th.s1_star is None:
        return scenario(Label.EXTINCTION)
    if th.a_bar_thr is None:
        return scenario(Label.DISEASE_FREE_GLOBAL)

    s1, A, B = th.s1_star, th.a_bar_thr, th.b_bar_thr
    interior = interior_equilibria(th, rp)
    if A >= max(s1, B) or _close(A, max(s1, B)):
        return scenario(Label.DISEASE_FREE_GLOBAL, *interior)
    if s1 > A and not _close(s1, A):
        if _close(s1, B):
            return scenario(Label.BOUNDARY, *interior)
        return scenario(Label.ENDEMIC_GLOBAL if s1 < B else Label.ENDEMIC_LOCAL, *interior)
    if s1 < A < B and not _close(s1, A):
        # R > 1 only says the quadratic has two real roots; they are
        # interior equilibria only when they also exceed A-bar
        if not interior:
            return scenario(Label.DISEASE_FREE_GLOBAL)
        if len(interior) == 1:
            return scenario(Label.DEGENERATE_TANGENT, *interior)
        return scenario(Label.BISTABLE, *interior)
    return scenario(Label.BOUNDARY, *interior)


def classify(p: FullParams) -> Scenario:
    """Long-term outcome of the reduced system built from ``p``."""
    if p.r <= p.m:
        rp = reduce(p)
        th = compute_thresholds(rp)
        origin = make_equilibrium((0.0, 0.0), Kind.ORIGIN, rp)
        return Scenario(Label.EXTINCTION, rp.nu_star > 0, (origin,), th, rp)
    return classify_reduced(reduce(p))


def attractors(sc: Scenario) -> tuple[Equilibrium, ...]:
    """Equilibria a generic positive solution may converge to under the label."""
    by_kind = {e.kind: e for e in sc.equilibria if e.kind is not Kind.INTERIOR}
    if sc.label is Label.EXTINCTION:
        return (by_kind[Kind.ORIGIN],)
    if sc.label in (Label.DISEASE_FREE_GLOBAL, Label.DEGENERATE_TANGENT):
        return (by_kind[Kind.DISEASE_FREE],)
    if sc.label in (Label.ENDEMIC_GLOBAL, Label.ENDEMIC_LOCAL):
        return tuple(e for e in sc.interior if e.stability is Stability.STABLE)
    if sc.label is Label.BISTABLE:
        return (by_kind[Kind.DISEASE_FREE], sc.interior[-1])
    return sc.stable_equilibria()


def nearest_equilibrium(state, sc: Scenario) -> tuple[Equilibrium, float]:
    best = min(sc.equilibria, key=lambda e: math.dist(state, e.location))
    return best, math.dist(state, best.location)


def _fmt(x: Optional[float]) -> str:
    return "" if x is None else f"{x:.17g}"


def scenario_record(sc: Scenario) -> dict[str, str]:
    """Flat string record; absent thresholds become empty strings."""
    th = sc.thresholds
    rec = {
        "label": sc.label.value,
        "coinfection_active": str(sc.coinfection_active).lower(),
        "nu_star": _fmt(th.nu_star),
        "S1": _fmt(th.s1_star),
        "Abar": _fmt(th.a_bar_thr),
        "Bbar": _fmt(th.b_bar_thr),
        "R": _fmt(th.r_script),
        "n_equilibria": str(len(sc.equilibria)),
    }
    for i, e in enumerate(sc.equilibria):
        rec[f"eq{i}_S"] = _fmt(e.location.S)
        rec[f"eq{i}_I"] = _fmt(e.location.I)
        rec[f"eq{i}_kind"] = e.kind.value
        rec[f"eq{i}_stability"] = e.stability.value
        rec[f"eq{i}_re1"] = _fmt(e.eigenvalues[0].real)
        rec[f"eq{i}_re2"] = _fmt(e.eigenvalues[1].real)
    return rec
