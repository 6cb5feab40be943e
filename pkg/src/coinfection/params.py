"""Model parameters, validation and fast-equilibrium aggregation.

The complete model carries twenty rates plus the time-scale ratio
``epsilon``.  Collapsing the fast opportunistic process onto its
equilibrium fraction ``nu_star`` yields the coefficients of a planar
SIS system with the same algebraic form as the primary submodel.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional, Union

DEFAULT_EPSILON = 1e-3

COMPETITION = ("c_SS", "c_SU", "c_SV", "c_US", "c_UU", "c_UV", "c_VS", "c_VU", "c_VV")


class ParameterError(ValueError):
    """Raised when a parameter value lies outside the model's domain.

    ``field`` names the offending parameter when a single one is to blame.
    """

    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        super().__init__(message)


class ConfigError(ValueError):
    """Malformed parameter file; ``lineno`` is 1-based, or None for file-level problems."""

    def __init__(self, message: str, lineno: Optional[int] = None, key: Optional[str] = None):
        self.lineno = lineno
        self.key = key
        prefix = f"line {lineno}: " if lineno is not None else ""
        super().__init__(prefix + message)


@dataclass(frozen=True)
class FullParams:
    r: float
    m: float
    a_U: float
    a_V: float
    mu_U: float
    mu_V: float
    beta_U: float
    beta_V: float
    gamma: float
    lambda_: float
    delta: float
    c_SS: float
    c_SU: float
    c_SV: float
    c_US: float
    c_UU: float
    c_UV: float
    c_VS: float
    c_VU: float
    c_VV: float
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
                raise ParameterError(f"{config_key(f.name)} must be a finite number, got {value!r}", f.name)
            # plain floats keep repr() and the config writer free of numpy types
            object.__setattr__(self, f.name, float(value))
            value = float(value)
            if value < 0:
                raise ParameterError(f"{config_key(f.name)} must be nonnegative, got {value!r}", f.name)
        for name in COMPETITION:
            if getattr(self, name) <= 0:
                raise ParameterError(f"{name} must be strictly positive", name)
        if not 0 < self.a_V < self.a_U < 1:
            raise ParameterError(f"require 0 < a_V < a_U < 1, got a_V={self.a_V}, a_U={self.a_U}",
                                 "a_V" if not 0 < self.a_V < 1 else "a_U")
        if not 0 < self.epsilon <= 1:
            raise ParameterError(f"epsilon must lie in (0, 1], got {self.epsilon}", "epsilon")
        if self.lambda_ <= 0 or self.delta <= 0:
            raise ParameterError(f"lambda and delta must be positive, got lambda={self.lambda_}, delta={self.delta}",
                                 "lambda_" if self.lambda_ <= 0 else "delta")

    def replace(self, **changes) -> "FullParams":
        """Copy with some fields changed; accepts ``lambda`` as an alias of ``lambda_``."""
        data = asdict(self)
        for key, value in changes.items():
            data[field_name(key)] = float(value)
        return FullParams(**data)


@dataclass(frozen=True)
class ReducedParams:
    """Coefficients of the aggregated planar system.

    ``r``, ``m`` and ``c_SS`` carry over unchanged; the barred
    coefficients absorb the coinfected fraction ``nu_star``.
    """

    r: float
    m: float
    c_SS: float
    a_bar: float
    c_bar_SI: float
    c_bar_IS: float
    c_bar_II: float
    beta_bar: float
    gamma_bar: float
    mu_bar: float
    nu_star: float = 0.0

    def __post_init__(self):
        if not 0 <= self.nu_star < 1:
            raise ParameterError(f"nu_star must lie in [0, 1), got {self.nu_star}")
        if self.c_SS <= 0 or self.c_bar_SI <= 0 or self.c_bar_IS <= 0 or self.c_bar_II <= 0:
            raise ParameterError("competition coefficients must be strictly positive")
        for name in ("r", "m", "a_bar", "beta_bar", "gamma_bar", "mu_bar"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be nonnegative")

    @property
    def c_min(self) -> float:
        """Smallest competition coefficient, the constant in the boundedness estimate."""
        return min(self.c_SS, self.c_bar_SI, self.c_bar_IS, self.c_bar_II)


@dataclass(frozen=True)
class Thresholds:
    """Threshold bundle; a field is None where its defining formula does not apply."""

    s1_star: Optional[float]
    a_bar_thr: Optional[float]
    b_bar_thr: float
    r_script: Optional[float]
    invasion_margin: float
    nu_star: float


def compute_nu_star(lambda_: float, delta: float) -> float:
    """Coinfected fraction of the infected class at the fast equilibrium."""
    if not lambda_ > 0:
        raise ParameterError(f"lambda must be positive, got {lambda_}")
    if not delta > 0:
        # delta = 0 would make every infected host coinfected (nu* = 1)
        raise ParameterError(f"delta must be positive, got {delta}")
    if delta >= lambda_:
        return 0.0
    return 1.0 - delta / lambda_


def reduce(p: FullParams) -> ReducedParams:
    nu = compute_nu_star(p.lambda_, p.delta)
    if nu == 0.0:
        # opportunistic disease cannot invade: coefficients are the primary ones verbatim
        return ReducedParams(
            r=p.r, m=p.m, c_SS=p.c_SS,
            a_bar=p.a_U, c_bar_SI=p.c_SU, c_bar_IS=p.c_US, c_bar_II=p.c_UU,
            beta_bar=p.beta_U, gamma_bar=p.gamma, mu_bar=p.mu_U, nu_star=0.0,
        )
    q = 1.0 - nu
    return ReducedParams(
        r=p.r,
        m=p.m,
        c_SS=p.c_SS,
        a_bar=q * p.a_U + nu * p.a_V,
        c_bar_SI=q * p.c_SU + nu * p.c_SV,
        c_bar_IS=q * p.c_US + nu * p.c_VS,
        c_bar_II=q * q * p.c_UU + q * nu * p.c_UV + nu * q * p.c_VU + nu * nu * p.c_VV,
        beta_bar=q * p.beta_U + nu * p.beta_V,
        gamma_bar=q * p.gamma,
        mu_bar=q * p.mu_U + nu * p.mu_V,
        nu_star=nu,
    )


def quadratic_coefficients(rp: ReducedParams) -> tuple[float, float, float]:
    """Coefficients (a, b, c) of a*S**2 - b*S + c = 0 whose roots are interior-equilibrium S values.

    Obtained by eliminating I between the two nullclines of the planar
    system.  The linear and constant terms use the full I-equation loss
    rate m + gamma_bar + mu_bar.
    """
    margin = rp.beta_bar - rp.c_bar_IS
    k = rp.c_bar_SI + rp.beta_bar
    growth = rp.a_bar * rp.r + rp.gamma_bar
    loss = rp.m + rp.gamma_bar + rp.mu_bar
    a = rp.c_SS * rp.c_bar_II + k * margin
    b = rp.c_bar_II * (rp.r - rp.m) + growth * margin + k * loss
    c = growth * loss
    return a, b, c


def compute_thresholds(rp: ReducedParams) -> Thresholds:
    margin = rp.beta_bar - rp.c_bar_IS
    s1 = (rp.r - rp.m) / rp.c_SS if rp.r > rp.m else None
    a_thr = (rp.m + rp.gamma_bar + rp.mu_bar) / margin if margin > 0 else None
    b_thr = (rp.a_bar * rp.r + rp.gamma_bar) / (rp.c_bar_SI + rp.beta_bar)
    r_script = None
    if s1 is not None and a_thr is not None:
        a, b, c = quadratic_coefficients(rp)
        if c > 0:
            r_script = b / (2.0 * math.sqrt(a * c))
    return Thresholds(
        s1_star=s1,
        a_bar_thr=a_thr,
        b_bar_thr=b_thr,
        r_script=r_script,
        invasion_margin=margin,
        nu_star=rp.nu_star,
    )


# ---------------------------------------------------------------------------
# flat key = value parameter files
# ---------------------------------------------------------------------------

_KEY_TO_FIELD = {"lambda": "lambda_"}
_FIELD_TO_KEY = {v: k for k, v in _KEY_TO_FIELD.items()}
PARAM_KEYS = tuple(_FIELD_TO_KEY.get(f.name, f.name) for f in fields(FullParams))
OPTIONAL_KEYS = ("epsilon",)


def field_name(key: str) -> str:
    return _KEY_TO_FIELD.get(key, key)


def config_key(name: str) -> str:
    return _FIELD_TO_KEY.get(name, name)


def parse_params(text: str) -> FullParams:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values: dict[str, float] = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, _, value = (part.strip() for part in line.partition("="))
        if key not in PARAM_KEYS:
            raise ConfigError(f"unknown parameter {key!r}", lineno, key)
        if key in values:
            raise ConfigError(f"duplicate parameter {key!r} (first set on line {lines[key]})", lineno, key)
        try:
            values[key] = float(value)
        except ValueError:
            raise ConfigError(f"value for {key!r} is not a number: {value!r}", lineno, key) from None
        lines[key] = lineno
    missing = [k for k in PARAM_KEYS if k not in values and k not in OPTIONAL_KEYS]
    if missing:
        raise ConfigError("missing parameter(s): " + ", ".join(missing), key=missing[0])
    try:
        return FullParams(**{field_name(k): v for k, v in values.items()})
    except ParameterError as exc:
        key = config_key(exc.field) if exc.field else None
        raise ConfigError(str(exc), lines.get(key), key) from None


def format_params(p: FullParams) -> str:
    return "".join(f"{config_key(f.name)} = {getattr(p, f.name)!r}\n" for f in fields(p))


def load_params(path: Union[str, Path]) -> FullParams:
    return parse_params(Path(path).read_text())


def save_params(p: FullParams, path: Union[str, Path]) -> None:
    Path(path).write_text(format_params(p))
