import numpy as np
import pytest

from coinfection.params import FullParams, ReducedParams

BASELINE = dict(
    r=26.0, m=12.0, a_U=0.9, a_V=0.7, mu_U=0.3, mu_V=0.5, beta_U=4.0, beta_V=8.0, gamma=0.2,
    lambda_=2.0, delta=1.0, c_SS=3.8, c_SU=0.5, c_SV=0.5, c_US=2.6, c_UU=0.1, c_UV=1.0,
    c_VS=0.5, c_VU=4.0, c_VV=4.0,
)
HIGH_MORTALITY = dict(BASELINE, m=17.0, c_SS=2.8, beta_V=4.0)
BISTABLE = dict(
    r=12.8, m=4.7, a_U=0.97, a_V=0.5, mu_U=1.8, mu_V=1.0, beta_U=4.2, beta_V=2.0, gamma=1.7,
    lambda_=1.0, delta=2.0, c_SS=3.8, c_SU=0.13, c_SV=1.0, c_US=1.06, c_UU=0.07, c_UV=1.0,
    c_VS=1.0, c_VU=1.0, c_VV=1.0,
)


def random_full_params(rng: np.random.Generator, **fixed) -> FullParams:
    """Draw a valid parameter set with magnitudes similar to the reference sets."""
    a_V, a_U = np.sort(rng.uniform(0.01, 0.99, size=2))
    if a_V == a_U:
        a_U = min(0.999, a_V + 1e-3)
    r = rng.uniform(1.0, 30.0)
    v = dict(
        r=r, m=rng.uniform(0.0, r), a_U=a_U, a_V=a_V,
        mu_U=rng.uniform(0, 2), mu_V=rng.uniform(0, 2),
        beta_U=rng.uniform(0, 10), beta_V=rng.uniform(0, 10), gamma=rng.uniform(0, 2),
        lambda_=rng.uniform(0.1, 10), delta=rng.uniform(0.1, 10),
    )
    for name in ("c_SS", "c_SU", "c_SV", "c_US", "c_UU", "c_UV", "c_VS", "c_VU", "c_VV"):
        v[name] = rng.uniform(0.05, 5.0)
    v.update(fixed)
    return FullParams(**v)


def random_reduced_params(rng: np.random.Generator) -> ReducedParams:
    """Draw aggregated coefficients directly; two-root cases are far more common this way."""
    nu = rng.uniform(0, 0.95) if rng.random() < 0.5 else 0.0
    return ReducedParams(
        r=rng.uniform(1, 30), m=rng.uniform(0, 10), c_SS=rng.uniform(0.05, 5),
        a_bar=rng.uniform(0.01, 0.99), c_bar_SI=rng.uniform(0.05, 5), c_bar_IS=rng.uniform(0.05, 5),
        c_bar_II=rng.uniform(0.05, 5), beta_bar=rng.uniform(0, 10),
        gamma_bar=rng.uniform(0, 2), mu_bar=rng.uniform(0, 2), nu_star=nu,
    )


def random_premise_params(rng: np.random.Generator) -> ReducedParams:
    """Draw coefficients with S1* < A-bar < B-bar by choosing the thresholds first."""
    while True:
        r, m, c_SS = rng.uniform(1, 30), rng.uniform(0, 10), rng.uniform(0.05, 5)
        if r <= m:
            continue
        s1 = (r - m) / c_SS
        A = s1 * rng.uniform(1.001, 2.0)
        B = A * rng.uniform(1.001, 3.0)
        c_IS = rng.uniform(0.05, 5)
        margin = rng.uniform(m / A, m / A + 10)
        beta = c_IS + margin
        loss = A * margin  # m + gamma_bar + mu_bar
        gamma = rng.uniform(0, loss - m)
        mu = loss - m - gamma
        a_bar = rng.uniform(0.01, 0.99)
        c_SI = (a_bar * r + gamma) / B - beta
        if c_SI <= 0.01:
            continue
        c_II = 10 ** rng.uniform(-3, 1)
        return ReducedParams(r=r, m=m, c_SS=c_SS, a_bar=a_bar, c_bar_SI=c_SI, c_bar_IS=c_IS,
                             c_bar_II=c_II, beta_bar=beta, gamma_bar=gamma, mu_bar=mu,
                             nu_star=0.0)


@pytest.fixture
def baseline() -> FullParams:
    return FullParams(**BASELINE)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


def write_config(path, values: dict, drop=()) -> None:
    lines = []
    for k, v in values.items():
        key = "lambda" if k == "lambda_" else k
        if key not in drop:
            lines.append(f"{key} = {v!r}")
    path.write_text("\n".join(lines) + "\n")


# one PASS/FAIL line per acceptance criterion, collected by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
