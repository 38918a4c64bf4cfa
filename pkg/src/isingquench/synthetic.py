"""Synthetic series that exactly obey the single-variable scaling form

    L^(-kappa) <M^2(t)> = F(h_red * t_red^w*),

used as the independent oracle when validating the collapse pipeline: the
generator exponent w* is known, so recovery can be asserted.
"""

import numpy as np

from .scaling import CriticalConstants, reduced_field, _pow
from .series import EnsembleSeries, SeriesLabel

# Scaling-function shapes.  All have curvature in log-log (a pure power
# law would leave w identifiable only through the field offsets).
SCALING_FUNCTIONS = {
    "rational": lambda x: x**2 / (1.0 + x),
    "saturating": lambda x: x**1.5 / (1.0 + 0.3 * x**1.2),
    "log_bend": lambda x: x / np.sqrt(1.0 + np.log1p(x) ** 2),
}


def make_synthetic_series(
    constants: CriticalConstants,
    w_star: float,
    L_values,
    h_values,
    scaling_function: str = "rational",
    noise: float = 0.0,
    points_per_curve: int = 200,
    x_span: tuple[float, float] = (1e-2, 1e2),
    amplitude: float = 0.01,
    seed: int = 0,
) -> list[EnsembleSeries]:
    """One series per (L, h), with times chosen so the collapse variable
    sweeps `x_span` for every curve at the generating exponent.

    `noise` is the relative scale of multiplicative Gaussian noise; the
    generating sigma is recorded as the standard error.  The default
    amplitude keeps L^kappa F(x) inside the physical [0, N^2] range.
    """
    if w_star <= 0:
        raise ValueError("generator exponent w* must be positive")
    if noise < 0:
        raise ValueError("noise level must be nonnegative")
    try:
        f = SCALING_FUNCTIONS[scaling_function]
    except KeyError:
        raise ValueError(
            f"unknown scaling function {scaling_function!r}; "
            f"choose from {sorted(SCALING_FUNCTIONS)}"
        ) from None
    rng = np.random.default_rng(seed)
    out = []
    for L in L_values:
        y_scale = amplitude * _pow(L, constants.kappa)
        t_scale = _pow(L, constants.z) / (constants.J if constants.family == "quantum" else 1.0)
        for h in h_values:
            h_red = reduced_field(h, L, constants)
            x = np.logspace(np.log10(x_span[0]), np.log10(x_span[1]), points_per_curve)
            t_red = (x / h_red) ** (1.0 / w_star)
            times = t_red * t_scale
            y = f(x)
            mean = y_scale * y
            if noise > 0:
                factor = 1.0 + noise * rng.standard_normal(points_per_curve)
                mean = mean * np.clip(factor, 0.05, None)  # keep strictly positive
            stderr = noise * y_scale * y
            out.append(
                EnsembleSeries(
                    label=SeriesLabel(family=constants.family, d=constants.d, L=int(L), h=float(h)),
                    times=times,
                    mean_M2=mean,
                    stderr_M2=stderr,
                    n_realizations=1,
                    time_unit=constants.time_unit,
                )
            )
    return out
