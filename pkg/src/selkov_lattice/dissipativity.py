"""Computable dissipativity quantities: decay margin, forcing integral,
and the absorbing-ball report.

The decay margin is

    margin = inf_t [ min(a1, a2) - 1/2 - 4 alpha^2 ||delta(t)||^2 (b1 + b2) ],

with ||delta(t)||^2 summed over modes and sites.  A positive margin is
the standing hypothesis of every forgetting/absorption experiment; a
nonpositive one flags the run as outside the dissipative regime.

The forcing integral at time tau is the exponentially weighted history

    R(tau) = int_{-inf}^{tau} e^{-margin (tau - s)}
             ( sum_k ||kappa_k||^2 + sum_k ||h_k||^2 + ||f1||^2 + ||f2||^2
               + ||delta(s)||^2 ) ds,

computed by trapezoid quadrature with the lower limit truncated where
the exponential weight falls below 1e-12.  The absorbing level is a
calibrated multiple of R(tau); the calibration constant comes from a
reference ensemble run because the underlying bound only fixes it up to
an unspecified positive factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .forcing import ForcingSpec
from .lattice import ModelParams, TruncationConfig

WEIGHT_FLOOR = 1e-12


def dissipation_margin(
    params: ModelParams,
    forcing: ForcingSpec,
    trunc: TruncationConfig,
    times: np.ndarray,
) -> float:
    """Infimum of the decay margin over the sampled time grid."""
    bound = forcing.bind(trunc)
    times = np.asarray(times, dtype=np.float64)
    dsq = bound.delta_sq_sum(times)
    a_min = min(params.a1, params.a2)
    vals = a_min - 0.5 - 4.0 * forcing.alpha**2 * dsq * (params.b1 + params.b2)
    return float(np.min(vals))


def _integrand(bound, params, s: np.ndarray) -> np.ndarray:
    spec = bound.spec
    trunc = bound.trunc
    total = np.zeros_like(s)
    for k in range(spec.k_modes):
        total = total + spec.kappa[k].norm_sq(s, trunc)
        total = total + spec.h[k].norm_sq(s, trunc)
    total = total + spec.f1.norm_sq(s, trunc) + spec.f2.norm_sq(s, trunc)
    total = total + bound.delta_sq_sum(s)
    return total


def pullback_forcing_integral(
    tau: float,
    params: ModelParams,
    forcing: ForcingSpec,
    trunc: TruncationConfig,
    margin: float,
    quad_step: float = 1e-3,
) -> tuple[float, float]:
    """Exponentially weighted forcing history at tau.

    Returns ``(value, truncation_bound)``.  The truncation bound is the
    weight floor times the integrand at the cut point over the margin;
    it is only meaningful when every envelope decays backward slower
    than the margin (checked via the catalog's growth rates).
    """
    if margin <= 0:
        raise ValueError("forcing integral requires a positive decay margin")
    bound = forcing.bind(trunc)
    growth = _max_backward_growth(forcing)
    if math.isfinite(growth) and growth >= margin:
        integrable = False
    else:
        integrable = True

    depth = math.log(1.0 / WEIGHT_FLOOR) / margin
    n = max(int(math.ceil(depth / quad_step)), 8)
    s = np.linspace(tau - depth, tau, n + 1)
    g = _integrand(bound, params, s)
    w = np.exp(-margin * (tau - s))
    value = float(np.trapezoid(w * g, s))
    tail = float(g[0]) * WEIGHT_FLOOR / margin
    if not integrable:
        tail = math.inf
    return value, tail


def _max_backward_growth(forcing: ForcingSpec) -> float:
    envs = [forcing.f1.envelope, forcing.f2.envelope]
    for k in range(forcing.k_modes):
        envs += [forcing.h[k].envelope, forcing.kappa[k].envelope,
                 forcing.delta[k].envelope]
    rates = []
    for env in envs:
        r = env.backward_growth_rate()
        # gaussian envelopes decay backward; their formal rate is -inf
        rates.append(0.0 if math.isinf(r) else r)
    return max(rates)


@dataclass(frozen=True)
class AbsorptionReport:
    """Decay margin, forcing integral, and the calibrated absorbing ball."""

    margin: float
    forcing_integral: float
    truncation_bound: float
    calibration: float
    absorbing_level: float   # calibrated bound on the second moment
    absorbing_radius: float  # its square root
    hypothesis_ok: bool

    def as_dict(self) -> dict:
        return {
            "decay_margin": self.margin,
            "forcing_integral": self.forcing_integral,
            "quadrature_truncation_bound": self.truncation_bound,
            "calibration_constant": self.calibration,
            "absorbing_level": self.absorbing_level,
            "absorbing_radius": self.absorbing_radius,
            "hypothesis_ok": self.hypothesis_ok,
        }


def absorbing_report(
    tau: float,
    params: ModelParams,
    forcing: ForcingSpec,
    trunc: TruncationConfig,
    margin_times: np.ndarray | None = None,
    calibration: float = 1.0,
    quad_step: float = 1e-3,
) -> AbsorptionReport:
    """Assemble the absorbing-ball quantities at time tau.

    ``calibration`` rescales the forcing integral into a second-moment
    bound; experiments estimate it from a reference run.  When the decay
    margin is nonpositive, the report carries ``hypothesis_ok=False``
    and downstream experiments must refuse to claim verification.
    """
    if margin_times is None:
        margin_times = np.linspace(tau - 20.0, tau, 4001)
    margin = dissipation_margin(params, forcing, trunc, margin_times)
    if margin <= 0:
        return AbsorptionReport(
            margin=margin,
            forcing_integral=math.nan,
            truncation_bound=math.inf,
            calibration=calibration,
            absorbing_level=math.inf,
            absorbing_radius=math.inf,
            hypothesis_ok=False,
        )
    value, tail = pullback_forcing_integral(tau, params, forcing, trunc, margin, quad_step)
    level = calibration * value
    return AbsorptionReport(
        margin=margin,
        forcing_integral=value,
        truncation_bound=tail,
        calibration=calibration,
        absorbing_level=level,
        absorbing_radius=math.sqrt(level),
        hypothesis_ok=True,
    )
