"""Shared builders for test configurations."""

from __future__ import annotations

import numpy as np

import selkov_lattice as sl


def uniform(kind: str, amp: float = 1.0, rate: float = 1.0) -> sl.SiteForcing:
    return sl.SiteForcing(sl.TimeEnvelope(kind, amp, rate), sl.SiteProfile("uniform"))


def scalar_demo_model(lam=None, half_width: int = 1):
    """Single-site style config: periodic window with uniform coefficients.

    Every site evolves as an identical copy of the scalar system

        du = (-2.5 u + u^2 v - u^3 + e^-t) dt + eps1 (cos 2t + e^-t^2 u^2) dW
             + eps2 * jumps with sin(2t) + e^-t^2 u^2 / (1 + y^2)
        dv = (-v - u^2 v + u^3 + e^-t) dt + (gamma1, gamma2) noise at v

    because the uniform profiles keep the lattice constant in space and
    the periodic wrap makes the diffusion term vanish identically.
    """
    lam = lam or sl.NoiseIntensity()
    params = sl.ModelParams(d1=1.0, d2=1.0, a1=2.5, a2=1.0, b1=1.0, b2=1.0,
                            p=1, lam=lam)
    trunc = sl.TruncationConfig(half_width, sl.Boundary.PERIODIC)
    forcing = sl.ForcingSpec(
        f1=uniform("exp", 1.0, 1.0),
        f2=uniform("exp", 1.0, 1.0),
        h=(uniform("cos", 1.0, 2.0),),
        kappa=(uniform("sin", 1.0, 2.0),),
        delta=(uniform("const", 1.0),),
        sigma=(sl.StateKernel(sl.TimeEnvelope("gauss", 1.0, 1.0), 2),),
        jump=(sl.JumpKernel(sl.StateKernel(sl.TimeEnvelope("gauss", 1.0, 1.0), 2),
                            sl.JumpSizeFactor("inv_quad")),),
        alpha=4.0,
    )
    levy = sl.LevyConfig(2.0, sl.JumpLaw("gaussian", sd=1.0), truncate_small=False,
                         m_jump_bound=10.0)
    return params, forcing, levy, trunc


def dissipative_model(lam=None, half_width: int = 1, sigma_slope: float = 0.1,
                      chi: float | None = None, f_kind: str = "const",
                      b1: float = 1.0, b2: float = 1.0):
    """Linear-noise config with a provably positive decay margin."""
    lam = lam or sl.NoiseIntensity()
    params = sl.ModelParams(d1=1.0, d2=1.0, a1=2.0, a2=2.0, b1=b1, b2=b2,
                            p=1, lam=lam)
    trunc = sl.TruncationConfig(half_width, sl.Boundary.PERIODIC)
    levy = sl.LevyConfig(2.0, sl.JumpLaw("gaussian", sd=0.4), truncate_small=True,
                         m_jump_bound=1.0)
    nu_abs = levy.measure_integral_small(lambda y: abs(1.0 / (1.0 + y * y)))
    alpha = sigma_slope * max(1.0, nu_abs)
    forcing = sl.ForcingSpec(
        f1=uniform(f_kind, 1.0, 1.0),
        f2=uniform(f_kind, 1.0, 1.0),
        h=(uniform("cos", 0.5, 2.0),),
        kappa=(uniform("sin", 0.5, 2.0),),
        delta=(uniform("const", 1.0),),
        sigma=(sl.StateKernel(sl.TimeEnvelope("const", sigma_slope), 1),),
        jump=(sl.JumpKernel(sl.StateKernel(sl.TimeEnvelope("const", sigma_slope), 1),
                            sl.JumpSizeFactor("inv_quad")),),
        alpha=alpha,
        chi=chi,
    )
    return params, forcing, levy, trunc


def ou_model(lam=None, a1: float = 1.0, a2: float = 1.5, amp: float = 0.5):
    """Additive-noise linear model: b-terms keep formal positivity but the
    reaction terms are switched off through zero coupling in tests that
    need an exact Ornstein-Uhlenbeck comparison."""
    lam = lam or sl.NoiseIntensity(eps1=1.0, eps2=0.0, gamma1=1.0, gamma2=0.0)
    params = sl.ModelParams(d1=1.0, d2=1.0, a1=a1, a2=a2, b1=1e-300, b2=1e-300,
                            p=1, lam=lam)
    trunc = sl.TruncationConfig(1, sl.Boundary.PERIODIC)
    forcing = sl.ForcingSpec(
        f1=uniform("zero", 0.0),
        f2=uniform("zero", 0.0),
        h=(uniform("const", amp),),
        kappa=(uniform("zero", 0.0),),
        delta=(uniform("const", 1.0),),
        sigma=(sl.StateKernel(sl.TimeEnvelope("zero", 0.0), 1),),
        jump=(sl.JumpKernel(sl.StateKernel(sl.TimeEnvelope("zero", 0.0), 1),
                            sl.JumpSizeFactor("one")),),
        alpha=0.05,
    )
    levy = sl.LevyConfig(0.0, sl.JumpLaw("uniform", bound=0.5), truncate_small=True,
                         m_jump_bound=1.0)
    return params, forcing, levy, trunc


def uniform_state(trunc, u0: float, v0: float) -> sl.LatticeState:
    n = trunc.n_sites
    return sl.LatticeState(np.full(n, u0), np.full(n, v0))
