"""Time-dependent forcing, noise coefficient kernels, and the jump-law config.

Coefficient functions come from a closed catalog of named kernels so that
configurations stay serializable and validation stays decidable:

* time envelopes: ``const``, ``cos``, ``sin``, ``exp`` (c*e^{-a t}),
  ``gauss`` (c*e^{-a t^2}), ``zero``;
* site profiles: ``uniform``, ``center``, ``exp_abs`` (e^{-beta |i|}),
  ``zero``;
* state kernels: envelope(t) * s^power;
* jump-size factors: ``one`` or ``inv_quad`` (1 / (1 + y^2)).

A per-site deterministic forcing or additive noise coefficient is
``envelope(t) * profile(i)``.  The state-dependent diffusion entry for
mode k at site i is ``delta_{k,i}(t) * envelope_k(t) * s^m`` and the jump
coefficient is ``delta_{k,i}(t) * envelope_k(t) * s^m * ypart(y)``; tying
the spatial shape ``delta`` into the jump coefficient keeps the linear
growth bound uniform over sites.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .lattice import TruncationConfig

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class TimeEnvelope:
    kind: str
    amp: float = 1.0
    rate: float = 1.0

    _KINDS = ("const", "cos", "sin", "exp", "gauss", "zero")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown envelope kind {self.kind!r}")

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        if self.kind == "const":
            return np.full_like(t, self.amp)
        if self.kind == "cos":
            return self.amp * np.cos(self.rate * t)
        if self.kind == "sin":
            return self.amp * np.sin(self.rate * t)
        if self.kind == "exp":
            return self.amp * np.exp(-self.rate * t)
        if self.kind == "gauss":
            return self.amp * np.exp(-self.rate * t * t)
        return np.zeros_like(t)

    def is_periodic(self, chi: float, tol: float = 1e-9) -> bool:
        """Whether envelope(t + chi) == envelope(t) for all t."""
        if self.kind in ("const", "zero") or self.amp == 0.0:
            return True
        if self.kind in ("cos", "sin"):
            phase = (self.rate * chi) % TWO_PI
            return min(phase, TWO_PI - phase) <= tol * max(1.0, abs(self.rate * chi))
        return False

    def backward_growth_rate(self) -> float:
        """Exponential growth rate of envelope(t)^2 as t -> -infinity."""
        if self.kind == "exp" and self.amp != 0.0:
            return 2.0 * self.rate
        if self.kind == "gauss" and self.amp != 0.0:
            return math.inf
        return 0.0

    def is_nonnegative(self) -> bool:
        if self.kind in ("cos", "sin"):
            return self.amp == 0.0
        return self.amp >= 0.0 or self.kind == "zero"

    def sup_abs(self) -> float:
        """sup_t |envelope(t)| over t >= 0 (envelopes in the catalog peak at 0)."""
        return abs(self.amp)


ZERO_ENVELOPE = TimeEnvelope("zero", 0.0, 0.0)


@dataclass(frozen=True)
class SiteProfile:
    kind: str
    decay: float = 1.0

    _KINDS = ("uniform", "center", "exp_abs", "zero")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if self.kind == "exp_abs" and self.decay <= 0:
            raise ValueError("exp_abs profile needs decay > 0")

    def values(self, trunc: TruncationConfig) -> np.ndarray:
        idx = trunc.site_indices()
        if self.kind == "uniform":
            return np.ones(trunc.n_sites)
        if self.kind == "center":
            out = np.zeros(trunc.n_sites)
            out[trunc.half_width] = 1.0
            return out
        if self.kind == "exp_abs":
            return np.exp(-self.decay * np.abs(idx).astype(np.float64))
        return np.zeros(trunc.n_sites)


@dataclass(frozen=True)
class SiteForcing:
    """Per-site function of time: envelope(t) * profile(i)."""

    envelope: TimeEnvelope
    profile: SiteProfile

    def values(self, t: float, trunc: TruncationConfig) -> np.ndarray:
        return float(self.envelope(t)) * self.profile.values(trunc)

    def norm_sq(self, t, trunc: TruncationConfig):
        prof = self.profile.values(trunc)
        env = self.envelope(np.asarray(t, dtype=np.float64))
        return env * env * float(np.dot(prof, prof))


ZERO_FORCING = SiteForcing(ZERO_ENVELOPE, SiteProfile("zero"))


@dataclass(frozen=True)
class StateKernel:
    """State-dependent factor envelope(t) * s^power (power 0 means constant)."""

    envelope: TimeEnvelope
    power: int = 1

    def __post_init__(self):
        if not (isinstance(self.power, int) and self.power >= 0):
            raise ValueError("state kernel power must be an integer >= 0")

    def __call__(self, t, s):
        s = np.asarray(s, dtype=np.float64)
        return np.asarray(self.envelope(t), dtype=np.float64) * s**self.power

    def is_zero(self) -> bool:
        return self.envelope.kind == "zero" or self.envelope.amp == 0.0


@dataclass(frozen=True)
class JumpSizeFactor:
    kind: str

    _KINDS = ("one", "inv_quad")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown jump-size factor {self.kind!r}")

    def __call__(self, y):
        y = np.asarray(y, dtype=np.float64)
        if self.kind == "one":
            return np.ones_like(y)
        return 1.0 / (1.0 + y * y)


@dataclass(frozen=True)
class JumpKernel:
    """Jump coefficient factor envelope(t) * s^power * factor(y)."""

    state: StateKernel
    size_factor: JumpSizeFactor = field(default_factory=lambda: JumpSizeFactor("one"))

    def __call__(self, t, s, y):
        return self.state(t, s) * self.size_factor(y)

    def is_zero(self) -> bool:
        return self.state.is_zero()


@dataclass(frozen=True)
class JumpLaw:
    """Distribution of individual jump sizes."""

    kind: str  # "gaussian" or "uniform"
    sd: float = 1.0
    bound: float = 0.5

    def __post_init__(self):
        if self.kind not in ("gaussian", "uniform"):
            raise ValueError(f"unknown jump law {self.kind!r}")
        if self.kind == "gaussian" and self.sd <= 0:
            raise ValueError("gaussian jump law needs sd > 0")
        if self.kind == "uniform" and not (0 < self.bound < 1):
            raise ValueError("uniform jump law needs bound in (0, 1)")

    def pdf(self, y):
        y = np.asarray(y, dtype=np.float64)
        if self.kind == "gaussian":
            z = y / self.sd
            return np.exp(-0.5 * z * z) / (self.sd * math.sqrt(TWO_PI))
        out = np.where(np.abs(y) <= self.bound, 1.0 / (2.0 * self.bound), 0.0)
        return out

    def sample(self, gen: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "gaussian":
            return gen.normal(0.0, self.sd, n)
        return gen.uniform(-self.bound, self.bound, n)

    def prob_small(self) -> float:
        """P(|Y| < 1)."""
        if self.kind == "uniform":
            return 1.0
        return float(math.erf(1.0 / (self.sd * math.sqrt(2.0))))

    def expect_small(self, fn) -> float:
        """E[fn(Y) 1_{|Y|<1}] by adaptive quadrature against the density."""
        lo = -1.0 if self.kind == "gaussian" else -self.bound
        hi = -lo
        val, _ = quad(lambda y: fn(y) * float(self.pdf(y)), lo, hi, limit=200)
        return float(val)

    def second_moment_small(self) -> float:
        """E[(Y^2 and 1)]: jump-activity functional of one mode at unit rate."""
        if self.kind == "uniform":
            return self.bound * self.bound / 3.0
        inside = self.expect_small(lambda y: y * y)
        return inside + (1.0 - self.prob_small())


@dataclass(frozen=True)
class LevyConfig:
    """Compound-Poisson jump noise: rate, size law, and small-jump handling."""

    poisson_intensity: float
    jump_law: JumpLaw
    truncate_small: bool = False
    m_jump_bound: float = math.inf

    def __post_init__(self):
        if self.poisson_intensity < 0:
            raise ValueError("poisson_intensity must be nonnegative")
        if self.m_jump_bound < 0:
            raise ValueError("m_jump_bound must be nonnegative")

    def validate_activity(self, k_modes: int) -> float:
        """Check sum_k int (|y|^2 and 1) nu_k(dy) <= bound; returns the sum."""
        total = k_modes * self.poisson_intensity * self.jump_law.second_moment_small()
        if total > self.m_jump_bound * (1.0 + 1e-12):
            raise ValueError(
                f"jump activity {total:.6g} exceeds declared bound {self.m_jump_bound:.6g}"
            )
        return total

    def measure_mass_small(self) -> float:
        """nu({|y| < 1}) for one mode."""
        return self.poisson_intensity * self.jump_law.prob_small()

    def measure_integral_small(self, fn) -> float:
        """int_{|y|<1} fn(y) nu(dy) for one mode."""
        return self.poisson_intensity * self.jump_law.expect_small(fn)


@dataclass(frozen=True)
class ForcingSpec:
    """All time-dependent coefficients of the model, mode-truncated to K modes."""

    f1: SiteForcing
    f2: SiteForcing
    h: tuple[SiteForcing, ...]
    kappa: tuple[SiteForcing, ...]
    delta: tuple[SiteForcing, ...]
    sigma: tuple[StateKernel, ...]
    jump: tuple[JumpKernel, ...]
    alpha: float
    chi: float | None = None

    def __post_init__(self):
        k = len(self.h)
        if not (len(self.kappa) == len(self.delta) == len(self.sigma) == len(self.jump) == k):
            raise ValueError("h, kappa, delta, sigma, jump must all have K_modes entries")
        if k < 1:
            raise ValueError("need at least one noise mode")
        if self.alpha <= 0:
            raise ValueError("growth constant alpha must be positive")
        if self.chi is not None and self.chi <= 0:
            raise ValueError("period chi must be positive")
        for d in self.delta:
            if not d.envelope.is_nonnegative():
                raise ValueError("delta envelopes must be nonnegative")

    @property
    def k_modes(self) -> int:
        return len(self.h)

    def bind(self, trunc: TruncationConfig) -> "BoundForcing":
        return BoundForcing(self, trunc)

    def periodic_violations(self, tol: float = 1e-9) -> list[str]:
        """Envelope names that fail exact chi-periodicity (empty when chi unset)."""
        if self.chi is None:
            return []
        bad = []
        named = [("f1", self.f1.envelope), ("f2", self.f2.envelope)]
        for k in range(self.k_modes):
            named += [
                (f"h[{k}]", self.h[k].envelope),
                (f"kappa[{k}]", self.kappa[k].envelope),
                (f"delta[{k}]", self.delta[k].envelope),
                (f"sigma[{k}]", self.sigma[k].envelope),
                (f"jump[{k}]", self.jump[k].state.envelope),
            ]
        for name, env in named:
            if not env.is_periodic(self.chi, tol):
                bad.append(name)
        return bad


class BoundForcing:
    """ForcingSpec bound to a truncation window, with cached site profiles."""

    def __init__(self, spec: ForcingSpec, trunc: TruncationConfig):
        self.spec = spec
        self.trunc = trunc
        self.f1_profile = spec.f1.profile.values(trunc)
        self.f2_profile = spec.f2.profile.values(trunc)
        self.h_profiles = np.stack([s.profile.values(trunc) for s in spec.h])
        self.kappa_profiles = np.stack([s.profile.values(trunc) for s in spec.kappa])
        self.delta_profiles = np.stack([s.profile.values(trunc) for s in spec.delta])

    @property
    def k_modes(self) -> int:
        return self.spec.k_modes

    def f1(self, t: float) -> np.ndarray:
        return float(self.spec.f1.envelope(t)) * self.f1_profile

    def f2(self, t: float) -> np.ndarray:
        return float(self.spec.f2.envelope(t)) * self.f2_profile

    def h_vec(self, k: int, t: float) -> np.ndarray:
        return float(self.spec.h[k].envelope(t)) * self.h_profiles[k]

    def kappa_vec(self, k: int, t: float) -> np.ndarray:
        return float(self.spec.kappa[k].envelope(t)) * self.kappa_profiles[k]

    def delta_vec(self, k: int, t: float) -> np.ndarray:
        return float(self.spec.delta[k].envelope(t)) * self.delta_profiles[k]

    def delta_sq_sum(self, t) -> np.ndarray:
        """||delta(t)||^2 = sum_k sum_i delta_{k,i}(t)^2 (vectorized in t)."""
        t = np.asarray(t, dtype=np.float64)
        total = np.zeros_like(t)
        for k in range(self.k_modes):
            env = self.spec.delta[k].envelope(t)
            prof = self.delta_profiles[k]
            total = total + env * env * float(np.dot(prof, prof))
        return total

    def diffusion_coefficients(self, t: float, x: np.ndarray) -> np.ndarray:
        """Per-mode diffusion entries delta_{k,i}(t) * sigma_k(t, x_i), shape (K, S)."""
        x = np.asarray(x, dtype=np.float64)
        out = np.empty((self.k_modes, x.shape[0]))
        for k in range(self.k_modes):
            out[k] = self.delta_vec(k, t) * self.spec.sigma[k](t, x)
        return out

    def jump_coefficients(self, t: float, x: np.ndarray, y: float) -> np.ndarray:
        """Per-mode jump entries delta_{k,i}(t) * jump_k(t, x_i, y), shape (K, S)."""
        x = np.asarray(x, dtype=np.float64)
        out = np.empty((self.k_modes, x.shape[0]))
        for k in range(self.k_modes):
            out[k] = self.delta_vec(k, t) * self.spec.jump[k](t, x, y)
        return out


def validate_growth_bound(
    spec: ForcingSpec,
    levy: LevyConfig,
    times: np.ndarray,
    state_values: np.ndarray,
) -> dict:
    """Check the linear growth bound of the noise coefficients on a grid.

    For every mode k, time t, and scalar state s on the grid:

      |sigma_k(t, s)|                        <= alpha * (1 + |s|)
      int_{|y|<1} |jump_k(t, s, y)| nu(dy)   <= alpha * (1 + |s|)

    (the shared spatial factor delta_{k,i} cancels).  Report-only: returns
    the maximal ratios and a pass flag at tolerance 1 + 1e-9.
    """
    times = np.asarray(times, dtype=np.float64)
    svals = np.asarray(state_values, dtype=np.float64)
    denom = spec.alpha * (1.0 + np.abs(svals))
    max_sigma = 0.0
    max_jump = 0.0
    worst_sigma = None
    worst_jump = None
    for k in range(spec.k_modes):
        abs_factor = levy.measure_integral_small(
            lambda y: abs(float(spec.jump[k].size_factor(y)))
        )
        for t in times:
            sig = np.abs(spec.sigma[k](t, svals)) / denom
            jmp = np.abs(spec.jump[k].state(t, svals)) * abs_factor / denom
            i_s = int(np.argmax(sig))
            i_j = int(np.argmax(jmp))
            if sig[i_s] > max_sigma:
                max_sigma = float(sig[i_s])
                worst_sigma = {"mode": k, "t": float(t), "s": float(svals[i_s])}
            if jmp[i_j] > max_jump:
                max_jump = float(jmp[i_j])
                worst_jump = {"mode": k, "t": float(t), "s": float(svals[i_j])}
    passes = max(max_sigma, max_jump) <= 1.0 + 1e-9
    return {
        "passes": bool(passes),
        "max_sigma_ratio": max_sigma,
        "max_jump_ratio": max_jump,
        "worst_sigma": worst_sigma,
        "worst_jump": worst_jump,
        "alpha": spec.alpha,
    }
