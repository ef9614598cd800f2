"""Deterministic skeleton of the two-species lattice model.

State lives on a symmetric window of ``2N+1`` sites.  The coupled drift
combines a discrete diffusion operator, linear decay, and the two
oppositely signed reaction terms ``u^{2p} v`` and ``u^{2p+1}`` that make
the model reversible-Selkov (two-component Gray-Scott) type.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class Boundary(Enum):
    ZERO_DIRICHLET = "zero-dirichlet"
    PERIODIC = "periodic"


class BlowUpError(RuntimeError):
    """Raised when an evaluation produces a non-finite entry."""

    def __init__(self, message: str, site: int | None = None, step: int | None = None):
        super().__init__(message)
        self.site = site
        self.step = step


@dataclass(frozen=True)
class NoiseIntensity:
    """Four noise intensities, each in [0, 1]; all zero = deterministic limit."""

    eps1: float = 0.0
    eps2: float = 0.0
    gamma1: float = 0.0
    gamma2: float = 0.0

    def __post_init__(self):
        for name in ("eps1", "eps2", "gamma1", "gamma2"):
            val = getattr(self, name)
            if not (0.0 <= val <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {val}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.eps1, self.eps2, self.gamma1, self.gamma2)

    @property
    def is_deterministic(self) -> bool:
        return self.as_tuple() == (0.0, 0.0, 0.0, 0.0)

    @classmethod
    def diagonal(cls, c: float) -> "NoiseIntensity":
        return cls(c, c, c, c)


@dataclass(frozen=True)
class ModelParams:
    """Deterministic model constants plus the noise intensity tuple."""

    d1: float
    d2: float
    a1: float
    a2: float
    b1: float
    b2: float
    p: int
    lam: NoiseIntensity = field(default_factory=NoiseIntensity)

    def __post_init__(self):
        for name in ("d1", "d2", "a1", "a2", "b1", "b2"):
            val = getattr(self, name)
            if not val > 0.0:
                raise ValueError(f"{name} must be positive, got {val}")
        if not (isinstance(self.p, (int, np.integer)) and self.p >= 1):
            raise ValueError(f"p must be an integer >= 1, got {self.p!r}")


@dataclass(frozen=True)
class TruncationConfig:
    """Finite window i in {-N, ..., N} with a boundary rule for ghost sites."""

    half_width: int
    boundary: Boundary = Boundary.ZERO_DIRICHLET

    def __post_init__(self):
        if not (isinstance(self.half_width, (int, np.integer)) and self.half_width >= 1):
            raise ValueError(f"half_width must be an integer >= 1, got {self.half_width!r}")

    @property
    def n_sites(self) -> int:
        return 2 * self.half_width + 1

    def site_indices(self) -> np.ndarray:
        n = self.half_width
        return np.arange(-n, n + 1)


@dataclass
class LatticeState:
    """A (u, v) concentration pair on the window."""

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=np.float64)
        self.v = np.asarray(self.v, dtype=np.float64)
        if self.u.shape != self.v.shape or self.u.ndim != 1:
            raise ValueError("u and v must be 1-d arrays of equal length")

    @property
    def n_sites(self) -> int:
        return self.u.shape[0]

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.v)))

    def norm_sq(self) -> float:
        return float(np.dot(self.u, self.u) + np.dot(self.v, self.v))

    def copy(self) -> "LatticeState":
        return LatticeState(self.u.copy(), self.v.copy())

    @classmethod
    def zeros(cls, trunc: TruncationConfig) -> "LatticeState":
        return cls(np.zeros(trunc.n_sites), np.zeros(trunc.n_sites))

    @classmethod
    def single_site(cls, trunc: TruncationConfig, u0: float, v0: float) -> "LatticeState":
        """Point data at the center site, zeros elsewhere."""
        u = np.zeros(trunc.n_sites)
        v = np.zeros(trunc.n_sites)
        u[trunc.half_width] = u0
        v[trunc.half_width] = v0
        return cls(u, v)


def _check_length(x: np.ndarray, trunc: TruncationConfig, op: str) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != trunc.n_sites:
        raise ValueError(
            f"{op}: expected vectors of length {trunc.n_sites}, got {x.shape[-1]}"
        )
    return x


def shift_left(x: np.ndarray, boundary: Boundary) -> np.ndarray:
    """Neighbor value u_{i+1}, ghost resolved by the boundary rule."""
    if boundary is Boundary.PERIODIC:
        return np.roll(x, -1, axis=-1)
    out = np.zeros_like(x)
    out[..., :-1] = x[..., 1:]
    return out


def shift_right(x: np.ndarray, boundary: Boundary) -> np.ndarray:
    """Neighbor value u_{i-1}, ghost resolved by the boundary rule."""
    if boundary is Boundary.PERIODIC:
        return np.roll(x, 1, axis=-1)
    out = np.zeros_like(x)
    out[..., 1:] = x[..., :-1]
    return out


def apply_laplacian(x: np.ndarray, trunc: TruncationConfig) -> np.ndarray:
    """Positive-semidefinite second difference: (-u_{i-1} + 2 u_i - u_{i+1})."""
    x = _check_length(x, trunc, "apply_laplacian")
    return 2.0 * x - shift_left(x, trunc.boundary) - shift_right(x, trunc.boundary)


def apply_forward_diff(x: np.ndarray, trunc: TruncationConfig) -> np.ndarray:
    """Forward difference (u_{i+1} - u_i) on the window."""
    x = _check_length(x, trunc, "apply_forward_diff")
    return shift_left(x, trunc.boundary) - x


def difference_energy(x: np.ndarray, trunc: TruncationConfig) -> float:
    """Sum of squared first differences over every edge, boundary edges included.

    Equals <Lx, x> exactly for both boundary rules.  For the zero-Dirichlet
    window this includes the left ghost edge (x_{-N} - 0)^2, which the
    window-restricted forward difference drops.
    """
    x = _check_length(x, trunc, "difference_energy")
    d = apply_forward_diff(x, trunc)
    total = float(np.dot(d, d))
    if trunc.boundary is Boundary.ZERO_DIRICHLET:
        total += float(x[0]) ** 2
    return total


def even_power(x: np.ndarray, p: int) -> np.ndarray:
    """x^{2p} via a repeated-multiplication chain (sign-safe, backend-stable)."""
    sq = x * x
    out = sq.copy() if isinstance(sq, np.ndarray) else sq
    for _ in range(p - 1):
        out = out * sq
    return out


def coupling_nonlinearity(u: np.ndarray, v: np.ndarray, p: int) -> np.ndarray:
    """Component-wise u_i^{2p} v_i (the autocatalytic exchange term)."""
    return even_power(np.asarray(u, dtype=np.float64), p) * np.asarray(v, dtype=np.float64)

def saturation_nonlinearity(u: np.ndarray, p: int) -> np.ndarray:
    """Component-wise u_i^{2p+1} (odd-power self-limiting term)."""
    u = np.asarray(u, dtype=np.float64)
    return even_power(u, p) * u


def eval_drift(
    state: LatticeState,
    t: float,
    params: ModelParams,
    forcing,
    trunc: TruncationConfig,
    check_finite: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic drift pair (du, dv).

    du = -d1*L(u) - a1*u + b1*u^{2p}v - b2*u^{2p+1} + f1(t)
    dv = -d2*L(v) - a2*v - b1*u^{2p}v + b2*u^{2p+1} + f2(t)

    where L is the positive second-difference operator, so -d*L acts as
    lattice diffusion.  ``forcing`` must provide f1(t), f2(t) vectors.
    """
    u, v = state.u, state.v
    cross = coupling_nonlinearity(u, v, params.p)
    damp = saturation_nonlinearity(u, params.p)
    du = (
        -params.d1 * apply_laplacian(u, trunc)
        - params.a1 * u
        + params.b1 * cross
        - params.b2 * damp
        + forcing.f1(t)
    )
    dv = (
        -params.d2 * apply_laplacian(v, trunc)
        - params.a2 * v
        - params.b1 * cross
        + params.b2 * damp
        + forcing.f2(t)
    )
    if check_finite:
        for arr in (du, dv):
            if not np.all(np.isfinite(arr)):
                site = int(np.flatnonzero(~np.isfinite(arr))[0]) - trunc.half_width
                raise BlowUpError(f"non-finite drift at site {site}", site=site)
    return du, dv


def energy(state: LatticeState, params: ModelParams) -> float:
    """Weighted squared norm b2*||u||^2 + b1*||v||^2."""
    return float(
        params.b2 * np.dot(state.u, state.u) + params.b1 * np.dot(state.v, state.v)
    )


def cross_term_inequality(
    x: float, y: float, p: int, b1: float, b2: float, rtol: float = 1e-12
) -> bool:
    """True iff 2 b1 b2 x^{2p+1} y - x^{2p}(b2^2 x^2 + b1^2 y^2) <= slack.

    The expression equals -x^{2p} (b2 x - b1 y)^2, so it is nonpositive for
    every real pair; the slack absorbs floating-point rounding only.
    """
    x2p = float(x) ** (2 * p)
    lhs = 2.0 * b1 * b2 * x2p * x * y - x2p * (b2 * b2 * x * x + b1 * b1 * y * y)
    scale = 1.0 + abs(2.0 * b1 * b2 * x2p * x * y) + abs(x2p * (b2 * b2 * x * x + b1 * b1 * y * y))
    return lhs <= rtol * scale


def local_lipschitz_constants(n: float, p: int) -> tuple[float, float]:
    """Conservative Lipschitz constants for the nonlinearities on a ball.

    For states with component norms at most ``n``:

      ||F(u1,v1) - F(u2,v2)||^2 <= c1 (||u1-u2||^2 + ||v1-v2||^2)
      ||G(u1)    - G(u2)   ||^2 <= c2 ||u1-u2||^2

    with F the coupling and G the saturation term.  Both constants are
    polynomial of degree 4p in n; they are valid, not sharp.
    """
    if n <= 0:
        raise ValueError("radius n must be positive")
    base = (1.0 + float(n)) ** (4 * p)
    c1 = 8.0 * p * p * base
    c2 = (2 * p + 1) ** 2 * base
    return c1, c2
