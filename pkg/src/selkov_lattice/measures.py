"""Empirical measures on truncated lattice states: moments and tails."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class EmpiricalMeasure:
    """Weighted sample cloud of (u, v) states.

    ``u`` and ``v`` are (n_atoms, n_sites) arrays; weights are
    nonnegative and sum to one.
    """

    u: np.ndarray
    v: np.ndarray
    weights: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.u = np.atleast_2d(np.asarray(self.u, dtype=np.float64))
        self.v = np.atleast_2d(np.asarray(self.v, dtype=np.float64))
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.u.shape != self.v.shape:
            raise ValueError("u and v sample arrays must have equal shapes")
        if self.weights.shape != (self.u.shape[0],):
            raise ValueError("one weight per atom required")
        if np.any(self.weights < 0):
            raise ValueError("weights must be nonnegative")
        total = float(self.weights.sum())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1 (got {total!r})")

    @classmethod
    def from_states(cls, states, weights=None, meta=None) -> "EmpiricalMeasure":
        u = np.stack([s.u for s in states])
        v = np.stack([s.v for s in states])
        n = u.shape[0]
        w = np.full(n, 1.0 / n) if weights is None else np.asarray(weights, float)
        return cls(u, v, w, meta=dict(meta or {}))

    @classmethod
    def dirac(cls, state, meta=None) -> "EmpiricalMeasure":
        return cls(state.u[None, :], state.v[None, :], np.array([1.0]),
                   meta=dict(meta or {}))

    @property
    def n_atoms(self) -> int:
        return self.u.shape[0]

    @property
    def n_sites(self) -> int:
        return self.u.shape[1]

    def atoms_flat(self) -> np.ndarray:
        """Atoms as rows in the product space, shape (n_atoms, 2*n_sites)."""
        return np.concatenate([self.u, self.v], axis=1)

    def subsample(self, n: int, gen: np.random.Generator) -> "EmpiricalMeasure":
        """Uniform-weight subsample of at most n atoms (by weight)."""
        if self.n_atoms <= n:
            return self
        idx = gen.choice(self.n_atoms, size=n, replace=False, p=self.weights)
        idx.sort()
        w = np.full(n, 1.0 / n)
        return EmpiricalMeasure(self.u[idx], self.v[idx], w, meta=dict(self.meta))

    def resample(self, gen: np.random.Generator, n: int | None = None) -> "EmpiricalMeasure":
        """Bootstrap resample with replacement."""
        n = self.n_atoms if n is None else n
        idx = gen.choice(self.n_atoms, size=n, replace=True, p=self.weights)
        w = np.full(n, 1.0 / n)
        return EmpiricalMeasure(self.u[idx], self.v[idx], w, meta=dict(self.meta))

    def translate(self, du: np.ndarray, dv: np.ndarray) -> "EmpiricalMeasure":
        return EmpiricalMeasure(self.u + du, self.v + dv, self.weights.copy(),
                                meta=dict(self.meta))


def second_moment(mu: EmpiricalMeasure) -> float:
    """Weighted mean of ||u||^2 + ||v||^2 over atoms."""
    per_atom = np.einsum("ij,ij->i", mu.u, mu.u) + np.einsum("ij,ij->i", mu.v, mu.v)
    return float(np.dot(mu.weights, per_atom))


def weighted_second_moment(mu: EmpiricalMeasure, b1: float, b2: float) -> float:
    """Energy-weighted variant b2*||u||^2 + b1*||v||^2."""
    per_atom = b2 * np.einsum("ij,ij->i", mu.u, mu.u) + b1 * np.einsum("ij,ij->i", mu.v, mu.v)
    return float(np.dot(mu.weights, per_atom))


@dataclass(frozen=True)
class CutoffProfile:
    """Smooth cutoff: 0 on |s| <= 1, 1 on |s| >= 2, cubic smoothstep between."""

    def __call__(self, s):
        a = np.abs(np.asarray(s, dtype=np.float64))
        r = np.clip(a - 1.0, 0.0, 1.0)
        return r * r * (3.0 - 2.0 * r)

    def weights(self, site_indices: np.ndarray, n: int) -> np.ndarray:
        """theta(i / n) over the window's site indices."""
        return self(site_indices.astype(np.float64) / float(n))


def tail_mass(
    mu: EmpiricalMeasure,
    n: int,
    site_indices: np.ndarray,
    cutoff: CutoffProfile | None = None,
) -> tuple[float, float]:
    """Tail second moment beyond site index n.

    Returns ``(hard, smoothed)`` where the hard tail sums |u_i|^2 + |v_i|^2
    over |i| >= n and the smoothed tail weights every site by
    theta(i/n)^2.  By the cutoff's support, ``hard(2n) <= smoothed(n)
    <= hard(n)``.
    """
    half_width = int(np.max(site_indices))
    if not (1 <= n <= half_width):
        raise ValueError(f"tail index must satisfy 1 <= n <= {half_width}, got {n}")
    cutoff = cutoff or CutoffProfile()
    sq = mu.u * mu.u + mu.v * mu.v
    per_site = mu.weights @ sq  # weighted average over atoms, per site
    hard_mask = np.abs(site_indices) >= n
    hard = float(per_site[hard_mask].sum())
    theta = cutoff.weights(site_indices, n)
    smoothed = float(np.dot(theta * theta, per_site))
    return hard, smoothed
