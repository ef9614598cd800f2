"""Reproducible noise generation on counter-based Philox streams.

Every random quantity derives from a 64-bit master seed through
``SeedSequence`` spawn keys, so a trajectory's stream depends only on
(master seed, stream salt, trajectory index) and never on thread
schedule or batch size.  Within a stream, draws are consumed in a fixed
documented order (Wiener block, then jump counts, then jump sizes).
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np

from .forcing import JumpKernel, LevyConfig

# Purpose codes keep unrelated streams on disjoint spawn keys.
_NOISE = 0
_INIT = 1
_ANALYSIS = 2


def lambda_salt(lam_tuple: tuple[float, float, float, float]) -> int:
    """Stable 32-bit salt from a noise-intensity tuple."""
    digest = hashlib.sha256(struct.pack("<4d", *lam_tuple)).digest()
    return int.from_bytes(digest[:4], "little")


@dataclass(frozen=True)
class SeedSpec:
    """Master seed plus the derivation rules for independent substreams."""

    master_seed: int

    def _gen(self, *key: int) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.master_seed, spawn_key=key)
        return np.random.Generator(np.random.Philox(ss))

    def noise_stream(self, trajectory: int, salt: int = 0) -> np.random.Generator:
        return self._gen(_NOISE, salt, trajectory)

    def init_stream(self, trajectory: int) -> np.random.Generator:
        """Initial-condition stream; independent of the noise salt so that
        ensembles coupled through common noise also share initial draws."""
        return self._gen(_INIT, trajectory)

    def analysis_stream(self, purpose: int) -> np.random.Generator:
        """Bootstrap/subsampling streams, disjoint from simulation noise."""
        return self._gen(_ANALYSIS, purpose)


def sample_wiener_increments(
    gen: np.random.Generator, dt: float, k_modes: int, n_steps: int = 1
) -> np.ndarray:
    """Gaussian increments with variance dt, shape (n_steps, k_modes)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    out = gen.normal(0.0, np.sqrt(dt), (n_steps, k_modes))
    return out


def sample_jump_batch(
    gen: np.random.Generator, dt: float, levy: LevyConfig, k_modes: int = 1
) -> list[np.ndarray]:
    """One step of compound-Poisson jumps: per-mode arrays of jump sizes.

    Counts are Poisson(intensity * dt); when ``truncate_small`` is set,
    jumps with |y| >= 1 are discarded (thinning), matching a jump measure
    restricted to the unit ball.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    counts = gen.poisson(levy.poisson_intensity * dt, k_modes)
    out = []
    for k in range(k_modes):
        sizes = levy.jump_law.sample(gen, int(counts[k]))
        if levy.truncate_small:
            sizes = sizes[np.abs(sizes) < 1.0]
        out.append(sizes)
    return out


@dataclass
class NoiseBlock:
    """Pregenerated noise for one trajectory over a full time grid.

    Jump information is stored as per-(step, mode) aggregates, which is
    all the integrator needs because jump coefficients are evaluated at
    the pre-step state:

      sum_y    -- sum of jump sizes y_j
      sum_fy   -- sum of size_factor(y_j) * y_j
      count    -- number of (kept) jumps
      sum_f    -- sum of size_factor(y_j)
    """

    dW: np.ndarray       # (n_steps, K)
    sum_y: np.ndarray    # (n_steps, K)
    sum_fy: np.ndarray   # (n_steps, K)
    count: np.ndarray    # (n_steps, K)
    sum_f: np.ndarray    # (n_steps, K)


def generate_noise_block(
    gen: np.random.Generator,
    n_steps: int,
    dt: float,
    levy: LevyConfig,
    jump_kernels: tuple[JumpKernel, ...],
) -> NoiseBlock:
    """Draw all noise for one trajectory in a fixed consumption order."""
    k_modes = len(jump_kernels)
    dW = gen.normal(0.0, np.sqrt(dt), (n_steps, k_modes))
    counts = gen.poisson(levy.poisson_intensity * dt, (n_steps, k_modes))
    total = int(counts.sum())
    sizes = levy.jump_law.sample(gen, total)

    n_seg = n_steps * k_modes
    seg_id = np.repeat(np.arange(n_seg), counts.reshape(-1))
    if levy.truncate_small:
        keep = np.abs(sizes) < 1.0
        sizes = sizes[keep]
        seg_id = seg_id[keep]

    mode_of_seg = seg_id % k_modes
    fvals = np.empty_like(sizes)
    for k in range(k_modes):
        mask = mode_of_seg == k
        fvals[mask] = jump_kernels[k].size_factor(sizes[mask])

    shape = (n_steps, k_modes)
    sum_y = np.bincount(seg_id, weights=sizes, minlength=n_seg).reshape(shape)
    sum_fy = np.bincount(seg_id, weights=fvals * sizes, minlength=n_seg).reshape(shape)
    sum_f = np.bincount(seg_id, weights=fvals, minlength=n_seg).reshape(shape)
    kept = np.bincount(seg_id, minlength=n_seg).reshape(shape).astype(np.float64)
    return NoiseBlock(dW=dW, sum_y=sum_y, sum_fy=sum_fy, count=kept, sum_f=sum_f)
