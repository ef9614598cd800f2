"""Path and ensemble integration of the lattice system with jump noise.

The scheme is explicit Euler for the drift plus additive treatment of
the Wiener and compound-Poisson increments.  Jump coefficients use the
pre-step (left-limit) state; all jumps of a step land at its end.

Pullback runs integrate from ``tau - horizon`` up to ``tau``; ensembles
propagate M independent trajectories whose noise streams derive from a
master seed and the trajectory index, so results are independent of the
thread schedule or chunking.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _kernels
from .backend import backend_name
from .forcing import BoundForcing, ForcingSpec, LevyConfig
from .lattice import (
    LatticeState,
    ModelParams,
    TruncationConfig,
    eval_drift,
)
from .measures import EmpiricalMeasure
from .rng import SeedSpec, generate_noise_block, lambda_salt


class SchemeVariant(Enum):
    # integrand multiplied by the jump size, no compensator
    JUMP_SCALED = "jump-scaled"
    # compensated form: integrand itself, minus dt * integral against nu
    COMPENSATED = "compensated"


@dataclass(frozen=True)
class TimeGrid:
    t_start: float
    t_end: float
    dt: float

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_end <= self.t_start:
            raise ValueError("t_end must exceed t_start")
        n = (self.t_end - self.t_start) / self.dt
        if abs(n - round(n)) > 1e-9 * max(1.0, abs(n)):
            raise ValueError("dt must divide t_end - t_start")
        if round(n) < 1:
            raise ValueError("need at least one step")

    @property
    def n_steps(self) -> int:
        return int(round((self.t_end - self.t_start) / self.dt))

    def times(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.n_steps + 1)

    def step_index(self, t: float) -> int:
        """Grid index for time t, rounding down (left-limit convention)."""
        k = int(math.floor((t - self.t_start) / self.dt + 1e-9))
        return min(max(k, 0), self.n_steps)


@dataclass
class TrajectoryRecord:
    """States of one or more paths sampled at the save times."""

    times: np.ndarray          # (n_save,)
    u: np.ndarray              # (n_save, M, S)
    v: np.ndarray              # (n_save, M, S)
    blow_step: np.ndarray      # (M,) step index of blow-up, -1 if none
    site_indices: np.ndarray   # (S,)
    seed: SeedSpec | None = None

    @property
    def n_paths(self) -> int:
        return self.u.shape[1]

    def blown_fraction(self) -> float:
        return float(np.mean(self.blow_step >= 0))

    def path_state(self, m: int, row: int) -> LatticeState:
        return LatticeState(self.u[row, m].copy(), self.v[row, m].copy())


class InitialLaw:
    """Factory for initial states of ensemble members."""

    def __init__(self, kind: str, state: LatticeState | None = None,
                 sd: float = 0.0, measure: "EmpiricalMeasure | None" = None):
        if kind not in ("point", "gaussian", "resample"):
            raise ValueError(f"unknown initial law kind {kind!r}")
        if kind in ("point", "gaussian") and state is None:
            raise ValueError(f"{kind} law needs a state")
        if kind == "gaussian" and sd < 0:
            raise ValueError("gaussian cloud needs sd >= 0")
        if kind == "resample" and measure is None:
            raise ValueError("resample law needs a measure")
        self.kind = kind
        self.state = state
        self.sd = sd
        self.measure = measure

    @classmethod
    def point(cls, state: LatticeState) -> "InitialLaw":
        return cls("point", state=state)

    @classmethod
    def gaussian(cls, mean: LatticeState, sd: float) -> "InitialLaw":
        return cls("gaussian", state=mean, sd=sd)

    @classmethod
    def resample(cls, measure: "EmpiricalMeasure") -> "InitialLaw":
        return cls("resample", measure=measure)

    def draw(self, gen: np.random.Generator, n_sites: int) -> tuple[np.ndarray, np.ndarray]:
        if self.kind == "point":
            return self.state.u.copy(), self.state.v.copy()
        if self.kind == "gaussian":
            u = self.state.u + self.sd * gen.normal(size=n_sites)
            v = self.state.v + self.sd * gen.normal(size=n_sites)
            return u, v
        j = int(gen.choice(self.measure.n_atoms, p=self.measure.weights))
        return self.measure.u[j].copy(), self.measure.v[j].copy()


@dataclass
class EnsembleConfig:
    n_paths: int
    initial: InitialLaw
    seed: SeedSpec
    common_noise: bool = False
    chunk_size: int = 256
    threads: int = 1

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError("need at least one trajectory")


def _ipow_arr(x: np.ndarray, e: int) -> np.ndarray:
    if e == 0:
        return np.ones_like(x)
    r = x
    for _ in range(e - 1):
        r = r * x
    return r


class _Tables:
    """Per-step envelope tables and per-mode profiles for the kernels."""

    def __init__(self, bound: BoundForcing, levy: LevyConfig, step_times: np.ndarray):
        spec = bound.spec
        k = spec.k_modes
        n = step_times.shape[0]
        self.f1_env = np.asarray(spec.f1.envelope(step_times), dtype=np.float64)
        self.f2_env = np.asarray(spec.f2.envelope(step_times), dtype=np.float64)
        self.f1_prof = bound.f1_profile
        self.f2_prof = bound.f2_profile
        self.h_env = np.empty((n, k))
        self.kap_env = np.empty((n, k))
        self.del_env = np.empty((n, k))
        self.sig_env = np.empty((n, k))
        self.jmp_env = np.empty((n, k))
        for j in range(k):
            self.h_env[:, j] = spec.h[j].envelope(step_times)
            self.kap_env[:, j] = spec.kappa[j].envelope(step_times)
            self.del_env[:, j] = spec.delta[j].envelope(step_times)
            self.sig_env[:, j] = spec.sigma[j].envelope(step_times)
            self.jmp_env[:, j] = spec.jump[j].state.envelope(step_times)
        self.h_prof = bound.h_profiles
        self.kap_prof = bound.kappa_profiles
        self.del_prof = bound.delta_profiles
        self.sig_pow = np.array([s.power for s in spec.sigma], dtype=np.int64)
        self.jmp_pow = np.array([jk.state.power for jk in spec.jump], dtype=np.int64)
        self.nu_mass = np.full(k, levy.measure_mass_small())
        self.nu_fint = np.array(
            [levy.measure_integral_small(lambda y: float(jk.size_factor(y)))
             for jk in spec.jump]
        )


def em_step(
    state: LatticeState,
    t_n: float,
    dt: float,
    params: ModelParams,
    bound: BoundForcing,
    levy: LevyConfig,
    variant: SchemeVariant,
    dW: np.ndarray,
    jumps: list[np.ndarray],
) -> LatticeState:
    """One explicit step; reference implementation used by tests and demos.

    ``dW`` holds K Wiener increments; ``jumps`` holds K arrays of jump
    sizes.  The batched kernels in ``_kernels`` reproduce this map
    exactly; this version favors readability over speed.
    """
    spec = bound.spec
    du, dv = eval_drift(state, t_n, params, bound, bound.trunc, check_finite=False)
    u_new = state.u + dt * du
    v_new = state.v + dt * dv

    lam = params.lam
    for k in range(spec.k_modes):
        h_k = bound.h_vec(k, t_n)
        diff_u = h_k + bound.delta_vec(k, t_n) * spec.sigma[k](t_n, state.u)
        diff_v = h_k + bound.delta_vec(k, t_n) * spec.sigma[k](t_n, state.v)
        u_new = u_new + lam.eps1 * diff_u * dW[k]
        v_new = v_new + lam.gamma1 * diff_v * dW[k]

        kap_k = bound.kappa_vec(k, t_n)
        jst_u = bound.delta_vec(k, t_n) * spec.jump[k].state(t_n, state.u)
        jst_v = bound.delta_vec(k, t_n) * spec.jump[k].state(t_n, state.v)
        acc_u = np.zeros_like(u_new)
        acc_v = np.zeros_like(v_new)
        if variant is SchemeVariant.JUMP_SCALED:
            for y in jumps[k]:
                f = float(spec.jump[k].size_factor(y))
                acc_u = acc_u + (kap_k + jst_u * f) * y
                acc_v = acc_v + (kap_k + jst_v * f) * y
        else:
            for y in jumps[k]:
                f = float(spec.jump[k].size_factor(y))
                acc_u = acc_u + (kap_k + jst_u * f)
                acc_v = acc_v + (kap_k + jst_v * f)
            nu_mass = levy.measure_mass_small()
            nu_fint = levy.measure_integral_small(
                lambda y: float(spec.jump[k].size_factor(y))
            )
            acc_u = acc_u - dt * (kap_k * nu_mass + jst_u * nu_fint)
            acc_v = acc_v - dt * (kap_k * nu_mass + jst_v * nu_fint)
        u_new = u_new + lam.eps2 * acc_u
        v_new = v_new + lam.gamma2 * acc_v

    out = LatticeState(u_new, v_new)
    if not out.is_finite():
        bad = ~(np.isfinite(u_new) & np.isfinite(v_new))
        site = int(np.flatnonzero(bad)[0]) - bound.trunc.half_width
        from .lattice import BlowUpError

        raise BlowUpError(f"blow-up at site {site}", site=site)
    return out


def _run_chunk(
    u0: np.ndarray,
    v0: np.ndarray,
    path_ids: np.ndarray,
    grid: TimeGrid,
    params: ModelParams,
    bound: BoundForcing,
    levy: LevyConfig,
    variant: SchemeVariant,
    seed: SeedSpec,
    noise_salt: int,
    tables: _Tables,
    save_mark: np.ndarray,
    n_save: int,
):
    spec = bound.spec
    n_paths = u0.shape[0]
    n_sites = u0.shape[1]
    n_steps = grid.n_steps
    k = spec.k_modes

    dW = np.empty((n_paths, n_steps, k))
    jsum_y = np.empty((n_paths, n_steps, k))
    jsum_fy = np.empty((n_paths, n_steps, k))
    jcount = np.empty((n_paths, n_steps, k))
    jsum_f = np.empty((n_paths, n_steps, k))
    for i, pid in enumerate(path_ids):
        gen = seed.noise_stream(int(pid), salt=noise_salt)
        block = generate_noise_block(gen, n_steps, grid.dt, levy, spec.jump)
        dW[i] = block.dW
        jsum_y[i] = block.sum_y
        jsum_fy[i] = block.sum_fy
        jcount[i] = block.count
        jsum_f[i] = block.sum_f

    lam = params.lam
    u = u0.copy()
    v = v0.copy()
    u_out = np.empty((n_save, n_paths, n_sites))
    v_out = np.empty((n_save, n_paths, n_sites))
    blow = np.full(n_paths, -1, dtype=np.int64)
    kernel = (
        _kernels.em_batch_numba
        if backend_name() == "numba"
        else _kernels.em_batch_numpy
    )
    kernel(
        u, v, dW, jsum_y, jsum_fy, jcount, jsum_f,
        tables.f1_env, tables.f2_env, tables.f1_prof, tables.f2_prof,
        tables.h_env, tables.kap_env, tables.del_env, tables.sig_env, tables.jmp_env,
        tables.h_prof, tables.kap_prof, tables.del_prof,
        tables.sig_pow, tables.jmp_pow, tables.nu_mass, tables.nu_fint,
        params.d1, params.d2, params.a1, params.a2, params.b1, params.b2, params.p,
        lam.eps1, lam.eps2, lam.gamma1, lam.gamma2,
        grid.dt, bound.trunc.boundary.value == "periodic",
        0 if variant is SchemeVariant.JUMP_SCALED else 1,
        save_mark, u_out, v_out, blow,
    )
    return u_out, v_out, blow


def integrate_ensemble(
    cfg: EnsembleConfig,
    grid: TimeGrid,
    params: ModelParams,
    forcing: ForcingSpec,
    levy: LevyConfig,
    trunc: TruncationConfig,
    variant: SchemeVariant = SchemeVariant.COMPENSATED,
    save_times: np.ndarray | None = None,
) -> TrajectoryRecord:
    """Propagate M trajectories over the grid; returns saved states.

    Noise streams derive from (master seed, salt, path index); with
    ``common_noise`` the salt is zero so ensembles that differ only in
    the noise intensity share their driving noise pathwise.  Results are
    assembled in path order, independent of chunking or thread count.
    """
    bound = forcing.bind(trunc)
    step_times = grid.times()[:-1]
    tables = _Tables(bound, levy, step_times)

    if save_times is None:
        save_idx = np.array([grid.n_steps], dtype=np.int64)
    else:
        save_idx = np.unique([grid.step_index(t) for t in np.atleast_1d(save_times)]).astype(np.int64)
    save_mark = np.full(grid.n_steps + 1, -1, dtype=np.int64)
    save_mark[save_idx] = np.arange(save_idx.shape[0])
    n_save = save_idx.shape[0]

    salt = 0 if cfg.common_noise else lambda_salt(params.lam.as_tuple())

    n_sites = trunc.n_sites
    u0 = np.empty((cfg.n_paths, n_sites))
    v0 = np.empty((cfg.n_paths, n_sites))
    for m in range(cfg.n_paths):
        u0[m], v0[m] = cfg.initial.draw(cfg.seed.init_stream(m), n_sites)

    path_ids = np.arange(cfg.n_paths)
    chunks = [
        slice(s, min(s + cfg.chunk_size, cfg.n_paths))
        for s in range(0, cfg.n_paths, cfg.chunk_size)
    ]

    def work(sl: slice):
        return _run_chunk(
            u0[sl], v0[sl], path_ids[sl], grid, params, bound, levy,
            variant, cfg.seed, salt, tables, save_mark, n_save,
        )

    if cfg.threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(work, chunks))
    else:
        results = [work(sl) for sl in chunks]

    u_all = np.concatenate([r[0] for r in results], axis=1)
    v_all = np.concatenate([r[1] for r in results], axis=1)
    blow = np.concatenate([r[2] for r in results])
    return TrajectoryRecord(
        times=grid.times()[save_idx],
        u=u_all,
        v=v_all,
        blow_step=blow,
        site_indices=trunc.site_indices(),
        seed=cfg.seed,
    )


def integrate_path(
    initial: LatticeState,
    grid: TimeGrid,
    params: ModelParams,
    forcing: ForcingSpec,
    levy: LevyConfig,
    trunc: TruncationConfig,
    seed: SeedSpec,
    variant: SchemeVariant = SchemeVariant.COMPENSATED,
    save_times: np.ndarray | None = None,
    path_index: int = 0,
    common_noise: bool = True,
) -> TrajectoryRecord:
    """Single trajectory; thin wrapper over the batched ensemble runner.

    ``path_index`` selects which noise stream drives the path, so a
    single path can be replayed against any member of an ensemble.
    """
    cfg = EnsembleConfig(
        n_paths=1,
        initial=InitialLaw.point(initial),
        seed=seed,
        common_noise=common_noise,
    )
    return _integrate_single(cfg, grid, params, forcing, levy, trunc,
                             variant, save_times, path_index)


def _integrate_single(cfg, grid, params, forcing, levy, trunc, variant,
                      save_times, path_index):
    bound = forcing.bind(trunc)
    step_times = grid.times()[:-1]
    tables = _Tables(bound, levy, step_times)
    if save_times is None:
        save_idx = np.array([grid.n_steps], dtype=np.int64)
    else:
        save_idx = np.unique([grid.step_index(t) for t in np.atleast_1d(save_times)]).astype(np.int64)
    save_mark = np.full(grid.n_steps + 1, -1, dtype=np.int64)
    save_mark[save_idx] = np.arange(save_idx.shape[0])
    salt = 0 if cfg.common_noise else lambda_salt(params.lam.as_tuple())
    u0 = cfg.initial.state.u[None, :]
    v0 = cfg.initial.state.v[None, :]
    u_out, v_out, blow = _run_chunk(
        u0, v0, np.array([path_index]), grid, params, bound, levy, variant,
        cfg.seed, salt, tables, save_mark, save_idx.shape[0],
    )
    return TrajectoryRecord(
        times=grid.times()[save_idx],
        u=u_out,
        v=v_out,
        blow_step=blow,
        site_indices=trunc.site_indices(),
        seed=cfg.seed,
    )


def record_measure(rec: TrajectoryRecord, row: int, meta: dict | None = None) -> EmpiricalMeasure:
    """Empirical measure from the saved states at one save time.

    Blown-up paths are excluded; their count lands in the metadata.
    """
    ok = rec.blow_step < 0
    n_ok = int(ok.sum())
    if n_ok == 0:
        raise ValueError("all paths blew up; no measure to build")
    info = dict(meta or {})
    info["n_excluded_blowups"] = int(rec.n_paths - n_ok)
    info["t"] = float(rec.times[row])
    w = np.full(n_ok, 1.0 / n_ok)
    return EmpiricalMeasure(rec.u[row, ok], rec.v[row, ok], w, meta=info)


def pullback_ensemble(
    tau: float,
    horizon: float,
    cfg: EnsembleConfig,
    params: ModelParams,
    forcing: ForcingSpec,
    levy: LevyConfig,
    trunc: TruncationConfig,
    dt: float,
    variant: SchemeVariant = SchemeVariant.COMPENSATED,
    save_times: np.ndarray | None = None,
) -> tuple[EmpiricalMeasure, TrajectoryRecord]:
    """Sample the initial law at tau - horizon, integrate to tau.

    Returns the empirical law at tau plus the full record (useful when
    intermediate save times were requested).  Horizon zero returns the
    initial law itself.
    """
    if horizon < 0:
        raise ValueError("pullback horizon must be nonnegative")
    if horizon == 0.0:
        n_sites = trunc.n_sites
        u0 = np.empty((cfg.n_paths, n_sites))
        v0 = np.empty((cfg.n_paths, n_sites))
        for m in range(cfg.n_paths):
            u0[m], v0[m] = cfg.initial.draw(cfg.seed.init_stream(m), n_sites)
        w = np.full(cfg.n_paths, 1.0 / cfg.n_paths)
        measure = EmpiricalMeasure(u0, v0, w, meta={"tau": tau, "horizon": 0.0})
        rec = TrajectoryRecord(
            times=np.array([tau]),
            u=u0[None, :, :],
            v=v0[None, :, :],
            blow_step=np.full(cfg.n_paths, -1, dtype=np.int64),
            site_indices=trunc.site_indices(),
            seed=cfg.seed,
        )
        return measure, rec
    grid = TimeGrid(tau - horizon, tau, dt)
    req = [tau] if save_times is None else list(np.atleast_1d(save_times))
    if tau not in req:
        req.append(tau)
    rec = integrate_ensemble(cfg, grid, params, forcing, levy, trunc, variant,
                             save_times=np.asarray(req))
    row = int(np.argmin(np.abs(rec.times - tau)))
    meta = {
        "tau": tau,
        "horizon": horizon,
        "lambda": params.lam.as_tuple(),
        "master_seed": cfg.seed.master_seed,
    }
    return record_measure(rec, row, meta), rec
