"""Batched Euler-Maruyama-with-jumps stepping kernels.

Two interchangeable implementations of the same update:

* ``em_batch_numba`` -- explicit loops compiled with ``numba.njit``;
* ``em_batch_numpy`` -- vectorized pure-numpy fallback.

Both perform the identical floating-point operations in the identical
order (same association, no fused multiply-add), so their outputs agree
bitwise.  Any change to one must be mirrored in the other.

State layout: ``u, v`` are ``(M, S)`` arrays (M trajectories, S sites),
updated in place.  Noise enters through pregenerated per-step arrays
(see ``rng.NoiseBlock``).  Time-dependent coefficients arrive as
per-step envelope tables and per-mode site profiles.

The jump term has two variants:

* variant 0 (jump-scaled): each jump contributes
  ``(kappa_i + delta_i * jstate(t, x_i) * f(y_j)) * y_j``;
* variant 1 (compensated): each jump contributes the integrand itself,
  and the step subtracts ``dt`` times its integral against the jump
  measure restricted to |y| < 1.
"""

from __future__ import annotations

import numpy as np

from .backend import HAS_NUMBA


def em_batch_numpy(
    u, v, dW, jsum_y, jsum_fy, jcount, jsum_f,
    f1_env, f2_env, f1_prof, f2_prof,
    h_env, kap_env, del_env, sig_env, jmp_env,
    h_prof, kap_prof, del_prof,
    sig_pow, jmp_pow, nu_mass, nu_fint,
    d1, d2, a1, a2, b1, b2, p,
    eps1, eps2, gam1, gam2,
    dt, periodic, variant,
    save_mark, u_out, v_out, blow_step,
):
    n_paths, n_sites = u.shape
    n_steps = dW.shape[1]
    k_modes = dW.shape[2]

    if save_mark[0] >= 0:
        u_out[save_mark[0]] = u
        v_out[save_mark[0]] = v

    # frozen (blown-up) rows keep producing discarded candidates; silence
    # the overflow warnings those candidates would raise
    _err = np.errstate(over="ignore", invalid="ignore")
    _err.__enter__()
    active = blow_step < 0
    for n in range(n_steps):
        uu = u
        vv = v
        # neighbor shifts
        if periodic:
            uL = np.roll(uu, -1, axis=1)
            uR = np.roll(uu, 1, axis=1)
            vL = np.roll(vv, -1, axis=1)
            vR = np.roll(vv, 1, axis=1)
        else:
            uL = np.zeros_like(uu)
            uL[:, :-1] = uu[:, 1:]
            uR = np.zeros_like(uu)
            uR[:, 1:] = uu[:, :-1]
            vL = np.zeros_like(vv)
            vL[:, :-1] = vv[:, 1:]
            vR = np.zeros_like(vv)
            vR[:, 1:] = vv[:, :-1]
        lap_u = (2.0 * uu - uL) - uR
        lap_v = (2.0 * vv - vL) - vR

        sq = uu * uu
        x2p = sq
        for _ in range(p - 1):
            x2p = x2p * sq
        cross = x2p * vv
        damp = x2p * uu

        du = (-d1) * lap_u - a1 * uu + b1 * cross - b2 * damp + f1_env[n] * f1_prof
        dv = (-d2) * lap_v - a2 * vv - b1 * cross + b2 * damp + f2_env[n] * f2_prof

        diff_u = np.zeros_like(uu)
        diff_v = np.zeros_like(uu)
        jump_u = np.zeros_like(uu)
        jump_v = np.zeros_like(uu)
        for k in range(k_modes):
            h_nk = h_env[n, k] * h_prof[k]
            dk = del_env[n, k] * del_prof[k]
            sig_nk = dk * (sig_env[n, k] * _ipow_np(uu, sig_pow[k]))
            sig_nk_v = dk * (sig_env[n, k] * _ipow_np(vv, sig_pow[k]))
            w = dW[:, n, k][:, None]
            diff_u = diff_u + (h_nk + sig_nk) * w
            diff_v = diff_v + (h_nk + sig_nk_v) * w

            kap_nk = kap_env[n, k] * kap_prof[k]
            jst_u = dk * (jmp_env[n, k] * _ipow_np(uu, jmp_pow[k]))
            jst_v = dk * (jmp_env[n, k] * _ipow_np(vv, jmp_pow[k]))
            if variant == 0:
                jump_u = jump_u + kap_nk * jsum_y[:, n, k][:, None] + jst_u * jsum_fy[:, n, k][:, None]
                jump_v = jump_v + kap_nk * jsum_y[:, n, k][:, None] + jst_v * jsum_fy[:, n, k][:, None]
            else:
                cmp_kap = jcount[:, n, k][:, None] - dt * nu_mass[k]
                cmp_jst = jsum_f[:, n, k][:, None] - dt * nu_fint[k]
                jump_u = jump_u + kap_nk * cmp_kap + jst_u * cmp_jst
                jump_v = jump_v + kap_nk * cmp_kap + jst_v * cmp_jst

        u_next = uu + dt * du + eps1 * diff_u + eps2 * jump_u
        v_next = vv + dt * dv + gam1 * diff_v + gam2 * jump_v

        ok = np.isfinite(u_next).all(axis=1) & np.isfinite(v_next).all(axis=1)
        newly_blown = active & ~ok
        blow_step[newly_blown] = n
        active = active & ok
        u[active] = u_next[active]
        v[active] = v_next[active]

        row = save_mark[n + 1]
        if row >= 0:
            u_out[row] = u
            v_out[row] = v
    _err.__exit__(None, None, None)


def _ipow_np(x, e):
    if e == 0:
        return np.ones_like(x)
    r = x
    for _ in range(e - 1):
        r = r * x
    return r


if HAS_NUMBA:
    from numba import njit

    @njit(cache=True, nogil=True)
    def _ipow(x, e):
        if e == 0:
            return 1.0
        r = x
        for _ in range(e - 1):
            r = r * x
        return r

    @njit(cache=True, nogil=True)
    def em_batch_numba(
        u, v, dW, jsum_y, jsum_fy, jcount, jsum_f,
        f1_env, f2_env, f1_prof, f2_prof,
        h_env, kap_env, del_env, sig_env, jmp_env,
        h_prof, kap_prof, del_prof,
        sig_pow, jmp_pow, nu_mass, nu_fint,
        d1, d2, a1, a2, b1, b2, p,
        eps1, eps2, gam1, gam2,
        dt, periodic, variant,
        save_mark, u_out, v_out, blow_step,
    ):
        n_paths, n_sites = u.shape
        n_steps = dW.shape[1]
        k_modes = dW.shape[2]

        if save_mark[0] >= 0:
            row0 = save_mark[0]
            for m in range(n_paths):
                for i in range(n_sites):
                    u_out[row0, m, i] = u[m, i]
                    v_out[row0, m, i] = v[m, i]

        u_next = np.empty(n_sites)
        v_next = np.empty(n_sites)
        for n in range(n_steps):
            for m in range(n_paths):
                if blow_step[m] >= 0:
                    continue
                ok = True
                for i in range(n_sites):
                    ui = u[m, i]
                    vi = v[m, i]
                    if periodic:
                        uL = u[m, i + 1] if i + 1 < n_sites else u[m, 0]
                        uR = u[m, i - 1] if i - 1 >= 0 else u[m, n_sites - 1]
                        vL = v[m, i + 1] if i + 1 < n_sites else v[m, 0]
                        vR = v[m, i - 1] if i - 1 >= 0 else v[m, n_sites - 1]
                    else:
                        uL = u[m, i + 1] if i + 1 < n_sites else 0.0
                        uR = u[m, i - 1] if i - 1 >= 0 else 0.0
                        vL = v[m, i + 1] if i + 1 < n_sites else 0.0
                        vR = v[m, i - 1] if i - 1 >= 0 else 0.0
                    lap_u = (2.0 * ui - uL) - uR
                    lap_v = (2.0 * vi - vL) - vR

                    sq = ui * ui
                    x2p = sq
                    for _ in range(p - 1):
                        x2p = x2p * sq
                    cross = x2p * vi
                    damp = x2p * ui

                    du = (-d1) * lap_u - a1 * ui + b1 * cross - b2 * damp + f1_env[n] * f1_prof[i]
                    dv = (-d2) * lap_v - a2 * vi - b1 * cross + b2 * damp + f2_env[n] * f2_prof[i]

                    diff_u = 0.0
                    diff_v = 0.0
                    jump_u = 0.0
                    jump_v = 0.0
                    for k in range(k_modes):
                        h_nk = h_env[n, k] * h_prof[k, i]
                        dk = del_env[n, k] * del_prof[k, i]
                        sig_nk = dk * (sig_env[n, k] * _ipow(ui, sig_pow[k]))
                        sig_nk_v = dk * (sig_env[n, k] * _ipow(vi, sig_pow[k]))
                        w = dW[m, n, k]
                        diff_u = diff_u + (h_nk + sig_nk) * w
                        diff_v = diff_v + (h_nk + sig_nk_v) * w

                        kap_nk = kap_env[n, k] * kap_prof[k, i]
                        jst_u = dk * (jmp_env[n, k] * _ipow(ui, jmp_pow[k]))
                        jst_v = dk * (jmp_env[n, k] * _ipow(vi, jmp_pow[k]))
                        if variant == 0:
                            jump_u = jump_u + kap_nk * jsum_y[m, n, k] + jst_u * jsum_fy[m, n, k]
                            jump_v = jump_v + kap_nk * jsum_y[m, n, k] + jst_v * jsum_fy[m, n, k]
                        else:
                            cmp_kap = jcount[m, n, k] - dt * nu_mass[k]
                            cmp_jst = jsum_f[m, n, k] - dt * nu_fint[k]
                            jump_u = jump_u + kap_nk * cmp_kap + jst_u * cmp_jst
                            jump_v = jump_v + kap_nk * cmp_kap + jst_v * cmp_jst

                    un = ui + dt * du + eps1 * diff_u + eps2 * jump_u
                    vn = vi + dt * dv + gam1 * diff_v + gam2 * jump_v
                    if not (np.isfinite(un) and np.isfinite(vn)):
                        ok = False
                        break
                    u_next[i] = un
                    v_next[i] = vn
                if ok:
                    for i in range(n_sites):
                        u[m, i] = u_next[i]
                        v[m, i] = v_next[i]
                else:
                    blow_step[m] = n

            row = save_mark[n + 1]
            if row >= 0:
                for m in range(n_paths):
                    for i in range(n_sites):
                        u_out[row, m, i] = u[m, i]
                        v_out[row, m, i] = v[m, i]
else:  # pragma: no cover - exercised only without numba
    em_batch_numba = None
