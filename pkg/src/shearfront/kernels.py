"""Numba kernels for the hot loops: OU path recursion, the cyclic
Crank-Nicolson solve and the fused time-stepping loop.

Everything here works on plain float64/int64 arrays so it stays nopython
and releases the GIL; the dataclass-facing wrappers live in the pde and ou
modules.  Status codes returned by the stepping kernels:

    0  ok
    1  singular cyclic system (pivot underflow)
    2  L1 mass underflowed to zero
    3  more than 40 consecutive positivity halvings
    4  reaction bound cannot be met even with a single fine step
"""

import numpy as np
from numba import njit

OK = 0
SINGULAR = 1
ZERO_MASS = 2
HALVING_LIMIT = 3
DT_UNDERFLOW = 4

_PIVOT_TINY = 1e-300

# Negative dips within this fraction of the peak are roundoff from heavily
# concentrated states (nodes whose true value lies below the arithmetic
# floor relative to the peak) and are clamped to zero; anything larger is a
# real Crank-Nicolson overshoot and triggers a dt retry.
NEG_REL_FLOOR = 1e-13


@njit(cache=True, nogil=True, error_model="numpy")
def ou_path_from_normals(a, r, dt, b0, normals, out):
    """Fill out[0..n] with the implicit order-2.0 strong Taylor recursion.

    For the linear drift -a*b with additive noise r the scheme collapses to
    out[i+1] = A*out[i] + c1*z1 + c2*z2 with a trapezoidal (Pade 1,1) decay
    factor A; z1 drives the Brownian increment, z2 the independent part of
    the time-integrated increment (Kloeden-Platen implicit strong Taylor
    family, specialized).
    """
    n = normals.shape[0]
    denom = 1.0 + 0.5 * a * dt
    A = (1.0 - 0.5 * a * dt) / denom
    c1 = r * np.sqrt(dt) / denom
    c2 = -a * r * dt * np.sqrt(dt) / (2.0 * np.sqrt(3.0) * denom)
    out[0] = b0
    for i in range(n):
        out[i + 1] = A * out[i] + c1 * normals[i, 0] + c2 * normals[i, 1]


@njit(cache=True, nogil=True, error_model="numpy")
def cyclic_cn_solve(beta, diag, rhs, x, z, cp):
    """Solve the periodic tridiagonal system of one Crank-Nicolson step.

    Matrix: diag[i] on the diagonal, -beta on both off-diagonals and in the
    periodic corners.  Rank-one (Sherman-Morrison) correction around two
    standard Thomas sweeps sharing one LU pass.  Returns a status code.
    """
    n = diag.shape[0]
    gamma = -diag[0]
    # z solves against the rank-one carrier u = (gamma, 0, ..., 0, -beta)
    d0 = diag[0] - gamma
    dlast = diag[n - 1] - beta * beta / gamma
    if abs(d0) < _PIVOT_TINY:
        return SINGULAR
    cp[0] = -beta / d0
    x[0] = rhs[0] / d0
    z[0] = gamma / d0
    for i in range(1, n):
        di = dlast if i == n - 1 else diag[i]
        piv = di + beta * cp[i - 1]
        if abs(piv) < _PIVOT_TINY:
            return SINGULAR
        cp[i] = -beta / piv
        ui = -beta if i == n - 1 else 0.0
        x[i] = (rhs[i] + beta * x[i - 1]) / piv
        z[i] = (ui + beta * z[i - 1]) / piv
    for i in range(n - 2, -1, -1):
        x[i] -= cp[i] * x[i + 1]
        z[i] -= cp[i] * z[i + 1]
    denom = 1.0 + z[0] - beta * z[n - 1] / gamma
    if abs(denom) < _PIVOT_TINY:
        return SINGULAR
    fact = (x[0] - beta * x[n - 1] / gamma) / denom
    for i in range(n):
        x[i] -= fact * z[i]
    return OK


@njit(cache=True, nogil=True, error_model="numpy")
def cn_apply(values, f_now, f_next, dt, dy, out, diag, rhs, z, cp):
    """One Crank-Nicolson step of phi_t = 1/2 phi_yy + f(y, t) phi.

    The diffusion stencil (v[m-1] - 2 v[m] + v[m+1]) / (2 dy^2) contains the
    1/2 of the PDE.  Solves
        (I - dt/2 D2 - dt/2 diag(f_next)) out
            = (I + dt/2 D2 + dt/2 diag(f_now)) values.
    """
    n = values.shape[0]
    beta = dt / (4.0 * dy * dy)
    half = 0.5 * dt
    for i in range(n):
        ip = i + 1 if i + 1 < n else 0
        im = i - 1 if i > 0 else n - 1
        diag[i] = 1.0 + 2.0 * beta - half * f_next[i]
        rhs[i] = (1.0 - 2.0 * beta + half * f_now[i]) * values[i] + beta * (values[ip] + values[im])
    return cyclic_cn_solve(beta, diag, rhs, out, z, cp)


@njit(cache=True, nogil=True, error_model="numpy")
def largest_feasible_multiple(b2_bound, start, m_max, dt_fine, safety):
    """Largest m <= m_max with m*dt_fine*max(b2_bound[start..start+m]) <= 2*safety.

    b2_bound holds the per-fine-node reaction magnitude bound; the running
    window maximum makes the chosen dt honor the bound at every node the
    step touches.  The window includes the current node: with only the
    forward nodes bounded, the explicit factor 1 + dt*f_now/2 sees
    unbounded dt|f_now| whenever |f| drops along the step, which skews the
    log-growth systematically low.  Returns 0 when even m = 1 is infeasible.
    """
    best = 0
    runmax = b2_bound[start]
    for m in range(1, m_max + 1):
        fb = b2_bound[start + m]
        if fb > runmax:
            runmax = fb
        if m * dt_fine * runmax <= 2.0 * safety:
            best = m
    return best


@njit(cache=True, nogil=True, error_model="numpy")
def evolve_kernel(b1_grid, b2_paths, lam_delta, dt_fine, k_cap, safety, dy,
                  band_lo, band_hi, sample_idx, out_logl1, counters):
    """Fused adaptive Crank-Nicolson evolution from phi = 1 to the last sample.

    b1_grid: (J, M) per-term profile values on the grid.
    b2_paths: (J, n_fine + 1) per-term temporal factors on the fine grid.
    sample_idx: strictly increasing fine-grid indices (>= 1) at which
        log ||phi||_1 is recorded into out_logl1.
    counters: int64[3] out-params (pde steps, renormalizations, halvings).

    Steps land exactly on every sample index; adaptive dt is an integer
    multiple of dt_fine capped by k_cap and by the reaction bound
    dt <= safety * 2 / max|f|.  L1 mass is renormalized into
    [band_lo, band_hi], accumulating the stripped log factor.
    """
    nterms = b1_grid.shape[0]
    M = b1_grid.shape[1]
    n_fine = b2_paths.shape[1] - 1

    v = np.ones(M)
    out = np.empty(M)
    diag = np.empty(M)
    rhs = np.empty(M)
    zwork = np.empty(M)
    cp = np.empty(M)
    f_now = np.empty(M)
    f_next = np.empty(M)

    # per-node upper bound on max_m |f|: |lam*delta| * sum_j sup|b1_j| * |b2_j|
    sup1 = np.empty(nterms)
    for j in range(nterms):
        s = 0.0
        for m in range(M):
            if abs(b1_grid[j, m]) > s:
                s = abs(b1_grid[j, m])
        sup1[j] = s
    b2_bound = np.zeros(n_fine + 1)
    for t in range(n_fine + 1):
        s = 0.0
        for j in range(nterms):
            s += sup1[j] * abs(b2_paths[j, t])
        b2_bound[t] = abs(lam_delta) * s

    log_norm = 0.0
    jnow = 0
    ptr = 0
    nsamples = sample_idx.shape[0]
    halvings = 0
    forced_m = 0  # nonzero after a positivity retry
    while ptr < nsamples:
        target = sample_idx[ptr]
        m_max = min(k_cap, target - jnow)
        m = largest_feasible_multiple(b2_bound, jnow, m_max, dt_fine, safety)
        if m == 0:
            return DT_UNDERFLOW
        if forced_m > 0 and forced_m < m:
            m = forced_m
        dt = m * dt_fine
        for i in range(M):
            a_now = 0.0
            a_next = 0.0
            for j in range(nterms):
                a_now += b1_grid[j, i] * b2_paths[j, jnow]
                a_next += b1_grid[j, i] * b2_paths[j, jnow + m]
            f_now[i] = -lam_delta * a_now
            f_next[i] = -lam_delta * a_next
        status = cn_apply(v, f_now, f_next, dt, dy, out, diag, rhs, zwork, cp)
        if status != OK:
            return status
        peak = 0.0
        for i in range(M):
            if out[i] > peak:
                peak = out[i]
        floor = -NEG_REL_FLOOR * peak
        negative = False
        for i in range(M):
            if out[i] < floor:
                negative = True
                break
        if negative:
            halvings += 1
            counters[2] += 1
            if halvings > 40:
                return HALVING_LIMIT
            forced_m = m // 2
            if forced_m == 0:
                return DT_UNDERFLOW
            continue
        halvings = 0
        forced_m = 0
        for i in range(M):
            v[i] = out[i] if out[i] > 0.0 else 0.0
        jnow += m
        counters[0] += 1
        l1 = 0.0
        for i in range(M):
            l1 += v[i]
        l1 *= dy
        if not (l1 > 0.0) or not np.isfinite(l1):
            return ZERO_MASS
        if l1 < band_lo or l1 > band_hi:
            log_norm += np.log(l1)
            inv = 1.0 / l1
            for i in range(M):
                v[i] *= inv
            l1 = 0.0
            for i in range(M):
                l1 += v[i]
            l1 *= dy
            counters[1] += 1
        if jnow == target:
            out_logl1[ptr] = log_norm + np.log(l1)
            ptr += 1
    return OK


@njit(cache=True, nogil=True, error_model="numpy")
def evolve_scalar_kernel(coeffs, b2_paths, lam_delta, dt_fine, k_cap, safety,
                         band_lo, band_hi, sample_idx, out_logl1, counters):
    """Spatially constant specialization of evolve_kernel.

    When every term's profile is constant on the grid (b(y, t) = b(t)) the
    solution stays exactly y-independent and the Crank-Nicolson step reduces
    to the scalar factor (1 + dt f/2) / (1 - dt f'/2).  Evolving the scalar
    directly is equivalent to the full grid in exact arithmetic but immune
    to the roundoff pile-up that long everywhere-decaying episodes feed into
    the undamped high-frequency CN modes.  dt selection matches
    evolve_kernel node for node.
    """
    nterms = coeffs.shape[0]
    n_fine = b2_paths.shape[1] - 1
    b2_bound = np.zeros(n_fine + 1)
    for t in range(n_fine + 1):
        s = 0.0
        for j in range(nterms):
            s += abs(coeffs[j]) * abs(b2_paths[j, t])
        b2_bound[t] = abs(lam_delta) * s

    phi = 1.0
    log_norm = 0.0
    jnow = 0
    ptr = 0
    nsamples = sample_idx.shape[0]
    halvings = 0
    forced_m = 0
    while ptr < nsamples:
        target = sample_idx[ptr]
        m_max = min(k_cap, target - jnow)
        m = largest_feasible_multiple(b2_bound, jnow, m_max, dt_fine, safety)
        if m == 0:
            return DT_UNDERFLOW
        if forced_m > 0 and forced_m < m:
            m = forced_m
        dt = m * dt_fine
        f_now = 0.0
        f_next = 0.0
        for j in range(nterms):
            f_now += coeffs[j] * b2_paths[j, jnow]
            f_next += coeffs[j] * b2_paths[j, jnow + m]
        f_now *= -lam_delta
        f_next *= -lam_delta
        num = 1.0 + 0.5 * dt * f_now
        den = 1.0 - 0.5 * dt * f_next  # >= 1/2 by the reaction bound
        if num <= 0.0:
            halvings += 1
            counters[2] += 1
            if halvings > 40:
                return HALVING_LIMIT
            forced_m = m // 2
            if forced_m == 0:
                return DT_UNDERFLOW
            continue
        halvings = 0
        forced_m = 0
        phi *= num / den
        jnow += m
        counters[0] += 1
        if not (phi > 0.0) or not np.isfinite(phi):
            return ZERO_MASS
        if phi < band_lo or phi > band_hi:
            log_norm += np.log(phi)
            phi = 1.0
            counters[1] += 1
        if jnow == target:
            out_logl1[ptr] = log_norm + np.log(phi)
            ptr += 1
    return OK
