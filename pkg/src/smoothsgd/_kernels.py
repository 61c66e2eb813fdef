"""Hot trial loops: compiled (numba) and vectorized-numpy implementations.

The ensemble kernel advances every trial of a Monte-Carlo run and streams the
per-trial accumulators the convergence checks need.  Two interchangeable
backends exist:

  * a numba @njit kernel, one sequential loop per trial, prange over trials;
  * a pure-numpy fallback that advances all trials in lockstep.

Backend selection: numpy when the SMOOTHSGD_NO_NUMBA environment variable is
set (or numba is unavailable), numba otherwise.  The integer RNG is identical
bit for bit in both; float trajectories agree bit for bit wherever only
arithmetic is involved (quadratic/polynomial objectives, uniform noise) and
to libm-vs-SIMD ulp accuracy elsewhere, because numpy's vectorized exp/log
are allowed to differ from libm in the last bit.

All summation is compensated (Kahan) so 1e8-step tail averages keep full
double precision.
"""

from __future__ import annotations

import math
import os

import numpy as np

from .noise import GOLDEN, KIND_GAUSSIAN, KIND_UNIFORM, KIND_ZERO, MASK64

OBJ_QUADRATIC = 0
OBJ_ASYM_BUMP = 1
OBJ_SYM_BUMP = 2
OBJ_POLY = 3

W0_FIXED = 0
W0_UNIFORM = 1

DIVERGENCE_LIMIT = 1.0e6

# per-trial output columns
COL_FINAL_W = 0
COL_TAIL_W = 1
COL_TAIL_V = 2
COL_TAIL_EPS = 3
COL_SS_DIST_V = 4
COL_SUM_V = 5
COL_SS_PERT_GRAD = 6
COL_DIVERGED = 7
COL_DIVERGE_STEP = 8
N_COLS = 9

_U = np.uint64
U_GOLDEN = _U(GOLDEN)
U_M1 = _U(0xBF58476D1CE4E5B9)
U_M2 = _U(0x94D049BB133111EB)
U_30 = _U(30)
U_27 = _U(27)
U_31 = _U(31)
U_11 = _U(11)
TWO_NEG53 = 2.0 ** -53
TWO_NEG54 = 2.0 ** -54
EXP_FLOOR = -745.0

_FORCE_NUMPY = bool(os.environ.get("SMOOTHSGD_NO_NUMBA", ""))

try:  # pragma: no cover - exercised implicitly by backend()
    if _FORCE_NUMPY:
        raise ImportError("numpy backend forced by SMOOTHSGD_NO_NUMBA")
    from numba import njit, prange

    HAS_NUMBA = True
except ImportError:  # pragma: no cover
    HAS_NUMBA = False

    def njit(*args, **kwargs):  # type: ignore
        def wrap(f):
            return f
        return wrap if not (args and callable(args[0])) else args[0]

    prange = range  # type: ignore


def backend() -> str:
    """Active kernel backend: 'numba' or 'numpy'."""
    return "numba" if HAS_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# scalar pieces shared by the numba kernel and the python reference replay
# ---------------------------------------------------------------------------

def _py_mix13(z):
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & MASK64
    return (z ^ (z >> 31)) & MASK64


def _py_grad(obj_kind: int, a: float, gcoeffs, w: float) -> float:
    if obj_kind == OBJ_QUADRATIC:
        return w - a
    if obj_kind == OBJ_ASYM_BUMP or obj_kind == OBJ_SYM_BUMP:
        x = w / a
        s = 1.0 - x * x
        b1 = 0.0
        if s > 0.0:
            arg = 1.0 - 1.0 / s
            if arg >= EXP_FLOOR:
                b1 = math.exp(arg) * (-2.0 * x / (s * s))
        if obj_kind == OBJ_ASYM_BUMP:
            return (w - 1.0) - b1
        return w + a * b1
    acc = 0.0
    for j in range(len(gcoeffs) - 1, -1, -1):
        acc = acc * w + gcoeffs[j]
    return acc


def _py_icdf(p: float) -> float:
    from .noise import normal_icdf

    return normal_icdf(p)


def reference_trial(obj_kind, obj_a, gcoeffs, noise_kind, nr, ns, nbeta,
                    eta, T, w0_kind, w0_a, w0_b, seed, vstar, t0):
    """Pure-python replay of one trial, op for op the numba kernel's loop.

    Returns the full (w_t), (v_t), (eps_{t+1}) sequences plus the same
    Kahan-compensated accumulators, for bit-level audits at small T.
    """
    state = seed & MASK64

    def next_unit():
        nonlocal state
        state = (state + GOLDEN) & MASK64
        return (_py_mix13(state) >> 11) * TWO_NEG53

    # position 0 of the stream always feeds the initializer, so fixed-w0 and
    # uniform-w0 runs see identical noise sequences afterwards
    u0 = next_unit()
    if w0_kind == W0_UNIFORM:
        w = w0_a + (w0_b - w0_a) * u0
    else:
        w = w0_a

    ws = [w]
    vs = []
    epss = []
    acc = {name: (0.0, 0.0) for name in ("tail_w", "tail_v", "tail_eps", "ss_dist", "sum_v", "spg")}

    def kahan(name, x):
        s, c = acc[name]
        y = x - c
        t = s + y
        acc[name] = (t, (t - s) - y)

    for t in range(T):
        g = _py_grad(obj_kind, obj_a, gcoeffs, w)
        if t >= 1:
            kahan("spg", g * g)
        v = w - eta * g
        vs.append(v)
        d = v - vstar
        kahan("ss_dist", d * d)
        kahan("sum_v", v)
        if t >= t0:
            kahan("tail_v", v)
        u = next_unit()
        if noise_kind == KIND_ZERO:
            eps = 0.0
        elif noise_kind == KIND_UNIFORM:
            eps = (2.0 * u - 1.0) * nr
        elif noise_kind == KIND_GAUSSIAN:
            eps = _py_icdf(u + TWO_NEG54) * ns
        else:
            eps = (1.0 + nbeta * math.sin(w)) * ((2.0 * u - 1.0) * nr)
        epss.append(eps)
        w = v - eta * eps
        ws.append(w)
        if t >= t0:
            kahan("tail_w", w)
            kahan("tail_eps", eps)
    g = _py_grad(obj_kind, obj_a, gcoeffs, w)
    kahan("spg", g * g)
    v = w - eta * g
    vs.append(v)
    d = v - vstar
    kahan("ss_dist", d * d)
    kahan("sum_v", v)
    return ws, vs, epss, {k: s for k, (s, _) in acc.items()}


# ---------------------------------------------------------------------------
# numba kernel
# ---------------------------------------------------------------------------

if HAS_NUMBA:

    @njit(cache=True, inline="always")
    def _nb_mix13(z):
        z = (z ^ (z >> U_30)) * U_M1
        z = (z ^ (z >> U_27)) * U_M2
        return z ^ (z >> U_31)

    @njit(cache=True, inline="always")
    def _nb_grad(obj_kind, a, gcoeffs, w):
        if obj_kind == OBJ_QUADRATIC:
            return w - a
        if obj_kind == OBJ_ASYM_BUMP or obj_kind == OBJ_SYM_BUMP:
            x = w / a
            s = 1.0 - x * x
            b1 = 0.0
            if s > 0.0:
                arg = 1.0 - 1.0 / s
                if arg >= EXP_FLOOR:
                    b1 = math.exp(arg) * (-2.0 * x / (s * s))
            if obj_kind == OBJ_ASYM_BUMP:
                return (w - 1.0) - b1
            return w + a * b1
        acc = 0.0
        for j in range(len(gcoeffs) - 1, -1, -1):
            acc = acc * w + gcoeffs[j]
        return acc

    @njit(cache=True)
    def _nb_icdf(p):
        q = p - 0.5
        if abs(q) <= 0.425:
            r = 0.180625 - q * q
            num = (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r
                        + 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r
                      + 1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r
                    + 1.3314166789178437745e2) * r + 3.3871328727963666080e0)
            den = (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r
                        + 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r
                      + 5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r
                    + 4.2313330701600911252e1) * r + 1.0)
            return q * num / den
        if q < 0.0:
            r = p
        else:
            r = 1.0 - p
        r = math.sqrt(-math.log(r))
        if r <= 5.0:
            r = r - 1.6
            num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r
                        + 2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r
                      + 3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r
                    + 4.63033784615654529590e0) * r + 1.42343711074968357734e0)
            den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r
                        + 1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r
                      + 6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r
                    + 2.05319162663775882187e0) * r + 1.0)
        else:
            r = r - 5.0
            num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
                        + 1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r
                      + 2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r
                    + 5.46378491116411436990e0) * r + 6.65790464350110377720e0)
            den = (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r
                        + 1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r
                      + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r
                    + 5.99832206555887937690e-1) * r + 1.0)
        val = num / den
        if q < 0.0:
            return -val
        return val

    @njit(cache=True, parallel=True)
    def _nb_ensemble(obj_kind, obj_a, gcoeffs, noise_kind, nr, ns, nbeta,
                     eta, T, w0_kind, w0_a, w0_b, seeds, vstar, t0,
                     stride, dec, out):
        n = seeds.shape[0]
        record = dec.shape[1] > 0
        for i in prange(n):
            state = seeds[i]
            # stream position 0 feeds the initializer for every w0 law
            state = state + U_GOLDEN
            u = np.float64(_nb_mix13(state) >> U_11) * TWO_NEG53
            if w0_kind == W0_UNIFORM:
                w = w0_a + (w0_b - w0_a) * u
            else:
                w = w0_a
            tail_w = 0.0
            c_tail_w = 0.0
            tail_v = 0.0
            c_tail_v = 0.0
            tail_e = 0.0
            c_tail_e = 0.0
            ss = 0.0
            c_ss = 0.0
            sv = 0.0
            c_sv = 0.0
            spg = 0.0
            c_spg = 0.0
            diverged = 0.0
            dstep = -1.0
            for t in range(T):
                if record and t % stride == 0:
                    dec[i, t // stride] = w
                g = _nb_grad(obj_kind, obj_a, gcoeffs, w)
                if t >= 1:
                    x = g * g - c_spg
                    tt = spg + x
                    c_spg = (tt - spg) - x
                    spg = tt
                v = w - eta * g
                d = v - vstar
                x = d * d - c_ss
                tt = ss + x
                c_ss = (tt - ss) - x
                ss = tt
                x = v - c_sv
                tt = sv + x
                c_sv = (tt - sv) - x
                sv = tt
                if t >= t0:
                    x = v - c_tail_v
                    tt = tail_v + x
                    c_tail_v = (tt - tail_v) - x
                    tail_v = tt
                state = state + U_GOLDEN
                u = np.float64(_nb_mix13(state) >> U_11) * TWO_NEG53
                if noise_kind == KIND_ZERO:
                    eps = 0.0
                elif noise_kind == KIND_UNIFORM:
                    eps = (2.0 * u - 1.0) * nr
                elif noise_kind == KIND_GAUSSIAN:
                    eps = _nb_icdf(u + TWO_NEG54) * ns
                else:
                    eps = (1.0 + nbeta * math.sin(w)) * ((2.0 * u - 1.0) * nr)
                w = v - eta * eps
                if t >= t0:
                    x = w - c_tail_w
                    tt = tail_w + x
                    c_tail_w = (tt - tail_w) - x
                    tail_w = tt
                    x = eps - c_tail_e
                    tt = tail_e + x
                    c_tail_e = (tt - tail_e) - x
                    tail_e = tt
                if not math.isfinite(w) or abs(w) > DIVERGENCE_LIMIT:
                    diverged = 1.0
                    dstep = t + 1.0
                    break
            if diverged == 0.0:
                if record and T % stride == 0:
                    dec[i, T // stride] = w
                g = _nb_grad(obj_kind, obj_a, gcoeffs, w)
                x = g * g - c_spg
                tt = spg + x
                c_spg = (tt - spg) - x
                spg = tt
                v = w - eta * g
                d = v - vstar
                x = d * d - c_ss
                tt = ss + x
                c_ss = (tt - ss) - x
                ss = tt
                x = v - c_sv
                tt = sv + x
                c_sv = (tt - sv) - x
                sv = tt
            nwin = T - t0
            out[i, COL_FINAL_W] = w
            out[i, COL_TAIL_W] = tail_w / nwin
            out[i, COL_TAIL_V] = tail_v / nwin
            out[i, COL_TAIL_EPS] = tail_e / nwin
            out[i, COL_SS_DIST_V] = ss
            out[i, COL_SUM_V] = sv
            out[i, COL_SS_PERT_GRAD] = spg
            out[i, COL_DIVERGED] = diverged
            out[i, COL_DIVERGE_STEP] = dstep


# ---------------------------------------------------------------------------
# numpy lockstep fallback
# ---------------------------------------------------------------------------

def _np_mix13(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> U_30)) * U_M1
    z = (z ^ (z >> U_27)) * U_M2
    return z ^ (z >> U_31)


def _np_grad(obj_kind, a, gcoeffs, w):
    if obj_kind == OBJ_QUADRATIC:
        return w - a
    if obj_kind in (OBJ_ASYM_BUMP, OBJ_SYM_BUMP):
        x = w / a
        s = 1.0 - x * x
        b1 = np.zeros_like(w)
        inner = s > 0.0
        if np.any(inner):
            si = s[inner]
            arg = 1.0 - 1.0 / si
            live = arg >= EXP_FLOOR
            if np.any(live):
                idx = np.flatnonzero(inner)[live]
                xi = x[inner][live]
                sl = si[live]
                b1[idx] = np.exp(arg[live]) * (-2.0 * xi / (sl * sl))
        if obj_kind == OBJ_ASYM_BUMP:
            return (w - 1.0) - b1
        return w + a * b1
    acc = np.zeros_like(w)
    for j in range(len(gcoeffs) - 1, -1, -1):
        acc = acc * w + gcoeffs[j]
    return acc


def _np_ensemble(obj_kind, obj_a, gcoeffs, noise_kind, nr, ns, nbeta,
                 eta, T, w0_kind, w0_a, w0_b, seeds, vstar, t0,
                 stride, dec, out):
    from .noise import normal_icdf_np

    n = seeds.shape[0]
    record = dec.shape[1] > 0
    state = seeds.copy()
    state += U_GOLDEN
    u = (_np_mix13(state) >> U_11).astype(np.float64) * TWO_NEG53
    if w0_kind == W0_UNIFORM:
        w = w0_a + (w0_b - w0_a) * u
    else:
        w = np.full(n, w0_a)

    def kahan_add(s, c, x, mask):
        y = np.where(mask, x, 0.0) - c
        t = s + y
        c[:] = (t - s) - y
        s[:] = t

    tail_w = np.zeros(n); c_tail_w = np.zeros(n)
    tail_v = np.zeros(n); c_tail_v = np.zeros(n)
    tail_e = np.zeros(n); c_tail_e = np.zeros(n)
    ss = np.zeros(n); c_ss = np.zeros(n)
    sv = np.zeros(n); c_sv = np.zeros(n)
    spg = np.zeros(n); c_spg = np.zeros(n)
    alive = np.ones(n, dtype=bool)
    dstep = np.full(n, -1.0)

    for t in range(T):
        if record and t % stride == 0:
            dec[:, t // stride] = np.where(alive, w, dec[:, t // stride])
        g = _np_grad(obj_kind, obj_a, gcoeffs, w)
        if t >= 1:
            kahan_add(spg, c_spg, g * g, alive)
        v = w - eta * g
        d = v - vstar
        kahan_add(ss, c_ss, d * d, alive)
        kahan_add(sv, c_sv, v, alive)
        if t >= t0:
            kahan_add(tail_v, c_tail_v, v, alive)
        state += U_GOLDEN
        u = (_np_mix13(state) >> U_11).astype(np.float64) * TWO_NEG53
        if noise_kind == KIND_ZERO:
            eps = np.zeros(n)
        elif noise_kind == KIND_UNIFORM:
            eps = (2.0 * u - 1.0) * nr
        elif noise_kind == KIND_GAUSSIAN:
            eps = normal_icdf_np(u + TWO_NEG54) * ns
        else:
            eps = (1.0 + nbeta * np.sin(w)) * ((2.0 * u - 1.0) * nr)
        w_next = v - eta * eps
        w = np.where(alive, w_next, w)
        if t >= t0:
            kahan_add(tail_w, c_tail_w, w, alive)
            kahan_add(tail_e, c_tail_e, eps, alive)
        blown = alive & (~np.isfinite(w) | (np.abs(w) > DIVERGENCE_LIMIT))
        if np.any(blown):
            dstep[blown] = t + 1.0
            alive &= ~blown
    if record and T % stride == 0:
        dec[:, T // stride] = np.where(alive, w, dec[:, T // stride])
    g = _np_grad(obj_kind, obj_a, gcoeffs, w)
    kahan_add(spg, c_spg, g * g, alive)
    v = w - eta * g
    d = v - vstar
    kahan_add(ss, c_ss, d * d, alive)
    kahan_add(sv, c_sv, v, alive)

    nwin = T - t0
    out[:, COL_FINAL_W] = w
    out[:, COL_TAIL_W] = tail_w / nwin
    out[:, COL_TAIL_V] = tail_v / nwin
    out[:, COL_TAIL_EPS] = tail_e / nwin
    out[:, COL_SS_DIST_V] = ss
    out[:, COL_SUM_V] = sv
    out[:, COL_SS_PERT_GRAD] = spg
    out[:, COL_DIVERGED] = (~alive).astype(np.float64)
    out[:, COL_DIVERGE_STEP] = dstep


def run_ensemble_kernel(obj_kind, obj_a, gcoeffs, noise_kind, nr, ns, nbeta,
                        eta, T, w0_kind, w0_a, w0_b, seeds, vstar, t0,
                        stride=0, record=False):
    """Run all trials; returns (out matrix, decimated matrix or None)."""
    seeds = np.asarray(seeds, dtype=np.uint64)
    n = seeds.shape[0]
    gcoeffs = np.asarray(gcoeffs, dtype=np.float64)
    n_rec = (T // stride + 1) if record and stride >= 1 else 0
    dec = np.zeros((n, n_rec))
    out = np.zeros((n, N_COLS))
    args = (int(obj_kind), float(obj_a), gcoeffs, int(noise_kind), float(nr),
            float(ns), float(nbeta), float(eta), int(T), int(w0_kind),
            float(w0_a), float(w0_b), seeds, float(vstar), int(t0),
            max(int(stride), 1), dec, out)
    if HAS_NUMBA:
        _nb_ensemble(*args)
    else:
        _np_ensemble(*args)
    return out, (dec if n_rec else None)
