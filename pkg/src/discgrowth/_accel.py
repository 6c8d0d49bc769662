"""Backend selection for the hot numeric kernels.

Two interchangeable implementations are provided for every kernel: a numba
``@njit`` version and a pure-numpy one.  The active backend is chosen at
import time from the environment variable ``DISCGROWTH_BACKEND`` (``"numba"``
or ``"numpy"``); the default is numba when it imports, numpy otherwise.
``benchmarks/bench_backends.py`` compares the two.

Kernels operate on radii in gap form: a point near the unit circle is passed
as (delta, theta) with delta = 1 - |z|.  Callers guarantee delta > 0 is
representable (enumerated clouds live at g <= ~30).
"""

from __future__ import annotations

import math
import os

import numpy as np

_requested = os.environ.get("DISCGROWTH_BACKEND", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise RuntimeError(f"DISCGROWTH_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

if _requested in ("", "numba"):
    try:
        from numba import njit

        HAVE_NUMBA = True
    except ImportError:
        HAVE_NUMBA = False
        if _requested == "numba":
            raise
else:
    HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# pure-numpy implementations


def _kernel_sums_numpy(samp_delta, samp_theta, src_delta, src_theta, src_weight):
    """Weighted disc-kernel sums sum_j w_j (log|z-zeta_j| - log|1 - conj(z) zeta_j|).

    Evaluated per sample z.  Signs of the Blaschke kernel come out through the
    weights, so atoms carry +multiplicity and cell-average nodes carry
    -(node weight).
    """
    out = np.empty(samp_delta.shape[0])
    r_src = 1.0 - src_delta
    for i in range(samp_delta.shape[0]):
        dz, tz = samp_delta[i], samp_theta[i]
        rz = 1.0 - dz
        s2 = np.sin(0.5 * (tz - src_theta))
        cross = 4.0 * rz * r_src * s2 * s2
        dd = src_delta - dz
        num = dd * dd + cross
        one_minus = dz + src_delta - dz * src_delta
        den = one_minus * one_minus + cross
        with np.errstate(divide="ignore"):
            out[i] = 0.5 * float(np.dot(src_weight, np.log(num) - np.log(den)))
    return out


def _taylor_recursion_numpy(a_sign, a_log, k, degree, init_sign, init_log):
    """Log-domain Taylor recursion for f^{(k)} = -A f.

    Returns (sign, log|f_m|) arrays of length degree+1.  f_{m+k} is
    -(m!/(m+k)!) sum_j A_j f_{m-j}, accumulated by max-extraction.
    """
    sign = np.zeros(degree + 1)
    logmag = np.full(degree + 1, -np.inf)
    sign[:k] = init_sign
    logmag[:k] = init_log
    for m in range(0, degree + 1 - k):
        n_terms = min(m, len(a_sign) - 1)
        s_a = a_sign[: n_terms + 1]
        l_a = a_log[: n_terms + 1]
        s_f = sign[m - n_terms : m + 1][::-1]
        l_f = logmag[m - n_terms : m + 1][::-1]
        t_log = l_a + l_f
        t_sign = s_a * s_f
        live = t_sign != 0.0
        if not np.any(live):
            continue
        mx = np.max(t_log[live])
        if mx == -np.inf:
            continue
        acc = float(np.sum(t_sign[live] * np.exp(t_log[live] - mx)))
        if acc == 0.0:
            continue
        # falling-factorial scale plus the minus sign of the equation
        fact = 0.0
        for i in range(1, k + 1):
            fact += math.log(m + i)
        sign[m + k] = -math.copysign(1.0, acc)
        logmag[m + k] = mx + math.log(abs(acc)) - fact
    return sign, logmag


def _weight_cumsum_numpy(increments, offset):
    """Running sums of weight increments with a carried offset."""
    return offset + np.cumsum(increments)


# ---------------------------------------------------------------------------
# numba implementations

if HAVE_NUMBA:

    @njit(cache=True)
    def _kernel_sums_numba(samp_delta, samp_theta, src_delta, src_theta, src_weight):
        n = samp_delta.shape[0]
        m = src_delta.shape[0]
        out = np.empty(n)
        for i in range(n):
            dz = samp_delta[i]
            tz = samp_theta[i]
            rz = 1.0 - dz
            acc = 0.0
            for j in range(m):
                ds = src_delta[j]
                rs = 1.0 - ds
                s = math.sin(0.5 * (tz - src_theta[j]))
                cross = 4.0 * rz * rs * s * s
                dd = ds - dz
                num = dd * dd + cross
                one_minus = dz + ds - dz * ds
                den = one_minus * one_minus + cross
                acc += src_weight[j] * (math.log(num) - math.log(den))
            out[i] = 0.5 * acc
        return out

    @njit(cache=True)
    def _taylor_recursion_numba(a_sign, a_log, k, degree, init_sign, init_log):
        sign = np.zeros(degree + 1)
        logmag = np.full(degree + 1, -np.inf)
        for i in range(k):
            sign[i] = init_sign[i]
            logmag[i] = init_log[i]
        for m in range(0, degree + 1 - k):
            n_terms = min(m, len(a_sign) - 1)
            mx = -np.inf
            for j in range(n_terms + 1):
                if a_sign[j] != 0.0 and sign[m - j] != 0.0:
                    t = a_log[j] + logmag[m - j]
                    if t > mx:
                        mx = t
            if mx == -np.inf:
                continue
            acc = 0.0
            for j in range(n_terms + 1):
                if a_sign[j] != 0.0 and sign[m - j] != 0.0:
                    acc += a_sign[j] * sign[m - j] * math.exp(a_log[j] + logmag[m - j] - mx)
            if acc == 0.0:
                continue
            fact = 0.0
            for i in range(1, k + 1):
                fact += math.log(m + i)
            if acc > 0.0:
                sign[m + k] = -1.0
            else:
                sign[m + k] = 1.0
            logmag[m + k] = mx + math.log(abs(acc)) - fact
        return sign, logmag

    @njit(cache=True)
    def _weight_cumsum_numba(increments, offset):
        out = np.empty(increments.shape[0])
        acc = offset
        for i in range(increments.shape[0]):
            acc += increments[i]
            out[i] = acc
        return out


if BACKEND == "numba":
    kernel_sums = _kernel_sums_numba
    taylor_recursion = _taylor_recursion_numba
    weight_cumsum = _weight_cumsum_numba
else:
    kernel_sums = _kernel_sums_numpy
    taylor_recursion = _taylor_recursion_numpy
    weight_cumsum = _weight_cumsum_numpy
