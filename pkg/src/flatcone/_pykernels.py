"""Pure numpy implementation of the inner kernels.

Mirrors ``_ckernels.pyx`` function for function; selected automatically when
the compiled extension is not importable.
"""
import numpy as np

# Gauss-Kronrod 7/15 nodes on [-1, 1] (QUADPACK qk15), non-negative half
XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# full 15-point layout: -x0..-x6, 0, x6..x0
NODES15 = np.concatenate([-XGK[:7], [0.0], XGK[6::-1]])
WK15 = np.concatenate([WGK[:7], [WGK[7]], WGK[6::-1]])
WG15 = np.zeros(15)
WG15[[1, 3, 5]] = WG[:3]
WG15[7] = WG[3]
WG15[[9, 11, 13]] = WG[2::-1]


def branch_log_sum(z, ref, args_ref, pos, exps, skip=-1, r_chart=np.inf):
    """Sum of ``e_k * log(z - P_k)`` on the branch continued straight from ``ref``.

    ``args_ref[k]`` is the tracked argument of ``ref - P_k``; the argument at
    each node is ``args_ref[k] + Arg((z - P_k) / (ref - P_k))``, exact along a
    straight segment that avoids ``P_k``.  Index ``skip`` is left out.
    """
    shape = np.shape(z)
    z = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    out = np.zeros(z.shape, dtype=complex)
    big = np.abs(z) > r_chart
    for k in range(len(pos)):
        if k == skip or exps[k] == 0.0:
            continue
        p = pos[k]
        d = z - p
        modlog = np.log(np.abs(d))
        if big.any():
            zb = z[big]
            modlog[big] = np.log(np.abs(zb)) + np.log(np.abs(1.0 - p / zb))
        arg = args_ref[k] + np.angle(d / (ref - p))
        out += exps[k] * (modlog + 1j * arg)
    return out.reshape(shape)


def gk15_segment(a, b, ref, args_ref, pos, exps, log_scale, r_chart):
    """GK15 estimate of the integral of f dz over the straight segment [a, b].

    Returns ``(kronrod, gauss, kronrod_of_abs)``.
    """
    half = 0.5 * (b - a)
    z = 0.5 * (a + b) + half * NODES15
    f = np.exp(log_scale + branch_log_sum(z, ref, args_ref, pos, exps, -1, r_chart))
    k = complex(np.dot(WK15, f)) * half
    g = complex(np.dot(WG15, f)) * half
    kabs = float(np.dot(WK15, np.abs(f))) * abs(half)
    return k, g, kabs


def segment_turns(a, b, pos):
    """Exact argument change of ``z - P_k`` along the straight segment a -> b."""
    pos = np.asarray(pos, dtype=complex)
    return np.angle((b - pos) / (a - pos))


def log_derivative_values(z, pos, exps):
    z = np.asarray(z, dtype=complex)
    out = np.zeros(z.shape, dtype=complex)
    for k in range(len(pos)):
        if exps[k] != 0.0:
            out += exps[k] / (z - pos[k])
    return out
