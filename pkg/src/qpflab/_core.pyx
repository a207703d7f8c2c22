# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled orbit kernels.

Integer codes and parameter layouts mirror ``qpflab.systems``.  The fibre
angle at step ``i`` of an orbit started at ``(theta0, m0)`` is
``theta0 + (m0 + i) * omega mod 1`` with ``omega = hi + lo`` split so that
``m * hi`` is exact.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport atan, tan, tanh, cosh, sin, cos, floor, fabs, log, sqrt, INFINITY, M_PI

cnp.import_array()

cdef enum:
    K_ADD = 0
    K_PROD = 1
    K_CIRC = 2
    K_PROJ = 3

cdef enum:
    F_ATAN_NORM = 0
    F_ATAN_SCALED = 1
    F_TANH = 2
    F_MOBIUS = 3
    F_MOBIUS_INTERVAL = 4
    F_ARNOLD = 5
    F_IDENTITY = 6

cdef enum:
    G_ONE_MINUS_SINPI = 0
    G_SINPI = 1
    G_SIN2PI = 2
    G_COS2PI = 3
    G_TENT = 4
    G_PEAK = 5
    G_ZERO = 6

cdef double TWO_PI = 2.0 * M_PI


cdef inline double ffloor(double x) nogil:
    # valid for |x| < 2^63, which covers every angle argument here
    cdef double f = <double>(<long>x)
    return f - 1.0 if f > x else f


cdef inline double frac(double x) nogil:
    cdef double y = x - ffloor(x)
    if y >= 1.0:
        return 0.0
    return y


cdef inline double angle(double theta0, long m, double hi, double lo) nogil:
    cdef double mf = <double>m
    cdef double a = mf * hi
    a = a - ffloor(a)
    return frac(theta0 + (a + mf * lo))


cdef inline double cdist(double a, double b) nogil:
    cdef double d = fabs(a - b)
    d = d - ffloor(d)
    if 1.0 - d < d:
        return 1.0 - d
    return d


cdef inline void load_fp(int code, double[::1] fp, double* q) noexcept nogil:
    # slot 3 is unused by every base; ATAN_NORM caches 1/atan(alpha) there
    cdef int i
    for i in range(4):
        q[i] = fp[i]
    if code == F_ATAN_NORM:
        q[3] = 1.0 / atan(q[0])


cdef inline double base_f(int code, const double* p, double x) nogil:
    if code == F_ATAN_NORM:
        return atan(p[0] * x) * p[3]
    elif code == F_ATAN_SCALED:
        return p[0] * atan(p[1] * x)
    elif code == F_TANH:
        return tanh(p[0] * x)
    elif code == F_MOBIUS:
        return -1.0 / x + p[0]
    elif code == F_MOBIUS_INTERVAL:
        return -p[0] / (x / p[0] + p[1]) + p[0] * (p[2] - p[1])
    elif code == F_ARNOLD:
        return x + p[0] + p[1] / TWO_PI * sin(TWO_PI * x)
    return x


cdef inline double base_df(int code, const double* p, double x) nogil:
    cdef double t
    if code == F_ATAN_NORM:
        return p[0] * p[3] / (1.0 + p[0] * p[0] * x * x)
    elif code == F_ATAN_SCALED:
        return p[0] * p[1] / (1.0 + p[1] * p[1] * x * x)
    elif code == F_TANH:
        t = cosh(p[0] * x)
        return p[0] / (t * t)
    elif code == F_MOBIUS:
        return 1.0 / (x * x)
    elif code == F_MOBIUS_INTERVAL:
        t = x / p[0] + p[1]
        return 1.0 / (t * t)
    elif code == F_ARNOLD:
        return 1.0 + p[1] * cos(TWO_PI * x)
    return 1.0


cdef inline double base_inv(int code, const double* p, double y) nogil:
    cdef double z
    if code == F_ATAN_NORM:
        z = y / p[3]
        if fabs(z) >= M_PI / 2:
            return INFINITY if y > 0 else -INFINITY
        return tan(z) / p[0]
    elif code == F_ATAN_SCALED:
        z = y / p[0]
        if fabs(z) >= M_PI / 2:
            return INFINITY if y > 0 else -INFINITY
        return tan(z) / p[1]
    elif code == F_TANH:
        if fabs(y) >= 1.0:
            return INFINITY if y > 0 else -INFINITY
        return 0.5 * log((1.0 + y) / (1.0 - y)) / p[0]
    elif code == F_MOBIUS:
        return 1.0 / (p[0] - y)
    elif code == F_MOBIUS_INTERVAL:
        return p[0] * (-p[0] / (y - p[0] * (p[2] - p[1])) - p[1])
    return y


cdef inline double forcing(int code, const double* p, double t) nogil:
    cdef double v
    if p[0] != 0.0:
        t = frac(t + p[0])
    if code == G_ONE_MINUS_SINPI:
        return 1.0 - sin(M_PI * t)
    elif code == G_SINPI:
        return sin(M_PI * t)
    elif code == G_SIN2PI:
        return p[1] * sin(TWO_PI * t)
    elif code == G_COS2PI:
        return cos(TWO_PI * t)
    elif code == G_TENT:
        return 1.0 - p[1] * cdist(t, 0.0)
    elif code == G_PEAK:
        v = 1.0 - p[1] * cdist(t, p[2])
        return v if v > 0.0 else 0.0
    return 0.0


cdef inline double fibre(int kind, int fc, int gc, const double* fp, const double* gp,
                         double beta, double t, double x) nogil:
    cdef double g = forcing(gc, gp, t)
    cdef double y
    if kind == K_ADD:
        return base_f(fc, fp, x) - beta * g
    elif kind == K_PROD:
        return base_f(fc, fp, x) * g
    elif kind == K_CIRC:
        return frac(base_f(fc, fp, x) - beta * g)
    # projective: fp[0] holds the energy
    y = tan(-x) - fp[0] + beta * g
    return atan(1.0 / y)


cdef inline double dfibre(int kind, int fc, int gc, const double* fp, const double* gp,
                          double beta, double t, double x) nogil:
    cdef double y, s
    if kind == K_ADD or kind == K_CIRC:
        return base_df(fc, fp, x)
    elif kind == K_PROD:
        return base_df(fc, fp, x) * forcing(gc, gp, t)
    s = tan(x)
    y = tan(-x) - fp[0] + beta * forcing(gc, gp, t)
    return (1.0 + s * s) / (1.0 + y * y)


cdef inline double ifibre(int kind, int fc, int gc, const double* fp, const double* gp,
                          double beta, double t, double y) nogil:
    cdef double g = forcing(gc, gp, t)
    if kind == K_ADD:
        return base_inv(fc, fp, y + beta * g)
    elif kind == K_PROD:
        return base_inv(fc, fp, y / g)
    return -atan(1.0 / tan(y) + fp[0] - beta * g)


def orbit_final(int kind, int fc, int gc, double[::1] fp, double[::1] gp, double beta,
                double[::1] theta0, long[::1] m0, double[::1] x0, long n,
                double hi, double lo, double escape_at=-INFINITY, bint stop_any=False):
    """Iterate every start point ``n`` steps.

    Returns the final values and the first step at which ``x <= escape_at``
    (``-1`` if never).  With ``stop_any`` the sweep ends at the first escape
    anywhere, so only ``(esc >= 0).any()`` is meaningful.
    """
    cdef Py_ssize_t G = theta0.shape[0], k
    cdef long i
    cdef double x
    out = np.array(x0, dtype=np.float64)
    esc = np.full(G, -1, dtype=np.int64)
    cdef double[::1] o = out
    cdef long[::1] e = esc
    cdef bint hit = False
    cdef Py_ssize_t live = 0
    cdef double q[4]
    load_fp(fc, fp, q)
    with nogil:
        for k in range(G):
            if o[k] <= escape_at:
                e[k] = 0
                hit = True
            else:
                live += 1
        if stop_any and hit:
            n = 0
        # step-major order: independent points overlap in the pipeline
        for i in range(n):
            if live == 0:
                break
            for k in range(G):
                if e[k] < 0:
                    x = fibre(kind, fc, gc, q, &gp[0], beta, angle(theta0[k], m0[k] + i, hi, lo), o[k])
                    o[k] = x
                    if x <= escape_at:
                        e[k] = i + 1
                        live -= 1
                        hit = True
            if stop_any and hit:
                break
    return out, esc


def orbit_logsum(int kind, int fc, int gc, double[::1] fp, double[::1] gp, double beta,
                 double[::1] theta0, long[::1] m0, double[::1] x0, long n,
                 double hi, double lo):
    """Final values and sums of ``log DT`` over ``n`` forward steps."""
    cdef Py_ssize_t G = theta0.shape[0], k
    cdef long i
    cdef double x, t
    out = np.array(x0, dtype=np.float64)
    sums = np.zeros(G)
    cdef double[::1] o = out
    cdef double[::1] ss = sums
    cdef double q[4]
    load_fp(fc, fp, q)
    with nogil:
        for i in range(n):
            for k in range(G):
                x = o[k]
                t = angle(theta0[k], m0[k] + i, hi, lo)
                ss[k] += log(dfibre(kind, fc, gc, q, &gp[0], beta, t, x))
                o[k] = fibre(kind, fc, gc, q, &gp[0], beta, t, x)
    return out, sums


def trajectory(int kind, int fc, int gc, double[::1] fp, double[::1] gp, double beta,
               double theta0, long m0, double x0, long n, double hi, double lo):
    """``x_0..x_n`` along the forward orbit."""
    xs = np.empty(n + 1)
    cdef double[::1] xv = xs
    cdef long i
    cdef double x = x0
    xv[0] = x
    cdef double q[4]
    load_fp(fc, fp, q)
    with nogil:
        for i in range(n):
            x = fibre(kind, fc, gc, q, &gp[0], beta, angle(theta0, m0 + i, hi, lo), x)
            xv[i + 1] = x
    return xs


def backward_trajectory(int kind, int fc, int gc, double[::1] fp, double[::1] gp, double beta,
                        double theta0, long m0, double x0, long n, double hi, double lo):
    """``y_0 = x0`` and ``y_k`` the preimage of ``y_{k-1}`` on fibre ``m0 - k``."""
    ys = np.empty(n + 1)
    cdef double[::1] yv = ys
    cdef long k
    cdef double y = x0
    yv[0] = y
    cdef double q[4]
    load_fp(fc, fp, q)
    with nogil:
        for k in range(1, n + 1):
            y = ifibre(kind, fc, gc, q, &gp[0], beta, angle(theta0, m0 - k, hi, lo), y)
            yv[k] = y
    return ys


def cocycle_lognorm(int gc, double[::1] gp, double E, double lam, double[::1] theta0,
                    long n, double hi, double lo, bint matrix_norm=False, int renorm=32):
    """``log`` of the propagated norm under ``n`` Schrodinger matrices per start angle.

    The vector starts at ``(1, 0)``; with ``matrix_norm`` the larger of the two
    basis-vector growths is returned.
    """
    cdef Py_ssize_t G = theta0.shape[0], k
    cdef long i
    cdef int b, nb = 2 if matrix_norm else 1
    cdef double v1, v2, w, nrm, acc, best, a
    out = np.empty(G)
    cdef double[::1] o = out
    with nogil:
        for k in range(G):
            best = -INFINITY
            for b in range(nb):
                v1 = 1.0 if b == 0 else 0.0
                v2 = 0.0 if b == 0 else 1.0
                acc = 0.0
                for i in range(n):
                    a = E - lam * forcing(gc, &gp[0], angle(theta0[k], i, hi, lo))
                    w = a * v1 - v2
                    v2 = v1
                    v1 = w
                    if (i + 1) % renorm == 0:
                        nrm = sqrt(v1 * v1 + v2 * v2)
                        acc += log(nrm)
                        v1 /= nrm
                        v2 /= nrm
                acc += 0.5 * log(v1 * v1 + v2 * v2)
                if acc > best:
                    best = acc
            o[k] = best
    return out
