# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled block kernels; same contract as ``_kernels_py``."""

import numpy as np
from libc.math cimport sqrt, log, INFINITY

ctypedef double complex cplx

BACKEND = "compiled"

cdef enum:
    C_OK = 0
    C_SINGULAR = 1
    C_SKIP = 2

ST_OK = C_OK
ST_SINGULAR = C_SINGULAR
ST_SKIP = C_SKIP


cdef inline double abs2(cplx z) noexcept nogil:
    return z.real * z.real + z.imag * z.imag


cdef bint chol(cplx[:, ::1] A, int d, double tol) noexcept nogil:
    """In-place lower Cholesky of the leading d x d Hermitian block."""
    cdef int i, j, k
    cdef double p, scale = 0.0
    cdef cplx acc
    for i in range(d):
        if A[i, i].real > scale:
            scale = A[i, i].real
    if scale <= 0.0:
        return False
    for j in range(d):
        p = A[j, j].real
        for k in range(j):
            p -= abs2(A[j, k])
        if p <= tol * scale:
            return False
        p = sqrt(p)
        A[j, j] = p
        for i in range(j + 1, d):
            acc = A[i, j]
            for k in range(j):
                acc = acc - A[i, k] * A[j, k].conjugate()
            A[i, j] = acc / p
    return True


cdef void solve_lower(cplx[:, ::1] L, cplx[:, ::1] B, int d, int nc) noexcept nogil:
    cdef int i, k, c
    cdef cplx acc
    for c in range(nc):
        for i in range(d):
            acc = B[i, c]
            for k in range(i):
                acc = acc - L[i, k] * B[k, c]
            B[i, c] = acc / L[i, i].real


cdef void solve_upper_h(cplx[:, ::1] L, cplx[:, ::1] B, int d, int nc) noexcept nogil:
    cdef int i, k, c
    cdef cplx acc
    for c in range(nc):
        for i in range(d - 1, -1, -1):
            acc = B[i, c]
            for k in range(i + 1, d):
                acc = acc - L[k, i].conjugate() * B[k, c]
            B[i, c] = acc / L[i, i].real


cdef double block_cost(cplx[:, ::1] s, cplx[:, ::1] q, double gamma, int d, int nc,
                       cplx[:, ::1] work, cplx[:, ::1] wq) noexcept nogil:
    """ncols log|I + gamma s| - gamma ||chol(I + gamma s)^-1 q||^2; nan on failure."""
    cdef int i, j, c
    cdef double logdet = 0.0, quad = 0.0
    if gamma <= 0.0:
        return 0.0
    for i in range(d):
        for j in range(d):
            work[i, j] = gamma * s[i, j]
        work[i, i] = work[i, i] + 1.0
    if not chol(work, d, 0.0):
        return 0.0 / 0.0
    for i in range(d):
        logdet += 2.0 * log(work[i, i].real)
        for c in range(nc):
            wq[i, c] = q[i, c]
    solve_lower(work, wq, d, nc)
    for i in range(d):
        for c in range(nc):
            quad += abs2(wq[i, c])
    return nc * logdet - gamma * quad


def loo_correct(S, Q, sizes, gamma):
    cdef cplx[:, :, ::1] Sv = np.ascontiguousarray(S, dtype=np.complex128)
    cdef cplx[:, :, ::1] Qv = np.ascontiguousarray(Q, dtype=np.complex128)
    cdef long long[::1] sz = np.ascontiguousarray(sizes, dtype=np.int64)
    cdef double[::1] gm = np.ascontiguousarray(gamma, dtype=np.float64)
    cdef int g = Sv.shape[0], D = Sv.shape[1], nc = Qv.shape[2]
    s_out = np.array(S, dtype=np.complex128, copy=True, order="C")
    q_out = np.array(Q, dtype=np.complex128, copy=True, order="C")
    ok_out = np.ones(g, dtype=bool)
    cdef cplx[:, :, ::1] so = s_out
    cdef cplx[:, :, ::1] qo = q_out
    cdef unsigned char[::1] okv = ok_out.view(np.uint8)
    cdef cplx[:, ::1] M = np.zeros((D, D), dtype=np.complex128)
    cdef cplx[:, ::1] X = np.zeros((D, D), dtype=np.complex128)
    cdef cplx[:, ::1] XQ = np.zeros((D, nc), dtype=np.complex128)
    cdef int b, i, j, c, d
    cdef double gb
    cdef cplx h
    with nogil:
        for b in range(g):
            gb = gm[b]
            if gb <= 0.0:
                continue
            d = <int> sz[b]
            for i in range(d):
                for j in range(d):
                    M[i, j] = -gb * Sv[b, i, j]
                    X[i, j] = Sv[b, i, j]
                M[i, i] = M[i, i] + 1.0
                for c in range(nc):
                    XQ[i, c] = Qv[b, i, c]
            if not chol(M, d, 0.0):
                okv[b] = 0
                continue
            solve_lower(M, X, d, d)
            solve_upper_h(M, X, d, d)
            solve_lower(M, XQ, d, nc)
            solve_upper_h(M, XQ, d, nc)
            for i in range(d):
                for j in range(d):
                    h = 0.5 * (X[i, j] + X[j, i].conjugate())
                    so[b, i, j] = h
                for c in range(nc):
                    qo[b, i, c] = XQ[i, c]
    return s_out, q_out, ok_out


def block_candidates(s, q, sizes, gamma, int ncols, bint add_only=False, double tol=1e-12):
    cdef cplx[:, :, ::1] sv = np.ascontiguousarray(s, dtype=np.complex128)
    cdef cplx[:, :, ::1] qv = np.ascontiguousarray(q, dtype=np.complex128)
    cdef long long[::1] sz = np.ascontiguousarray(sizes, dtype=np.int64)
    cdef double[::1] gm = np.ascontiguousarray(gamma, dtype=np.float64)
    cdef int g = sv.shape[0], D = sv.shape[1], nc = qv.shape[2]
    gt_out = np.zeros(g)
    dl_out = np.full(g, np.inf)
    st_out = np.zeros(g, dtype=np.int8)
    cdef double[::1] gt = gt_out
    cdef double[::1] dl = dl_out
    cdef signed char[::1] st = st_out
    cdef cplx[:, ::1] L = np.zeros((D, D), dtype=np.complex128)
    cdef cplx[:, ::1] W = np.zeros((D, nc), dtype=np.complex128)
    cdef cplx[:, ::1] E = np.zeros((D, D), dtype=np.complex128)
    cdef cplx[:, ::1] work = np.zeros((D, D), dtype=np.complex128)
    cdef cplx[:, ::1] wq = np.zeros((D, nc), dtype=np.complex128)
    cdef int b, i, j, c, d
    cdef double wn, tr, cand, g_old, g_new
    with nogil:
        for b in range(g):
            d = <int> sz[b]
            g_old = gm[b]
            for i in range(d):
                for j in range(d):
                    L[i, j] = sv[b, i, j]
                    E[i, j] = 1.0 if i == j else 0.0
                for c in range(nc):
                    W[i, c] = qv[b, i, c]
            if not chol(L, d, tol):
                st[b] = C_SINGULAR
                continue
            solve_lower(L, W, d, nc)
            solve_upper_h(L, W, d, nc)
            solve_lower(L, E, d, d)
            wn = 0.0
            tr = 0.0
            for i in range(d):
                for c in range(nc):
                    wn += abs2(W[i, c])
                for j in range(d):
                    tr += abs2(E[i, j])
            cand = (wn - tr) / (d * ncols)
            gt[b] = cand
            g_new = cand if cand > 0.0 else 0.0
            if (g_old == 0.0 and g_new == 0.0) or (add_only and g_old > 0.0):
                st[b] = C_SKIP
                continue
            dl[b] = (block_cost(sv[b], qv[b], g_new, d, nc, work, wq)
                     - block_cost(sv[b], qv[b], g_old, d, nc, work, wq))
    return gt_out, dl_out, st_out


def loo_from_posterior(S, Q, sig, mu, sizes, gamma):
    cdef cplx[:, :, ::1] sg = np.ascontiguousarray(sig, dtype=np.complex128)
    cdef cplx[:, :, ::1] mv = np.ascontiguousarray(mu, dtype=np.complex128)
    cdef long long[::1] sz = np.ascontiguousarray(sizes, dtype=np.int64)
    cdef double[::1] gm = np.ascontiguousarray(gamma, dtype=np.float64)
    cdef int g = sg.shape[0], D = sg.shape[1], nc = mv.shape[2]
    s_out = np.array(S, dtype=np.complex128, copy=True, order="C")
    q_out = np.array(Q, dtype=np.complex128, copy=True, order="C")
    ok_out = np.ones(g, dtype=bool)
    cdef cplx[:, :, ::1] so = s_out
    cdef cplx[:, :, ::1] qo = q_out
    cdef unsigned char[::1] okv = ok_out.view(np.uint8)
    cdef cplx[:, ::1] L = np.zeros((D, D), dtype=np.complex128)
    cdef cplx[:, ::1] X = np.zeros((D, D), dtype=np.complex128)
    cdef int b, i, j, k, c, d
    cdef double gb
    cdef cplx acc
    with nogil:
        for b in range(g):
            gb = gm[b]
            if gb <= 0.0:
                continue
            d = <int> sz[b]
            for i in range(d):
                for j in range(d):
                    L[i, j] = sg[b, i, j]
                    X[i, j] = 1.0 if i == j else 0.0
            if not chol(L, d, 0.0):
                okv[b] = 0
                continue
            solve_lower(L, X, d, d)
            solve_upper_h(L, X, d, d)
            for i in range(d):
                for j in range(d):
                    so[b, i, j] = 0.5 * (X[i, j] + X[j, i].conjugate())
                so[b, i, i] = so[b, i, i] - 1.0 / gb
                for c in range(nc):
                    acc = 0.0
                    for k in range(d):
                        acc = acc + X[i, k] * mv[b, k, c]
                    qo[b, i, c] = acc
    return s_out, q_out, ok_out
