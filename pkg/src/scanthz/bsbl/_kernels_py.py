"""Pure-numpy block kernels, vectorized across blocks of equal size.

Mirrors ``_kernels.pyx`` operation for operation (same Cholesky pivot guard),
so either backend produces the same decisions.
"""

import numpy as np

BACKEND = "python"

ST_OK = 0
ST_SINGULAR = 1
ST_SKIP = 2


def _chol(A, tol):
    """Batched lower Cholesky of Hermitian ``A`` (B, d, d); returns (L, ok)."""
    nb, d, _ = A.shape
    L = np.zeros_like(A)
    ok = np.ones(nb, dtype=bool)
    scale = np.max(np.diagonal(A, axis1=1, axis2=2).real, axis=1)
    ok &= scale > 0
    for j in range(d):
        p = A[:, j, j].real - np.sum(np.abs(L[:, j, :j]) ** 2, axis=1)
        bad = p <= tol * scale
        ok &= ~bad
        p = np.where(bad, 1.0, p)
        root = np.sqrt(p)
        L[:, j, j] = root
        if j + 1 < d:
            acc = A[:, j + 1 :, j] - np.einsum("bik,bk->bi", L[:, j + 1 :, :j], L[:, j, :j].conj())
            L[:, j + 1 :, j] = acc / root[:, None]
    return L, ok


def _solve_lower(L, B):
    nb, d, _ = L.shape
    X = np.empty_like(B)
    for i in range(d):
        acc = B[:, i, :] - np.einsum("bk,bkc->bc", L[:, i, :i], X[:, :i, :])
        X[:, i, :] = acc / L[:, i, i][:, None]
    return X


def _solve_upper_h(L, Z):
    """Solve ``L^H X = Z``."""
    nb, d, _ = L.shape
    X = np.empty_like(Z)
    for i in range(d - 1, -1, -1):
        acc = Z[:, i, :] - np.einsum("bk,bkc->bc", L[:, i + 1 :, i].conj(), X[:, i + 1 :, :])
        X[:, i, :] = acc / L[:, i, i][:, None]
    return X


def _groups(sizes):
    for d in np.unique(sizes):
        yield int(d), np.flatnonzero(sizes == d)


def loo_correct(S, Q, sizes, gamma):
    """Leave-one-out statistics ``s = (I - gamma S)^-1 S``, ``q = (I - gamma S)^-1 Q``.

    Blocks with ``gamma == 0`` pass through unchanged. Returns ``(s, q, ok)``;
    ``ok[i]`` is False when ``I - gamma_i S_i`` is not positive definite.
    """
    s = S.copy()
    q = Q.copy()
    ok = np.ones(len(sizes), dtype=bool)
    for d, members in _groups(sizes):
        idx = members[gamma[members] > 0]
        if idx.size == 0:
            continue
        Sb = S[idx, :d, :d]
        Mb = np.eye(d)[None] - gamma[idx, None, None] * Sb
        L, good = _chol(Mb, 0.0)
        sb = _solve_upper_h(L, _solve_lower(L, Sb))
        s[idx, :d, :d] = 0.5 * (sb + np.conj(np.swapaxes(sb, 1, 2)))
        q[idx, :d, :] = _solve_upper_h(L, _solve_lower(L, Q[idx, :d, :]))
        ok[idx] = good
    return s, q, ok


def _block_cost(L, q, gamma, ncols, d):
    """``ncols log|I + gamma s| - gamma ||L^-1 q||_F^2`` given ``L = chol(I + gamma s)``."""
    logdet = 2.0 * np.sum(np.log(np.diagonal(L, axis1=1, axis2=2).real), axis=1)
    z = _solve_lower(L, q)
    return ncols * logdet - gamma * np.sum(np.abs(z) ** 2, axis=(1, 2))


def block_candidates(s, q, sizes, gamma, ncols, add_only=False, tol=1e-12):
    """Candidate hyperparameter and cost change for every block.

    Returns ``(gamma_tilde, delta, status)``. ``delta`` is ``inf`` for blocks
    that are skipped (singular ``s``, inactive with non-positive candidate, or
    active blocks in add-only mode).
    """
    g = len(sizes)
    gamma_tilde = np.zeros(g)
    delta = np.full(g, np.inf)
    status = np.full(g, ST_OK, dtype=np.int8)
    for d, idx in _groups(sizes):
        sb = s[idx, :d, :d]
        qb = q[idx, :d, :]
        L, ok = _chol(sb, tol)
        w = _solve_upper_h(L, _solve_lower(L, qb))
        linv = _solve_lower(L, np.broadcast_to(np.eye(d, dtype=complex), sb.shape).copy())
        gt = (np.sum(np.abs(w) ** 2, axis=(1, 2)) - np.sum(np.abs(linv) ** 2, axis=(1, 2))) / (d * ncols)
        gt = np.where(ok, gt, 0.0)
        g_old = gamma[idx]
        g_new = np.maximum(gt, 0.0)
        eye = np.eye(d)[None]
        cost_new = np.zeros(idx.size)
        cost_old = np.zeros(idx.size)
        pos = g_new > 0
        if pos.any():
            Ln, _ = _chol(eye + g_new[pos, None, None] * sb[pos], 0.0)
            cost_new[pos] = _block_cost(Ln, qb[pos], g_new[pos], ncols, d)
        pos = g_old > 0
        if pos.any():
            Lo, _ = _chol(eye + g_old[pos, None, None] * sb[pos], 0.0)
            cost_old[pos] = _block_cost(Lo, qb[pos], g_old[pos], ncols, d)
        dl = cost_new - cost_old
        st = np.full(idx.size, ST_OK, dtype=np.int8)
        skip = (g_old == 0) & (g_new == 0)
        if add_only:
            skip |= g_old > 0
        st[skip] = ST_SKIP
        st[~ok] = ST_SINGULAR
        dl[st != ST_OK] = np.inf
        gamma_tilde[idx] = gt
        delta[idx] = dl
        status[idx] = st
    return gamma_tilde, delta, status


def loo_from_posterior(S, Q, sig, mu, sizes, gamma):
    """Leave-one-out statistics from the posterior blocks.

    For active blocks ``s = Sigma_ii^-1 - I/gamma`` and ``q = Sigma_ii^-1 mu_i``;
    this equals :func:`loo_correct` but avoids the cancellation in
    ``I - gamma S`` when the noise precision is large. Inactive blocks pass
    ``S``, ``Q`` through.
    """
    s = S.copy()
    q = Q.copy()
    ok = np.ones(len(sizes), dtype=bool)
    for d, members in _groups(sizes):
        idx = members[gamma[members] > 0]
        if idx.size == 0:
            continue
        L, good = _chol(sig[idx, :d, :d], 0.0)
        eye = np.broadcast_to(np.eye(d, dtype=complex), (idx.size, d, d)).copy()
        inv = _solve_upper_h(L, _solve_lower(L, eye))
        inv = 0.5 * (inv + np.conj(np.swapaxes(inv, 1, 2)))
        s[idx, :d, :d] = inv - np.eye(d)[None] / gamma[idx, None, None]
        q[idx, :d, :] = inv @ mu[idx, :d, :]
        ok[idx] = good
    return s, q, ok
