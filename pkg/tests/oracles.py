"""Dense from-scratch evaluations used as independent test oracles.

Nothing here goes through the solver's Gram-matrix bookkeeping or kernels:
every quantity is built from its defining formula with explicit inverses.
"""

import numpy as np


def dense_c(phi, partition, gamma, beta, exclude=None):
    m = phi.shape[0]
    c = np.eye(m, dtype=complex) / beta
    for i, g in gamma.items():
        if i == exclude:
            continue
        pb = phi[:, partition[i].slice]
        c = c + g * pb @ pb.conj().T
    return c


def dense_sq(phi, y, partition, gamma, beta, i):
    """``s_i = Phi_i^H C_{-i}^-1 Phi_i`` and ``q_i = Phi_i^H C_{-i}^-1 Y``."""
    cinv = np.linalg.inv(dense_c(phi, partition, gamma, beta, exclude=i))
    pb = phi[:, partition[i].slice]
    return pb.conj().T @ cinv @ pb, pb.conj().T @ cinv @ y


def dense_cost(phi, y, partition, gamma, beta):
    """``cols log|C| + Tr[Y^H C^-1 Y]`` via slogdet and an explicit inverse."""
    c = dense_c(phi, partition, gamma, beta)
    sign, logdet = np.linalg.slogdet(c)
    quad = np.trace(y.conj().T @ np.linalg.inv(c) @ y)
    return y.shape[1] * logdet + quad.real


def dense_posterior(phi, y, partition, gamma, beta):
    rows = np.concatenate([np.arange(partition[i].offset, partition[i].stop) for i in sorted(gamma)])
    var = np.concatenate([np.full(partition[i].size, gamma[i]) for i in sorted(gamma)])
    pa = phi[:, rows]
    sigma = np.linalg.inv(np.diag(1.0 / var) + beta * pa.conj().T @ pa)
    return rows, beta * sigma @ pa.conj().T @ y, sigma


def trace_gamma(s, q):
    """Candidate-gamma formula with explicit inverses."""
    d, cols = q.shape
    si = np.linalg.inv(s)
    return (np.trace(si @ (q @ q.conj().T - s) @ si) / (d * cols)).real


def real_fmlm(y, phi, block, beta, eta=1e-4, max_iter=None):
    """Plain real-arithmetic block MMV FMLM reference (no Gram tricks, no kernels).

    Recomputes every leave-one-out statistic by explicit inversion of
    ``C_{-i}`` each iteration and scores blocks with the dense cost difference.
    """
    m, n = phi.shape
    cols = y.shape[1]
    g = n // block
    gamma = {}
    sl = [slice(i * block, (i + 1) * block) for i in range(g)]

    def cost(gm):
        c = np.eye(m) / beta
        for i, v in gm.items():
            c = c + v * phi[:, sl[i]] @ phi[:, sl[i]].T
        return cols * np.linalg.slogdet(c)[1] + np.trace(y.T @ np.linalg.inv(c) @ y)

    current = cost(gamma)
    for _ in range(max_iter or 5 * g):
        best = (np.inf, None, None)
        for i in range(g):
            c = np.eye(m) / beta
            for j, v in gamma.items():
                if j != i:
                    c = c + v * phi[:, sl[j]] @ phi[:, sl[j]].T
            ci = np.linalg.inv(c)
            s = phi[:, sl[i]].T @ ci @ phi[:, sl[i]]
            q = phi[:, sl[i]].T @ ci @ y
            si = np.linalg.inv(s)
            cand = np.trace(si @ (q @ q.T - s) @ si) / (block * cols)
            new = max(cand, 0.0)
            old = gamma.get(i, 0.0)
            if new == 0.0 and old == 0.0:
                continue
            trial = dict(gamma)
            if new > 0:
                trial[i] = new
            else:
                trial.pop(i)
            delta = cost(trial) - current
            if delta < best[0]:
                best = (delta, i, trial)
        if not best[0] < 0:
            break
        prev = current
        gamma = best[2]
        current = cost(gamma)
        if abs(current - prev) / (1 + abs(prev)) < eta:
            break
    x = np.zeros((n, cols))
    if gamma:
        rows = np.concatenate([np.arange(i * block, (i + 1) * block) for i in sorted(gamma)])
        var = np.concatenate([np.full(block, gamma[i]) for i in sorted(gamma)])
        pa = phi[:, rows]
        sigma = np.linalg.inv(np.diag(1 / var) + beta * pa.T @ pa)
        x[rows] = beta * sigma @ pa.T @ y
    return x, gamma
