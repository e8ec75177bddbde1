"""Column-by-column l1 baseline (iterative soft thresholding)."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .bsbl.solver import TRANSFORMS, SolveReport, _as_arrays, dft_matrix


@dataclass(frozen=True)
class IstaOptions:
    """ISTA settings.

    The shrinkage weight of column ``j`` is ``lam`` when given, otherwise
    ``lam_ratio * ||A^H y_j||_inf``. With ``continuation`` the weight starts
    at half the largest correlation and halves each stage down to its target.
    """

    lam: float | None = None
    lam_ratio: float = 0.01
    max_iter: int = 1000
    tol: float = 1e-6
    transform: str = "none"
    continuation: bool = False

    def __post_init__(self):
        if self.lam is not None and not self.lam > 0:
            raise ValueError("lam must be positive")
        if not self.lam_ratio > 0 or not self.tol > 0:
            raise ValueError("lam_ratio and tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.transform not in TRANSFORMS:
            raise ValueError(f"transform must be one of {TRANSFORMS}")


def soft_threshold(z, t):
    """Complex shrinkage ``z * max(1 - t/|z|, 0)``; keeps the phase of surviving entries."""
    z = np.asarray(z, dtype=np.complex128)
    mag = np.abs(z)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(mag > t, 1.0 - t / np.where(mag > 0, mag, 1.0), 0.0)
    return z * scale


def ista_objective(a, y, A, lam):
    """Per-column ``lam ||a||_1 + 0.5 ||y - A a||_2^2``."""
    r = y - A @ a
    return lam * np.sum(np.abs(a), axis=0) + 0.5 * np.sum(np.abs(r) ** 2, axis=0)


def _ista(y, A, lam_target, opts, history):
    n = A.shape[1]
    cols = y.shape[1]
    step = 1.0 / np.linalg.norm(A, 2) ** 2
    corr = A.conj().T @ y
    a = np.zeros((n, cols), dtype=np.complex128)
    if opts.continuation:
        lam = np.maximum(0.5 * np.max(np.abs(corr), axis=0), lam_target)
    else:
        lam = lam_target.copy()
    live = np.any(corr != 0, axis=0)
    trace = [ista_objective(a, y, A, lam_target)] if history else None
    it = 0
    for it in range(1, opts.max_iter + 1):
        if not live.any():
            it -= 1
            break
        sel = np.flatnonzero(live)
        a_s = a[:, sel]
        grad = A.conj().T @ (A @ a_s - y[:, sel])
        new = soft_threshold(a_s - step * grad, step * lam[sel])
        change = np.linalg.norm(new - a_s, axis=0) / np.maximum(np.linalg.norm(new, axis=0), 1e-300)
        a[:, sel] = new
        done = change < opts.tol
        at_target = lam[sel] <= lam_target[sel]
        finished = sel[done & at_target]
        relax = sel[done & ~at_target]
        lam[relax] = np.maximum(0.5 * lam[relax], lam_target[relax])
        live[finished] = False
        if history:
            trace.append(ista_objective(a, y, A, lam_target))
    return a, it, trace


def solve_ista_columnwise(y, phi, opts: IstaOptions = IstaOptions(), history=False) -> SolveReport:
    """Solve ``min lam ||a||_1 + 0.5 ||y_j - (Phi F) a||^2`` independently per column.

    ``cost_trajectory`` holds the summed objective per iteration when
    ``history`` is set.
    """
    start = time.perf_counter()
    y, p = _as_arrays(y, phi)
    f = dft_matrix(p.shape[1]) if opts.transform == "dft" else None
    A = p @ f if f is not None else p
    if opts.lam is not None:
        lam = np.full(y.shape[1], float(opts.lam))
    else:
        lam = opts.lam_ratio * np.max(np.abs(A.conj().T @ y), axis=0)
    a, iters, trace = _ista(y, A, lam, opts, history)
    est = f @ a if f is not None else a
    costs = [float(np.sum(t)) for t in trace] if trace is not None else []
    return SolveReport(est, iters, costs, None, time.perf_counter() - start, opts, solver="ista",
                       stop_reason="tol" if iters < opts.max_iter else "max_iter")
