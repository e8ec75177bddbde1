"""Backend selection for the per-block solver kernels.

The compiled extension is used when it was built; otherwise the numpy
implementation takes over transparently. :func:`use` switches explicitly.
"""

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_active = _compiled if _compiled is not None else _kernels_py


def available():
    return ("compiled", "python") if _compiled is not None else ("python",)


def backend():
    return _active.BACKEND


def use(name):
    """Select ``"compiled"`` or ``"python"``; returns the previous backend name."""
    global _active
    prev = _active.BACKEND
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not built; run `pip install -e .`")
        _active = _compiled
    elif name == "python":
        _active = _kernels_py
    else:
        raise ValueError(f"unknown backend {name!r}")
    return prev


def loo_correct(S, Q, sizes, gamma):
    return _active.loo_correct(S, Q, sizes, gamma)


def loo_from_posterior(S, Q, sig, mu, sizes, gamma):
    return _active.loo_from_posterior(S, Q, sig, mu, sizes, gamma)


def block_candidates(s, q, sizes, gamma, ncols, add_only=False, tol=1e-12):
    return _active.block_candidates(s, q, sizes, gamma, ncols, add_only, tol)
