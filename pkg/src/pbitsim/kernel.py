"""Backend selection for the sampling kernels.

The compiled Cython extension is preferred; a pure-Python implementation is
selected automatically when the extension is missing. Both implement the same
functions under the same random-stream contract, so a fixed seed produces
bit-identical results on either backend:

  * state initialisation (done by the caller): one uniform per free variable,
    in ascending variable order; bit = (u < 0.5)
  * each iteration: one uniform for the group pick (g = floor(u * n_groups),
    skipped in round-robin mode), then one uniform per group member in
    ascending variable order deciding that member's new bit
  * parallel tempering: replicas take their iteration in index order; at a
    swap event, pairs (0,1), (1,2), ... each consume one uniform

Uniforms are raw next_double draws from the Generator's bit generator —
exactly what Generator.random() consumes — so Python-side numpy calls and the
compiled loops stay in lock step.
"""

from __future__ import annotations

import os

from . import _kernel_py

try:
    from . import _kernel  # compiled extension

    _DEFAULT = _kernel
except ImportError:  # pragma: no cover - depends on build environment
    _kernel = None
    _DEFAULT = _kernel_py

if os.environ.get("PBITSIM_BACKEND") == "python":
    _DEFAULT = _kernel_py

_active = _DEFAULT


def backend_name() -> str:
    return _active.BACKEND_NAME


def available_backends() -> list[str]:
    names = ["python"]
    if _kernel is not None:
        names.insert(0, "compiled")
    return names


def use_backend(name: str) -> None:
    """Force a backend ('compiled' or 'python'); used by tests/benchmarks."""
    global _active
    if name == "python":
        _active = _kernel_py
    elif name == "compiled":
        if _kernel is None:
            raise RuntimeError("compiled kernel is not available")
        _active = _kernel
    else:
        raise ValueError(f"unknown backend {name!r}")


def sa_loop(*args, **kwargs):
    return _active.sa_loop(*args, **kwargs)


def pt_loop(*args, **kwargs):
    return _active.pt_loop(*args, **kwargs)


def gibbs_counts(*args, **kwargs):
    return _active.gibbs_counts(*args, **kwargs)


def pt_counts(*args, **kwargs):
    return _active.pt_counts(*args, **kwargs)
