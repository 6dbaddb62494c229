"""Backend selection for the polynomial kernels.

The compiled extension is used when it imports; otherwise the pure-Python
reference implementation takes over.  ``use_backend`` switches explicitly,
which the benchmarks and parity tests rely on.
"""

from __future__ import annotations

import logging
from contextlib import contextmanager

import numpy as np

from . import _pykernel

log = logging.getLogger(__name__)

try:
    from . import _ckernel
except ImportError:  # pragma: no cover - depends on the build
    _ckernel = None
    log.debug("compiled Fock kernel unavailable, using pure-Python fallback")

MAX_PHOTONS = _pykernel.MAX_PHOTONS
MAX_MODES = _pykernel.MAX_MODES
pack = _pykernel.pack
unpack = _pykernel.unpack

_active = _ckernel if _ckernel is not None else _pykernel


def available_backends() -> list[str]:
    return ["python"] + (["compiled"] if _ckernel is not None else [])


def backend_name() -> str:
    return "compiled" if _active is _ckernel else "python"


def set_backend(name: str) -> None:
    global _active
    if name == "python":
        _active = _pykernel
    elif name == "compiled":
        if _ckernel is None:
            raise RuntimeError("compiled kernel is not built")
        _active = _ckernel
    else:
        raise ValueError(f"unknown backend {name!r}")


@contextmanager
def use_backend(name: str):
    previous = backend_name()
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def transform(keys, coeffs, col_ptr, col_idx, col_val, veto=None):
    if len(keys) == 0:
        return np.zeros(0, np.uint64), np.zeros(0, complex)
    return _active.transform(
        np.asarray(keys, np.uint64), np.asarray(coeffs, complex),
        col_ptr, col_idx, col_val, veto,
    )


def multiply(keys_a, coeffs_a, keys_b, coeffs_b, veto=None):
    if len(keys_a) == 0 or len(keys_b) == 0:
        return np.zeros(0, np.uint64), np.zeros(0, complex)
    return _active.multiply(
        np.asarray(keys_a, np.uint64), np.asarray(coeffs_a, complex),
        np.asarray(keys_b, np.uint64), np.asarray(coeffs_b, complex), veto,
    )


def photon_matrix(keys: np.ndarray) -> np.ndarray:
    """Decode packed keys into an ``(n, 8)`` array of modes, ``-1`` for empty."""
    b = np.asarray(keys, np.uint64).view(np.uint8).reshape(-1, 8).astype(np.int32)
    return b - 1


def bosonic_factor(keys: np.ndarray) -> np.ndarray:
    """``prod_j m_j!`` for each packed monomial (occupations ``m_j``)."""
    modes = photon_matrix(keys)
    out = np.ones(len(modes))
    if len(modes) == 0:
        return out
    # modes are sorted within a row: count runs of equal entries
    run = np.ones(len(modes))
    for i in range(1, modes.shape[1]):
        same = (modes[:, i] == modes[:, i - 1]) & (modes[:, i] >= 0)
        run = np.where(same, run + 1, 1.0)
        out *= np.where(same, run, 1.0)
    return out
