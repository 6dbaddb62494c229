"""Pure-Python polynomial kernels; reference semantics for ``_ckernel``.

A multimode Fock state is handled as a homogeneous polynomial in creation
operators.  Each monomial is a sorted multiset of mode indices packed into a
``uint64`` key: byte ``i`` (from the least significant end) holds
``mode + 1`` of the ``i``-th photon, zero bytes are empty.  This limits
polynomials to 8 photons and 254 modes.

Vetoes prune monomials as soon as they violate a detection rule.  Both rules
are monotone under adding photons, so pruning partial products is exact:

* threshold station: photons on two different detectors of the station;
* number-resolving station: more than one photon in the station.
"""

from __future__ import annotations

import numpy as np

MAX_PHOTONS = 8
MAX_MODES = 254
PRUNE = 1e-14


def pack(modes) -> int:
    key = 0
    for i, m in enumerate(sorted(modes)):
        key |= (m + 1) << (8 * i)
    return key


def unpack(key: int) -> tuple[int, ...]:
    out = []
    while key:
        out.append((key & 0xFF) - 1)
        key >>= 8
    return tuple(out)


def _vetoed(modes, veto) -> bool:
    if veto is None:
        return False
    station, detector, kind = veto
    seen = {}
    for m in modes:
        s = station[m]
        if s < 0:
            continue
        if s in seen:
            if kind[s] == 1 or seen[s] != detector[m]:
                return True
        else:
            seen[s] = detector[m]
    return False


def _insert(modes: tuple, m: int) -> tuple:
    i = 0
    n = len(modes)
    while i < n and modes[i] <= m:
        i += 1
    return modes[:i] + (m,) + modes[i:]


def _finish(acc: dict) -> tuple[np.ndarray, np.ndarray]:
    items = [(pack(k), v) for k, v in acc.items() if abs(v) > PRUNE]
    items.sort()
    keys = np.array([k for k, _ in items], dtype=np.uint64)
    vals = np.array([v for _, v in items], dtype=complex)
    return keys, vals


def transform(keys, coeffs, col_ptr, col_idx, col_val, veto=None):
    """Substitute ``a_i^dag -> sum_j col[i][j] a_j^dag`` in every monomial."""
    acc: dict[tuple, complex] = {}
    for key, c in zip(keys.tolist(), coeffs.tolist()):
        partial = {(): c}
        for p in unpack(key):
            nxt: dict[tuple, complex] = {}
            for k in range(col_ptr[p], col_ptr[p + 1]):
                j = int(col_idx[k])
                u = col_val[k]
                for mono, a in partial.items():
                    new = _insert(mono, j)
                    if _vetoed(new, veto):
                        continue
                    nxt[new] = nxt.get(new, 0) + a * u
            partial = nxt
            if not partial:
                break
        for mono, a in partial.items():
            acc[mono] = acc.get(mono, 0) + a
    return _finish(acc)


def multiply(keys_a, coeffs_a, keys_b, coeffs_b, veto=None):
    """Product of two polynomials, dropping vetoed monomials."""
    acc: dict[tuple, complex] = {}
    b_terms = [(unpack(k), v) for k, v in zip(keys_b.tolist(), coeffs_b.tolist())]
    for ka, va in zip(keys_a.tolist(), coeffs_a.tolist()):
        ma = unpack(ka)
        for mb, vb in b_terms:
            if len(ma) + len(mb) > MAX_PHOTONS:
                raise OverflowError("product exceeds the 8-photon key capacity")
            mono = tuple(sorted(ma + mb))
            if _vetoed(mono, veto):
                continue
            acc[mono] = acc.get(mono, 0) + va * vb
    return _finish(acc)
