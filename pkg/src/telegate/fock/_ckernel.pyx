# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled polynomial kernels; same contract as ``_pykernel``."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t, int32_t
from libcpp.unordered_map cimport unordered_map
from libcpp.vector cimport vector
from cython.operator cimport dereference as deref

cnp.import_array()

cdef enum:
    MAXP = 8

cdef struct Veto:
    int nmodes
    int nstations
    const int32_t* station
    const int32_t* detector
    const int32_t* kind


cdef inline int decode(uint64_t key, int* out) noexcept nogil:
    cdef int n = 0
    while key:
        out[n] = <int>(key & 0xFF) - 1
        key >>= 8
        n += 1
    return n


cdef inline uint64_t encode(const int* modes, int n) noexcept nogil:
    cdef uint64_t key = 0
    cdef int i
    for i in range(n):
        key |= (<uint64_t>(modes[i] + 1)) << (8 * i)
    return key


cdef inline bint vetoed(const int* modes, int n, const Veto* v) noexcept nogil:
    cdef int i, j, s
    if v.nstations == 0:
        return False
    for i in range(n):
        s = v.station[modes[i]]
        if s < 0:
            continue
        for j in range(i):
            if v.station[modes[j]] == s:
                if v.kind[s] == 1 or v.detector[modes[j]] != v.detector[modes[i]]:
                    return True
                break
    return False


cdef class _Acc:
    cdef unordered_map[uint64_t, size_t] index
    cdef vector[uint64_t] keys
    cdef vector[double] re
    cdef vector[double] im

    cdef void add(self, uint64_t key, double r, double i) noexcept:
        cdef unordered_map[uint64_t, size_t].iterator it = self.index.find(key)
        cdef size_t pos
        if it == self.index.end():
            pos = self.keys.size()
            self.index[key] = pos
            self.keys.push_back(key)
            self.re.push_back(r)
            self.im.push_back(i)
        else:
            pos = deref(it).second
            self.re[pos] += r
            self.im[pos] += i

    cdef finish(self, double prune):
        cdef size_t n = self.keys.size(), k, m = 0
        keys = np.empty(n, dtype=np.uint64)
        vals = np.empty(n, dtype=np.complex128)
        cdef uint64_t[:] kv = keys
        cdef double complex[:] vv = vals
        for k in range(n):
            if self.re[k] * self.re[k] + self.im[k] * self.im[k] > prune * prune:
                kv[m] = self.keys[k]
                vv[m] = self.re[k] + 1j * self.im[k]
                m += 1
        keys = keys[:m]
        vals = vals[:m]
        order = np.argsort(keys, kind="stable")
        return keys[order], vals[order]


cdef Veto make_veto(veto, list keep):
    cdef Veto v
    cdef cnp.ndarray[int32_t] st, de, ki
    v.nstations = 0
    v.nmodes = 0
    if veto is None:
        return v
    st = np.ascontiguousarray(veto[0], dtype=np.int32)
    de = np.ascontiguousarray(veto[1], dtype=np.int32)
    ki = np.ascontiguousarray(veto[2], dtype=np.int32)
    keep.extend([st, de, ki])
    v.nmodes = st.shape[0]
    v.nstations = ki.shape[0]
    v.station = &st[0] if st.shape[0] else NULL
    v.detector = &de[0] if de.shape[0] else NULL
    v.kind = &ki[0] if ki.shape[0] else NULL
    if v.station == NULL or v.kind == NULL:
        v.nstations = 0
    return v


cdef inline int _ins(int* buf, int n, int m) noexcept nogil:
    # in-place sorted insert; buf must have room for n + 1 entries
    cdef int i = n
    while i > 0 and buf[i - 1] > m:
        buf[i] = buf[i - 1]
        i -= 1
    buf[i] = m
    return n + 1


def transform(cnp.ndarray keys, cnp.ndarray coeffs, col_ptr, col_idx, col_val,
              veto=None, double prune=1e-14):
    cdef list keep = []
    cdef Veto v = make_veto(veto, keep)
    cdef cnp.ndarray[int64_t] cp = np.ascontiguousarray(col_ptr, dtype=np.int64)
    cdef cnp.ndarray[int32_t] ci = np.ascontiguousarray(col_idx, dtype=np.int32)
    cdef cnp.ndarray[double complex] cv = np.ascontiguousarray(col_val, dtype=np.complex128)
    cdef const uint64_t[:] kin = np.ascontiguousarray(keys, dtype=np.uint64)
    cdef const double complex[:] cin = np.ascontiguousarray(coeffs, dtype=np.complex128)
    cdef _Acc out = _Acc()
    cdef _Acc cur, nxt
    cdef int modes[MAXP]
    cdef int tmp[MAXP]
    cdef int nm, t, np_, p, j
    cdef size_t term, a
    cdef int64_t k
    cdef double complex u, c
    cdef double ur, ui, ar, ai
    for term in range(kin.shape[0]):
        nm = decode(kin[term], modes)
        cur = _Acc()
        c = cin[term]
        cur.add(0, c.real, c.imag)
        for t in range(nm):
            p = modes[t]
            nxt = _Acc()
            for k in range(cp[p], cp[p + 1]):
                j = ci[k]
                u = cv[k]
                ur = u.real
                ui = u.imag
                for a in range(cur.keys.size()):
                    np_ = decode(cur.keys[a], tmp)
                    np_ = _ins(tmp, np_, j)
                    if vetoed(tmp, np_, &v):
                        continue
                    ar = cur.re[a]
                    ai = cur.im[a]
                    nxt.add(encode(tmp, np_), ar * ur - ai * ui, ar * ui + ai * ur)
            cur = nxt
            if cur.keys.size() == 0:
                break
        for a in range(cur.keys.size()):
            out.add(cur.keys[a], cur.re[a], cur.im[a])
    return out.finish(prune)


def multiply(cnp.ndarray keys_a, cnp.ndarray coeffs_a, cnp.ndarray keys_b,
             cnp.ndarray coeffs_b, veto=None, double prune=1e-14):
    cdef list keep = []
    cdef Veto v = make_veto(veto, keep)
    cdef const uint64_t[:] ka = np.ascontiguousarray(keys_a, dtype=np.uint64)
    cdef const uint64_t[:] kb = np.ascontiguousarray(keys_b, dtype=np.uint64)
    cdef const double complex[:] ca = np.ascontiguousarray(coeffs_a, dtype=np.complex128)
    cdef const double complex[:] cb = np.ascontiguousarray(coeffs_b, dtype=np.complex128)
    cdef _Acc out = _Acc()
    cdef int ma[MAXP]
    cdef int mb[MAXP]
    cdef int merged[2 * MAXP]
    cdef int na, nb, i, j, k
    cdef size_t x, y
    cdef double complex pa, pb
    for x in range(ka.shape[0]):
        na = decode(ka[x], ma)
        pa = ca[x]
        for y in range(kb.shape[0]):
            nb = decode(kb[y], mb)
            if na + nb > MAXP:
                raise OverflowError("product exceeds the 8-photon key capacity")
            i = 0
            j = 0
            k = 0
            while i < na and j < nb:
                if ma[i] <= mb[j]:
                    merged[k] = ma[i]
                    i += 1
                else:
                    merged[k] = mb[j]
                    j += 1
                k += 1
            while i < na:
                merged[k] = ma[i]
                i += 1
                k += 1
            while j < nb:
                merged[k] = mb[j]
                j += 1
                k += 1
            if vetoed(merged, k, &v):
                continue
            pb = pa * cb[y]
            out.add(encode(merged, k), pb.real, pb.imag)
    return out.finish(prune)
