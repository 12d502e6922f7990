# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled sparse polynomial kernels (same API as ``_kernels``)."""


cpdef tuple mono_mul(tuple m1, tuple m2):
    cdef Py_ssize_t n1 = len(m1), n2 = len(m2)
    cdef Py_ssize_t i = 0, j = 0
    cdef long c1, c2
    cdef tuple p1, p2
    if n1 == 0:
        return m2
    if n2 == 0:
        return m1
    cdef list out = []
    while i < n1 and j < n2:
        p1 = <tuple>m1[i]
        p2 = <tuple>m2[j]
        c1 = p1[0]
        c2 = p2[0]
        if c1 == c2:
            out.append((c1, p1[1] + p2[1]))
            i += 1
            j += 1
        elif c1 < c2:
            out.append(p1)
            i += 1
        else:
            out.append(p2)
            j += 1
    while i < n1:
        out.append(m1[i])
        i += 1
    while j < n2:
        out.append(m2[j])
        j += 1
    return tuple(out)


cpdef dict poly_mul(dict t1, dict t2):
    cdef dict out = {}
    cdef tuple k1, k2, key
    cdef object c1, c2, v
    cdef long g1, g2
    for k1, c1 in t1.items():
        g1 = k1[0]
        for k2, c2 in t2.items():
            g2 = k2[0]
            if g1 and g2:
                continue
            key = (g1 or g2, mono_mul(<tuple>k1[1], <tuple>k2[1]))
            v = out.get(key, 0) + c1 * c2
            if v:
                out[key] = v
            else:
                out.pop(key, None)
    return out


cpdef void poly_add_into(dict acc, dict t, object scale=1):
    cdef tuple key
    cdef object c, v
    for key, c in t.items():
        v = acc.get(key, 0) + scale * c
        if v:
            acc[key] = v
        else:
            acc.pop(key, None)
