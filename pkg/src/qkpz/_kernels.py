"""Pure-Python sparse polynomial kernels.

A monomial is a tuple of ``(code, exponent)`` pairs sorted by code.  A term
key is ``(grade, monomial)`` where ``grade`` is 0 (ungraded) or the index of a
nilpotent grading symbol.  Two graded factors multiply to zero.

The compiled module ``_speedups`` exposes the same functions; ``symexpr``
picks whichever is available at import time.
"""
from __future__ import annotations


def mono_mul(m1: tuple, m2: tuple) -> tuple:
    if not m1:
        return m2
    if not m2:
        return m1
    out = []
    i = j = 0
    n1, n2 = len(m1), len(m2)
    while i < n1 and j < n2:
        c1, e1 = m1[i]
        c2, e2 = m2[j]
        if c1 == c2:
            out.append((c1, e1 + e2))
            i += 1
            j += 1
        elif c1 < c2:
            out.append(m1[i])
            i += 1
        else:
            out.append(m2[j])
            j += 1
    if i < n1:
        out.extend(m1[i:])
    if j < n2:
        out.extend(m2[j:])
    return tuple(out)


def poly_mul(t1: dict, t2: dict) -> dict:
    out: dict = {}
    get = out.get
    for (g1, m1), c1 in t1.items():
        for (g2, m2), c2 in t2.items():
            if g1 and g2:
                continue
            key = (g1 or g2, mono_mul(m1, m2))
            v = get(key, 0) + c1 * c2
            if v:
                out[key] = v
            else:
                out.pop(key, None)
    return out


def poly_add_into(acc: dict, t: dict, scale=1) -> None:
    """In-place ``acc += scale * t``."""
    get = acc.get
    for key, c in t.items():
        v = get(key, 0) + scale * c
        if v:
            acc[key] = v
        else:
            acc.pop(key, None)
