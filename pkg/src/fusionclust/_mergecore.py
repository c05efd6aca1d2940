"""Jitted inner loop of the merge-path construction.

4-ary array heap keyed on (distance, left slot index).  Stale entries are
invalidated lazily by a per-slot stamp (bumped whenever the slot's right-hand
pair changes; -1 marks a merged-away slot), and the heap is compacted and
re-heapified whenever stale entries outnumber live ones, so its size tracks
the shrinking number of live pairs.  Data is laid out for cache friendliness:
per-slot sums/counts interleaved in one float array, link/span indices
interleaved in one int array, and each heap entry split into an 8-byte key
plus one packed 8-byte payload so sift comparisons mostly touch a single
array.  Arithmetic matches the pure-python fallback in ``path.py`` operation
for operation, so both produce bit-identical events.
"""

import numpy as np
from numba import njit

MAX_JIT_SLOTS = 1 << 31  # payload packs (slot, stamp) into one int64


@njit(cache=True)
def _merge_loop(vals, counts):
    m = vals.shape[0]
    n_ev = m - 1
    lam = np.empty(n_ev)
    lsz = np.empty(n_ev, np.int64)
    rsz = np.empty(n_ev, np.int64)
    lmean = np.empty(n_ev)
    rmean = np.empty(n_ev)
    lmax = np.empty(n_ev)
    rmin = np.empty(n_ev)
    span_lo = np.empty(n_ev, np.int64)
    span_hi = np.empty(n_ev, np.int64)
    bnd = np.empty(n_ev, np.int64)

    # slot state: sums/counts interleaved (counts stay exact as doubles),
    # nxt/prv/lo/hi interleaved, stamps separate
    sc = np.empty(2 * m)
    li = np.empty(4 * m, np.int32)
    st = np.zeros(m, np.int32)
    for j in range(m):
        sc[2 * j] = vals[j] * counts[j]
        sc[2 * j + 1] = counts[j]
        li[4 * j] = j + 1
        li[4 * j + 1] = j - 1
        li[4 * j + 2] = j
        li[4 * j + 3] = j
    li[4 * (m - 1)] = -1

    cap = 3 * m + 4  # one initial entry per pair plus at most two per merge
    hd = np.empty(cap)
    hp = np.empty(cap, np.int64)  # payload: (slot << 32) | stamp
    hn = m - 1
    for j in range(m - 1):
        hd[j] = (sc[2 * j + 2] / sc[2 * j + 3] - sc[2 * j] / sc[2 * j + 1]) / (
            sc[2 * j + 1] + sc[2 * j + 3]
        )
        hp[j] = np.int64(j) << 32
    # bottom-up 4-ary heapify
    for root in range((hn - 2) >> 2, -1, -1):
        i = root
        d_i = hd[i]
        p_i = hp[i]
        while True:
            c = 4 * i + 1
            if c >= hn:
                break
            dc = hd[c]
            top = c + 4
            if top > hn:
                top = hn
            for k in range(c + 1, top):
                dk = hd[k]
                if dk < dc or (dk == dc and hp[k] < hp[c]):
                    c = k
                    dc = dk
            if dc < d_i or (dc == d_i and hp[c] < p_i):
                hd[i] = dc
                hp[i] = hp[c]
                i = c
            else:
                break
        hd[i] = d_i
        hp[i] = p_i

    nstamp = 0
    ne = 0
    while ne < n_ev:
        live = n_ev - ne  # one fresh entry per remaining adjacent pair
        if hn > 2 * live and hn > 2048:
            # cull stale entries, then restore heap order bottom-up
            w = 0
            for i in range(hn):
                pay = hp[i]
                if st[np.int32(pay >> 32)] == np.int32(pay & 0x7FFFFFFF):
                    hd[w] = hd[i]
                    hp[w] = pay
                    w += 1
            hn = w
            for root in range((hn - 2) >> 2, -1, -1):
                i = root
                d_i = hd[i]
                p_i = hp[i]
                while True:
                    c = 4 * i + 1
                    if c >= hn:
                        break
                    dc = hd[c]
                    top = c + 4
                    if top > hn:
                        top = hn
                    for k in range(c + 1, top):
                        dk = hd[k]
                        if dk < dc or (dk == dc and hp[k] < hp[c]):
                            c = k
                            dc = dk
                    if dc < d_i or (dc == d_i and hp[c] < p_i):
                        hd[i] = dc
                        hp[i] = hp[c]
                        i = c
                    else:
                        break
                hd[i] = d_i
                hp[i] = p_i

        d = hd[0]
        pay = hp[0]
        a = np.int32(pay >> 32)
        # pop: sift the last entry down from the root
        hn -= 1
        d_i = hd[hn]
        p_i = hp[hn]
        i = 0
        while True:
            c = 4 * i + 1
            if c >= hn:
                break
            dc = hd[c]
            top = c + 4
            if top > hn:
                top = hn
            for k in range(c + 1, top):
                dk = hd[k]
                if dk < dc or (dk == dc and hp[k] < hp[c]):
                    c = k
                    dc = dk
            if dc < d_i or (dc == d_i and hp[c] < p_i):
                hd[i] = dc
                hp[i] = hp[c]
                i = c
            else:
                break
        hd[i] = d_i
        hp[i] = p_i

        if np.int32(pay & 0x7FFFFFFF) != st[a]:
            continue
        b = li[4 * a]
        sa = sc[2 * a]
        ca = sc[2 * a + 1]
        sb = sc[2 * b]
        cb = sc[2 * b + 1]
        lam[ne] = d
        lsz[ne] = np.int64(ca)
        rsz[ne] = np.int64(cb)
        lmean[ne] = sa / ca
        rmean[ne] = sb / cb
        lmax[ne] = vals[li[4 * a + 3]]
        rmin[ne] = vals[li[4 * b + 2]]
        span_lo[ne] = li[4 * a + 2]
        span_hi[ne] = li[4 * b + 3]
        bnd[ne] = li[4 * b + 2]
        ne += 1
        sa += sb
        ca += cb
        sc[2 * a] = sa
        sc[2 * a + 1] = ca
        li[4 * a + 3] = li[4 * b + 3]
        st[b] = -1
        nb = li[4 * b]
        li[4 * a] = nb
        nstamp += 1
        st[a] = nstamp
        if nb != -1:
            li[4 * nb + 1] = a
            dn = (sc[2 * nb] / sc[2 * nb + 1] - sa / ca) / (ca + sc[2 * nb + 1])
            pn = (np.int64(a) << 32) | np.int64(nstamp)
            i = hn
            hn += 1
            while i > 0:
                p = (i - 1) >> 2
                dp = hd[p]
                if dn < dp or (dn == dp and pn < hp[p]):
                    hd[i] = dp
                    hp[i] = hp[p]
                    i = p
                else:
                    break
            hd[i] = dn
            hp[i] = pn
        pa = li[4 * a + 1]
        if pa != -1:
            nstamp += 1
            st[pa] = nstamp
            dn = (sa / ca - sc[2 * pa] / sc[2 * pa + 1]) / (sc[2 * pa + 1] + ca)
            pn = (np.int64(pa) << 32) | np.int64(nstamp)
            i = hn
            hn += 1
            while i > 0:
                p = (i - 1) >> 2
                dp = hd[p]
                if dn < dp or (dn == dp and pn < hp[p]):
                    hd[i] = dp
                    hp[i] = hp[p]
                    i = p
                else:
                    break
            hd[i] = dn
            hp[i] = pn
    return lam, lsz, rsz, lmean, rmean, lmax, rmin, span_lo, span_hi, bnd


def merge_core(vals, counts):
    m = vals.shape[0]
    if m <= 1:
        empty_f = np.empty(0)
        empty_i = np.empty(0, np.int64)
        return (empty_f, empty_i, empty_i.copy(), empty_f.copy(), empty_f.copy(),
                empty_f.copy(), empty_f.copy(), empty_i.copy(), empty_i.copy(),
                empty_i.copy())
    counts = np.ascontiguousarray(counts, dtype=np.int64)
    return _merge_loop(vals, counts)
