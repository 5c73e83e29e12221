# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled pairwise kernels for Witten-Bell smoothed unigram comparisons.

Each account is a sorted array of word ids with matching counts. The two
accounts of a pair are smoothed over the union of their observed types.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, exp2

cnp.import_array()

cdef double LN2 = log(2.0)


cdef void _pair(const cnp.int64_t[:] ia, const double[:] ca, const double[:] la,
                const cnp.int64_t[:] ib, const double[:] cb, const double[:] lb,
                double* kl2, double* h_ab, double* h_ba) noexcept nogil:
    # la, lb hold log(counts); the merge loop needs no transcendental calls
    cdef Py_ssize_t na = ia.shape[0], nb = ib.shape[0]
    cdef Py_ssize_t i = 0, j = 0, union_size = 0
    cdef double n_a = 0.0, n_b = 0.0, z_a, z_b
    cdef double inv_a, inv_b, off_a, off_b, un_a = 0.0, un_b = 0.0, lun_a = 0.0, lun_b = 0.0
    cdef double p, q, lp, lq, acc_kl = 0.0, acc_ab = 0.0, acc_ba = 0.0

    while i < na and j < nb:
        if ia[i] == ib[j]:
            i += 1
            j += 1
        elif ia[i] < ib[j]:
            i += 1
        else:
            j += 1
        union_size += 1
    union_size += (na - i) + (nb - j)

    for i in range(na):
        n_a += ca[i]
    for j in range(nb):
        n_b += cb[j]
    z_a = <double>(union_size - na)
    z_b = <double>(union_size - nb)
    # observed: c / (n + t); unseen: t / (z (n + t)); z == 0 falls back to c / n
    if z_a == 0.0:
        inv_a = 1.0 / n_a
    else:
        inv_a = 1.0 / (n_a + na)
        un_a = na * inv_a / z_a
        lun_a = log(un_a)
    if z_b == 0.0:
        inv_b = 1.0 / n_b
    else:
        inv_b = 1.0 / (n_b + nb)
        un_b = nb * inv_b / z_b
        lun_b = log(un_b)
    off_a = log(inv_a)
    off_b = log(inv_b)

    i = 0
    j = 0
    while i < na or j < nb:
        if j >= nb or (i < na and ia[i] < ib[j]):
            p = ca[i] * inv_a
            lp = la[i] + off_a
            q = un_b
            lq = lun_b
            i += 1
        elif i >= na or ib[j] < ia[i]:
            p = un_a
            lp = lun_a
            q = cb[j] * inv_b
            lq = lb[j] + off_b
            j += 1
        else:
            p = ca[i] * inv_a
            lp = la[i] + off_a
            q = cb[j] * inv_b
            lq = lb[j] + off_b
            i += 1
            j += 1
        acc_kl += (p - q) * (lp - lq)
        acc_ab -= p * lq
        acc_ba -= q * lp

    kl2[0] = acc_kl
    h_ab[0] = acc_ab / LN2
    h_ba[0] = acc_ba / LN2


def pair_scores(cnp.int64_t[:] ia, double[:] ca, cnp.int64_t[:] ib, double[:] cb):
    """Return ``(kl2, H(a,b), H(b,a))`` for one pair of sparse count vectors."""
    cdef double kl2, h_ab, h_ba
    cdef double[:] la = np.log(ca)
    cdef double[:] lb = np.log(cb)
    with nogil:
        _pair(ia, ca, la, ib, cb, lb, &kl2, &h_ab, &h_ba)
    return kl2, h_ab, h_ba


def kl2_pp2_row(cnp.int64_t[:] q_ids, double[:] q_counts,
                cnp.int64_t[:] indptr, cnp.int64_t[:] indices, double[:] data):
    """Score one query against every row of a CSR candidate matrix.

    Returns two float64 arrays: symmetric KL divergence (nats) and
    symmetric perplexity.
    """
    cdef Py_ssize_t n = indptr.shape[0] - 1, r
    out_kl = np.empty(n, dtype=np.float64)
    out_pp = np.empty(n, dtype=np.float64)
    cdef double[:] okl = out_kl
    cdef double[:] opp = out_pp
    cdef double kl2, h_ab, h_ba
    cdef double[:] lq = np.log(q_counts)
    cdef double[:] ld = np.log(data)
    with nogil:
        for r in range(n):
            _pair(q_ids, q_counts, lq,
                  indices[indptr[r]:indptr[r + 1]], data[indptr[r]:indptr[r + 1]], ld[indptr[r]:indptr[r + 1]],
                  &kl2, &h_ab, &h_ba)
            okl[r] = kl2
            opp[r] = exp2(h_ab) + exp2(h_ba)
    return out_kl, out_pp
