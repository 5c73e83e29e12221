"""Pure numpy implementation of the pairwise kernels.

Mirrors ``_kernels.pyx`` call for call; used when the extension is not built
or when ``STYLOMATCH_PURE_PYTHON`` is set.
"""

import numpy as np


def _smoothed(counts, n_types, union_size):
    n = counts.sum()
    z = union_size - n_types
    if z == 0:
        return counts / n
    t = float(n_types)
    return np.where(counts > 0, counts / (n + t), t / (z * (n + t)))


def pair_scores(ia, ca, ib, cb):
    """Return ``(kl2, H(a,b), H(b,a))`` for one pair of sparse count vectors."""
    union = np.union1d(ia, ib)
    dense_a = np.zeros(union.shape[0])
    dense_b = np.zeros(union.shape[0])
    dense_a[np.searchsorted(union, ia)] = ca
    dense_b[np.searchsorted(union, ib)] = cb
    p = _smoothed(dense_a, ia.shape[0], union.shape[0])
    q = _smoothed(dense_b, ib.shape[0], union.shape[0])
    kl2 = float(np.sum((p - q) * (np.log(p) - np.log(q))))
    h_ab = -float(np.sum(p * np.log2(q)))
    h_ba = -float(np.sum(q * np.log2(p)))
    return kl2, h_ab, h_ba


def kl2_pp2_row(q_ids, q_counts, indptr, indices, data):
    """Score one query against every row of a CSR candidate matrix."""
    n = indptr.shape[0] - 1
    out_kl = np.empty(n)
    out_pp = np.empty(n)
    for r in range(n):
        lo, hi = indptr[r], indptr[r + 1]
        kl2, h_ab, h_ba = pair_scores(q_ids, q_counts, indices[lo:hi], data[lo:hi])
        out_kl[r] = kl2
        out_pp[r] = 2.0**h_ab + 2.0**h_ba
    return out_kl, out_pp
