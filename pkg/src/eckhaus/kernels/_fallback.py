"""Vectorised numpy versions of the compiled kernels (same signatures)."""
import numpy as np


def _shifted_rows(P, offset):
    # for each output index e, the partner index offset + e - p
    e = np.arange(P)[:, None]
    p = np.arange(P)[None, :]
    q = e - p + offset
    return q, (q >= 0) & (q < P)


def quad_conv(U, tab, T):
    P, n = U.shape
    M = (P - 1) // 2
    W = np.einsum("ijl,pj,ql->pqi", T, U, U) * tab[:, :, None]
    q, ok = _shifted_rows(P, M)
    p = np.broadcast_to(np.arange(P)[None, :], q.shape)
    vals = W[p, np.where(ok, q, 0)] * ok[:, :, None]
    return vals.sum(axis=1)


def cubic_conv(U, tab3, T4):
    P, n = U.shape
    M = (P - 1) // 2
    out = np.zeros((P, n), dtype=np.complex128)
    e = np.arange(P)[:, None]
    q = np.arange(P)[None, :]
    qq = np.broadcast_to(q, (P, P))
    for p in range(P):
        r = e - p - q + 2 * M
        ok = (r >= 0) & (r < P)
        rr = np.where(ok, r, 0)
        w = tab3[p][qq, rr] * ok
        TU = np.einsum("ijkl,j->ikl", T4, U[p])
        contrib = np.einsum("ikl,qk,eql->ieq", TU, U, U[rr]) * w[None]
        out += contrib.sum(axis=2).T
    return out


def quad_bloch(U, tab, T, slot):
    P, n = U.shape
    M = (P - 1) // 2
    e = np.arange(P)[:, None]
    f = np.arange(P)[None, :]
    p = e - f + M
    ok = (p >= 0) & (p < P)
    pp = np.where(ok, p, 0)
    ff = np.broadcast_to(f, pp.shape)
    if slot == 0:
        TU = np.einsum("iab,pb->pia", T, U)
    else:
        TU = np.einsum("iba,pb->pia", T, U)
    w = tab[pp, ff] * ok
    blocks = TU[pp] * w[:, :, None, None]
    return blocks.transpose(0, 2, 1, 3).reshape(P * n, P * n)


def cubic_bloch(U, tab3, T4, slot):
    P, n = U.shape
    M = (P - 1) // 2
    perm = {0: "iabc", 1: "ibac", 2: "ibca"}[slot]
    TUU = np.einsum(perm + ",pb,qc->pqia", T4, U, U)
    e = np.arange(P)[:, None]
    f = np.arange(P)[None, :]
    ff = np.broadcast_to(f, (P, P))
    blocks = np.zeros((P, P, n, n), dtype=np.complex128)
    for p in range(P):
        q = e - f - p + 2 * M
        ok = (q >= 0) & (q < P)
        qq = np.where(ok, q, 0)
        w = tab3[p][qq, ff] * ok
        blocks += TUU[p][qq] * w[:, :, None, None]
    return blocks.transpose(0, 2, 1, 3).reshape(P * n, P * n)
