"""Dense eigensolvers for small matrices (n <= 64).

Symmetric: cyclic Jacobi.  General real: balancing, Householder Hessenberg
reduction and Francis double-shift QR.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from ._jit import njit

MAX_N = 64
_MAX_SWEEPS = 100
_MAX_QR_ITS = 300  # clustered near-zero pairs converge slowly
_FLUSH = 1e-30  # far below roundoff of the unit-max matrix; keeps balancing sane


class EigenConvergenceError(RuntimeError):
    """Iteration budget exhausted; ``partial`` holds eigenvalues found so far."""

    def __init__(self, msg: str, partial: NDArray | None = None):
        super().__init__(msg)
        self.partial = partial


@dataclass(frozen=True)
class SymSpectrum:
    eigenvalues: NDArray[np.float64]
    eigenvectors: NDArray[np.float64]


@dataclass(frozen=True)
class GenSpectrum:
    eigenvalues: NDArray[np.complex128]
    semisimple_flag: bool
    residuals: NDArray[np.float64]


# ------------------------------------------------------------------ Jacobi


@njit
def _jacobi(a, tol):
    n = a.shape[0]
    v = np.eye(n)
    scale = 0.0
    for i in range(n):
        for j in range(n):
            scale += a[i, j] * a[i, j]
    scale = math.sqrt(scale)
    target = tol * scale
    for sweep in range(_MAX_SWEEPS):
        off = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off += 2.0 * a[p, q] * a[p, q]
        if math.sqrt(off) <= target:
            return np.diag(a).copy(), v, sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq
    return np.diag(a).copy(), v, -1


def _as_square(A) -> NDArray[np.float64]:
    a = np.array(A, dtype=float, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] > MAX_N:
        raise ValueError(f"matrix too large for the dense small solvers (n={a.shape[0]} > {MAX_N})")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def sym_eig(A, tol: float = 1e-14) -> SymSpectrum:
    """Eigen-decomposition of a real symmetric matrix, eigenvalues ascending."""
    a = _as_square(A)
    norm = np.linalg.norm(a)
    if np.linalg.norm(a - a.T) > 1e-12 * norm:
        raise ValueError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    if a.shape[0] == 0:
        return SymSpectrum(np.zeros(0), np.zeros((0, 0)))
    w, v, sweeps = _jacobi(a, tol)
    if sweeps < 0:
        raise EigenConvergenceError("Jacobi iteration did not converge", np.sort(w))
    order = np.argsort(w, kind="stable")
    return SymSpectrum(w[order], v[:, order])


# ------------------------------------------------------------- general QR


@njit
def _balance(a):
    n = a.shape[0]
    radix = 2.0
    sqrdx = radix * radix
    done = False
    while not done:
        done = True
        for i in range(n):
            r = 0.0
            c = 0.0
            for j in range(n):
                if j != i:
                    c += abs(a[j, i])
                    r += abs(a[i, j])
            if c != 0.0 and r != 0.0:
                g = r / radix
                f = 1.0
                s = c + r
                while c < g:
                    f *= radix
                    c *= sqrdx
                g = r * radix
                while c > g:
                    f /= radix
                    c /= sqrdx
                if (c + r) / f < 0.95 * s:
                    done = False
                    g = 1.0 / f
                    for j in range(n):
                        a[i, j] *= g
                    for j in range(n):
                        a[j, i] *= f


@njit
def _hessenberg(a):
    n = a.shape[0]
    for k in range(n - 2):
        alpha = 0.0
        for i in range(k + 1, n):
            alpha += a[i, k] * a[i, k]
        alpha = math.sqrt(alpha)
        if alpha == 0.0:
            continue
        if a[k + 1, k] > 0:
            alpha = -alpha
        v = np.zeros(n)
        for i in range(k + 1, n):
            v[i] = a[i, k]
        v[k + 1] -= alpha
        vn = 0.0
        for i in range(k + 1, n):
            vn += v[i] * v[i]
        if vn == 0.0:
            continue
        for j in range(n):
            s = 0.0
            for i in range(k + 1, n):
                s += v[i] * a[i, j]
            s *= 2.0 / vn
            for i in range(k + 1, n):
                a[i, j] -= s * v[i]
        for i in range(n):
            s = 0.0
            for j in range(k + 1, n):
                s += a[i, j] * v[j]
            s *= 2.0 / vn
            for j in range(k + 1, n):
                a[i, j] -= s * v[j]
        for i in range(k + 2, n):
            a[i, k] = 0.0


@njit
def _sign(a, b):
    return abs(a) if b >= 0.0 else -abs(a)


@njit
def _hqr(h, wr, wi):
    # Francis double-shift QR on an upper Hessenberg matrix; 1-based indices
    # over a zero-padded copy.  Returns 0 on success, -1 on non-convergence.
    n = h.shape[0]
    a = np.zeros((n + 1, n + 1))
    a[1:, 1:] = h
    anorm = 0.0
    for i in range(1, n + 1):
        for j in range(max(i - 1, 1), n + 1):
            anorm += abs(a[i, j])
    nn = n
    t = 0.0
    x = y = z = w = p = q = r = s = 0.0
    while nn >= 1:
        its = 0
        while True:
            l = nn
            while l >= 2:
                s = abs(a[l - 1, l - 1]) + abs(a[l, l])
                if s == 0.0:
                    s = anorm
                # local test, plus a normwise floor for tiny diagonal neighbours
                if abs(a[l, l - 1]) + s == s or abs(a[l, l - 1]) < 1e-17 * anorm:
                    a[l, l - 1] = 0.0
                    break
                l -= 1
            x = a[nn, nn]
            if l == nn:
                wr[nn - 1] = x + t
                wi[nn - 1] = 0.0
                nn -= 1
            else:
                y = a[nn - 1, nn - 1]
                w = a[nn, nn - 1] * a[nn - 1, nn]
                if l == nn - 1:
                    p = 0.5 * (y - x)
                    q = p * p + w
                    z = math.sqrt(abs(q))
                    x += t
                    if q >= 0.0:
                        z = p + _sign(z, p)
                        wr[nn - 2] = x + z
                        wr[nn - 1] = x + z
                        if z != 0.0:
                            wr[nn - 1] = x - w / z
                        wi[nn - 2] = 0.0
                        wi[nn - 1] = 0.0
                    else:
                        wr[nn - 2] = x + p
                        wr[nn - 1] = x + p
                        wi[nn - 2] = -z
                        wi[nn - 1] = z
                    nn -= 2
                else:
                    if its == _MAX_QR_ITS:
                        return -1
                    if its % 10 == 0 and its > 0:
                        t += x
                        for i in range(1, nn + 1):
                            a[i, i] -= x
                        s = abs(a[nn, nn - 1]) + abs(a[nn - 1, nn - 2])
                        x = 0.75 * s
                        y = x
                        w = -0.4375 * s * s
                    its += 1
                    m = nn - 2
                    while True:
                        z = a[m, m]
                        r = x - z
                        s = y - z
                        p = (r * s - w) / a[m + 1, m] + a[m, m + 1]
                        q = a[m + 1, m + 1] - z - r - s
                        r = a[m + 2, m + 1]
                        s = abs(p) + abs(q) + abs(r)
                        p /= s
                        q /= s
                        r /= s
                        if m == l:
                            break
                        u = abs(a[m, m - 1]) * (abs(q) + abs(r))
                        v = abs(p) * (abs(a[m - 1, m - 1]) + abs(z) + abs(a[m + 1, m + 1]))
                        if u + v == v:
                            break
                        m -= 1
                    for i in range(m + 2, nn + 1):
                        a[i, i - 2] = 0.0
                        if i != m + 2:
                            a[i, i - 3] = 0.0
                    for k in range(m, nn):
                        if k != m:
                            p = a[k, k - 1]
                            q = a[k + 1, k - 1]
                            r = 0.0
                            if k != nn - 1:
                                r = a[k + 2, k - 1]
                            x = abs(p) + abs(q) + abs(r)
                            if x != 0.0:
                                p /= x
                                q /= x
                                r /= x
                        s = _sign(math.sqrt(p * p + q * q + r * r), p)
                        if s != 0.0:
                            if k == m:
                                if l != m:
                                    a[k, k - 1] = -a[k, k - 1]
                            else:
                                a[k, k - 1] = -s * x
                            p += s
                            x = p / s
                            y = q / s
                            z = r / s
                            q /= p
                            r /= p
                            for j in range(k, nn + 1):
                                p = a[k, j] + q * a[k + 1, j]
                                if k != nn - 1:
                                    p += r * a[k + 2, j]
                                    a[k + 2, j] -= p * z
                                a[k + 1, j] -= p * y
                                a[k, j] -= p * x
                            mmin = nn if nn < k + 3 else k + 3
                            for i in range(l, mmin + 1):
                                p = x * a[i, k] + y * a[i, k + 1]
                                if k != nn - 1:
                                    p += z * a[i, k + 2]
                                    a[i, k + 2] -= p * r
                                a[i, k + 1] -= p * q
                                a[i, k] -= p
            if l >= nn - 1:
                break
    return 0


def _eigvals_general(a: NDArray[np.float64]) -> NDArray[np.complex128]:
    n = a.shape[0]
    if n == 0:
        return np.zeros(0, dtype=complex)
    big = float(np.max(np.abs(a)))
    if big == 0.0:
        return np.zeros(n, dtype=complex)
    a /= big  # QR deflation tests are absolute near underflow
    a[np.abs(a) < _FLUSH] = 0.0
    _balance(a)
    rescale = float(np.max(np.abs(a)))  # balancing can shrink a nilpotent-like matrix
    a /= rescale
    a[np.abs(a) < _FLUSH] = 0.0
    big *= rescale
    _hessenberg(a)
    wr = np.zeros(n)
    wi = np.zeros(n)
    if _hqr(a, wr, wi) != 0:
        raise EigenConvergenceError("QR iteration did not converge", big * (wr + 1j * wi))
    return big * (wr + 1j * wi)


def smallest_singular_values(B: NDArray[np.complex128]) -> NDArray[np.float64]:
    """Singular values of a complex matrix, ascending, via Jacobi on a real embedding."""
    n = B.shape[0]
    br = np.block([[B.real, -B.imag], [B.imag, B.real]])
    aug = np.zeros((4 * n, 4 * n))
    aug[: 2 * n, 2 * n :] = br
    aug[2 * n :, : 2 * n] = br.T
    w, _, sweeps = _jacobi(aug, 1e-15)
    if sweeps < 0:
        raise EigenConvergenceError("Jacobi iteration did not converge")
    # each singular value appears as +-s, twice
    return np.sort(np.abs(w))[::4]


def _sort_spectrum(ev: NDArray[np.complex128]) -> NDArray[np.complex128]:
    return ev[np.lexsort((ev.imag, ev.real))]


def gen_eig(A, tol: float = 1e-8, cluster_tol: float = 1e-6) -> GenSpectrum:
    """Eigenvalues of a real matrix with a semisimplicity check.

    Eigenvalues closer than ``cluster_tol * max(1, |A|)`` form one cluster; the
    cluster is semisimple when ``A - mu I`` has as many singular values below
    ``tol * max(1, |A|)`` as the cluster size.
    """
    a = _as_square(A)
    n = a.shape[0]
    ev = _sort_spectrum(_eigvals_general(a.copy()))
    scale = max(1.0, float(np.linalg.norm(a)))
    resid = np.zeros(n)
    semisimple = True
    seen = np.zeros(n, dtype=bool)
    eye = np.eye(n)
    for i in range(n):
        if seen[i]:
            continue
        members = np.flatnonzero(~seen & (np.abs(ev - ev[i]) < cluster_tol * scale))
        seen[members] = True
        mu = ev[members].mean()
        sv = smallest_singular_values(a - mu * eye)
        resid[members] = sv[0] / scale
        if len(members) > 1 and np.count_nonzero(sv < tol * scale) < len(members):
            semisimple = False
    return GenSpectrum(ev, semisimple, resid)
