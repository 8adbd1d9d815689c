"""Hot numeric kernels: complex Hessenberg/QR eigensolver, LU, Pade expm core,
RK4 integration, and repeated-propagation loops.

Every driver below is written once and decorated with ``njit`` from
``_accel``; under the numpy fallback the decorator is a no-op and the same
source runs vectorized.  The innermost O(n^3) update helpers exist in two
variants (scalar loops for numba, slice arithmetic for numpy) because the
fast form differs between the two execution models.
"""
import numpy as np

from ._accel import NUMBA_ENABLED, njit

EPS = float(np.finfo(np.float64).eps)

# width of the panel used by the blocked LU; trailing updates go through
# np.dot so they hit BLAS on both backends
_LU_BLOCK = 64

if NUMBA_ENABLED:

    @njit(cache=True)
    def _rot_rows(h, i, jlo, c, s):
        sc = np.conj(s)
        for j in range(jlo, h.shape[1]):
            t1 = h[i, j]
            t2 = h[i + 1, j]
            h[i, j] = c * t1 + s * t2
            h[i + 1, j] = -sc * t1 + c * t2

    @njit(cache=True)
    def _rot_cols(h, jhi, i, c, s):
        sc = np.conj(s)
        for j in range(jhi):
            t1 = h[j, i]
            t2 = h[j, i + 1]
            h[j, i] = c * t1 + sc * t2
            h[j, i + 1] = -s * t1 + c * t2

    @njit(cache=True)
    def _panel_rank1(a, k, k1):
        for i in range(k + 1, a.shape[0]):
            lik = a[i, k]
            if lik != 0:
                for j in range(k + 1, k1):
                    a[i, j] -= lik * a[k, j]

    @njit(cache=True)
    def _col_scale(a, k):
        akk = a[k, k]
        for i in range(k + 1, a.shape[0]):
            a[i, k] /= akk

else:

    def _rot_rows(h, i, jlo, c, s):
        r1 = h[i, jlo:]
        r2 = h[i + 1, jlo:]
        t1 = c * r1 + s * r2
        r2 *= c
        r2 -= np.conj(s) * r1
        r1[:] = t1

    def _rot_cols(h, jhi, i, c, s):
        c1 = h[:jhi, i].copy()
        c2 = h[:jhi, i + 1]
        h[:jhi, i] = c * c1 + np.conj(s) * c2
        h[:jhi, i + 1] = -s * c1 + c * c2

    def _panel_rank1(a, k, k1):
        a[k + 1:, k + 1:k1] -= a[k + 1:, k].reshape(-1, 1) * a[k, k + 1:k1].reshape(1, -1)

    def _col_scale(a, k):
        a[k + 1:, k] /= a[k, k]


@njit(cache=True)
def hessenberg(a):
    """Unitary reduction to upper Hessenberg form: returns (h, q), a = q h q*."""
    n = a.shape[0]
    h = a.copy()
    q = np.eye(n, dtype=np.complex128)
    for k in range(n - 2):
        xnorm = np.sqrt(np.sum(np.abs(h[k + 1:, k]) ** 2))
        if xnorm == 0.0:
            continue
        x0 = h[k + 1, k]
        phase = x0 / abs(x0) if x0 != 0 else 1.0 + 0.0j
        v = np.zeros(n, dtype=np.complex128)
        v[k + 1:] = h[k + 1:, k]
        v[k + 1] += phase * xnorm
        vnorm2 = np.sum(np.abs(v) ** 2)
        if vnorm2 == 0.0:
            continue
        beta = 2.0 / vnorm2
        w = beta * np.dot(np.conj(v), h)
        h -= v.reshape(-1, 1) * w.reshape(1, -1)
        w2 = beta * np.dot(h, v)
        h -= w2.reshape(-1, 1) * np.conj(v).reshape(1, -1)
        wq = beta * np.dot(q, v)
        q -= wq.reshape(-1, 1) * np.conj(v).reshape(1, -1)
        h[k + 2:, k] = 0.0
    return h, q


@njit(cache=True)
def _givens(f, g):
    """c real, s complex with [[c, s], [-conj(s), c]] @ (f, g) = (r, 0)."""
    if g == 0:
        return 1.0, 0.0 + 0.0j
    if f == 0:
        return 0.0, np.conj(g) / abs(g)
    af = abs(f)
    d = np.sqrt(af * af + abs(g) * abs(g))
    return af / d, (f / af) * np.conj(g) / d


@njit(cache=True)
def qr_schur(h, q, max_sweeps, want_q):
    """Shifted QR on Hessenberg h, in place, to upper triangular (Schur) form.

    Accumulates the similarity into q when want_q.  Returns the number of
    sweeps used, or -1 if max_sweeps was exhausted before deflation finished.
    """
    n = h.shape[0]
    hi = n - 1
    sweeps = 0
    stagnation = 0
    while hi > 0:
        lo = hi
        while lo > 0:
            s = abs(h[lo - 1, lo - 1]) + abs(h[lo, lo])
            if s == 0.0:
                s = 1.0
            if abs(h[lo, lo - 1]) <= EPS * s:
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            hi -= 1
            stagnation = 0
            continue
        sweeps += 1
        stagnation += 1
        if sweeps > max_sweeps:
            return -1
        a = h[hi - 1, hi - 1]
        b = h[hi - 1, hi]
        c2 = h[hi, hi - 1]
        d = h[hi, hi]
        if stagnation % 20 == 0:
            # exceptional shift to break rare cycles; deterministic
            mu = d + 0.75 * abs(c2)
        else:
            # Wilkinson: root of the trailing 2x2 closest to the corner entry
            tr = a + d
            disc = np.sqrt(tr * tr - 4.0 * (a * d - b * c2))
            r1 = 0.5 * (tr + disc)
            r2 = 0.5 * (tr - disc)
            mu = r1 if abs(r1 - d) < abs(r2 - d) else r2
        f = h[lo, lo] - mu
        g = h[lo + 1, lo]
        for i in range(lo, hi):
            c, s = _givens(f, g)
            _rot_rows(h, i, max(0, i - 1), c, s)
            _rot_cols(h, min(i + 2, hi) + 1, i, c, s)
            if want_q:
                _rot_cols(q, n, i, c, s)
            if i < hi - 1:
                f = h[i + 1, i]
                g = h[i + 2, i]
    return sweeps


@njit(cache=True)
def schur_vectors(t, q):
    """Right eigenvectors of the original matrix from its Schur form t, q."""
    n = t.shape[0]
    vecs = np.zeros((n, n), dtype=np.complex128)
    smin = max(EPS * np.sum(np.abs(np.diag(t))), 1e-300)
    for j in range(n):
        x = np.zeros(n, dtype=np.complex128)
        x[j] = 1.0
        lam = t[j, j]
        for i in range(j - 1, -1, -1):
            ssum = np.dot(t[i, i + 1:j + 1], x[i + 1:j + 1])
            d = t[i, i] - lam
            if abs(d) < smin:
                # defective or clustered eigenvalue: perturb the pivot
                d = complex(smin)
            x[i] = -ssum / d
        y = np.dot(q, x)
        nrm = np.sqrt(np.sum(np.abs(y) ** 2))
        if nrm > 0:
            y = y / nrm
        # deterministic phase: largest-magnitude component made real positive
        imax = np.argmax(np.abs(y))
        piv = y[imax]
        if piv != 0:
            y = y * (np.conj(piv) / abs(piv))
        vecs[:, j] = y
    return vecs


@njit(cache=True)
def eigvals_hessenberg_qr(a, max_sweeps):
    """Eigenvalues only; returns (values, sweeps) with sweeps = -1 on failure."""
    h, q = hessenberg(a)
    sweeps = qr_schur(h, q, max_sweeps, False)
    return np.diag(h).copy(), sweeps


@njit(cache=True)
def eigvals_batch(mats, max_sweeps):
    """Eigenvalues of a stack of small matrices; unsorted, row per matrix."""
    m = mats.shape[0]
    n = mats.shape[1]
    out = np.empty((m, n), dtype=np.complex128)
    for i in range(m):
        vals, sweeps = eigvals_hessenberg_qr(mats[i].copy(), max_sweeps)
        if sweeps < 0:
            return out[:0]
        out[i] = vals
    return out


@njit(cache=True)
def lu_factor(a):
    """Blocked LU with partial pivoting, in place; returns pivot rows."""
    n = a.shape[0]
    piv = np.empty(n, dtype=np.int64)
    for k0 in range(0, n, _LU_BLOCK):
        k1 = min(k0 + _LU_BLOCK, n)
        for k in range(k0, k1):
            p = k + np.argmax(np.abs(a[k:, k]))
            piv[k] = p
            if p != k:
                tmp = a[k, :].copy()
                a[k, :] = a[p, :]
                a[p, :] = tmp
            if a[k, k] == 0:
                continue
            _col_scale(a, k)
            _panel_rank1(a, k, k1)
        if k1 < n:
            # U block row: unit-lower solve against the panel diagonal block
            for k in range(k0, k1):
                for i in range(k + 1, k1):
                    lik = a[i, k]
                    if lik != 0:
                        a[i, k1:] -= lik * a[k, k1:]
            lpan = np.ascontiguousarray(a[k1:, k0:k1])
            upan = np.ascontiguousarray(a[k0:k1, k1:])
            a[k1:, k1:] -= np.dot(lpan, upan)
    return piv


@njit(cache=True)
def lu_solve_matrix(lu, piv, b):
    """Solve A X = B from lu_factor output; B is n x m."""
    n = lu.shape[0]
    x = b.copy()
    for k in range(n):
        p = piv[k]
        if p != k:
            tmp = x[k, :].copy()
            x[k, :] = x[p, :]
            x[p, :] = tmp
    for k0 in range(0, n, _LU_BLOCK):
        k1 = min(k0 + _LU_BLOCK, n)
        for k in range(k0, k1):
            for i in range(k + 1, k1):
                lik = lu[i, k]
                if lik != 0:
                    x[i, :] -= lik * x[k, :]
        if k1 < n:
            lpan = np.ascontiguousarray(lu[k1:, k0:k1])
            x[k1:, :] -= np.dot(lpan, np.ascontiguousarray(x[k0:k1, :]))
    nblocks = (n + _LU_BLOCK - 1) // _LU_BLOCK
    for blk in range(nblocks - 1, -1, -1):
        k0 = blk * _LU_BLOCK
        k1 = min(k0 + _LU_BLOCK, n)
        for k in range(k1 - 1, k0 - 1, -1):
            x[k, :] /= lu[k, k]
            for i in range(k0, k):
                uik = lu[i, k]
                if uik != 0:
                    x[i, :] -= uik * x[k, :]
        if k0 > 0:
            upan = np.ascontiguousarray(lu[:k0, k0:k1])
            x[:k0, :] -= np.dot(upan, np.ascontiguousarray(x[k0:k1, :]))
    return x


# [13/13] Pade numerator coefficients for exp; denominator is the same with
# alternating signs, which the U/V split below encodes
_PADE13 = np.array(
    [
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
        1187353796428800.0, 129060195264000.0, 10559470521600.0,
        670442572800.0, 33522128640.0, 1323241920.0,
        40840800.0, 960960.0, 16380.0, 182.0, 1.0,
    ]
)
THETA13 = 5.371920351148152


@njit(cache=True)
def expm_core(a):
    """Scaling-and-squaring expm, fixed Pade order 13.

    Returns (result, ok); ok = False when a non-finite value appeared while
    squaring (result must then be discarded by the caller).
    """
    n = a.shape[0]
    nrm = 0.0
    for j in range(n):
        cs = np.sum(np.abs(a[:, j]))
        if cs > nrm:
            nrm = cs
    s = 0
    if nrm > THETA13:
        s = int(np.ceil(np.log2(nrm / THETA13)))
        if s > 64:
            return a, False
    asc = a / (2.0 ** s)
    ident = np.eye(n, dtype=np.complex128)
    a2 = np.dot(asc, asc)
    a4 = np.dot(a2, a2)
    a6 = np.dot(a2, a4)
    b = _PADE13
    u = np.dot(
        asc,
        np.dot(a6, b[13] * a6 + b[11] * a4 + b[9] * a2)
        + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident,
    )
    v = (
        np.dot(a6, b[12] * a6 + b[10] * a4 + b[8] * a2)
        + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident
    )
    lhs = v - u
    rhs = v + u
    piv = lu_factor(lhs)
    x = lu_solve_matrix(lhs, piv, rhs)
    for _ in range(s):
        x = np.dot(x, x)
        if not np.all(np.isfinite(x.real)) or not np.all(np.isfinite(x.imag)):
            return x, False
    return x, True


@njit(cache=True)
def rk4_schrodinger(h, psi0, n_steps, dt):
    """Fixed-step RK4 for i d/dt psi = h psi; records psi after every step."""
    n = psi0.shape[0]
    out = np.empty((n_steps + 1, n), dtype=np.complex128)
    out[0] = psi0
    psi = psi0.copy()
    for m in range(n_steps):
        k1 = -1j * np.dot(h, psi)
        k2 = -1j * np.dot(h, psi + (0.5 * dt) * k1)
        k3 = -1j * np.dot(h, psi + (0.5 * dt) * k2)
        k4 = -1j * np.dot(h, psi + dt * k3)
        psi = psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[m + 1] = psi
    return out


@njit(cache=True)
def propagate_collect(u, psi0, n_steps, norm_cap):
    """Repeatedly apply the one-step propagator u, collecting states.

    Stops early when the squared norm exceeds norm_cap (deep broken phase);
    returns (states, n_valid) where n_valid counts the recorded samples.
    """
    n = psi0.shape[0]
    states = np.zeros((n_steps + 1, n), dtype=np.complex128)
    states[0] = psi0
    psi = psi0.copy()
    n_valid = n_steps + 1
    for m in range(n_steps):
        psi = np.dot(u, psi)
        nrm2 = np.sum(psi.real ** 2 + psi.imag ** 2)
        if not np.isfinite(nrm2) or nrm2 > norm_cap:
            n_valid = m + 1
            break
        states[m + 1] = psi
    return states, n_valid
