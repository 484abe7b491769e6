"""Hot loops: segmented sieving and batched Frobenius cycle types.

Each kernel has two implementations with identical outputs:

* a numba ``@njit`` version, looping prime by prime;
* a pure-numpy version, vectorized across the whole prime batch.

``BACKEND`` is ``"numba"`` when numba imports and ``FROBDENS_BACKEND`` is not
set to ``"numpy"``.  Both variants stay importable (``*_numba`` / ``*_numpy``)
so tests and the benchmark can compare them directly.

Cycle types use root counting instead of polynomial division: with
``Frob`` the Frobenius matrix of ``F_p[x]/(f)``, ``x^(p^k) mod f`` is obtained by
applying ``Frob`` k times, ``r_k = deg gcd(f, x^(p^k) - x)`` counts roots of
``f`` in ``F_(p^k)``, and Moebius inversion of ``r_k = sum_{j | k} j n_j``
yields the number ``n_k`` of irreducible factors of degree ``k``.  Only
``k <= n/2`` is needed: whatever degree is left over is a single factor.
"""
from __future__ import annotations

import os

import numpy as np

try:  # pragma: no cover - exercised implicitly
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

_requested = os.environ.get("FROBDENS_BACKEND", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise ImportError(f"FROBDENS_BACKEND must be 'numba' or 'numpy', got {_requested!r}")
BACKEND = "numba" if HAVE_NUMBA and _requested != "numpy" else "numpy"

MAX_DEGREE = 7
# products of residues must fit in int64: p < 2^30
_P_LIMIT = 1 << 30
# below this, (2n - 1) * p^2 < 2^62 so convolution and reduction may skip
# per-term reduction
_P_LAZY = 1 << 29


# ---------------------------------------------------------------------------
# Sieve


def base_primes(limit: int) -> np.ndarray:
    """Primes ``<= limit`` by a plain Eratosthenes sieve (small limits only)."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for q in range(2, int(limit**0.5) + 1):
        if flags[q]:
            flags[q * q :: q] = False
    return np.flatnonzero(flags).astype(np.int64)


def sieve_segment_numpy(lo: int, hi: int, primes: np.ndarray) -> np.ndarray:
    """Primes in ``[lo, hi)``; ``primes`` must contain every prime ``<= sqrt(hi)``."""
    lo = max(lo, 2)
    if hi <= lo:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(hi - lo, dtype=bool)
    for q in primes:
        q = int(q)
        if q * q >= hi:
            break
        start = max(q * q, (lo + q - 1) // q * q)
        flags[start - lo :: q] = False
    return np.flatnonzero(flags).astype(np.int64) + lo


if HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def _sieve_flags_nb(lo, hi, primes):
        flags = np.ones(hi - lo, dtype=np.bool_)
        for t in range(primes.shape[0]):
            q = primes[t]
            if q * q >= hi:
                break
            start = (lo + q - 1) // q * q
            if start < q * q:
                start = q * q
            for j in range(start - lo, hi - lo, q):
                flags[j] = False
        return flags

    def sieve_segment_numba(lo: int, hi: int, primes: np.ndarray) -> np.ndarray:
        lo = max(lo, 2)
        if hi <= lo:
            return np.zeros(0, dtype=np.int64)
        flags = _sieve_flags_nb(np.int64(lo), np.int64(hi), primes.astype(np.int64))
        return np.flatnonzero(flags).astype(np.int64) + lo

else:  # pragma: no cover
    sieve_segment_numba = None


def sieve_segment(lo: int, hi: int, primes: np.ndarray) -> np.ndarray:
    if BACKEND == "numba":
        return sieve_segment_numba(lo, hi, primes)
    return sieve_segment_numpy(lo, hi, primes)


# ---------------------------------------------------------------------------
# Cycle types of x -> Frobenius on the roots of a monic f mod p


def _check_poly(coeffs: np.ndarray) -> np.ndarray:
    """Monic integer coefficients, lowest degree first."""
    c = np.asarray(coeffs, dtype=np.int64)
    n = c.shape[0] - 1
    if n < 1 or n > MAX_DEGREE or c[-1] != 1:
        raise ValueError("expected a monic polynomial of degree 1..7, lowest coefficient first")
    return c


if HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def _mulmod_nb(a, b, f, p, n, out, tmp):
        # out = a*b mod (f, p); out may alias a or b
        for k in range(2 * n - 1):
            tmp[k] = 0
        lazy = p < _P_LAZY
        for i in range(n):
            ai = a[i]
            if ai == 0:
                continue
            if lazy:
                for j in range(n):
                    tmp[i + j] += ai * b[j]
            else:
                for j in range(n):
                    tmp[i + j] = (tmp[i + j] + ai * b[j]) % p
        for t in range(2 * n - 2, n - 1, -1):
            c = tmp[t] % p
            if c != 0:
                if lazy:
                    for j in range(n):
                        tmp[t - n + j] -= c * f[j]
                else:
                    for j in range(n):
                        tmp[t - n + j] = (tmp[t - n + j] - c * f[j]) % p
        for k in range(n):
            out[k] = tmp[k] % p

    @njit(cache=True, nogil=True)
    def _mulx_nb(a, f, p, n):
        # a = x*a mod (f, p), in place
        c = a[n - 1]
        for i in range(n - 1, 0, -1):
            a[i] = (a[i - 1] - c * f[i]) % p
        a[0] = (-c * f[0]) % p

    @njit(cache=True, nogil=True)
    def _inv_nb(a, p):
        # inverse of a mod prime p by the extended Euclidean algorithm
        r0, r1 = p, a % p
        s0, s1 = 0, 1
        while r1 != 0:
            q = r0 // r1
            r0, r1 = r1, r0 - q * r1
            s0, s1 = s1, s0 - q * s1
        return s0 % p

    @njit(cache=True, nogil=True)
    def _gcd_degree_nb(f, g, p, n, a, b):
        # degree of gcd(f, g) over F_p; f monic of degree n, deg g < n
        for i in range(n + 1):
            a[i] = f[i] % p
            b[i] = 0
        for i in range(n):
            b[i] = g[i] % p
        da = n
        db = n - 1
        while db >= 0 and b[db] == 0:
            db -= 1
        while db >= 0:
            inv = _inv_nb(b[db], p)
            while da >= db:
                c = a[da] * inv % p
                if c != 0:
                    shift = da - db
                    for j in range(db + 1):
                        a[shift + j] = (a[shift + j] - c * b[j]) % p
                da -= 1
                while da >= 0 and a[da] == 0:
                    da -= 1
            for i in range(n + 1):
                t = a[i]
                a[i] = b[i]
                b[i] = t
            t = da
            da = db
            db = t
        return da

    @njit(cache=True, nogil=True)
    def _cycle_counts_nb(primes, coeffs):
        n = coeffs.shape[0] - 1
        m = primes.shape[0]
        half = n // 2
        out = np.zeros((m, n + 1), dtype=np.int64)
        f = np.zeros(n + 1, dtype=np.int64)
        h = np.zeros(n, dtype=np.int64)
        tmp = np.zeros(2 * n - 1, dtype=np.int64)
        frob = np.zeros((n, n), dtype=np.int64)
        v = np.zeros(n, dtype=np.int64)
        w = np.zeros(n, dtype=np.int64)
        ga = np.zeros(n + 1, dtype=np.int64)
        gb = np.zeros(n + 1, dtype=np.int64)
        for t in range(m):
            p = primes[t]
            for i in range(n + 1):
                f[i] = coeffs[i] % p
            # h = x^p mod f, left-to-right: square, then shift when the bit is set
            for i in range(n):
                h[i] = 0
            h[0] = 1
            nbits = 0
            e = p
            while e > 0:
                nbits += 1
                e >>= 1
            for bit in range(nbits - 1, -1, -1):
                _mulmod_nb(h, h, f, p, n, h, tmp)
                if (p >> bit) & 1:
                    _mulx_nb(h, f, p, n)
            # rows of the Frobenius matrix: x^(jp) = h^j mod f
            for i in range(n):
                frob[0, i] = 0
            frob[0, 0] = 1
            for j in range(1, n):
                _mulmod_nb(frob[j - 1], h, f, p, n, frob[j], tmp)
            for i in range(n):
                v[i] = 0
            v[0] = 1
            _mulx_nb(v, f, p, n)
            found = 0
            for k in range(1, half + 1):
                for i in range(n):
                    w[i] = 0
                for j in range(n):
                    c = v[j]
                    if c != 0:
                        for i in range(n):
                            w[i] = (w[i] + c * frob[j, i]) % p
                for i in range(n):
                    w[i] = w[i] % p
                    v[i] = w[i]
                # w = x^(p^k) - x mod f
                for i in range(n):
                    tmp[i] = 0
                tmp[0] = 1
                _mulx_nb(tmp[:n], f, p, n)
                for i in range(n):
                    w[i] = (w[i] - tmp[i]) % p
                rk = _gcd_degree_nb(f, w, p, n, ga, gb)
                acc = rk
                for j in range(1, k):
                    if k % j == 0:
                        acc -= j * out[t, j]
                out[t, k] = acc // k
                found += k * out[t, k]
            rest = n - found
            if rest > 0:
                if rest > half:
                    out[t, rest] += 1
                else:
                    out[t, 0] = -1
            elif rest < 0:
                out[t, 0] = -1
        return out

    def cycle_counts_numba(primes: np.ndarray, coeffs) -> np.ndarray:
        c = _check_poly(coeffs)
        p = np.ascontiguousarray(primes, dtype=np.int64)
        if p.size and p.max() >= _P_LIMIT:
            raise ValueError("primes must be below 2^30")
        return _cycle_counts_nb(p, c)

else:  # pragma: no cover
    cycle_counts_numba = None


def _powmod_vec(b: np.ndarray, e: np.ndarray, p: np.ndarray) -> np.ndarray:
    b = b % p
    e = e.copy()
    r = np.ones_like(b)
    while np.any(e > 0):
        odd = (e & 1).astype(bool)
        r = np.where(odd, r * b % p, r)
        b = b * b % p
        e >>= 1
    return r


def _mulmod_vec(a: np.ndarray, b: np.ndarray, f: np.ndarray, p: np.ndarray, n: int) -> np.ndarray:
    m = a.shape[0]
    pc = p[:, None]
    tmp = np.zeros((m, 2 * n - 1), dtype=np.int64)
    for i in range(n):
        tmp[:, i : i + n] = (tmp[:, i : i + n] + a[:, i : i + 1] * b % pc) % pc
    for t in range(2 * n - 2, n - 1, -1):
        c = tmp[:, t : t + 1]
        tmp[:, t - n : t] = (tmp[:, t - n : t] - c * f[:, :n] % pc) % pc
        tmp[:, t] = 0
    return tmp[:, :n]


def _degree_vec(a: np.ndarray) -> np.ndarray:
    nz = a != 0
    width = a.shape[1]
    last = width - 1 - np.argmax(nz[:, ::-1], axis=1)
    return np.where(nz.any(axis=1), last, -1)


def _gcd_degree_vec(f: np.ndarray, g: np.ndarray, p: np.ndarray, n: int) -> np.ndarray:
    m = f.shape[0]
    a = f.copy()
    b = np.zeros((m, n + 1), dtype=np.int64)
    b[:, :n] = g
    da = _degree_vec(a)
    db = _degree_vec(b)
    rows = np.arange(m)
    pc = p[:, None]
    cols = np.arange(n + 1)[None, :]
    while True:
        active = db >= 0
        if not active.any():
            return da
        # reduce rows whose remainder step is pending, swap the rest
        step = active & (da >= db)
        if step.any():
            r = rows[step]
            lb = b[r, db[r]]
            inv = _powmod_vec(lb, p[r] - 2, p[r])
            c = a[r, da[r]] * inv % p[r]
            shift = (da[r] - db[r])[:, None]
            src = cols - shift
            valid = (src >= 0) & (src <= db[r][:, None])
            shifted = np.where(valid, np.take_along_axis(b[r], np.clip(src, 0, n), axis=1), 0)
            a[r] = (a[r] - c[:, None] * shifted % pc[r]) % pc[r]
            da[r] = _degree_vec(a[r])
        swap = active & (da < db)
        if swap.any():
            r = rows[swap]
            a[r], b[r] = b[r].copy(), a[r].copy()
            da[r], db[r] = db[r].copy(), da[r].copy()


def _mulx_vec(a: np.ndarray, f: np.ndarray, p: np.ndarray, n: int) -> np.ndarray:
    pc = p[:, None]
    c = a[:, n - 1 : n]
    out = np.empty_like(a)
    out[:, 1:] = (a[:, : n - 1] - c * f[:, 1:n] % pc) % pc
    out[:, 0] = (-c[:, 0] * f[:, 0]) % p
    return out


def cycle_counts_numpy(primes: np.ndarray, coeffs) -> np.ndarray:
    """Vectorized twin of the numba kernel; same output layout.

    Row ``t`` holds ``n_k`` (number of degree-``k`` irreducible factors of
    ``f mod primes[t]``) in column ``k``; column 0 is ``-1`` when the degrees
    do not add up to ``deg f`` (``f`` not squarefree mod ``p``).
    """
    c = _check_poly(coeffs)
    n = c.shape[0] - 1
    half = n // 2
    p = np.ascontiguousarray(primes, dtype=np.int64)
    m = p.shape[0]
    out = np.zeros((m, n + 1), dtype=np.int64)
    if m == 0:
        return out
    if p.max() >= _P_LIMIT:
        raise ValueError("primes must be below 2^30")
    pc = p[:, None]
    f = c[None, :] % pc
    unit = np.zeros((m, n), dtype=np.int64)
    unit[:, 0] = 1
    x = _mulx_vec(unit, f, p, n)
    # h = x^p mod f, left-to-right binary powering with per-row exponents
    h = unit.copy()
    nbits = int(p.max()).bit_length()
    for bit in range(nbits - 1, -1, -1):
        h = _mulmod_vec(h, h, f, p, n)
        on = ((p >> bit) & 1).astype(bool)
        if on.any():
            h[on] = _mulx_vec(h[on], f[on], p[on], n)
    frob = np.zeros((m, n, n), dtype=np.int64)
    frob[:, 0, 0] = 1
    for j in range(1, n):
        frob[:, j, :] = _mulmod_vec(frob[:, j - 1, :], h, f, p, n)
    v = x.copy()
    found = np.zeros(m, dtype=np.int64)
    for k in range(1, half + 1):
        w = np.zeros((m, n), dtype=np.int64)
        for j in range(n):
            w = (w + v[:, j : j + 1] * frob[:, j, :] % pc) % pc
        v = w
        rk = _gcd_degree_vec(f, (v - x) % pc, p, n)
        acc = rk.copy()
        for j in range(1, k):
            if k % j == 0:
                acc -= j * out[:, j]
        out[:, k] = acc // k
        found += k * out[:, k]
    rest = n - found
    big = rest > half
    out[big, rest[big]] += 1
    out[(rest > 0) & ~big, 0] = -1
    out[rest < 0, 0] = -1
    return out


def cycle_counts(primes: np.ndarray, coeffs) -> np.ndarray:
    if BACKEND == "numba":
        return cycle_counts_numba(primes, coeffs)
    return cycle_counts_numpy(primes, coeffs)


def warmup() -> None:
    """Trigger JIT compilation (or cache load) of every numba kernel."""
    if not HAVE_NUMBA:
        return
    sieve_segment_numba(2, 100, base_primes(10))
    cycle_counts_numba(np.array([5, 7], dtype=np.int64), [-2, 0, 0, 1])
