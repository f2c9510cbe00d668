# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Native kernels over little-endian uint32 limb vectors.

Each point is one row of a (count, limbs) uint32 matrix holding a numerator of
``precision`` bits.  Semantics match sensilab.backends.purepy bit for bit; the
parity tests enforce this.  All inner loops run without the GIL so thread
pools get real parallelism.
"""

from libc.math cimport ldexp, pow

cdef enum:
    MAXL = 48

cdef enum:
    K_IDENTITY = 0
    K_RADIC = 1
    K_ROTATION = 2
    K_TENT = 3

cdef enum:
    B_EUCLIDEAN = 0
    B_CIRCLE = 1
    B_POWER = 2

IDENTITY = K_IDENTITY
RADIC = K_RADIC
ROTATION = K_ROTATION
TENT = K_TENT
EUCLIDEAN = B_EUCLIDEAN
CIRCLE = B_CIRCLE
POWER = B_POWER

MAX_PRECISION = 32 * MAXL


cdef inline void _mul_small(unsigned int *v, Py_ssize_t L,
                            unsigned long long r, unsigned int topmask) noexcept nogil:
    cdef unsigned long long carry = 0, t
    cdef Py_ssize_t j
    for j in range(L):
        t = (<unsigned long long>v[j]) * r + carry
        v[j] = <unsigned int>t
        carry = t >> 32
    v[L - 1] &= topmask


cdef inline void _add(unsigned int *v, const unsigned int *a, Py_ssize_t L,
                      unsigned int topmask) noexcept nogil:
    cdef unsigned long long carry = 0, t
    cdef Py_ssize_t j
    for j in range(L):
        t = (<unsigned long long>v[j]) + a[j] + carry
        v[j] = <unsigned int>t
        carry = t >> 32
    v[L - 1] &= topmask


cdef inline void _shl1(unsigned int *v, Py_ssize_t L, unsigned int topmask) noexcept nogil:
    cdef Py_ssize_t j
    for j in range(L - 1, 0, -1):
        v[j] = (v[j] << 1) | (v[j - 1] >> 31)
    v[0] = v[0] << 1
    v[L - 1] &= topmask


cdef inline void _neg(unsigned int *v, Py_ssize_t L, unsigned int topmask) noexcept nogil:
    # two's complement over the limbs, then masked: (-v) mod 2**precision
    cdef unsigned long long carry = 1, t
    cdef Py_ssize_t j
    for j in range(L):
        t = (<unsigned long long>(~v[j])) + carry
        v[j] = <unsigned int>t
        carry = t >> 32
    v[L - 1] &= topmask


cdef inline void _step(int kind, unsigned long long r, const unsigned int *alpha,
                       unsigned int *v, Py_ssize_t L, unsigned int topmask,
                       int topbit) noexcept nogil:
    cdef int negate
    if kind == K_RADIC:
        _mul_small(v, L, r, topmask)
    elif kind == K_ROTATION:
        _add(v, alpha, L, topmask)
    elif kind == K_TENT:
        negate = (v[L - 1] >> topbit) & 1
        _shl1(v, L, topmask)
        if negate:
            _neg(v, L, topmask)


cdef inline void _absdiff(unsigned int *out, const unsigned int *a,
                          const unsigned int *b, Py_ssize_t L) noexcept nogil:
    cdef Py_ssize_t j = L - 1
    cdef const unsigned int *big
    cdef const unsigned int *small
    cdef unsigned long long borrow = 0, t
    cdef int cmp = 0
    while j >= 0:
        if a[j] != b[j]:
            cmp = 1 if a[j] > b[j] else -1
            break
        j -= 1
    if cmp == 0:
        for j in range(L):
            out[j] = 0
        return
    if cmp > 0:
        big = a
        small = b
    else:
        big = b
        small = a
    for j in range(L):
        t = (<unsigned long long>big[j]) - small[j] - borrow
        out[j] = <unsigned int>t
        borrow = t >> 63
    # the final borrow is 0 by construction


cdef inline double _unit_float(const unsigned int *d, Py_ssize_t L,
                               int precision) noexcept nogil:
    # truncated 53-bit conversion of d / 2**precision; see purepy.unit_float
    cdef Py_ssize_t k = L - 1
    cdef unsigned int h
    cdef int hb
    cdef long bl, base
    cdef Py_ssize_t idx
    cdef int sh, have
    cdef unsigned long long w, m
    while k >= 0 and d[k] == 0:
        k -= 1
    if k < 0:
        return 0.0
    h = d[k]
    hb = 32
    while (h >> 31) == 0:
        h = h << 1
        hb -= 1
    bl = 32 * k + hb
    base = bl - 64 if bl > 64 else 0
    idx = base >> 5
    sh = <int>(base & 31)
    w = (<unsigned long long>d[idx]) >> sh
    have = 32 - sh
    if idx + 1 <= k:
        w |= (<unsigned long long>d[idx + 1]) << have
        have += 32
    if have < 64 and idx + 2 <= k:
        w |= (<unsigned long long>d[idx + 2]) << have
    if bl <= 53:
        m = w << (53 - bl)
    elif bl < 64:
        m = w >> (bl - 53)
    else:
        m = w >> 11
    return ldexp(<double>m, <int>(bl - 53 - precision))


cdef inline double _dist(int base, double s, const unsigned int *x,
                         const unsigned int *y, unsigned int *dbuf,
                         Py_ssize_t L, int precision, unsigned int topmask,
                         int topbit) noexcept nogil:
    cdef double d
    _absdiff(dbuf, x, y, L)
    if base == B_CIRCLE and (dbuf[L - 1] >> topbit) & 1:
        # diff >= 1/2, so the wraparound distance is the smaller one
        _neg(dbuf, L, topmask)
    d = _unit_float(dbuf, L, precision)
    if base == B_POWER:
        return pow(d, s)
    return d


def map_batch(int kind, unsigned long long r, unsigned int[::1] alpha,
              unsigned int[:, ::1] nums, int precision, long steps):
    """Apply the map ``steps`` times to every row, in place."""
    cdef Py_ssize_t L = nums.shape[1]
    cdef Py_ssize_t count = nums.shape[0]
    cdef unsigned int topmask = <unsigned int>(
        ((<unsigned long long>1) << (((precision - 1) & 31) + 1)) - 1)
    cdef int topbit = (precision - 1) & 31
    cdef const unsigned int *ap = NULL
    cdef Py_ssize_t i
    cdef long n
    if alpha.shape[0] > 0:
        ap = &alpha[0]
    if kind == K_IDENTITY or steps == 0:
        return
    with nogil:
        for i in range(count):
            for n in range(steps):
                _step(kind, r, ap, &nums[i, 0], L, topmask, topbit)


def derived_max_batch(int kind, unsigned long long r, unsigned int[::1] alpha,
                      int base, double s,
                      unsigned int[:, ::1] xs, unsigned int[:, ::1] ys,
                      int precision, long horizon, double cap,
                      double[::1] out):
    """Per pair: capped max base distance over iterates 0..horizon.

    Mutates the xs/ys rows; callers pass throwaway copies.
    """
    cdef Py_ssize_t L = xs.shape[1]
    cdef Py_ssize_t count = xs.shape[0]
    cdef unsigned int topmask = <unsigned int>(
        ((<unsigned long long>1) << (((precision - 1) & 31) + 1)) - 1)
    cdef int topbit = (precision - 1) & 31
    cdef const unsigned int *ap = NULL
    cdef unsigned int dbuf[MAXL]
    cdef Py_ssize_t i
    cdef long n
    cdef double best, d
    if alpha.shape[0] > 0:
        ap = &alpha[0]
    with nogil:
        for i in range(count):
            best = 0.0
            for n in range(horizon + 1):
                d = _dist(base, s, &xs[i, 0], &ys[i, 0], dbuf, L,
                          precision, topmask, topbit)
                if d > best:
                    best = d
                    if best >= cap:
                        break
                if n < horizon:
                    _step(kind, r, ap, &xs[i, 0], L, topmask, topbit)
                    _step(kind, r, ap, &ys[i, 0], L, topmask, topbit)
            out[i] = cap if best > cap else best


def first_exceed_batch(int kind, unsigned long long r, unsigned int[::1] alpha,
                       int base, double s,
                       unsigned int[:, ::1] xs, unsigned int[:, ::1] ys,
                       int precision, long horizon, double threshold,
                       int strict, long long[::1] out):
    """Per pair: least n <= horizon whose base distance crosses the threshold.

    Pairs that never cross get -1.  Mutates the xs/ys rows.
    """
    cdef Py_ssize_t L = xs.shape[1]
    cdef Py_ssize_t count = xs.shape[0]
    cdef unsigned int topmask = <unsigned int>(
        ((<unsigned long long>1) << (((precision - 1) & 31) + 1)) - 1)
    cdef int topbit = (precision - 1) & 31
    cdef const unsigned int *ap = NULL
    cdef unsigned int dbuf[MAXL]
    cdef Py_ssize_t i
    cdef long n
    cdef double d
    cdef int hit
    if alpha.shape[0] > 0:
        ap = &alpha[0]
    with nogil:
        for i in range(count):
            out[i] = -1
            for n in range(horizon + 1):
                d = _dist(base, s, &xs[i, 0], &ys[i, 0], dbuf, L,
                          precision, topmask, topbit)
                hit = (d > threshold) if strict else (d >= threshold)
                if hit:
                    out[i] = n
                    break
                if n < horizon:
                    _step(kind, r, ap, &xs[i, 0], L, topmask, topbit)
                    _step(kind, r, ap, &ys[i, 0], L, topmask, topbit)
