"""Laurent polynomials with complex coefficients, and determinants of
matrices of them.

A Laurent polynomial is stored dense: an integer lowest exponent ``lo`` and a
coefficient array ``c`` so that p(t) = sum_k c[k] t^(lo+k).  Coefficients are
complex; trimming drops leading/trailing entries below a relative tolerance.

Determinants of Laurent matrices use cofactor expansion (exact in the
coefficient arithmetic) up to 4x4 and evaluation-interpolation on a rotated
root-of-unity grid above that.
"""

from __future__ import annotations

import cmath

import numpy as np

from .errors import NoSymmetricForm

TRIM_RTOL = 1e-11

# deterministic rotation so evaluation points avoid special algebraic points
_GRID_PHASE = 2.0 * np.pi * 0.6180339887498949


class LaurentPoly:
    """Dense Laurent polynomial sum_k c[k] t^(lo+k)."""

    __slots__ = ("lo", "c")

    def __init__(self, lo: int, coeffs, trim: bool = True):
        self.lo = int(lo)
        self.c = np.asarray(coeffs, dtype=complex).reshape(-1)
        if trim:
            self._trim()

    # -- construction --------------------------------------------------------

    @classmethod
    def zero(cls) -> "LaurentPoly":
        return cls(0, [])

    @classmethod
    def const(cls, value) -> "LaurentPoly":
        return cls(0, [value])

    @classmethod
    def t_power(cls, k: int, coeff=1.0) -> "LaurentPoly":
        return cls(k, [coeff])

    # -- bookkeeping ----------------------------------------------------------

    def _trim(self) -> None:
        c = self.c
        if c.size == 0:
            self.lo = 0
            return
        tol = TRIM_RTOL * max(1.0, float(np.max(np.abs(c))))
        keep = np.abs(c) > tol
        if not keep.any():
            self.lo, self.c = 0, np.zeros(0, dtype=complex)
            return
        i0 = int(np.argmax(keep))
        i1 = int(len(c) - np.argmax(keep[::-1]))
        self.lo += i0
        self.c = c[i0:i1].copy()

    @property
    def hi(self) -> int:
        return self.lo + len(self.c) - 1

    @property
    def span(self) -> int:
        return len(self.c)

    def is_zero(self, tol: float = 0.0) -> bool:
        if self.c.size == 0:
            return True
        return bool(np.max(np.abs(self.c)) <= tol)

    def coeff(self, k: int) -> complex:
        i = k - self.lo
        if 0 <= i < len(self.c):
            return complex(self.c[i])
        return 0.0 + 0.0j

    def copy(self) -> "LaurentPoly":
        return LaurentPoly(self.lo, self.c.copy(), trim=False)

    # -- arithmetic -----------------------------------------------------------

    @staticmethod
    def _coerce(other):
        if isinstance(other, LaurentPoly):
            return other
        return LaurentPoly.const(other)

    def __add__(self, other):
        q = self._coerce(other)
        if self.c.size == 0:
            return q.copy()
        if q.c.size == 0:
            return self.copy()
        lo = min(self.lo, q.lo)
        hi = max(self.hi, q.hi)
        c = np.zeros(hi - lo + 1, dtype=complex)
        c[self.lo - lo:self.lo - lo + len(self.c)] += self.c
        c[q.lo - lo:q.lo - lo + len(q.c)] += q.c
        return LaurentPoly(lo, c)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly(self.lo, -self.c, trim=False)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, LaurentPoly):
            return LaurentPoly(self.lo, self.c * other)
        if self.c.size == 0 or other.c.size == 0:
            return LaurentPoly.zero()
        return LaurentPoly(self.lo + other.lo, np.convolve(self.c, other.c))

    __rmul__ = __mul__

    def shift(self, k: int) -> "LaurentPoly":
        """Multiply by t^k."""
        return LaurentPoly(self.lo + k, self.c, trim=False)

    def reverse(self) -> "LaurentPoly":
        """p(1/t)."""
        return LaurentPoly(-self.hi, self.c[::-1], trim=False) if self.c.size else LaurentPoly.zero()

    def __call__(self, z: complex) -> complex:
        out = 0.0 + 0.0j
        for k in range(len(self.c) - 1, -1, -1):
            out = out * z + self.c[k]
        return out * z ** self.lo

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.c))) if self.c.size else 0.0

    def allclose(self, other, rtol: float = 1e-9, atol: float = 0.0) -> bool:
        d = self - self._coerce(other)
        scale = max(self.max_abs(), self._coerce(other).max_abs(), 1e-300)
        bound = atol + rtol * scale
        return d.is_zero(tol=bound)

    def __eq__(self, other):
        try:
            return self.allclose(other, rtol=TRIM_RTOL)
        except Exception:
            return NotImplemented

    def __hash__(self):
        raise TypeError("LaurentPoly is not hashable")

    def real_if_close(self, tol: float = 1e-9) -> "LaurentPoly":
        if self.c.size and np.max(np.abs(self.c.imag)) <= tol * max(1.0, self.max_abs()):
            return LaurentPoly(self.lo, self.c.real.astype(complex), trim=False)
        return self

    def __repr__(self):
        if self.c.size == 0:
            return "LaurentPoly(0)"
        terms = []
        for i, a in enumerate(self.c):
            k = self.lo + i
            if abs(a) <= TRIM_RTOL * max(1.0, self.max_abs()):
                continue
            val = f"{a.real:+.6g}" if abs(a.imag) < 1e-12 else f"+({a:.6g})"
            terms.append(f"{val}*t^{k}" if k else val)
        return "LaurentPoly(" + " ".join(terms) + ")"

    # -- serialization ---------------------------------------------------------

    def to_json(self) -> dict:
        return {"lo": int(self.lo) if self.c.size else 0,
                "coeffs": [[float(a.real), float(a.imag)] for a in self.c]}

    @classmethod
    def from_json(cls, obj: dict) -> "LaurentPoly":
        return cls(obj["lo"], [complex(re, im) for re, im in obj["coeffs"]])


class UnitClass:
    """A Laurent polynomial known only up to multiplication by +-t^k.

    Stored as a fraction num/den so callers never divide; comparisons
    cross-multiply.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: LaurentPoly, den: LaurentPoly | None = None):
        self.num = num
        self.den = den if den is not None else LaurentPoly.const(1.0)

    def equals(self, other: "UnitClass", rtol: float = 1e-8):
        """Return (True, shift, sign) if self == sign * t^shift * other."""
        a = self.num * other.den
        b = other.num * self.den
        return equal_up_to_unit(a, b, rtol=rtol)

    def __repr__(self):
        return f"UnitClass({self.num!r} / {self.den!r})"


def equal_up_to_unit(p: LaurentPoly, q: LaurentPoly, rtol: float = 1e-8):
    """Test p == sign * t^shift * q; returns (ok, shift, sign)."""
    if p.is_zero() or q.is_zero():
        ok = p.is_zero() and q.is_zero()
        return ok, 0, 1
    if p.span != q.span:
        return False, 0, 1
    shift = p.lo - q.lo
    i = int(np.argmax(np.abs(q.c)))
    ratio = p.c[i] / q.c[i]
    sign = 1 if ratio.real >= 0 else -1
    if abs(ratio - sign) > rtol:
        return False, 0, 1
    if p.allclose(q.shift(shift) * sign, rtol=rtol):
        return True, shift, sign
    return False, 0, 1


def symmetrize(p: LaurentPoly, rtol: float = 1e-8):
    """Center p at degree zero and certify it is palindromic.

    Returns (q, shift, sign) with q = sign * t^shift * p and q(1/t) = q(t)
    coefficient-wise within rtol.  Edge coefficients below rtol (relative to
    the largest) are discarded first: they are noise at the certificate's
    own tolerance and would otherwise corrupt the degree span.  Raises
    NoSymmetricForm when the trimmed span has no integral center or the
    centered polynomial is not palindromic (an anti-palindromic centered
    form cannot be repaired by a sign, so it is rejected too).
    """
    if p.is_zero():
        raise NoSymmetricForm("zero polynomial has no symmetric form")
    floor = rtol * np.max(np.abs(p.c))
    i0, i1 = 0, len(p.c)
    while i0 < i1 and abs(p.c[i0]) <= floor:
        i0 += 1
    while i1 > i0 and abs(p.c[i1 - 1]) <= floor:
        i1 -= 1
    p = LaurentPoly(p.lo + i0, p.c[i0:i1].copy(), trim=False)
    if (p.lo + p.hi) % 2 != 0:
        raise NoSymmetricForm(
            f"degree span [{p.lo}, {p.hi}] has no integral center")
    k = (p.lo + p.hi) // 2
    q = p.shift(-k)
    rev = q.reverse()
    if q.allclose(rev, rtol=rtol):
        return q, -k, 1
    if q.allclose(-rev, rtol=rtol):
        raise NoSymmetricForm("centered polynomial is anti-palindromic")
    raise NoSymmetricForm("centered polynomial is not palindromic")


# ---- determinants -----------------------------------------------------------

def _as_poly_matrix(mat):
    rows = []
    for row in mat:
        rows.append([e if isinstance(e, LaurentPoly) else LaurentPoly.const(e)
                     for e in row])
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError("determinant needs a square matrix")
    return rows


def _det_cofactor(rows):
    n = len(rows)
    if n == 0:
        return LaurentPoly.const(1.0)
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    out = LaurentPoly.zero()
    for j in range(n):
        if rows[0][j].is_zero():
            continue
        minor = [[r[k] for k in range(n) if k != j] for r in rows[1:]]
        term = rows[0][j] * _det_cofactor(minor)
        out = out + (term if j % 2 == 0 else -term)
    return out


def _det_interpolate(rows):
    n = len(rows)
    lo_bound = 0
    hi_bound = 0
    for r in rows:
        los = [e.lo for e in r if not e.is_zero()]
        his = [e.hi for e in r if not e.is_zero()]
        if not los:
            return LaurentPoly.zero()
        lo_bound += min(los)
        hi_bound += max(his)
    width = hi_bound - lo_bound + 1
    npts = width + 8
    zs = np.exp(1j * (_GRID_PHASE + 2.0 * np.pi * np.arange(npts) / npts))
    vals = np.empty(npts, dtype=complex)
    for i, z in enumerate(zs):
        m = np.array([[e(z) for e in r] for r in rows], dtype=complex)
        vals[i] = np.linalg.det(m)
    ks = np.arange(lo_bound, lo_bound + npts)
    # plain inverse DFT on the rotated grid; exact since width <= npts
    coeffs = (vals[None, :] * zs[None, :] ** (-ks[:, None])).mean(axis=1)
    return LaurentPoly(lo_bound, coeffs)


def det(mat) -> LaurentPoly:
    """Determinant of a square matrix of Laurent polynomials (or scalars)."""
    rows = _as_poly_matrix(mat)
    if len(rows) <= 4:
        return _det_cofactor(rows)
    return _det_interpolate(rows)


def fit_from_samples(zs, vals, lo_bound: int, hi_bound: int) -> LaurentPoly:
    """Recover a Laurent polynomial from values on a rotated unit grid.

    The grid must be uniform in angle (possibly rotated); exactness requires
    hi_bound - lo_bound + 1 <= len(zs).
    """
    zs = np.asarray(zs, dtype=complex)
    vals = np.asarray(vals, dtype=complex)
    width = hi_bound - lo_bound + 1
    if width > len(zs):
        raise ValueError("not enough sample points for the degree window")
    ks = np.arange(lo_bound, hi_bound + 1)
    coeffs = (vals[None, :] * zs[None, :] ** (-ks[:, None])).mean(axis=1)
    return LaurentPoly(lo_bound, coeffs)


def unit_grid(npts: int, phase: float = _GRID_PHASE) -> np.ndarray:
    """Rotated root-of-unity evaluation grid."""
    return np.exp(1j * (phase + 2.0 * np.pi * np.arange(npts) / npts))
