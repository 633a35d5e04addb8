"""Based chain complexes, their Reidemeister torsion, and twisted complexes
built from equivariant cell data.

Torsion of a based complex (C_*, c, h) with chosen image bases b_i:

    tau = (-1)^{|C|} prod_i [ b_i h_i b_{i-1} / c_i ]^{(-1)^{i+1}}

where [v / w] is the determinant of the base change from w to v, b_i is a
basis of im(d_{i+1}), h_i lifts a basis of H_i, and b_{i-1} is lifted through
d_i.  The result does not depend on the b_i or on the lifts; tests exercise
that invariance with randomized choices.  The sign exponent is

    |C| = sum_j (sum_{i<=j} dim C_i) (sum_{i<=j} dim H_i).

Twisted complexes: cell data carries group-ring boundary entries, with rows
indexed by higher cells.  The chain convention evaluates entries through the
anti-involution (each word inverted) so that column-vector matrices compose;
the cochain convention evaluates entries directly and transposes the block
layout.  Cochain complexes are regraded D_k = C^(n-k) so the same torsion
machinery applies; the degree-weight sign |C| is recomputed on the regraded
complex.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ChainMapViolation, DegenerateBasis, DimensionMismatch
from .words import GroupRingElement, Word, elem_eval_terms

RANK_RTOL = 1e-8


class BasedComplex:
    """Finite complex of based vector spaces with optional homology data.

    diff[i] maps C_i -> C_{i-1} for 1 <= i <= n (numpy matrices).
    homology[i] is a list of cycle vectors representing a basis of H_i.
    basis[i], when given, holds the preferred basis as matrix columns in
    standard coordinates (default: standard basis).
    """

    def __init__(self, dims, diff, homology=None, basis=None, check: bool = True):
        self.dims = [int(d) for d in dims]
        n = len(self.dims) - 1
        self.diff = {}
        for i in range(1, n + 1):
            m = np.asarray(diff[i]) if not isinstance(diff, dict) else np.asarray(diff[i])
            self.diff[i] = m
        self.homology = {i: [np.asarray(v).reshape(-1) for v in (homology.get(i, []) if homology else [])]
                         for i in range(n + 1)}
        self.basis = basis or {}
        if check:
            self._validate()

    @property
    def top_degree(self) -> int:
        return len(self.dims) - 1

    def _validate(self):
        n = self.top_degree
        for i in range(1, n + 1):
            m = self.diff[i]
            if m.shape != (self.dims[i - 1], self.dims[i]):
                raise DimensionMismatch(
                    f"diff[{i}] has shape {m.shape}, expected {(self.dims[i - 1], self.dims[i])}")
        for i in range(2, n + 1):
            a, b = self.diff[i - 1], self.diff[i]
            if min(a.shape + b.shape) == 0:
                continue
            prod = a @ b
            scale = max(1.0, float(np.abs(a).max()) * float(np.abs(b).max()))
            if float(np.abs(prod).max()) > 1e-9 * scale:
                raise ChainMapViolation(f"d d != 0 between degrees {i} and {i - 2}")
        for i, vs in self.homology.items():
            for v in vs:
                if v.shape != (self.dims[i],):
                    raise DimensionMismatch(f"homology vector in degree {i} has wrong length")

    def weight(self) -> int:
        """The degree-weight exponent |C| built from chain and homology dims."""
        n = self.top_degree
        total = 0
        c_acc = 0
        h_acc = 0
        for j in range(n + 1):
            c_acc += self.dims[j]
            h_acc += len(self.homology[j])
            total += c_acc * h_acc
        return total


def rank_svd(m: np.ndarray, rtol: float = RANK_RTOL) -> int:
    if min(m.shape) == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def _image_basis(m: np.ndarray, rank: int, rng=None) -> np.ndarray:
    """Columns spanning im(m): pivot columns, or randomized combinations."""
    if rank == 0:
        return np.zeros((m.shape[0], 0), dtype=m.dtype)
    if rng is None:
        _, _, piv = scipy.linalg.qr(m, mode="economic", pivoting=True)
        return m[:, np.sort(piv[:rank])]
    for _ in range(20):
        g = rng.normal(size=(m.shape[1], rank))
        if np.iscomplexobj(m):
            g = g + 1j * rng.normal(size=g.shape)
        b = m @ g
        s = np.linalg.svd(b, compute_uv=False)
        if s[-1] > 1e-6 * max(s[0], 1e-300):
            return b
    raise DegenerateBasis("could not draw a full-rank image basis")


def torsion(cx: BasedComplex, rng=None, rtol: float = RANK_RTOL):
    """Reidemeister torsion of a based complex with homology data.

    Raises DegenerateBasis when homology dimensions disagree with the
    differentials or a base change degenerates.
    """
    n = cx.top_degree
    dims = cx.dims
    ranks = {i: rank_svd(cx.diff[i], rtol) for i in range(1, n + 1)}
    ranks[0] = 0
    ranks[n + 1] = 0

    img = {}          # img[i]: basis of im(d_{i+1}) inside C_i
    for i in range(n + 1):
        if i < n:
            img[i] = _image_basis(cx.diff[i + 1], ranks[i + 1], rng=rng)
        else:
            img[i] = np.zeros((dims[i], 0))

    value = 1.0 + 0.0j
    for i in range(n + 1):
        expect_h = dims[i] - ranks[i] - ranks[i + 1]
        hs = cx.homology[i]
        if expect_h != len(hs):
            raise DegenerateBasis(
                f"degree {i}: expected {expect_h} homology vectors, got {len(hs)}")
        if dims[i] == 0:
            continue
        cols = [img[i]]
        scale = 1.0
        if hs:
            hmat = np.column_stack(hs).astype(complex)
            if i >= 1 and dims[i - 1] > 0 and min(cx.diff[i].shape) > 0:
                bd = cx.diff[i] @ hmat
                if float(np.abs(bd).max()) > 1e-7 * max(1.0, float(np.abs(hmat).max())):
                    raise DegenerateBasis(f"degree {i}: homology vectors are not cycles")
            cols.append(hmat)
        if i >= 1 and img[i - 1].shape[1] > 0:
            lift, res, _, _ = np.linalg.lstsq(cx.diff[i], img[i - 1], rcond=None)
            resid = cx.diff[i] @ lift - img[i - 1]
            if float(np.abs(resid).max()) > 1e-7 * max(1.0, float(np.abs(img[i - 1]).max())):
                raise DegenerateBasis(f"degree {i}: image basis of degree {i - 1} does not lift")
            cols.append(lift)
        s_mat = np.column_stack([c for c in cols if c.shape[1] > 0]).astype(complex)
        if s_mat.shape != (dims[i], dims[i]):
            raise DegenerateBasis(
                f"degree {i}: assembled basis is {s_mat.shape}, need square of size {dims[i]}")
        if i in cx.basis and cx.basis[i] is not None:
            s_mat = np.linalg.solve(np.asarray(cx.basis[i], dtype=complex), s_mat)
        det = np.linalg.det(s_mat)
        mag = np.abs(det)
        if not np.isfinite(mag) or mag < 1e-13:
            raise DegenerateBasis(f"degree {i}: base change determinant is {det}")
        if (i + 1) % 2 == 0:
            value = value * det
        else:
            value = value / det
    sign = -1.0 if cx.weight() % 2 else 1.0
    return sign * value


def sign_torsion_tau0(cx: BasedComplex) -> int:
    """Sign of the torsion of a real based complex (the tau_0 factor)."""
    t = torsion(cx)
    if abs(t.imag) > 1e-9 * max(1.0, abs(t)):
        raise DegenerateBasis("tau_0 requested for a complex with non-real torsion")
    if t.real == 0.0:
        raise DegenerateBasis("tau_0 is zero")
    return 1 if t.real > 0 else -1


# ---- equivariant cell data and twisted complexes -------------------------------


@dataclass
class CellComplexData:
    """Cells by degree, plus group-ring boundary entries.

    entries[i][r][c] is the coefficient of (degree i-1)-cell c in the
    boundary of (degree i)-cell r.
    """

    names: list                      # names[i]: list of cell names in degree i
    entries: dict = field(default_factory=dict)

    @property
    def top_degree(self) -> int:
        return len(self.names) - 1

    def counts(self):
        return [len(ns) for ns in self.names]

    def apply_lifts(self, lifts: dict) -> "CellComplexData":
        """Change cell lifts: cell e becomes w_e . e, transforming entries to
        w_r * entry * w_c^{-1}."""
        new_entries = {}
        for i, rows in self.entries.items():
            hi, lo = self.names[i], self.names[i - 1]
            out = []
            for r, row in enumerate(rows):
                wr = lifts.get(hi[r], Word.identity())
                new_row = []
                for c, e in enumerate(row):
                    wc = lifts.get(lo[c], Word.identity())
                    new_row.append(
                        GroupRingElement.from_word(wr) * e * GroupRingElement.from_word(wc.inverse()))
                out.append(new_row)
            new_entries[i] = out
        return CellComplexData(names=self.names, entries=new_entries)


@dataclass(frozen=True)
class LiftChoice:
    """Euler-structure data: per-cell words replacing the chosen lifts."""

    words: dict

    def apply(self, data: CellComplexData) -> CellComplexData:
        return data.apply_lifts(self.words)


def _block_fill(nrow_cells, ncol_cells, dim, dtype):
    return np.zeros((nrow_cells * dim, ncol_cells * dim), dtype=dtype)


def _eval_elem(e: GroupRingElement, images: dict, dim: int, dtype):
    out = np.zeros((dim, dim), dtype=dtype)
    for w, c in e.terms.items():
        m = np.eye(dim, dtype=dtype)
        inv = {}
        for g, s in w.letters:
            if s > 0:
                m = m @ images[g]
            else:
                if g not in inv:
                    inv[g] = np.linalg.inv(images[g])
                m = m @ inv[g]
        out += c * m
    return out


def _mode_setup(mode, images, amap, z):
    if mode == "untwisted":
        return 1, float, lambda e: np.array([[float(e.augmentation())]])
    if mode == "ad":
        adj = {g: (u.adjoint() if hasattr(u, "adjoint") else np.asarray(u, dtype=float))
               for g, u in images.items()}
        return 3, float, lambda e: _eval_elem(e, adj, 3, float)
    if mode == "alpha_rho":
        mats = {g: u.matrix() for g, u in images.items()}
        if z is None or amap is None:
            raise ValueError("alpha_rho mode needs amap and a scalar z")

        def fn(e: GroupRingElement):
            out = np.zeros((2, 2), dtype=complex)
            for w, c in e.terms.items():
                m = np.eye(2, dtype=complex)
                inv = {}
                for g, s in w.letters:
                    if s > 0:
                        m = m @ mats[g]
                    else:
                        if g not in inv:
                            inv[g] = np.linalg.inv(mats[g])
                        m = m @ inv[g]
                out += c * (z ** amap.degree(w)) * m
            return out
        return 2, complex, fn
    raise ValueError(f"unknown coefficient mode {mode!r}")


def twisted_complex(data: CellComplexData, mode: str, images=None, amap=None,
                    z=None, homology=None, check: bool = True) -> BasedComplex:
    """Chain complex of the cell data with twisted coefficients.

    Entries pass through the anti-involution (words inverted) and are then
    evaluated, so matrices act on column vectors; mode is one of
    "untwisted", "ad", "alpha_rho" (the last evaluated at a scalar z).
    """
    n = data.top_degree
    counts = data.counts()
    dim, dtype, fn = _mode_setup(mode, images, amap, z)
    diffs = {}
    for i in range(1, n + 1):
        rows = data.entries.get(i)
        mat = _block_fill(counts[i - 1], counts[i], dim, dtype)
        if rows is not None:
            for r in range(counts[i]):
                for c in range(counts[i - 1]):
                    e = rows[r][c]
                    if e is None or e.is_zero():
                        continue
                    mat[c * dim:(c + 1) * dim, r * dim:(r + 1) * dim] = fn(e.bar())
        diffs[i] = mat
    dims = [cnt * dim for cnt in counts]
    return BasedComplex(dims, diffs, homology=homology, check=check)


def cochain_complex(data: CellComplexData, mode: str, images=None, amap=None,
                    z=None, homology=None, check: bool = True) -> BasedComplex:
    """Regraded cochain complex D_k = C^(n-k) with twisted coefficients.

    Entries are evaluated directly (no involution); the differential of the
    regraded complex in degree k is the coboundary C^(n-k) -> C^(n-k+1).
    homology is indexed in regraded degrees: homology[k] lives in C^(n-k).
    """
    n = data.top_degree
    counts = data.counts()
    dim, dtype, fn = _mode_setup(mode, images, amap, z)
    diffs = {}
    for k in range(1, n + 1):
        j = n - k                       # coboundary C^j -> C^(j+1)
        rows = data.entries.get(j + 1)
        mat = _block_fill(counts[j + 1], counts[j], dim, dtype)
        if rows is not None:
            for r in range(counts[j + 1]):
                for c in range(counts[j]):
                    e = rows[r][c]
                    if e is None or e.is_zero():
                        continue
                    mat[r * dim:(r + 1) * dim, c * dim:(c + 1) * dim] = fn(e)
        diffs[k] = mat
    dims = [counts[n - k] * dim for k in range(n + 1)]
    return BasedComplex(dims, diffs, homology=homology, check=check)


def coboundary_matrices(data: CellComplexData, mode: str, images=None,
                        amap=None, z=None):
    """The coboundaries delta^j: C^j -> C^(j+1) for j = 0..n-1, unregraded."""
    cx = cochain_complex(data, mode, images=images, amap=amap, z=z, check=False)
    n = data.top_degree
    return {j: cx.diff[n - j] for j in range(n)}


class CompiledAlphaRho:
    """Precompiled alpha-tensor-rho chain complex, cheap to evaluate at many z.

    Each block is stored as (coeff, degree, matrix) triples; the matrix at z
    is sum coeff * z^degree * matrix.
    """

    def __init__(self, data: CellComplexData, images: dict, amap):
        mats = {g: u.matrix() for g, u in images.items()}
        self.counts = data.counts()
        self.n = data.top_degree
        self.blocks = {}
        for i in range(1, self.n + 1):
            rows = data.entries.get(i)
            blist = []
            if rows is not None:
                for r in range(self.counts[i]):
                    for c in range(self.counts[i - 1]):
                        e = rows[r][c]
                        if e is None or e.is_zero():
                            continue
                        blist.append((r, c, elem_eval_terms(e.bar(), mats, amap)))
            self.blocks[i] = blist
        self.degree_bound = 0
        for blist in self.blocks.values():
            for _, _, triples in blist:
                for _, a, _ in triples:
                    self.degree_bound = max(self.degree_bound, abs(a))

    def complex_at(self, z: complex, check: bool = False) -> BasedComplex:
        dim = 2
        diffs = {}
        for i in range(1, self.n + 1):
            mat = _block_fill(self.counts[i - 1], self.counts[i], dim, complex)
            for r, c, triples in self.blocks[i]:
                b = np.zeros((dim, dim), dtype=complex)
                for coeff, a, m in triples:
                    b += coeff * (z ** a) * m
                mat[c * dim:(c + 1) * dim, r * dim:(r + 1) * dim] = b
            diffs[i] = mat
        dims = [cnt * dim for cnt in self.counts]
        return BasedComplex(dims, diffs, homology=None, check=check)
