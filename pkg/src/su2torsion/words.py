"""Free-group words, group presentations, integral group rings, and Fox
derivatives.

Words are tuples of (generator, +-1) letters kept in freely reduced form.
Group-ring elements are finite integer combinations of words.  The Fox
derivative follows d(x)/dx = 1, d(x^-1)/dx = -x^-1 and the product rule
d(uv)/dx = du/dx + u dv/dx.

Parsing accepts two token styles, mixed freely, separated by whitespace:
  * name tokens with optional caret exponent: ``x  y^-1  x^3``
  * compact runs of single-letter generators, uppercase meaning inverse:
    ``XyxY`` is x^-1 y x y^-1
The token ``1`` denotes the empty word.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import FreeRankNotOne, ParseError
from .laurent import LaurentPoly


def _reduce_letters(letters):
    out = []
    for g, e in letters:
        if out and out[-1][0] == g and out[-1][1] == -e:
            out.pop()
        else:
            out.append((g, e))
    return tuple(out)


class Word:
    """Freely reduced word in named generators."""

    __slots__ = ("letters",)

    def __init__(self, letters=()):
        ls = []
        for g, e in letters:
            e = int(e)
            if e == 0:
                continue
            ls.extend([(g, 1 if e > 0 else -1)] * abs(e))
        self.letters = _reduce_letters(ls)

    @classmethod
    def identity(cls) -> "Word":
        return cls(())

    @classmethod
    def gen(cls, name: str, exp: int = 1) -> "Word":
        return cls(((name, exp),))

    def __len__(self):
        return len(self.letters)

    def __bool__(self):
        return bool(self.letters)

    def __eq__(self, other):
        return isinstance(other, Word) and self.letters == other.letters

    def __hash__(self):
        return hash(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        w = Word.__new__(Word)
        w.letters = _reduce_letters(self.letters + other.letters)
        return w

    def inverse(self) -> "Word":
        w = Word.__new__(Word)
        w.letters = tuple((g, -e) for g, e in reversed(self.letters))
        return w

    def conjugate(self, by: "Word") -> "Word":
        """by * self * by^-1."""
        return by * self * by.inverse()

    def power(self, n: int) -> "Word":
        out = Word.identity()
        base = self if n >= 0 else self.inverse()
        for _ in range(abs(n)):
            out = out * base
        return out

    def generators(self):
        return {g for g, _ in self.letters}

    def exponent_sum(self, gen: str) -> int:
        return sum(e for g, e in self.letters if g == gen)

    def cyclic_rotations(self):
        """Yield (rotation, prefix) with rotation = prefix^-1 * self * prefix."""
        ls = self.letters
        for j in range(len(ls)):
            rot = Word.__new__(Word)
            rot.letters = _reduce_letters(ls[j:] + ls[:j])
            pref = Word.__new__(Word)
            pref.letters = ls[:j]
            yield rot, pref

    def __repr__(self):
        return f"Word({format_word(self)!r})"


def reduce(word: Word) -> Word:
    """Free reduction (idempotent; Word construction already reduces)."""
    w = Word.__new__(Word)
    w.letters = _reduce_letters(word.letters)
    return w


def parse_word(text: str, generators=None) -> Word:
    """Parse a word; see module docstring for the grammar."""
    gens = set(generators) if generators is not None else None
    letters = []
    for tok in text.split():
        if tok == "1":
            continue
        if "^" in tok:
            name, _, exp = tok.partition("^")
            try:
                e = int(exp)
            except ValueError:
                raise ParseError(f"bad exponent in token {tok!r}")
            if gens is not None and name not in gens:
                raise ParseError(f"unknown generator {name!r} in {tok!r}")
            letters.extend([(name, 1 if e > 0 else -1)] * abs(e))
            continue
        if gens is not None and tok in gens:
            letters.append((tok, 1))
            continue
        # compact run of single-letter generators, uppercase = inverse
        run = []
        ok = True
        for ch in tok:
            name = ch.lower()
            if gens is not None and name not in gens:
                ok = False
                break
            run.append((name, 1 if ch.islower() else -1))
        if not ok:
            raise ParseError(f"cannot parse token {tok!r}")
        letters.extend(run)
    return Word(letters)


def format_word(word: Word, compact: bool = True) -> str:
    if not word.letters:
        return "1"
    if compact and all(len(g) == 1 for g, _ in word.letters):
        return "".join(g if e > 0 else g.upper() for g, e in word.letters)
    return " ".join(g if e > 0 else f"{g}^-1" for g, e in word.letters)


def substitute(word: Word, mapping: dict) -> Word:
    """Apply an endomorphism given on generators by words."""
    out = Word.identity()
    for g, e in word.letters:
        img = mapping[g]
        out = out * (img if e > 0 else img.inverse())
    return out


class GroupRingElement:
    """Finite integer combination of words."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {}
        if terms:
            for w, c in (terms.items() if isinstance(terms, dict) else terms):
                c = int(c)
                if c:
                    self.terms[w] = self.terms.get(w, 0) + c
            self.terms = {w: c for w, c in self.terms.items() if c}

    @classmethod
    def zero(cls) -> "GroupRingElement":
        return cls()

    @classmethod
    def one(cls) -> "GroupRingElement":
        return cls({Word.identity(): 1})

    @classmethod
    def from_word(cls, w: Word, coeff: int = 1) -> "GroupRingElement":
        return cls({w: coeff})

    def __eq__(self, other):
        return isinstance(other, GroupRingElement) and self.terms == other.terms

    def __hash__(self):
        raise TypeError("GroupRingElement is not hashable")

    def __add__(self, other):
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, 0) + c
        return GroupRingElement(out)

    def __neg__(self):
        return GroupRingElement({w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return GroupRingElement({w: c * other for w, c in self.terms.items()})
        if isinstance(other, Word):
            other = GroupRingElement.from_word(other)
        out = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = w1 * w2
                out[w] = out.get(w, 0) + c1 * c2
        return GroupRingElement(out)

    def __rmul__(self, other):
        if isinstance(other, int):
            return self * other
        if isinstance(other, Word):
            return GroupRingElement.from_word(other) * self
        return NotImplemented

    def is_zero(self) -> bool:
        return not self.terms

    def augmentation(self) -> int:
        return sum(self.terms.values())

    def bar(self) -> "GroupRingElement":
        """Anti-involution sending each word to its inverse."""
        return GroupRingElement({w.inverse(): c for w, c in self.terms.items()})

    def __repr__(self):
        if not self.terms:
            return "GroupRingElement(0)"
        bits = [f"{c:+d}*{format_word(w)}" for w, c in sorted(
            self.terms.items(), key=lambda it: (len(it[0].letters), it[0].letters))]
        return "GroupRingElement(" + " ".join(bits) + ")"


def fox_derivative(target, gen: str) -> GroupRingElement:
    """Fox derivative with respect to ``gen``.

    Accepts a Word or a GroupRingElement (extended linearly).
    """
    if isinstance(target, GroupRingElement):
        out = GroupRingElement.zero()
        for w, c in target.terms.items():
            out = out + fox_derivative(w, gen) * c
        return out
    terms = {}
    prefix = []
    for g, e in target.letters:
        if g == gen:
            if e > 0:
                w = Word.__new__(Word)
                w.letters = tuple(prefix)
                terms[w] = terms.get(w, 0) + 1
            else:
                w = Word.__new__(Word)
                w.letters = _reduce_letters(tuple(prefix) + ((g, -1),))
                terms[w] = terms.get(w, 0) - 1
        prefix.append((g, e))
    return GroupRingElement(terms)


def fox_chain(word: Word, generators) -> dict:
    """All Fox derivatives of a word, keyed by generator name."""
    return {g: fox_derivative(word, g) for g in generators}


@dataclass(frozen=True)
class GroupPresentation:
    """Finite presentation with distinguished peripheral words."""

    generators: tuple
    relators: tuple
    mu: Word | None = None
    lam: Word | None = None

    def __post_init__(self):
        known = set(self.generators)
        for r in self.relators:
            if not r.generators() <= known:
                raise ParseError(f"relator {format_word(r)} uses unknown generators")
        for w in (self.mu, self.lam):
            if w is not None and not w.generators() <= known:
                raise ParseError(f"peripheral word {format_word(w)} uses unknown generators")

    @property
    def deficiency(self) -> int:
        return len(self.generators) - len(self.relators)

    def parse(self, text: str) -> Word:
        return parse_word(text, self.generators)


# ---- integral Smith normal form ----------------------------------------------


def smith_normal_form(mat):
    """Exact Smith normal form over the integers.

    Returns (d, u, v) with u @ mat @ v = d, u and v unimodular, d diagonal
    with d[i][i] dividing d[i+1][i+1].  Inputs are small; pivoting is naive.
    All matrices are lists of lists of python ints.
    """
    a = [[int(x) for x in row] for row in mat]
    m = len(a)
    n = len(a[0]) if m else 0
    u = [[int(i == j) for j in range(m)] for i in range(m)]
    v = [[int(i == j) for j in range(n)] for i in range(n)]

    def row_op(i, j, q):      # row_i -= q * row_j
        a[i] = [x - q * y for x, y in zip(a[i], a[j])]
        u[i] = [x - q * y for x, y in zip(u[i], u[j])]

    def col_op(i, j, q):      # col_i -= q * col_j
        for r in range(m):
            a[r][i] -= q * a[r][j]
        for r in range(n):
            v[r][i] -= q * v[r][j]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for r in range(m):
            a[r][i], a[r][j] = a[r][j], a[r][i]
        for r in range(n):
            v[r][i], v[r][j] = v[r][j], v[r][i]

    k = 0
    while k < min(m, n):
        # find smallest nonzero entry in the trailing block
        best = None
        for i in range(k, m):
            for j in range(k, n):
                if a[i][j] and (best is None or abs(a[i][j]) < abs(a[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(k, best[0])
        swap_cols(k, best[1])
        dirty = True
        while dirty:
            dirty = False
            for i in range(k + 1, m):
                if a[i][k]:
                    row_op(i, k, a[i][k] // a[k][k])
                    if a[i][k]:
                        swap_rows(k, i)
                    dirty = True
            for j in range(k + 1, n):
                if a[k][j]:
                    col_op(j, k, a[k][j] // a[k][k])
                    if a[k][j]:
                        swap_cols(k, j)
                    dirty = True
        # divisibility: fold any non-multiple into the pivot position
        piv = a[k][k]
        if piv:
            for i in range(k + 1, m):
                for j in range(k + 1, n):
                    if a[i][j] % piv:
                        a[k] = [x + y for x, y in zip(a[k], a[i])]
                        u[k] = [x + y for x, y in zip(u[k], u[i])]
                        break
                else:
                    continue
                break
            else:
                if piv < 0:
                    a[k] = [-x for x in a[k]]
                    u[k] = [-x for x in u[k]]
                k += 1
                continue
            continue    # re-run elimination at the same k
        k += 1
    return a, u, v


@dataclass(frozen=True)
class AbelianizationMap:
    """Map to the free part of H_1, normalized so the meridian maps to t."""

    generators: tuple
    exps: dict = field(compare=False)
    divisors: tuple = ()

    def degree(self, word: Word) -> int:
        return sum(e * self.exps[g] for g, e in word.letters)


def abelianize(pres: GroupPresentation, mu: Word | None = None) -> AbelianizationMap:
    """Abelianization onto its free part, which must have rank one.

    Computed by Smith normal form of the relator exponent matrix.  The
    surviving free coordinate is normalized so that the meridian (``mu``
    argument, else the presentation's mu, else the first generator) has
    degree +1.  Raises FreeRankNotOne otherwise.
    """
    gens = pres.generators
    m = len(gens)
    rel_mat = [[r.exponent_sum(g) for g in gens] for r in pres.relators]
    if not rel_mat:
        rel_mat = [[0] * m]
    d, _, v = smith_normal_form(rel_mat)
    rank = sum(1 for i in range(min(len(d), m)) if i < len(d) and d[i][i] != 0)
    free_rank = m - rank
    if free_rank != 1:
        raise FreeRankNotOne(f"free rank is {free_rank}, not 1")
    divisors = tuple(d[i][i] for i in range(rank) if abs(d[i][i]) != 1)
    # generator x_j maps to row j of v; free coordinate is the last one
    exps = {g: v[j][m - 1] for j, g in enumerate(gens)}
    mu_word = mu if mu is not None else (pres.mu if pres.mu is not None else Word.gen(gens[0]))
    deg_mu = sum(e * exps[g] for g, e in mu_word.letters)
    if deg_mu == 0 or abs(deg_mu) != 1:
        raise FreeRankNotOne(
            f"meridian has abelianized degree {deg_mu}; cannot normalize to t")
    if deg_mu < 0:
        exps = {g: -k for g, k in exps.items()}
    return AbelianizationMap(generators=tuple(gens), exps=exps, divisors=divisors)


# ---- evaluation under representations -----------------------------------------


def evaluate_word(word: Word, images: dict) -> np.ndarray:
    """Matrix of a word under generator images (numpy arrays)."""
    first = next(iter(images.values()))
    out = np.eye(first.shape[0], dtype=first.dtype)
    inv_cache = {}
    for g, e in word.letters:
        if e > 0:
            out = out @ images[g]
        else:
            if g not in inv_cache:
                inv_cache[g] = np.linalg.inv(images[g])
            out = out @ inv_cache[g]
    return out


def evaluate_elem(elem: GroupRingElement, images: dict, dim: int | None = None) -> np.ndarray:
    """Numeric evaluation of a group-ring element (no abelianization twist)."""
    if dim is None:
        dim = next(iter(images.values())).shape[0]
    out = np.zeros((dim, dim), dtype=complex)
    for w, c in elem.terms.items():
        out += c * evaluate_word(w, images)
    return out


def elem_eval_terms(elem: GroupRingElement, images: dict, amap: AbelianizationMap):
    """Precompute (coeff, alpha-degree, matrix) triples of a group-ring element.

    The twisted evaluation at a scalar t = z is then
    sum coeff * z**degree * matrix, which callers can vectorize over z.
    """
    out = []
    for w, c in elem.terms.items():
        out.append((c, amap.degree(w), evaluate_word(w, images)))
    return out


def evaluate_elem_at(elem: GroupRingElement, images: dict, amap: AbelianizationMap,
                     z: complex) -> np.ndarray:
    dim = next(iter(images.values())).shape[0]
    out = np.zeros((dim, dim), dtype=complex)
    for c, a, m in elem_eval_terms(elem, images, amap):
        out += c * (z ** a) * m
    return out


def evaluate_elem_laurent(elem: GroupRingElement, images: dict,
                          amap: AbelianizationMap):
    """Evaluate alpha tensor rho on a group-ring element symbolically.

    Returns a matrix (list of lists) of LaurentPoly.
    """
    dim = next(iter(images.values())).shape[0]
    acc = {}
    for w, c in elem.terms.items():
        a = amap.degree(w)
        m = evaluate_word(w, images)
        if a in acc:
            acc[a] = acc[a] + c * m
        else:
            acc[a] = c * m.astype(complex)
    out = [[LaurentPoly.zero() for _ in range(dim)] for _ in range(dim)]
    for a, m in acc.items():
        for i in range(dim):
            for j in range(dim):
                if m[i, j] != 0:
                    out[i][j] = out[i][j] + LaurentPoly.t_power(a, m[i, j])
    return out
