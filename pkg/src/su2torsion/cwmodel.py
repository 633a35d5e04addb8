"""Equivariant CW-pair models of a knot exterior with its boundary torus.

A model bundles a deficiency-one presentation, the presentation 2-complex of
the exterior (one 0-cell, a 1-cell per generator, a 2-cell per relator), the
product cell structure on the boundary torus (cells q; l, m; F), and a
cellular inclusion of the torus into the exterior.  Boundary and inclusion
entries live in the integral group ring of the knot group, written in the
presentation generators.

File format (.cwp): INI sections

    [meta]                name, ambient_zhs
    [presentation]        generators, relators (name: word), mu, lambda
    [cells]               e0 / e1 / e2 cell names
    [boundary.d2]         <relator>.<generator> = group-ring sums "c*word"
    [boundary.d1]         <generator>.<0-cell>  = ...
    [torus.d1] [torus.d2] equivariant torus boundaries (words in pi_1 E)
    [inclusion]           <torus-cell>.<E-cell> = group-ring sums
    [torus]               f_decomposition (ordered signed conjugators
                          certifying [lambda, mu] as a product of relator
                          conjugates), f_basepoint

Words use compact notation: lower case is a generator, upper case its
inverse, "1" the identity.  Group-ring sums look like "1*1 - 1*xY + 2*x".

Validation is two-tier.  Symbolic: d1 entries are x_j - 1; d2 rows satisfy
sum_j d2[r][j] (x_j - 1) = r - 1 exactly in the free group ring (which pins
them to the Fox derivatives); the torus inclusion of l and m satisfies the
same identity against lambda - 1 and mu - 1; the f_decomposition freely
reduces to the commutator [lambda, mu].  Numeric: d o d = 0 and the
degree-2 chain-map equation under >= 100 random representation assignments
that satisfy the relators (abelian ones always do; irreducible sample points
can be supplied).  Untwisted homology ranks are certified by Smith normal
form.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field

import numpy as np

from .chain import CellComplexData
from .errors import ChainMapViolation, HomologyMismatch, ParseError
from .su2 import SU2
from .words import (AbelianizationMap, GroupPresentation, GroupRingElement,
                    Word, abelianize, format_word, fox_chain, fox_derivative,
                    parse_word, smith_normal_form)

NUMERIC_TOL = 1e-10


# ---- group-ring sum grammar -----------------------------------------------------


def parse_ring_elem(text: str, generators) -> GroupRingElement:
    """Parse sums like "1*1 - 1*xY + 2*x" into a group-ring element."""
    s = text.replace("-", " - ").replace("+", " + ")
    tokens = s.split()
    if not tokens:
        return GroupRingElement.zero()
    out = GroupRingElement.zero()
    sign = 1
    expect_term = True
    for tok in tokens:
        if tok == "+":
            sign = 1
            expect_term = True
            continue
        if tok == "-":
            sign = -1
            expect_term = True
            continue
        if not expect_term:
            raise ParseError(f"missing +/- between terms in {text!r}")
        if "*" in tok:
            cs, ws = tok.split("*", 1)
            try:
                coeff = int(cs)
            except ValueError as exc:
                raise ParseError(f"bad coefficient {cs!r} in {text!r}") from exc
        else:
            coeff, ws = 1, tok
        w = parse_word(ws, generators)
        out = out + GroupRingElement.from_word(w, sign * coeff)
        sign = 1
        expect_term = False
    return out


def format_ring_elem(e: GroupRingElement) -> str:
    if e.is_zero():
        return "0"
    items = sorted(e.terms.items(), key=lambda kv: (len(kv[0]), format_word(kv[0])))
    parts = []
    for i, (w, c) in enumerate(items):
        sign = "-" if c < 0 else ("+" if i > 0 else "")
        body = f"{abs(c)}*{format_word(w)}"
        parts.append(f"{sign} {body}".strip() if i > 0 else f"{sign}{body}")
    return " ".join(parts)


# ---- model type -----------------------------------------------------------------


@dataclass
class CWPairModel:
    """Validated CW model of (exterior, boundary torus) with inclusion data."""

    name: str
    presentation: GroupPresentation
    amap: AbelianizationMap
    e_cells: CellComplexData
    torus: CellComplexData
    inclusion: dict                      # torus cell -> {E cell -> GroupRingElement}
    f_decomposition: list                # ordered (sign, conjugator Word, relator name)
    f_basepoint: Word = field(default_factory=Word.identity)
    ambient_zhs: bool = True

    @property
    def generators(self):
        return self.presentation.generators

    def inclusion_elem(self, torus_cell: str, e_cell: str) -> GroupRingElement:
        return self.inclusion.get(torus_cell, {}).get(e_cell, GroupRingElement.zero())

    def f_chain_elem(self) -> dict:
        """Image of the torus 2-cell as {relator name: group-ring element}."""
        return dict(self.inclusion.get("F", {}))


# ---- parsing --------------------------------------------------------------------

_REQUIRED_SECTIONS = ("presentation", "cells", "boundary.d2", "boundary.d1",
                      "torus.d1", "torus.d2", "inclusion", "torus")


def _read_config(source) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",))
    cp.optionxform = str          # keys are case-sensitive: words appear in them
    try:
        if hasattr(source, "read"):
            cp.read_file(source)
        else:
            with open(source, "r", encoding="utf-8") as fh:
                cp.read_file(fh)
    except OSError as exc:
        raise ParseError(f"cannot read model file: {exc}") from exc
    except configparser.Error as exc:
        raise ParseError(f"malformed model file: {exc}") from exc
    return cp


def parse_model(source, validate: bool = True, rng=None, rep_points=None) -> CWPairModel:
    """Parse a .cwp file (path or file object) and validate the model.

    rep_points: optional iterable of generator->SU2 dicts known to satisfy
    the relators (e.g. sampled irreducible points); they join the random
    abelian assignments in the numeric tier.
    """
    cp = _read_config(source)
    for sec in _REQUIRED_SECTIONS:
        if not cp.has_section(sec):
            raise ParseError(f"missing section [{sec}]")

    pres_sec = cp["presentation"]
    try:
        generators = tuple(pres_sec["generators"].split())
    except KeyError as exc:
        raise ParseError("missing generators in [presentation]") from exc
    relator_names, relators = [], []
    for spec_item in pres_sec.get("relators", "").split(","):
        spec_item = spec_item.strip()
        if not spec_item:
            continue
        if ":" not in spec_item:
            raise ParseError(f"relator entry {spec_item!r} needs 'name: word'")
        rname, rword = (part.strip() for part in spec_item.split(":", 1))
        relator_names.append(rname)
        relators.append(parse_word(rword, generators))
    if "mu" not in pres_sec or "lambda" not in pres_sec:
        raise ParseError("missing peripheral words mu/lambda in [presentation]")
    mu = parse_word(pres_sec["mu"], generators)
    lam = parse_word(pres_sec["lambda"], generators)
    pres = GroupPresentation(generators=generators, relators=tuple(relators),
                             mu=mu, lam=lam)

    cells_sec = cp["cells"]
    e0 = cells_sec.get("e0", "p").split()
    e1 = cells_sec.get("e1", " ".join(generators)).split()
    e2 = cells_sec.get("e2", " ".join(relator_names)).split()
    if len(e0) != 1:
        raise ParseError("exterior model needs exactly one 0-cell")
    if list(e1) != list(generators):
        raise ParseError("1-cells must be the presentation generators, in order")
    if list(e2) != relator_names:
        raise ParseError("2-cells must be the presentation relators, in order")

    def ring(section, key):
        if key not in cp[section]:
            return GroupRingElement.zero()
        try:
            return parse_ring_elem(cp[section][key], generators)
        except ParseError as exc:
            raise ParseError(f"[{section}] {key}: {exc}") from exc

    d1_rows = [[ring("boundary.d1", f"{g}.{e0[0]}")] for g in e1]
    d2_rows = [[ring("boundary.d2", f"{r}.{g}") for g in e1] for r in e2]
    e_cells = CellComplexData(names=[e0, e1, e2], entries={1: d1_rows, 2: d2_rows})

    t0, t1, t2 = ["q"], ["l", "m"], ["F"]
    td1 = [[ring("torus.d1", f"{c}.q")] for c in t1]
    td2 = [[ring("torus.d2", f"F.{c}") for c in t1]]
    torus = CellComplexData(names=[t0, t1, t2], entries={1: td1, 2: td2})

    inclusion = {}
    for key in cp["inclusion"]:
        if "." not in key:
            raise ParseError(f"[inclusion] key {key!r} must be <torus-cell>.<E-cell>")
        tcell, ecell = key.split(".", 1)
        inclusion.setdefault(tcell, {})[ecell] = ring("inclusion", key)

    torus_sec = cp["torus"]
    decomposition = []
    for tok in torus_sec.get("f_decomposition", "").split():
        if ":" not in tok or tok[0] not in "+-":
            raise ParseError(f"f_decomposition entry {tok!r} must look like +word:relator")
        sign = 1 if tok[0] == "+" else -1
        wtext, rname = tok[1:].split(":", 1)
        if rname not in relator_names:
            raise ParseError(f"f_decomposition references unknown relator {rname!r}")
        decomposition.append((sign, parse_word(wtext, generators), rname))
    f_basepoint = parse_word(torus_sec.get("f_basepoint", "1"), generators)

    meta = cp["meta"] if cp.has_section("meta") else {}
    name = meta.get("name", "model")
    ambient_zhs = str(meta.get("ambient_zhs", "true")).lower() in ("1", "true", "yes")

    model = CWPairModel(name=name, presentation=pres, amap=abelianize(pres),
                        e_cells=e_cells, torus=torus, inclusion=inclusion,
                        f_decomposition=decomposition, f_basepoint=f_basepoint,
                        ambient_zhs=ambient_zhs)
    if validate:
        validate_model(model, rng=rng, rep_points=rep_points)
    return model


def serialize_model(model: CWPairModel) -> str:
    """Deterministic .cwp text for a model (inverse of parse_model)."""
    pres = model.presentation
    gens = pres.generators
    rel_names = model.e_cells.names[2]
    lines = []
    lines.append("[meta]")
    lines.append(f"name = {model.name}")
    lines.append(f"ambient_zhs = {'true' if model.ambient_zhs else 'false'}")
    lines.append("")
    lines.append("[presentation]")
    lines.append(f"generators = {' '.join(gens)}")
    rels = ", ".join(f"{n}: {format_word(r)}" for n, r in zip(rel_names, pres.relators))
    lines.append(f"relators = {rels}")
    lines.append(f"mu = {format_word(pres.mu)}")
    lines.append(f"lambda = {format_word(pres.lam)}")
    lines.append("")
    lines.append("[cells]")
    lines.append(f"e0 = {model.e_cells.names[0][0]}")
    lines.append(f"e1 = {' '.join(model.e_cells.names[1])}")
    lines.append(f"e2 = {' '.join(rel_names)}")
    lines.append("")
    lines.append("[boundary.d2]")
    for i, r in enumerate(rel_names):
        for j, g in enumerate(gens):
            lines.append(f"{r}.{g} = {format_ring_elem(model.e_cells.entries[2][i][j])}")
    lines.append("")
    lines.append("[boundary.d1]")
    p = model.e_cells.names[0][0]
    for j, g in enumerate(gens):
        lines.append(f"{g}.{p} = {format_ring_elem(model.e_cells.entries[1][j][0])}")
    lines.append("")
    lines.append("[torus.d1]")
    for j, c in enumerate(model.torus.names[1]):
        lines.append(f"{c}.q = {format_ring_elem(model.torus.entries[1][j][0])}")
    lines.append("")
    lines.append("[torus.d2]")
    for j, c in enumerate(model.torus.names[1]):
        lines.append(f"F.{c} = {format_ring_elem(model.torus.entries[2][0][j])}")
    lines.append("")
    lines.append("[inclusion]")
    for tcell in ("q", "l", "m", "F"):
        for ecell, elem in sorted(model.inclusion.get(tcell, {}).items()):
            lines.append(f"{tcell}.{ecell} = {format_ring_elem(elem)}")
    lines.append("")
    lines.append("[torus]")
    decomp = " ".join(f"{'+' if s > 0 else '-'}{format_word(w)}:{r}"
                      for s, w, r in model.f_decomposition)
    lines.append(f"f_decomposition = {decomp}")
    lines.append(f"f_basepoint = {format_word(model.f_basepoint)}")
    lines.append("")
    return "\n".join(lines)


def loads_model(text: str, **kw) -> CWPairModel:
    return parse_model(io.StringIO(text), **kw)


def load_model(path=None, **kw) -> CWPairModel:
    """Load a model file; with no path, the bundled figure-eight model."""
    if path is None:
        from importlib import resources
        text = (resources.files("su2torsion") / "models" / "figure8.cwp").read_text()
    else:
        from pathlib import Path
        text = Path(path).read_text()
    return loads_model(text, **kw)


# ---- validation -----------------------------------------------------------------


def _elem_times_gen_minus_one(e: GroupRingElement, g: str) -> GroupRingElement:
    return e * GroupRingElement.from_word(Word.gen(g)) - e


def _check_fox_rows(model: CWPairModel):
    """Symbolic: each d2 row against the free-group Fox identity."""
    gens = model.generators
    rel_names = model.e_cells.names[2]
    for i, rname in enumerate(rel_names):
        r = model.presentation.relators[i]
        acc = GroupRingElement.zero()
        for j, g in enumerate(gens):
            acc = acc + _elem_times_gen_minus_one(model.e_cells.entries[2][i][j], g)
        want = GroupRingElement.from_word(r) - GroupRingElement.one()
        if acc != want:
            raise ChainMapViolation(
                f"2-cell {rname}: boundary row fails the Fox identity")


def _check_d1(model: CWPairModel):
    for j, g in enumerate(model.generators):
        want = GroupRingElement.from_word(Word.gen(g)) - GroupRingElement.one()
        if model.e_cells.entries[1][j][0] != want:
            raise ChainMapViolation(f"1-cell {g}: boundary must be {g} - 1")


def _check_torus_cells(model: CWPairModel):
    pres = model.presentation
    lam, mu = pres.lam, pres.mu
    one = GroupRingElement.one()
    wl = GroupRingElement.from_word(lam)
    wm = GroupRingElement.from_word(mu)
    td1, td2 = model.torus.entries[1], model.torus.entries[2]
    if td1[0][0] != wl - one:
        raise ChainMapViolation("torus 1-cell l: boundary must be lambda - 1")
    if td1[1][0] != wm - one:
        raise ChainMapViolation("torus 1-cell m: boundary must be mu - 1")
    if td2[0][0] != one - wm:
        raise ChainMapViolation("torus 2-cell F: l-coefficient must be 1 - mu")
    if td2[0][1] != wl - one:
        raise ChainMapViolation("torus 2-cell F: m-coefficient must be lambda - 1")


def _check_inclusion_symbolic(model: CWPairModel):
    pres = model.presentation
    gens = model.generators
    one = GroupRingElement.one()
    p = model.e_cells.names[0][0]
    if model.inclusion_elem("q", p) != one:
        raise ChainMapViolation("inclusion of torus 0-cell q must be the basepoint")
    for tcell, word in (("l", pres.lam), ("m", pres.mu)):
        acc = GroupRingElement.zero()
        for g in gens:
            acc = acc + _elem_times_gen_minus_one(model.inclusion_elem(tcell, g), g)
        want = GroupRingElement.from_word(word) - one
        if acc != want:
            raise ChainMapViolation(
                f"inclusion of torus 1-cell {tcell} is not a chain over "
                f"{format_word(word)}")


def _check_decomposition(model: CWPairModel):
    """The word-level certificate: the decomposition frees to [lambda, mu]."""
    pres = model.presentation
    rel = dict(zip(model.e_cells.names[2], pres.relators))
    prod = Word.identity()
    for sign, w, rname in model.f_decomposition:
        prod = prod * rel[rname].power(sign).conjugate(w)
    lam, mu = pres.lam, pres.mu
    comm = lam * mu * lam.inverse() * mu.inverse()
    if prod != comm:
        raise ChainMapViolation(
            "f_decomposition does not freely reduce to [lambda, mu]")
    grouped = {}
    for sign, w, rname in model.f_decomposition:
        grouped[rname] = grouped.get(rname, GroupRingElement.zero()) + \
            GroupRingElement.from_word(w, sign)
    fchain = model.f_chain_elem()
    for rname in model.e_cells.names[2]:
        have = fchain.get(rname, GroupRingElement.zero())
        want = grouped.get(rname, GroupRingElement.zero())
        if have != want:
            raise ChainMapViolation(
                f"inclusion of torus 2-cell F disagrees with f_decomposition "
                f"on relator {rname}")


def _random_satisfying_images(model: CWPairModel, rng, rep_points=None):
    """Assignments generator -> SU2 that satisfy all relators.

    Abelian points rho(x_j) = U^(alpha-exponent of x_j) satisfy every relator;
    supplied rep_points are appended as-is.
    """
    out = []
    exps = model.amap.exps
    for _ in range(100):
        u = SU2.random(rng)
        images = {}
        for g in model.generators:
            k = exps[g]
            v = SU2.identity()
            base = u if k >= 0 else u.inverse()
            for _ in range(abs(k)):
                v = v * base
            images[g] = v
        out.append(images)
    if rep_points:
        out.extend(rep_points)
    return out


def _numeric_checks(model: CWPairModel, rng, rep_points=None):
    from .chain import twisted_complex  # local to avoid cycles on partial imports

    assignments = _random_satisfying_images(model, rng, rep_points)
    gens = model.generators
    for idx, images in enumerate(assignments):
        z = np.exp(2j * np.pi * rng.random())
        mats = {g: u.matrix() for g, u in images.items()}
        # relator check (guards rep_points input errors)
        for rname, r in zip(model.e_cells.names[2], model.presentation.relators):
            m = np.eye(2, dtype=complex)
            for g, s in r.letters:
                m = m @ (mats[g] if s > 0 else np.linalg.inv(mats[g]))
            if np.abs(m - np.eye(2)).max() > 1e-8:
                raise ChainMapViolation(
                    f"assignment {idx} does not satisfy relator {rname}")

        def ev(e: GroupRingElement) -> np.ndarray:
            out = np.zeros((2, 2), dtype=complex)
            for w, c in e.terms.items():
                m = np.eye(2, dtype=complex)
                for g, s in w.letters:
                    m = m @ (mats[g] if s > 0 else np.linalg.inv(mats[g]))
                out += c * z ** model.amap.degree(w) * m
            return out

        # d o d = 0 on the exterior part
        for i, rname in enumerate(model.e_cells.names[2]):
            acc = np.zeros((2, 2), dtype=complex)
            for j, g in enumerate(gens):
                acc += ev(model.e_cells.entries[2][i][j]) @ ev(model.e_cells.entries[1][j][0])
            if np.abs(acc).max() > NUMERIC_TOL:
                raise ChainMapViolation(
                    f"d1 o d2 != 0 at 2-cell {rname} under assignment {idx}")
        # torus d o d = 0
        acc = np.zeros((2, 2), dtype=complex)
        for jcol in range(2):
            acc += ev(model.torus.entries[2][0][jcol]) @ ev(model.torus.entries[1][jcol][0])
        if np.abs(acc).max() > NUMERIC_TOL:
            raise ChainMapViolation(f"torus d1 o d2 != 0 under assignment {idx}")
        # chain map at F: incl(dF) = d(incl F)
        lhs = {g: np.zeros((2, 2), dtype=complex) for g in gens}
        for jcol, tcell in enumerate(model.torus.names[1]):
            coeff = ev(model.torus.entries[2][0][jcol])
            for g in gens:
                lhs[g] += coeff @ ev(model.inclusion_elem(tcell, g))
        for i, rname in enumerate(model.e_cells.names[2]):
            zc = ev(model.inclusion_elem("F", rname))
            for j, g in enumerate(gens):
                rhs = zc @ ev(model.e_cells.entries[2][i][j])
                if np.abs(lhs[g] - rhs).max() > NUMERIC_TOL:
                    raise ChainMapViolation(
                        f"inclusion chain map fails at F over 1-cell {g} "
                        f"under assignment {idx}")


def untwisted_homology(model: CWPairModel, part: str = "E"):
    """Per-degree (rank, torsion divisors) of the integral cellular homology."""
    if part == "E":
        data = model.e_cells
    elif part in ("boundary", "T", "torus"):
        data = model.torus
    else:
        raise ValueError(f"unknown part {part!r}")
    counts = data.counts()
    mats = {}
    for i in (1, 2):
        rows = data.entries.get(i, [])
        m = [[0] * counts[i] for _ in range(counts[i - 1])]
        for r in range(counts[i]):
            for c in range(counts[i - 1]):
                m[c][r] = rows[r][c].augmentation() if rows else 0
        mats[i] = m

    def snf_info(mat, ncols):
        if ncols == 0 or not mat:
            return 0, []
        d, _, _ = smith_normal_form(mat)
        divs = []
        rank = 0
        for i in range(min(len(d), len(d[0]) if d else 0)):
            if d[i][i] != 0:
                rank += 1
                if abs(d[i][i]) > 1:
                    divs.append(abs(d[i][i]))
        return rank, divs

    r1, div1 = snf_info(mats[1], counts[1])
    r2, div2 = snf_info(mats[2], counts[2])
    out = [
        (counts[0] - r1, []),                 # H_0 of a connected complex is free
        (counts[1] - r1 - r2, div2),
        (counts[2] - r2, []),
    ]
    return out


def validate_model(model: CWPairModel, rng=None, rep_points=None):
    """Run all symbolic and numeric invariants; raise on the first failure."""
    if rng is None:
        rng = np.random.default_rng(20260815)
    _check_d1(model)
    _check_fox_rows(model)
    _check_torus_cells(model)
    _check_inclusion_symbolic(model)
    _check_decomposition(model)
    _numeric_checks(model, rng, rep_points)

    h_e = untwisted_homology(model, "E")
    if h_e[0][0] != 1 or h_e[1][0] != 1 or h_e[2][0] != 0:
        raise HomologyMismatch(
            f"exterior homology ranks {[h[0] for h in h_e]}, expected [1, 1, 0]")
    if h_e[2][1]:
        raise HomologyMismatch("exterior H_2 must be zero")
    h_t = untwisted_homology(model, "boundary")
    if [h[0] for h in h_t] != [1, 2, 1]:
        raise HomologyMismatch(
            f"torus homology ranks {[h[0] for h in h_t]}, expected [1, 2, 1]")
    if model.ambient_zhs and model.amap.divisors:
        raise HomologyMismatch(
            "ambient_zhs set but H_1 has torsion "
            f"{list(model.amap.divisors)}")
    return True


# ---- twisted helpers used downstream ---------------------------------------------


def restriction_ad(model: CWPairModel, images: dict, degree: int) -> np.ndarray:
    """Matrix of the cochain restriction C^deg(E) -> C^deg(T) with Ad twist."""
    adj = {g: u.adjoint() for g, u in images.items()}

    def ev(e: GroupRingElement) -> np.ndarray:
        out = np.zeros((3, 3))
        for w, c in e.terms.items():
            m = np.eye(3)
            inv = {}
            for g, s in w.letters:
                if s > 0:
                    m = m @ adj[g]
                else:
                    if g not in inv:
                        inv[g] = adj[g].T
                    m = m @ inv[g]
            out += c * m
        return out

    t_names = model.torus.names[degree]
    e_names = model.e_cells.names[degree]
    mat = np.zeros((3 * len(t_names), 3 * len(e_names)))
    for a, tcell in enumerate(t_names):
        for b, ecell in enumerate(e_names):
            e = model.inclusion_elem(tcell, ecell)
            if not e.is_zero():
                mat[3 * a:3 * a + 3, 3 * b:3 * b + 3] = ev(e)
    return mat


# ---- search the identity among relators -------------------------------------------


def find_conjugate_decomposition(pres: GroupPresentation, target: Word,
                                 max_factors: int = 6, max_conj_len: int = 12,
                                 beam: int = 200):
    """Express target as an ordered product of conjugates w r^s w^-1 of relators.

    Greedy beam search: at each step multiply by a conjugate whose conjugator
    is a prefix of the remaining quotient, keeping the states with shortest
    residual.  Returns a list of (sign, conjugator, relator index) or None.
    """
    rels = list(pres.relators)
    states = [(len(target), target, [])]       # (residual length, residual, factors)
    seen = {target}
    for _ in range(max_factors):
        nxt = []
        for _, resid, factors in states:
            prefixes = [Word.identity()]
            letters = resid.letters
            for k in range(1, min(len(letters), max_conj_len) + 1):
                prefixes.append(Word(letters[:k]))
            for w in prefixes:
                for ri, r in enumerate(rels):
                    for sign in (1, -1):
                        fac = r.power(sign).conjugate(w)
                        new_resid = fac.inverse() * resid
                        if new_resid == Word.identity():
                            return factors + [(sign, w, ri)]
                        if new_resid in seen:
                            continue
                        seen.add(new_resid)
                        nxt.append((len(new_resid), new_resid,
                                    factors + [(sign, w, ri)]))
        nxt.sort(key=lambda s: s[0])
        states = nxt[:beam]
        if not states:
            break
    return None
