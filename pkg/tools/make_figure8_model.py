"""Build the bundled figure-eight CW-pair model file.

Assembles the presentation 2-complex (boundaries from Fox derivatives), the
torus cell data, the peripheral inclusion (Fox chains of lambda and mu), and
the torus 2-cell image certified by a searched decomposition of [lambda, mu]
into conjugates of the relator.  Validates the result and writes
src/su2torsion/models/figure8.cwp deterministically.

Run from the repo root:  python3 tools/make_figure8_model.py
"""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from su2torsion.chain import CellComplexData
from su2torsion.cwmodel import (CWPairModel, find_conjugate_decomposition,
                                parse_model, serialize_model)
from su2torsion.words import (GroupPresentation, GroupRingElement, Word,
                              abelianize, fox_chain, fox_derivative,
                              parse_word)

GENS = ("x", "y")
RELATOR = "XyxYxyXYxY"       # [x^-1, y] x = y [x^-1, y], one reduced word
MU = "x"
LAMBDA = "yXYxxYXy"


def main() -> int:
    r = parse_word(RELATOR, GENS)
    mu = parse_word(MU, GENS)
    lam = parse_word(LAMBDA, GENS)
    pres = GroupPresentation(generators=GENS, relators=(r,), mu=mu, lam=lam)

    one = GroupRingElement.one()
    d1 = [[GroupRingElement.from_word(Word.gen(g)) - one] for g in GENS]
    d2 = [[fox_derivative(r, g) for g in GENS]]
    e_cells = CellComplexData(names=[["p"], list(GENS), ["r1"]],
                              entries={1: d1, 2: d2})

    wl = GroupRingElement.from_word(lam)
    wm = GroupRingElement.from_word(mu)
    torus = CellComplexData(names=[["q"], ["l", "m"], ["F"]],
                            entries={1: [[wl - one], [wm - one]],
                                     2: [[one - wm, wl - one]]})

    comm = lam * mu * lam.inverse() * mu.inverse()
    decomp = find_conjugate_decomposition(pres, comm)
    if decomp is None:
        print("no conjugate decomposition of [lambda, mu] found", file=sys.stderr)
        return 1
    print("decomposition of [lambda, mu]:")
    f_elem = GroupRingElement.zero()
    named = []
    for sign, w, ri in decomp:
        named.append((sign, w, "r1"))
        f_elem = f_elem + GroupRingElement.from_word(w, sign)
        print(f"  {'+' if sign > 0 else '-'} conjugator {w!r}")

    inclusion = {
        "q": {"p": one},
        "m": {g: e for g, e in fox_chain(mu, GENS).items() if not e.is_zero()},
        "l": {g: e for g, e in fox_chain(lam, GENS).items() if not e.is_zero()},
        "F": {"r1": f_elem},
    }

    model = CWPairModel(name="figure8", presentation=pres, amap=abelianize(pres),
                        e_cells=e_cells, torus=torus, inclusion=inclusion,
                        f_decomposition=named, f_basepoint=Word.identity(),
                        ambient_zhs=True)
    text = serialize_model(model)

    out = pathlib.Path(__file__).resolve().parents[1] / "src" / "su2torsion" / "models"
    out.mkdir(parents=True, exist_ok=True)
    path = out / "figure8.cwp"
    path.write_text(text, encoding="utf-8")
    print(f"wrote {path}")

    reparsed = parse_model(path)
    print(f"validated: {reparsed.name}, ambient_zhs={reparsed.ambient_zhs}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
