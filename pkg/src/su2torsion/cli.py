"""Command-line entry point.

Subcommands: ``validate`` (model file invariants), ``trace`` (representation
circle), ``torsion`` (normalized torsion along the circle), ``symmetry``
(involution / outer-automorphism checks).  The trace-based commands emit
``circle.json``, ``torsion-samples.json``, ``f_of_s.csv`` and
``symmetry-report.json`` into the output directory, every file stamped with
a hash of the run configuration so reruns are reproducible; the symmetry
report also renders PNG figures next to the CSV.

Exit codes: 0 success, 2 input/validation error, 3 numerical breakdown,
4 a symmetry check ran but failed.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict
from importlib import resources
from pathlib import Path

import numpy as np

from . import symm
from .cwmodel import loads_model, validate_model
from .errors import (AmbientNotZHS, ChainMapViolation, DimensionMismatch,
                     FreeRankNotOne, HomologyMismatch, ParseError,
                     Su2TorsionError)
from .repspace import continue_circle, find_irreducible_point, solve_near
from .torsion import normalized_torsion
from .volform import metrize

INPUT_ERRORS = (ParseError, FreeRankNotOne, ChainMapViolation,
                HomologyMismatch, AmbientNotZHS, DimensionMismatch)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3
EXIT_SYMMETRY = 4


@dataclass
class RunConfig:
    command: str
    model: str | None = None         # path; None means the bundled figure-eight
    step: float = 0.01
    tol: float = 1e-10
    out: str = "."
    seed: tuple | None = None        # (theta, phi) gauge seed
    check: str = "all"

    def validated(self) -> "RunConfig":
        if not (1e-5 <= self.step <= 0.1):
            raise ValueError(f"step {self.step} outside [1e-5, 0.1]")
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")
        if self.check not in ("iota", "autN", "all"):
            raise ValueError(f"unknown check set {self.check!r}")
        return self


def _model_source(cfg: RunConfig) -> str:
    if cfg.model is None:
        return (resources.files("su2torsion") / "models" / "figure8.cwp").read_text()
    return Path(cfg.model).read_text()


def config_hash(cfg: RunConfig, model_source: str) -> str:
    blob = dict(asdict(cfg), out=None,
                model=hashlib.sha256(model_source.encode()).hexdigest())
    text = json.dumps(blob, sort_keys=True)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _json_clean(obj):
    if isinstance(obj, dict):
        return {k: _json_clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_json_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and obj != obj:
        return None
    return obj


def _write_json(path: Path, payload: dict):
    path.write_text(json.dumps(_json_clean(payload), sort_keys=True, indent=2)
                    + "\n")


def _thread_count() -> int:
    try:
        return max(1, int(os.environ.get("TORSION_THREADS", "1")))
    except ValueError:
        return 1


# ---- pipeline pieces ----------------------------------------------------------


def _trace(cfg: RunConfig, model):
    pres = model.presentation
    if cfg.seed is not None:
        theta, phi = cfg.seed
        start = solve_near(pres, np.array([theta, theta, phi]), tol=cfg.tol)
    else:
        start = find_irreducible_point(pres)
    return continue_circle(pres, start, step=cfg.step, tol=cfg.tol)


def _circle_payload(cfg_hash: str, circle, met) -> dict:
    samples = [{"s": p.s, "params": p.params, "fingerprint": p.fingerprint,
                "h_dims": list(p.h_dims), "residual": p.residual}
               for p in met.samples]
    return {"config": cfg_hash, "step": met.step, "closed": met.closed,
            "closure_gap": circle.closure_gap, "orientation": met.orientation,
            "total_volume": met.total_volume, "n_samples": len(met.samples),
            "flagged": len(circle.flagged), "samples": samples}


def _torsion_function(model, met) -> symm.TorsionFunction:
    workers = _thread_count()
    pts = met.samples
    if workers == 1:
        polys = [normalized_torsion(model, p.images).poly for p in pts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            polys = list(pool.map(
                lambda p: normalized_torsion(model, p.images).poly, pts))
    samples = [(float(p.s), poly) for p, poly in zip(pts, polys)]
    return symm.TorsionFunction(component="C0", period=float(met.total_volume),
                                closed=met.closed, samples=samples)


def _torsion_payload(cfg_hash: str, F: symm.TorsionFunction) -> dict:
    rows = [{"s": s, "coefficients": {str(k): poly.coeff(k).real
                                      for k in range(poly.lo, poly.hi + 1)}}
            for s, poly in F.samples]
    return {"config": cfg_hash, "component": F.component, "period": F.period,
            "closed": F.closed, "samples": rows}


def _write_f_csv(path: Path, F: symm.TorsionFunction):
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["s", "f"])
        for s, f in zip(F.s_values, F.f_values()):
            writer.writerow([repr(float(s)), repr(float(f))])


# ---- subcommands --------------------------------------------------------------


def cmd_validate(cfg: RunConfig) -> int:
    source = _model_source(cfg)
    try:
        model = loads_model(source, validate=True)
    except INPUT_ERRORS as e:
        print(f"FAIL {type(e).__name__}: {e}")
        return EXIT_INPUT
    print(f"PASS model {model.name}: boundary, homology and inclusion checks ok")
    return EXIT_OK


def cmd_trace(cfg: RunConfig) -> int:
    source = _model_source(cfg)
    model = loads_model(source, validate=True)
    circle = _trace(cfg, model)
    met = metrize(model, circle)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    h = config_hash(cfg, source)
    _write_json(out / "circle.json", _circle_payload(h, circle, met))
    print(f"traced {len(met.samples)} samples, closure gap "
          f"{circle.closure_gap:.2e}, total volume {met.total_volume:.6f}")
    return EXIT_OK


def cmd_torsion(cfg: RunConfig) -> int:
    source = _model_source(cfg)
    model = loads_model(source, validate=True)
    circle = _trace(cfg, model)
    met = metrize(model, circle)
    F = _torsion_function(model, met)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    h = config_hash(cfg, source)
    _write_json(out / "circle.json", _circle_payload(h, circle, met))
    _write_json(out / "torsion-samples.json", _torsion_payload(h, F))
    _write_f_csv(out / "f_of_s.csv", F)
    fr = F.f_values()
    print(f"torsion sampled at {len(F.samples)} points; "
          f"f(s) in [{fr.min():.6f}, {fr.max():.6f}]")
    return EXIT_OK


def cmd_symmetry(cfg: RunConfig) -> int:
    source = _model_source(cfg)
    model = loads_model(source, validate=True)
    pres, amap = model.presentation, model.amap
    circle = _trace(cfg, model)
    # the translation-matching checks need the sharper arc-length quadrature
    met = metrize(model, circle, rule="spline")
    F = _torsion_function(model, met)
    probes = met.samples[:: max(1, len(met.samples) // 20)]

    checks = []

    def record(transform, report=None, **extra):
        row = {"transform": transform}
        if report is not None:
            row.update({"s0": report.s0, "residual": report.residual,
                        "pass": report.passed})
            if report.matchings is not None:
                row["matchings"] = report.matchings
        row.update(extra)
        checks.append(row)

    locus = None
    if cfg.check in ("iota", "all"):
        rep = symm.check_symmetry(F, "iota")
        record("iota", rep)
        dev = symm.iota_isometry_deviation(model, amap, probes)
        record("iota-isometry", residual=dev, **{"pass": dev <= 1e-6})
        locus = symm.metabelian_locus(model, met)
        seps = [p.s for p in locus.points]
        record("metabelian-locus", count=len(locus.points), s=seps,
               full_fixed_set=locus.full_fixed_set,
               **{"pass": len(locus.points) in (1, 2)})

    if cfg.check in ("autN", "all"):
        for phi in (symm.FIGURE8_PHI1, symm.FIGURE8_PHI2):
            symm.verify_automorphism(phi, pres, amap, rep_points=probes)
            d = symm.delta_sign(phi, pres, probes)
            rep = symm.check_symmetry(F, phi, delta_d=d)
            ratios = [symm.pullback_ratio(model, phi, p) for p in probes]
            ratio_dev = max(abs(r - d) for r in ratios)
            record(phi.name, rep, delta_d=d, pullback_ratio_deviation=ratio_dev)
        rels = {"phi1^4": [symm.FIGURE8_PHI1] * 4,
                "phi2^2": [symm.FIGURE8_PHI2] * 2,
                "(phi1 phi2)^2": [symm.FIGURE8_PHI1, symm.FIGURE8_PHI2] * 2}
        devs = symm.out_relations_deviation(pres, rels, probes)
        record("out-relations", deviations=devs,
               **{"pass": max(devs.values()) <= 1e-6})

    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    h = config_hash(cfg, source)
    _write_json(out / "circle.json", _circle_payload(h, circle, met))
    _write_json(out / "torsion-samples.json", _torsion_payload(h, F))
    _write_f_csv(out / "f_of_s.csv", F)
    _write_json(out / "symmetry-report.json", {"config": h, "checks": checks})

    from . import figures
    zeros = [p.s for p in locus.points] if locus is not None else ()
    figures.render_f_of_s(F.s_values, F.f_values(), out / "f_of_s.png",
                          period=F.period, zeros=zeros)
    marked = [p.fingerprint for p in locus.points] if locus is not None else ()
    figures.render_circle([p.fingerprint for p in met.samples],
                          out / "circle.png", marked=marked)

    failed = [c["transform"] for c in checks if not c.get("pass", True)]
    for c in checks:
        status = "pass" if c.get("pass", True) else "FAIL"
        resid = c.get("residual")
        tail = f" residual {resid:.2e}" if resid is not None else ""
        print(f"{status} {c['transform']}{tail}")
    if failed:
        print(f"symmetry checks failed: {', '.join(failed)}")
        return EXIT_SYMMETRY
    return EXIT_OK


# ---- argument parsing ----------------------------------------------------------


def _seed(text: str) -> tuple:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("seed must be theta,phi")
    return (float(parts[0]), float(parts[1]))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="su2torsion",
        description="SU(2) representation circles and Reidemeister torsion "
                    "symmetry checks")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", default=None,
                        help="model file (default: bundled figure-eight)")
    common.add_argument("--step", type=float, default=0.01,
                        help="continuation step (default 0.01)")
    common.add_argument("--tol", type=float, default=1e-10,
                        help="corrector tolerance (default 1e-10)")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--seed", type=_seed, default=None, metavar="THETA,PHI",
                        help="gauge seed; maps to parameters (theta, theta, phi)")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common],
                   help="check the model file invariants")
    sub.add_parser("trace", parents=[common],
                   help="trace the representation circle")
    sub.add_parser("torsion", parents=[common],
                   help="sample the normalized torsion along the circle")
    sp = sub.add_parser("symmetry", parents=[common],
                        help="run the symmetry checks and render the report")
    sp.add_argument("--check", choices=("iota", "autN", "all"), default="all")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(command=args.command, model=args.model, step=args.step,
                        tol=args.tol, out=args.out, seed=args.seed,
                        check=getattr(args, "check", "all")).validated()
    except ValueError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_INPUT

    handler = {"validate": cmd_validate, "trace": cmd_trace,
               "torsion": cmd_torsion, "symmetry": cmd_symmetry}[cfg.command]
    try:
        return handler(cfg)
    except INPUT_ERRORS as e:
        print(f"input error {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INPUT
    except FileNotFoundError as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except Su2TorsionError as e:
        print(f"numerical failure {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
