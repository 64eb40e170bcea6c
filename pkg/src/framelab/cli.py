"""Batch experiment runner.

Subcommands: classify, convert, gallery, exponentials, kaczmarz.
JSON for structured reports, CSV for per-level tables; matplotlib figures
are rendered next to the CSV unless --no-figures is given.  Exit codes:
0 ok, 2 config error, 3 numeric failure (stderr carries the failing
check's name).  With a fixed --seed, the CSV and JSON outputs are
byte-reproducible.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

import numpy as np

from . import __version__, figures, gallery
from .classify import class_flags
from .errors import (BadWeight, ConfigError, DimensionMismatch, FramelabError,
                     HypothesisNotAsserted, NotOrthonormal, UnsupportedRealization)
from .frame_core import analysis_matrix, build_converter
from .kaczmarz import auxiliary_sequence, mu_norm, parseval_defect, window_gram
from .measures import MeasureModel, gram_exponentials, singular_divergence_probe
from .numerics import SpectralTolerance, range_basis
from .sequences import SequenceSpec, gen_zero_sum_subspace_basis, generate

_CONFIG_ERRORS = (ConfigError, BadWeight, DimensionMismatch, NotOrthonormal,
                  UnsupportedRealization, HypothesisNotAsserted)


def parse_ladder(text: str):
    """Ladder grammar: d=16..512:x2 (geometric) or d=16..512:+16 (arithmetic)."""
    if not text or not text.startswith("d="):
        raise ConfigError(f"bad ladder {text!r}; expected d=A..B:xK or d=A..B:+K")
    try:
        span, step = text[2:].split(":")
        lo, hi = (int(v) for v in span.split(".."))
    except ValueError:
        raise ConfigError(f"bad ladder {text!r}; expected d=A..B:xK or d=A..B:+K") from None
    if lo < 2 or hi < lo:
        raise ConfigError(f"bad ladder range {lo}..{hi}")
    dims = []
    if step.startswith("x"):
        factor = int(step[1:])
        if factor < 2:
            raise ConfigError("geometric ladder factor must be >= 2")
        d = lo
        while d <= hi:
            dims.append(d)
            d *= factor
    elif step.startswith("+"):
        inc = int(step[1:])
        if inc < 1:
            raise ConfigError("arithmetic ladder step must be >= 1")
        dims = list(range(lo, hi + 1, inc))
    else:
        raise ConfigError(f"bad ladder step {step!r}")
    if not dims:
        raise ConfigError("ladder is empty")
    return dims


def load_sequence_spec(ref: str) -> SequenceSpec:
    if ref.startswith("gallery:"):
        return gallery.sequence_spec(ref.split(":", 1)[1])
    if os.path.exists(ref):
        with open(ref, encoding="utf-8") as fh:
            return SequenceSpec.from_json(json.load(fh))
    raise ConfigError(f"spec {ref!r} is neither gallery:NAME nor an existing file")


def load_measure(ref: str) -> MeasureModel:
    if ref.startswith("gallery:"):
        return gallery.measure_model(ref.split(":", 1)[1])
    if os.path.exists(ref):
        with open(ref, encoding="utf-8") as fh:
            return MeasureModel.from_json(json.load(fh))
    raise ConfigError(f"measure {ref!r} is neither gallery:NAME nor an existing file")


def _config_hash(config: dict) -> str:
    return hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest()[:16]


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, float):
                cells.append(repr(cell))
            else:
                cells.append(str(cell))
        lines.append(",".join(cells))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _report_meta(args, config: dict) -> dict:
    return {
        "tool_version": __version__,
        "config": config,
        "config_hash": _config_hash(config),
        "tolerances": {"rank_tol": args.tol_rank, "tau": args.tau, "k_max": args.kmax},
        "seed": args.seed,
    }


def _matrix_json(m: np.ndarray):
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_classify(args) -> int:
    spec = load_sequence_spec(args.spec)
    dims = parse_ladder(args.ladder)
    tol = SpectralTolerance(rank_tol=args.tol_rank)
    report = class_flags(spec, dims, tau=args.tau, k_max=args.kmax, tol=tol,
                         norm_hypothesis=args.assert_hypothesis)
    config = {"command": "classify", "spec": spec.to_json(), "ladder": args.ladder,
              "tau": args.tau, "kmax": args.kmax, "tol_rank": args.tol_rank,
              "seed": args.seed}
    doc = report.to_json()
    doc.update(_report_meta(args, config))
    os.makedirs(args.out, exist_ok=True)
    _write_json(os.path.join(args.out, "report.json"), doc)
    csv_path = os.path.join(args.out, "sigma_profile.csv")
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write(report.profile.to_csv_text())
    if args.figures:
        figures.save_sigma_profile(report.profile.rows(),
                                   os.path.join(args.out, "sigma_profile.png"))
    for flag, verdict in report.flags.items():
        print(f"{flag}: {verdict}")
    return 0


def _converter_witness(args, seq):
    name = args.witness
    if name == "full":
        return np.eye(seq.ambient_dim, dtype=np.complex128)
    if name == "zero-sum":
        return gen_zero_sum_subspace_basis(seq.ambient_dim)
    if name == "block-range":
        from .sequences import gen_parseval_blocks

        blocks = gen_parseval_blocks(args.d)
        if blocks.count != seq.ambient_dim:
            raise ConfigError(
                "block-range witness needs a sequence indexed like the block system "
                f"(ambient {blocks.count}), got ambient {seq.ambient_dim}")
        return range_basis(analysis_matrix(blocks))
    if name.startswith("top:"):
        k = int(name.split(":", 1)[1])
        u, _, _ = np.linalg.svd(seq.matrix, full_matrices=False)
        if not 1 <= k <= u.shape[1]:
            raise ConfigError(f"witness top:{k} out of range")
        return u[:, :k]
    raise ConfigError(f"unknown witness {name!r}")


def cmd_convert(args) -> int:
    spec = load_sequence_spec(args.spec)
    seq = generate(spec, args.d)
    tol = SpectralTolerance(rank_tol=args.tol_rank)
    witness = _converter_witness(args, seq)
    result = build_converter(seq, witness, tol,
                             complete_to_injective=args.complete_injective)
    config = {"command": "convert", "spec": spec.to_json(), "d": args.d,
              "witness": args.witness, "complete_injective": args.complete_injective,
              "tol_rank": args.tol_rank, "seed": args.seed}
    os.makedirs(args.out, exist_ok=True)
    _write_json(os.path.join(args.out, "converter.json"),
                {"operator": _matrix_json(result.operator)})
    doc = {
        "parseval_residual": result.parseval_residual,
        "surjective_flag": result.surjective_flag,
        "injective_flag": result.injective_flag,
        "rank": result.rank,
        "subspace_dim": result.subspace_dim,
        "restricted_lower_bound": result.restricted_lower_bound,
    }
    doc.update(_report_meta(args, config))
    _write_json(os.path.join(args.out, "converter_report.json"), doc)
    print(f"parseval_residual: {result.parseval_residual:.3e} "
          f"surjective: {result.surjective_flag} injective: {result.injective_flag}")
    return 0


def cmd_gallery(args) -> int:
    if args.action != "list":
        raise ConfigError(f"unknown gallery action {args.action!r}")
    for kind, name, desc in gallery.describe():
        print(f"{kind:9s} {name:26s} {desc}")
    return 0


def cmd_exponentials(args) -> int:
    model = load_measure(args.measure)
    max_size = args.window + 1 if args.one_sided else 2 * args.window + 1
    sizes = [s for s in (5, 9, 17, 33, 65, 129, 257, 513) if s <= max_size]
    if not sizes:
        raise ConfigError(f"--window {args.window} leaves no spectrum windows")
    rows = []
    for size in sizes:
        if args.one_sided:
            window = (0, size - 1)
        else:
            half = (size - 1) // 2
            window = (-half, half)
        w = np.linalg.eigvalsh(gram_exponentials(model, window))
        rows.append((size, float(w[0]), float(w[-1])))
    config = {"command": "exponentials", "measure": model.to_json(),
              "window": args.window, "one_sided": args.one_sided,
              "probe_nmax": args.probe_nmax, "seed": args.seed}
    os.makedirs(args.out, exist_ok=True)
    _write_csv(os.path.join(args.out, "gram_spectrum.csv"),
               ("window", "lambda_min", "lambda_max"), rows)
    if args.figures:
        figures.save_gram_spectrum(rows, os.path.join(args.out, "gram_spectrum.png"))

    wrote_probe = False
    if model.is_purely_singular() or args.probe:
        coeffs = np.zeros(1, dtype=np.complex128)
        coeffs[0] = 1.0  # f identically one
        table = singular_divergence_probe(model, coeffs, (0, 0), args.probe_nmax,
                                          allow_mixed=not model.is_purely_singular())
        probe_rows = [(int(m), float(t))
                      for m, t in zip(table.ms, table.partial_sums)]
        _write_csv(os.path.join(args.out, "divergence.csv"),
                   ("M", "partial_sum"), probe_rows)
        if args.figures:
            figures.save_divergence(probe_rows, os.path.join(args.out, "divergence.png"))
        wrote_probe = True
        print(f"divergence probe: {'divergent' if table.divergent else 'stabilized'}")
    _write_json(os.path.join(args.out, "exponentials_report.json"),
                {"spectrum": rows, "divergence_probe": wrote_probe,
                 **_report_meta(args, config)})
    print(f"gram windows: {sizes} lambda_min(last): {rows[-1][1]:.3e}")
    return 0


def cmd_kaczmarz(args) -> int:
    model = load_measure(args.measure)
    os.makedirs(args.out, exist_ok=True)
    dim = args.window + 1
    gram = window_gram(model, dim)
    rng = np.random.default_rng(args.seed)
    if args.target == "random":
        f = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    elif args.target.startswith("exp:"):
        k = int(args.target.split(":", 1)[1])
        if not 0 <= k <= args.window:
            raise ConfigError(f"target exponential {k} outside window [0, {args.window}]")
        f = np.zeros(dim, dtype=np.complex128)
        f[k] = 1.0
    else:
        raise ConfigError(f"unknown target {args.target!r}; use random or exp:K")

    aux = auxiliary_sequence(model, dim, gram=gram, verify=0)
    if args.checkpoints:
        checkpoints = [int(c) for c in args.checkpoints.split(",") if c]
    else:
        checkpoints = [n for n in (4, 8, 16, 32, 64, 128, 256, 512) if n <= args.window]
        checkpoints = checkpoints or [args.window]
    if any(c < 0 or c > args.window for c in checkpoints):
        raise ConfigError(f"checkpoints must lie in [0, {args.window}]")
    weights = aux.pair_coefficients(f)
    rows = []
    for n in checkpoints:
        approx = np.zeros_like(f)
        approx[:n + 1] = weights[:n + 1]
        residual = mu_norm(gram, f - approx)
        rows.append((n, float(residual), float(parseval_defect(aux, f, n))))
    if args.cycles > 1:
        # cyclic re-sweeps go beyond the single-pass construction; report the
        # per-cycle error of the plain iteration instead of the g-expansion
        from .kaczmarz import kaczmarz_run

        order = list(range(dim)) * args.cycles
        state = kaczmarz_run(model, f, order, gram)
        cyc = [(c, float(state.errors[(c + 1) * dim - 1]), float("nan"))
               for c in range(args.cycles)]
        _write_csv(os.path.join(args.out, "kaczmarz_cycles.csv"),
                   ("cycle", "residual", "parseval_defect"), cyc)
    config = {"command": "kaczmarz", "measure": model.to_json(),
              "window": args.window, "target": args.target,
              "checkpoints": args.checkpoints, "cycles": args.cycles,
              "seed": args.seed}
    _write_csv(os.path.join(args.out, "kaczmarz.csv"),
               ("N", "residual", "parseval_defect"), rows)
    if args.figures:
        figures.save_kaczmarz(rows, os.path.join(args.out, "kaczmarz.png"))
    _write_json(os.path.join(args.out, "kaczmarz_report.json"),
                {"rows": rows, **_report_meta(args, config)})
    print(f"residual at N={rows[-1][0]}: {rows[-1][1]:.3e}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    common.add_argument("--tol-rank", type=float, default=1e-10,
                        help="relative rank tolerance")
    common.add_argument("--tau", type=float, default=1e-3,
                        help="lower-bound threshold for ladder verdicts")
    common.add_argument("--kmax", type=int, default=32,
                        help="number of sigma_k values tracked")
    common.add_argument("--window", type=int, default=64,
                        help="frequency window extent for measure experiments")
    common.add_argument("--figures", dest="figures", action="store_true", default=True)
    common.add_argument("--no-figures", dest="figures", action="store_false",
                        help="skip PNG rendering next to the CSV output")

    p = argparse.ArgumentParser(prog="framelab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", parents=[common],
                       help="run the ladder classification of a sequence spec")
    c.add_argument("--spec", required=True, help="gallery:NAME or a spec JSON file")
    c.add_argument("--ladder", required=True, help="d=A..B:xK or d=A..B:+K")
    c.add_argument("--assert-hypothesis", default=None,
                   help="assert a hypothesis class to enable the norm criterion")
    c.set_defaults(fn=cmd_classify)

    v = sub.add_parser("convert", parents=[common],
                       help="build and verify the Parseval-converting operator")
    v.add_argument("--spec", required=True)
    v.add_argument("--d", type=int, required=True, help="truncation level")
    v.add_argument("--witness", default="full",
                   help="full | zero-sum | block-range | top:K")
    v.add_argument("--complete-injective", action="store_true",
                   help="extend the converter injectively on unseen directions")
    v.set_defaults(fn=cmd_convert)

    g = sub.add_parser("gallery", parents=[common], help="list named specs and measures")
    g.add_argument("action", nargs="?", default="list")
    g.set_defaults(fn=cmd_gallery)

    e = sub.add_parser("exponentials", parents=[common],
                       help="Gram spectra and the one-sided divergence probe")
    e.add_argument("--measure", required=True, help="gallery:NAME or a measure JSON file")
    e.add_argument("--one-sided", action="store_true",
                   help="use windows [0, W] instead of [-W, W]")
    e.add_argument("--probe", action="store_true",
                   help="force the divergence probe for mixed measures")
    e.add_argument("--probe-nmax", type=int, default=2187)
    e.set_defaults(fn=cmd_exponentials)

    k = sub.add_parser("kaczmarz", parents=[common],
                       help="auxiliary-sequence reconstruction trends")
    k.add_argument("--measure", required=True)
    k.add_argument("--target", default="random", help="random or exp:K")
    k.add_argument("--checkpoints", default="",
                   help="comma-separated N values (default: powers of two up to the window)")
    k.add_argument("--cycles", type=int, default=1,
                   help="cyclic re-sweeps (beyond the single-pass construction)")
    k.set_defaults(fn=cmd_kaczmarz)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on bad usage already
        return int(exc.code) if exc.code else 0
    try:
        return args.fn(args)
    except _CONFIG_ERRORS as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (FramelabError, ArithmeticError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
