"""Command-line entry point.

    ksverify peres rays|bases|graph [--format json|dot|text]
    ksverify ks prove [--rays-file F] [--bases-file F]
    ksverify stairs verify [--k K]
    ksverify prep demo --circuit a|b|c --alpha Z --beta Z [--apparatus S]
    ksverify tomo roundtrip [--dim 2|3] [--trials N] [--seed N]

Exit codes: 0 success, 1 usage or I/O error, 2 the computed physics
contradicts the expected result.  Set KSVERIFY_LOG to a logging level name
for diagnostics on stderr.
"""
from __future__ import annotations

import argparse
import logging
import os
import re
import sys
from typing import Optional, Sequence

import numpy as np

from ksverify import peres_ks, qsim, stairs
from ksverify.exact_algebra import format_quadrat
from ksverify.serialize import complex_array, dumps

log = logging.getLogger("ksverify")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PHYSICS = 2

NORM_TOL = 1e-9


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


_NUM = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX = re.compile(rf"^([+-]?{_NUM})(?:([+-])({_NUM})?\*?[ij])?$")


def parse_complex(text: str) -> complex:
    """Parse ``re`` or ``re+imi`` (``j`` also accepted), e.g. ``0.6``, ``0.6-0.8i``."""
    m = _COMPLEX.match(text.strip().replace(" ", ""))
    if m is None:
        raise UsageError(f"not a complex number of the form re[+im i]: {text!r}")
    re_part = float(m.group(1))
    im_part = 0.0
    if m.group(2):
        im_part = float(m.group(3) or 1.0) * (-1 if m.group(2) == "-" else 1)
    return complex(re_part, im_part)


def _qubit(amps: Sequence[complex], what: str) -> qsim.PureState:
    v = np.asarray(amps, dtype=complex)
    norm2 = float(np.vdot(v, v).real)
    if norm2 == 0:
        raise UsageError(f"{what} amplitudes are both zero")
    if abs(norm2 - 1) > NORM_TOL:
        log.warning("%s has squared norm %.17g; normalizing", what, norm2)
    return qsim.PureState.normalized(v)


def parse_apparatus(text: str) -> qsim.PureState:
    """``0``, ``1`` or a comma-separated amplitude pair ``g,d``."""
    t = text.strip()
    if t in ("0", "1"):
        return qsim.PureState.basis(2, int(t))
    parts = t.split(",")
    if len(parts) != 2:
        raise UsageError(f"apparatus must be 0, 1 or 'g,d', got {text!r}")
    return _qubit([parse_complex(p) for p in parts], "apparatus")


# -- commands -------------------------------------------------------------------


def _ray_strings(rays: peres_ks.RaySet) -> list[list[str]]:
    return [[format_quadrat(c) for c in r] for r in rays.rays]


def cmd_peres(args) -> tuple[int, str]:
    s33 = peres_ks.peres_33()
    if args.action == "rays":
        if args.format == "text":
            return EXIT_OK, peres_ks.format_rays(s33)
        if args.format == "dot":
            raise UsageError("peres rays supports --format json or text")
        return EXIT_OK, dumps({"count": len(s33), "rays": _ray_strings(s33)}) + "\n"
    rays, bases = peres_ks.complete_bases(s33)
    if args.action == "bases":
        if args.format == "text":
            return EXIT_OK, peres_ks.format_rays(rays)
        if args.format == "dot":
            raise UsageError("peres bases supports --format json or text")
        doc = {
            "rays": len(rays),
            "bases": len(bases),
            "ray_list": _ray_strings(rays),
            "basis_list": [list(b.members) for b in bases],
        }
        return EXIT_OK, dumps(doc) + "\n"
    edges = peres_ks.orthogonality_graph(rays)
    if args.format == "dot":
        return EXIT_OK, peres_ks.to_dot(rays, edges)
    if args.format == "text":
        raise UsageError("peres graph supports --format json or dot")
    doc = {"nodes": len(rays), "edge_count": len(edges), "edges": [list(e) for e in edges]}
    return EXIT_OK, dumps(doc) + "\n"


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def cmd_ks(args) -> tuple[int, str]:
    if args.rays_file:
        rays = peres_ks.parse_rays(_read(args.rays_file))
    else:
        rays = None
    if args.bases_file:
        bases = peres_ks.parse_bases(_read(args.bases_file))
        if rays is not None:
            ray_count = len(rays)
        else:
            ray_count = max((max(b.members) for b in bases), default=-1) + 1
        try:
            problem = peres_ks.ColoringProblem(ray_count, tuple(bases))
        except ValueError as e:
            raise UsageError(str(e)) from None
    else:
        if rays is None:
            rays = peres_ks.peres_33()
        full, bases = peres_ks.complete_bases(rays)
        problem = peres_ks.ColoringProblem(len(full), tuple(bases))
    cert = peres_ks.solve_coloring(problem)
    doc = cert.to_dict()
    doc["rays"] = problem.ray_count
    doc["bases"] = len(problem.bases)
    code = EXIT_OK if not cert.satisfiable else EXIT_PHYSICS
    return code, dumps(doc) + "\n"


def cmd_stairs(args) -> tuple[int, str]:
    n_bases = len(stairs.peres_structure()[1])
    if args.k is not None and not 1 <= args.k <= n_bases:
        raise UsageError(f"--k must be in 1..{n_bases}, got {args.k}")
    ks = None if args.k is None else [args.k]
    report = stairs.verify_certainties(ks)
    code = EXIT_OK if report.all_certain else EXIT_PHYSICS
    return code, dumps(report.to_dict()) + "\n"


def _density_json(rho: qsim.DensityOperator) -> list:
    return complex_array(rho.matrix)


def cmd_prep(args) -> tuple[int, str]:
    system = _qubit([parse_complex(args.alpha), parse_complex(args.beta)], "system")
    apparatus = parse_apparatus(args.apparatus) if args.apparatus is not None else None
    run = qsim.run_fig1(args.circuit, system, apparatus)
    if apparatus is None:
        apparatus = qsim.PureState.basis(2, qsim.FIG1_DEFAULT_APPARATUS[args.circuit])
    device = qsim.fig1_instrument(args.circuit, apparatus).coarse_grained()
    prep = qsim.classify_preparation(device, "all")
    doc = {
        "circuit": args.circuit,
        "system_in": complex_array(system.amplitudes),
        "apparatus_in": complex_array(apparatus.amplitudes),
        "system_out": _density_json(run.system_out),
        "apparatus_out": _density_json(run.apparatus_out),
        "outcomes": {str(a): p for a, p in run.outcome_distribution.items()},
        "preparation": {
            "kind": prep.kind.value,
            "state": _density_json(prep.state) if prep.state is not None else None,
        },
    }
    return EXIT_OK, dumps(doc) + "\n"


def tomo_roundtrip(dim: int, trials: int, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    mubs = qsim.mub_set(dim)
    worst = 0.0
    for _ in range(trials):
        rho = qsim.random_density(dim, rng)
        rec = qsim.probs_to_state(qsim.state_to_probs(rho, mubs), mubs)
        worst = max(worst, qsim.trace_distance(rho, rec.matrix))
    return {
        "dim": dim,
        "trials": trials,
        "seed": seed,
        "max_trace_distance": worst,
        "max_bias_error": mubs.max_bias_error(),
        "passed": worst < qsim.SPEC_TOL,
    }


def cmd_tomo(args) -> tuple[int, str]:
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    doc = tomo_roundtrip(args.dim, args.trials, args.seed)
    return (EXIT_OK if doc["passed"] else EXIT_PHYSICS), dumps(doc) + "\n"


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--output", "-o", metavar="PATH", help="write to PATH instead of stdout")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized commands (default 0)")

    parser = _Parser(prog="ksverify", description="Kochen-Specker and quantum-operation verifier")
    groups = parser.add_subparsers(dest="command", required=True)

    peres = groups.add_parser("peres", help="Peres ray set and bases", parents=[common])
    peres.add_argument("action", choices=["rays", "bases", "graph"])
    peres.add_argument("--format", choices=["json", "dot", "text"], default="json")
    peres.set_defaults(func=cmd_peres)

    ks = groups.add_parser("ks", help="KS noncolorability proof", parents=[common])
    ks.add_argument("action", choices=["prove"])
    ks.add_argument("--rays-file", help="ray file: three a+b√2 numbers per line")
    ks.add_argument("--bases-file", help="basis file: three ray ids per line")
    ks.set_defaults(func=cmd_ks)

    st = groups.add_parser("stairs", help="steering certainty checks", parents=[common])
    st.add_argument("action", choices=["verify"])
    st.add_argument("--k", type=int, help="single basis index (1-based)")
    st.set_defaults(func=cmd_stairs)

    prep = groups.add_parser("prep", help="Fig. 1 preparation circuits", parents=[common])
    prep.add_argument("action", choices=["demo"])
    prep.add_argument("--circuit", choices=["a", "b", "c"], required=True)
    prep.add_argument("--alpha", default="1", help="system amplitude of |0>, re[+im i]")
    prep.add_argument("--beta", default="0", help="system amplitude of |1>, re[+im i]")
    prep.add_argument("--apparatus", help="apparatus state: 0, 1 or 'g,d' (default per circuit)")
    prep.set_defaults(func=cmd_prep)

    tomo = groups.add_parser("tomo", help="MUB state reconstruction", parents=[common])
    tomo.add_argument("action", choices=["roundtrip"])
    tomo.add_argument("--dim", type=int, choices=[2, 3], default=3)
    tomo.add_argument("--trials", type=int, default=100)
    tomo.set_defaults(func=cmd_tomo)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    level = os.environ.get("KSVERIFY_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        code, text = args.func(args)
    except (UsageError, peres_ks.RayFileError, qsim.QuantumError) as e:
        print(f"ksverify: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"ksverify: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.output:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as e:
        print(f"ksverify: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    return code


if __name__ == "__main__":
    sys.exit(main())
