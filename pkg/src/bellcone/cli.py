"""Command-line front end.

Machine-readable results go to stdout; commentary and diagnostics go to
stderr.  Exit codes: 0 success (or affirmative verdict: inside the cone,
no signaling, positive partial transposes), 1 negative verdict (outside,
signaling detected, negative partial transpose), 2 usage or input error.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from . import detvectors, farkas, nullspace, polytope, quantum, scenario as scen
from .scenario import Scenario, ScenarioError


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _load_scenario(path: str) -> Scenario:
    return scen.parse_scenario(_read(path))


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _parse_shard(text: str | None) -> tuple[int, int] | None:
    if text is None:
        return None
    try:
        i, n = text.split("/")
        return int(i), int(n)
    except ValueError as exc:
        raise ScenarioError(f"shard must look like i/n: {exc}") from exc


# -- subcommands -----------------------------------------------------------------


def cmd_scenario_info(args) -> int:
    s = _load_scenario(args.scenario)
    c = scen.counts(s)
    print(
        f"N_K={c.n_k} N_lambda={c.n_lambda} N_T={c.n_t} N_Z={c.n_z} N_D={c.n_d}"
    )
    print(f"digest={s.digest()}")
    return 0


def cmd_det_enum(args) -> int:
    s = _load_scenario(args.scenario)
    for idx, assignment in enumerate(s.enumerate_assignments()):
        ones = detvectors.det_ones(s, assignment)
        print(str(idx) + " " + " ".join(str(k) for k in ones))
    return 0


def cmd_nosignal(args) -> int:
    s = _load_scenario(args.scenario)
    p = polytope.parse_pvec(s, _read(args.pvec), tolerance=args.tolerance)
    threshold = Fraction(args.tolerance) * s.n_k
    residuals = nullspace.no_signaling_defect(s, p.components)
    bad = [(z, r) for z, r in residuals if abs(r) > threshold]
    if not bad:
        print("no-signaling within tolerance", file=sys.stderr)
        return 0
    # A nonzero residual says: the joint marginal of the frozen cells
    # depends on which setting the varying observer chose.
    for z, r in bad:
        others = [o for o in range(s.n_observers) if o != z.observer]
        fixed = ",".join(
            f"{o}:{setting}.{outcome}"
            for o, (setting, outcome) in zip(others, z.context)
        )
        print(
            f"mismatch varying_observer={z.observer} "
            f"settings={z.minus_setting}->{z.plus_setting} "
            f"fixed={fixed} difference={r}"
        )
    return 1


def cmd_farkas_ch_enum(args) -> int:
    s = _load_scenario(args.scenario)
    for fv in farkas.enumerate_ch(s, dedupe=args.dedupe, limit=args.limit):
        sys.stdout.write(farkas.format_farkas(s, fv))
    return 0


def cmd_farkas_validate(args) -> int:
    s = _load_scenario(args.scenario)
    fv, header_m, header_n = farkas.parse_farkas(s, _read(args.inequality))
    print(f"m={fv.lower} n={fv.upper} farkas={'yes' if fv.is_farkas else 'no'}")
    if (fv.lower, fv.upper) != (header_m, header_n):
        print(
            f"header claims m={header_m} n={header_n}, recomputed m={fv.lower} n={fv.upper}",
            file=sys.stderr,
        )
        return 1
    return 0 if fv.is_farkas else 1


def cmd_facets(args) -> int:
    s = _load_scenario(args.scenario)
    family = polytope.enumerate_facets(
        s, budget=args.budget, shard=_parse_shard(args.shard)
    )
    chosen = family.classes if args.all else family.nontrivial
    for cls in chosen:
        sys.stdout.write(farkas.format_farkas(s, cls.vector))
    print(
        f"subsets={family.n_subsets} faces={family.n_faces} "
        f"interior={family.n_interior} degenerate={family.n_degenerate} "
        f"classes={len(family.classes)} nontrivial={len(family.nontrivial)}",
        file=sys.stderr,
    )
    return 0


def cmd_check(args) -> int:
    s = _load_scenario(args.scenario)
    p = polytope.parse_pvec(
        s, _read(args.pvec), tolerance=args.tolerance, strict=args.strict
    )
    result = polytope.decide_membership(s, p)
    for note in result.notes:
        print(f"note: {note}", file=sys.stderr)
    if isinstance(result, polytope.Inside):
        print("INSIDE")
        body = "\n".join(
            f"w {lam} {w}" for lam, w in enumerate(result.weights) if w
        )
        _emit(body + "\n", args.output)
        return 0
    print(f"OUTSIDE violation={result.violation}")
    _emit(farkas.format_farkas(s, result.certificate), args.output)
    return 1


def cmd_quantum_eval(args) -> int:
    s = _load_scenario(args.scenario)
    state = quantum.parse_state(_read(args.state))
    model = quantum.parse_model(_read(args.model))
    probs = quantum.born_probabilities(state, model, s)
    _emit(polytope.format_pvec(s, probs), args.output)
    return 0


def cmd_quantum_ppt(args) -> int:
    state = quantum.parse_state(_read(args.state))
    report = quantum.ppt_test(state)
    for subset, low in report.min_eigenvalues:
        print("subset=" + ",".join(str(i) for i in subset) + f" min_eig={low!r}")
    print(f"verdict={report.verdict}")
    return 1 if report.npt else 0


def cmd_quantum_ghz_demo(args) -> int:
    report = quantum.ghz_postselect()
    print(f"success_probability={report.success_probability!r}")
    print(f"fidelity={report.fidelity!r}")
    print(f"wrong_basis_purity={report.wrong_basis_purity!r}")
    print(f"ch_value={report.ch_value!r}")
    return 0


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bellcone",
        description="Local hidden-variable cones and the inequalities bounding them",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_scen = sub.add_parser("scenario", help="scenario inspection")
    scen_sub = p_scen.add_subparsers(dest="subcommand", required=True)
    p_info = scen_sub.add_parser("info", help="print structural counts")
    p_info.add_argument("scenario")
    p_info.set_defaults(func=cmd_scenario_info)

    p_det = sub.add_parser("det", help="deterministic vectors")
    det_sub = p_det.add_subparsers(dest="subcommand", required=True)
    p_enum = det_sub.add_parser("enum", help="one line per assignment: index then cells")
    p_enum.add_argument("scenario")
    p_enum.set_defaults(func=cmd_det_enum)

    p_ns = sub.add_parser("nosignal", help="check marginals for signaling")
    p_ns.add_argument("scenario")
    p_ns.add_argument("pvec")
    p_ns.add_argument("--tolerance", type=float, default=1e-9)
    p_ns.set_defaults(func=cmd_nosignal)

    p_fk = sub.add_parser("farkas", help="inequality vectors")
    fk_sub = p_fk.add_subparsers(dest="subcommand", required=True)
    p_ch = fk_sub.add_parser("ch-enum", help="stream the generated family")
    p_ch.add_argument("scenario")
    p_ch.add_argument("--dedupe", action="store_true")
    p_ch.add_argument("--limit", type=int, default=None)
    p_ch.set_defaults(func=cmd_farkas_ch_enum)
    p_val = fk_sub.add_parser("validate", help="recompute bounds of an inequality file")
    p_val.add_argument("scenario")
    p_val.add_argument("inequality")
    p_val.set_defaults(func=cmd_farkas_validate)

    p_fac = sub.add_parser("facets", help="exhaustive face enumeration")
    p_fac.add_argument("scenario")
    p_fac.add_argument("--budget", type=int, default=2_000_000)
    p_fac.add_argument("--shard", default=None, help="i/n")
    p_fac.add_argument("--all", action="store_true", help="include trivial classes")
    p_fac.set_defaults(func=cmd_facets)

    p_chk = sub.add_parser("check", help="membership of a probability vector")
    p_chk.add_argument("scenario")
    p_chk.add_argument("pvec")
    p_chk.add_argument("--tolerance", type=float, default=1e-9)
    p_chk.add_argument("--strict", action="store_true")
    p_chk.add_argument("-o", "--output", default=None)
    p_chk.set_defaults(func=cmd_check)

    p_q = sub.add_parser("quantum", help="quantum evaluation")
    q_sub = p_q.add_subparsers(dest="subcommand", required=True)
    p_ev = q_sub.add_parser("eval", help="emit the coincidence probabilities")
    p_ev.add_argument("scenario")
    p_ev.add_argument("state")
    p_ev.add_argument("model")
    p_ev.add_argument("-o", "--output", default=None)
    p_ev.set_defaults(func=cmd_quantum_eval)
    p_ppt = q_sub.add_parser("ppt", help="partial-transpose eigenvalue test")
    p_ppt.add_argument("state")
    p_ppt.set_defaults(func=cmd_quantum_ppt)
    p_ghz = q_sub.add_parser("ghz-demo", help="three-party post-selection example")
    p_ghz.set_defaults(func=cmd_quantum_ghz_demo)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
