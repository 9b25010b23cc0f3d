"""Command-line front end.

Five subcommands: ``analyze`` (regularity, spectrum, canonical
structure), ``simulate`` (standard trajectory CSV), ``simulate-frac``
(fractional trajectory CSV), ``causality`` (state/output verdicts with
witnesses) and ``verify`` (residual and cross-check gate). Reports are
canonical JSON and trajectories are CSV, both byte-deterministic for a
fixed seed.

Exit codes: 0 success, 1 parse/structural/domain errors, 2 inconsistent
initial state, 3 insufficient input horizon, 4 no solution of the
requested kind (singular pencil, repeated or unstable eigenvalues,
series divergence), 5 verification failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from . import causality as causality_mod
from . import oracle as oracle_mod
from . import solver as solver_mod
from . import sysio
from .errors import (
    ConvergenceError,
    DescsysError,
    DomainError,
    HorizonError,
    IllConditionedError,
    InconsistentICError,
    NotNilpotentError,
    RegularityError,
    SolvabilityError,
    StructuralError,
)
from .fracops import SeriesControl
from .pencil import (
    DEFAULT_TOL,
    finite_spectrum,
    is_regular,
    validate_weierstrass,
    weierstrass_decompose,
)

EXIT_OK = 0
EXIT_STRUCTURAL = 1
EXIT_INCONSISTENT = 2
EXIT_HORIZON = 3
EXIT_SOLVABILITY = 4
EXIT_VERIFY = 5


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # map argparse usage errors to exit code 1
        raise _UsageError(message)


def _add_common(sp, *, order: bool = False, ml: bool = False):
    sp.add_argument("--system", required=True, help="system definition JSON file")
    sp.add_argument("--tol", type=float, default=DEFAULT_TOL, help="decision tolerance")
    sp.add_argument("--seed", type=int, default=0, help="seed for randomized probes")
    sp.add_argument("--out", default=None, help="output file path")
    if order:
        sp.add_argument("--order", type=float, default=None, help="fractional order n")
    if ml:
        sp.add_argument("--ml-tol", type=float, default=1e-12, help="series tolerance")
        sp.add_argument(
            "--ml-max-terms", type=int, default=10000, help="series term budget"
        )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="descsys", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("analyze", help="regularity, spectrum, canonical structure")
    _add_common(sp)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("simulate", help="standard trajectory")
    _add_common(sp)
    sp.add_argument("--horizon", type=int, default=None, help="number of steps K")
    sp.add_argument(
        "--project",
        action="store_true",
        help="replace Y0 by its nearest consistent projection (reported; "
        "not part of the solution theory)",
    )
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("simulate-frac", help="fractional trajectory")
    _add_common(sp, order=True, ml=True)
    sp.add_argument("--horizon", type=int, default=None, help="number of steps K")
    sp.add_argument("--project", action="store_true", help="project Y0 first")
    sp.set_defaults(func=cmd_simulate_frac)

    sp = sub.add_parser("causality", help="state and output causality verdicts")
    _add_common(sp)
    sp.add_argument(
        "--max-B",
        action="store_true",
        help="construct the maximal causal input-shaping matrix",
    )
    sp.set_defaults(func=cmd_causality)

    sp = sub.add_parser("verify", help="residual and cross-check gate")
    _add_common(sp, order=True, ml=True)
    sp.add_argument("--horizon", type=int, default=None, help="number of steps K")
    sp.add_argument("--traj", default=None, help="verify this trajectory CSV instead")
    sp.set_defaults(func=cmd_verify)
    return parser


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
            if not text.endswith("\n"):
                fh.write("\n")
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _attach_form(loaded, tol: float, seed: int):
    system = loaded.system
    if loaded.wf_supplied:
        wf = validate_weierstrass(system.pencil, system.wf, tol)
        return replace(system, wf=wf)
    return system.with_weierstrass(tol, seed=seed)


def _spectrum_entries(spectrum):
    return [
        {"real": ev.real, "imag": ev.imag, "multiplicity": mult}
        for ev, mult in spectrum.eigenvalues
    ]


def cmd_analyze(args) -> int:
    loaded = sysio.load_system(args.system)
    pencil = loaded.system.pencil
    report = is_regular(pencil, tol=args.tol, seed=args.seed)
    if not report.regular:
        data = {
            "regular": False,
            "verdict": "singular pencil",
            "confirmed_singular": report.confirmed_singular,
            "probes": [
                {"s": {"real": s.real, "imag": s.imag}, "logabsdet": d, "log_threshold": t}
                for s, d, t in report.probes
            ],
            "seed": report.seed,
        }
        _emit(sysio.report_text(data), args.out)
        print("singular pencil", file=sys.stderr)
        return EXIT_SOLVABILITY
    spectrum = finite_spectrum(pencil, regularity_tol=args.tol, seed=args.seed)
    system = _attach_form(loaded, args.tol, args.seed)
    wf = system.wf
    data = {
        "regular": True,
        "witness_probe": {"real": report.witness.real, "imag": report.witness.imag},
        "finite_spectrum": _spectrum_entries(spectrum),
        "p": wf.p,
        "q": wf.q,
        "q_star": wf.q_star,
        "cond_P": wf.cond_P,
        "cond_Q": wf.cond_Q,
        "reconstruction_residual": wf.residual,
        "residual_bound": wf.residual_bound,
        "complex_eigenvalues": wf.complex_eigenvalues,
        "decomposition_source": "file" if loaded.wf_supplied else "computed",
        "seed": args.seed,
    }
    _emit(sysio.report_text(data), args.out)
    return EXIT_OK


def _run_data(loaded, args):
    if loaded.Y0 is None:
        raise StructuralError("field 'Y0': missing (required for this command)")
    if loaded.input is None:
        raise StructuralError("field 'inputs': missing (required for this command)")
    K = args.horizon if args.horizon is not None else loaded.horizon
    if K is None:
        raise StructuralError("no horizon: set field 'horizon' or pass --horizon")
    if K < 0:
        raise StructuralError("horizon must be nonnegative")
    return loaded.Y0, loaded.input, int(K)


def _simulate_common(args, order=None, ctrl=None) -> int:
    loaded = sysio.load_system(args.system)
    Y0, signal, K = _run_data(loaded, args)
    system = _attach_form(loaded, args.tol, args.seed)
    projection = None
    if args.project:
        Y0, moved = solver_mod.project_consistent(
            system, Y0, signal, order=order, ctrl=ctrl
        )
        projection = {"applied": True, "distance": moved}
    if order is None:
        traj = solver_mod.solve_standard(system, Y0, signal, K)
    else:
        traj = solver_mod.solve_fractional(system, Y0, signal, order, K, ctrl)
    residual = traj.meta["residual"]
    report = {
        "kind": traj.kind,
        "horizon": K,
        "consistency": traj.meta["consistency"],
        "residual": residual,
        "seed": args.seed,
    }
    if projection:
        report["projection"] = projection
    if order is not None:
        report["order"] = order
        report["ml_terms_total"] = traj.meta["ml_terms_total"]
        report["ml_terms_max"] = traj.meta["ml_terms_max"]
        report["solvability"] = traj.meta["solvability"]
    csv_text = sysio.trajectory_csv_text(traj)
    if args.out:
        _emit(csv_text, args.out)
        sys.stdout.write(sysio.report_text(report) + "\n")
    else:
        sys.stdout.write(csv_text)
    if not residual.passed:
        print(
            f"residual gate failed: {residual.max_residual:.3e} > "
            f"{residual.bound_used:.3e}",
            file=sys.stderr,
        )
        return EXIT_VERIFY
    return EXIT_OK


def cmd_simulate(args) -> int:
    return _simulate_common(args)


def cmd_simulate_frac(args) -> int:
    loaded_order = args.order
    if loaded_order is None:
        loaded_order = sysio.load_system(args.system).order
    if loaded_order is None:
        raise StructuralError("no fractional order: set field 'n' or pass --order")
    if not 0.0 < loaded_order < 1.0:
        raise StructuralError(
            f"fractional order must lie strictly in (0, 1), got {loaded_order}"
        )
    ctrl = SeriesControl(tol=args.ml_tol, max_terms=args.ml_max_terms)
    return _simulate_common(args, order=loaded_order, ctrl=ctrl)


def cmd_causality(args) -> int:
    loaded = sysio.load_system(args.system)
    system = _attach_form(loaded, args.tol, args.seed)
    wf = system.wf
    if args.max_B:
        B = causality_mod.maximal_causal_B(wf, args.tol)
        source = "maximal"
    elif system.B is not None:
        B = np.asarray(system.B)
        source = "file"
    else:
        raise StructuralError("no input shaping: set field 'B' or pass --max-B")
    report = causality_mod.causality_report(wf, B, system.C, args.tol)
    data = {
        "state_causal": report.state_causal,
        "output_causal": report.output_causal,
        "witness_state": report.witness_state,
        "witness_state_norm": report.witness_state_norm,
        "witness_output": report.witness_output,
        "output_violation_norm": report.output_violation_norm,
        "fractional_note": report.fractional_note,
        "tol": report.tol,
        "B_source": source,
        "B": B,
        "r_1": int(B.shape[1]),
        "q_star": wf.q_star,
    }
    _emit(sysio.report_text(data), args.out)
    return EXIT_OK


def _relative_gap(A: np.ndarray, B: np.ndarray) -> float:
    scale = 1.0 + float(np.max(np.abs(A), initial=0.0))
    return float(np.max(np.abs(A - B), initial=0.0)) / scale


def cmd_verify(args) -> int:
    loaded = sysio.load_system(args.system)
    order = args.order if args.order is not None else loaded.order
    system = _attach_form(loaded, args.tol, args.seed)
    wf = system.wf
    checks: list[tuple[str, bool, str]] = []

    if args.traj is not None:
        traj = sysio.read_trajectory_csv(args.traj)
        if loaded.input is None:
            raise StructuralError("field 'inputs': missing (needed to verify)")
        signal = solver_mod.InputSignal(
            solver_mod.effective_inputs(system, loaded.input)
        )
        if order is None:
            rep = oracle_mod.residual_standard(system.pencil, traj, signal)
            name = "standard residual"
        else:
            rep = oracle_mod.residual_fractional(system.pencil, traj, signal, order)
            name = "fractional residual"
        checks.append(
            (
                name,
                rep.passed,
                f"max={rep.max_residual:.3e} bound={rep.bound_used:.3e} "
                f"worst={rep.worst_offenders(3)}",
            )
        )
    else:
        Y0, signal, K = _run_data(loaded, args)
        vsig = solver_mod.InputSignal(solver_mod.effective_inputs(system, signal))
        if order is None:
            traj = solver_mod.solve_standard(system, Y0, signal, K)
        else:
            ctrl = SeriesControl(tol=args.ml_tol, max_terms=args.ml_max_terms)
            traj = solver_mod.solve_fractional(system, Y0, signal, order, K, ctrl)
        rep = traj.meta["residual"]
        name = "standard residual" if order is None else "fractional residual"
        checks.append(
            (
                name,
                rep.passed,
                f"max={rep.max_residual:.3e} bound={rep.bound_used:.3e} "
                f"worst={rep.worst_offenders(3)}",
            )
        )
        if order is None:
            try:
                rec = oracle_mod.recursive_solve_invertible(
                    system.pencil, traj.states[0], vsig, K
                )
                gap = _relative_gap(traj.states, rec.states)
                checks.append(
                    ("recursive cross-check", gap <= 1e-7, f"relative gap {gap:.3e}")
                )
            except oracle_mod.OracleInapplicable:
                pass
            stacked = oracle_mod.stacked_solve(
                system.pencil, traj.states[0], vsig, K
            )
            window = max(0, min(K, K - wf.q_star + 1))
            gap = _relative_gap(
                traj.states[: window + 1], stacked.states[: window + 1]
            )
            checks.append(
                (
                    "stacked cross-check",
                    gap <= 1e-7,
                    f"relative gap {gap:.3e} on steps 0..{window} "
                    f"(rank deficiency {stacked.meta['rank_deficiency']})",
                )
            )

    all_ok = all(ok for _, ok, _ in checks)
    lines = [
        f"{name}: {'PASS' if ok else 'FAIL'} ({detail})" for name, ok, detail in checks
    ]
    text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    if args.out:
        sys.stdout.write(text)
    return EXIT_OK if all_ok else EXIT_VERIFY


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STRUCTURAL
    try:
        return args.func(args)
    except InconsistentICError as exc:
        print(f"inconsistent initial state: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except HorizonError as exc:
        print(f"insufficient input horizon: {exc}", file=sys.stderr)
        return EXIT_HORIZON
    except (SolvabilityError, RegularityError, ConvergenceError) as exc:
        print(f"no solution of the requested kind: {exc}", file=sys.stderr)
        return EXIT_SOLVABILITY
    except (
        StructuralError,
        DomainError,
        IllConditionedError,
        NotNilpotentError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STRUCTURAL
    except DescsysError as exc:  # pragma: no cover - safety net
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STRUCTURAL


if __name__ == "__main__":
    sys.exit(main())
