"""Command-line front end: dj, compile, spectrum and sweep subcommands.

Every run is file-driven and reproducible: the spin system comes from a
sectioned config file (a four-spin glycine system ships with the package and
is the default), functions are given as expressions or truth tables, and the
machine-readable output mode emits deterministic JSON.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import re
import sys
from importlib import resources

from . import dj as _dj
from . import heff as _heff
from . import oracle as _oracle
from . import pulse as _pulse
from . import spectrum as _spectrum
from .config import ConfigError, SpinSystemConfig, load_spin_system, parse_spin_system
from .spin_algebra import (
    OperatorSum,
    ProductOperatorTerm,
    SpinAlgebraError,
    conjugate,
    matrix_to_terms,
    rotation_matrix,
)
from .thermal import ThermalParams

DEFAULT_LINEWIDTH_HZ = 2.0


class CliError(ValueError):
    pass


def _default_config_text() -> str:
    return (
        resources.files("thermaldj")
        .joinpath("data/glycine_4spin.cfg")
        .read_text(encoding="utf-8")
    )


def _load_config(path: str | None) -> SpinSystemConfig:
    if path is None:
        return parse_spin_system(_default_config_text())
    return load_spin_system(path)


def _oracle_from_args(args, n: int) -> _oracle.BooleanOracle:
    if args.function is not None and args.table is not None:
        raise CliError("give either --function or --table, not both")
    if args.function is not None:
        return _oracle.parse_function(args.function, n)
    if args.table is not None:
        f = _oracle.BooleanOracle.from_bits(args.table)
        if f.n != n:
            raise CliError(
                f"table covers {f.n} input bits but the system provides {n}"
            )
        return f
    raise CliError("a function is required (--function EXPR or --table BITS)")


def _emit(args, payload: dict, human: str) -> None:
    if args.machine_output:
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        print(human)


def _terms_payload(terms: OperatorSum) -> list[dict]:
    return [
        {"axes": "".join(t.axes), "coeff": t.coeff.real} for t in terms
    ]


def _terms_block(terms: OperatorSum, indent: str = "  ") -> str:
    if not terms.terms:
        return f"{indent}(none)"
    rows = []
    for t in terms:
        ops = "".join(
            f"I{k + 1}{a.lower()}" for k, a in enumerate(t.axes) if a != "E"
        ) or "E"
        rows.append(f"{indent}{t.coeff.real:+10.6g}  {ops}")
    return "\n".join(rows)


# --- state literals ----------------------------------------------------------

_FACTOR_RE = re.compile(r"^I(\d+)([xyz])$")


def parse_state_literal(text: str, nspins: int) -> OperatorSum:
    """Parse product-operator text like "2*I1x*I4z - 0.5*I1y" into a sum."""
    terms = []
    normalized = text.replace("-", "+-")
    for chunk in normalized.split("+"):
        chunk = chunk.strip()
        if not chunk:
            continue
        negative = chunk.startswith("-")
        if negative:
            chunk = chunk[1:].strip()
        coeff = -1.0 if negative else 1.0
        axes = ["E"] * nspins
        saw_factor = False
        for piece in (p.strip() for p in chunk.split("*")):
            if not piece:
                raise CliError(f"empty factor in state literal {text!r}")
            match = _FACTOR_RE.match(piece)
            if match:
                spin = int(match.group(1))
                if not 1 <= spin <= nspins:
                    raise CliError(f"state literal names spin {spin}, system has {nspins}")
                if axes[spin - 1] != "E":
                    raise CliError(f"spin {spin} appears twice in one product")
                axes[spin - 1] = match.group(2).upper()
                saw_factor = True
            else:
                try:
                    coeff *= float(piece)
                except ValueError:
                    raise CliError(f"bad factor {piece!r} in state literal")
        if not saw_factor:
            raise CliError(f"term {chunk!r} names no spin operator")
        terms.append(ProductOperatorTerm(coeff, tuple(axes)))
    if not terms:
        raise CliError("empty state literal")
    return OperatorSum(terms, nspins=nspins)


# --- subcommands --------------------------------------------------------------


def cmd_dj(args) -> int:
    cfg = _load_config(args.config)
    system = cfg.system
    f = _oracle_from_args(args, system.nspins - 1)
    params = ThermalParams.uniform(system.nspins, alpha=args.alpha1)
    outcome = _dj.run_dj(system, f, params)
    payload = {
        "table": f.to_bits(),
        "n": f.n,
        "alpha1": args.alpha1,
        "expectation": outcome.expectation,
        "decision": outcome.decision.value,
        "rho2_terms": _terms_payload(outcome.rho2_terms),
    }
    human = "\n".join(
        [
            f"table:        {f.to_bits()}",
            f"class:        {_oracle.classify(f).value}",
            f"expectation:  {outcome.expectation:.12g}",
            f"decision:     {outcome.decision.value}",
            "rho2 terms (traceless, alpha1 = 1):",
            _terms_block(outcome.rho2_terms),
        ]
    )
    _emit(args, payload, human)
    return 2 if outcome.decision is _dj.DjDecision.INDETERMINATE else 0


def cmd_compile(args) -> int:
    cfg = _load_config(args.config)
    system = cfg.system
    f = _oracle_from_args(args, system.nspins - 1)
    cu = _oracle.controlled_u(_oracle.u_f(f))
    if args.branch == "anf":
        hamiltonian = _heff.anf_hamiltonian(f, args.tau)
    else:
        diag = _heff.effective_hamiltonian(cu, args.tau)
        hamiltonian = _heff.decompose_diagonal(diag)
    terms, identity_coeff = _heff.drop_identity(hamiltonian)

    grid_delta = None
    if args.grid:
        if cfg.grid_delta_s is None:
            raise CliError("config has no [grid] delta_us; cannot use --grid")
        grid_delta = cfg.grid_delta_s
    program = _pulse.compile_hamiltonian(terms, system, tau=args.tau)
    report = _pulse.verify(program, cu)
    grid_report = None
    if grid_delta is not None:
        program = _pulse.snap_to_grid(program, grid_delta)
        grid_report = _pulse.verify(program, cu)

    text = _pulse.serialize_program(program)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(text)

    payload = {
        "table": f.to_bits(),
        "branch": args.branch,
        "tau_s": args.tau,
        "terms": len(terms),
        "identity_coefficient": identity_coeff,
        "events": len(program.events),
        "total_duration_s": program.total_duration,
        "verification_distance": report.distance,
        "verification_passed": report.passed,
        "program_file": args.out,
    }
    lines = [
        f"table:           {f.to_bits()}",
        f"branch:          {args.branch}",
        f"terms:           {len(terms)} (identity coefficient {identity_coeff:.6g} rad/s dropped)",
        f"events:          {len(program.events)}",
        f"total duration:  {program.total_duration * 1e3:.3f} ms",
        f"verification:    {report}",
    ]
    if grid_report is not None:
        payload["grid_delta_us"] = cfg.grid_delta_us
        payload["grid_distance"] = grid_report.distance
        lines.append(
            f"grid:            delta {cfg.grid_delta_us:g} us,"
            f" rounding error {grid_report.distance:.3e}"
        )
    lines.append(f"program:         {args.out}")
    _emit(args, payload, "\n".join(lines))
    return 0


def cmd_spectrum(args) -> int:
    cfg = _load_config(args.config)
    system = cfg.system
    detect = system.spin_index(args.detect)

    f = None
    if args.function is not None or args.table is not None:
        f = _oracle_from_args(args, system.nspins - 1)

    if args.state is not None:
        state = parse_state_literal(args.state, system.nspins)
        if f is not None:
            cu = _oracle.controlled_u(_oracle.u_f(f))
            state = matrix_to_terms(conjugate(cu, state.to_matrix()))
        origin = args.state if f is None else f"cU applied to {args.state}"
    elif f is not None:
        state = _dj.rho2_product_operators(f)
        origin = f"final state for table {f.to_bits()}"
    else:
        raise CliError("spectrum needs --function/--table and/or --state")

    if args.readout_y:
        ry = rotation_matrix(system.nspins, detect, "y", math.pi / 2.0)
        state = matrix_to_terms(conjugate(ry, state.to_matrix()))

    mult = _spectrum.multiplet_of(state, detect, system)
    ratio = mult.ratio_string()
    samples = _spectrum.render_spectrum(mult, args.linewidth)
    table_path = f"{args.out}.dat"
    figure_path = f"{args.out}.png"
    with open(table_path, "w", encoding="utf-8") as fh:
        fh.write(_spectrum.spectrum_table(samples))
    _spectrum.save_spectrum_figure(
        samples, figure_path, title=f"spin {args.detect}", ratio=ratio
    )

    payload = {
        "detect": args.detect,
        "partners": list(mult.partners),
        "ratio": ratio,
        "lines": [
            {
                "offset_hz": line.offset_hz,
                "intensity": line.intensity,
                "partner_state": line.partner_state,
            }
            for line in mult.lines
        ],
        "integrated_signal": _spectrum.integrated_signal(state, detect),
        "table_file": table_path,
        "figure_file": figure_path,
    }
    human = "\n".join(
        [
            f"state:    {origin}",
            f"detect:   spin {args.detect}"
            + (f" (partners: {', '.join(map(str, mult.partners))})" if mult.partners else ""),
            f"ratio:    {ratio}",
            f"table:    {table_path}",
            f"figure:   {figure_path}",
        ]
    )
    _emit(args, payload, human)
    return 0


def cmd_sweep(args) -> int:
    n = args.n
    if not 1 <= n <= 4:
        raise CliError("sweep supports 1 <= n <= 4")
    system_n = _glycine_like_system(n + 1)
    counts = {d.value: 0 for d in _dj.DjDecision}
    max_dev = 0.0
    mismatches = 0
    for bits in itertools.product((0, 1), repeat=2 ** n):
        f = _oracle.BooleanOracle(n=n, table=bits)
        outcome = _dj.run_dj(system_n, f)
        counts[outcome.decision.value] += 1
        dev = abs(outcome.expectation - _dj.closed_form_expectation(f))
        max_dev = max(max_dev, dev)
        if not _decision_matches_class(outcome.decision, _oracle.classify(f)):
            mismatches += 1
    payload = {
        "n": n,
        "tables": 2 ** (2 ** n),
        "counts": counts,
        "max_deviation": max_dev,
        "mismatches": mismatches,
    }
    human = "\n".join(
        [
            f"n = {n}: {2 ** (2 ** n)} tables",
            "  ".join(f"{name}: {count}" for name, count in sorted(counts.items())),
            f"max |expectation - closed form| = {max_dev:.3e}",
            f"class/decision mismatches = {mismatches}",
        ]
    )
    _emit(args, payload, human)
    return 0 if mismatches == 0 else 1


def _decision_matches_class(decision: _dj.DjDecision, cls: _oracle.FunctionClass) -> bool:
    return decision.value == cls.value or (
        decision is _dj.DjDecision.INDETERMINATE
        and cls is _oracle.FunctionClass.NEITHER
    )


def _glycine_like_system(nspins: int):
    from .spin_algebra import SpinSystem

    return SpinSystem.from_couplings(nspins=nspins)


# --- argument parsing ----------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, function_args: bool = True) -> None:
    p.add_argument("--config", help="spin-system config file (default: bundled glycine)")
    if function_args:
        p.add_argument("--function", help="boolean expression over x2..x_{n+1}")
        p.add_argument("--table", help="truth table as a bit string, e.g. 01010110")
    p.add_argument(
        "--machine-output",
        action="store_true",
        help="emit deterministic JSON instead of the human report",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thermaldj",
        description=(
            "Ensemble Deutsch-Jozsa runs from thermal equilibrium: exact "
            "density-operator simulation, pulse-program compilation and "
            "multiplet spectrum prediction."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dj", help="run the algorithm and classify the function")
    _add_common(p)
    p.add_argument("--alpha1", type=float, default=1.0, help="spin-1 polarization")
    p.set_defaults(func=cmd_dj)

    p = sub.add_parser("compile", help="lower the controlled oracle to pulses")
    _add_common(p)
    p.add_argument("--tau", type=float, default=1.0, help="Hamiltonian duration (s)")
    p.add_argument("--grid", action="store_true", help="round delays to the config grid")
    p.add_argument(
        "--branch",
        choices=("anf", "principal"),
        default="anf",
        help="effective-Hamiltonian branch (default: monomial form, low weight)",
    )
    p.add_argument("--out", default="pulse_program.txt", help="program output path")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("spectrum", help="predict the detected spin's multiplet")
    _add_common(p)
    p.add_argument("--state", help='product-operator literal, e.g. "2*I1x*I4z"')
    p.add_argument("--detect", required=True, help="detected spin label")
    p.add_argument(
        "--readout-y",
        action="store_true",
        help="apply a 90-degree y pulse to the detected spin before detection",
    )
    p.add_argument("--linewidth", type=float, default=DEFAULT_LINEWIDTH_HZ, help="Hz")
    p.add_argument("--out", default="spectrum", help="output prefix for .dat/.png")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("sweep", help="exhaustively validate all functions of n bits")
    p.add_argument("n", type=int, help="input bits (1..4)")
    p.add_argument("--machine-output", action="store_true")
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (
        CliError,
        ConfigError,
        SpinAlgebraError,
        _oracle.FunctionParseError,
        _pulse.CompilationError,
        OSError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
