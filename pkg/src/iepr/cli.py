"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 numerical/consistency failure
(including a failed ``verify``), 3 resource limits.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import io as fio
from .analysis import effective_coupling_sweep, nms_extract, reduce_subsystem
from .circuit import build_bare
from .errors import FormatError, IEPRError
from .extract import extract_all
from .fieldproc import normal_modes_from_export
from .modal import TransformMatrix, assemble_H_matrix, forward_synthesize
from .nonlinear import normal_parameters
from .oracle import FockConfig, convergence_check


def _grid(text: str) -> np.ndarray:
    try:
        start, stop, steps = text.split(":")
        return np.linspace(float(start), float(stop), int(steps))
    except ValueError:
        raise FormatError(f"--grid expects start:stop:steps, got {text!r}") from None


def _pair(text: str, flag: str) -> tuple[float, float]:
    try:
        lo, hi = text.split(":")
        return float(lo), float(hi)
    except ValueError:
        raise FormatError(f"{flag} expects low:high, got {text!r}") from None


def _names(text: str | None) -> list[str]:
    return [] if not text else [t.strip() for t in text.split(",") if t.strip()]


def _junctions(text: str | None) -> dict[str, float]:
    out = {}
    for item in _names(text):
        try:
            name, value = item.split("=")
            out[name.strip()] = float(value)
        except ValueError:
            raise FormatError(f"--junctions expects name=nH pairs, got {item!r}") from None
    return out


def _emit(args, manifest, doc=None, text=None):
    """Write the JSON document or CSV text to --output, or stdout."""
    if doc is not None and args.format == "json":
        doc = dict(doc)
        doc["manifest"] = manifest.to_dict()
        text = fio.dumps(doc)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _manifest(args):
    outputs = [args.output] if args.output else []
    return fio.RunManifest(args.command, [args.input], outputs, args.seed, __version__)


def cmd_synth(args):
    circuit = fio.circuit_from_json(fio.load_json(args.input))
    bare = build_bare(circuit, nonlinear=False)
    modes, _ = forward_synthesize(bare)
    junctions = {el.name: el.L_J for el in circuit.elements if el.is_junction}
    _emit(args, _manifest(args), fio.modes_to_json(modes, junctions))
    return 0


def _extraction_doc(report):
    doc = {
        "bare": fio.bare_to_json(report.bare),
        "U": report.U.u,
        "omega_prime_MHz": report.omega_prime,
        "residual": report.orthonormality_residual,
        "assignment": list(report.assignment),
        "unresolved": list(report.unresolved),
        "warnings": list(report.warnings),
    }
    if report.normal is not None:
        doc["normal"] = fio.nonlinear_to_json(report.normal)
    return doc


def cmd_extract(args):
    modes, junctions = fio.modes_from_json(fio.load_json(args.input))
    junctions.update(_junctions(args.junctions))
    report = extract_all(modes, junctions or None, tol=args.tolerance)
    m = _manifest(args)
    if args.format == "csv":
        _emit(args, m, text=fio.bare_table_csv(report.bare, m))
    else:
        _emit(args, m, _extraction_doc(report))
    return 0


def cmd_fields(args):
    export, nodeless = fio.fields_from_json(fio.load_json(args.input))
    modes = normal_modes_from_export(export, nodeless)
    _emit(args, _manifest(args), fio.modes_to_json(modes, _junctions(args.junctions)))
    return 0


def _bare_and_U(doc):
    bare = fio.bare_from_json(doc)
    if "U" not in doc or "omega_prime_MHz" not in doc:
        raise FormatError("parameters: U and omega_prime_MHz are required for this command")
    return bare, TransformMatrix(doc["U"], bare.names), np.asarray(doc["omega_prime_MHz"], dtype=float)


def cmd_nonlinear(args):
    doc = fio.load_parameters(args.input)
    bare, U, w_prime = _bare_and_U(doc)
    names = doc.get("assignment") or list(bare.names)
    normal = normal_parameters(U, w_prime, bare, names)
    m = _manifest(args)
    if args.format == "csv":
        _emit(args, m, text=fio.nonlinear_table_csv([normal.reorder(bare.names)], m))
    else:
        doc = {k: v for k, v in doc.items() if k != "manifest"}
        doc["normal"] = fio.nonlinear_to_json(normal)
        _emit(args, m, doc)
    return 0


def cmd_reduce(args):
    doc = fio.load_parameters(args.input)
    bare = fio.bare_from_json(doc)
    eliminate = _names(args.eliminate)
    red = reduce_subsystem(assemble_H_matrix(bare), bare.names, eliminate, bare.L_J, bare.alpha)
    m = _manifest(args)
    if args.format == "csv":
        _emit(args, m, text=fio.bare_table_csv(red.effective, m))
        return 0
    doc = {k: v for k, v in doc.items() if k != "manifest"}
    doc["reduced"] = {
        "kept": list(red.kept),
        "eliminated_omega_prime_MHz": red.eliminated,
        "effective": fio.bare_to_json(red.effective),
        "spectrum_residual": red.spectrum_residual,
        "step_residuals": red.step_residuals,
        "warnings": red.warnings,
    }
    _emit(args, m, doc)
    return 0


def cmd_sweep(args):
    circuit = fio.circuit_from_json(fio.load_json(args.input))
    if not args.coupler:
        raise FormatError("sweep needs --coupler")
    if not args.grid:
        raise FormatError("sweep needs --grid start:stop:steps")
    pair = tuple(_names(args.pair)) or None
    result = effective_coupling_sweep(circuit, args.coupler, _grid(args.grid), pair)
    m = _manifest(args)
    if args.format == "json":
        _emit(args, m, {
            "parameter": result.parameter,
            "pair": list(result.pair),
            "grid": result.grid,
            "values": result.values,
            "flags": result.flags,
            "zero_crossings": result.zero_crossings,
        })
    else:
        _emit(args, m, text=fio.sweep_csv(result, m))
    return 0


def cmd_nms(args):
    circuit = fio.circuit_from_json(fio.load_json(args.input))
    if not (args.tuned and args.partner and args.bounds):
        raise FormatError("nms needs --tuned, --partner and --bounds low:high")
    res = nms_extract(circuit, args.tuned, args.partner, _pair(args.bounds, "--bounds"), args.operating)
    _emit(args, _manifest(args), {
        "tuned": args.tuned,
        "partner": args.partner,
        "g_MHz": res.g,
        "g_resonant_MHz": res.g_resonant,
        "L_resonant_nH": res.L_resonant,
        "omega_resonant_MHz": res.omega_resonant,
        "omega_operating_MHz": list(res.omega_operating),
    })
    return 0


def verify_report(bare, normal, levels: int, rel_tol: float, abs_tol: float, floor: float = 0.01):
    """Oracle comparison lines ``(label, value, reference, passed)`` and certification.

    Relative checks (self- and cross-Kerr) also pass when the difference is
    below ``floor`` MHz, so near-zero inherited nonlinearities are not judged
    on relative error alone.
    """
    cfg = FockConfig(levels_per_mode=levels, convergence_levels=levels + 2)
    conv = convergence_check(bare, cfg)
    ref = conv.base.reorder(bare.names)
    got = normal.reorder(bare.names)
    lines = []
    for i, name in enumerate(bare.names):
        d = abs(got.omega_prime_nl[i] - ref.omega_prime_nl[i])
        lines.append((f"omega_nl[{name}]", got.omega_prime_nl[i], ref.omega_prime_nl[i], d <= abs_tol))
        if bare.alpha.any():
            a, b = got.alpha_prime[i], ref.alpha_prime[i]
            lines.append((f"alpha[{name}]", a, b, abs(a - b) <= max(rel_tol * abs(b), floor)))
    for i in range(bare.n):
        for j in range(i + 1, bare.n):
            a, b = got.chi[i, j], ref.chi[i, j]
            lines.append((f"chi[{bare.names[i]},{bare.names[j]}]", a, b, abs(a - b) <= max(rel_tol * abs(b), floor)))
    return lines, conv


def cmd_verify(args):
    doc = fio.load_parameters(args.input)
    bare = fio.bare_from_json(doc)
    if "normal" in doc:
        normal = fio.nonlinear_from_json(doc["normal"])
    else:
        _, U, w_prime = _bare_and_U(doc)
        normal = normal_parameters(U, w_prime, bare, doc.get("assignment") or bare.names)
    rel = 0.10 if args.tolerance is None else args.tolerance
    lines, conv = verify_report(bare, normal, args.levels, rel, args.abs_tolerance, args.floor)
    ok = all(p for *_, p in lines) and conv.passed
    out = []
    for label, a, b, p in lines:
        out.append(f"{'PASS' if p else 'FAIL'} {label}: iepr={a:.4f} oracle={b:.4f} delta={a - b:+.4f}")
    out.append(f"{'PASS' if conv.passed else 'FAIL'} convergence: "
               + ", ".join(f"{k}={v:.2e}" for k, v in conv.shifts.items()))
    out.extend(f"  {reason}" for reason in conv.reasons)
    out.append("PASS" if ok else "FAIL")
    if args.format == "json":
        m = _manifest(args)
        _emit(args, m, {
            "checks": [{"label": l, "iepr": a, "oracle": b, "pass": p} for l, a, b, p in lines],
            "convergence": {"shifts": conv.shifts, "passed": conv.passed, "reasons": conv.reasons},
            "oracle": fio.nonlinear_to_json(conv.base),
            "pass": ok,
        })
        if args.output:
            sys.stdout.write("\n".join(out) + "\n")
    else:
        text = "\n".join(out) + "\n"
        if args.output:
            Path(args.output).write_text(text)
        sys.stdout.write(text)
    return 0 if ok else 2


COMMANDS = {
    "synth": (cmd_synth, "circuit.json -> modes.json (synthetic normal modes)"),
    "extract": (cmd_extract, "modes.json -> parameters.json or bare-matrix CSV"),
    "fields": (cmd_fields, "fields.json -> modes.json (field-export provenance)"),
    "nonlinear": (cmd_nonlinear, "parameters.json -> add the normal-mode Kerr section"),
    "reduce": (cmd_reduce, "parameters.json -> add an effective subsystem"),
    "sweep": (cmd_sweep, "circuit.json -> effective coupling vs coupler inductance"),
    "nms": (cmd_nms, "circuit.json -> coupling from an avoided crossing"),
    "verify": (cmd_verify, "parameters.json -> compare against the Fock-space oracle"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="iepr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"iepr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--input", "-i", required=True)
        p.add_argument("--output", "-o")
        if name == "verify":
            p.add_argument("--format", choices=("text", "json"), default="text")
        else:
            default_fmt = "csv" if name == "sweep" else "json"
            p.add_argument("--format", choices=("json", "csv"), default=default_fmt)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--json-errors", action="store_true", help="also print errors as a JSON object")
        p.add_argument("--tolerance", type=float, default=None)
        p.add_argument("--junctions", help="name=L_J_nH,... junction inductances")
        if name == "reduce":
            p.add_argument("--eliminate", required=True, help="comma-separated element names")
        if name == "sweep":
            p.add_argument("--coupler")
            p.add_argument("--grid", help="start:stop:steps in nH")
            p.add_argument("--pair", help="two comma-separated element names")
        if name == "nms":
            p.add_argument("--tuned")
            p.add_argument("--partner")
            p.add_argument("--bounds", help="low:high junction inductance in nH")
            p.add_argument("--operating", type=float, help="operating L_J in nH (default: the circuit's)")
        if name == "verify":
            p.add_argument("--levels", type=int, default=FockConfig().levels_per_mode)
            p.add_argument("--abs-tolerance", type=float, default=0.5, help="MHz, for renormalized frequencies")
            p.add_argument("--floor", type=float, default=0.01, help="MHz below which Kerr differences always pass")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    func = COMMANDS[args.command][0]
    try:
        return func(args)
    except IEPRError as exc:
        code, name, msg = exc.exit_code, type(exc).__name__, str(exc)
    except MemoryError:
        code, name, msg = 3, "MemoryError", "out of memory"
    print(f"iepr {args.command}: {name}: {msg}", file=sys.stderr)
    if args.json_errors:
        print(json.dumps({"error": name, "message": msg, "exit_code": code}), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
