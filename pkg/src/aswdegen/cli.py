"""Command-line front end: one JSON job file in, one deterministic report out.

Exit codes: 0 ok, 2 schema error, 3 precision error, 4 hypothesis violated,
5 validation failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Callable

from . import degen_tree, genus, torsor_p, torsor_p2
from .errors import AswError, SchemaError, ValidationFailure
from .ffseries import BiElement, ResidueSeries

COMMANDS = ("normalize-p", "normalize-p2", "classify-boundary", "genus",
            "validate-tree", "realize-tree", "lift")


# ------------------------------------------------------------------ input helpers

def _rhs(job: dict, key: str, ring: str) -> BiElement:
    if key not in job:
        raise SchemaError(f"job is missing field {key!r}")
    return BiElement.from_dict({"p": job["p"], "ring": ring, "pi_prec": job.get("pi_prec"),
                                "t_window": job.get("t_window"), "terms": job[key]})


def _series(p: int, raw) -> ResidueSeries:
    if isinstance(raw, dict):
        return ResidueSeries.from_dict({"p": p, **raw})
    return ResidueSeries.from_dict({"p": p, "terms": raw})


def _ring(job: dict, default: str) -> str:
    ring = job.get("ring", default)
    if ring not in ("boundary", "germ"):
        raise SchemaError(f"ring must be 'boundary' or 'germ', got {ring!r}")
    return ring


# ------------------------------------------------------------------ commands

def cmd_normalize_p(job: dict, args) -> dict:
    ring = _ring(job, "boundary")
    a = _rhs(job, "rhs", ring)
    res = torsor_p.normalize_germ_p(a) if ring == "germ" else torsor_p.normalize_boundary_p(a)
    out = res.to_dict()
    out["provenance"] = {"type": f"torsor_p.normalize_{ring}_p", "delta": "DegTypeP.delta_for: n(p-1)"}
    return out


def cmd_normalize_p2(job: dict, args) -> dict:
    res = torsor_p2.normalize_germ_p2(_rhs(job, "rhs1", "germ"), _rhs(job, "rhs2", "germ"))
    out = res.to_dict()
    out["provenance"] = {"type": "torsor_p2.normalize_germ_p2",
                         "delta": "n1(p-1) and n2(p-1) from the final levels"}
    return out


def cmd_classify_boundary(job: dict, args) -> dict:
    rank = job.get("rank", "p")
    if rank == "p":
        res = torsor_p.normalize_boundary_p(_rhs(job, "rhs", "boundary"))
        return {"rank": "p", "type": res.type.to_dict(), "delta": res.delta,
                "provenance": "torsor_p.normalize_boundary_p"}
    if rank != "p2":
        raise SchemaError(f"rank must be 'p' or 'p2', got {rank!r}")
    ty = torsor_p2.classify_boundary_p2(_rhs(job, "rhs1", "boundary"), _rhs(job, "rhs2", "boundary"))
    out = {"rank": "p2", "type": ty.to_dict(), "provenance": "torsor_p2.classify_boundary_p2"}
    if ty.split_level is None:
        out["admissible"] = torsor_p2.is_admissible_pair(ty, job["p"], args.strict_paper)
        out["condition_star"] = torsor_p2.satisfies_condition_star(ty, job["p"])
    return out


def cmd_genus(job: dict, args) -> dict:
    q = genus.GermGenusQuery.from_dict(job)
    res = genus.germ_genus(q, strict_paper=args.strict_paper)
    out = {"query": q.to_dict(), "result": res.to_dict(),
           "riemann_hurwitz": genus.germ_genus_via_rh(q, strict_paper=args.strict_paper),
           "provenance": {"genus": "genus.germ_genus (closed form)",
                          "riemann_hurwitz": "genus.germ_genus_via_rh (local Riemann-Hurwitz)"}}
    if out["riemann_hurwitz"] != res.genus:
        out["warnings"] = ["closed form and local Riemann-Hurwitz disagree"]
    return out


def _tree(job: dict) -> degen_tree.DegenTree:
    return degen_tree.DegenTree.from_dict(job)


def cmd_validate_tree(job: dict, args) -> dict:
    tree = _tree(job)
    rep = degen_tree.validate(tree, strict_paper=args.strict_paper)
    out = rep.to_dict()
    out["dot"] = tree.to_dot()
    if not rep.valid:
        raise _ReportedFailure(out, f"tree fails {', '.join(rep.failed_labels)}")
    return out


def cmd_realize_tree(job: dict, args) -> dict:
    tree = _tree(job)
    rep = degen_tree.validate(tree, strict_paper=args.strict_paper)
    if not rep.valid:
        raise _ReportedFailure(rep.to_dict(), f"tree fails {', '.join(rep.failed_labels)}")
    real = degen_tree.realize_degen(tree)
    out = real.to_dict()
    out["genus"] = rep.genus
    out["dot"] = tree.to_dot()
    return out


def cmd_lift(job: dict, args) -> dict:
    p = job["p"]
    rank = job.get("rank", "p")
    if rank == "p":
        data = torsor_p2.DegenDataP(int(job["n"]), _series(p, job["abar"]))
        res = torsor_p2.lift_degen_data(data)
    elif rank == "p2":
        c_bar = tuple(_series(p, c) for c in job.get("c_bar", []))
        levels = tuple(int(x) for x in job.get("levels", [0, 0]))
        data = torsor_p2.DegenDataP2(job["kind"], _series(p, job["first"]), _series(p, job["second"]),
                                     c_bar, bool(job.get("carry_marker", False)), levels)
        res = torsor_p2.lift_degen_data(data, n=job.get("n"), m=job.get("m"),
                                        variant=int(job.get("variant", 1)))
    else:
        raise SchemaError(f"rank must be 'p' or 'p2', got {rank!r}")
    out = res.to_dict()
    out["datum"] = data.to_dict()
    out["provenance"] = "torsor_p2.lift_degen_data"
    return out


DISPATCH: dict[str, Callable[[dict, Any], dict]] = {
    "normalize-p": cmd_normalize_p,
    "normalize-p2": cmd_normalize_p2,
    "classify-boundary": cmd_classify_boundary,
    "genus": cmd_genus,
    "validate-tree": cmd_validate_tree,
    "realize-tree": cmd_realize_tree,
    "lift": cmd_lift,
}


class _ReportedFailure(ValidationFailure):
    """Validation failure that still carries a full report."""

    def __init__(self, report: dict, message: str):
        super().__init__(message)
        self.report = report


# ------------------------------------------------------------------ rendering

def _text(obj: Any, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines: list[str] = []
    if isinstance(obj, dict):
        for k in sorted(obj):
            v = obj[k]
            if isinstance(v, (dict, list)) and v and not _flat(v):
                lines.append(f"{pad}{k}:")
                lines.extend(_text(v, indent + 1))
            elif isinstance(v, str) and "\n" in v:
                lines.append(f"{pad}{k}:")
                lines.extend(pad + "  " + ln for ln in v.rstrip("\n").split("\n"))
            else:
                lines.append(f"{pad}{k}: {_scalar(v)}")
    elif isinstance(obj, list):
        for v in obj:
            if isinstance(v, (dict, list)) and not _flat(v):
                lines.append(f"{pad}-")
                lines.extend(_text(v, indent + 1))
            else:
                lines.append(f"{pad}- {_scalar(v)}")
    else:
        lines.append(pad + _scalar(obj))
    return lines


def _flat(v) -> bool:
    return isinstance(v, list) and all(not isinstance(x, dict) for x in v) and len(json.dumps(v)) < 80


def _scalar(v) -> str:
    return v if isinstance(v, str) else json.dumps(v, ensure_ascii=False)


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    return "\n".join(_text(report)) + "\n"


# ------------------------------------------------------------------ entry point

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="aswdegen",
                                 description="Artin-Schreier-Witt normalization and degeneration data.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("input", help="JSON job file, or '-' for standard input")
    ap.add_argument("--p", type=int, help="characteristic; overrides the job's p")
    ap.add_argument("--pi-prec", type=int, help="pi-adic precision; overrides the job's pi_prec")
    ap.add_argument("--strict-paper", action="store_true",
                    help="use the strict variants of the genus and admissibility formulas instead of the defaults")
    ap.add_argument("--format", choices=("json", "text"), default="json")
    ap.add_argument("--out", help="write the report here instead of standard output")
    return ap


def _load(path: str) -> dict:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
        job = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read job {path!r}: {exc}") from None
    if not isinstance(job, dict):
        raise SchemaError("the job must be a JSON object")
    return job


def run(argv: list[str] | None = None) -> tuple[int, str]:
    """Execute one job; returns (exit code, rendered report)."""
    args = build_parser().parse_args(argv)
    status = 0
    try:
        job = _load(args.input)
        if args.p is not None:
            job["p"] = args.p
        if args.pi_prec is not None:
            job["pi_prec"] = args.pi_prec
        if "p" not in job:
            raise SchemaError("no characteristic p given (job field 'p' or --p)")
        report = {"command": args.command, "status": "ok", "strict_paper": args.strict_paper,
                  "result": DISPATCH[args.command](job, args)}
    except _ReportedFailure as exc:
        status = exc.exit_code
        report = {"command": args.command, "status": "validation-failure", "error": str(exc),
                  "strict_paper": args.strict_paper, "result": exc.report}
    except AswError as exc:
        status = exc.exit_code
        report = {"command": args.command, "status": type(exc).__name__, "error": str(exc),
                  "strict_paper": args.strict_paper}
    except (KeyError, TypeError, ValueError) as exc:
        status = SchemaError.exit_code
        report = {"command": args.command, "status": "SchemaError", "error": f"malformed job: {exc!r}",
                  "strict_paper": args.strict_paper}
    return status, render(report, args.format)


def main(argv: list[str] | None = None) -> int:
    status, text = run(argv)
    args = build_parser().parse_args(argv)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if status:
        sys.stderr.write(f"aswdegen: exit {status}\n")
    return status


if __name__ == "__main__":
    raise SystemExit(main())
