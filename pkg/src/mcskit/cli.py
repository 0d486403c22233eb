"""Command-line front end.

Exit codes: 0 consistent / nonempty result, 1 inconsistent / empty result,
2 parse or validation error, 3 capped search or internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import analysis, managed, meta
from .core import DEFAULT_CAP, CappedSearchError, enumerate_equilibria, is_inconsistent
from .parser import ParseFailure, parse_mcs, parse_program

EXIT_OK, EXIT_EMPTY, EXIT_INPUT, EXIT_ERROR = 0, 1, 2, 3

_ID_LIST = {"type": "array", "items": {"type": "string"}}
_PAIR = {
    "type": "object",
    "properties": {"d1": _ID_LIST, "d2": _ID_LIST},
    "required": ["d1", "d2"],
    "additionalProperties": False,
}
_EXPL = {
    "type": "object",
    "properties": {"e1": _ID_LIST, "e2": _ID_LIST},
    "required": ["e1", "e2"],
    "additionalProperties": False,
}
_STATE = {"type": "object", "additionalProperties": _ID_LIST}
_EDGE = {
    "type": "object",
    "properties": {"from": {"type": "string"}, "to": {"type": "string"}, "negative": {"type": "boolean"}},
    "required": ["from", "to", "negative"],
}
_CLASSES = [c.value for c in managed.CycleClass]

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["command", "status", "payload"],
    "properties": {
        "command": {"type": "string"},
        "status": {"type": "string"},
        "payload": {
            "type": "object",
            "properties": {
                "consistent": {"type": "boolean"},
                "equilibria": {"type": "array", "items": _STATE},
                "diagnoses": {"type": "array", "items": _PAIR},
                "explanations": {"type": "array", "items": _EXPL},
                "faulty": {
                    "type": "object",
                    "properties": {"from_diagnoses": _ID_LIST, "from_explanations": _ID_LIST},
                    "required": ["from_diagnoses", "from_explanations"],
                },
                "nodes": _ID_LIST,
                "edges": {"type": "array", "items": _EDGE},
                "classification": {"enum": _CLASSES},
                "totally_coherent": {"type": "object", "additionalProperties": {"type": "boolean"}},
                "error": {"type": "string"},
            },
        },
    },
}


@dataclass
class RunConfig:
    subcommand: str
    input: Path
    format: str = "text"
    observer: Path | None = None
    preference: Path | None = None
    cap: int = DEFAULT_CAP
    minimal: bool = True
    dot: bool = False
    jobs: int = 1


@dataclass
class Report:
    command: str
    status: str
    payload: dict = field(default_factory=dict)
    lines: list[str] = field(default_factory=list)
    timing_ms: float = 0.0

    def to_json(self) -> str:
        # timing is left out so identical runs are byte-identical
        doc = {"command": self.command, "status": self.status, "payload": self.payload}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        return "".join(f"{line}\n" for line in self.lines)


def _ids(ids) -> str:
    return "{" + ",".join(sorted(ids)) + "}"


def _load_observer(path: Path | None) -> meta.ObserverProgram | None:
    if path is None:
        return None
    return meta.ObserverProgram(parse_program(path.read_text(encoding="utf-8")))


def _execute(cfg: RunConfig) -> tuple[int, Report]:
    mcs = parse_mcs(cfg.input.read_text(encoding="utf-8"))
    cmd = cfg.subcommand
    cap, jobs = cfg.cap, cfg.jobs

    if cmd == "check":
        consistent = not is_inconsistent(mcs, cap)
        status = "consistent" if consistent else "inconsistent"
        return (EXIT_OK if consistent else EXIT_EMPTY), Report(cmd, status, {"consistent": consistent}, [status])

    if cmd in ("equilibria", "managed-check"):
        found = enumerate_equilibria(mcs, cap) if cmd == "equilibria" else managed.enumerate_equilibria_managed(mcs, cap)
        payload = {"equilibria": [s.as_dict() for s in found]}
        lines = [f"equilibrium {i}: {s}" for i, s in enumerate(found, start=1)]
        if cmd == "managed-check":
            coherent = {cid: managed.totally_coherent(mcs, cid, cap) for cid in mcs.context_ids}
            cls = managed.classify_cycles(managed.dependency_graph(mcs))
            payload["totally_coherent"] = coherent
            payload["classification"] = cls.value
            lines += [f"totally coherent {cid}: {'yes' if ok else 'no'}" for cid, ok in coherent.items()]
            lines.append(f"classification: {cls.value}")
        status = "consistent" if found else "inconsistent"
        lines.insert(0, status)
        return (EXIT_OK if found else EXIT_EMPTY), Report(cmd, status, payload, lines)

    if cmd in ("diagnose", "filter", "prefer"):
        if cmd == "diagnose":
            found = (analysis.minimal_diagnoses if cfg.minimal else analysis.all_diagnoses)(mcs, cap, jobs)
        elif cmd == "filter":
            found = meta.filter_diagnoses(mcs, _load_observer(cfg.observer), cap=cap, jobs=jobs)
        else:
            pref = meta.PreferenceProgram(parse_program(cfg.preference.read_text(encoding="utf-8")))
            found = meta.preferred_diagnoses(mcs, pref, _load_observer(cfg.observer), cap, jobs)
        payload = {"diagnoses": [d.as_dict() for d in found]}
        lines = [f"diagnosis: d1={_ids(d.d1)} d2={_ids(d.d2)}" for d in found]
        status = "found" if found else "none"
        return (EXIT_OK if found else EXIT_EMPTY), Report(cmd, status, payload, lines or ["no diagnoses"])

    if cmd == "explain":
        found = (analysis.minimal_explanations if cfg.minimal else analysis.all_explanations)(mcs, cap, jobs)
        payload = {"explanations": [e.as_dict() for e in found]}
        lines = [f"explanation: e1={_ids(e.e1)} e2={_ids(e.e2)}" for e in found]
        if cfg.minimal:
            from_d, from_e = analysis.faulty_rule_sets(mcs, cap, jobs)
            payload["faulty"] = {"from_diagnoses": sorted(from_d), "from_explanations": sorted(from_e)}
            lines.append(f"faulty (diagnoses): {_ids(from_d)}")
            lines.append(f"faulty (explanations): {_ids(from_e)}")
        status = "found" if found else "none"
        return (EXIT_OK if found else EXIT_EMPTY), Report(cmd, status, payload, lines)

    if cmd == "graph":
        graph = managed.dependency_graph(mcs)
        cls = managed.classify_cycles(graph)
        payload = {
            "nodes": list(graph.nodes),
            "edges": [{"from": e.source, "to": e.target, "negative": e.negative} for e in graph.edges],
            "classification": cls.value,
        }
        if cfg.dot:
            lines = ["digraph mcs {"]
            lines += [f'  "{n}";' for n in graph.nodes]
            lines += [
                f'  "{e.source}" -> "{e.target}"' + (" [style=dashed];" if e.negative else ";") for e in graph.edges
            ]
            lines.append("}")
        else:
            lines = [f"edge {e.source} -> {e.target}{' (negative)' if e.negative else ''}" for e in graph.edges]
            lines.append(f"classification: {cls.value}")
        return EXIT_OK, Report(cmd, cls.value, payload, lines)

    raise ValueError(f"unknown subcommand {cmd!r}")


def run(cfg: RunConfig) -> tuple[int, Report]:
    """Execute one subcommand; errors are mapped to exit codes, never raised."""
    start = time.perf_counter()
    try:
        code, report = _execute(cfg)
    except ParseFailure as exc:
        code, report = EXIT_INPUT, Report(cfg.subcommand, "parse-error", {"error": str(exc)}, [str(exc)])
    except OSError as exc:
        code, report = EXIT_INPUT, Report(cfg.subcommand, "input-error", {"error": str(exc)}, [str(exc)])
    except CappedSearchError as exc:
        code, report = EXIT_ERROR, Report(cfg.subcommand, "capped", {"error": str(exc)}, [str(exc)])
    except Exception as exc:  # noqa: BLE001 - every failure becomes exit code 3
        code, report = EXIT_ERROR, Report(cfg.subcommand, "error", {"error": f"{type(exc).__name__}: {exc}"}, [str(exc)])
    report.timing_ms = (time.perf_counter() - start) * 1000.0
    return code, report


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    # subcommand copies must not reset values given before the subcommand
    def default(value):
        return argparse.SUPPRESS if suppress else value

    parser.add_argument("--format", choices=("text", "json"), default=default("text"))
    parser.add_argument("--cap", type=_positive, default=default(DEFAULT_CAP), help="ceiling on guessed head-set combinations")
    parser.add_argument("--jobs", type=_positive, default=default(1), help="worker processes for candidate checks")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    parser = argparse.ArgumentParser(prog="mcs", description="Evaluate and diagnose multi-context systems.")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, help_text in [
        ("check", "decide consistency"),
        ("equilibria", "list all equilibria"),
        ("diagnose", "list diagnoses"),
        ("explain", "list explanations"),
        ("filter", "list minimal diagnoses accepted by an observer"),
        ("prefer", "list most preferred diagnoses"),
        ("graph", "print the context dependency graph"),
        ("managed-check", "managed equilibria, total coherence and cycle class"),
    ]:
        p = sub.add_parser(name, help=help_text, parents=[common])
        p.add_argument("input", type=Path)
        if name in ("diagnose", "explain"):
            p.add_argument("--all", action="store_true", help="do not restrict to subset-minimal results")
        if name == "filter":
            p.add_argument("--observer", type=Path, required=True)
        if name == "prefer":
            p.add_argument("--preference", type=Path, required=True)
            p.add_argument("--observer", type=Path)
        if name == "graph":
            p.add_argument("--dot", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(
        subcommand=args.subcommand,
        input=args.input,
        format=args.format,
        observer=getattr(args, "observer", None),
        preference=getattr(args, "preference", None),
        cap=args.cap,
        minimal=not getattr(args, "all", False),
        dot=getattr(args, "dot", False),
        jobs=args.jobs,
    )
    code, report = run(cfg)
    if code >= EXIT_INPUT:
        print(report.to_text(), end="", file=sys.stderr)
    if cfg.format == "json":
        sys.stdout.write(report.to_json())
    elif code < EXIT_INPUT:
        sys.stdout.write(report.to_text())
    print(f"# {report.timing_ms:.1f} ms", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
