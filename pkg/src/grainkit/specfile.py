"""Line-oriented text format for register-system documents.

Grammar (``#`` starts a comment anywhere on a line)::

    system <name>
    register <id> <length>
    feedback <id>[<i>] = <expr>
    output <NAME> = <expr>
    inject <mode> <id>[<i>] = <NAME>
    param <key> = <int>

``<expr>`` is ``+``-separated terms; each term is a ``*``-separated
product of ``<id>[<index>]`` factors or a literal ``0``/``1``.  ``+`` is
XOR and ``*`` is AND.  Inside an ``output`` expression a bare name that
matches an earlier output XORs that output in; such a reference must
stand alone, not inside a product.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping

from .anf import Anf, Term, Var
from .engine import Injection, OutputSpec, RegisterSpec, SystemSpec

__all__ = ["SpecDocument", "SpecError", "parse_spec", "format_spec"]


class SpecError(ValueError):
    """Parse or semantic error with its source position."""

    def __init__(self, line: int, message: str, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
        self.message = message


@dataclass(frozen=True)
class SpecDocument:
    """A parsed system plus the source lines its pieces came from."""

    name: str
    system: SystemSpec
    locations: Mapping[tuple, int] = field(default_factory=dict, compare=False)


_REGISTER_RE = re.compile(r"^register\s+([A-Za-z_][A-Za-z0-9_]*)\s+(\d+)\s*$")
_FEEDBACK_RE = re.compile(
    r"^feedback\s+([A-Za-z_][A-Za-z0-9_]*)\[(\d+)\]\s*=\s*(.+)$"
)
_OUTPUT_RE = re.compile(r"^output\s+([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.+)$")
_INJECT_RE = re.compile(
    r"^inject\s+([A-Za-z_][A-Za-z0-9_]*)\s+([A-Za-z_][A-Za-z0-9_]*)\[(\d+)\]"
    r"\s*=\s*([A-Za-z_][A-Za-z0-9_]*)\s*$"
)
_PARAM_RE = re.compile(r"^param\s+([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(-?\d+)\s*$")
_SYSTEM_RE = re.compile(r"^system\s+(\S+)\s*$")
_FACTOR_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\[(\d+)\]$")
_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def _col_of(raw: str, token: str) -> int:
    pos = raw.find(token)
    return pos + 1 if pos >= 0 else 1


def _parse_expr(
    text: str,
    lineno: int,
    raw: str,
    registers: dict[str, int],
    output_names: list[str],
    allow_refs: bool,
) -> tuple[Anf, tuple[str, ...]]:
    terms: set[Term] = set()
    const = 0
    ref_parity: dict[str, int] = {}
    for chunk in text.split("+"):
        chunk = chunk.strip()
        if not chunk:
            raise SpecError(lineno, "empty term in expression", _col_of(raw, "+"))
        factors = [f.strip() for f in chunk.split("*")]
        if "0" in factors:
            continue
        factors = [f for f in factors if f != "1"]
        if not factors:
            const ^= 1
            continue
        vars_: list[Var] = []
        refs_in_term: list[str] = []
        for f in factors:
            m = _FACTOR_RE.match(f)
            if m:
                reg, idx = m.group(1), int(m.group(2))
                if reg not in registers:
                    raise SpecError(
                        lineno, f"undeclared register {reg!r}", _col_of(raw, f)
                    )
                if idx >= registers[reg]:
                    raise SpecError(
                        lineno,
                        f"index {idx} out of range for register {reg!r} "
                        f"of length {registers[reg]}",
                        _col_of(raw, f),
                    )
                vars_.append(Var(reg, idx))
            elif _NAME_RE.match(f):
                if not allow_refs:
                    raise SpecError(
                        lineno,
                        f"output references like {f!r} are only allowed in "
                        f"output expressions",
                        _col_of(raw, f),
                    )
                if f not in output_names:
                    raise SpecError(
                        lineno,
                        f"{f!r} is not an earlier output",
                        _col_of(raw, f),
                    )
                refs_in_term.append(f)
            else:
                raise SpecError(lineno, f"bad factor {f!r}", _col_of(raw, f))
        if refs_in_term:
            if vars_ or len(refs_in_term) > 1:
                raise SpecError(
                    lineno,
                    "an output reference must stand alone in its term",
                    _col_of(raw, refs_in_term[0]),
                )
            name = refs_in_term[0]
            ref_parity[name] = ref_parity.get(name, 0) ^ 1
            continue
        term = Term(frozenset(vars_))
        if term in terms:
            terms.remove(term)
        else:
            terms.add(term)
    refs = tuple(n for n in output_names if ref_parity.get(n))
    return Anf(frozenset(terms), const), refs


def parse_spec(text: str, source: str = "<string>") -> SpecDocument:
    """Parse a system document, rejecting unknown directives with positions."""
    name: str | None = None
    reg_order: list[str] = []
    reg_len: dict[str, int] = {}
    feedback: dict[str, dict[int, Anf]] = {}
    outputs: list[OutputSpec] = []
    out_names: list[str] = []
    injections: list[Injection] = []
    params: dict[str, int] = {}
    locations: dict[tuple, int] = {}

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        keyword = line.split(None, 1)[0]

        if keyword == "system":
            m = _SYSTEM_RE.match(line)
            if not m:
                raise SpecError(lineno, "expected 'system <name>'")
            if name is not None:
                raise SpecError(lineno, "duplicate system directive")
            name = m.group(1)
            locations[("system",)] = lineno
            continue
        if name is None:
            raise SpecError(lineno, "the document must start with 'system <name>'")

        if keyword == "register":
            m = _REGISTER_RE.match(line)
            if not m:
                raise SpecError(lineno, "expected 'register <id> <length>'")
            rid, length = m.group(1), int(m.group(2))
            if rid in reg_len:
                raise SpecError(lineno, f"duplicate register {rid!r}")
            if length < 1:
                raise SpecError(lineno, f"register {rid!r} needs positive length")
            reg_order.append(rid)
            reg_len[rid] = length
            feedback[rid] = {}
            locations[("register", rid)] = lineno
        elif keyword == "feedback":
            m = _FEEDBACK_RE.match(line)
            if not m:
                raise SpecError(lineno, "expected 'feedback <id>[<i>] = <expr>'")
            rid, bit = m.group(1), int(m.group(2))
            if rid not in reg_len:
                raise SpecError(lineno, f"undeclared register {rid!r}")
            if bit >= reg_len[rid]:
                raise SpecError(
                    lineno,
                    f"index {bit} out of range for register {rid!r} "
                    f"of length {reg_len[rid]}",
                )
            if bit in feedback[rid]:
                raise SpecError(lineno, f"duplicate feedback for {rid}[{bit}]")
            expr, _ = _parse_expr(m.group(3), lineno, raw, reg_len, out_names, False)
            feedback[rid][bit] = expr
            locations[("feedback", rid, bit)] = lineno
        elif keyword == "output":
            m = _OUTPUT_RE.match(line)
            if not m:
                raise SpecError(lineno, "expected 'output <NAME> = <expr>'")
            oname = m.group(1)
            if oname in out_names or oname in reg_len:
                raise SpecError(lineno, f"name {oname!r} already in use")
            expr, refs = _parse_expr(m.group(2), lineno, raw, reg_len, out_names, True)
            outputs.append(OutputSpec(oname, expr, refs))
            out_names.append(oname)
            locations[("output", oname)] = lineno
        elif keyword == "inject":
            m = _INJECT_RE.match(line)
            if not m:
                raise SpecError(lineno, "expected 'inject <mode> <id>[<i>] = <NAME>'")
            mode, rid, bit, oname = (
                m.group(1),
                m.group(2),
                int(m.group(3)),
                m.group(4),
            )
            if rid not in reg_len:
                raise SpecError(lineno, f"undeclared register {rid!r}")
            if bit >= reg_len[rid]:
                raise SpecError(lineno, f"index {bit} out of range for {rid!r}")
            if oname not in out_names:
                raise SpecError(lineno, f"{oname!r} is not a declared output")
            injections.append(Injection(mode, rid, bit, oname))
            locations[("inject", len(injections) - 1)] = lineno
        elif keyword == "param":
            m = _PARAM_RE.match(line)
            if not m:
                raise SpecError(lineno, "expected 'param <key> = <int>'")
            key = m.group(1)
            if key in params:
                raise SpecError(lineno, f"duplicate param {key!r}")
            params[key] = int(m.group(2))
            locations[("param", key)] = lineno
        else:
            raise SpecError(lineno, f"unknown directive {keyword!r}")

    if name is None:
        raise SpecError(1, "no system declared")
    if not reg_order:
        raise SpecError(1, "the system declares no registers")

    registers = tuple(
        RegisterSpec(rid, reg_len[rid], feedback[rid]) for rid in reg_order
    )
    system = SystemSpec(registers, tuple(outputs), tuple(injections), params)
    return SpecDocument(name, system, locations)


def _format_output_expr(out: OutputSpec) -> str:
    base = str(out.expr)
    if not out.refs:
        return base
    refs = " + ".join(out.refs)
    if out.expr.is_zero():
        return refs
    if base == "0":
        return refs
    return f"{base} + {refs}"


def format_spec(doc: SpecDocument | SystemSpec, name: str | None = None) -> str:
    """Render a document in canonical form.

    Pure-shift bits are omitted, feedback lines go top bit first, and
    expressions use the canonical term ordering; parsing the result gives
    back an equal system.
    """
    if isinstance(doc, SpecDocument):
        system = doc.system
        name = name or doc.name
    else:
        system = doc
        name = name or "system"
    lines = [f"system {name}"]
    for reg in system.registers:
        lines.append(f"register {reg.id} {reg.length}")
    for reg in system.registers:
        for bit in sorted(reg.feedback, reverse=True):
            lines.append(f"feedback {reg.id}[{bit}] = {reg.feedback[bit]}")
    for out in system.outputs:
        lines.append(f"output {out.name} = {_format_output_expr(out)}")
    for inj in system.injections:
        lines.append(f"inject {inj.mode} {inj.register}[{inj.bit}] = {inj.output}")
    for key in sorted(system.params):
        lines.append(f"param {key} = {system.params[key]}")
    return "\n".join(lines) + "\n"
