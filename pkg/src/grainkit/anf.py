"""Algebraic normal form for feedback and combining functions.

A Boolean function is kept as an XOR-set of AND product terms over
register-qualified bit variables, plus a constant bit.  Sets make the
representation canonical: a variable cannot repeat inside a term, and a
term XORed into an expression that already contains it cancels out.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple

__all__ = [
    "Var",
    "Term",
    "Anf",
    "AnfSummary",
    "MissingVariableError",
    "ForeignVariableError",
    "evaluate",
    "xor_merge",
    "remap_indices",
    "analyze",
    "substitute_var",
    "parse_term",
    "parse_expr",
    "term_sort_key",
]


class MissingVariableError(LookupError):
    """Evaluation reached a variable that the assignment does not cover."""

    def __init__(self, var: "Var"):
        super().__init__(f"no value assigned for {var}")
        self.var = var


class ForeignVariableError(ValueError):
    """An index remap or shift touched a variable of another register."""


class Var(NamedTuple):
    """One bit of a named register."""

    reg: str
    idx: int

    def __str__(self) -> str:
        return f"{self.reg}[{self.idx}]"


def _var_key(v: Var) -> tuple[str, int]:
    # Canonical variable order: by register name, then descending bit index.
    return (v.reg, -v.idx)


@dataclass(frozen=True)
class Term:
    """Product (AND) of one or more distinct variables.

    Terms compare by set equality, independent of how they were listed.
    """

    vars: frozenset[Var]

    def __post_init__(self):
        if not isinstance(self.vars, frozenset):
            object.__setattr__(self, "vars", frozenset(self.vars))
        if not self.vars:
            raise ValueError("a product term needs at least one variable")

    @classmethod
    def of(cls, reg: str, *indices: int) -> "Term":
        """Build a single-register product, e.g. ``Term.of("b", 63, 60)``."""
        return cls(frozenset(Var(reg, i) for i in indices))

    @property
    def degree(self) -> int:
        return len(self.vars)

    def sorted_vars(self) -> tuple[Var, ...]:
        return tuple(sorted(self.vars, key=_var_key))

    def registers(self) -> frozenset[str]:
        return frozenset(v.reg for v in self.vars)

    def __str__(self) -> str:
        return "*".join(str(v) for v in self.sorted_vars())


def term_sort_key(t: Term) -> tuple:
    """Canonical term order: by degree, then lexicographic variable keys."""
    return (t.degree, tuple(_var_key(v) for v in t.sorted_vars()))


@dataclass(frozen=True)
class Anf:
    """XOR of product terms plus a constant bit."""

    terms: frozenset[Term] = frozenset()
    const: int = 0

    def __post_init__(self):
        if not isinstance(self.terms, frozenset):
            object.__setattr__(self, "terms", frozenset(self.terms))
        if self.const not in (0, 1):
            raise ValueError("constant must be 0 or 1")

    @classmethod
    def zero(cls) -> "Anf":
        return cls(frozenset(), 0)

    @classmethod
    def of(cls, terms: Iterable[Term], const: int = 0) -> "Anf":
        return cls(frozenset(terms), const)

    @classmethod
    def parse(cls, text: str) -> "Anf":
        return parse_expr(text)

    def sorted_terms(self) -> tuple[Term, ...]:
        return tuple(sorted(self.terms, key=term_sort_key))

    def support(self) -> frozenset[Var]:
        return frozenset(v for t in self.terms for v in t.vars)

    def is_zero(self) -> bool:
        return not self.terms and self.const == 0

    def __str__(self) -> str:
        parts = [str(t) for t in self.sorted_terms()]
        if self.const:
            parts.append("1")
        return " + ".join(parts) if parts else "0"


@dataclass(frozen=True)
class AnfSummary:
    """Shape summary of an expression: sizes, degrees and index spans."""

    term_count: int
    max_degree: int
    index_range: Mapping[str, tuple[int, int]] = field(default_factory=dict)
    support: frozenset[Var] = frozenset()


def evaluate(expr: Anf, assignment: Mapping[Var, int]) -> int:
    """Evaluate ``expr`` under a full variable assignment.

    Every variable of the expression must be assigned, even when another
    factor of its term is already zero; a partial assignment raises
    MissingVariableError naming the first missing variable.
    """
    for term in expr.sorted_terms():
        for v in term.sorted_vars():
            if v not in assignment:
                raise MissingVariableError(v)
    value = expr.const
    for term in expr.terms:
        prod = 1
        for v in term.vars:
            prod &= assignment[v] & 1
        value ^= prod
    return value


def xor_merge(expr: Anf, terms: Iterable[Term]) -> Anf:
    """XOR a set of terms into an expression (symmetric difference)."""
    return Anf(expr.terms ^ frozenset(terms), expr.const)


def remap_indices(
    terms: Iterable[Term], register: str, delta: int, modulus: int
) -> frozenset[Term]:
    """Shift every index of every term by ``delta`` modulo ``modulus``.

    All variables must belong to ``register``; terms naming any other
    register raise ForeignVariableError.  The remap is a bijection on
    indices, so term-set cardinality is preserved.
    """
    out = []
    for term in terms:
        moved = []
        for v in term.vars:
            if v.reg != register:
                raise ForeignVariableError(
                    f"term {term} mentions register {v.reg!r}; "
                    f"only {register!r} variables can be remapped"
                )
            moved.append(Var(register, (v.idx + delta) % modulus))
        out.append(Term(frozenset(moved)))
    return frozenset(out)


def analyze(expr: Anf) -> AnfSummary:
    """Term count, maximum degree, per-register index spans and support."""
    ranges: dict[str, tuple[int, int]] = {}
    for v in expr.support():
        lo, hi = ranges.get(v.reg, (v.idx, v.idx))
        ranges[v.reg] = (min(lo, v.idx), max(hi, v.idx))
    max_degree = max((t.degree for t in expr.terms), default=0)
    return AnfSummary(
        term_count=len(expr.terms),
        max_degree=max_degree,
        index_range=ranges,
        support=expr.support(),
    )


def substitute_var(expr: Anf, old: Var, new: Var) -> Anf:
    """Replace one variable with another everywhere in the expression."""
    terms = []
    for term in expr.terms:
        if old in term.vars:
            terms.append(Term((term.vars - {old}) | {new}))
        else:
            terms.append(term)
    # Duplicate terms created by the substitution cancel pairwise.
    merged: set[Term] = set()
    for t in terms:
        if t in merged:
            merged.remove(t)
        else:
            merged.add(t)
    return Anf(frozenset(merged), expr.const)


_FACTOR_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\[(\d+)\]$")


def parse_term(text: str) -> Term:
    """Parse a product like ``b[33]*b[28]*b[21]``."""
    factors = [f.strip() for f in text.split("*")]
    vars_: list[Var] = []
    for f in factors:
        m = _FACTOR_RE.match(f)
        if not m:
            raise ValueError(f"bad product factor {f!r} in {text!r}")
        vars_.append(Var(m.group(1), int(m.group(2))))
    return Term(frozenset(vars_))


def parse_expr(text: str) -> Anf:
    """Parse ``+``-separated products, e.g. ``s[0] + b[0] + b[15]*b[9]``.

    ``+`` is XOR and ``*`` is AND; the literals ``0`` and ``1`` are the
    constants.  Bare names are not accepted here (named outputs are a
    system-document construct, not part of plain expressions).
    """
    terms: set[Term] = set()
    const = 0
    for chunk in text.split("+"):
        chunk = chunk.strip()
        if not chunk:
            raise ValueError(f"empty term in expression {text!r}")
        factors = [f.strip() for f in chunk.split("*")]
        if "0" in factors:
            continue
        factors = [f for f in factors if f != "1"]
        if not factors:
            const ^= 1
            continue
        term = parse_term("*".join(factors))
        if term in terms:
            terms.remove(term)
        else:
            terms.add(term)
    return Anf(frozenset(terms), const)
