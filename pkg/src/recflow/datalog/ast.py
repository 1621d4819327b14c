"""AST for the recursive-Datalog dialect with temporal arguments.

Programs consist of ``.decl``/``.udf`` header lines followed by rules.
Recursive predicates carry a distinguished temporal argument in their first
position (an iteration counter); heads may aggregate one attribute with
``name<Var>``.  Terms, atoms and rules are immutable; the analysis fields
(atom roles, recursive/temporal predicate sets, per-rule temporal variable)
are filled in by the parser after the syntactic pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Union

# Atom roles.
EXTENSIONAL = "extensional"
INTENSIONAL = "intensional"
FUNCTION = "function"
COMPARISON = "comparison"

COMPARISON_OPS = ("!=", "==", "<", "<=", ">", ">=")

#: aggregate functions usable in heads without a .udf declaration
BUILTIN_AGGREGATES = ("max", "min", "sum", "count")


@dataclass(frozen=True)
class Variable:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Symbol:
    """Named opaque constant (all-caps identifiers such as ACTIVATION_MSG)."""

    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Constant:
    value: object  # int | float | str | bool | None | Symbol

    def __str__(self) -> str:
        v = self.value
        if v is None:
            return "null"
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, str):
            return '"%s"' % v
        return str(v)


@dataclass(frozen=True)
class Wildcard:
    def __str__(self) -> str:
        return "_"


@dataclass(frozen=True)
class Successor:
    """Temporal successor ``J+1``; only legal form of temporal arithmetic."""

    var: str

    def __str__(self) -> str:
        return f"{self.var}+1"


@dataclass(frozen=True)
class TupleOf:
    items: tuple["Term", ...]

    def __str__(self) -> str:
        return "(%s)" % ", ".join(str(t) for t in self.items)


@dataclass(frozen=True)
class SetOf:
    """Set-valued body term ``{pattern}``: binds the pattern to each member."""

    pattern: "Term"

    def __str__(self) -> str:
        return "{%s}" % self.pattern


@dataclass(frozen=True)
class Aggregate:
    """Head aggregate ``func<Var>``."""

    func: str
    over: str

    def __str__(self) -> str:
        return f"{self.func}<{self.over}>"


Term = Union[Variable, Constant, Wildcard, Successor, TupleOf, SetOf, Aggregate]


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple[Term, ...]
    negated: bool = False
    role: str = EXTENSIONAL

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def is_comparison(self) -> bool:
        return self.role == COMPARISON

    def variables(self) -> set[str]:
        out: set[str] = set()
        for arg in self.args:
            _collect_vars(arg, out)
        return out

    def __str__(self) -> str:
        if self.is_comparison:
            return f"{self.args[0]} {self.predicate} {self.args[1]}"
        body = "%s(%s)" % (self.predicate, ", ".join(str(a) for a in self.args))
        return ("!" + body) if self.negated else body


def _collect_vars(term: Term, out: set[str]) -> None:
    if isinstance(term, Variable):
        out.add(term.name)
    elif isinstance(term, Successor):
        out.add(term.var)
    elif isinstance(term, Aggregate):
        out.add(term.over)
    elif isinstance(term, TupleOf):
        for item in term.items:
            _collect_vars(item, out)
    elif isinstance(term, SetOf):
        _collect_vars(term.pattern, out)


@dataclass(frozen=True)
class HeadAggregate:
    """View of a rule head's aggregation: group-by terms and the aggregate."""

    group_by: tuple[Term, ...]
    name: str
    over: str
    position: int


@dataclass(frozen=True)
class Rule:
    head: Atom
    body: tuple[Atom, ...]
    label: str | None = None
    line: int = 0
    # analysis results (parser fills these in)
    temporal_var: str | None = None
    head_offset: int | None = None  # 0 or 1 when the head carries Var / Var+1

    def head_aggregate(self) -> HeadAggregate | None:
        for i, arg in enumerate(self.head.args):
            if isinstance(arg, Aggregate):
                group = tuple(a for j, a in enumerate(self.head.args) if j != i)
                return HeadAggregate(group, arg.func, arg.over, i)
        return None

    @property
    def name(self) -> str:
        return self.label if self.label else f"rule@{self.line}"

    def __str__(self) -> str:
        prefix = f"{self.label}: " if self.label else ""
        if not self.body:
            return f"{prefix}{self.head}."
        return "%s%s :- %s." % (prefix, self.head, ", ".join(str(a) for a in self.body))


@dataclass(frozen=True)
class EdbDecl:
    name: str
    arity: int
    attrs: tuple[str, ...] | None = None


@dataclass(frozen=True)
class UdfDecl:
    name: str
    input_arity: int
    output_arity: int
    is_aggregate: bool = False
    is_commutative_associative: bool = False


@dataclass(frozen=True)
class Program:
    rules: tuple[Rule, ...] = ()
    edb_decls: tuple[EdbDecl, ...] = ()
    udf_decls: tuple[UdfDecl, ...] = ()
    # analysis results
    recursive_predicates: frozenset[str] = field(default_factory=frozenset)
    temporal_predicates: frozenset[str] = field(default_factory=frozenset)

    @property
    def idb_predicates(self) -> frozenset[str]:
        return frozenset(r.head.predicate for r in self.rules)

    def edb(self, name: str) -> EdbDecl | None:
        for d in self.edb_decls:
            if d.name == name:
                return d
        return None

    def udf(self, name: str) -> UdfDecl | None:
        for d in self.udf_decls:
            if d.name == name:
                return d
        return None

    def aggregate_names(self) -> frozenset[str]:
        declared = frozenset(d.name for d in self.udf_decls if d.is_aggregate)
        return declared | frozenset(BUILTIN_AGGREGATES)

    def rules_for(self, predicate: str) -> tuple[Rule, ...]:
        return tuple(r for r in self.rules if r.head.predicate == predicate)

    def rule_by_label(self, label: str) -> Rule:
        for r in self.rules:
            if r.label == label:
                return r
        raise KeyError(label)

    def with_rules(self, rules: tuple[Rule, ...]) -> "Program":
        return replace(self, rules=rules)


def term_is_temporal_zero(term: Term) -> bool:
    return isinstance(term, Constant) and term.value == 0


def temporal_arg_of(atom: Atom, program: Program) -> Term | None:
    """First argument of a temporal recursive predicate occurrence, else None."""
    if atom.predicate in program.temporal_predicates and atom.args:
        return atom.args[0]
    return None
