"""Canonical program printer.  ``parse(print(parse(text))) == parse(text)``."""

from __future__ import annotations

from .ast import EdbDecl, Program, Rule, UdfDecl


def print_decl(decl: EdbDecl) -> str:
    if decl.attrs is not None:
        return ".decl %s(%s)" % (decl.name, ", ".join(decl.attrs))
    return f".decl {decl.name}/{decl.arity}"


def print_udf(decl: UdfDecl) -> str:
    if decl.is_aggregate:
        suffix = " commutative-associative" if decl.is_commutative_associative else ""
        return f".udf {decl.name} aggregate{suffix}"
    return f".udf {decl.name} {decl.input_arity} {decl.output_arity}"


def print_rule(rule: Rule) -> str:
    return str(rule)


def print_program(program: Program) -> str:
    lines = [print_decl(d) for d in program.edb_decls]
    lines += [print_udf(d) for d in program.udf_decls]
    if lines:
        lines.append("")
    lines += [print_rule(r) for r in program.rules]
    return "\n".join(lines) + "\n"
