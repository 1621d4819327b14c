"""Parser for the Datalog dialect.

Program text layout:

* ``%`` starts a line comment.
* Header lines declare the extensional schema and UDFs::

      .decl data(id, datum)            % or: .decl data/2
      .udf init_vertex 2 1             % function: 2 inputs, 1 output
      .udf combine aggregate commutative-associative

* Rules are Prolog-style, optionally labelled, terminated by ``.``::

      L7: vertex(J+1, Id, State) :- superstep(J, Id, State, _), State != null.

Lexical conventions: identifiers starting with an upper-case letter are
variables, except all-caps identifiers of length >= 2 (``ACTIVATION_MSG``)
which denote opaque symbolic constants.  ``_`` is a wildcard, ``null`` the
null constant, ``{...}`` a set-valued body term, ``(...)`` a tuple term, and
``name<Var>`` a head aggregate.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

from .ast import (
    COMPARISON,
    COMPARISON_OPS,
    EXTENSIONAL,
    FUNCTION,
    INTENSIONAL,
    Aggregate,
    Atom,
    Constant,
    EdbDecl,
    Program,
    Rule,
    SetOf,
    Successor,
    Symbol,
    Term,
    TupleOf,
    UdfDecl,
    Variable,
    Wildcard,
)


class DatalogSyntaxError(Exception):
    def __init__(self, message: str, line: int, col: int = 0):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class _Token:
    kind: str  # IDENT NUMBER STRING PUNCT EOF
    value: str
    line: int
    col: int


_PUNCT = ("!=", "==", "<=", ">=", ":-", "(", ")", "{", "}", ",", ".", "<", ">", "!", "+", "=", ":")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER_RE = re.compile(r"-?\d+(\.\d+)?([eE][+-]?\d+)?")


def _strip_comment(line: str) -> str:
    out = []
    in_str = False
    for ch in line:
        if ch == '"':
            in_str = not in_str
        if ch == "%" and not in_str:
            break
        out.append(ch)
    return "".join(out)


def _tokenize(lines: list[tuple[int, str]]) -> list[_Token]:
    tokens: list[_Token] = []
    for lineno, text in lines:
        pos = 0
        n = len(text)
        while pos < n:
            ch = text[pos]
            if ch.isspace():
                pos += 1
                continue
            if ch == '"':
                end = text.find('"', pos + 1)
                if end < 0:
                    raise DatalogSyntaxError("unterminated string", lineno, pos + 1)
                tokens.append(_Token("STRING", text[pos + 1 : end], lineno, pos + 1))
                pos = end + 1
                continue
            m = _NUMBER_RE.match(text, pos)
            if m and (ch.isdigit() or (ch == "-" and pos + 1 < n and text[pos + 1].isdigit())):
                tokens.append(_Token("NUMBER", m.group(0), lineno, pos + 1))
                pos = m.end()
                continue
            m = _IDENT_RE.match(text, pos)
            if m:
                tokens.append(_Token("IDENT", m.group(0), lineno, pos + 1))
                pos = m.end()
                continue
            for p in _PUNCT:
                if text.startswith(p, pos):
                    tokens.append(_Token("PUNCT", p, lineno, pos + 1))
                    pos += len(p)
                    break
            else:
                raise DatalogSyntaxError(f"unexpected character {ch!r}", lineno, pos + 1)
    last_line = lines[-1][0] if lines else 1
    tokens.append(_Token("EOF", "", last_line, 0))
    return tokens


def _is_symbolic_constant(name: str) -> bool:
    # ACTIVATION_MSG style: all-caps, length >= 2.  Single capitals (J, M, S)
    # stay variables, as do mixed-case names (NewM, InMsgs).
    return len(name) >= 2 and re.fullmatch(r"[A-Z][A-Z0-9_]+", name) is not None


class _RuleParser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self, ahead: int = 0) -> _Token:
        i = min(self.pos + ahead, len(self.tokens) - 1)
        return self.tokens[i]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def expect(self, value: str) -> _Token:
        tok = self.next()
        if tok.value != value:
            raise DatalogSyntaxError(f"expected {value!r}, found {tok.value or 'end of input'!r}", tok.line, tok.col)
        return tok

    def at_end(self) -> bool:
        return self.peek().kind == "EOF"

    def parse_rules(self) -> list[Rule]:
        rules = []
        while not self.at_end():
            rules.append(self.parse_rule())
        return rules

    def parse_rule(self) -> Rule:
        label = None
        start = self.peek()
        if (
            self.peek().kind == "IDENT"
            and self.peek(1).value == ":"
        ):
            label = self.next().value
            self.next()  # ':'
        head = self.parse_atom()
        body: list[Atom] = []
        tok = self.next()
        if tok.value == ":-":
            while True:
                body.append(self.parse_body_atom())
                tok = self.next()
                if tok.value == ",":
                    continue
                if tok.value == ".":
                    break
                raise DatalogSyntaxError(
                    f"expected ',' or '.' after body atom, found {tok.value or 'end of input'!r}",
                    tok.line,
                    tok.col,
                )
        elif tok.value != ".":
            raise DatalogSyntaxError(
                f"expected ':-' or '.' after rule head, found {tok.value or 'end of input'!r}", tok.line, tok.col
            )
        return Rule(head=head, body=tuple(body), label=label, line=start.line)

    def parse_body_atom(self) -> Atom:
        if self.peek().value == "!":
            self.next()
            atom = self.parse_atom()
            return replace(atom, negated=True)
        # relational/function atom `name(...)`, or infix comparison `term op term`
        if self.peek().kind == "IDENT" and self.peek(1).value == "(":
            return self.parse_atom()
        lhs = self.parse_term()
        op = self.next()
        if op.value not in COMPARISON_OPS:
            raise DatalogSyntaxError(f"expected comparison operator, found {op.value!r}", op.line, op.col)
        rhs = self.parse_term()
        return Atom(predicate=op.value, args=(lhs, rhs), role=COMPARISON)

    def parse_atom(self) -> Atom:
        name_tok = self.next()
        if name_tok.kind != "IDENT":
            raise DatalogSyntaxError(f"expected predicate name, found {name_tok.value!r}", name_tok.line, name_tok.col)
        self.expect("(")
        args: list[Term] = []
        if self.peek().value != ")":
            while True:
                args.append(self.parse_term())
                tok = self.next()
                if tok.value == ")":
                    break
                if tok.value != ",":
                    raise DatalogSyntaxError(
                        f"expected ',' or ')' in argument list, found {tok.value or 'end of input'!r}",
                        tok.line,
                        tok.col,
                    )
        else:
            self.next()
        return Atom(predicate=name_tok.value, args=tuple(args))

    def parse_term(self) -> Term:
        tok = self.next()
        if tok.kind == "NUMBER":
            text = tok.value
            if "." in text or "e" in text or "E" in text:
                return Constant(float(text))
            return Constant(int(text))
        if tok.kind == "STRING":
            return Constant(tok.value)
        if tok.value == "{":
            pattern = self.parse_term()
            self.expect("}")
            return SetOf(pattern)
        if tok.value == "(":
            items = [self.parse_term()]
            while True:
                nxt = self.next()
                if nxt.value == ")":
                    break
                if nxt.value != ",":
                    raise DatalogSyntaxError(f"expected ',' or ')' in tuple, found {nxt.value!r}", nxt.line, nxt.col)
                items.append(self.parse_term())
            return TupleOf(tuple(items))
        if tok.kind == "IDENT":
            name = tok.value
            if name == "_":
                return Wildcard()
            if name == "null":
                return Constant(None)
            if name == "true":
                return Constant(True)
            if name == "false":
                return Constant(False)
            # aggregate `func<Var>`
            if self.peek().value == "<" and self.peek(1).kind == "IDENT" and self.peek(2).value == ">":
                self.next()
                over = self.next().value
                self.next()
                return Aggregate(func=name, over=over)
            if name[0].isupper() and not _is_symbolic_constant(name):
                if self.peek().value == "+":
                    self.next()
                    amount = self.next()
                    if amount.value != "1":
                        raise DatalogSyntaxError("only +1 temporal successor is supported", amount.line, amount.col)
                    return Successor(name)
                return Variable(name)
            if _is_symbolic_constant(name):
                return Constant(Symbol(name))
            return Constant(Symbol(name))  # lower-case identifier constant
        raise DatalogSyntaxError(f"expected a term, found {tok.value or 'end of input'!r}", tok.line, tok.col)


_DECL_RE = re.compile(r"^\.decl\s+(\w+)\s*(?:/\s*(\d+)|\(([^)]*)\))\s*\.?\s*$")
_UDF_FN_RE = re.compile(r"^\.udf\s+(\w+)\s+(\d+)\s+(\d+)\s*\.?\s*$")
_UDF_AGG_RE = re.compile(r"^\.udf\s+(\w+)\s+aggregate(\s+commutative-associative)?\s*\.?\s*$")


def _parse_directive(line: str, lineno: int) -> EdbDecl | UdfDecl:
    m = _DECL_RE.match(line)
    if m:
        name = m.group(1)
        if m.group(2) is not None:
            return EdbDecl(name=name, arity=int(m.group(2)))
        attrs = tuple(a.strip() for a in m.group(3).split(",") if a.strip())
        return EdbDecl(name=name, arity=len(attrs), attrs=attrs)
    m = _UDF_FN_RE.match(line)
    if m:
        return UdfDecl(name=m.group(1), input_arity=int(m.group(2)), output_arity=int(m.group(3)))
    m = _UDF_AGG_RE.match(line)
    if m:
        return UdfDecl(
            name=m.group(1),
            input_arity=1,
            output_arity=1,
            is_aggregate=True,
            is_commutative_associative=bool(m.group(2)),
        )
    raise DatalogSyntaxError(f"malformed directive: {line.strip()!r}", lineno, 1)


def parse_program(text: str) -> Program:
    """Parse source text into an analyzed Program (roles and temporal info set)."""
    edb: list[EdbDecl] = []
    udf: list[UdfDecl] = []
    rule_lines: list[tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith(".decl") or stripped.startswith(".udf"):
            decl = _parse_directive(stripped, lineno)
            if isinstance(decl, EdbDecl):
                edb.append(decl)
            else:
                udf.append(decl)
        else:
            rule_lines.append((lineno, line))

    tokens = _tokenize(rule_lines)
    rules = _RuleParser(tokens).parse_rules()
    program = Program(rules=tuple(rules), edb_decls=tuple(edb), udf_decls=tuple(udf))
    return analyze(program)


def analyze(program: Program) -> Program:
    """Assign atom roles and detect recursive/temporal predicates."""
    idb = {r.head.predicate for r in program.rules}
    edb_names = {d.name for d in program.edb_decls}
    udf_names = {d.name for d in program.udf_decls if not d.is_aggregate}

    def role_of(pred: str) -> str:
        if pred in udf_names:
            return FUNCTION
        if pred in idb:
            return INTENSIONAL
        return EXTENSIONAL

    recursive = _recursive_predicates(program, idb, udf_names)
    temporal = _temporal_predicates(program, recursive)

    new_rules = []
    for rule in program.rules:
        head = replace(rule.head, role=INTENSIONAL)
        body = tuple(
            a if a.is_comparison else replace(a, role=role_of(a.predicate))
            for a in rule.body
        )
        tvar, offset = _rule_temporal(head, body, temporal)
        new_rules.append(replace(rule, head=head, body=body, temporal_var=tvar, head_offset=offset))
    return replace(
        program,
        rules=tuple(new_rules),
        recursive_predicates=frozenset(recursive),
        temporal_predicates=frozenset(temporal),
    )


def _recursive_predicates(program: Program, idb: set[str], udf_names: set[str]) -> set[str]:
    edges: dict[str, set[str]] = {p: set() for p in idb}
    for rule in program.rules:
        for atom in rule.body:
            if atom.is_comparison or atom.predicate in udf_names:
                continue
            if atom.predicate in idb:
                edges.setdefault(atom.predicate, set()).add(rule.head.predicate)

    # predicates on any directed cycle (including self-loops)
    recursive: set[str] = set()
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: dict[str, bool] = {}
    stack: list[str] = []
    counter = [0]

    def strongconnect(v: str) -> None:
        work = [(v, iter(sorted(edges.get(v, ()))))]
        index[v] = low[v] = counter[0]
        counter[0] += 1
        stack.append(v)
        on_stack[v] = True
        while work:
            node, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, iter(sorted(edges.get(w, ())))))
                    advanced = True
                    break
                elif on_stack.get(w):
                    low[node] = min(low[node], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                scc = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    scc.append(w)
                    if w == node:
                        break
                if len(scc) > 1 or node in edges.get(node, ()):
                    recursive.update(scc)

    for v in sorted(edges):
        if v not in index:
            strongconnect(v)
    return recursive


def _temporal_predicates(program: Program, recursive: set[str]) -> set[str]:
    # Seed with recursive predicates whose first argument is ever an integer
    # constant or J+1, then propagate through shared first-argument variables.
    temporal: set[str] = set()
    occurrences: list[tuple[str, Term]] = []
    for rule in program.rules:
        for atom in (rule.head, *rule.body):
            if atom.is_comparison or atom.predicate not in recursive or not atom.args:
                continue
            occurrences.append((atom.predicate, atom.args[0]))
            first = atom.args[0]
            if isinstance(first, Successor) or (isinstance(first, Constant) and isinstance(first.value, int)):
                temporal.add(atom.predicate)

    changed = True
    while changed:
        changed = False
        for rule in program.rules:
            tvars: set[str] = set()
            for atom in (rule.head, *rule.body):
                if atom.is_comparison or not atom.args:
                    continue
                if atom.predicate in temporal:
                    first = atom.args[0]
                    if isinstance(first, Variable):
                        tvars.add(first.name)
                    elif isinstance(first, Successor):
                        tvars.add(first.var)
            if not tvars:
                continue
            for atom in (rule.head, *rule.body):
                if atom.is_comparison or atom.predicate not in recursive or not atom.args:
                    continue
                if atom.predicate in temporal:
                    continue
                first = atom.args[0]
                if isinstance(first, Variable) and first.name in tvars:
                    temporal.add(atom.predicate)
                    changed = True
    return temporal


def _rule_temporal(head: Atom, body: tuple[Atom, ...], temporal: set[str]) -> tuple[str | None, int | None]:
    tvars: set[str] = set()
    for atom in (head, *body):
        if atom.is_comparison or atom.predicate not in temporal or not atom.args:
            continue
        first = atom.args[0]
        if isinstance(first, Variable):
            tvars.add(first.name)
        elif isinstance(first, Successor):
            tvars.add(first.var)
    tvar = tvars.pop() if len(tvars) == 1 else None

    offset: int | None = None
    if head.predicate in temporal and head.args:
        first = head.args[0]
        if isinstance(first, Successor):
            offset = 1
        elif isinstance(first, Variable):
            offset = 0
    return tvar, offset
