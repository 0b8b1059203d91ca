"""
Terms and formulas in the language of difference rings.

Terms are built from variables, rational constants, ``s(...)`` for the
distinguished automorphism, ``+``, ``-``, ``*`` and integer powers. Formulas
are equations between terms closed under ``~ & | ->`` and the quantifiers
``E v.`` and ``A v.``.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Mapping, Union


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))


@dataclass(frozen=True)
class Sigma:
    """σ^power applied to a term."""

    arg: "Term"
    power: int = 1

    def __post_init__(self):
        if self.power < 1:
            raise ValueError(f"σ-exponent must be positive, got {self.power}")


@dataclass(frozen=True)
class Add:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Sub:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Mul:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Neg:
    arg: "Term"


@dataclass(frozen=True)
class Pow:
    base: "Term"
    exponent: int

    def __post_init__(self):
        if self.exponent < 0:
            raise ValueError(f"Negative exponent {self.exponent}")


Term = Union[Var, Const, Sigma, Add, Sub, Mul, Neg, Pow]


@dataclass(frozen=True)
class Truth:
    value: bool


@dataclass(frozen=True)
class Atom:
    """The equation ``left = right``."""

    left: Term
    right: Term


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


Formula = Union[Truth, Atom, Not, And, Or, Implies, Exists, Forall]

TRUE = Truth(True)
FALSE = Truth(False)
ZERO = Const(0)
ONE = Const(1)


def sigma(term: Term, power: int = 1) -> Term:
    """σ^power(term), merging nested applications."""
    if power == 0:
        return term
    if isinstance(term, Sigma):
        return Sigma(term.arg, term.power + power)
    return Sigma(term, power)


def equation(term: Term) -> Atom:
    return Atom(term, ZERO)


def conjunction(parts: Iterable[Formula]) -> Formula:
    """Right-nested conjunction of the parts other than ``true``; ``true`` when none are left."""
    parts = [p for p in parts if p != TRUE]
    if not parts:
        return TRUE
    result = parts[-1]
    for part in reversed(parts[:-1]):
        result = And(part, result)
    return result


def disjunction(parts: Iterable[Formula]) -> Formula:
    """Right-nested disjunction of the parts other than ``false``; ``false`` when none are left."""
    parts = [p for p in parts if p != FALSE]
    if not parts:
        return FALSE
    result = parts[-1]
    for part in reversed(parts[:-1]):
        result = Or(part, result)
    return result


def exists(variables: Iterable[str], body: Formula) -> Formula:
    for v in reversed(list(variables)):
        body = Exists(v, body)
    return body


def forall(variables: Iterable[str], body: Formula) -> Formula:
    for v in reversed(list(variables)):
        body = Forall(v, body)
    return body


def term_vars(term: Term) -> FrozenSet[str]:
    if isinstance(term, Var):
        return frozenset({term.name})
    if isinstance(term, Const):
        return frozenset()
    if isinstance(term, (Sigma, Neg)):
        return term_vars(term.arg)
    if isinstance(term, Pow):
        return term_vars(term.base)
    return term_vars(term.left) | term_vars(term.right)


def free_vars(formula: Formula) -> FrozenSet[str]:
    """Variables occurring free in ``formula``."""
    if isinstance(formula, Truth):
        return frozenset()
    if isinstance(formula, Atom):
        return term_vars(formula.left) | term_vars(formula.right)
    if isinstance(formula, Not):
        return free_vars(formula.arg)
    if isinstance(formula, (Exists, Forall)):
        return free_vars(formula.body) - {formula.var}
    return free_vars(formula.left) | free_vars(formula.right)


def sigma_depth(node) -> int:
    """The largest total σ-exponent along any path of a term or formula."""
    if isinstance(node, (Var, Const, Truth)):
        return 0
    if isinstance(node, Sigma):
        return node.power + sigma_depth(node.arg)
    if isinstance(node, (Neg, Not)):
        return sigma_depth(node.arg)
    if isinstance(node, Pow):
        return sigma_depth(node.base)
    if isinstance(node, (Exists, Forall)):
        return sigma_depth(node.body)
    return max(sigma_depth(node.left), sigma_depth(node.right))


def quantifier_depth(formula: Formula) -> int:
    if isinstance(formula, (Truth, Atom)):
        return 0
    if isinstance(formula, Not):
        return quantifier_depth(formula.arg)
    if isinstance(formula, (Exists, Forall)):
        return 1 + quantifier_depth(formula.body)
    return max(quantifier_depth(formula.left), quantifier_depth(formula.right))


def is_quantifier_free(formula: Formula) -> bool:
    return quantifier_depth(formula) == 0


def substitute_term(term: Term, mapping: Mapping[str, Term]) -> Term:
    """Replace variables of ``term`` by terms."""
    if isinstance(term, Var):
        return mapping.get(term.name, term)
    if isinstance(term, Const):
        return term
    if isinstance(term, Sigma):
        return sigma(substitute_term(term.arg, mapping), term.power)
    if isinstance(term, Neg):
        return Neg(substitute_term(term.arg, mapping))
    if isinstance(term, Pow):
        return Pow(substitute_term(term.base, mapping), term.exponent)
    return type(term)(substitute_term(term.left, mapping), substitute_term(term.right, mapping))


# Printing. Binding strength, loosest first.
_TERM_PREC = {Add: 1, Sub: 1, Mul: 2, Neg: 3, Pow: 4}
_FORMULA_PREC = {Implies: 1, Or: 2, And: 3}
_TERM_SYMBOLS = {Add: " + ", Sub: " - ", Mul: "*"}
_FORMULA_SYMBOLS = {Implies: " -> ", Or: " | ", And: " & "}


def _term_prec(term: Term) -> int:
    return _TERM_PREC.get(type(term), 5)


def _const_text(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def term_text(term: Term) -> str:
    """
    Render a term; the parser reads the result back to the same tree.

    Example:
        >>> term_text(Sub(Sigma(Var("v1")), Pow(Var("v1"), 2)))
        's(v1) - v1^2'
    """
    if isinstance(term, Var):
        return term.name
    if isinstance(term, Const):
        text = _const_text(abs(term.value))
        return f"(-{text})" if term.value < 0 else text
    if isinstance(term, Sigma):
        text = term_text(term.arg)
        for _ in range(term.power):
            text = f"s({text})"
        return text
    if isinstance(term, Neg):
        inner = term_text(term.arg)
        return f"-{inner}" if _term_prec(term.arg) >= 3 else f"-({inner})"
    if isinstance(term, Pow):
        inner = term_text(term.base)
        if _term_prec(term.base) < 5:
            inner = f"({inner})"
        return f"{inner}^{term.exponent}"
    prec = _term_prec(term)
    left, right = term_text(term.left), term_text(term.right)
    if _term_prec(term.left) < prec:
        left = f"({left})"
    if _term_prec(term.right) <= prec:
        right = f"({right})"
    return f"{left}{_TERM_SYMBOLS[type(term)]}{right}"


def _formula_prec(formula: Formula) -> int:
    return _FORMULA_PREC.get(type(formula), 4)


def _open_ended(formula: Formula) -> bool:
    """Whether the printed text ends in a quantifier body that would swallow what follows."""
    if isinstance(formula, (Exists, Forall)):
        return True
    if isinstance(formula, Not):
        return _open_ended(formula.arg)
    if isinstance(formula, (And, Or, Implies)):
        return _open_ended(formula.right)
    return False


def to_text(formula: Formula) -> str:
    """
    Render a formula in the concrete syntax read by :func:`diffqe.logic.parser.parse`.

    Example:
        >>> to_text(Exists("z", Atom(Sub(Mul(Var("z"), Var("z")), Var("v1")), ZERO)))
        'E z. z*z - v1 = 0'
    """
    if isinstance(formula, Truth):
        return "true" if formula.value else "false"
    if isinstance(formula, Atom):
        return f"{term_text(formula.left)} = {term_text(formula.right)}"
    if isinstance(formula, Not):
        inner = to_text(formula.arg)
        return f"~{inner}" if _formula_prec(formula.arg) >= 4 else f"~({inner})"
    if isinstance(formula, Exists):
        return f"E {formula.var}. {to_text(formula.body)}"
    if isinstance(formula, Forall):
        return f"A {formula.var}. {to_text(formula.body)}"
    prec = _formula_prec(formula)
    left, right = to_text(formula.left), to_text(formula.right)
    right_assoc = isinstance(formula, Implies)
    left_prec = _formula_prec(formula.left)
    if left_prec < prec or (right_assoc and left_prec == prec) or _open_ended(formula.left):
        left = f"({left})"
    right_prec = _formula_prec(formula.right)
    if right_prec < prec or (not right_assoc and right_prec == prec):
        right = f"({right})"
    return f"{left}{_FORMULA_SYMBOLS[type(formula)]}{right}"


_TERM_TAGS = {Var: "var", Const: "const", Sigma: "sigma", Add: "add", Sub: "sub", Mul: "mul", Neg: "neg", Pow: "pow"}
_FORMULA_TAGS = {
    Truth: "truth",
    Atom: "eq",
    Not: "not",
    And: "and",
    Or: "or",
    Implies: "implies",
    Exists: "exists",
    Forall: "forall",
}


def to_json(node) -> Dict:
    """JSON tree of a term or formula, tagged by ``op``."""
    tag = _TERM_TAGS.get(type(node)) or _FORMULA_TAGS[type(node)]
    if isinstance(node, Var):
        return {"op": tag, "name": node.name}
    if isinstance(node, Const):
        return {"op": tag, "value": _const_text(node.value)}
    if isinstance(node, Truth):
        return {"op": tag, "value": node.value}
    if isinstance(node, Sigma):
        return {"op": tag, "power": node.power, "arg": to_json(node.arg)}
    if isinstance(node, (Neg, Not)):
        return {"op": tag, "arg": to_json(node.arg)}
    if isinstance(node, Pow):
        return {"op": tag, "exponent": node.exponent, "base": to_json(node.base)}
    if isinstance(node, (Exists, Forall)):
        return {"op": tag, "var": node.var, "body": to_json(node.body)}
    return {"op": tag, "args": [to_json(node.left), to_json(node.right)]}


def from_json(data: Mapping):
    """Inverse of :func:`to_json`."""
    op = data["op"]
    if op == "var":
        return Var(data["name"])
    if op == "const":
        return Const(Fraction(data["value"]))
    if op == "truth":
        return Truth(bool(data["value"]))
    if op == "sigma":
        return Sigma(from_json(data["arg"]), int(data.get("power", 1)))
    if op == "neg":
        return Neg(from_json(data["arg"]))
    if op == "not":
        return Not(from_json(data["arg"]))
    if op == "pow":
        return Pow(from_json(data["base"]), int(data["exponent"]))
    if op in ("exists", "forall"):
        cls = Exists if op == "exists" else Forall
        return cls(data["var"], from_json(data["body"]))
    binary = {"add": Add, "sub": Sub, "mul": Mul, "eq": Atom, "and": And, "or": Or, "implies": Implies}
    if op not in binary:
        raise ValueError(f"Unknown node tag: {op}")
    left, right = (from_json(a) for a in data["args"])
    return binary[op](left, right)


def atoms(formula: Formula) -> List[Atom]:
    if isinstance(formula, Atom):
        return [formula]
    if isinstance(formula, Truth):
        return []
    if isinstance(formula, Not):
        return atoms(formula.arg)
    if isinstance(formula, (Exists, Forall)):
        return atoms(formula.body)
    return atoms(formula.left) + atoms(formula.right)
