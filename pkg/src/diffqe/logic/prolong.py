"""
Prolongation: rewriting formulas to σ-depth at most one.

σ is pushed through sums, products and powers onto variables. A variable v
that occurs under σ^k with k >= 2 gets prolongation variables v_p1 .. v_p(k-1)
standing for σ(v) .. σ^(k-1)(v), tied together by s(v) = v_p1,
s(v_p1) = v_p2 and so on. Free variables keep their prolongations free;
bound variables are quantified together with theirs.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from diffqe.logic.syntax import (
    And,
    Atom,
    Const,
    Exists,
    Forall,
    Formula,
    Implies,
    Neg,
    Not,
    Or,
    Pow,
    Sigma,
    Term,
    Truth,
    Var,
    conjunction,
    exists,
    forall,
    free_vars,
    sigma,
)


def push_sigma(term: Term, power: int = 0, constants: Iterable[str] = ()) -> Term:
    """
    σ^power(term) with σ applied to variables only.

    Rational constants and the names in ``constants`` are fixed by σ.

    Example:
        >>> term_text(push_sigma(parse_term("s(v1*v2 + 1)")))
        's(v1)*s(v2) + 1'
    """
    constants = frozenset(constants)
    return _push(term, power, constants)


def _push(term: Term, power: int, constants: frozenset) -> Term:
    if isinstance(term, Var):
        return term if term.name in constants else sigma(term, power)
    if isinstance(term, Const):
        return term
    if isinstance(term, Sigma):
        return _push(term.arg, power + term.power, constants)
    if isinstance(term, Neg):
        return Neg(_push(term.arg, power, constants))
    if isinstance(term, Pow):
        return Pow(_push(term.base, power, constants), term.exponent)
    return type(term)(_push(term.left, power, constants), _push(term.right, power, constants))


def _term_depths(term: Term, depths: Dict[str, int]):
    if isinstance(term, Sigma):
        depths[term.arg.name] = max(depths.get(term.arg.name, 0), term.power)
    elif isinstance(term, Var):
        depths.setdefault(term.name, 0)
    elif isinstance(term, Neg):
        _term_depths(term.arg, depths)
    elif isinstance(term, Pow):
        _term_depths(term.base, depths)
    elif not isinstance(term, Const):
        _term_depths(term.left, depths)
        _term_depths(term.right, depths)


def _normalise(formula: Formula, constants: frozenset) -> Formula:
    if isinstance(formula, Truth):
        return formula
    if isinstance(formula, Atom):
        return Atom(_push(formula.left, 0, constants), _push(formula.right, 0, constants))
    if isinstance(formula, Not):
        return Not(_normalise(formula.arg, constants))
    if isinstance(formula, (Exists, Forall)):
        return type(formula)(formula.var, _normalise(formula.body, constants))
    return type(formula)(_normalise(formula.left, constants), _normalise(formula.right, constants))


def variable_depths(formula: Formula) -> Dict[str, int]:
    """Largest σ-exponent per variable name in a formula whose σ sits on variables."""
    depths: Dict[str, int] = {}
    stack = [formula]
    while stack:
        node = stack.pop()
        if isinstance(node, Atom):
            _term_depths(node.left, depths)
            _term_depths(node.right, depths)
        elif isinstance(node, Not):
            stack.append(node.arg)
        elif isinstance(node, (Exists, Forall)):
            stack.append(node.body)
        elif isinstance(node, (And, Or, Implies)):
            stack.extend((node.left, node.right))
    return depths


@dataclass(frozen=True)
class Prolongation:
    """
    A formula of σ-depth at most one equivalent to an original formula.

    Attributes:
        formula: The rewritten formula.
        variables: The original free variables, in order.
        added: Per free variable, its prolongation variables σ(v), σ²(v), ...
    """

    formula: Formula
    variables: Tuple[str, ...]
    added: Dict[str, Tuple[str, ...]] = field(default_factory=dict)

    @property
    def ambient(self) -> Tuple[str, ...]:
        """The free variables followed by the added prolongation variables."""
        return self.variables + tuple(p for v in self.variables for p in self.added.get(v, ()))


def _fresh(base: str, count: int, taken: set) -> Tuple[str, ...]:
    names = []
    for j in range(1, count + 1):
        name = f"{base}_p{j}"
        while name in taken:
            name += "_"
        taken.add(name)
        names.append(name)
    return tuple(names)


def _chain(v: str, names: Sequence[str]) -> List[Formula]:
    """s(v) = v_p1, s(v_p1) = v_p2, ..."""
    previous = [v] + list(names[:-1])
    return [Atom(Sigma(Var(a), 1), Var(b)) for a, b in zip(previous, names)]


def _rename(term: Term, table: Dict[str, Tuple[str, ...]]) -> Term:
    if isinstance(term, Sigma):
        names = table.get(term.arg.name)
        if not names:
            return term
        k = len(names) + 1
        if term.power < k:
            return Var(names[term.power - 1])
        return Sigma(Var(names[-1]), term.power - k + 1)
    if isinstance(term, (Var, Const)):
        return term
    if isinstance(term, Neg):
        return Neg(_rename(term.arg, table))
    if isinstance(term, Pow):
        return Pow(_rename(term.base, table), term.exponent)
    return type(term)(_rename(term.left, table), _rename(term.right, table))


def _rewrite(formula: Formula, table: Dict[str, Tuple[str, ...]], taken: set) -> Formula:
    if isinstance(formula, Truth):
        return formula
    if isinstance(formula, Atom):
        return Atom(_rename(formula.left, table), _rename(formula.right, table))
    if isinstance(formula, Not):
        return Not(_rewrite(formula.arg, table, taken))
    if isinstance(formula, (Exists, Forall)):
        v = formula.var
        inner = dict(table)
        k = _free_depth(formula.body, v)
        names = _fresh(v, k - 1, taken) if k >= 2 else ()
        inner[v] = names
        body = _rewrite(formula.body, inner, taken)
        if not names:
            return type(formula)(v, body)
        chain = conjunction(_chain(v, names))
        if isinstance(formula, Exists):
            return exists((v,) + names, conjunction([chain, body]))
        return forall((v,) + names, Implies(chain, body))
    return type(formula)(
        _rewrite(formula.left, table, taken), _rewrite(formula.right, table, taken)
    )


def _all_names(formula: Formula) -> set:
    names = set(variable_depths(formula))
    stack = [formula]
    while stack:
        node = stack.pop()
        if isinstance(node, (Exists, Forall)):
            names.add(node.var)
            stack.append(node.body)
        elif isinstance(node, Not):
            stack.append(node.arg)
        elif isinstance(node, (And, Or, Implies)):
            stack.extend((node.left, node.right))
    return names


def prolong(
    formula: Formula, variables: Optional[Sequence[str]] = None, constants: Iterable[str] = ()
) -> Prolongation:
    """
    Rewrite ``formula`` to σ-depth at most one.

    Args:
        variables: The free variables in order; defaults to the sorted free variables.
        constants: Names fixed by σ, such as the generator of the base field.

    Example:
        >>> to_text(prolong(parse("s(s(v1)) = v1")).formula)
        's(v1) = v1_p1 & s(v1_p1) = v1'
    """
    constants = frozenset(constants)
    normal = _normalise(formula, constants)
    if variables is None:
        variables = sorted(free_vars(normal) - constants)
    variables = tuple(variables)
    taken = _all_names(normal) | set(variables) | set(constants)
    table: Dict[str, Tuple[str, ...]] = {}
    chains: List[Formula] = []
    for v in variables:
        k = _free_depth(normal, v)
        if k >= 2:
            table[v] = _fresh(v, k - 1, taken)
            chains.extend(_chain(v, table[v]))
    body = _rewrite(normal, table, taken)
    rewritten = conjunction(chains + [body]) if chains else body
    return Prolongation(rewritten, variables, {v: names for v, names in table.items()})


def _free_depth(formula: Formula, v: str) -> int:
    """Largest σ-exponent of free occurrences of v."""
    if isinstance(formula, Truth):
        return 0
    if isinstance(formula, Atom):
        depths: Dict[str, int] = {}
        _term_depths(formula.left, depths)
        _term_depths(formula.right, depths)
        return depths.get(v, 0)
    if isinstance(formula, Not):
        return _free_depth(formula.arg, v)
    if isinstance(formula, (Exists, Forall)):
        return 0 if formula.var == v else _free_depth(formula.body, v)
    return max(_free_depth(formula.left, v), _free_depth(formula.right, v))
