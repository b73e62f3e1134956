"""First-order terms, substitutions, and unification.

Terms are the data values of the language: logic variables, atoms,
integers, and compound terms. Substitutions map variable names to terms
and are kept triangular (a binding may mention other bound variables);
``apply`` resolves chains to a fixpoint, which the occurs check keeps
finite.
"""

from __future__ import annotations

from dataclasses import dataclass

# all integer values in the language are signed 64-bit
INT64_MAX = (1 << 63) - 1
INT64_MIN = -(1 << 63)


@dataclass(frozen=True)
class Var:
    """A logic variable, identified by name.

    Machine-generated variables are named _G1, _G2, ... The surface
    syntax only admits lowercase-initial identifiers, so generated names
    can never collide with source names.
    """

    name: str


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class Int:
    value: int


@dataclass(frozen=True)
class Compound:
    functor: str
    args: tuple

    def __post_init__(self):
        if not self.args:
            raise ValueError("compound term needs at least one argument")


Term = Var | Atom | Int | Compound


class Subst:
    """An immutable map from variable names to terms.

    ``bind`` returns a new substitution; existing ones are never
    mutated, so the search engine can restore an old state by holding a
    reference to it.
    """

    __slots__ = ("_map",)

    def __init__(self, bindings=None):
        self._map = dict(bindings) if bindings else {}

    def bind(self, name: str, term: Term) -> "Subst":
        new = Subst()
        new._map.update(self._map)
        new._map[name] = term
        return new

    def walk(self, term: Term) -> Term:
        """Follow variable bindings until an unbound variable or non-variable."""
        while isinstance(term, Var):
            bound = self._map.get(term.name)
            if bound is None:
                return term
            term = bound
        return term

    def mapping(self) -> dict:
        return dict(self._map)

    def __len__(self):
        return len(self._map)

    def __eq__(self, other):
        return isinstance(other, Subst) and self._map == other._map

    def __repr__(self):
        inner = ", ".join(f"{k} -> {format_term(v)}" for k, v in sorted(self._map.items()))
        return f"Subst({{{inner}}})"


EMPTY_SUBST = Subst()


def occurs(var: Var, term: Term, subst: Subst = EMPTY_SUBST) -> bool:
    """True if var appears in term once bindings in subst are resolved."""
    term = subst.walk(term)
    if isinstance(term, Var):
        return term.name == var.name
    if isinstance(term, Compound):
        return any(occurs(var, a, subst) for a in term.args)
    return False


def unify(t1: Term, t2: Term, subst: Subst = EMPTY_SUBST) -> Subst | None:
    """Most general unifier of t1 and t2 under subst, or None.

    Failure is an ordinary outcome, not an error. The occurs check runs
    against resolved terms, so the result stays acyclic and ``apply``
    on it terminates.
    """
    stack = [(t1, t2)]
    s = subst
    while stack:
        a, b = stack.pop()
        a = s.walk(a)
        b = s.walk(b)
        if a == b:
            continue
        if isinstance(a, Var):
            if occurs(a, b, s):
                return None
            s = s.bind(a.name, b)
        elif isinstance(b, Var):
            if occurs(b, a, s):
                return None
            s = s.bind(b.name, a)
        elif isinstance(a, Compound) and isinstance(b, Compound):
            if a.functor != b.functor or len(a.args) != len(b.args):
                return None
            stack.extend(zip(a.args, b.args))
        else:
            return None
    return s


def apply(subst: Subst, term: Term) -> Term:
    """Resolve term under subst all the way down."""
    term = subst.walk(term)
    if isinstance(term, Compound):
        return Compound(term.functor, tuple(apply(subst, a) for a in term.args))
    return term


def free_vars(term: Term, subst: Subst = EMPTY_SUBST) -> set:
    """Variables still unbound in term after resolving through subst."""
    out = set()

    def go(t):
        t = subst.walk(t)
        if isinstance(t, Var):
            out.add(t)
        elif isinstance(t, Compound):
            for a in t.args:
                go(a)

    go(term)
    return out


def is_ground(term: Term, subst: Subst = EMPTY_SUBST) -> bool:
    term = subst.walk(term)
    if isinstance(term, Var):
        return False
    if isinstance(term, Compound):
        return all(is_ground(a, subst) for a in term.args)
    return True


def format_term(term: Term) -> str:
    """Render a term the way the parser reads it back.

    Atoms print bare, integers in decimal, compounds as f(a,b) with no
    spaces. Variables print as their name; the caller decides how to
    show unbound results.
    """
    if isinstance(term, Var):
        return term.name
    if isinstance(term, Atom):
        return term.name
    if isinstance(term, Int):
        return str(term.value)
    if isinstance(term, Compound):
        return f"{term.functor}({','.join(format_term(a) for a in term.args)})"
    raise TypeError(f"not a term: {term!r}")
