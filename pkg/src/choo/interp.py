"""Execution engine: depth-first backtracking search over program states.

A program state is a store (name to ground term), a substitution over
logic variables, and the stack of pending choices. The solver walks the
goal structure left to right, trying alternatives in source order and
undoing state changes through a trail when an alternative is exhausted.
Solutions stream out lazily; asking for the first one costs only the
search up to it.

Failure (a condition that does not hold, an empty choice set, a store
read of an unset name) is an ordinary outcome that triggers
backtracking. Runtime errors are different: arithmetic on an unbound
logic variable or a non-integer, overflow past signed 64-bit, division
by zero, bad builtin arguments, and calls to undefined procedures all
raise EvalError and abort the search.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import Iterator

from .derivation import DerivationNode
from .syntax import (
    Assign,
    BinOp,
    BoundedChoose,
    Call,
    Choose,
    Compare,
    Enum,
    FunCall,
    IntLit,
    Range,
    Seq,
    SourceProgram,
    TermLit,
    VarRef,
    format_goal,
    subst_goal,
)
from .terms import (
    INT64_MAX,
    INT64_MIN,
    EMPTY_SUBST,
    Int,
    Var,
    apply,
    format_term,
    free_vars,
    is_ground,
    unify,
)


class EvalError(Exception):
    """Runtime fault that aborts the search (distinct from failure)."""


class UndefinedProcedure(EvalError):
    pass


class BudgetExhausted(Exception):
    """Search exceeded its depth or step budget; neither success nor failure."""

    def __init__(self, what: str):
        super().__init__(what)
        self.what = what  # "depth" or "steps"


@dataclass(frozen=True)
class SearchBudget:
    max_depth: int = 10_000
    max_steps: int = 1_000_000

    def __post_init__(self):
        if self.max_depth < 1 or self.max_steps < 1:
            raise ValueError("budget limits must be at least 1")


class _Unconstrained:
    """Witness value of a chosen variable that no condition ever bound."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "_"


UNCONSTRAINED = _Unconstrained()


@dataclass(frozen=True)
class Outcome:
    """One solution: the chosen witnesses in dynamic order, then the store."""

    witnesses: tuple  # tuple[(name, Term | UNCONSTRAINED), ...]
    store: dict  # name -> ground Term


_MISSING = object()


class ProgramState:
    """Mutable search state with an undo trail.

    The trail records the previous value of every store slot and every
    substitution update; undo_to(mark) rolls back to any earlier point.
    Substitutions are immutable, so restoring one is holding the old
    reference.
    """

    def __init__(self, clauses=()):
        self.clauses = tuple(clauses)
        self.store = {}
        self.subst = EMPTY_SUBST
        self.trail = []
        self.choices = []  # [(source name, chosen term)], innermost last
        self._fresh = 0

    def fresh_var(self) -> Var:
        self._fresh += 1
        return Var(f"_G{self._fresh}")

    def mark(self) -> int:
        return len(self.trail)

    def set_store(self, name, value):
        self.trail.append(("store", name, self.store.get(name, _MISSING)))
        self.store[name] = value

    def set_subst(self, subst):
        self.trail.append(("subst", self.subst, None))
        self.subst = subst

    def undo_to(self, mark: int):
        while len(self.trail) > mark:
            kind, a, b = self.trail.pop()
            if kind == "store":
                if b is _MISSING:
                    self.store.pop(a, None)
                else:
                    self.store[a] = b
            else:
                self.subst = a

    def snapshot(self):
        """Observable state, for checking that failed searches change nothing."""
        return (dict(self.store), self.subst, len(self.trail), list(self.choices))


# --- expression evaluation ---------------------------------------------------

def _arith(op: str, a: int, b: int) -> int:
    if op == "+":
        r = a + b
    elif op == "-":
        r = a - b
    elif op == "*":
        r = a * b
    else:
        if b == 0:
            raise EvalError("division by zero")
        # truncate toward zero, unlike Python's floor division
        r = -(-a // b) if (a < 0) != (b < 0) else a // b
    if not (INT64_MIN <= r <= INT64_MAX):
        raise EvalError("integer overflow")
    return r


def fib(n: int) -> int:
    """fib(1) = 0, fib(2) = 1, each later value the sum of the previous two."""
    if n < 1:
        raise EvalError(f"fib needs a positive argument, got {n}")
    if n >= 94:  # fib(93) = 7540113804746346429 is the last value in 64 bits
        raise EvalError("integer overflow in fib")
    a, b = 0, 1
    for _ in range(n - 1):
        a, b = b, a + b
    return a


def fact(n: int) -> int:
    if n < 0:
        raise EvalError(f"fact needs a non-negative argument, got {n}")
    if n > 20:  # 21! exceeds signed 64-bit
        raise EvalError("integer overflow in fact")
    r = 1
    for i in range(2, n + 1):
        r *= i
    return r


def eval_int(store, subst, expr) -> int | None:
    """Ground integer value of expr, or None when a store read is unset.

    Raises EvalError when a subterm is an unbound logic variable or a
    non-integer: arithmetic has no way to proceed on those, whereas an
    unset store name is ordinary failure.
    """
    if isinstance(expr, IntLit):
        return expr.value
    if isinstance(expr, VarRef):
        value = store.get(expr.name)
        if value is None:
            return None
        if not isinstance(value, Int):
            raise EvalError(
                f"store variable '{expr.name}' holds {format_term(value)}, not an integer"
            )
        return value.value
    if isinstance(expr, TermLit):
        t = apply(subst, expr.term)
        if isinstance(t, Int):
            return t.value
        if isinstance(t, Var):
            raise EvalError(f"unbound variable '{t.name}' used in arithmetic")
        raise EvalError(f"{format_term(t)} is not an integer")
    if isinstance(expr, BinOp):
        a = eval_int(store, subst, expr.left)
        if a is None:
            return None
        b = eval_int(store, subst, expr.right)
        if b is None:
            return None
        return _arith(expr.op, a, b)
    if isinstance(expr, FunCall):
        n = eval_int(store, subst, expr.arg)
        if n is None:
            return None
        return fib(n) if expr.name == "fib" else fact(n)
    raise TypeError(f"not an expression: {expr!r}")


def eval_operand(store, subst, expr):
    """Term value of one side of ==, or None on failure.

    Logic variables may stay unbound here; unification decides what to
    do with them. Arithmetic subexpressions still need ground integers.
    """
    if isinstance(expr, IntLit):
        return Int(expr.value)
    if isinstance(expr, VarRef):
        return store.get(expr.name)
    if isinstance(expr, TermLit):
        return apply(subst, expr.term)
    n = eval_int(store, subst, expr)
    return None if n is None else Int(n)


def eval_store_value(store, subst, expr):
    """Value for an assignment: like an operand, but it must be ground."""
    value = eval_operand(store, subst, expr)
    if value is None:
        return None
    if not is_ground(value):
        names = ", ".join(sorted(v.name for v in free_vars(value)))
        raise EvalError(f"assigned value is not ground (unbound: {names})")
    return value


# --- the solver ---------------------------------------------------------------

def _concl(goal) -> str:
    return f"ex(P, {format_goal(goal)}, P')"


class Solver:
    """Depth-first search; solve() yields one DerivationNode per solution.

    Between solutions, and after exhaustion, the state is back to what
    the caller saw: every case undoes its own effects in a finally
    block, so abandoning the iterator mid-stream is also safe.
    """

    def __init__(self, state: ProgramState, budget: SearchBudget | None = None, on_rule=None):
        self.state = state
        self.budget = budget or SearchBudget()
        self.steps = 0
        self.on_rule = on_rule  # trace hook: called with (rule, goal) per attempt

    def _tick(self, rule: int, goal):
        self.steps += 1
        if self.steps > self.budget.max_steps:
            raise BudgetExhausted("steps")
        if self.on_rule is not None:
            self.on_rule(rule, goal)

    def solve(self, goal, depth: int = 1) -> Iterator[DerivationNode]:
        if depth > self.budget.max_depth:
            raise BudgetExhausted("depth")
        if isinstance(goal, Seq):
            yield from self._solve_seq(goal, depth)
        elif isinstance(goal, Compare):
            yield from self._solve_compare(goal, depth)
        elif isinstance(goal, Assign):
            yield from self._solve_assign(goal, depth)
        elif isinstance(goal, Choose):
            yield from self._solve_choose(goal, depth)
        elif isinstance(goal, BoundedChoose):
            yield from self._solve_bounded(goal, depth)
        elif isinstance(goal, Call):
            yield from self._solve_call(goal, depth)
        else:
            raise TypeError(f"not a goal: {goal!r}")

    def _solve_seq(self, goal, depth):
        self._tick(6, goal)
        for left in self.solve(goal.first, depth + 1):
            for right in self.solve(goal.second, depth + 1):
                yield DerivationNode(6, _concl(goal), (left, right))

    def _solve_compare(self, goal, depth):
        self._tick(4, goal)
        st = self.state
        mark = st.mark()
        try:
            if self._condition_holds(goal):
                yield DerivationNode(4, _concl(goal), ())
        finally:
            st.undo_to(mark)

    def _condition_holds(self, goal) -> bool:
        st = self.state
        if goal.op == "==":
            lhs = eval_operand(st.store, st.subst, goal.lhs)
            if lhs is None:
                return False
            rhs = eval_operand(st.store, st.subst, goal.rhs)
            if rhs is None:
                return False
            unified = unify(lhs, rhs, st.subst)
            if unified is None:
                return False
            st.set_subst(unified)
            return True
        a = eval_int(st.store, st.subst, goal.lhs)
        if a is None:
            return False
        b = eval_int(st.store, st.subst, goal.rhs)
        if b is None:
            return False
        if goal.op == "!=":
            return a != b
        if goal.op == "<":
            return a < b
        if goal.op == "<=":
            return a <= b
        if goal.op == ">":
            return a > b
        return a >= b

    def _solve_assign(self, goal, depth):
        self._tick(5, goal)
        st = self.state
        value = eval_store_value(st.store, st.subst, goal.expr)
        if value is None:
            return
        mark = st.mark()
        try:
            st.set_store(goal.target, value)
            yield DerivationNode(5, _concl(goal), ())
        finally:
            st.undo_to(mark)

    def _solve_choose(self, goal, depth):
        # pick a fresh variable and let unification discover its value;
        # if nothing ever binds it, the witness reports UNCONSTRAINED
        self._tick(7, goal)
        st = self.state
        fresh = st.fresh_var()
        body = subst_goal(goal.body, goal.var, fresh)
        st.choices.append((goal.var, fresh))
        try:
            for child in self.solve(body, depth + 1):
                yield DerivationNode(7, _concl(goal), (child,))
        finally:
            st.choices.pop()

    def _solve_bounded(self, goal, depth):
        self._tick(8, goal)
        st = self.state
        for element in self._set_elements(goal.cset):
            self._tick(8, goal)
            body = subst_goal(goal.body, goal.var, element)
            st.choices.append((goal.var, element))
            try:
                for child in self.solve(body, depth + 1):
                    yield DerivationNode(8, _concl(goal), (child,))
            finally:
                st.choices.pop()

    def _set_elements(self, cset):
        if isinstance(cset, Range):
            return (Int(i) for i in range(cset.lo, cset.hi + 1))
        # written order, structural duplicates dropped after resolving
        resolved = []
        for e in cset.elements:
            r = apply(self.state.subst, e)
            if r not in resolved:
                resolved.append(r)
        return resolved

    def _solve_call(self, goal, depth):
        self._tick(3, goal)
        st = self.state
        matching = [
            c for c in st.clauses
            if c.name == goal.name and len(c.params) == len(goal.args)
        ]
        if not matching:
            raise UndefinedProcedure(f"no clause for {goal.name}/{len(goal.args)}")
        for clause in matching:
            self._tick(3, goal)
            mark = st.mark()
            try:
                subst = st.subst
                body = clause.body
                for param, arg in zip(clause.params, goal.args):
                    fresh = st.fresh_var()
                    subst = unify(fresh, arg, subst)  # fresh var: cannot fail
                    body = subst_goal(body, param, fresh)
                st.set_subst(subst)
                if self.on_rule is not None:
                    for _ in clause.params:
                        self.on_rule(2, goal)
                    self.on_rule(1, goal)
                for child in self.solve(body, depth + 1):
                    node = DerivationNode(
                        1, f"ex(({clause.name} body); P, {format_goal(goal)})", (child,)
                    )
                    for param in reversed(clause.params):
                        node = DerivationNode(
                            2, f"ex(forall {param}; P, {format_goal(goal)})", (node,)
                        )
                    yield DerivationNode(3, _concl(goal), (node,))
            finally:
                st.undo_to(mark)


# --- entry points --------------------------------------------------------------

def _witness_value(subst, term):
    resolved = apply(subst, term)
    return UNCONSTRAINED if isinstance(resolved, Var) else resolved


def _ensure_recursion_headroom(budget: SearchBudget):
    # each search level holds a solve frame plus its case's generator
    # frame, so the interpreter limit must run well ahead of max_depth
    need = 3 * budget.max_depth + 10_000
    if sys.getrecursionlimit() < need:
        sys.setrecursionlimit(need)


def run(program, goal=None, budget: SearchBudget | None = None, on_rule=None):
    """Iterate (Outcome, DerivationNode) pairs in search order.

    program may be a SourceProgram (goal defaults to its main goal) or a
    sequence of clauses with an explicit goal.
    """
    if isinstance(program, SourceProgram):
        clauses = program.clauses
        goal = program.main if goal is None else goal
    else:
        clauses = tuple(program)
        if goal is None:
            raise ValueError("a goal is required when passing bare clauses")
    budget = budget or SearchBudget()
    _ensure_recursion_headroom(budget)
    state = ProgramState(clauses)
    solver = Solver(state, budget, on_rule)
    for node in solver.solve(goal):
        witnesses = tuple(
            (name, _witness_value(state.subst, term)) for name, term in state.choices
        )
        yield Outcome(witnesses, dict(state.store)), node


def execute(program, goal=None, budget: SearchBudget | None = None, on_rule=None) -> Iterator[Outcome]:
    """Lazy stream of solutions; empty iteration means no derivation exists."""
    for outcome, _ in run(program, goal, budget, on_rule):
        yield outcome
