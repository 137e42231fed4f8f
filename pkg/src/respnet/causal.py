"""Acyclic boolean structural causal models and the NESS causation test.

A model splits its variables into exogenous ones, which take their value
from a context assignment, and endogenous ones, which are computed from
boolean equations in dependency order.  Interventions override a variable's
equation (or context value) outright, which is what makes a sibling effect
of a common cause insufficient for its co-effect: pinning the sibling
severs its equation instead of back-propagating through it.

The NESS test asks whether a candidate literal is a Necessary Element of a
Sufficient Set of actual-world literals.  The search is exhaustive over
candidate sets, ordered by cardinality and then lexicographically, so the
returned witness is deterministic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING, Iterable, Mapping

if TYPE_CHECKING:  # pragma: no cover
    from .model import Scenario

DEFAULT_MAX_VARS = 20


class CausalError(Exception):
    """Engine failure with a machine-readable code (E_CYCLE, E_UNKNOWN_VAR, ...)."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


# ---------------------------------------------------------------------------
# Boolean expressions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Expr:
    """Base class for boolean expressions over model variables."""

    def evaluate(self, values: Mapping[str, bool]) -> bool:
        raise NotImplementedError

    def variables(self) -> frozenset[str]:
        raise NotImplementedError

    def text(self) -> str:
        """Canonical rendering with minimal parentheses."""
        return self._text(0)

    def _text(self, parent_level: int) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Const(Expr):
    value: bool

    def evaluate(self, values: Mapping[str, bool]) -> bool:
        return self.value

    def variables(self) -> frozenset[str]:
        return frozenset()

    def _text(self, parent_level: int) -> str:
        return "true" if self.value else "false"


@dataclass(frozen=True)
class Var(Expr):
    name: str

    def evaluate(self, values: Mapping[str, bool]) -> bool:
        try:
            return values[self.name]
        except KeyError:
            raise CausalError("E_UNKNOWN_VAR", f"unknown variable {self.name!r}")

    def variables(self) -> frozenset[str]:
        return frozenset((self.name,))

    def _text(self, parent_level: int) -> str:
        return self.name


@dataclass(frozen=True)
class Not(Expr):
    operand: Expr

    def evaluate(self, values: Mapping[str, bool]) -> bool:
        return not self.operand.evaluate(values)

    def variables(self) -> frozenset[str]:
        return self.operand.variables()

    def _text(self, parent_level: int) -> str:
        inner = self.operand._text(3)
        return f"!{inner}"


@dataclass(frozen=True)
class And(Expr):
    left: Expr
    right: Expr

    def evaluate(self, values: Mapping[str, bool]) -> bool:
        return self.left.evaluate(values) and self.right.evaluate(values)

    def variables(self) -> frozenset[str]:
        return self.left.variables() | self.right.variables()

    def _text(self, parent_level: int) -> str:
        # conjunction binds tighter than disjunction, looser than negation
        text = f"{self.left._text(2)} & {self.right._text(3)}"
        return f"({text})" if parent_level > 2 else text


@dataclass(frozen=True)
class Or(Expr):
    left: Expr
    right: Expr

    def evaluate(self, values: Mapping[str, bool]) -> bool:
        return self.left.evaluate(values) or self.right.evaluate(values)

    def variables(self) -> frozenset[str]:
        return self.left.variables() | self.right.variables()

    def _text(self, parent_level: int) -> str:
        text = f"{self.left._text(1)} | {self.right._text(2)}"
        return f"({text})" if parent_level > 1 else text


# ---------------------------------------------------------------------------
# Models and literals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Literal:
    """A variable pinned to a boolean value."""

    variable: str
    value: bool

    def __str__(self) -> str:
        return f"{self.variable}={'true' if self.value else 'false'}"


@dataclass(frozen=True)
class NessVerdict:
    is_cause: bool
    witness: frozenset[Literal] | None = None

    def witness_text(self) -> str:
        if self.witness is None:
            return ""
        return ", ".join(str(lit) for lit in sorted(self.witness, key=lambda l: l.variable))


@dataclass(frozen=True)
class CausalModel:
    """Boolean structural equations plus a context for the exogenous variables.

    bindings maps variable names to occurrence ids; it is how the scenario
    graph and the equational model refer to each other.
    """

    exogenous: tuple[str, ...] = ()
    equations: tuple[tuple[str, Expr], ...] = ()
    context: tuple[tuple[str, bool], ...] = ()
    bindings: tuple[tuple[str, str], ...] = ()

    @cached_property
    def equation_map(self) -> dict[str, Expr]:
        return dict(self.equations)

    @cached_property
    def context_map(self) -> dict[str, bool]:
        return dict(self.context)

    @cached_property
    def binding_map(self) -> dict[str, str]:
        """variable -> occurrence id"""
        return dict(self.bindings)

    @cached_property
    def bound_occurrences(self) -> dict[str, str]:
        """occurrence id -> variable"""
        return {occ: var for var, occ in self.bindings}

    @cached_property
    def variables(self) -> tuple[str, ...]:
        return tuple(self.exogenous) + tuple(name for name, _ in self.equations)

    @cached_property
    def parents(self) -> dict[str, frozenset[str]]:
        deps = {name: frozenset() for name in self.exogenous}
        for name, expr in self.equations:
            deps[name] = expr.variables()
        return deps

    @cached_property
    def topo_order(self) -> tuple[str, ...]:
        """Dependency order, name-sorted among ties; raises E_CYCLE/E_UNKNOWN_VAR."""
        known = set(self.variables)
        for name, expr in self.equations:
            missing = expr.variables() - known
            if missing:
                raise CausalError(
                    "E_UNKNOWN_VAR",
                    f"equation for {name!r} uses unknown variable {sorted(missing)[0]!r}",
                )
        remaining: dict[str, set[str]] = {v: set(self.parents[v]) for v in self.variables}
        order: list[str] = []
        resolved: set[str] = set()
        while remaining:
            ready = sorted(v for v, deps in remaining.items() if deps <= resolved)
            if not ready:
                cyclic = ", ".join(sorted(remaining))
                raise CausalError("E_CYCLE", f"cyclic equations among: {cyclic}")
            for v in ready:
                order.append(v)
                resolved.add(v)
                del remaining[v]
        return tuple(order)

    def check(self) -> None:
        """Validate structural invariants; raises CausalError on the first failure."""
        self.topo_order
        names = set()
        for name in self.variables:
            if name in names:
                raise CausalError("E_UNKNOWN_VAR", f"variable {name!r} defined twice")
            names.add(name)
        for name, _ in self.context:
            if name not in self.exogenous:
                raise CausalError(
                    "E_UNKNOWN_VAR", f"context assigns non-exogenous variable {name!r}"
                )
        for name in self.exogenous:
            if name not in self.context_map:
                raise CausalError(
                    "E_UNKNOWN_VAR", f"exogenous variable {name!r} has no context value"
                )
        for var, _ in self.bindings:
            if var not in names:
                raise CausalError("E_UNKNOWN_VAR", f"binding for unknown variable {var!r}")

    def ancestors(self, variable: str) -> frozenset[str]:
        if variable not in self.parents:
            raise CausalError("E_UNKNOWN_VAR", f"unknown variable {variable!r}")
        seen: set[str] = set()
        stack = list(self.parents[variable])
        while stack:
            v = stack.pop()
            if v not in seen:
                seen.add(v)
                stack.extend(self.parents[v])
        return frozenset(seen)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def evaluate(model: CausalModel, overrides: Mapping[str, bool] | None = None) -> dict[str, bool]:
    """Compute a full assignment, applying overrides with intervention semantics.

    Overridden variables take the given value and their equation (or context
    value) is ignored; everything else is computed in topological order.
    """
    overrides = dict(overrides or {})
    known = set(model.variables)
    for name in overrides:
        if name not in known:
            raise CausalError("E_UNKNOWN_VAR", f"override for unknown variable {name!r}")
    values: dict[str, bool] = {}
    for name in model.topo_order:
        if name in overrides:
            values[name] = overrides[name]
        elif name in model.context_map:
            values[name] = model.context_map[name]
        else:
            values[name] = model.equation_map[name].evaluate(values)
    return values


def _holds(values: Mapping[str, bool], literal: Literal) -> bool:
    return values[literal.variable] == literal.value


def is_sufficient(model: CausalModel, s: Iterable[Literal], effect: Literal) -> bool:
    """True iff pinning s forces the effect under every free exogenous assignment.

    Exogenous variables that are not ancestors of the effect cannot change
    its value, so only the relevant free ones are enumerated; the result is
    identical to enumerating all of them.
    """
    pinned = {lit.variable: lit.value for lit in s}
    if effect.variable in pinned:
        raise ValueError("effect literal must not be a member of the candidate set")
    relevant = model.ancestors(effect.variable)
    free = [v for v in model.exogenous if v not in pinned and v in relevant]
    base = dict(pinned)
    for v in model.exogenous:
        if v not in pinned and v not in relevant:
            base[v] = model.context_map[v]
    for combo in itertools.product((False, True), repeat=len(free)):
        base.update(zip(free, combo))
        if not _holds(evaluate(model, base), effect):
            return False
    return True


def ness_cause(
    model: CausalModel,
    candidate: Literal,
    effect: Literal,
    max_vars: int = DEFAULT_MAX_VARS,
) -> NessVerdict:
    """Decide whether candidate is a necessary element of a sufficient set.

    The witness, when one exists, is the qualifying set of minimum
    cardinality, ties broken by lexicographic variable order.  Candidate
    sets range over actual-world literals only.  Sets containing literals
    of non-ancestors of the effect are never minimal (pinning a
    non-ancestor cannot change the effect), so the search restricts itself
    to ancestors; the naive test-suite oracle enumerates without this
    restriction and agrees.
    """
    if len(model.variables) > max_vars:
        raise CausalError(
            "E_TOO_LARGE",
            f"model has {len(model.variables)} variables, cap is {max_vars}",
        )
    if candidate.variable == effect.variable:
        raise ValueError("candidate and effect must be distinct variables")
    actual = evaluate(model)
    for role, literal in (("candidate", candidate), ("effect", effect)):
        if literal.variable not in actual:
            raise CausalError("E_UNKNOWN_VAR", f"unknown variable {literal.variable!r}")
        if not _holds(actual, literal):
            raise CausalError(
                "E_NOT_ACTUAL", f"{role} {literal} does not hold in the actual world"
            )
    relevant = model.ancestors(effect.variable)
    if candidate.variable not in relevant:
        return NessVerdict(is_cause=False)
    pool = sorted(v for v in relevant if v != candidate.variable)
    for size in range(0, len(pool) + 1):
        for combo in itertools.combinations(pool, size):
            literals = frozenset(
                {candidate} | {Literal(v, actual[v]) for v in combo}
            )
            if not is_sufficient(model, literals, effect):
                continue
            if is_sufficient(model, literals - {candidate}, effect):
                continue
            return NessVerdict(is_cause=True, witness=literals)
    return NessVerdict(is_cause=False)


def but_for(model: CausalModel, candidate: Literal, effect: Literal) -> bool:
    """True iff intervening the candidate to its opposite value defeats the effect."""
    actual = evaluate(model)
    for role, literal in (("candidate", candidate), ("effect", effect)):
        if literal.variable not in actual:
            raise CausalError("E_UNKNOWN_VAR", f"unknown variable {literal.variable!r}")
        if not _holds(actual, literal):
            raise CausalError(
                "E_NOT_ACTUAL", f"{role} {literal} does not hold in the actual world"
            )
    flipped = evaluate(model, {candidate.variable: not candidate.value})
    return not _holds(flipped, effect)


# ---------------------------------------------------------------------------
# Scenario edges
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CausalEdge:
    source: str
    target: str
    origin: str  # "declared" | "derived"

    def sort_key(self) -> tuple[str, str]:
        return (self.source, self.target)


def derive_causal_edges(
    scenario: "Scenario", max_vars: int = DEFAULT_MAX_VARS
) -> tuple[CausalEdge, ...]:
    """Collect the scenario's causal edges from all three sources.

    Declared `causes` statements are taken as given.  Pairs of occurrences
    bound into the model contribute an edge when both are actual and the
    NESS test holds.  Producers inherit edges from the occurrences they
    produce (including the production link itself).
    """
    edges: dict[tuple[str, str], str] = {}
    for link in scenario.edges:
        edges[(link.source, link.target)] = "declared"

    model = scenario.model
    if model is not None and model.bindings:
        actual = evaluate(model)
        bound = [
            (occ, var)
            for occ, var in sorted(model.bound_occurrences.items())
        ]
        for (src_occ, src_var), (dst_occ, dst_var) in itertools.permutations(bound, 2):
            src_lit = Literal(src_var, actual[src_var])
            dst_lit = Literal(dst_var, actual[dst_var])
            if not src_lit.value or not dst_lit.value:
                continue  # only occurrences that actually happened carry edges
            if ness_cause(model, src_lit, dst_lit, max_vars=max_vars).is_cause:
                edges.setdefault((src_occ, dst_occ), "derived")

    for occ in scenario.occurrences:
        if occ.producer is None:
            continue
        edges.setdefault((occ.producer, occ.id), "derived")
        for (src, dst), _ in list(edges.items()):
            if src == occ.id:
                edges.setdefault((occ.producer, dst), "derived")

    return tuple(
        CausalEdge(src, dst, origin)
        for (src, dst), origin in sorted(edges.items())
    )


def direct_parents(scenario: "Scenario") -> dict[str, frozenset[str]]:
    """Occurrence -> occurrences directly upstream of it.

    Direct means: a declared edge, or a model dependency path that passes
    through no other bound variable (hidden variables are collapsed, the
    way the scenario diagrams omit them).
    """
    parents: dict[str, set[str]] = {occ.id: set() for occ in scenario.occurrences}
    for link in scenario.edges:
        if link.target in parents and link.source in parents:
            parents[link.target].add(link.source)
    model = scenario.model
    if model is not None and model.bindings:
        bound_vars = set(model.binding_map)

        def nearest_bound(var: str, seen: set[str]) -> set[str]:
            found: set[str] = set()
            for parent in model.parents[var]:
                if parent in seen:
                    continue
                seen.add(parent)
                if parent in bound_vars:
                    found.add(parent)
                else:
                    found |= nearest_bound(parent, seen)
            return found

        for var, occ in model.bindings:
            for parent_var in nearest_bound(var, set()):
                parents[occ].add(model.binding_map[parent_var])
    return {occ: frozenset(ps) for occ, ps in parents.items()}
