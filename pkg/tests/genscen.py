"""Deterministic random generators for models and scenarios.

Everything is driven by a seeded random.Random so failures replay exactly.
Generated scenarios always build cleanly: producers respect the kind
rules, asserted attributions respect the validity matrix, and model
equations only reference earlier variables, which keeps them acyclic.
"""

import random

from respnet.causal import And, CausalModel, Const, Not, Or, Var
from respnet.model import (
    CONDITION_NAMES,
    ActorDecl,
    ActorKind,
    AttributionDecl,
    CausesDecl,
    FactDecl,
    Mode,
    ModelDecl,
    OccurrenceDecl,
    OccurrenceKind,
    Sense,
    Value,
    build_scenario,
    validate_attribution,
)

_SENSES = (
    Sense("causal"),
    Sense("role", "task"),
    Sense("role", "moral_duty"),
    Sense("role", "legal_duty"),
    Sense("role", "legal_duty", "contractual"),
    Sense("role", "legal_duty", "statutory"),
    Sense("liability", "criminal"),
    Sense("liability", "civil"),
    Sense("liability", "civil", "negligence"),
    Sense("liability", "civil", "product"),
    Sense("moral", "attributability"),
    Sense("moral", "accountability"),
)

_CONDITIONS = sorted(CONDITION_NAMES)


def random_expr(rng: random.Random, available: list[str], depth: int = 0):
    roll = rng.random()
    if depth >= 2 or roll < 0.4:
        return Var(rng.choice(available))
    if roll < 0.48:
        return Const(rng.random() < 0.5)
    if roll < 0.62:
        return Not(random_expr(rng, available, depth + 1))
    if roll < 0.81:
        return And(random_expr(rng, available, depth + 1), random_expr(rng, available, depth + 1))
    return Or(random_expr(rng, available, depth + 1), random_expr(rng, available, depth + 1))


def random_model(rng: random.Random, n_vars: int, n_exogenous: int) -> CausalModel:
    names = [f"v{i}" for i in range(n_vars)]
    exogenous = names[:n_exogenous]
    equations = []
    for i in range(n_exogenous, n_vars):
        equations.append((names[i], random_expr(rng, names[:i])))
    context = [(name, rng.random() < 0.7) for name in exogenous]
    return CausalModel(
        exogenous=tuple(sorted(exogenous)),
        equations=tuple(sorted(equations)),
        context=tuple(sorted(context)),
    )


def random_scenario(rng: random.Random):
    declarations = []
    n_actors = rng.randint(2, 5)
    actor_kinds = {}
    for i in range(n_actors):
        kind = rng.choice(list(ActorKind))
        actor_kinds[f"a{i}"] = kind
        declarations.append(ActorDecl(f"a{i}", kind))

    n_occurrences = rng.randint(2, 6)
    occurrence_kinds = {}
    for i in range(n_occurrences):
        kind = rng.choice(list(OccurrenceKind))
        occurrence_kinds[f"o{i}"] = kind
        producer = None
        if kind is not OccurrenceKind.CONSEQUENCE and rng.random() < 0.6:
            wanted = (
                (ActorKind.AI_SYSTEM,)
                if kind.is_machine
                else (ActorKind.HUMAN, ActorKind.INSTITUTION)
            )
            suitable = [a for a, k in actor_kinds.items() if k in wanted]
            if suitable:
                producer = rng.choice(suitable)
        harm = kind is OccurrenceKind.CONSEQUENCE and rng.random() < 0.5
        declarations.append(OccurrenceDecl(f"o{i}", kind, "", producer, harm))

    if rng.random() < 0.5:
        n_vars = rng.randint(2, 6)
        n_exogenous = rng.randint(1, max(1, n_vars - 1))
        model = random_model(rng, n_vars, n_exogenous)
        variables = list(model.variables)
        rng.shuffle(variables)
        occurrences = list(occurrence_kinds)
        rng.shuffle(occurrences)
        bindings = tuple(
            sorted(zip(variables, occurrences))[: rng.randint(0, min(len(variables), len(occurrences)))]
        )
        declarations.append(
            ModelDecl(model.exogenous, model.equations, model.context, bindings)
        )

    for _ in range(rng.randint(0, 3)):
        source = rng.choice(sorted(actor_kinds) + sorted(occurrence_kinds))
        target = rng.choice(sorted(occurrence_kinds))
        declarations.append(CausesDecl(source, target))

    for _ in range(rng.randint(0, 6)):
        sense = rng.choice(_SENSES)
        occurrence = rng.choice(sorted(occurrence_kinds))
        if sense.kind == "causal" and rng.random() < 0.3:
            candidates = [o for o in sorted(occurrence_kinds) if o != occurrence]
            if not candidates:
                continue
            subject = rng.choice(candidates)
            subject_kind = "occurrence"
        else:
            subject = rng.choice(sorted(actor_kinds))
            subject_kind = actor_kinds[subject]
        mode = Mode.ASSERTED if rng.random() < 0.4 else Mode.CLAIMED
        if mode is Mode.ASSERTED and not validate_attribution(
            subject_kind, sense, occurrence_kinds[occurrence]
        ):
            mode = Mode.CLAIMED
        declarations.append(AttributionDecl(sense, subject, occurrence, mode))

    fact_keys = set()
    for _ in range(rng.randint(0, 8)):
        key = (
            rng.choice(_CONDITIONS),
            rng.choice(sorted(actor_kinds)),
            rng.choice(sorted(occurrence_kinds)),
        )
        if key in fact_keys:
            continue
        fact_keys.add(key)
        condition, subject, occurrence = key
        declarations.append(
            FactDecl(condition, subject, occurrence, rng.choice(list(Value)))
        )

    scenario, errors = build_scenario(declarations)
    assert scenario is not None, errors
    return scenario
