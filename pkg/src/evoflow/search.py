"""Derivation trees over a workflow grammar and the genetic operators.

Trees are immutable.  Every operator receives the *current* grammar and a
numpy ``Generator``; validity of a node is judged by content (does the
children tuple still form an alternative of the node's symbol), so trees
built before a pruning survive it exactly when they avoid removed symbols.

Two budgets constrain every tree: the derivation count (structural production
applications, value selections are free) and the workflow length in
algorithm steps.  Growth only ever picks alternatives whose cheapest
completion fits the remaining budgets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grammar import ALGORITHM, RANGE, VALUE, Grammar

__all__ = [
    "MAX_WORKFLOW_STEPS",
    "BudgetError",
    "Leaf",
    "TreeNode",
    "DerivationTree",
    "WorkflowStep",
    "WorkflowSpec",
    "Individual",
    "random_individual",
    "decode",
    "tournament_select",
    "crossover",
    "mutate",
    "replace",
    "tree_valid",
]

MAX_WORKFLOW_STEPS = 5
_OPERATOR_RETRIES = 10


class BudgetError(Exception):
    """No derivation can finish within the configured budgets."""


@dataclass(frozen=True)
class Leaf:
    terminal: str
    kind: str                  # grammar.ALGORITHM / VALUE / RANGE
    value: int | float | str


@dataclass(frozen=True)
class TreeNode:
    symbol: str
    children: tuple            # of TreeNode | Leaf


def _is_value_node(node: TreeNode) -> bool:
    ch = node.children
    return len(ch) == 1 and isinstance(ch[0], Leaf) and ch[0].kind in (VALUE, RANGE)


def count_derivations(node: TreeNode) -> int:
    """Structural production applications; value selections count zero."""
    total = 0 if _is_value_node(node) else 1
    for c in node.children:
        if isinstance(c, TreeNode):
            total += count_derivations(c)
    return total


def count_steps(node: TreeNode) -> int:
    total = 0
    for c in node.children:
        if isinstance(c, Leaf):
            if c.kind == ALGORITHM:
                total += 1
        else:
            total += count_steps(c)
    return total


@dataclass(frozen=True)
class DerivationTree:
    root: TreeNode
    derivation_count: int
    step_count: int

    @classmethod
    def wrap(cls, root: TreeNode) -> "DerivationTree":
        return cls(root, count_derivations(root), count_steps(root))


@dataclass(frozen=True)
class WorkflowStep:
    algorithm: str
    hyperparams: tuple[tuple[str, int | float | str], ...]  # sorted by name

    def param(self, name: str):
        for k, v in self.hyperparams:
            if k == name:
                return v
        raise KeyError(name)


@dataclass(frozen=True)
class WorkflowSpec:
    steps: tuple[WorkflowStep, ...]
    canonical_key: str


@dataclass
class Individual:
    tree: DerivationTree
    workflow: WorkflowSpec
    evaluation: object | None = None   # EvaluationRecord once evaluated


# ---------------------------------------------------------------------------
# Grammar index: per-symbol minimum completion costs, cached on the grammar.

class _GrammarIndex:
    def __init__(self, g: Grammar):
        self.value_nts = frozenset(nt for nt in g.productions if g.is_value_nonterminal(nt))
        inf = float("inf")
        min_cost: dict[str, float] = {}
        min_steps: dict[str, float] = {}
        for tid, t in g.terminals.items():
            min_cost[tid] = 0.0
            min_steps[tid] = 1.0 if t.kind == ALGORITHM else 0.0
        for nt in g.productions:
            min_cost[nt] = inf
            min_steps[nt] = inf
        changed = True
        while changed:
            changed = False
            for nt, alts in g.productions.items():
                base = 0.0 if nt in self.value_nts else 1.0
                for alt in alts:
                    c = base + sum(min_cost[s] for s in alt)
                    st = sum(min_steps[s] for s in alt)
                    if c < min_cost[nt]:
                        min_cost[nt] = c
                        changed = True
                    if st < min_steps[nt]:
                        min_steps[nt] = st
                        changed = True
        self.min_cost = min_cost
        self.min_steps = min_steps


def _index(g: Grammar) -> _GrammarIndex:
    idx = g._search_index
    if idx is None:
        idx = _GrammarIndex(g)
        g._search_index = idx
    return idx


# ---------------------------------------------------------------------------
# Growth.

def _sample_leaf(g: Grammar, terminal: str, rng: np.random.Generator) -> Leaf:
    t = g.terminals[terminal]
    if t.kind == RANGE:
        if t.integer:
            value: int | float | str = int(rng.integers(int(t.lo), int(t.hi) + 1))
        else:
            value = float(rng.uniform(t.lo, t.hi))
        return Leaf(terminal=terminal, kind=RANGE, value=value)
    if t.kind == VALUE:
        return Leaf(terminal=terminal, kind=VALUE, value=t.value)
    return Leaf(terminal=terminal, kind=ALGORITHM, value=t.id)


def _grow(
    g: Grammar,
    idx: _GrammarIndex,
    symbol: str,
    rng: np.random.Generator,
    deriv_budget: float,
    step_budget: float,
) -> tuple[TreeNode | Leaf, float, float]:
    """Grow a subtree for ``symbol`` within the budgets.

    Returns (node, derivations used, steps used).  Alternatives whose cheapest
    completion exceeds a budget are excluded, which biases growth toward
    non-recursive alternatives exactly when the budget runs short.
    """
    if symbol in g.terminals:
        leaf = _sample_leaf(g, symbol, rng)
        return leaf, 0.0, (1.0 if leaf.kind == ALGORITHM else 0.0)

    base = 0.0 if symbol in idx.value_nts else 1.0
    alts = g.productions[symbol]
    feasible = [
        alt for alt in alts
        if base + sum(idx.min_cost[s] for s in alt) <= deriv_budget
        and sum(idx.min_steps[s] for s in alt) <= step_budget
    ]
    if not feasible:
        raise BudgetError(f"no alternative of {symbol!r} fits the remaining budget")
    alt = feasible[int(rng.integers(len(feasible)))]

    used_d = base
    used_s = 0.0
    rest_cost = sum(idx.min_cost[s] for s in alt)
    rest_steps = sum(idx.min_steps[s] for s in alt)
    children = []
    for sym in alt:
        rest_cost -= idx.min_cost[sym]
        rest_steps -= idx.min_steps[sym]
        child, d, s = _grow(
            g, idx, sym, rng,
            deriv_budget - used_d - rest_cost,
            step_budget - used_s - rest_steps,
        )
        children.append(child)
        used_d += d
        used_s += s
    return TreeNode(symbol=symbol, children=tuple(children)), used_d, used_s


def random_individual(
    g: Grammar,
    max_derivations: int,
    rng: np.random.Generator,
    max_steps: int = MAX_WORKFLOW_STEPS,
) -> Individual:
    """Grow a uniformly random valid tree within both budgets."""
    idx = _index(g)
    if idx.min_cost.get(g.root, float("inf")) > max_derivations:
        raise BudgetError(
            f"grammar needs {idx.min_cost.get(g.root)} derivations, budget is {max_derivations}"
        )
    if idx.min_steps.get(g.root, float("inf")) > max_steps:
        raise BudgetError("grammar cannot fit the workflow length bound")
    node, _d, _s = _grow(g, idx, g.root, rng, float(max_derivations), float(max_steps))
    tree = DerivationTree.wrap(node)
    return Individual(tree=tree, workflow=decode(tree))


# ---------------------------------------------------------------------------
# Decoding.

def _format_value(v: int | float | str) -> str:
    if isinstance(v, bool):  # never produced, but bool is an int subclass
        return str(v).lower()
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    return v


def _collect_steps(node: TreeNode, steps: list[WorkflowStep]) -> None:
    ch = node.children
    if ch and isinstance(ch[0], Leaf) and ch[0].kind == ALGORITHM:
        params: list[tuple[str, int | float | str]] = []
        for block in ch[1:]:
            if isinstance(block, TreeNode):
                for hp_node in block.children:
                    if isinstance(hp_node, TreeNode) and hp_node.children:
                        leaf = hp_node.children[0]
                        name = hp_node.symbol.rsplit("::", 1)[-1]
                        params.append((name, leaf.value))
        params.sort(key=lambda kv: kv[0])
        steps.append(WorkflowStep(algorithm=str(ch[0].value), hyperparams=tuple(params)))
        return
    for c in ch:
        if isinstance(c, TreeNode):
            _collect_steps(c, steps)


def decode(tree: DerivationTree) -> WorkflowSpec:
    """Flatten a tree into ordered steps and the canonical cache key.

    The key joins steps with ``|``; each step renders as ``name(k=v,...)``
    with keys sorted and floats in shortest round-trip form, so trees that
    differ only in shape share a key exactly when they mean the same workflow.
    """
    steps: list[WorkflowStep] = []
    _collect_steps(tree.root, steps)
    parts = []
    for s in steps:
        inner = ",".join(f"{k}={_format_value(v)}" for k, v in s.hyperparams)
        parts.append(f"{s.algorithm}({inner})")
    return WorkflowSpec(steps=tuple(steps), canonical_key="|".join(parts))


# ---------------------------------------------------------------------------
# Validity under a (possibly pruned) grammar.

def _node_valid(node: TreeNode | Leaf, g: Grammar) -> bool:
    if isinstance(node, Leaf):
        t = g.terminals.get(node.terminal)
        if t is None:
            return False
        if t.kind == RANGE:
            v = node.value
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                return False
            return t.lo <= float(v) <= t.hi and (not t.integer or float(v).is_integer())
        return True
    alts = g.productions.get(node.symbol)
    if alts is None:
        return False
    shape = tuple(
        c.terminal if isinstance(c, Leaf) else c.symbol for c in node.children
    )
    if shape not in alts:
        return False
    return all(_node_valid(c, g) for c in node.children)


def tree_valid(
    tree: DerivationTree,
    g: Grammar,
    max_derivations: int,
    max_steps: int = MAX_WORKFLOW_STEPS,
) -> bool:
    return (
        tree.derivation_count <= max_derivations
        and 1 <= tree.step_count <= max_steps
        and _node_valid(tree.root, g)
    )


# ---------------------------------------------------------------------------
# Selection, crossover, mutation, replacement.

def _record_key(ind: Individual, index: int) -> tuple:
    rec = ind.evaluation
    return (-rec.fitness, rec.eval_time, index)


def tournament_select(population: list[Individual], rng: np.random.Generator) -> Individual:
    """Binary tournament with replacement; fitness desc, time asc, index asc."""
    if not population:
        raise ValueError("empty population")
    i = int(rng.integers(len(population)))
    j = int(rng.integers(len(population)))
    a, b = population[i], population[j]
    return a if _record_key(a, i) <= _record_key(b, j) else b


def _paths(node: TreeNode, prefix: tuple[int, ...], out: list[tuple[tuple[int, ...], str]]):
    out.append((prefix, node.symbol))
    for i, c in enumerate(node.children):
        if isinstance(c, TreeNode):
            _paths(c, prefix + (i,), out)


def _subtree(node: TreeNode, path: tuple[int, ...]) -> TreeNode:
    for i in path:
        node = node.children[i]
    return node


def _replace_at(node: TreeNode, path: tuple[int, ...], sub: TreeNode) -> TreeNode:
    if not path:
        return sub
    i = path[0]
    children = list(node.children)
    children[i] = _replace_at(children[i], path[1:], sub)
    return TreeNode(symbol=node.symbol, children=tuple(children))


def _copy_of(ind: Individual) -> Individual:
    # Trees are immutable, so a copy shares structure but drops the evaluation.
    return Individual(tree=ind.tree, workflow=ind.workflow)


def crossover(
    p1: Individual,
    p2: Individual,
    g: Grammar,
    max_derivations: int,
    rng: np.random.Generator,
    max_steps: int = MAX_WORKFLOW_STEPS,
) -> tuple[Individual, Individual]:
    """Swap two subtrees rooted at a common non-terminal.

    Children exceeding either budget are rejected and the swap retried; after
    the retry budget, or when the parents share no non-terminal, returns
    copies of the parents.
    """
    paths1: list[tuple[tuple[int, ...], str]] = []
    paths2: list[tuple[tuple[int, ...], str]] = []
    _paths(p1.tree.root, (), paths1)
    _paths(p2.tree.root, (), paths2)
    by_sym1: dict[str, list[tuple[int, ...]]] = {}
    for path, sym in paths1:
        by_sym1.setdefault(sym, []).append(path)
    by_sym2: dict[str, list[tuple[int, ...]]] = {}
    for path, sym in paths2:
        by_sym2.setdefault(sym, []).append(path)
    common = sorted(set(by_sym1) & set(by_sym2))
    if not common:
        return _copy_of(p1), _copy_of(p2)

    for _ in range(_OPERATOR_RETRIES):
        sym = common[int(rng.integers(len(common)))]
        path1 = by_sym1[sym][int(rng.integers(len(by_sym1[sym])))]
        path2 = by_sym2[sym][int(rng.integers(len(by_sym2[sym])))]
        sub1 = _subtree(p1.tree.root, path1)
        sub2 = _subtree(p2.tree.root, path2)
        root1 = _replace_at(p1.tree.root, path1, sub2)
        root2 = _replace_at(p2.tree.root, path2, sub1)
        t1 = DerivationTree.wrap(root1)
        t2 = DerivationTree.wrap(root2)
        if (
            t1.derivation_count <= max_derivations
            and t2.derivation_count <= max_derivations
            and t1.step_count <= max_steps
            and t2.step_count <= max_steps
        ):
            return (
                Individual(tree=t1, workflow=decode(t1)),
                Individual(tree=t2, workflow=decode(t2)),
            )
    return _copy_of(p1), _copy_of(p2)


def mutate(
    ind: Individual,
    g: Grammar,
    max_derivations: int,
    rng: np.random.Generator,
    max_steps: int = MAX_WORKFLOW_STEPS,
) -> Individual:
    """Delete-and-regrow: pick a non-terminal node, regrow it within the
    residual budgets.  Falls back to a copy after the retry budget."""
    idx = _index(g)
    paths: list[tuple[tuple[int, ...], str]] = []
    _paths(ind.tree.root, (), paths)
    for _ in range(_OPERATOR_RETRIES):
        path, sym = paths[int(rng.integers(len(paths)))]
        old = _subtree(ind.tree.root, path)
        deriv_residual = max_derivations - (ind.tree.derivation_count - count_derivations(old))
        step_residual = max_steps - (ind.tree.step_count - count_steps(old))
        try:
            node, _d, _s = _grow(g, idx, sym, rng, float(deriv_residual), float(step_residual))
        except BudgetError:
            continue
        root = _replace_at(ind.tree.root, path, node)
        tree = DerivationTree.wrap(root)
        return Individual(tree=tree, workflow=decode(tree))
    return _copy_of(ind)


def replace(population: list[Individual], offspring: list[Individual]) -> list[Individual]:
    """Generational replacement with one elite: if the best of ``population``
    beats the best offspring, it takes the worst offspring's slot."""
    if len(offspring) != len(population):
        raise ValueError("offspring size must match population size")
    best_pop_i = min(range(len(population)), key=lambda i: _record_key(population[i], i))
    best_off_i = min(range(len(offspring)), key=lambda i: _record_key(offspring[i], i))
    best_pop_key = _record_key(population[best_pop_i], best_pop_i)
    best_off_key = _record_key(offspring[best_off_i], best_off_i)
    result = list(offspring)
    if best_pop_key[:2] < best_off_key[:2]:
        worst_off_i = max(range(len(offspring)), key=lambda i: _record_key(offspring[i], i))
        result[worst_off_i] = population[best_pop_i]
    return result
