"""Context-free workflow grammars: parsing, validation, and pruning.

A grammar describes linear preprocessing chains that end in exactly one
classifier.  Productions are written one per line in a BNF-like text format::

    workflow   ::= preproc workflow | classifier
    preproc    ::= standardScaler | pca <pca_hp> | ...
    classifier ::= kNN <kNN_hp> | gaussianNB | ...
    <kNN_hp>   ::= kNN::n_neighbors kNN::weights
    kNN::n_neighbors ::= int(1, 30)
    kNN::weights     ::= cat(uniform, distance)

``cat(...)`` lists categorical values (removable through feedback);
``int(lo, hi)`` / ``float(lo, hi)`` declare numeric ranges that evolution
tunes but feedback can never remove.  Grammars are immutable: pruning
operations return new instances and never touch their input.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

__all__ = [
    "ALGORITHM",
    "VALUE",
    "RANGE",
    "PREPROCESSOR",
    "CLASSIFIER",
    "GrammarError",
    "GrammarParseError",
    "UnknownSymbolError",
    "IllegalRemovalError",
    "TerminalSymbol",
    "HyperparamValueId",
    "Hyperparam",
    "AlgorithmBlock",
    "Grammar",
    "parse_grammar",
    "validate",
    "remove_algorithm",
    "remove_hyperparameter_value",
    "removable_symbols",
    "render",
    "default_grammar",
]

# Terminal kinds.
ALGORITHM = "algorithm"
VALUE = "value"
RANGE = "range"

# Algorithm kinds.
PREPROCESSOR = "preprocessor"
CLASSIFIER = "classifier"

# Choice non-terminals the workflow structure is anchored on.  Any
# non-terminal whose alternatives all start with an algorithm terminal is a
# choice; these two names are the conventional ones used by the shipped
# grammar and the pruning cascade.
_CLASSIFIER_CHOICE = "classifier"


class GrammarError(Exception):
    """Base class for grammar failures."""


class GrammarParseError(GrammarError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnknownSymbolError(GrammarError):
    """An operation referenced an algorithm/hyperparameter/value not in the grammar."""


class IllegalRemovalError(GrammarError):
    """A removal would leave the grammar invalid; the grammar is unchanged."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(violations))


@dataclass(frozen=True)
class TerminalSymbol:
    """A leaf symbol: an algorithm name, a categorical value, or a numeric range."""

    id: str
    kind: str
    value: str = ""      # bare value string for kind == VALUE
    lo: float = 0.0      # range bounds for kind == RANGE (inclusive)
    hi: float = 0.0
    integer: bool = False


@dataclass(frozen=True)
class HyperparamValueId:
    """Identifies one categorical hyperparameter value, e.g. decisionTree::criterion=gini."""

    algorithm: str
    hyperparam: str
    value: str

    def render(self) -> str:
        return f"{self.algorithm}::{self.hyperparam}={self.value}"

    @classmethod
    def parse(cls, text: str) -> "HyperparamValueId":
        m = re.fullmatch(r"([^:=\s]+)::([^:=\s]+)=([^=\s]+)", text)
        if m is None:
            raise UnknownSymbolError(f"not a hyperparameter value id: {text!r}")
        return cls(m.group(1), m.group(2), m.group(3))


@dataclass(frozen=True)
class Hyperparam:
    """One hyperparameter of an algorithm, backed by a value non-terminal."""

    name: str            # e.g. "criterion"
    symbol: str          # the non-terminal as written, e.g. "decisionTree::criterion"
    kind: str            # VALUE (categorical) or RANGE (numeric)
    values: tuple[str, ...] = ()
    lo: float = 0.0
    hi: float = 0.0
    integer: bool = False


@dataclass(frozen=True)
class AlgorithmBlock:
    """Derived view of one algorithm: its choice production and hyperparameters."""

    id: str
    kind: str            # PREPROCESSOR or CLASSIFIER
    choice: str          # owning choice non-terminal
    hp_block: str | None
    hyperparams: tuple[Hyperparam, ...]

    def hyperparam(self, name: str) -> Hyperparam:
        for hp in self.hyperparams:
            if hp.name == name:
                return hp
        raise UnknownSymbolError(f"{self.id} has no hyperparameter {name!r}")


class Grammar:
    """An immutable CFG.  Treat instances as frozen; pruning returns new ones.

    ``productions`` maps each non-terminal to its alternatives in file order;
    an alternative is a tuple of symbol names.  ``terminals`` maps terminal
    ids to :class:`TerminalSymbol`.
    """

    def __init__(
        self,
        root: str,
        productions: dict[str, tuple[tuple[str, ...], ...]],
        terminals: dict[str, TerminalSymbol],
    ):
        self.root = root
        self.productions = productions
        self.terminals = terminals
        self._blocks: dict[str, AlgorithmBlock] | None = None
        self._search_index = None  # lazily attached by evoflow.search

    # -- views ------------------------------------------------------------

    def is_nonterminal(self, symbol: str) -> bool:
        return symbol in self.productions

    def alternatives(self, nt: str) -> tuple[tuple[str, ...], ...]:
        try:
            return self.productions[nt]
        except KeyError:
            raise UnknownSymbolError(f"unknown non-terminal {nt!r}") from None

    def is_value_nonterminal(self, nt: str) -> bool:
        """True for hyperparameter value non-terminals (cat/int/float productions)."""
        alts = self.productions.get(nt)
        if not alts:
            return False
        for alt in alts:
            if len(alt) != 1:
                return False
            t = self.terminals.get(alt[0])
            if t is None or t.kind == ALGORITHM:
                return False
        return True

    def choice_nonterminals(self) -> tuple[str, ...]:
        """Non-terminals whose alternatives each start with an algorithm terminal."""
        out = []
        for nt, alts in self.productions.items():
            if not alts:
                continue
            ok = True
            for alt in alts:
                if not alt:
                    ok = False
                    break
                t = self.terminals.get(alt[0])
                if t is None or t.kind != ALGORITHM:
                    ok = False
                    break
            if ok:
                out.append(nt)
        return tuple(out)

    def algorithms(self) -> dict[str, AlgorithmBlock]:
        """All algorithm blocks keyed by id, in grammar order."""
        if self._blocks is None:
            blocks: dict[str, AlgorithmBlock] = {}
            for choice in self.choice_nonterminals():
                kind = CLASSIFIER if choice == _CLASSIFIER_CHOICE else PREPROCESSOR
                for alt in self.productions[choice]:
                    alg = alt[0]
                    hp_block = alt[1] if len(alt) > 1 else None
                    hps: list[Hyperparam] = []
                    if hp_block is not None and hp_block in self.productions:
                        for hp_nt in self.productions[hp_block][0]:
                            hps.append(self._hyperparam_view(hp_nt))
                    blocks[alg] = AlgorithmBlock(
                        id=alg,
                        kind=kind,
                        choice=choice,
                        hp_block=hp_block,
                        hyperparams=tuple(hps),
                    )
            self._blocks = blocks
        return self._blocks

    def _hyperparam_view(self, hp_nt: str) -> Hyperparam:
        name = hp_nt.rsplit("::", 1)[-1]
        alts = self.productions.get(hp_nt, ())
        first = self.terminals.get(alts[0][0]) if alts else None
        if first is not None and first.kind == RANGE:
            return Hyperparam(
                name=name, symbol=hp_nt, kind=RANGE,
                lo=first.lo, hi=first.hi, integer=first.integer,
            )
        values = tuple(self.terminals[alt[0]].value for alt in alts)
        return Hyperparam(name=name, symbol=hp_nt, kind=VALUE, values=values)

    def classifier_ids(self) -> tuple[str, ...]:
        return tuple(a for a, b in self.algorithms().items() if b.kind == CLASSIFIER)

    def preprocessor_ids(self) -> tuple[str, ...]:
        return tuple(a for a, b in self.algorithms().items() if b.kind == PREPROCESSOR)

    def resolve_value(self, vid: HyperparamValueId) -> tuple[AlgorithmBlock, Hyperparam]:
        """Map a value id to its algorithm block and hyperparameter, or raise."""
        blocks = self.algorithms()
        if vid.algorithm not in blocks:
            raise UnknownSymbolError(f"unknown algorithm {vid.algorithm!r}")
        block = blocks[vid.algorithm]
        hp = block.hyperparam(vid.hyperparam)
        if hp.kind != VALUE or vid.value not in hp.values:
            raise UnknownSymbolError(
                f"unknown value {vid.value!r} for {vid.algorithm}::{vid.hyperparam}"
            )
        return block, hp

    # -- equality (structural; used by the render round-trip) --------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Grammar):
            return NotImplemented
        return (
            self.root == other.root
            and self.productions == other.productions
            and self.terminals == other.terminals
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"Grammar(root={self.root!r}, {len(self.productions)} productions)"


_CAT_RE = re.compile(r"^cat\((.*)\)$")
_RANGE_RE = re.compile(
    r"^(int|float)\(\s*(-?[0-9]+(?:\.[0-9]+)?(?:[eE][+-]?[0-9]+)?)\s*,"
    r"\s*(-?[0-9]+(?:\.[0-9]+)?(?:[eE][+-]?[0-9]+)?)\s*\)$"
)


def _range_terminal(nt: str, which: str, lo_text: str, hi_text: str, line: int) -> TerminalSymbol:
    integer = which == "int"
    try:
        lo = float(int(lo_text)) if integer else float(lo_text)
        hi = float(int(hi_text)) if integer else float(hi_text)
    except ValueError:
        raise GrammarParseError(f"bad numeric bounds in {which}({lo_text}, {hi_text})", line)
    if lo > hi:
        raise GrammarParseError(f"empty range {which}({lo_text}, {hi_text})", line)
    return TerminalSymbol(id=f"{nt}={_render_range(which, lo, hi)}", kind=RANGE,
                          lo=lo, hi=hi, integer=integer)


def _render_range(which: str, lo: float, hi: float) -> str:
    if which == "int":
        return f"int({int(lo)},{int(hi)})"
    return f"float({lo!r},{hi!r})"


def parse_grammar(text: str) -> Grammar:
    """Parse the BNF-like text format into a :class:`Grammar`.

    Raises :class:`GrammarParseError` on syntax errors, undefined angle-bracket
    or ``::`` symbols, and duplicate non-terminal definitions.  Blank lines and
    ``#`` comments are ignored; a line starting with ``|`` continues the
    previous production.
    """
    # Assemble logical production lines.
    logical: list[tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if line.lstrip().startswith("|"):
            if not logical:
                raise GrammarParseError("continuation with no preceding production", lineno)
            prev_no, prev = logical[-1]
            logical[-1] = (prev_no, prev + " " + line.strip())
        else:
            logical.append((lineno, line.strip()))

    if not logical:
        raise GrammarParseError("empty grammar", 1)

    productions: dict[str, tuple[tuple[str, ...], ...]] = {}
    terminals: dict[str, TerminalSymbol] = {}
    pending: list[tuple[int, str, str]] = []  # (line, lhs, rhs) for generic productions

    for lineno, line in logical:
        if "::=" not in line:
            raise GrammarParseError("expected '::=' in production", lineno)
        lhs_text, rhs = line.split("::=", 1)
        lhs = lhs_text.strip()
        rhs = rhs.strip()
        if not lhs or " " in lhs or "\t" in lhs:
            raise GrammarParseError(f"bad left-hand side {lhs_text.strip()!r}", lineno)
        if lhs in productions:
            raise GrammarParseError(f"duplicate non-terminal {lhs!r}", lineno)
        if not rhs:
            raise GrammarParseError(f"empty right-hand side for {lhs!r}", lineno)

        cat = _CAT_RE.match(rhs)
        rng = _RANGE_RE.match(rhs)
        if cat is not None:
            values = [v.strip() for v in cat.group(1).split(",") if v.strip()]
            if not values:
                raise GrammarParseError(f"cat() for {lhs!r} lists no values", lineno)
            if len(set(values)) != len(values):
                raise GrammarParseError(f"duplicate values in cat() for {lhs!r}", lineno)
            alts = []
            for v in values:
                tid = f"{lhs}={v}"
                terminals[tid] = TerminalSymbol(id=tid, kind=VALUE, value=v)
                alts.append((tid,))
            productions[lhs] = tuple(alts)
        elif rng is not None:
            t = _range_terminal(lhs, rng.group(1), rng.group(2), rng.group(3), lineno)
            terminals[t.id] = t
            productions[lhs] = ((t.id,),)
        else:
            productions[lhs] = ()  # placeholder, filled after all LHS are known
            pending.append((lineno, lhs, rhs))

    for lineno, lhs, rhs in pending:
        alts: list[tuple[str, ...]] = []
        for alt_text in rhs.split("|"):
            symbols = alt_text.split()
            if not symbols:
                raise GrammarParseError(f"empty alternative for {lhs!r}", lineno)
            alts.append(tuple(symbols))
        productions[lhs] = tuple(alts)

    # Classify symbols: anything not defined must be a bare algorithm terminal;
    # angle-bracketed or '::' names without a production are mistakes.
    for lineno, lhs, _rhs in pending:
        for alt in productions[lhs]:
            for sym in alt:
                if sym in productions or sym in terminals:
                    continue
                if sym.startswith("<") or "::" in sym:
                    raise GrammarParseError(
                        f"undefined symbol {sym.strip('<>')!r}", lineno
                    )
                terminals[sym] = TerminalSymbol(id=sym, kind=ALGORITHM)

    root = logical[0][1].split("::=", 1)[0].strip()
    return Grammar(root=root, productions=productions, terminals=terminals)


def validate(g: Grammar) -> list[str]:
    """Return the list of structural violations; an empty list means valid."""
    violations: list[str] = []

    # Referenced symbols exist (direct construction can break this).
    for nt, alts in g.productions.items():
        for alt in alts:
            for sym in alt:
                if sym not in g.productions and sym not in g.terminals:
                    violations.append(f"undefined symbol {sym!r} in {nt!r}")

    if g.root not in g.productions:
        violations.append(f"root {g.root!r} has no production")
        return violations

    # Reachability from the root.
    reachable: set[str] = set()
    frontier = [g.root]
    while frontier:
        nt = frontier.pop()
        if nt in reachable:
            continue
        reachable.add(nt)
        for alt in g.productions.get(nt, ()):
            for sym in alt:
                if sym in g.productions and sym not in reachable:
                    frontier.append(sym)
    for nt in g.productions:
        if nt not in reachable:
            violations.append(f"non-terminal {nt!r} is unreachable from {g.root!r}")

    # Productivity fixpoint.
    productive: set[str] = set()
    changed = True
    while changed:
        changed = False
        for nt, alts in g.productions.items():
            if nt in productive:
                continue
            for alt in alts:
                if all(sym in g.terminals or sym in productive for sym in alt):
                    productive.add(nt)
                    changed = True
                    break
    for nt in g.productions:
        if nt not in productive:
            violations.append(f"non-terminal {nt!r} cannot derive any terminal string")

    # At least one classifier alternative.
    cls_alts = g.productions.get(_CLASSIFIER_CHOICE, ())
    if not cls_alts:
        violations.append("no classifier: non-terminal 'classifier' is missing or empty")

    # Choice productions must be algorithm-led, with at most one block symbol.
    seen_algorithms: set[str] = set()
    hp_block_owner: dict[str, str] = {}
    for choice in g.choice_nonterminals():
        for alt in g.productions[choice]:
            alg = alt[0]
            if alg in seen_algorithms:
                violations.append(f"algorithm {alg!r} defined more than once")
            seen_algorithms.add(alg)
            if len(alt) > 2:
                violations.append(f"alternative for {alg!r} has more than one block symbol")
            if len(alt) == 2:
                block = alt[1]
                if block not in g.productions:
                    violations.append(f"hyperparameter block {block!r} of {alg!r} undefined")
                    continue
                if block in hp_block_owner:
                    violations.append(
                        f"hyperparameter block {block!r} shared by {hp_block_owner[block]!r} and {alg!r}"
                    )
                hp_block_owner[block] = alg
                block_alts = g.productions[block]
                if len(block_alts) != 1:
                    violations.append(f"hyperparameter block {block!r} must have one alternative")
                    continue
                for hp_nt in block_alts[0]:
                    if hp_nt not in g.productions:
                        violations.append(f"hyperparameter {hp_nt!r} of {alg!r} undefined")
                    elif not g.is_value_nonterminal(hp_nt):
                        violations.append(f"hyperparameter {hp_nt!r} of {alg!r} is not a value production")

    # Every categorical hyperparameter keeps at least one value; ranges are sane.
    for nt, alts in g.productions.items():
        if g.is_value_nonterminal(nt):
            if not alts:
                violations.append(f"hyperparameter {nt!r} has no remaining values")
            for alt in alts:
                t = g.terminals.get(alt[0])
                if t is not None and t.kind == RANGE and t.lo > t.hi:
                    violations.append(f"hyperparameter {nt!r} has an empty numeric range")
        elif not alts:
            violations.append(f"hyperparameter {nt!r} has no remaining values"
                              if "::" in nt else
                              f"non-terminal {nt!r} has no alternatives")

    return violations


def _prune(
    g: Grammar,
    drop_nts: set[str],
    drop_terminals: set[str],
    drop_alternatives: dict[str, set[tuple[str, ...]]],
) -> Grammar:
    """Build a new grammar without the listed symbols/alternatives, cascading
    removal of choice non-terminals that lose every alternative."""
    productions: dict[str, tuple[tuple[str, ...], ...]] = {}
    for nt, alts in g.productions.items():
        if nt in drop_nts:
            continue
        dropped = drop_alternatives.get(nt, set())
        productions[nt] = tuple(a for a in alts if a not in dropped)

    # Cascade: a non-terminal left with no alternatives disappears along with
    # every alternative that references it (so removing the last preprocessor
    # rewrites `workflow ::= preproc workflow | classifier` to `workflow ::= classifier`).
    changed = True
    while changed:
        changed = False
        empty = [nt for nt, alts in productions.items() if not alts and nt != g.root]
        for nt in empty:
            del productions[nt]
            for other, alts in list(productions.items()):
                kept = tuple(a for a in alts if nt not in a)
                if kept != alts:
                    productions[other] = kept
            changed = True

    used: set[str] = set()
    for alts in productions.values():
        for alt in alts:
            used.update(alt)
    terminals = {
        tid: t for tid, t in g.terminals.items()
        if tid not in drop_terminals and tid in used
    }
    return Grammar(root=g.root, productions=productions, terminals=terminals)


def remove_algorithm(g: Grammar, algorithm: str) -> Grammar:
    """Return a grammar without ``algorithm``, its block, and its hyperparameters.

    Raises :class:`UnknownSymbolError` for unknown ids and
    :class:`IllegalRemovalError` (grammar unchanged) when the removal would
    leave the grammar invalid, e.g. removing the last classifier.
    """
    blocks = g.algorithms()
    if algorithm not in blocks:
        raise UnknownSymbolError(f"unknown algorithm {algorithm!r}")
    block = blocks[algorithm]
    if block.kind == CLASSIFIER and len(g.classifier_ids()) == 1:
        raise IllegalRemovalError(
            [f"removing {algorithm!r} would leave the grammar without a classifier"]
        )

    drop_nts: set[str] = set()
    drop_terminals: set[str] = {algorithm}
    if block.hp_block is not None:
        drop_nts.add(block.hp_block)
        for hp in block.hyperparams:
            drop_nts.add(hp.symbol)
            for alt in g.productions.get(hp.symbol, ()):
                drop_terminals.add(alt[0])
    target = (algorithm,) if block.hp_block is None else (algorithm, block.hp_block)
    pruned = _prune(g, drop_nts, drop_terminals, {block.choice: {target}})

    violations = validate(pruned)
    if violations:
        raise IllegalRemovalError(violations)
    return pruned


def remove_hyperparameter_value(g: Grammar, value: "HyperparamValueId | str") -> Grammar:
    """Return a grammar without one categorical hyperparameter value.

    Raises :class:`UnknownSymbolError` for unknown ids/values and
    :class:`IllegalRemovalError` when the value is the hyperparameter's last.
    """
    vid = HyperparamValueId.parse(value) if isinstance(value, str) else value
    _block, hp = g.resolve_value(vid)
    if len(hp.values) == 1:
        raise IllegalRemovalError(
            [f"removing {vid.render()!r} would leave {hp.symbol!r} without values"]
        )
    tid = None
    for alt in g.productions[hp.symbol]:
        if g.terminals[alt[0]].value == vid.value:
            tid = alt[0]
            break
    assert tid is not None
    pruned = _prune(g, set(), {tid}, {hp.symbol: {(tid,)}})
    violations = validate(pruned)
    if violations:
        raise IllegalRemovalError(violations)
    return pruned


def removable_symbols(g: Grammar) -> tuple[set[str], set[HyperparamValueId]]:
    """Exactly the symbols whose removal keeps :func:`validate` empty.

    Returns ``(algorithms, hyperparameter values)``.  Classifiers are excluded
    iff only one classifier remains; numeric ranges are never included; a
    categorical value is removable while its hyperparameter has >= 2 values.
    """
    algorithms: set[str] = set()
    values: set[HyperparamValueId] = set()
    classifiers = g.classifier_ids()
    for alg, block in g.algorithms().items():
        if block.kind == PREPROCESSOR or len(classifiers) > 1:
            algorithms.add(alg)
        for hp in block.hyperparams:
            if hp.kind == VALUE and len(hp.values) > 1:
                for v in hp.values:
                    values.add(HyperparamValueId(alg, hp.name, v))
    return algorithms, values


def render(g: Grammar) -> str:
    """Serialize back to the text format; ``parse_grammar(render(g)) == g``."""
    lines = []
    for nt, alts in g.productions.items():
        if g.is_value_nonterminal(nt):
            first = g.terminals[alts[0][0]]
            if first.kind == RANGE:
                which = "int" if first.integer else "float"
                if first.integer:
                    body = f"int({int(first.lo)}, {int(first.hi)})"
                else:
                    body = f"float({first.lo!r}, {first.hi!r})"
            else:
                body = "cat(" + ", ".join(g.terminals[a[0]].value for a in alts) + ")"
            lines.append(f"{nt} ::= {body}")
        else:
            body = " | ".join(" ".join(alt) for alt in alts)
            lines.append(f"{nt} ::= {body}")
    return "\n".join(lines) + "\n"


def default_grammar() -> Grammar:
    """The shipped grammar: 10 preprocessors and 10 classifiers."""
    text = resources.files("evoflow.data").joinpath("default_grammar.txt").read_text("utf-8")
    return parse_grammar(text)
