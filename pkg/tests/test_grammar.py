"""Grammar parsing, validation, and pruning."""

from __future__ import annotations

import numpy as np
import pytest

from evoflow.grammar import (
    CLASSIFIER,
    PREPROCESSOR,
    RANGE,
    VALUE,
    GrammarParseError,
    HyperparamValueId,
    IllegalRemovalError,
    UnknownSymbolError,
    default_grammar,
    parse_grammar,
    remove_algorithm,
    remove_hyperparameter_value,
    removable_symbols,
    render,
    validate,
)

MINI = """
workflow   ::= preproc workflow | classifier
preproc    ::= scaler | pca <pca_hp>
classifier ::= kNN <kNN_hp> | nb
<pca_hp>   ::= pca::k
pca::k     ::= int(1, 5)
<kNN_hp>   ::= kNN::n kNN::w
kNN::n     ::= int(1, 9)
kNN::w     ::= cat(uniform, distance)
"""


def all_symbols(g):
    syms = set(g.productions)
    for alts in g.productions.values():
        for alt in alts:
            syms.update(alt)
    return syms


# -- parsing ----------------------------------------------------------------

def test_parse_mini_roundtrip():
    g = parse_grammar(MINI)
    assert g.root == "workflow"
    assert validate(g) == []
    # render -> parse is the identity on the structural view
    again = parse_grammar(render(g))
    assert again == g


def test_default_grammar_counts(grammar):
    # shipped file: 10 preprocessing + 10 classifier alternatives
    assert len(grammar.preprocessor_ids()) == 10
    assert len(grammar.classifier_ids()) == 10
    assert len(grammar.algorithms()) == 20
    assert validate(grammar) == []


def test_default_grammar_roundtrip(grammar):
    assert parse_grammar(render(grammar)) == grammar


def test_parse_errors():
    with pytest.raises(GrammarParseError):
        parse_grammar("")
    with pytest.raises(GrammarParseError):
        parse_grammar("workflow = classifier")
    with pytest.raises(GrammarParseError):
        parse_grammar("a ::= b\na ::= c")
    with pytest.raises(GrammarParseError):
        parse_grammar("a ::= cat()")
    with pytest.raises(GrammarParseError):
        parse_grammar("a ::= cat(x, x)")
    with pytest.raises(GrammarParseError):
        parse_grammar("a ::= int(5, 1)")


def test_hyperparam_views(grammar):
    blocks = grammar.algorithms()
    assert blocks["fastICA"].kind == PREPROCESSOR
    assert blocks["kNN"].kind == CLASSIFIER
    crit = blocks["decisionTree"].hyperparam("criterion")
    assert crit.kind == VALUE and crit.values == ("gini", "entropy")
    depth = blocks["decisionTree"].hyperparam("maxDepth")
    assert depth.kind == RANGE and depth.integer and (depth.lo, depth.hi) == (1.0, 20.0)
    assert blocks["gaussianNB"].hyperparams == ()


def test_value_id_parse_render():
    vid = HyperparamValueId.parse("decisionTree::criterion=gini")
    assert vid == HyperparamValueId("decisionTree", "criterion", "gini")
    assert vid.render() == "decisionTree::criterion=gini"
    for bad in ("decisionTree", "a::b", "a=b", "a::b=c=d"):
        with pytest.raises(UnknownSymbolError):
            HyperparamValueId.parse(bad)


# -- removal: algorithms ----------------------------------------------------

def test_remove_algorithm_cascades(grammar):
    g2 = remove_algorithm(grammar, "decisionTree")
    gone = {
        "decisionTree",
        "<decisionTree_hp>",
        "decisionTree::criterion",
        "decisionTree::maxDepth",
    }
    assert gone & all_symbols(g2) == set()
    # value terminals of the removed block are gone too
    assert all(not t.startswith("decisionTree") for t in g2.terminals)
    assert validate(g2) == []
    # input untouched
    assert "decisionTree" in grammar.algorithms()


def test_remove_preprocessor_keeps_classifiers(grammar):
    before_clf = grammar.alternatives("classifier")
    before_pre = grammar.alternatives("preproc")
    g2 = remove_algorithm(grammar, "fastICA")
    assert g2.alternatives("classifier") == before_clf
    assert len(g2.alternatives("preproc")) == len(before_pre) - 1


def test_remove_unknown_algorithm(grammar):
    with pytest.raises(UnknownSymbolError):
        remove_algorithm(grammar, "quantumSVM")


def test_cannot_remove_last_classifier():
    g = parse_grammar(MINI)
    g = remove_algorithm(g, "nb")
    with pytest.raises(IllegalRemovalError) as info:
        remove_algorithm(g, "kNN")
    assert info.value.violations


def test_all_preprocessors_removable_at_once(grammar):
    g = grammar
    for pid in grammar.preprocessor_ids():
        g = remove_algorithm(g, pid)
    assert validate(g) == []
    assert g.preprocessor_ids() == ()
    # the workflow root no longer offers the preproc branch
    assert all("preproc" not in alt for alt in g.alternatives(g.root))


# -- removal: hyperparameter values -----------------------------------------

def test_remove_value(grammar):
    g2 = remove_hyperparameter_value(grammar, "decisionTree::criterion=gini")
    crit = g2.algorithms()["decisionTree"].hyperparam("criterion")
    assert crit.values == ("entropy",)
    assert validate(g2) == []


def test_remove_value_keeps_siblings(grammar):
    g2 = remove_hyperparameter_value(grammar, "fagg::linkage=ward")
    got = g2.algorithms()["fagg"]
    assert got.hyperparam("linkage").values == ("complete", "average")
    # the other fagg hyperparameter is untouched
    assert got.hyperparam("n_clusters") == grammar.algorithms()["fagg"].hyperparam(
        "n_clusters"
    )


def test_cannot_remove_last_value(grammar):
    g = remove_hyperparameter_value(grammar, "decisionTree::criterion=gini")
    with pytest.raises(IllegalRemovalError):
        remove_hyperparameter_value(g, "decisionTree::criterion=entropy")


def test_cannot_remove_range_value(grammar):
    with pytest.raises(UnknownSymbolError):
        remove_hyperparameter_value(grammar, "pca::n_components=3")


def test_remove_value_unknown(grammar):
    with pytest.raises(UnknownSymbolError):
        remove_hyperparameter_value(grammar, "kNN::weights=cosine")


# -- removable_symbols -------------------------------------------------------

def test_all_twenty_removable(grammar):
    algs, values = removable_symbols(grammar)
    assert algs == set(grammar.algorithms())
    for a in sorted(algs):
        assert validate(remove_algorithm(grammar, a)) == []
    for v in sorted(values, key=lambda v: v.render()):
        assert validate(remove_hyperparameter_value(grammar, v)) == []


def test_removable_shrinks_with_grammar():
    g = parse_grammar(MINI)
    g = remove_algorithm(g, "nb")
    algs, values = removable_symbols(g)
    assert "kNN" not in algs          # last classifier is pinned
    assert "scaler" in algs and "pca" in algs
    g = remove_hyperparameter_value(g, "kNN::w=uniform")
    algs, values = removable_symbols(g)
    assert HyperparamValueId("kNN", "w", "distance") not in values


def test_removal_sequences_stay_valid(grammar):
    # property: any legal removal sequence keeps the grammar valid
    rng = np.random.default_rng(42)
    for _ in range(25):
        g = grammar
        for _ in range(rng.integers(1, 12)):
            algs, values = removable_symbols(g)
            pool = sorted(algs) + sorted(v.render() for v in values)
            if not pool:
                break
            pick = pool[int(rng.integers(len(pool)))]
            if "=" in pick:
                g = remove_hyperparameter_value(g, pick)
            else:
                g = remove_algorithm(g, pick)
            assert validate(g) == []
