from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from goldens import GOLDEN
from reqlift.errors import ReqliftError
from reqlift.ltl import parse_formula
from reqlift.metrics import (FormulaToken, automation_percent, automation_score,
                             char_levenshtein, fmeasure, subformulas, tokenize,
                             typed_levenshtein)


def toks(text):
    return tokenize(parse_formula(text))


def test_identity_distance_zero():
    a = toks("G((Regulator_Mode = INIT) => (Heat_Control = Off))")
    assert typed_levenshtein(a, a) == 0


def test_logical_symbol_swap_costs_one():
    assert typed_levenshtein(toks("p AND q"), toks("p OR q")) == 1


def test_variable_rename_is_free():
    a = toks("Lower_Desired_Temperature_Status = Invalid")
    b = toks("Upper_Desired_Temperature_Status = Invalid")
    assert typed_levenshtein(a, b) == 0


def test_string_token_cost_is_normalized_character_distance():
    a = toks("Heat_Control = Off")
    b = toks("Heat_Control = Control_Off")
    # "Off" vs "Control_Off": 8 insertions over max length 11
    assert typed_levenshtein(a, b) == Fraction(8, 11)


def test_cross_kind_substitution_costs_one():
    a = [FormulaToken("VariableToken", "x")]
    b = [FormulaToken("StringToken", "x")]
    assert typed_levenshtein(a, b) == 1


def test_char_levenshtein():
    assert char_levenshtein("kitten", "sitting") == 3


def test_subformulas_atom():
    f = parse_formula("Regulator_Mode = INIT")
    assert subformulas(f) == {f}


def test_subformulas_implication():
    f = parse_formula("G(p => q)")
    assert len(subformulas(f)) == 4


def test_formula_13_has_seven_subformulas():
    assert len(subformulas(parse_formula(GOLDEN[13]))) == 7


def test_subformula_count_equals_node_count_without_duplicates():
    f = parse_formula("G((a = On AND b = Off) => X(c = true))")
    from reqlift.ltl import walk
    assert len(subformulas(f)) == len(list(walk(f)))


def test_fmeasure_identity():
    f = parse_formula(GOLDEN[10])
    report = fmeasure(f, f)
    assert report.precision == report.recall == report.f_measure == 1.0


def test_fmeasure_missing_conjunct_is_penalized():
    ground = parse_formula(GOLDEN[10])
    generated = parse_formula(
        "G((Regulator_Interface_Failure = false AND "
        "Regulator_Internal_Failure = false) => (Regulator_Status = true))")
    report = fmeasure(ground, generated)
    # dropping a conjunct dents the compound subformulas on both sides
    # (the untouched atoms still match perfectly, so the drop is mild)
    assert report.recall < 1.0
    assert report.f_measure < 1.0
    assert report.f_measure > 0.8
    disjoint = fmeasure(ground, parse_formula(
        "F(Current_Temperature < Lower_Desired_Temperature)"))
    assert disjoint.f_measure < report.f_measure


def test_fmeasure_disjoint_shapes_below_half():
    ground = parse_formula("G(Regulator_Mode = INIT)")
    generated = parse_formula(
        "F(Current_Temperature < Lower_Desired_Temperature)")
    report = fmeasure(ground, generated)
    assert report.f_measure < 0.5


def test_variable_renaming_leaves_fmeasure_unchanged():
    ground = parse_formula(GOLDEN[10])
    renamed = parse_formula(
        "G((A = false AND B = false AND C = Valid) => (D = true))",
        set())
    report = fmeasure(ground, renamed)
    assert report.f_measure == 1.0


def test_automation_scores_match_published_table():
    faa = ["Correct"] * 39 + ["Partial"] * 2 + ["Wrong"] * 1
    assert automation_percent(faa) == 95
    tte = ["Correct"] * 24 + ["Partial"] * 8 + ["Wrong"] * 4
    assert automation_percent(tte) == 78
    assert automation_score(["Correct"] * 5) == 1.0


def test_automation_empty_is_an_error():
    with pytest.raises(ReqliftError):
        automation_score([])


token_strategy = st.builds(
    FormulaToken,
    kind=st.sampled_from(["LogicalSymbol", "StringToken", "VariableToken"]),
    text=st.text(alphabet="abcdXY=<", min_size=0, max_size=5))
token_lists = st.lists(token_strategy, max_size=6)


@settings(max_examples=60, deadline=None)
@given(token_lists, token_lists)
def test_distance_symmetric(a, b):
    assert typed_levenshtein(a, b) == typed_levenshtein(b, a)


@settings(max_examples=60, deadline=None)
@given(token_lists)
def test_distance_identity(a):
    assert typed_levenshtein(a, a) == 0


@settings(max_examples=40, deadline=None)
@given(token_lists, token_lists, token_lists)
def test_distance_triangle_inequality(a, b, c):
    assert typed_levenshtein(a, c) <= \
        typed_levenshtein(a, b) + typed_levenshtein(b, c)
