import random

import pytest

from oracles import lasso_satisfiable, random_ltl
from reqlift.buchi import (BitEncoding, Counterexample, Holds, build_kripke,
                           eval_on_lasso, format_lasso, is_empty, ltl_to_buchi,
                           model_check, propositionalize)
from reqlift.corpus import RequirementDoc
from reqlift.errors import ResourceError
from reqlift.ltl import (And, Atom, BoolVal, EnumVal, G, Not, Prop,
                         VarRef, conj, nnf, parse_formula, to_text)
from reqlift.pipeline import compile_corpus


def test_enum_encoding_uses_two_bits(compiled):
    enc = BitEncoding(compiled.symbols)
    coding = enc.enums["Regulator_Mode"]
    assert coding.bits == ["Regulator_Mode_bit0", "Regulator_Mode_bit1"]
    assert coding.patterns["NORMAL"] == (True, False)   # index 1, little endian
    assert coding.invalid == [(True, True)]


def test_encode_normal_is_bit0_and_not_bit1(compiled):
    enc = BitEncoding(compiled.symbols)
    prop = enc.encode_atom(Atom(VarRef("Regulator_Mode"), "=", EnumVal("NORMAL")))
    assert to_text(prop) == "Regulator_Mode_bit0 AND NOT(Regulator_Mode_bit1)"


def test_boolean_passthrough(compiled):
    enc = BitEncoding(compiled.symbols)
    prop = enc.encode_atom(Atom(VarRef("Regulator_Status"), "=", BoolVal(True)))
    assert prop == Prop("Regulator_Status")


def test_comparison_becomes_fresh_atom(compiled):
    enc = BitEncoding(compiled.symbols)
    prop = enc.encode_atom(Atom(VarRef("Current_Temperature"), "<",
                                VarRef("Lower_Desired_Temperature")))
    assert prop == Prop("Current_Temperature_lt_Lower_Desired_Temperature")


def test_validity_constraint_excludes_spare_code(compiled):
    enc = BitEncoding(compiled.symbols)
    enc.encode_atom(Atom(VarRef("Regulator_Mode"), "=", EnumVal("INIT")))
    constraints = [to_text(c) for c in enc.validity_constraints()]
    assert "NOT(Regulator_Mode_bit0 AND Regulator_Mode_bit1)" in constraints


def test_decode_round_trip(compiled):
    enc = BitEncoding(compiled.symbols)
    for value, pattern in enc.enums["Regulator_Mode"].patterns.items():
        valuation = dict(zip(enc.enums["Regulator_Mode"].bits, pattern))
        assert enc.decode(valuation)["Regulator_Mode"] == value


def test_propositionalization_round_trip_on_golden_atoms(compiled):
    import itertools

    from reqlift.buchi import _eval_bool
    from reqlift.ltl import EnumVal as EV
    from reqlift.ltl import atoms_of

    enc = BitEncoding(compiled.symbols)
    for cf in compiled.formulas:
        for atom in atoms_of(cf.formula):
            if not isinstance(atom, Atom) or not isinstance(atom.rhs, EV):
                continue
            prop = enc.encode_atom(atom)
            bits = enc.enums[atom.var.text()].bits
            for combo in itertools.product([False, True], repeat=len(bits)):
                valuation = dict(zip(bits, combo))
                decoded = enc.decode(valuation)[atom.var.text()]
                # the bit formula holds exactly when the decoded value
                # satisfies the original typed atom
                assert _eval_bool(prop, valuation) == \
                    (decoded == atom.rhs.name)


def test_propositionalize_conjoins_constraints(compiled):
    f = parse_formula("G(Regulator_Mode = INIT => Regulator_Status = true)",
                      set(compiled.symbols.category))
    prop, enc = propositionalize(f, compiled.symbols)
    assert isinstance(prop, And)
    bare, _ = propositionalize(f, compiled.symbols, encoding=enc,
                               include_constraints=False)
    assert not isinstance(bare, And)


# -- automaton basics


def test_globally_p_nonempty():
    p = Prop("p")
    aut = ltl_to_buchi(G(p))
    w = is_empty(aut)
    assert w is not None
    assert all(v["p"] for v in w.prefix + w.cycle)


def test_contradiction_is_empty():
    p = Prop("p")
    assert is_empty(ltl_to_buchi(And((p, Not(p))))) is None


def test_finally_p_nonempty_with_two_phases():
    from reqlift.ltl import F
    p = Prop("p")
    aut = ltl_to_buchi(F(p))
    w = is_empty(aut)
    assert w is not None
    assert eval_on_lasso(F(p), w.prefix, w.cycle)


def test_small_formula_oracle_agreement():
    rng = random.Random(7)
    for _ in range(40):
        f = nnf(random_ltl(rng))
        w = is_empty(ltl_to_buchi(f))
        assert (w is not None) == lasso_satisfiable(f), to_text(f)
        if w is not None:
            assert eval_on_lasso(f, w.prefix, w.cycle)


# -- consistency of the corpus


def _conjunction(compiled):
    enc = BitEncoding(compiled.symbols)
    props = [enc.encode(cf.formula) for cf in compiled.formulas]
    return conj(props + enc.global_constraints()), enc


def test_corpus_conjunction_consistent(compiled):
    body, enc = _conjunction(compiled)
    w = is_empty(ltl_to_buchi(body))
    assert w is not None
    assert eval_on_lasso(body, w.prefix, w.cycle)
    table = format_lasso(w, enc)
    assert "Regulator_Mode=INIT" in table.replace(" ", "").replace("'", "")


def test_contradictory_extra_requirement_is_inconsistent(compiled):
    body, enc = _conjunction(compiled)
    extra = parse_formula("G(Regulator_Mode = INIT => Output_Regulator_Status = On)",
                          set(compiled.symbols.category))
    full = And((body, enc.encode(extra)))
    assert is_empty(ltl_to_buchi(full)) is None


# -- model checking


def test_trivial_theorem_holds(compiled):
    f = parse_formula("G(Regulator_Mode = INIT OR NOT(Regulator_Mode = INIT))",
                      set(compiled.symbols.category))
    assert isinstance(model_check(compiled.model, f), Holds)


def test_safety_theorem_holds_on_shipped_model(compiled):
    from goldens import SAFETY_THEOREM
    theorem = parse_formula(SAFETY_THEOREM, set(compiled.symbols.category))
    assert isinstance(model_check(compiled.model, theorem), Holds)


def test_failed_to_init_sentence_breaks_theorem(corpus, glossary, partition):
    from goldens import FAILED_TO_INIT_SENTENCE, SAFETY_THEOREM
    extra = RequirementDoc(16, "REQ-EXTRA", FAILED_TO_INIT_SENTENCE)
    result = compile_corpus(corpus + [extra], glossary, partition)
    assert len(result.formulas) == 16
    assert len(result.model.transitions) == 4
    theorem = parse_formula(SAFETY_THEOREM, set(result.symbols.category))
    outcome = model_check(result.model, theorem)
    assert isinstance(outcome, Counterexample)
    enc = BitEncoding(result.symbols)
    enc.encode(theorem)
    modes = [enc.decode(v)["Regulator_Mode"]
             for v in outcome.lasso.prefix + outcome.lasso.cycle]
    failed_at = modes.index("FAILED")
    assert "NORMAL" in modes[failed_at:]


def test_counterexample_is_a_model_trace(compiled, corpus, glossary, partition):
    # product soundness spot check: the witness must be a real trace and
    # must satisfy the negated theorem semantically
    from goldens import FAILED_TO_INIT_SENTENCE, SAFETY_THEOREM
    extra = RequirementDoc(16, "REQ-EXTRA", FAILED_TO_INIT_SENTENCE)
    result = compile_corpus(corpus + [extra], glossary, partition)
    theorem = parse_formula(SAFETY_THEOREM, set(result.symbols.category))
    enc = BitEncoding(result.symbols)
    prop_theorem = enc.encode(theorem)
    outcome = model_check(result.model, theorem, encoding=enc)
    lasso = outcome.lasso
    assert eval_on_lasso(nnf(Not(prop_theorem)), lasso.prefix, lasso.cycle)
    kripke = build_kripke(result.model, enc)
    index = {tuple(sorted(s.items())): i for i, s in enumerate(kripke.states)}
    trace = [index[tuple(sorted(v.items()))] for v in lasso.prefix + lasso.cycle]
    assert trace[0] in kripke.initial
    for a, b in zip(trace, trace[1:]):
        assert b in kripke.succ[a]
    assert trace[len(lasso.prefix)] in kripke.succ[trace[-1]]


def test_state_cap_enforced(compiled):
    enc = BitEncoding(compiled.symbols)
    with pytest.raises(ResourceError):
        build_kripke(compiled.model, enc, cap=16)


def test_automaton_dot_export():
    aut = ltl_to_buchi(G(Prop("p")))
    dot = aut.to_dot()
    assert dot.startswith("digraph buchi")
    assert "doublecircle" in dot
