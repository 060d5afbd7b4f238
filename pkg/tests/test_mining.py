import pytest

from goldens import EQ1
from reqlift.errors import NoOpError
from reqlift.gr1 import (GR1Spec, Unrealizable, add_assumption,
                         build_gr1, check_realizability)
from reqlift.ltl import normalize, parse_formula, to_text
from reqlift.mining import (_all_plays_hit, enumerate_candidates,
                            induced_product, mine)


@pytest.fixture(scope="module")
def shipped(compiled):
    spec = build_gr1([(cf.formula, cf.doc.source_tag) for cf in compiled.formulas],
                     compiled.symbols)
    verdict = check_realizability(spec)
    assert isinstance(verdict, Unrealizable)
    return spec, verdict.counterstrategy


def test_top_candidate_is_the_published_assumption(shipped, compiled):
    spec, cs = shipped
    candidates = enumerate_candidates(cs, spec)
    assert candidates
    top = candidates[0]
    assert top.rank == 1
    assert normalize(top.formula) == \
        normalize(parse_formula(EQ1, set(compiled.symbols.category)))
    assert top.english == ("Globally, it is never the case that Regulator "
                           "Init Timeout is True and Regulator Status is True.")


def test_candidates_deterministic_and_duplicate_free(shipped):
    spec, cs = shipped
    first = [to_text(c.formula) for c in enumerate_candidates(cs, spec)]
    second = [to_text(c.formula) for c in enumerate_candidates(cs, spec)]
    assert first == second
    assert len(first) == len(set(first))


def test_candidate_negation_satisfied_by_all_plays(shipped):
    spec, cs = shipped
    arena = cs.arena
    product = induced_product(cs, spec)
    for cand in enumerate_candidates(cs, spec):
        if cand.template != "G_not_conj":
            continue
        a, b = cand.atoms

        def hit(pid):
            pos = arena.positions[pid]
            return bool(pos >> arena.index[a] & 1) and \
                bool(pos >> arena.index[b] & 1)

        assert _all_plays_hit(product, arena, hit)


def test_accepted_assumption_invalidates_triggering_counterstrategy(
        shipped, compiled):
    spec, cs = shipped
    strengthened = add_assumption(
        spec, parse_formula(EQ1, set(compiled.symbols.category)))
    product = induced_product(cs, spec)
    assert product.roots
    # every play now walks through a position the new assumption forbids
    conjunct = strengthened.beta_e[-1].formula
    from reqlift.gr1 import _compile
    check = _compile(conjunct, cs.arena.index)
    for n in product.roots:
        pid, _mem = product.nodes[n]
        assert not check(cs.arena.positions[pid], 0)


def test_mine_always_accept_reaches_realizability(shipped):
    spec, _cs = shipped
    session = mine(spec, lambda cand: True)
    assert session.status == "realizable"
    assert session.iterations == 1
    assert len(session.accepted) == 1
    assert normalize(session.accepted[0].formula) == \
        normalize(parse_formula(EQ1))


def test_mine_always_reject_exhausts(shipped):
    spec, _cs = shipped
    session = mine(spec, lambda cand: False)
    assert session.status == "exhausted"
    assert session.accepted == []
    assert session.rejected


def test_mine_on_realizable_spec_is_a_noop():
    spec = GR1Spec(["i0"], ["o0"])
    with pytest.raises(NoOpError):
        mine(spec, lambda cand: True)
