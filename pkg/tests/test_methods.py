import functools
import random

import pytest
from hypothesis import given, settings, strategies as st

from dynobj import DefinitionError, SealedError, SignatureMismatch
from dynobj.methods import GREATER, LESS, applicable, specialization_order

from oracles import brute_next, brute_select, specificity
from scenarios import random_world


def label(m):
    return "(" + ",".join(c.name for c in m.specializers) + ")"


def test_precedence_list(abc):
    rt, _, gen = abc
    ms = sorted(rt.methods.methods(gen), key=functools.cmp_to_key(specialization_order),
                reverse=True)
    assert "".join(label(m) for m in ms) == "(C,C)(C,B)(B,C)(C,A)(B,B)(A,C)(B,A)(A,B)(A,A)"


def test_next_method_chains(abc):
    rt, (A, B, C), gen = abc
    for start, want in (((C, C), "(C,C)(C,B)(C,A)(B,A)(A,A)"),
                        ((B, C), "(B,C)(B,B)(B,A)(A,A)"),
                        ((A, C), "(A,C)(A,B)(A,A)")):
        chain = rt.methods.next_chain(rt.methods.find(gen, start))
        assert "".join(label(m) for m in chain) == want


def test_select_most_specific(abc):
    rt, (A, B, C), gen = abc
    c, b = rt.gnew(C), rt.gnew(B)
    assert gen(c, b) == "CB"
    assert gen(b, c) == "BC"
    assert rt.select(gen, A, A).specializers == (A, A)


def test_applicable(abc):
    rt, (A, B, C), gen = abc
    m = rt.methods.find(gen, (B, A))
    assert applicable(m, (C, A))
    assert not applicable(m, (A, C))
    with pytest.raises(ValueError):
        applicable(m, (A,))


def test_order_rejects_mixed_generics(abc):
    rt, (A, B, C), gen = abc
    other = rt.defgeneric("gother", 2)
    m2 = rt.defmethod(other, [A, A], lambda f, a, b: None)
    with pytest.raises(ValueError):
        specialization_order(rt.methods.find(gen, (A, A)), m2)


def test_around_outranks_primary_and_chains_down(bare):
    rt = bare
    A = rt.defclass("A")
    log = []
    g = rt.defgeneric("gdo", 1)

    @rt.defmethod(g, A)
    def _(f, a):
        log.append("primary")

    @rt.defmethod(g, A, around=True)
    def _(f, a):
        log.append("before")
        f.next_method(a)
        log.append("after")

    g(rt.gnew(A))
    assert log == ["before", "primary", "after"]


def test_duplicate_and_rank_errors(bare):
    A = bare.defclass("A")
    g = bare.defgeneric("g", 1)
    bare.defmethod(g, A, lambda f, a: None)
    with pytest.raises(DefinitionError):
        bare.defmethod(g, A, lambda f, a: None)
    with pytest.raises(DefinitionError):
        bare.defmethod(g, [A, A], lambda f, a, b: None)
    with pytest.raises(DefinitionError):
        bare.defmethod(g, "Nope", lambda f, a: None)


def test_sealed_method_table(bare):
    A = bare.defclass("A")
    g = bare.defgeneric("g", 1)
    bare.seal()
    with pytest.raises(SealedError):
        bare.defmethod(g, A, lambda f, a: None)


def test_alias_shares_implementation(rt):
    s = rt.gnew(rt.c.Stack)
    x = rt.gnew(rt.c.Counter)
    rt.g.gpush(s, x)
    assert rt.g.gtop(s) is x
    assert rt.g.gsize(s) == 1
    rt.g.gpop(s)
    assert rt.g.gsize(s) == 0
    alias = rt.methods.find(rt.g.gpush, (rt.c.Stack, rt.Object))
    assert alias.alias_of is rt.methods.find(rt.g.gput, (rt.c.Stack, rt.Object))


def test_alias_requires_compatible_signature(rt):
    with pytest.raises(DefinitionError):
        rt.methods.define_alias(rt.g.gincrBy, rt.g.gincr, (rt.c.Counter,))


def test_alternate_next_path_repacks_by_name(bare):
    rt = bare
    A = rt.defclass("A")
    B = rt.defclass("B", A)
    gwide = rt.defgeneric("gwide", 1, [("x", "int"), ("y", "int")], returns="obj")
    gnarrow = rt.defgeneric("gnarrow", 1, [("y", "int")], returns="obj")
    rt.defmethod(gnarrow, A, lambda f, a, y: ("narrow", y))
    rt.defmethod(gwide, B, lambda f, b, x, y: f.next_method(b),
                 next_path=(gnarrow, [B]))
    assert gwide(rt.gnew(B), 1, 2) == ("narrow", 2)
    gbad = rt.defgeneric("gbad", 1, [("z", "int")])
    with pytest.raises(SignatureMismatch):
        rt.defmethod(gwide, A, lambda f, a, x, y: None, next_path=(gbad, [A]))


# -- random hierarchies against the brute-force oracle ------------------------

@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_select_matches_oracle(seed):
    rng = random.Random(seed)
    rt, classes, gens = random_world(rng)
    for _ in range(30):
        gen = rng.choice(gens)
        rcv = [rng.choice(classes) for _ in range(gen.rank)]
        assert rt.methods.select_method(gen, rcv) is \
            brute_select(rt.methods.methods(gen), rcv)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_next_method_matches_oracle(seed):
    rng = random.Random(seed)
    rt, _, gens = random_world(rng)
    for gen in gens:
        ms = rt.methods.methods(gen)
        for m in ms:
            assert rt.methods.next_method_of(m) is brute_next(ms, m)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_order_is_strict_total(seed):
    rng = random.Random(seed)
    rt, _, gens = random_world(rng)
    for gen in gens:
        ms = rt.methods.methods(gen)
        for a in ms:
            assert specialization_order(a, a) == 0
            for b in ms:
                ab, ba = specialization_order(a, b), specialization_order(b, a)
                assert ab == -ba
                if a is not b:
                    assert ab in (LESS, GREATER)
                    assert (ab == GREATER) == (specificity(a) > specificity(b))
