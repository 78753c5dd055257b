import pytest
from hypothesis import given, settings, strategies as st

from dynobj import Thrown, rethrow, throw_
from dynobj.corelib import make_runtime
from dynobj.exceptions import EXCEPTION_CLASSES, new_exception

from scenarios import check_sample_program, run_nested_case


def test_hierarchy(rt):
    for name in EXCEPTION_CLASSES:
        assert rt.registry.is_kind_of(getattr(rt.c, name), rt.c.Exception)


def test_throw_nil_rejected():
    with pytest.raises(ValueError):
        throw_(None)


def test_handlers_first_match_wins(rt):
    ex = new_exception(rt, rt.c.ExBadRange, "r")
    log = []
    rt.g.protected(lambda: throw_(ex),
                   [(rt.c.ExBadValue, lambda e: log.append("value")),
                    (rt.c.Exception, lambda e: log.append("exception")),
                    (rt.c.ExBadRange, lambda e: log.append("range"))])
    assert log == ["exception"]


def test_any_handler_and_unmatched(rt):
    ex = new_exception(rt, rt.c.ExBadRange)
    got = rt.g.protected(lambda: throw_(ex), [("ExBadSize", lambda e: 1)],
                         any_handler=lambda e: e.payload)
    assert got is ex
    with pytest.raises(Thrown):
        rt.g.protected(lambda: throw_(ex), [("ExBadSize", lambda e: 1)])


def test_any_object_can_be_thrown(rt):
    c = rt.gnew(rt.c.Counter)
    got = rt.g.protected(lambda: throw_(c), [(rt.c.Counter, lambda e: e.payload)])
    assert got is c


def test_class_object_caught_by_metaclass(rt):
    caught = rt.g.protected(lambda: throw_(rt.c.ExBadAlloc),
                            [(rt.c.ExBadAlloc, lambda e: "instance handler"),
                             (rt.c.mExBadAlloc, lambda e: "class handler")])
    assert caught == "class handler"
    # the metaclass of a superclass catches too
    assert rt.g.protected(lambda: throw_(rt.c.ExBadAlloc),
                          [(rt.c.mException, lambda e: "ok")]) == "ok"


def test_host_exceptions_pass_through(rt):
    log = []
    with pytest.raises(ZeroDivisionError):
        rt.g.protected(lambda: 1 / 0, any_handler=lambda e: log.append(e),
                       finally_=lambda: log.append("finally"))
    assert log == ["finally"]


def test_rethrow_keeps_origin(rt):
    ex = new_exception(rt, rt.c.ExBadValue, "v")

    def inner():
        throw_(ex)

    def handler(e):
        rethrow(e)

    with pytest.raises(Thrown) as info:
        rt.g.protected(inner, [(rt.c.Exception, handler)])
    assert info.value.func == "inner"


def test_thrown_str(rt):
    ex = new_exception(rt, rt.c.ExBadValue, "bad")
    try:
        throw_(ex)
    except Thrown as t:
        assert str(t).startswith("ExBadValue: bad (")
        assert t.line > 0


def test_sample_program(rt):
    assert check_sample_program(rt)


@pytest.fixture(scope="module")
def shared_rt():
    return make_runtime()


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32))
def test_random_nested_protected(shared_rt, seed):
    assert run_nested_case(shared_rt, seed)
