import pytest

from dynobj import ContractLevel, Runtime, Thrown

from oracles import CONTRACT_TABLE
from scenarios import instrumented


@pytest.mark.parametrize("level", list(CONTRACT_TABLE))
def test_level_gating_matrix(level):
    rt, a, g, hits = instrumented(ContractLevel[level])
    g(a)
    ran = (hits["pre"] == 1, hits["post"] == 1, hits["invariant"] == 1)
    assert ran == CONTRACT_TABLE[level]
    assert hits["body"] == 1 and a.n == 1


def test_level_monotonicity():
    prev = set()
    for level in ContractLevel:
        rt, a, g, hits = instrumented(level)
        g(a)
        ran = {k for k, v in hits.items() if v}
        assert prev <= ran
        prev = ran


def test_level_switch_at_runtime():
    rt, a, g, hits = instrumented(ContractLevel.NONE)
    g(a)
    rt.contract_level = "post"
    g(a)
    assert (hits["pre"], hits["post"]) == (1, 1)
    assert rt.contract_level == ContractLevel.POST
    with pytest.raises(ValueError):
        rt.contract_level = "paranoid"


def test_invariant_runs_once_per_distinct_receiver():
    rt = Runtime(contract_level=ContractLevel.ALL)
    A = rt.defclass("A")
    g = rt.defgeneric("gpair", 2)
    seen = []
    rt.defmethod(g, [A, A], lambda f, a, b: None, pre=lambda f, a, b: None)
    rt.defmethod(rt.g.ginvariant, A, lambda f, a, func, file, line: seen.append(a))
    rt.seal()
    x, y = rt.gnew(A), rt.gnew(A)
    g(x, y)
    assert seen == [x, y]
    seen.clear()
    g(x, x)
    assert seen == [x]


def test_millicounter_pre_message(rt):
    m = rt.gnew(rt.c.MilliCounter)
    with pytest.raises(Thrown) as e:
        rt.g.gincrBy(m, 1500)
    assert rt.class_of(e.value.payload) is rt.c.ExBadAssert
    assert e.value.payload.msg == "millicount out or range"
    assert m.mcnt == 0


def test_millicounter_pre_off_at_none(rt):
    rt.contract_level = ContractLevel.NONE
    m = rt.gnew(rt.c.MilliCounter)
    rt.g.gincrBy(m, 1500)
    assert (m.cnt, m.mcnt) == (1, 500)


def test_millicounter_invariant_message(rt):
    rt.contract_level = ContractLevel.ALL
    m = rt.gnew(rt.c.MilliCounter)
    m.mcnt = 1500
    with pytest.raises(Thrown) as e:
        rt.g.gincr(m)
    assert e.value.payload.msg == "millicount out of range"
    # the origin is the contracted method that triggered the check
    assert e.value.func.startswith("gincr")


def test_millicounter_valid_passes_all_levels(rt):
    for level in ContractLevel:
        rt.contract_level = level
        m = rt.gnew(rt.c.MilliCounter)
        m.mcnt = 500
        rt.g.gincrBy(m, 499)
        assert (m.cnt, m.mcnt) == (0, 999)
        rt.g.gincrBy(m, 2)
        assert (m.cnt, m.mcnt) == (1, 1)


def test_invariant_chain_runs_superclass_first():
    rt = Runtime(contract_level=ContractLevel.ALL)
    A = rt.defclass("A")
    B = rt.defclass("B", A)
    log = []

    @rt.defmethod(rt.g.ginvariant, A)
    def _(f, a, func, file, line):
        log.append("A")

    @rt.defmethod(rt.g.ginvariant, B)
    def _(f, b, func, file, line):
        f.next_method(b)
        log.append("B")

    g = rt.defgeneric("gnop", 1)
    rt.defmethod(g, B, lambda f, b: None, post=lambda f, b: None)
    rt.seal()
    g(rt.gnew(B))
    assert log == ["A", "B"]


def test_preconditions_are_conjunctive():
    rt = Runtime(contract_level=ContractLevel.PRE)
    A = rt.defclass("A", attributes=[("n", "int")])
    B = rt.defclass("B", A)
    g = rt.defgeneric("gset", 1, [("v", "int")])
    rt.defmethod(g, A, lambda f, a, v: setattr(a, "n", v),
                 pre=lambda f, a, v: f.test_assert(v >= 0, "negative"))
    rt.defmethod(g, B, lambda f, b, v: f.next_method(b))  # no pre of its own
    rt.seal()
    b = rt.gnew(B)
    g(b, 3)
    assert b.n == 3
    with pytest.raises(Thrown) as e:
        g(b, -1)
    assert e.value.payload.msg == "negative"


def test_failing_post_skipped_at_pre_level():
    rt = Runtime(contract_level=ContractLevel.PRE)
    A = rt.defclass("A")
    g = rt.defgeneric("gq", 1)
    rt.defmethod(g, A, lambda f, a: None, post=lambda f, a: f.test_assert(False, "post"))
    rt.seal()
    g(rt.gnew(A))
    rt.contract_level = "post"
    with pytest.raises(Thrown):
        g(rt.gnew(A))


def test_test_assert_origin():
    rt = Runtime()
    A = rt.defclass("A")
    g = rt.defgeneric("gcheck", 1)

    def body(f, a):
        f.test_assert(False, "msg")

    rt.defmethod(g, A, body)
    rt.seal()
    with pytest.raises(Thrown) as e:
        g(rt.gnew(A))
    assert e.value.func == "body" and e.value.file == __file__
    assert rt.class_of(e.value.payload) is rt.c.ExBadAssert
    # explicit origin wins
    rt2 = Runtime()
    B = rt2.defclass("B")
    h = rt2.defgeneric("gcheck", 1)
    rt2.defmethod(h, B, lambda f, b: f.test_assert(False, "m", "here", "x.c", 7))
    with pytest.raises(Thrown) as e:
        h(rt2.gnew(B))
    assert e.value.origin == ("here", "x.c", 7)


def test_none_level_is_observationally_plain(rt):
    rt.contract_level = ContractLevel.NONE
    c = rt.gnew(rt.c.Counter)
    for _ in range(10):
        rt.g.gincr(c)
    assert c.cnt == 10


def wrap32(v):
    return (v + 2**31) % 2**32 - 2**31


def counter_with_post(check):
    rt = Runtime(contract_level=ContractLevel.POST)
    C = rt.defclass("C32", attributes=[("cnt", "int")])
    g = rt.defgeneric("gincr", 1)

    def pre(f, self):
        f.old.cnt = self.cnt

    def post(f, self):
        f.test_assert(check(self.cnt, f.old.cnt), "counter overflow")

    rt.defmethod(g, C, lambda f, self: setattr(self, "cnt", wrap32(self.cnt + 1)),
                 pre=pre, post=post)
    rt.seal()
    return rt, rt.gnew(C), g


def test_literal_overflow_post_holds_only_on_wrap():
    # the assertion exactly as printed, cnt < old_cnt, on an int32 counter
    rt, c, g = counter_with_post(lambda cnt, old: cnt < old)
    with pytest.raises(Thrown):
        g(c)  # an ordinary increment breaks it
    c.cnt = 2**31 - 1
    g(c)  # only the wrap satisfies it
    assert c.cnt == -2**31


def test_corrected_overflow_post(rt):
    rtc, c, g = counter_with_post(lambda cnt, old: cnt > old)
    g(c)
    c.cnt = 2**31 - 1
    with pytest.raises(Thrown) as e:
        g(c)
    assert e.value.payload.msg == "counter overflow"
    # the library counter carries the corrected check
    rt.contract_level = "post"
    k = rt.gnew(rt.c.Counter)
    rt.g.gincr(k)
    assert k.cnt == 1
