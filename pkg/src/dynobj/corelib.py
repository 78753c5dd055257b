"""Worked classes: counters, predicates, boxes, strings, proxies, streams.

``install(rt)`` defines everything on an open runtime; :func:`make_runtime`
builds, populates and seals one.
"""

from __future__ import annotations

from . import functors, properties
from .contracts import ContractLevel
from .exceptions import new_exception, throw_
from .object_model import RC_AUTO


def install_values(rt):
    """Boxed numbers and the String class cluster."""
    g = rt.g
    Value = rt.defclass("Value")
    Number = rt.defclass("Number", Value)
    Int = rt.defclass("Int", Number, [("value", "int")])
    Float = rt.defclass("Float", Number, [("value", "float")])
    String = rt.defclass("String", Value, [("str", "str")])
    StringLiteral = rt.defclass("StringLiteral", String)

    gint = rt.defgeneric("gint", 1, returns="int")
    gflt = rt.defgeneric("gflt", 1, returns="float")
    gstr = rt.defgeneric("gstr", 1, returns="str")
    ops = {name: rt.defgeneric(name, 2, returns="obj")
           for name in ("gadd", "gsub", "gmul", "gdiv")}
    gcat = rt.defgeneric("gcat", 2, returns="obj")
    gequal = rt.defgeneric("gequal", 2, returns="obj")

    dm = rt.defmethod
    dm(gint, Int, lambda f, self: self.value)
    dm(gint, Float, lambda f, self: int(self.value))
    dm(gflt, Number, lambda f, self: float(self.value))
    dm(gstr, String, lambda f, self: self.str)
    dm(gstr, Number, lambda f, self: str(self.value))

    def aInt(v):
        return rt.make_automatic(Int, value=int(v))

    def aFloat(v):
        return rt.make_automatic(Float, value=float(v))

    def aStr(s):
        return rt.make_automatic(StringLiteral, str=s)

    def new_box(cls, v):
        # results of arithmetic are handed to the current pool
        obj = rt.alloc_instance(cls)
        obj.value = v
        return g.gautoRelease(obj)

    fns = {"gadd": lambda a, b: a + b, "gsub": lambda a, b: a - b,
           "gmul": lambda a, b: a * b, "gdiv": lambda a, b: a / b}
    for name, gen in ops.items():
        fn = fns[name]
        if name != "gdiv":
            dm(gen, [Int, Int], lambda f, a, b, fn=fn: new_box(Int, fn(a.value, b.value)))
        dm(gen, [Number, Number],
           lambda f, a, b, fn=fn: new_box(Float, fn(float(a.value), float(b.value))))

    dm(gequal, [Number, Number], lambda f, a, b: rt.bool_object(a.value == b.value))
    dm(gequal, [String, String], lambda f, a, b: rt.bool_object(a.str == b.str))

    @dm(gcat, [String, String])
    def _(f, a, b):
        s = rt.alloc_instance(StringLiteral)
        s.str = a.str + b.str
        return g.gautoRelease(s)

    # class cluster: String builds StringLiteral instances
    dm(g.galloc, String.propmeta, lambda f, cls: cls)

    @dm(g.ginitWithStr, String.propmeta)
    def _(f, cls, str):
        return g.ginitWithStr(g.galloc(StringLiteral), str)

    @dm(g.ginitWithStr, String)
    def _(f, self, str):
        self.str = str
        return self

    for name, fn in (("aInt", aInt), ("aFloat", aFloat), ("aStr", aStr)):
        setattr(g, name, fn)
        setattr(rt, name, fn)


def install_predicates(rt):
    c = rt.c
    gand = rt.defgeneric("gand", 2, returns="obj")
    gor = rt.defgeneric("gor", 2, returns="obj")
    gnot = rt.defgeneric("gnot", 1, returns="obj")
    T, F, U = c.mTrue, c.mFalse, c.mTrueFalse
    True_, False_, TF = rt.True_, rt.False_, c.TrueFalse
    dm = rt.defmethod
    # three-valued (Kleene) tables; TrueFalse is "unknown"
    dm(gand, [T, T], lambda f, a, b: True_)
    dm(gand, [F, U], lambda f, a, b: False_)
    dm(gand, [U, F], lambda f, a, b: False_)
    dm(gand, [U, U], lambda f, a, b: TF)
    dm(gor, [F, F], lambda f, a, b: False_)
    dm(gor, [T, U], lambda f, a, b: True_)
    dm(gor, [U, T], lambda f, a, b: True_)
    dm(gor, [U, U], lambda f, a, b: TF)
    dm(gnot, T, lambda f, a: False_)
    dm(gnot, F, lambda f, a: True_)
    dm(gnot, U, lambda f, a: TF)


def install_counters(rt):
    g = rt.g
    Counter = rt.defclass("Counter", None, [("cnt", "int")])
    MilliCounter = rt.defclass("MilliCounter", Counter, [("mcnt", "int")])

    gincr = rt.defgeneric("gincr", 1)
    rt.defgeneric("gincrBy", 1, [("by", "int")])
    for n in range(2, 6):
        rt.defgeneric(f"gincrBy{n}", 1, [(f"by{i}", "int") for i in range(1, n + 1)])
    rt.defgeneric("gaddTo", 2, returns="obj")
    for n in range(2, 5):
        rt.defgeneric(f"gaddTo{n}", n + 1, returns="obj")

    def gincr_pre(f, self):
        f.old.cnt = self.cnt

    def gincr_post(f, self):
        f.test_assert(self.cnt > f.old.cnt, "counter overflow")

    @rt.defmethod(gincr, Counter, pre=gincr_pre, post=gincr_post)
    def _(f, self):
        self.cnt += 1

    rt.defmethod(g.gincrBy, Counter, lambda f, self, by: _add(self, by))
    rt.defmethod(g.gincrBy2, Counter, lambda f, self, by1, by2: _add(self, by1 + by2))
    rt.defmethod(g.gincrBy3, Counter,
                 lambda f, self, by1, by2, by3: _add(self, by1 + by2 + by3))
    rt.defmethod(g.gincrBy4, Counter,
                 lambda f, self, by1, by2, by3, by4: _add(self, by1 + by2 + by3 + by4))
    rt.defmethod(g.gincrBy5, Counter,
                 lambda f, self, by1, by2, by3, by4, by5:
                 _add(self, by1 + by2 + by3 + by4 + by5))

    @rt.defmethod(g.gaddTo, [Counter, Counter])
    def _(f, self, self2):
        self.cnt += self2.cnt
        return self

    @rt.defmethod(g.gaddTo2, [Counter] * 3)
    def _(f, self, self2, self3):
        self.cnt += self2.cnt + self3.cnt
        return self

    @rt.defmethod(g.gaddTo3, [Counter] * 4)
    def _(f, self, self2, self3, self4):
        self.cnt += self2.cnt + self3.cnt + self4.cnt
        return self

    @rt.defmethod(g.gaddTo4, [Counter] * 5)
    def _(f, self, self2, self3, self4, self5):
        self.cnt += self2.cnt + self3.cnt + self4.cnt + self5.cnt
        return self

    def milli_pre(f, self, by):
        f.test_assert(0 <= by < 1000, "millicount out or range")

    @rt.defmethod(g.gincrBy, MilliCounter, pre=milli_pre, next_path=(gincr, [MilliCounter]))
    def _(f, self, by):
        self.mcnt += by
        if self.mcnt >= 1000:
            self.mcnt -= 1000
            f.next_method(self)  # gincr(Counter)

    @rt.defmethod(g.ginvariant, MilliCounter)
    def _(f, self, func, file, line):
        f.next_method(self)
        f.test_assert(0 <= self.mcnt < 1000, "millicount out of range", func, file, line)

    def aCounter(seed=0):
        return rt.make_automatic(Counter, cnt=int(seed))

    g.aCounter = rt.aCounter = aCounter


def _add(counter, by):
    counter.cnt += by


def install_collections(rt):
    g, Object = rt.g, rt.Object
    Stack = rt.defclass("Stack", None, [("items", "any")])
    Array = rt.defclass("Array", None, [("items", "any")])
    gput = rt.defgeneric("gput", 2)
    gget = rt.defgeneric("gget", 1, returns="obj")
    gdrop = rt.defgeneric("gdrop", 1)
    rt.defgeneric("gpush", 2)
    rt.defgeneric("gtop", 1, returns="obj")
    rt.defgeneric("gpop", 1)
    gsize = rt.defgeneric("gsize", 1, returns="int")
    rt.defgeneric("gmap", 2, returns="obj")
    dm = rt.defmethod

    for cls in (Stack, Array):
        dm(g.ginit, cls, _init_items)
        dm(gsize, cls, lambda f, self: len(self.items))

    @dm(gput, [Stack, Object])
    def _(f, self, obj):
        self.items.append(g.gretain(obj))

    @dm(gget, Stack)
    def _(f, self):
        if not self.items:
            throw_(new_exception(rt, rt.c.ExBadRange, "empty stack"))
        return self.items[-1]

    @dm(gdrop, Stack)
    def _(f, self):
        if not self.items:
            throw_(new_exception(rt, rt.c.ExBadRange, "empty stack"))
        g.grelease(self.items.pop())

    rt.defalias(g.gpush, gput, [Stack, Object])
    rt.defalias(g.gtop, gget, [Stack])
    rt.defalias(g.gpop, gdrop, [Stack])

    @dm(g.gmap, [rt.c.Lazy, Array])
    def _(f, fun, bag):
        out = g.gnew(Array)
        out.items = [g.geval1(fun, x) for x in bag.items]
        return g.gautoRelease(out)

    def new_array(items):
        a = g.gnew(Array)
        a.items = list(items)
        return a

    rt.new_array = new_array


def _init_items(f, self):
    self.items = []
    return self


def install_proxies(rt):
    g, Object = rt.g, rt.Object
    Proxy = rt.defclass("Proxy", None, [("obj", "obj")])
    Tracer = rt.defclass("Tracer", Proxy)
    Locker = rt.defclass("Locker", Proxy)
    rt.trace_log = []
    rt.lock_log = []

    @rt.defmethod(g.ginitWith, [Proxy, Object])
    def _(f, self, obj):
        self.obj = obj
        return self

    rt.defforward(g.gum1, Proxy, "obj")
    for n in range(2, 6):
        for pos in range(n):
            specs = [Object] * n
            specs[pos] = Proxy
            rt.defforward(rt.unrecognized[n], specs, "obj")
            specs = list(specs)
            specs[pos] = Tracer
            rt.defmethod(rt.unrecognized[n], specs, _tracer(rt, pos), raw=True)
    rt.defmethod(g.gum1, Tracer, _tracer(rt, 0), raw=True)

    # Locker: lock, forward, unlock; the log stands in for real mutexes
    @rt.defmethod(g.gum1, Locker, raw=True)
    def _(f, self):
        rt.lock_log.append(("lock", self))
        try:
            f.next_method(self)
        finally:
            rt.lock_log.append(("unlock", self))

    @rt.defmethod(g.gum2, [Locker, Locker], raw=True)
    def _(f, a, b):
        first, second = sorted((a, b), key=id)
        rt.lock_log += [("lock", first), ("lock", second)]
        try:
            f.next_method(a, b)
        finally:
            rt.lock_log += [("unlock", second), ("unlock", first)]


def _tracer(rt, pos):
    def trace(f, *rcv):
        shown = tuple(r.obj if i == pos else r for i, r in enumerate(rcv))
        rt.trace_log.append((f[0].name, shown))
        f.next_method(*rcv)
        return f[3]
    return trace


def install_streams(rt):
    g, Object = rt.g, rt.Object
    InStream = rt.defclass("InStream", None, [("data", "any"), ("pos", "int")])
    OutStream = rt.defclass("OutStream", None, [("buf", "any")])
    IOStream = rt.defclass("IOStream", OutStream, [("in_stream", "obj")])
    gread = rt.defgeneric("gread", 1, returns="obj")
    dm = rt.defmethod

    @dm(g.gget, InStream)
    def _(f, self):
        if self.pos >= len(self.data):
            throw_(new_exception(rt, rt.c.ExNotFound, "end of stream"))
        item = self.data[self.pos]
        self.pos += 1
        return item

    @dm(gread, InStream)
    def _(f, self):
        rest = self.data[self.pos:]
        self.pos = len(self.data)
        return rest

    @dm(g.gput, [OutStream, Object])
    def _(f, self, obj):
        if self.buf is None:
            self.buf = []
        self.buf.append(obj)

    # multiple inheritance by delegation: input messages go to in_stream
    rt.defforward(g.gum1, IOStream, "in_stream", check_ret=False)

    def new_in(data):
        s = g.gnew(InStream)
        s.data = list(data)
        return s

    def new_io(data):
        s = g.gnew(IOStream)
        s.buf = []
        s.in_stream = new_in(data)
        return s

    rt.new_instream = new_in
    rt.new_iostream = new_io


def install_people(rt):
    g = rt.g
    Person = rt.defclass("Person", None, [("fstname", "obj"), ("lstname", "obj")])

    @rt.defmethod(g.ggetAt, [Person, rt.c.mP_name])
    def _(f, self, prop):
        return g.gcat(self.fstname, self.lstname)

    @rt.defmethod(g.ginitWith, [Person, rt.c.String])
    def _(f, self, name):
        first, _, last = name.str.partition(" ")
        self.fstname = g.gautoDelete(rt.aStr(first))
        self.lstname = g.gautoDelete(rt.aStr(" " + last if last else ""))
        return self


def bind_counter_properties(rt):
    g, c = rt.g, rt.c

    def int2OBJ(val):  # a plain function, not a method
        return g.gautoDelete(rt.aInt(val))

    rt.bind_property(c.Counter, "value", "cnt", int2OBJ, g.gint)
    rt.bind_property(c.Counter, "class", None, g.gclass)
    rt.int2OBJ = int2OBJ


def install_gc(rt):
    """Pool-collected memory: allocation autoreleases, delete does nothing."""
    g, Object = rt.g, rt.Object

    @rt.defmethod(g.galloc, Object.metaclass, around=True)
    def _(f, cls):
        f.next_method(cls)
        g.gautoRelease(f.ret)

    rt.defmethod(g.gdelete, Object, lambda f, self: None, around=True)

    @rt.defmethod(g.gautoDelete, Object, around=True)
    def _(f, self):
        return g.gclone(self) if self.rc == RC_AUTO else self

    @rt.defmethod(g.gretain, Object, around=True)
    def _(f, self):
        f.next_method(self)
        if self.rc == RC_AUTO:
            f.ret = g.gretain(f.ret)  # once more for auto


def install(rt, gc=False):
    install_values(rt)
    properties.install(rt)
    functors.install(rt)
    install_predicates(rt)
    install_counters(rt)
    install_collections(rt)
    install_proxies(rt)
    install_streams(rt)
    install_people(rt)
    bind_counter_properties(rt)
    if gc:
        install_gc(rt)


def make_runtime(gc=False, config=None, contract_level=ContractLevel.PRE, seal=True):
    """A runtime with the whole core library, sealed unless asked otherwise."""
    from .runtime import Runtime
    rt = Runtime(config=config, contract_level=contract_level)
    install(rt, gc=gc)
    if seal:
        rt.seal()
    return rt
