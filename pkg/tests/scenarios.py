"""Randomized scenarios shared by the module tests and the acceptance suite."""

import random

from dynobj import Runtime, Thrown, rethrow, throw_
from dynobj.corelib import make_runtime
from dynobj.lifecycle import default_allocator
from dynobj.exceptions import new_exception

from oracles import ShadowRC, ancestors


def run_ownership_scenario(seed, n_ops):
    """Random ownership ops against the shadow model; returns discrepancies."""
    rng = random.Random(seed)
    rt = make_runtime()
    shadow = ShadowRC()
    objs, pending = {}, {}
    pools = []
    shadow_pools = shadow.pools
    errors = []

    def releasable(k):
        return shadow.rc[k] - pending[k] > 0

    for _ in range(n_ops):
        op = rng.random()
        live = [k for k in objs if releasable(k)]
        if op < 0.2 or not live:
            k = len(objs)
            objs[k] = rt.gnew(rt.c.Counter)
            pending[k] = 0
            shadow.new(k)
        elif op < 0.45:
            k = rng.choice(live)
            rt.g.gretain(objs[k])
            shadow.retain(k)
        elif op < 0.7:
            k = rng.choice(live)
            rt.g.grelease(objs[k])
            shadow.release(k)
        elif op < 0.85:
            k = rng.choice(live)
            rt.g.gautoRelease(objs[k])
            shadow.autorelease(k)
            pending[k] += 1
        elif op < 0.93:
            pools.append(rt.gnew(rt.c.AutoRelease))
            shadow.push()
        elif pools:
            rt.g.gdelete(pools.pop())
            for k in shadow_pools[-1]:
                pending[k] -= 1
            shadow.pop()
    for k, o in objs.items():
        if k in shadow.freed:
            if o.id != 0:
                errors.append((k, "should be freed"))
        elif o.rc != shadow.rc[k]:
            errors.append((k, o.rc, shadow.rc[k]))
    return errors



CLASSES = ("Exception", "ExBadValue", "ExBadRange", "ExBadSize", "ExNotFound", "Counter")


def build_scenario(rng, depth=0):
    """A random nest: handlers, optional catch-all, a body that throws or nests."""
    handlers = [(rng.choice(CLASSES), rng.choice(["return", "rethrow"]))
                for _ in range(rng.randint(0, 3))]
    anyh = rng.choice([None, "return", "rethrow"])
    if depth < 4 and rng.random() < 0.6:
        body = ("nest", build_scenario(rng, depth + 1))
    else:
        body = rng.choice([("throw", rng.choice(CLASSES[1:] + ("class:ExBadSize",))),
                           ("ok", None)])
    return {"handlers": handlers, "any": anyh, "body": body, "id": rng.random()}


def simulate(rt, sc, log):
    """Independent oracle of the nested execution: returns outcome."""
    kind, arg = sc["body"]
    if kind == "ok":
        outcome = ("ok",)
    elif kind == "throw":
        outcome = ("thrown", arg)
    else:
        outcome = simulate(rt, arg, log)
    if outcome[0] == "thrown":
        name = outcome[1]
        if name.startswith("class:"):
            pcls = getattr(rt.c, name[6:]).propmeta
        else:
            pcls = getattr(rt.c, name)
        handled = None
        for i, (hname, action) in enumerate(sc["handlers"]):
            if id(getattr(rt.c, hname)) in ancestors(pcls):
                handled = (i, action)
                break
        if handled is None and sc["any"] is not None:
            handled = ("any", sc["any"])
        if handled is not None:
            log.append(("handler", sc["id"], handled[0]))
            outcome = ("ok",) if handled[1] == "return" else outcome
    log.append(("finally", sc["id"]))
    return outcome


def execute(rt, sc, log):
    kind, arg = sc["body"]

    def body():
        if kind == "throw":
            if arg.startswith("class:"):
                throw_(getattr(rt.c, arg[6:]))
            cls = getattr(rt.c, arg)
            throw_(rt.gnew(cls) if arg == "Counter" else new_exception(rt, cls))
        elif kind == "nest":
            execute(rt, arg, log)

    def handler(tag, action):
        def h(ex):
            log.append(("handler", sc["id"], tag))
            if action == "rethrow":
                rethrow(ex)
        return h

    handlers = [(getattr(rt.c, n), handler(i, a)) for i, (n, a) in enumerate(sc["handlers"])]
    anyh = handler("any", sc["any"]) if sc["any"] else None
    rt.g.protected(body, handlers, anyh, lambda: log.append(("finally", sc["id"])))


def run_nested_case(rt, seed):
    rng = random.Random(seed)
    sc = build_scenario(rng)
    expected, got = [], []
    want = simulate(rt, sc, expected)
    try:
        execute(rt, sc, got)
        outcome = ("ok",)
    except Thrown:
        outcome = ("thrown",)
    finals = [e for e in got if e[0] == "finally"]
    once = len(finals) == len({e[1] for e in finals})
    return got == expected and outcome[0] == want[0] and once


def random_world(rng, n_classes=20, max_depth=6, n_methods=25):
    rt = Runtime()
    classes = []
    for i in range(rng.randint(2, n_classes)):
        options = [c for c in classes if c.rank < max_depth]
        parent = rng.choice(options) if options and rng.random() < 0.8 else None
        classes.append(rt.defclass(f"K{i}", parent))
    gens = [rt.defgeneric(f"g{r}", r, returns="obj") for r in (1, 2, 3)]
    for _ in range(rng.randint(1, n_methods)):
        gen = rng.choice(gens)
        specs = [rng.choice(classes) for _ in range(gen.rank)]
        around = rng.random() < 0.15
        if rt.methods.find(gen, specs, kind="around" if around else "primary"):
            continue
        rt.defmethod(gen, specs, lambda f, *r: None, around=around, raw=True)
    return rt, classes, gens


def instrumented(level):
    """Runtime with one contracted method logging which hooks ran."""
    rt = Runtime(contract_level=level)
    A = rt.defclass("A", attributes=[("n", "int")])
    g = rt.defgeneric("gbump", 1)
    hits = {"pre": 0, "post": 0, "invariant": 0, "body": 0}

    def pre(f, a):
        hits["pre"] += 1

    def post(f, a):
        hits["post"] += 1

    @rt.defmethod(g, A, pre=pre, post=post)
    def _(f, a):
        hits["body"] += 1
        a.n += 1

    @rt.defmethod(rt.g.ginvariant, A)
    def _(f, a, func, file, line):
        hits["invariant"] += 1

    rt.seal()
    return rt, rt.gnew(A), g, hits


def sample_program(rt):
    """String acquired in a protected block, assertion thrown, FINALLY releases.

    Returns the printed lines and the final locals.
    """
    out = []
    state = {"s1": None, "s2": rt.Nil}

    def body():
        state["s1"] = "str1"
        state["s2"] = rt.gnewWithStr(rt.c.String, "str2")
        rt.assert_failed("throw ExBadAssert")

    def on_assert(ex):
        out.append(f"assertion {ex.payload.msg} at {ex.file}:{ex.line}")
        rt.g.gdelete(ex.payload)

    def on_alloc(ex):
        out.append("out of memory")

    def on_any(ex):
        out.append("unexpected")

    def cleanup():
        state["s1"] = None
        rt.g.gdelete(state["s2"])
        out.append("finally")

    rt.g.protected(body, [(rt.c.ExBadAssert, on_assert), (rt.c.mExBadAlloc, on_alloc)],
                   on_any, cleanup)
    return out, state


def check_sample_program(rt):
    """Golden run, then the same program with allocation failing."""
    out, state = sample_program(rt)
    ok = (len(out) == 2 and out[0].startswith("assertion throw ExBadAssert at " + __file__)
          and out[1] == "finally" and state["s2"].id == 0 and state["s1"] is None)
    rt.allocator = lambda cls: None
    try:
        out, _ = sample_program(rt)
    finally:
        rt.allocator = default_allocator
    return ok and out == ["out of memory", "finally"]
