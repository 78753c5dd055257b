"""Object creation, destruction and ownership.

The ``rc`` word of an object is either a plain reference count or one of two
sentinels: ``RC_STATIC`` objects (class-objects, functor singletons) ignore
every ownership message, ``RC_AUTO`` objects belong to a scope and are cloned
when something wants to keep them.
"""

from __future__ import annotations

import threading

from .dispatch import ClosedScopeFault, RefCountError
from .exceptions import throw_
from .object_model import RC_AUTO, RC_STATIC


class HeapStats:
    """Instrumented allocation counters (counted objects only)."""

    def __init__(self):
        self.allocations = 0
        self.deallocations = 0
        self.deinits = 0

    @property
    def live(self):
        return self.allocations - self.deallocations

    def snapshot(self):
        return (self.allocations, self.deallocations, self.live)

    def __repr__(self):
        return (f"HeapStats(allocations={self.allocations}, "
                f"deallocations={self.deallocations}, live={self.live})")


def default_allocator(cls):
    """Raw storage for one instance of ``cls``; None signals failure."""
    return object.__new__(cls.storage)


class Scope:
    """Lifetime of automatic objects; closing it invalidates them."""

    def __init__(self, ctx=None):
        self.ctx = ctx
        self.objects = []
        self.closed = False

    def close(self):
        if self.closed:
            return
        self.closed = True
        for obj in self.objects:
            obj.id = 0
        self.objects.clear()

    def __enter__(self):
        if self.ctx is not None:
            self.ctx.scopes.append(self)
        return self

    def __exit__(self, *exc):
        if self.ctx is not None and self.ctx.scopes and self.ctx.scopes[-1] is self:
            self.ctx.scopes.pop()
        self.close()
        return False


_root_scope = Scope()  # never closed


def current_scope(ctx):
    return ctx.scopes[-1] if ctx.scopes else _root_scope


def current_pool(rt, ctx):
    if not ctx.pools:
        # the default pool, drained only at shutdown
        root = rt.alloc_instance(rt.c.AutoRelease, counted=False)
        root.items = []
        ctx.pools.append(root)
    return ctx.pools[-1]


def drain(rt, pool):
    items, pool.items = pool.items, []
    grelease = rt.g.grelease
    for obj in reversed(items):
        grelease(obj)


def collect(rt, ctx, pool):
    """Drain ``pool``; an active pool is popped with every pool above it."""
    pools = ctx.pools
    if any(p is pool for p in pools):
        # inner pools go first, pools are strictly nested
        while pools:
            p = pools.pop()
            drain(rt, p)
            if p is pool:
                break
    else:
        drain(rt, pool)


def drain_all(rt, ctx):
    while ctx.pools:
        pool = ctx.pools.pop()
        drain(rt, pool)


def install(rt):
    g = rt.g
    Object = rt.Object
    mObject = Object.metaclass
    heap = rt.heap
    lock = threading.Lock()
    registry = rt.registry

    def alloc_instance(cls, counted=True):
        obj = rt.allocator(cls)
        if obj is None:
            # an instance could not be built here, so the class itself is thrown
            throw_(rt.c.ExBadAlloc)
        obj.id = cls.cid
        obj.rc = 1 if counted else RC_STATIC
        for name, zero in cls.zero_values:
            setattr(obj, name, zero)
        if counted:
            heap.allocations += 1
        return obj

    def make_automatic(cls, values=None, scope=None, **kw):
        obj = rt.allocator(cls)
        if obj is None:
            throw_(rt.c.ExBadAlloc)
        obj.id = cls.cid
        obj.rc = RC_AUTO
        for name, zero in cls.zero_values:
            setattr(obj, name, zero)
        for name, v in dict(values or {}, **kw).items():
            setattr(obj, name, v)
        if scope is None:
            scope = current_scope(rt.context())
        if scope.closed:
            raise ClosedScopeFault("scope already closed")
        scope.objects.append(obj)
        return obj

    rt.alloc_instance = alloc_instance
    rt.make_automatic = make_automatic
    rt.scope = lambda: Scope(rt.context())

    pool_cls = rt.defclass("AutoRelease", Object, [("items", "any")])

    gen = rt.defgeneric
    galloc = gen("galloc", 1, returns="obj")
    gdealloc = gen("gdealloc", 1)
    ginit = gen("ginit", 1, returns="obj")
    ginitWith = gen("ginitWith", 2, returns="obj")
    gen("ginitWithStr", 1, [("str", "str")], returns="obj")
    gdeinit = gen("gdeinit", 1, returns="obj")
    gclass = gen("gclass", 1, returns="obj")
    gen("gisKindOf", 2, returns="obj")
    gretain = gen("gretain", 1, returns="obj")
    grelease = gen("grelease", 1)
    gautoRelease = gen("gautoRelease", 1, returns="obj")
    gautoDelete = gen("gautoDelete", 1, returns="obj")
    gdelete = gen("gdelete", 1)
    gen("ginitialize", 1)
    gen("gdeinitialize", 1)

    dm = rt.defmethod

    @dm(galloc, mObject)
    def _(f, cls):
        return alloc_instance(cls)

    @dm(gdealloc, Object)
    def _(f, self):
        heap.deallocations += 1
        self.id = 0
        self.rc = 0

    @dm(ginit, Object)
    def _(f, self):
        return self

    @dm(gdeinit, Object)
    def _(f, self):
        heap.deinits += 1
        return self

    @dm(ginitWith, [Object, Object])
    def _(f, self, other):
        # default copy initializer: same class, slot by slot
        cls = registry.class_of(self.id)
        if registry.class_of(other.id) is not cls:
            rt.throw_bad_message(f[0], (self, other), "copy needs identical classes")
        for a in cls.attributes:
            setattr(self, a.name, getattr(other, a.name))
        return self

    @dm(gclass, Object)
    def _(f, self):
        return registry.class_of(self.id)

    @dm("gisKindOf", [Object, Object])
    def _(f, self, cls):
        return rt.bool_object(registry.is_kind_of(registry.class_of(self.id), cls))

    def gclone(obj):
        return ginitWith(galloc(gclass(obj)), obj)

    def gnew(cls):
        return ginit(galloc(cls))

    def gnewWith(cls, obj):
        return ginitWith(galloc(cls), obj)

    def gnewWithStr(cls, s):
        return g.ginitWithStr(galloc(cls), s)

    @dm(gretain, Object)
    def _(f, self):
        rc = self.rc
        if rc < RC_AUTO:
            with lock:
                self.rc += 1
            return self
        if rc == RC_AUTO:
            return gclone(self)
        return self

    @dm(grelease, Object)
    def _(f, self):
        rc = self.rc
        if rc >= RC_AUTO:
            return
        if rc == 0:
            raise RefCountError(f"release of {registry.class_of(self.id).name} "
                                "with a zero reference count")
        with lock:
            self.rc = rc = self.rc - 1
        if rc == 0:
            gdeinit(self)
            gdealloc(self)

    @dm(gautoRelease, Object)
    def _(f, self):
        rc = self.rc
        if rc == RC_STATIC:
            return self
        if rc == RC_AUTO:
            self = gclone(self)
        current_pool(rt, f[5]).items.append(self)
        return self

    @dm(gautoDelete, Object)
    def _(f, self):
        if self.rc == RC_AUTO:
            return gclone(self)
        return self

    @dm(gdelete, Object)
    def _(f, self):
        if self.rc >= RC_AUTO:
            return
        gdeinit(self)
        gdealloc(self)

    # pools: ginit pushes on the sender's context, gdeinit drains and pops
    @dm(ginit, pool_cls)
    def _(f, self):
        self.items = []
        f[5].pools.append(self)
        return self

    @dm(gdeinit, pool_cls)
    def _(f, self):
        collect(rt, f[5], self)
        f.next_method()
        return self

    # deleting a pool collects it even when gdelete itself is neutralized
    @dm(gdelete, pool_cls)
    def _(f, self):
        collect(rt, f[5], self)
        f.next_method()

    for name, fn in (("gclone", gclone), ("gnew", gnew), ("gnewWith", gnewWith),
                     ("gnewWithStr", gnewWithStr)):
        setattr(g, name, fn)
        setattr(rt, name, fn)
