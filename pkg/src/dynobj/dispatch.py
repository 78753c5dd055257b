"""Message dispatch: per-rank caches, message frames, substitution and forwarding.

Each execution context owns one cache per generic rank.  A cache is a
power-of-two array of slots; a slot holds a short chain (at most three
entries, oldest evicted first).  Slots are addressed with an asymmetric hash,
the selector id plus the receiver ids shifted left by their position.

Sending a generic builds a :class:`Frame` and invokes the cached
implementation with it.  When no specialization applies, the
``gunrecognizedMessage<n>`` method selected for the same receivers is cached
in place of the missing one, so a repeat of a delegated message is an
ordinary cache hit.
"""

from __future__ import annotations

import threading
import weakref
from dataclasses import dataclass
from operator import itemgetter
from types import SimpleNamespace

from .object_model import RC_AUTO, LookupFailure

SEL, RCV, ARG, RET, MTH, CTX = range(6)

#: entry layout inside a slot chain
E_KEY, E_MTH, E_IMP, E_HASH, E_FWD = range(5)

CHAIN_BOUND = 3


@dataclass
class DispatchConfig:
    fast_message_rank: int = 5
    initial_slots: int = 1024
    cache_slot_bound: int = 65536

    def __post_init__(self):
        if not 0 <= self.fast_message_rank <= 5:
            raise ValueError("fast_message_rank must be in 0..5")
        for name in ("initial_slots", "cache_slot_bound"):
            v = getattr(self, name)
            if v < 1 or v & (v - 1):
                raise ValueError(f"{name} must be a power of two")
        if self.cache_slot_bound < self.initial_slots:
            raise ValueError("cache_slot_bound must be >= initial_slots")


class ClosedScopeFault(RuntimeError):
    """An automatic object was used after its scope closed."""


class DispatchError(RuntimeError):
    pass


class RefCountError(RuntimeError):
    """Reference-count underflow or use of a deallocated object."""


def hash_slot(sel_id: int, receiver_ids, mask: int) -> int:
    h = sel_id
    for shift, rid in enumerate(receiver_ids):
        h += rid << shift
    return (h & 0xFFFFFFFF) & mask


def cache_key(sel_id: int, receiver_ids) -> int:
    # exact, collision-free encoding of (selector, receiver words)
    k = sel_id
    for i, rid in enumerate(receiver_ids):
        k += rid << (24 + 32 * i)
    return k


class RankCache:
    """Slot array for the generics of one rank."""

    __slots__ = ("slots", "mask", "count", "bound", "initial")

    def __init__(self, initial=1024, bound=65536):
        self.initial = initial
        self.bound = bound
        self.clear()

    def clear(self):
        self.slots = [None] * self.initial
        self.mask = self.initial - 1
        self.count = 0

    def find(self, key, h):
        chain = self.slots[h & self.mask]
        if chain:
            for e in chain:
                if e[E_KEY] == key:
                    return e
        return None

    def insert(self, entry) -> int:
        """Add an entry; returns the number of evicted entries (0 or 1)."""
        size = len(self.slots)
        if self.count + 1 > 0.75 * size and size < self.bound:
            self._grow()
        slots = self.slots
        i = entry[E_HASH] & self.mask
        chain = slots[i]
        if chain is None:
            slots[i] = [entry]
            self.count += 1
            return 0
        chain.append(entry)
        if len(chain) > CHAIN_BOUND:
            del chain[0]
            return 1
        self.count += 1
        return 0

    def _grow(self):
        entries = [e for chain in self.slots if chain for e in chain]
        size = len(self.slots) * 2
        self.slots = [None] * size
        self.mask = size - 1
        self.count = 0
        for e in entries:
            self.insert(e)

    def chains(self):
        return [c for c in self.slots if c]

    def longest_chain(self):
        return max((len(c) for c in self.slots if c), default=0)


class Frame(list):
    """One in-flight message: ``[sel, receivers, arg, ret, method, context]``.

    Method bodies receive their frame first.  ``ret`` is the return slot
    (RETVAL): ``next_method`` and ``forward_message`` write the callee's
    result into it, and the body may read or overwrite it afterwards.
    """

    __slots__ = ()

    sel = property(itemgetter(SEL), doc="the message selector (a generic)")
    receivers = property(itemgetter(RCV))
    arg = property(itemgetter(ARG), doc="packed closed arguments")
    mth = property(itemgetter(MTH), doc="the executing method")
    ctx = property(itemgetter(CTX))

    @property
    def ret(self):
        return self[RET]

    @ret.setter
    def ret(self, value):
        self[RET] = value

    @property
    def old(self):
        """Capture area shared by a method's contract hooks."""
        if len(self) == 6:
            self.append(SimpleNamespace())
        return self[6]

    def argument(self, name):
        """Closed argument by name, read through the selector's signature."""
        for slot in self[SEL].layout:
            if slot.name == name:
                return self[ARG][slot.index]
        raise KeyError(name)

    # -- next method ----------------------------------------------------
    @property
    def next_method_p(self):
        ctx = self[CTX]
        return ctx.rt.methods.next_method_of(self[MTH]) is not None

    def next_method(self, *args):
        """Invoke the next method; its result lands in this frame's RETVAL.

        With no arguments the receivers and closed arguments are reused.
        Passing only the receivers re-packs the closed arguments from this
        frame; passing everything overrides both.
        """
        ctx = self[CTX]
        rt = ctx.rt
        m = self[MTH]
        nxt = rt.methods.next_method_of(m)
        if nxt is None:
            rt.throw_bad_message(self[SEL], self[RCV], "no next method")
        gen = nxt.generic
        rank = gen.rank
        if not args:
            rcv = self[RCV]
            explicit = None
        else:
            rcv = args[:rank]
            explicit = args[rank:] if len(args) > rank else None
            if len(rcv) != rank:
                raise TypeError(f"next method of {m!r} needs {rank} receiver(s)")
        if gen is m.generic:
            sel = self[SEL]
            arg = self[ARG] if explicit is None else gen.pack(explicit)
        else:
            sel = gen
            arg = gen.pack(explicit) if explicit is not None else repack(self, gen)
        f = Frame((sel, rcv, arg, self[RET], nxt, ctx))
        r = nxt.imps[ctx.level](f, *rcv)
        ret = f[RET] if r is None else r
        self[RET] = ret
        return ret

    # -- delegation -----------------------------------------------------
    def forward_message(self, *receivers):
        """Re-send this message, with its arguments and return slot, to new receivers."""
        sel = self[SEL]
        if len(receivers) != sel.rank:
            raise TypeError(f"{sel.name} forwards to {sel.rank} receiver(s)")
        ctx = self[CTX]
        ids = [r.id for r in receivers]
        e = ctx.lookup(sel, sel.rank, cache_key(sel.sel_id, ids),
                       _hash(sel.sel_id, ids), receivers)
        f = Frame((sel, receivers, self[ARG], None, e[E_MTH], ctx))
        r = e[E_IMP](f, *receivers)
        ret = f[RET] if r is None else r
        self[RET] = ret
        return ret

    # -- contracts --------------------------------------------------------
    def test_assert(self, cond, msg=None, func=None, file=None, line=None):
        if not cond:
            rt = self[CTX].rt
            if func is None and self[SEL] is rt.g.ginvariant:
                # inside an invariant, report where test_invariant was called
                func, file, line = self[ARG]
            rt.assert_failed(msg, func, file, line, depth=2)

    def test_invariant(self, obj, func=None, file=None, line=None):
        from .contracts import test_invariant
        test_invariant(self, obj, func, file, line)

    def __repr__(self):
        return f"<frame {self[SEL].name} via {self[MTH]!r}>"


def _hash(sel_id, ids):
    h = sel_id
    for shift, rid in enumerate(ids):
        h += rid << shift
    return h


def repack(frame, gen):
    """Closed arguments of ``frame`` re-packed for ``gen``'s signature, by name."""
    src = frame[SEL]
    values = dict(zip(src.param_names, frame[ARG]))
    try:
        return tuple(values[name] for name in gen.param_names)
    except KeyError as exc:
        raise TypeError(f"cannot re-pack {src.name} arguments for {gen.name}: "
                        f"missing {exc.args[0]!r}") from None


class ExecutionContext:
    """Per-thread dispatch state: caches, statistics, contract level, pools."""

    def __init__(self, rt, config: DispatchConfig, contract_level=1):
        self.rt = rt
        self.config = config
        self.caching = True
        self.tables = [None] + [RankCache(config.initial_slots, config.cache_slot_bound)
                                for _ in range(5)]
        self.t1, self.t2, self.t3, self.t4, self.t5 = self.tables[1:]
        self.hits = self.misses = self.substitutions = self.evictions = 0
        self._level = int(contract_level)
        self.pools = []
        self.scopes = []

    @property
    def level(self):
        return self._level

    @level.setter
    def level(self, value):
        value = int(value)
        if value != self._level:
            self._level = value
            self.flush()

    def flush(self):
        for t in self.tables[1:]:
            t.clear()

    def stats(self):
        return (self.hits, self.misses, self.substitutions, self.evictions)

    def lookup(self, gen, rank, key, h, receivers):
        """Cache probe with miss handling; returns a cache entry."""
        t = self.tables[rank]
        chain = t.slots[h & t.mask]
        if chain:
            for e in chain:
                if e[E_KEY] == key:
                    self.hits += 1
                    return e
        self.misses += 1
        rt = self.rt
        try:
            classes = [rt.registry.class_of(r.id) for r in receivers]
        except LookupFailure:
            for r in receivers:
                if r.id == 0 and r.rc == RC_AUTO:
                    raise ClosedScopeFault(f"{gen.name}: automatic object used "
                                           "after its scope closed") from None
                if r.id == 0 and r.rc == 0:
                    raise RefCountError(f"{gen.name}: object used after "
                                        "deallocation") from None
            raise
        except AttributeError:
            raise DispatchError(f"{gen.name}: receivers must be runtime objects, "
                                f"got {[type(r).__name__ for r in receivers]}") from None
        m = rt.methods.select_method(gen, classes)
        if m is None:
            m = rt.methods.select_method(rt.unrecognized[rank], classes)
            if m is None:
                raise DispatchError(f"no unrecognized-message handler for {gen.name}")
            self.substitutions += 1
        fw = None
        if rank == 1 and m.forward is not None:
            # attribute, check_ret, then a one-entry memo of the delegate's class
            fw = [m.forward[0], m.forward[1], -1, None]
        e = (key, m, m.imps[self._level], h, fw)
        if self.caching:
            self.evictions += t.insert(e)
        return e


_TEMPLATE = """\
def __call__(self, {params}):
    try:
        ctx = tls.ctx
{ids}
    except AttributeError:
        ctx, ({idlist},) = recover(self, {rcv})
    k = {key}
{probe}
{invoke}
"""

_INVOKE = """\
    f = Frame((self, {rcv}, {arg}, None, e[1], ctx))
    r = e[2](f, {rlist})
    return f[3] if r is None else r"""

# rank 1: a forwarding entry re-dispatches on the delegate right here,
# with the same selector, arguments and return slot; the entry remembers
# the last delegate class it resolved
_INVOKE_FWD = """\
    fw = e[4]
    if fw is None:
        f = Frame((self, (_1,), {arg}, None, e[1], ctx))
        r = e[2](f, _1)
        return f[3] if r is None else r
    d = getattr(_1, fw[0])
    try:
        i1 = d.id
    except AttributeError:
        i1 = recover(self, (d,))[1][0]
    if i1 == fw[2]:
        ctx.hits += 1
        e = fw[3]
    else:
        k = SEL + (i1 << 24)
        t = ctx.t1
        c = t.slots[(SEL + i1) & t.mask]
        if c is not None and c[0][0] == k:
            ctx.hits += 1
            e = c[0]
        else:
            e = ctx.lookup(self, 1, k, SEL + i1, (d,))
        fw[2] = i1
        fw[3] = e
    f = Frame((self, (d,), {arg}, None, e[1], ctx))
    r = e[2](f, d)
    if r is None:
        r = f[3]
    if r is d and fw[1]:
        return _1
    return r"""

_FAST_PROBE = """\
    t = ctx.t{rank}
    c = t.slots[({h}) & t.mask]
    if c is not None and c[0][0] == k:
        ctx.hits += 1
        e = c[0]
    else:
        e = ctx.lookup(self, {rank}, k, {h}, {rcv})"""

_SLOW_PROBE = """\
    e = ctx.lookup(self, {rank}, k, {h}, {rcv})"""


def dispatcher_source(rank: int, nclosed: int, fast: bool) -> str:
    rs = [f"_{i}" for i in range(1, rank + 1)]
    ids = [f"i{i}" for i in range(1, rank + 1)]
    cs = [f"a{i}" for i in range(nclosed)]
    h = " + ".join(["SEL"] + [f"({v} << {p})" if p else v for p, v in enumerate(ids)])
    key = " + ".join(["SEL"] + [f"({v} << {24 + 32 * p})" for p, v in enumerate(ids)])
    rcv = "(" + ", ".join(rs) + ",)"
    fmt = dict(rank=rank, h=h, rcv=rcv)
    probe = (_FAST_PROBE if fast else _SLOW_PROBE).format(**fmt)
    arg = "(" + ", ".join(cs) + ",)" if cs else "()"
    invoke = (_INVOKE_FWD if rank == 1 else _INVOKE).format(
        rcv=rcv, arg=arg, rlist=", ".join(rs))
    return _TEMPLATE.format(
        params=", ".join(rs + cs),
        ids="\n".join(f"        {v} = {r}.id" for v, r in zip(ids, rs)),
        idlist=", ".join(ids),
        key=key, probe=probe, invoke=invoke, rcv=rcv)


def make_dispatcher(gen, tls, current, fast_message_rank: int):
    """Compile the sending function of ``gen`` (installed as its ``__call__``)."""
    fast = gen.rank <= fast_message_rank and not gen.closed_params
    src = dispatcher_source(gen.rank, len(gen.closed_params), fast)

    def recover(gen, receivers):
        # first send on this thread, or a receiver that is not a runtime object
        ctx = current()
        try:
            return ctx, tuple(r.id for r in receivers)
        except AttributeError:
            raise DispatchError(f"{gen.name}: receivers must be runtime objects, "
                                f"got {[type(r).__name__ for r in receivers]}") from None

    ns = {"SEL": gen.sel_id, "tls": tls, "current": current, "Frame": Frame,
          "recover": recover}
    exec(src, ns)
    fn = ns["__call__"]
    fn.__qualname__ = f"{gen.name}.__call__"
    return fn


class ContextRegistry:
    """Thread-local execution contexts of one runtime."""

    def __init__(self, factory):
        self.tls = threading.local()
        self._factory = factory
        self._all = weakref.WeakSet()
        self._lock = threading.Lock()

    def current(self):
        try:
            return self.tls.ctx
        except AttributeError:
            ctx = self._factory()
            with self._lock:
                self._all.add(ctx)
            self.tls.ctx = ctx
            return ctx

    def bind(self, ctx):
        """Make ``ctx`` the current thread's context."""
        with self._lock:
            self._all.add(ctx)
        self.tls.ctx = ctx

    def __iter__(self):
        with self._lock:
            return iter(list(self._all))
