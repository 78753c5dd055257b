"""The embedding API: one :class:`Runtime` owns every table and context.

Typical use::

    rt = Runtime()
    Counter = rt.defclass("Counter", attributes=[("cnt", "int")])
    gincr = rt.defgeneric("gincr", 1)

    @rt.defmethod(gincr, Counter)
    def _(f, self):
        self.cnt += 1

    rt.seal()
    c = rt.gnew(Counter)
    gincr(c)
"""

from __future__ import annotations

import sys
from types import SimpleNamespace

from . import contracts, exceptions, lifecycle
from .dispatch import (ContextRegistry, DispatchConfig, ExecutionContext, Frame,
                       make_dispatcher)
from .generics import VOID, GenericTable
from .methods import MethodTable
from .object_model import (ROOT, ClassDescriptor, DefinitionError, IdGenerator,
                           Registry, SealedError)


class Runtime:
    def __init__(self, config: DispatchConfig | None = None,
                 contract_level=contracts.ContractLevel.PRE, seed: int = 0):
        self.config = config if config is not None else DispatchConfig()
        self.ids = IdGenerator(seed)
        self.registry = Registry(self.ids)
        self.generics = GenericTable(self.ids)
        self.methods = MethodTable()
        self.methods.listeners.append(self._methods_changed)
        self.default_contract_level = contracts.ContractLevel(contract_level)
        self.contexts = ContextRegistry(self._new_context)
        self.sealed = False
        self.shut_down = False
        #: generics and helper functions by name, e.g. ``rt.g.gincr``
        self.g = SimpleNamespace()
        #: classes by name, e.g. ``rt.c.Counter``
        self.c = SimpleNamespace()
        for desc in self.registry:
            setattr(self.c, desc.name, desc)
        self.unrecognized = [None]
        self.init_log = []
        self.heap = lifecycle.HeapStats()
        self.allocator = lifecycle.default_allocator
        self._boot()

    def _new_context(self):
        return ExecutionContext(self, self.config, self.default_contract_level)

    def _boot(self):
        reg = self.registry
        self.Object = reg.Object
        self.Nil = self.defclass("Nil", ROOT)
        # class predicates; TrueFalse is the "unknown" of three-valued logic
        self.Predicate = self.defclass("Predicate", self.Nil)
        self.TrueFalse = self.defclass("TrueFalse", self.Predicate)
        self.True_ = self.defclass("True", self.TrueFalse)
        self.False_ = self.defclass("False", self.TrueFalse)
        for n in range(1, 6):
            gum = self.defgeneric(f"gunrecognizedMessage{n}", n)
            setattr(self.g, f"gum{n}", gum)
            self.unrecognized.append(gum)
            self.defmethod(gum, [self.Object] * n, _default_unrecognized, raw=True)
        # sending anything to Nil is harmless and answers Nil
        self.defmethod(self.g.gum1, [self.Nil.propmeta], _nil_answers, raw=True)
        exceptions.install(self)
        lifecycle.install(self)
        contracts.install(self)

    # -- definitions ------------------------------------------------------
    def defclass(self, name, superclass=None, attributes=()):
        """Define a class; ``superclass`` defaults to Object, ROOT makes a root."""
        if superclass is None:
            superclass = self.registry.Object
        elif isinstance(superclass, str):
            superclass = self.registry[superclass]
        cls, meta, pm = self.registry.define_class(name, superclass, attributes)
        for d in (cls, meta, pm):
            setattr(self.c, d.name, d)
        return cls

    def defgeneric(self, name, rank, closed_params=(), returns=VOID):
        gen = self.generics.define_generic(name, rank, closed_params, returns)
        gen.runtime = self
        fn = make_dispatcher(gen, self.contexts.tls, self.contexts.current,
                             self.config.fast_message_rank)
        gen.__class__ = type(name, (type(gen),), {"__slots__": (), "__call__": fn})
        setattr(self.g, name, gen)
        return gen

    def _classes(self, specializers):
        if isinstance(specializers, (ClassDescriptor, str)):
            specializers = [specializers]
        out = []
        for s in specializers:
            if isinstance(s, str):
                try:
                    s = self.registry[s]
                except KeyError:
                    raise DefinitionError(f"unknown class {s!r}") from None
            out.append(s)
        return out

    def defmethod(self, gen, specializers, body=None, *, around=False, pre=None,
                  post=None, next_path=None, raw=False):
        """Specialize ``gen``; usable directly or as a decorator.

        ``body(f, r1, .., rn, *closed)`` may return a value (stored as the
        frame's RETVAL) or assign ``f.ret`` itself.  ``pre``/``post`` take the
        same arguments and form the method's contract.
        """
        if body is None:
            return lambda fn: self.defmethod(gen, specializers, fn, around=around, pre=pre,
                                             post=post, next_path=next_path, raw=raw)
        if isinstance(gen, str):
            gen = self.generics[gen]
        specs = self._classes(specializers)
        contract = None
        if pre is not None or post is not None:
            contract = contracts.Contract(pre, post)
        if next_path is not None:
            alt, alt_specs = next_path
            if isinstance(alt, str):
                alt = self.generics[alt]
            next_path = (alt, tuple(self._classes(alt_specs)))
        m = self.methods.define_method(gen, specs, body, around=around, contract=contract,
                                       next_path=next_path, raw=raw, registry=self.registry)
        m.imps = contracts.build_imps(m, self)
        return m

    def defforward(self, gen, specializers, attribute, check_ret=True):
        """Forwarding method: re-send the message to ``receiver.<attribute>``.

        The receiver is the first one whose specializer is not Object.  With
        ``check_ret`` a result equal to the delegate is replaced by the
        forwarding receiver.  Rank-1 forwarders are executed inline by the
        dispatcher on a cache hit.
        """
        specs = self._classes(specializers)
        pos = next((i for i, c in enumerate(specs) if c is not self.Object), 0)
        m = self.defmethod(gen, specs, make_forwarder(pos, attribute, check_ret), raw=True)
        m.forward = (attribute, check_ret)
        return m

    def defalias(self, target, source, specializers):
        m = self.methods.define_alias(target, source, self._classes(specializers))
        m.imps = m.alias_of.imps
        return m

    def remove_method(self, m):
        self.methods.remove(m)

    # -- phases -----------------------------------------------------------
    def seal(self):
        """Freeze all tables and run class initializers (superclasses first)."""
        if self.sealed:
            return self.init_log
        self.registry.seal()
        self.generics.seal()
        self.methods.seal()
        self.sealed = True
        self.init_log = self._run_initializers("up")
        return self.init_log

    def shutdown(self):
        if self.shut_down:
            return []
        self.shut_down = True
        for ctx in self.contexts:
            lifecycle.drain_all(self, ctx)
        return self._run_initializers("down")

    def _run_initializers(self, direction):
        gen = self.g.ginitialize if direction == "up" else self.g.gdeinitialize
        visited = []
        for cls in self.registry.initialization_order(direction):
            if self.methods.find(gen, (cls.propmeta,)) is not None:
                gen(cls)
                visited.append(cls)
        return visited

    # -- contexts ---------------------------------------------------------
    def context(self) -> ExecutionContext:
        return self.contexts.current()

    def new_context(self):
        """A fresh context, not bound to any thread."""
        return self._new_context()

    @property
    def contract_level(self):
        return contracts.ContractLevel(self.context().level)

    @contract_level.setter
    def contract_level(self, level):
        self.context().level = contracts.ContractLevel.parse(level)

    def _methods_changed(self):
        for ctx in self.contexts:
            ctx.flush()

    def cache_stats(self):
        """(hits, misses, substitutions, evictions) summed over all contexts."""
        totals = [0, 0, 0, 0]
        for ctx in self.contexts:
            for i, v in enumerate(ctx.stats()):
                totals[i] += v
        return tuple(totals)

    # -- messaging --------------------------------------------------------
    def send(self, gen, *args):
        if isinstance(gen, str):
            gen = self.generics[gen]
        return gen(*args)

    def class_of(self, obj) -> ClassDescriptor:
        return self.registry.class_of(obj.id)

    def is_kind_of(self, obj, cls) -> bool:
        """Subtype test on an object's class (class-objects included)."""
        if isinstance(cls, str):
            cls = self.registry[cls]
        return self.registry.is_kind_of(self.registry.class_of(obj.id), cls)

    def select(self, gen, *classes):
        return self.methods.select_method(gen, classes)

    def understands_message(self, receivers, gen):
        """True class-object iff a real specialization exists for ``receivers``.

        ``receivers`` are classes; plain instances stand for their class.
        To ask about a class-object receiver pass its property metaclass.
        """
        try:
            classes = [r if isinstance(r, ClassDescriptor)
                       else self.registry.class_of(r.id) for r in receivers]
            if len(classes) != gen.rank:
                return self.False_
            found = self.methods.select_method(gen, classes) is not None
        except Exception:
            return self.False_
        return self.True_ if found else self.False_

    def bool_object(self, flag):
        return self.True_ if flag else self.False_

    # -- faults -----------------------------------------------------------
    def throw_bad_message(self, sel, receivers, why="message not understood"):
        names = ", ".join(_describe(self, r) for r in receivers)
        ex = exceptions.new_exception(self, self.c.ExBadMessage,
                                      f"{sel.name}({names}): {why}")
        exceptions.throw_(ex, depth=2)

    def assert_failed(self, msg, func=None, file=None, line=None, depth=1):
        origin = (func, file, line) if func is not None else _caller(depth)
        ex = exceptions.new_exception(self, self.c.ExBadAssert, msg or "assertion failed",
                                      origin)
        raise exceptions.Thrown(ex, origin)

    def __repr__(self):
        state = "sealed" if self.sealed else "open"
        return (f"<Runtime {state}: {len(self.registry)} classes, "
                f"{len(self.generics)} generics>")


def _caller(depth):
    fr = sys._getframe(depth + 1)
    return (fr.f_code.co_name, fr.f_code.co_filename, fr.f_lineno)


def _describe(rt, obj):
    try:
        return rt.registry.class_of(obj.id).name
    except Exception:
        return type(obj).__name__


def make_forwarder(pos, attribute, check_ret=True):
    def forward(f, *rcv):
        owner = rcv[pos]
        d = getattr(owner, attribute)
        ret = f.forward_message(*(rcv[:pos] + (d,) + rcv[pos + 1:]))
        if check_ret and ret is d:
            f[3] = ret = owner
        return ret
    return forward


def _default_unrecognized(f, *receivers):
    f[5].rt.throw_bad_message(f[0], receivers)


def _nil_answers(f, nil):
    return nil


__all__ = ["Runtime", "Frame", "SealedError"]
