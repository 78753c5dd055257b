"""Functors, placeholders and lazy expressions.

A :class:`Functor` node holds an operator (a generic or any callable), its
operands and its closed arguments.  Operands are values, placeholders
(``Var`` instances) or further nodes.  Messages sent to a placeholder or a
node are not understood, so the unrecognized-message handlers of ``Lazy``
build a new node instead: ``gadd(aVar(0), dx)`` is itself an expression.

The anonymous placeholder ``Var`` is numbered left to right when a node is
built.  Indexed placeholders ``aVar(i)`` keep their index; the same index
always receives the same argument.  The two kinds are never mixed.
"""

from __future__ import annotations

from .exceptions import new_exception, throw_

ANON = -1


def install(rt):
    Object = rt.Object
    Lazy = rt.defclass("Lazy")
    VarCls = rt.defclass("Var", Lazy, [("index", "int"), ("anon", "int")])
    FunctorCls = rt.defclass("Functor", Lazy, [("op", "any"), ("operands", "any"),
                                               ("closed", "any"), ("slots", "any")])
    g = rt.g
    alloc = rt.alloc_instance
    var_cache = {}

    def bad_arity(msg):
        throw_(new_exception(rt, rt.c.ExBadArity, msg), depth=2)

    def make_var(index, anon=False):
        key = (index, bool(anon))
        v = var_cache.get(key)
        if v is None:
            # placeholders and expressions are immutable values, ownership-free
            v = alloc(VarCls, counted=False)
            v.index, v.anon = index, int(anon)
            var_cache[key] = v
        return v

    VAR = make_var(ANON, True)

    def is_var(x):
        return getattr(type(x), "descriptor", None) is VarCls

    def is_node(x):
        return getattr(type(x), "descriptor", None) is FunctorCls

    def placeholders(x, out):
        if is_var(x):
            out.append(x)
        elif is_node(x):
            for o in x.operands:
                placeholders(o, out)
        return out

    def renumber(x, mapping):
        """Copy of ``x`` with placeholders replaced through ``mapping``."""
        if is_var(x):
            return mapping(x)
        if is_node(x):
            return node(x.op, [renumber(o, mapping) for o in x.operands], x.closed,
                        number=False)
        return x

    def node(op, operands, closed=(), number=True):
        operands = list(operands)
        if number:
            found = []
            for o in operands:
                placeholders(o, found)
            anon = [p for p in found if p.anon]
            if anon and len(anon) != len(found):
                bad_arity("anonymous and indexed placeholders cannot be mixed")
            if anon:
                counter = iter(range(len(anon)))
                operands = [renumber(o, lambda v: make_var(next(counter), True))
                            for o in operands]
        fn = alloc(FunctorCls, counted=False)
        fn.op = op
        fn.operands = tuple(operands)
        fn.closed = tuple(closed)
        idx = set()
        for o in fn.operands:
            for p in placeholders(o, []):
                idx.add(p.index)
        fn.slots = tuple(sorted(idx))
        return fn

    def arity(x):
        if is_var(x):
            return 1
        if is_node(x):
            return len(x.slots)
        return 0

    def slots_of(x):
        return (x.index,) if is_var(x) else x.slots

    def evaluate(x, bindings):
        if is_var(x):
            try:
                return bindings[x.index]
            except KeyError:
                bad_arity(f"placeholder #{x.index} is unbound")
        if is_node(x):
            vals = [evaluate(o, bindings) for o in x.operands]
            return x.op(*vals, *x.closed)
        return x

    def apply(fun, args):
        """Full application evaluates; fewer arguments (or ``Var``) give a functor."""
        slots = slots_of(fun)
        if len(args) > len(slots):
            bad_arity(f"functor of arity {len(slots)} applied to {len(args)} argument(s)")
        if len(args) == len(slots) and not any(a is VAR for a in args):
            return evaluate(fun, dict(zip(slots, args)))
        bound, left = {}, []
        for j, s in enumerate(slots):
            if j < len(args) and args[j] is not VAR:
                bound[s] = args[j]
            else:
                left.append(s)
        lazy_args = [a for a in bound.values() if placeholders(a, [])]
        if lazy_args and left:
            bad_arity("partial application cannot mix unbound slots with lazy arguments")
        new_index = {s: i for i, s in enumerate(left)}

        def subst(v):
            if v.index in bound:
                return bound[v.index]
            return make_var(new_index[v.index], v.anon)

        if is_var(fun):
            return subst(fun)
        return node(fun.op, [renumber(o, subst) for o in fun.operands], fun.closed,
                    number=False)

    def make_functor(op, args=()):
        """Close ``op`` over ``args``; missing open positions become ``Var``."""
        args = list(args)
        rank = getattr(op, "rank", None)
        if rank is not None:
            nclosed = len(op.closed_params)
            if len(args) > rank + nclosed:
                bad_arity(f"{op.name} takes at most {rank + nclosed} argument(s)")
            for a in args[rank:]:
                if placeholders(a, []):
                    bad_arity(f"{op.name}: placeholder in a closed position")
            opened, closed = args[:rank], args[rank:]
            if closed and len(closed) != nclosed:
                bad_arity(f"{op.name}: closed arguments must be all given")
            if nclosed and not closed:
                bad_arity(f"{op.name}: closed arguments must be given")
            opened += [VAR] * (rank - len(opened))
            return node(op, opened, closed)
        return node(op, args)

    # geval0(fun), geval1(fun, a1) ... geval4(fun, a1..a4)
    for n in range(5):
        gen = rt.defgeneric(f"geval{n}", n + 1, returns="obj")
        body = (lambda f, fun, *a: apply(fun, a))
        rt.defmethod(gen, [Lazy] + [Object] * n, body, raw=True)
    g.geval = g.geval0

    # lazy message building: any message not understood by a lazy receiver
    def build(f, *receivers):
        return node(f[0], receivers, f[2])

    for n in range(1, 6):
        gum = rt.unrecognized[n]
        for pos in range(n):
            specs = [Object] * n
            specs[pos] = Lazy
            rt.defmethod(gum, specs, build, raw=True)

    rt.Var = g.Var = VAR
    g.aVar = make_var
    g.aFunctor = make_functor
    rt.functors = type("FunctorAPI", (), {})()
    api = rt.functors
    api.Var = VAR
    api.aVar = make_var
    api.make_functor = make_functor
    api.build_expression = lambda op, operands, closed=(): node(op, operands, closed)
    api.evaluate = lambda x, bindings=None: evaluate(x, dict(bindings or {}))
    api.apply = lambda fun, args: apply(fun, tuple(args))
    api.arity = arity
    api.is_lazy = lambda x: is_var(x) or is_node(x)
