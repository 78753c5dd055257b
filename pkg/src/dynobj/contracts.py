"""Design by contract: per-level implementations of contracted methods.

A contracted method gets four implementations, one per level, built once at
definition time.  The dispatcher caches the one matching its context level,
so a disabled check costs nothing at all.

    level   pre   body   post   invariants
    NONE           x
    PRE      x     x
    POST     x     x      x
    ALL      x     x      x     x (each distinct receiver, after post)
"""

from __future__ import annotations

import sys
from enum import IntEnum


class ContractLevel(IntEnum):
    NONE = 0
    PRE = 1
    POST = 2
    ALL = 3

    @classmethod
    def parse(cls, value):
        if isinstance(value, str):
            try:
                return cls[value.upper()]
            except KeyError:
                raise ValueError(f"unknown contract level {value!r}") from None
        return cls(value)


class Contract:
    __slots__ = ("pre", "post")

    def __init__(self, pre=None, post=None):
        self.pre = pre
        self.post = post


def _unpacking(fn, rank, nclosed):
    """Adapt ``fn(f, r1..rn, *closed)`` to the uniform ``imp(f, r1..rn)``."""
    if nclosed == 0:
        return fn
    rs = ", ".join(f"r{i}" for i in range(1, rank + 1))
    ns = {"fn": fn}
    exec(f"def imp(f, {rs}):\n    return fn(f, {rs}, *f[2])\n", ns)
    return ns["imp"]


def base_imp(m):
    if m.raw:
        return m.body
    return _unpacking(m.body, m.generic.rank, len(m.closed_params))


def _origin_of(m):
    code = getattr(m.body, "__code__", None)
    where = (code.co_filename, code.co_firstlineno) if code else ("", 0)
    return (f"{m.generic.name}{m.label()}",) + where


def _contracted(rt, m, base, pre, post, invariants):
    """Wrapper running the enabled hooks around ``base``, specialized by rank."""
    rank = m.generic.rank
    rs = ", ".join(f"r{i}" for i in range(1, rank + 1))
    lines = [f"def imp(f, {rs}):"]
    if pre is not None:
        lines.append(f"    pre(f, {rs})")
    lines += [f"    r = base(f, {rs})",
              "    if r is not None:",
              "        f[3] = r"]
    if post is not None:
        lines.append(f"    post(f, {rs})")
    if invariants:
        lines.append(f"    check(({rs},))")
    lines.append("    return f[3]")
    origin = _origin_of(m)

    def check(rcv):
        ginvariant = rt.g.ginvariant
        seen = []
        for obj in rcv:
            if not any(obj is s for s in seen):
                seen.append(obj)
                ginvariant(obj, *origin)

    ns = {"pre": pre, "post": post, "base": base, "check": check}
    exec("\n".join(lines) + "\n", ns)
    return ns["imp"]


def build_imps(m, rt):
    """Implementations indexed by :class:`ContractLevel`."""
    base = base_imp(m)
    c = m.contract
    if c is None:
        return (base,) * 4
    rank, n = m.generic.rank, len(m.closed_params)
    pre = _unpacking(c.pre, rank, n) if c.pre is not None else None
    post = _unpacking(c.post, rank, n) if c.post is not None else None
    return (
        base,
        _contracted(rt, m, base, pre, None, False) if pre else base,
        _contracted(rt, m, base, pre, post, False) if (pre or post) else base,
        _contracted(rt, m, base, pre, post, True),
    )


def test_invariant(frame, obj, func=None, file=None, line=None):
    """Send ``ginvariant`` to ``obj``, tagged with the caller's location."""
    if func is None:
        fr = sys._getframe(2)
        func, file, line = fr.f_code.co_name, fr.f_code.co_filename, fr.f_lineno
    frame[5].rt.g.ginvariant(obj, func, file or "", line or 0)


def install(rt):
    ginvariant = rt.defgeneric("ginvariant", 1,
                               [("func", "str"), ("file", "str"), ("line", "int")])

    @rt.defmethod(ginvariant, rt.Object)
    def _(f, self, func, file, line):
        pass
