"""Throwing runtime objects and protected blocks.

Any runtime object can be thrown, instances and class-objects alike.  A
handler matches when the payload's class is a kind of the handler class, so
a class-object payload such as ``ExBadAlloc`` is caught by ``mExBadAlloc``
(its class is ``pmExBadAlloc``, which derives from ``mExBadAlloc``).
"""

from __future__ import annotations

import sys

EXCEPTION_CLASSES = (
    "ExBadAlloc", "ExBadArity", "ExBadAssert", "ExBadCast", "ExBadDomain",
    "ExBadFormat", "ExBadMessage", "ExBadProperty", "ExBadRange", "ExBadSize",
    "ExBadType", "ExBadValue", "ExNotFound", "ExNotImplemented", "ExNotSupported",
)


class Thrown(Exception):
    """Host-level carrier of a thrown runtime object."""

    def __init__(self, payload, origin=None):
        super().__init__(payload)
        self.payload = payload
        self.origin = origin

    @property
    def func(self):
        return self.origin[0] if self.origin else None

    @property
    def file(self):
        return self.origin[1] if self.origin else None

    @property
    def line(self):
        return self.origin[2] if self.origin else None

    def __str__(self):
        p = self.payload
        d = type(p).descriptor if hasattr(type(p), "descriptor") else None
        if d is not None:
            text = d.name
            msg = getattr(p, "msg", "")
            if msg:
                text += f": {msg}"
        else:
            text = getattr(p, "name", repr(p))
        if self.origin and self.origin[1]:
            text += f" ({self.origin[1]}:{self.origin[2]})"
        return text


def _origin(depth):
    fr = sys._getframe(depth + 1)
    return (fr.f_code.co_name, fr.f_code.co_filename, fr.f_lineno)


def throw_(payload, origin=None, depth=1):
    """Throw ``payload``; ``origin`` is (func, file, line), captured if omitted."""
    if payload is None:
        raise ValueError("cannot throw NIL")
    if origin is None:
        origin = _origin(depth)
    raise Thrown(payload, origin)


def rethrow(ex: Thrown):
    raise ex


def matches(rt, ex: Thrown, cls) -> bool:
    try:
        pcls = rt.registry.class_of(ex.payload.id)
    except (AttributeError, LookupError):
        return False
    return rt.registry.is_kind_of(pcls, cls)


def protected(rt, body, handlers=(), any_handler=None, finally_=None):
    """Run ``body()`` with ordered handlers and an optional finally clause.

    ``handlers`` is a sequence of ``(class, handler)``; the first handler
    whose class matches the payload runs (``handler(ex)``).  ``any_handler``
    catches the rest.  A non-runtime Python exception is not intercepted.
    """
    try:
        return body()
    except Thrown as ex:
        for cls, handler in handlers:
            if isinstance(cls, str):
                cls = rt.registry[cls]
            if matches(rt, ex, cls):
                return handler(ex)
        if any_handler is not None:
            return any_handler(ex)
        raise
    finally:
        if finally_ is not None:
            finally_()


def new_exception(rt, cls, msg="", origin=None, obj=None):
    ex = rt.alloc_instance(cls)
    ex.msg = msg
    ex.obj = obj
    if origin:
        ex.func, ex.file, ex.line = origin[0] or "", origin[1] or "", origin[2] or 0
    return ex


def install(rt):
    exc = rt.defclass("Exception", None, [("msg", "str"), ("obj", "obj"),
                                          ("func", "str"), ("file", "str"), ("line", "int")])
    for name in EXCEPTION_CLASSES:
        rt.defclass(name, exc)
    g = rt.g
    g.throw_ = throw_
    g.rethrow = rethrow
    g.protected = lambda body, handlers=(), any_handler=None, finally_=None: \
        protected(rt, body, handlers, any_handler, finally_)
