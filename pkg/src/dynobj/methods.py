"""Method registration, specialization order and method selection.

Methods are ranked by a key derived from the ranks of their specializers:
the sum first, then the rank vector compared left to right, then around
before primary, then later registration first.  Larger keys are more
specific.  For ``A :> B :> C`` this yields the list::

    (C,C) (C,B) (B,C) (C,A) (B,B) (A,C) (B,A) (A,B) (A,A)
"""

from __future__ import annotations

import inspect

from .generics import GenericDescriptor, SignatureMismatch, validate_specialization_signature
from .object_model import ClassDescriptor, DefinitionError, SealedError, _is_subclass

PRIMARY = "primary"
AROUND = "around"

LESS, EQUAL, GREATER = -1, 0, 1


class MethodDescriptor:
    __slots__ = ("generic", "specializers", "kind", "body", "seq", "closed_params",
                 "key", "contract", "next_path", "imps", "alias_of", "raw", "readonly",
                 "forward", "_next", "_next_version")

    def __init__(self, generic, specializers, kind, body, seq, closed_params,
                 contract=None, next_path=None, raw=False):
        self.generic = generic
        self.specializers = tuple(specializers)
        self.kind = kind
        self.body = body
        self.seq = seq
        self.closed_params = tuple(closed_params)
        self.contract = contract
        self.next_path = next_path
        self.raw = raw
        self.alias_of = None
        self.readonly = False
        #: (attribute, check_ret) for declarative rank-1 forwarders
        self.forward = None
        self.imps = None
        self._next = None
        self._next_version = -1
        ranks = tuple(c.rank for c in self.specializers)
        self.key = (sum(ranks), ranks, kind == AROUND, seq)

    @property
    def rank_sum(self):
        return self.key[0]

    @property
    def rank_vector(self):
        return self.key[1]

    @property
    def is_around(self):
        return self.kind == AROUND

    @property
    def imp(self):
        """Implementation with contracts disabled."""
        return self.imps[0]

    def label(self):
        names = ",".join(c.name for c in self.specializers)
        return f"({names})" if self.kind == PRIMARY else f"[around]({names})"

    def __repr__(self):
        return f"<method {self.generic.name}{self.label()}>"


def specialization_order(a: MethodDescriptor, b: MethodDescriptor) -> int:
    if a.generic is not b.generic:
        raise ValueError("methods belong to different generics")
    if a.key > b.key:
        return GREATER
    if a.key < b.key:
        return LESS
    return EQUAL


def applicable(m: MethodDescriptor, receivers) -> bool:
    """True iff each specializer is a superclass-or-equal of its receiver class."""
    if len(receivers) != len(m.specializers):
        raise ValueError("receiver count does not match the method's rank")
    for spec, cls in zip(m.specializers, receivers):
        if not _is_subclass(cls, spec):
            return False
    return True


def _covers(general, specific):
    for g, s in zip(general, specific):
        if not _is_subclass(s, g):
            return False
    return True


def body_param_names(body, rank):
    """Closed parameter names declared by a method body ``(f, r1..rn, *closed)``."""
    try:
        sig = inspect.signature(body)
    except (TypeError, ValueError):
        return None
    params = list(sig.parameters.values())
    if any(p.kind in (p.VAR_POSITIONAL, p.VAR_KEYWORD) for p in params):
        return None
    # parameters with defaults are bound at definition time (fn=fn idiom)
    return tuple(p.name for p in params[1 + rank:]
                 if p.default is p.empty and p.kind != p.KEYWORD_ONLY)


class MethodTable:
    """All specializations of all generics, grouped per generic."""

    def __init__(self):
        self.sealed = False
        self.version = 0
        self._by_generic: dict[GenericDescriptor, list[MethodDescriptor]] = {}
        self._seq = 0
        self.listeners = []

    def _changed(self):
        self.version += 1
        for callback in self.listeners:
            callback()

    def methods(self, gen) -> list:
        return self._by_generic.get(gen, [])

    def __iter__(self):
        for ms in self._by_generic.values():
            yield from ms

    def find(self, gen, specializers, kind=PRIMARY):
        specializers = tuple(specializers)
        for m in self.methods(gen):
            if m.specializers == specializers and m.kind == kind:
                return m
        return None

    def define_method(self, gen, specializers, body, *, around=False, closed_params=None,
                      contract=None, next_path=None, raw=False, registry=None):
        """Register a specialization of ``gen``.

        ``body`` is called as ``body(frame, receiver1, ..., receiverN, *closed)``.
        With ``raw=True`` it is already a uniform implementation taking only the
        frame and the receivers; closed arguments stay packed in ``frame.arg``.
        """
        if self.sealed:
            raise SealedError("method table is sealed")
        specializers = tuple(specializers)
        if len(specializers) != gen.rank:
            raise DefinitionError(
                f"{gen.name} has rank {gen.rank}, got {len(specializers)} specializer(s)")
        for c in specializers:
            if not isinstance(c, ClassDescriptor):
                raise DefinitionError(f"unknown class {c!r}")
            if registry is not None and registry.get(c.name) is not c:
                raise DefinitionError(f"unknown class {c.name!r}")
        if closed_params is None:
            closed_params = gen.closed_params
            if not raw:
                names = body_param_names(body, gen.rank)
                if names is not None and names != gen.param_names:
                    # names are positional, tags are taken from the generic
                    tags = [t for _, t in gen.closed_params]
                    tags += ["?"] * (len(names) - len(tags))
                    validate_specialization_signature(gen, list(zip(names, tags)))
        validate_specialization_signature(gen, closed_params)
        kind = AROUND if around else PRIMARY
        if kind == PRIMARY and self.find(gen, specializers) is not None:
            raise DefinitionError(f"duplicate method {gen.name}{specializers}")
        if next_path is not None:
            next_path = self._check_next_path(gen, next_path)
        m = MethodDescriptor(gen, specializers, kind, body, self._seq, closed_params,
                             contract=contract, next_path=next_path, raw=raw)
        self._seq += 1
        self._by_generic.setdefault(gen, []).append(m)
        self._changed()
        return m

    @staticmethod
    def _check_next_path(gen, next_path):
        alt, specs = next_path
        specs = tuple(specs)
        if alt.rank != gen.rank or len(specs) != alt.rank:
            raise DefinitionError(f"alternate next path {alt.name} has an incompatible rank")
        mine = dict(gen.closed_params)
        for name, tag in alt.closed_params:
            if mine.get(name) != tag:
                raise SignatureMismatch(alt.name, alt.param_names.index(name),
                                        (name, mine.get(name)), (name, tag))
        return alt, specs

    def define_alias(self, target, source, specializers):
        specializers = tuple(specializers)
        if not target.signature_compatible(source):
            raise DefinitionError(f"{target.name} and {source.name} are not compatible")
        src = self.find(source, specializers)
        if src is None:
            raise DefinitionError(f"{source.name} has no method at {specializers}")
        m = self.define_method(target, specializers, src.body, contract=src.contract,
                               next_path=src.next_path, raw=src.raw)
        m.alias_of = src
        m.imps = src.imps
        return m

    def remove(self, m):
        """Drop a method (administrative; used by tests after sealing)."""
        self._by_generic[m.generic].remove(m)
        self._changed()

    def seal(self):
        self.sealed = True

    # -- selection --------------------------------------------------------
    def select_method(self, gen, receivers):
        """Most specific applicable method for the receiver classes, or None."""
        best = None
        for m in self.methods(gen):
            if best is not None and m.key <= best.key:
                continue
            if _covers(m.specializers, receivers):
                best = m
        return best

    def next_method_of(self, current, alternate=None):
        """The most specific method strictly below ``current``.

        Candidates must be pointwise superclass-or-equal to the anchor's
        specializers.  ``alternate`` re-anchors on another generic and
        specializer vector (the alternate next path); methods exactly at the
        anchor's specializers are then skipped as well.
        """
        if alternate is None and current.next_path is None:
            if current._next_version == self.version:
                return current._next
            result = self._next_below(current.generic, current.specializers, current.key)
            current._next, current._next_version = result, self.version
            return result
        gen, specs = alternate if alternate is not None else current.next_path
        specs = tuple(specs)
        if alternate is not None:
            self._check_next_path(current.generic, alternate)
        best = None
        for m in self.methods(gen):
            if m.specializers == specs:
                continue
            if best is not None and m.key <= best.key:
                continue
            if _covers(m.specializers, specs):
                best = m
        return best

    def _next_below(self, gen, specs, key):
        best = None
        for m in self.methods(gen):
            if m.key >= key:
                continue
            if best is not None and m.key <= best.key:
                continue
            if _covers(m.specializers, specs):
                best = m
        return best

    def next_chain(self, start):
        chain = [start]
        m = self.next_method_of(start)
        while m is not None:
            chain.append(m)
            m = self.next_method_of(m)
        return chain
