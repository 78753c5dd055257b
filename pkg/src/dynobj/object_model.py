"""Class registry: identities, class/metaclass triples, ranks and subtype tests.

Every registered class is a :class:`ClassDescriptor`.  Defining an ordinary
class ``C`` also creates its metaclass ``mC`` and its property metaclass
``pmC``; the three are registered together and share the identity stream.

Descriptors are objects in their own right (class-objects): like instances
they carry a header ``id`` naming *their* class, so the dispatcher can treat
``Counter`` and ``Counter()`` uniformly.  For an ordinary class that header
is the identity of ``pmC``, which is why methods specialized on ``pmC`` are
reachable by ``C`` alone.
"""

from __future__ import annotations

from typing import Iterable, Iterator, NamedTuple

IDENTITY_BITS = 24
IDENTITY_MASK = (1 << IDENTITY_BITS) - 1
RANK_SHIFT = IDENTITY_BITS
MAX_RANK_BITS = 0xFF

LCG_MULTIPLIER = 1664525
LCG_INCREMENT = 1013904223
LCG_MODULUS = 1 << IDENTITY_BITS

# reserved reference-count words; everything below them is a plain count
RC_STATIC = 0xFFFFFFFF
RC_AUTO = 0xFFFFFFFE

ORDINARY = "ordinary"
METACLASS = "metaclass"
PROPMETA = "property-metaclass"

HEADER_SIZE = 8
_RESERVED = frozenset({"id", "rc", "sup", "descriptor"})


class DefinitionError(Exception):
    """Raised for invalid class, generic or method definitions."""


class SealedError(DefinitionError):
    """Raised when a definition is attempted after the runtime was sealed."""


class LookupFailure(LookupError):
    """An identity that was never issued (or the reserved 0) was looked up."""


class CapacityError(RuntimeError):
    pass


class ClassChangeError(TypeError):
    pass


class _Root:
    __slots__ = ()

    def __repr__(self):
        return "ROOT"


#: superclass marker for root classes, written ``_`` in class declarations
ROOT = _Root()


def lcg_next(state: int) -> int:
    return (LCG_MULTIPLIER * state + LCG_INCREMENT) & (LCG_MODULUS - 1)


def make_class_id(identity: int, rank: int) -> int:
    return (min(rank, MAX_RANK_BITS) << RANK_SHIFT) | (identity & IDENTITY_MASK)


def identity_bits(word: int) -> int:
    return word & IDENTITY_MASK


def rank_bits(word: int) -> int:
    return word >> RANK_SHIFT


class IdGenerator:
    """Full-period 24-bit LCG handing out class and selector identities.

    The raw generator visits every residue once per period, so skipping the
    reserved value 0 leaves ``2**24 - 1`` distinct identities.
    """

    capacity = LCG_MODULUS - 1

    def __init__(self, seed: int = 0):
        self.state = seed & (LCG_MODULUS - 1)
        self.issued = 0

    def next_identity(self) -> int:
        if self.issued >= self.capacity:
            raise CapacityError("identity space exhausted")
        state = lcg_next(self.state)
        if state == 0:
            state = lcg_next(state)
        self.state = state
        self.issued += 1
        return state

    def allocate_class_id(self, rank: int) -> int:
        if rank < 0:
            raise ValueError("rank must be non-negative")
        return make_class_id(self.next_identity(), rank)


class Attribute(NamedTuple):
    name: str
    kind: str
    size: int
    owner: str


_KIND_SIZES = {"int": 4, "float": 8, "obj": 8, "str": 8, "any": 8}
_KIND_ZERO = {"int": 0, "float": 0.0, "obj": None, "str": "", "any": None}


def slot_size(kind: str) -> int:
    if kind in _KIND_SIZES:
        return _KIND_SIZES[kind]
    if kind.startswith("bytes(") and kind.endswith(")"):
        return int(kind[6:-1])
    raise DefinitionError(f"unknown slot kind {kind!r}")


def _zero(kind):
    if kind in _KIND_ZERO:
        return _KIND_ZERO[kind]
    return bytes(slot_size(kind))


class Instance:
    """Storage base for every object created by the runtime.

    ``id`` is the class identity word of the object's class, ``rc`` the
    ownership word.  Attribute storage is positional: a class with ``n``
    attributes stores them in the first ``n`` slots of a storage tier, and its
    generated storage class only aliases attribute names onto those slots.
    Re-binding an object to another class therefore reinterprets the same
    slots, as a C layout would.
    """

    __slots__ = ("id", "rc")
    descriptor = None

    def sup(self, cls):
        """Explicit super-path to the attributes owned by ``cls``."""
        return SuperPath(self, cls)

    def __repr__(self):
        d = type(self).descriptor
        name = d.name if d is not None else "?"
        return f"<{name} instance at {id(self):#x}>"


_tiers = {0: Instance}


def _tier_width(n):
    width = 0
    while width < n:
        width = width * 2 if width else 2
    return width


def storage_tier(n):
    """Base storage class with at least ``n`` positional slots."""
    width = _tier_width(n)
    tier = _tiers.get(width)
    if tier is None:
        tier = type(f"Storage{width}", (Instance,),
                    {"__slots__": tuple(f"_{i}" for i in range(width))})
        _tiers[width] = tier
    return tier


def make_storage(desc, width=None):
    names = [a.name for a in desc.attributes]
    tier = storage_tier(len(names) if width is None else width)
    ns = {name: tier.__dict__[f"_{i}"] for i, name in enumerate(names)}
    ns["__slots__"] = ()
    ns["descriptor"] = desc
    return type(desc.name, (tier,), ns)


class SuperPath:
    __slots__ = ("_obj", "_names")

    def __init__(self, obj, cls):
        own = type(obj).descriptor
        if own is None or not _is_subclass(own, cls):
            raise ClassChangeError(f"{cls.name} is not on the object's class path")
        object.__setattr__(self, "_obj", obj)
        object.__setattr__(self, "_names", cls.own_attribute_names)

    def __getattr__(self, name):
        if name not in self._names:
            raise AttributeError(name)
        return getattr(self._obj, name)

    def __setattr__(self, name, value):
        if name not in self._names:
            raise AttributeError(name)
        setattr(self._obj, name, value)


class ClassDescriptor:
    """A registered class.  Also usable as a message receiver."""

    __slots__ = (
        "id", "rc", "name", "superclass", "rank", "cid", "kind", "attributes",
        "own_attribute_names", "instance_size", "metaclass", "propmeta",
        "storage", "seq", "zero_values", "_variants", "__weakref__",
    )

    def __init__(self, name, superclass, cid, kind, attributes, seq):
        self.name = name
        self.superclass = superclass
        self.rank = 0 if superclass is None else superclass.rank + 1
        self.cid = cid
        self.kind = kind
        self.seq = seq
        self.rc = RC_STATIC
        self.id = 0
        self.metaclass = None
        self.propmeta = None
        inherited = superclass.attributes if superclass is not None else ()
        self.attributes = tuple(inherited) + tuple(attributes)
        self.own_attribute_names = frozenset(a.name for a in attributes)
        self.instance_size = HEADER_SIZE + sum(a.size for a in self.attributes)
        self.zero_values = tuple((a.name, _zero(a.kind)) for a in self.attributes)
        self.storage = make_storage(self)
        self._variants = {_tier_width(len(self.attributes)): self.storage}

    @property
    def is_root(self):
        return self.superclass is None

    def storage_variant(self, width):
        """Storage class for this class on a tier of the given width."""
        width = _tier_width(width)
        st = self._variants.get(width)
        if st is None:
            st = self._variants[width] = make_storage(self, width)
        return st

    def chain(self) -> Iterator["ClassDescriptor"]:
        c = self
        while c is not None:
            yield c
            c = c.superclass

    def attribute(self, path: str) -> Attribute:
        """Resolve ``attr`` (own) or ``Super.attr`` (inherited, explicit)."""
        owner, _, name = path.rpartition(".")
        for a in self.attributes:
            if a.name != name:
                continue
            if (owner or self.name) == a.owner:
                return a
            break
        raise AttributeError(f"{self.name} has no attribute path {path!r}")

    def __repr__(self):
        return f"<class {self.name}>"


def _is_subclass(cls: ClassDescriptor, ancestor: ClassDescriptor) -> bool:
    # rank is the depth, so the candidate ancestor sits exactly
    # (cls.rank - ancestor.rank) links up the chain
    steps = cls.rank - ancestor.rank
    if steps < 0:
        return False
    while steps:
        cls = cls.superclass
        steps -= 1
    return cls is ancestor


class Registry:
    """Masked-identity table of every class, metaclass and property metaclass."""

    initial_size = 1024

    def __init__(self, ids: IdGenerator | None = None):
        self.ids = ids if ids is not None else IdGenerator()
        self.sealed = False
        self._table: list = [None] * self.initial_size
        self._count = 0
        self._by_name: dict[str, ClassDescriptor] = {}
        self._order: list[ClassDescriptor] = []
        self._bootstrap()

    # -- identity table -------------------------------------------------
    @property
    def table_size(self):
        return len(self._table)

    def _insert(self, desc):
        if (self._count + 1) > 0.75 * len(self._table):
            self._grow()
        table = self._table
        mask = len(table) - 1
        i = desc.cid & mask
        while table[i] is not None:
            i = (i + 1) & mask
        table[i] = desc
        self._count += 1

    def _grow(self):
        old = [d for d in self._table if d is not None]
        self._table = [None] * (2 * len(self._table))
        self._count = 0
        for d in old:
            self._insert(d)

    def class_of(self, word: int) -> ClassDescriptor:
        ident = word & IDENTITY_MASK
        if not ident:
            raise LookupFailure("invalid class id 0")
        table = self._table
        mask = len(table) - 1
        i = ident & mask
        while True:
            d = table[i]
            if d is None:
                raise LookupFailure(f"unknown class id {word:#010x}")
            if d.cid & IDENTITY_MASK == ident:
                return d
            i = (i + 1) & mask

    # -- definition -----------------------------------------------------
    def _check_open(self):
        if self.sealed:
            raise SealedError("registry is sealed")

    def _new(self, name, superclass, kind, attributes=()):
        if name in self._by_name:
            raise DefinitionError(f"duplicate class name {name!r}")
        rank = 0 if superclass is None else superclass.rank + 1
        cid = self.ids.allocate_class_id(rank)
        layout = [Attribute(n, k, slot_size(k), name) for n, k in attributes]
        seen = set()
        for a in layout:
            if a.name in _RESERVED or a.name.startswith("_"):
                raise DefinitionError(f"reserved attribute name {a.name!r}")
            if a.name in seen:
                raise DefinitionError(f"duplicate attribute {a.name!r} in {name}")
            seen.add(a.name)
        if superclass is not None:
            clash = seen & {a.name for a in superclass.attributes}
            if clash:
                raise DefinitionError(f"{name} redefines inherited attributes {sorted(clash)}")
        desc = ClassDescriptor(name, superclass, cid, kind, layout, len(self._order))
        self._by_name[name] = desc
        self._order.append(desc)
        self._insert(desc)
        return desc

    def _attach_metas(self, cls, meta_super):
        meta = self._new("m" + cls.name, meta_super, METACLASS)
        pm = self._new("pm" + cls.name, meta, PROPMETA)
        cls.metaclass, cls.propmeta = meta, pm
        cls.id = pm.cid
        meta.id = self.MetaClass.cid
        pm.id = self.PropMetaClass.cid

    def _bootstrap(self):
        # the class/metaclass knot: Object's metaclass derives from Class,
        # which itself derives from Object
        obj = self._new("Object", None, ORDINARY, [])
        beh = self._new("Behavior", obj, ORDINARY, [])
        klass = self._new("Class", beh, ORDINARY, [])
        meta = self._new("MetaClass", klass, ORDINARY, [])
        pmeta = self._new("PropMetaClass", meta, ORDINARY, [])
        self.Object, self.Class = obj, klass
        self.MetaClass, self.PropMetaClass = meta, pmeta
        self._attach_metas(obj, klass)
        for c in (beh, klass, meta, pmeta):
            self._attach_metas(c, c.superclass.metaclass)

    def define_class(self, name: str, superclass, attributes: Iterable = ()):
        """Register ``name`` and return ``(class, metaclass, property metaclass)``.

        ``superclass`` is a registered ordinary class or :data:`ROOT`.
        ``attributes`` is a sequence of ``(name, kind)`` pairs.
        """
        self._check_open()
        if superclass is ROOT:
            spr = None
        elif isinstance(superclass, ClassDescriptor):
            if self._by_name.get(superclass.name) is not superclass:
                raise DefinitionError(f"unknown superclass {superclass.name!r}")
            if superclass.kind != ORDINARY:
                raise DefinitionError("superclass must be an ordinary class")
            spr = superclass
        else:
            raise DefinitionError(f"unknown superclass {superclass!r}")
        for suffix in ("", "m", "pm"):
            if suffix + name in self._by_name:
                raise DefinitionError(f"duplicate class name {suffix + name!r}")
        cls = self._new(name, spr, ORDINARY, list(attributes))
        self._attach_metas(cls, self.Class if spr is None else spr.metaclass)
        return cls, cls.metaclass, cls.propmeta

    def seal(self):
        self.sealed = True

    # -- queries --------------------------------------------------------
    def __getitem__(self, name: str) -> ClassDescriptor:
        return self._by_name[name]

    def __contains__(self, name):
        return name in self._by_name

    def get(self, name, default=None):
        return self._by_name.get(name, default)

    def __iter__(self):
        return iter(self._order)

    def __len__(self):
        return len(self._order)

    def ordinary_classes(self):
        return [c for c in self._order if c.kind == ORDINARY]

    is_kind_of = staticmethod(_is_subclass)

    def initialization_order(self, direction: str = "up"):
        """Ordinary classes by ascending rank, stable by registration.

        ``"down"`` is the exact reverse.
        """
        order = sorted(self.ordinary_classes(), key=lambda c: (c.rank, c.seq))
        if direction == "down":
            order.reverse()
        elif direction != "up":
            raise ValueError("direction must be 'up' or 'down'")
        return order

    # -- dynamic inheritance ---------------------------------------------
    def change_class(self, obj, cls: ClassDescriptor):
        current = self.class_of(obj.id)
        if not _is_subclass(current, cls):
            raise ClassChangeError(f"{cls.name} is not a superclass of {current.name}")
        _rebind(obj, cls)

    def unsafe_change_class(self, obj, cls: ClassDescriptor, spr: ClassDescriptor):
        current = self.class_of(obj.id)
        if not (_is_subclass(current, spr) and _is_subclass(cls, spr)):
            raise ClassChangeError(
                f"{current.name} and {cls.name} do not share superclass {spr.name}")
        if cls.instance_size > current.instance_size:
            raise ClassChangeError(f"instance size of {cls.name} exceeds the object's size")
        _rebind(obj, cls)


def _rebind(obj, cls):
    # only the header changes; slots are reinterpreted by the new class
    tier = type(obj).__mro__[1]
    width = 0 if tier is Instance else len(tier.__slots__)
    if len(cls.attributes) > width:
        raise ClassChangeError(f"{cls.name} needs more storage than the object has")
    obj.__class__ = cls.storage_variant(width)
    obj.id = cls.cid
