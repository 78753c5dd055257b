"""Properties: class-objects under ``Property`` plus ``ggetAt``/``gputAt`` bindings.

A property named ``value`` is the class ``P_value``.  Being a class-object,
``P_value`` is sent as an ordinary receiver; its class ``pmP_value`` derives
from ``mP_value``, which is what accessor methods specialize on.
"""

from __future__ import annotations

from .exceptions import new_exception, throw_
from .object_model import ClassDescriptor, DefinitionError

PREFIX = "P_"


class Binding:
    __slots__ = ("owner", "prop", "attribute", "getter", "putter", "get_method", "put_method")

    def __init__(self, owner, prop, attribute, getter, putter):
        self.owner = owner
        self.prop = prop
        self.attribute = attribute
        self.getter = getter
        self.putter = putter
        self.get_method = self.put_method = None

    @property
    def read_only(self):
        return self.putter is None


class PropertyTable:
    def __init__(self, rt):
        self.rt = rt
        self.by_name = {}
        self.bindings = {}

    def define(self, name: str) -> ClassDescriptor:
        if name in self.by_name:
            raise DefinitionError(f"duplicate property {name!r}")
        rt = self.rt
        prop = rt.defclass(PREFIX + name, rt.c.Property)
        self.by_name[name] = prop
        return prop

    def resolve(self, key):
        """Property class for a key (str or String object), or None."""
        if not isinstance(key, str):
            key = getattr(key, "str", None)
            if not isinstance(key, str):
                return None
        return self.by_name.get(key)

    def bind(self, owner, prop, attribute=None, getter=None, putter=None):
        """Bind ``prop`` on ``owner`` to an attribute path (None: the whole object).

        ``getter`` boxes the attribute value (or receives the object itself);
        ``putter`` unboxes a value for storage.  No putter means read-only.
        """
        rt = self.rt
        if isinstance(prop, str):
            prop = self.by_name[prop]
        if (owner, prop) in self.bindings:
            raise DefinitionError(f"{owner.name} already binds {prop.name}")
        if getter is None:
            raise DefinitionError("a property binding needs a getter")
        name = None
        if attribute is not None:
            name = owner.attribute(attribute).name
        if putter is not None and name is None:
            raise DefinitionError("a whole-object property cannot be written")
        b = Binding(owner, prop, name, getter, putter)
        mprop = prop.metaclass

        if name is None:
            def get(f, self, p):
                return getter(self)
        else:
            def get(f, self, p):
                return getter(getattr(self, name))
        b.get_method = rt.defmethod(rt.g.ggetAt, [owner, mprop], get)

        if putter is not None:
            def put(f, self, p, value):
                setattr(self, name, putter(value))
            b.put_method = rt.defmethod(rt.g.gputAt, [owner, mprop, rt.Object], put)
        else:
            def put(f, self, p, value):
                throw_(new_exception(rt, rt.c.ExBadProperty,
                                     f"{prop.name} is read-only on {owner.name}", obj=p))
            b.put_method = rt.defmethod(rt.g.gputAt, [owner, mprop, rt.Object], put)
            b.put_method.readonly = True
        self.bindings[(owner, prop)] = b
        return b

    def _is_property_meta(self, c):
        prop = self.rt.c.Property
        return c.kind == "metaclass" and c.rank > prop.metaclass.rank and \
            self.rt.registry.is_kind_of(c, prop.metaclass)

    def enumerate(self, cls, mode="readable"):
        """Properties readable (or writable) on ``cls`` and its superclasses."""
        if mode not in ("readable", "writable"):
            raise ValueError("mode must be 'readable' or 'writable'")
        rt = self.rt
        gen = rt.g.ggetAt if mode == "readable" else rt.g.gputAt
        chain = list(cls.chain())
        found = []
        for owner in chain:
            for m in rt.methods.methods(gen):
                if m.specializers[0] is not owner or m.readonly:
                    continue
                meta = m.specializers[1]
                if not self._is_property_meta(meta):
                    continue
                prop = rt.registry[meta.name[1:]]
                if prop not in found:
                    found.append(prop)
        return found


def property_name(prop: ClassDescriptor) -> str:
    return prop.name[len(PREFIX):]


def install(rt):
    rt.defclass("Property")
    rt.defgeneric("ggetAt", 2, returns="obj")
    rt.defgeneric("gputAt", 3)
    table = rt.properties = PropertyTable(rt)
    g = rt.g

    def unknown(key):
        throw_(new_exception(rt, rt.c.ExBadProperty, f"no property {key!r}", obj=key),
               depth=3)

    def kvc_get(obj, key):
        prop = table.resolve(key)
        if prop is None:
            unknown(key)
        return g.ggetAt(obj, prop)

    def kvc_put(obj, key, value):
        prop = table.resolve(key)
        if prop is None:
            unknown(key)
        g.gputAt(obj, prop, value)

    rt.define_property = table.define
    rt.bind_property = table.bind
    rt.enumerate_properties = table.enumerate
    rt.kvc_get = g.kvc_get = kvc_get
    rt.kvc_put = g.kvc_put = kvc_put
    for name in ("class", "value", "name", "size"):
        table.define(name)
    # key-value coding by message: ggetAt(obj, aString)
    String = rt.registry.get("String")
    if String is not None:
        rt.defmethod(g.ggetAt, [rt.Object, String], lambda f, obj, key: kvc_get(obj, key))
        rt.defmethod(g.gputAt, [rt.Object, String, rt.Object],
                     lambda f, obj, key, value: kvc_put(obj, key, value))
