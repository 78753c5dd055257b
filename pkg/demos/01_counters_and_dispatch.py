"""
Counters and multi-method dispatch
==================================

Define a small hierarchy, attach methods to a generic and watch the
runtime pick the most specific one.
"""

from dynobj import Runtime
from dynobj.corelib import make_runtime

rt = Runtime()
Shape = rt.defclass("Shape")
Circle = rt.defclass("Circle", Shape)
Square = rt.defclass("Square", Shape)

# a rank-2 generic dispatches on both receivers
gcollide = rt.defgeneric("gcollide", 2, returns="obj")
rt.defmethod(gcollide, [Shape, Shape], lambda f, a, b: "shape/shape")
rt.defmethod(gcollide, [Circle, Shape], lambda f, a, b: "circle/shape")
rt.defmethod(gcollide, [Circle, Square], lambda f, a, b: "circle/square, then " + f.next_method(a, b))

c, s = rt.gnew(Circle), rt.gnew(Square)
print(gcollide(c, s))
print(gcollide(s, c))
print(gcollide(c, c))

# Class ids carry the inheritance depth in the high bits
for cls in (Shape, Circle):
    print(cls.name, hex(cls.id), "rank", cls.rank)

# The bundled library has counters and the usual boxed values
lib = make_runtime()
k = lib.gnew(lib.c.Counter)
for _ in range(10):
    lib.g.gincr(k)
lib.g.gincrBy3(k, 1, 2, 3)
print("counter:", k.cnt)

m = lib.gnew(lib.c.MilliCounter)
lib.g.gincrBy(m, 999)
lib.g.gincrBy(m, 2)  # carries into cnt through next_method
print("millicounter:", m.cnt, m.mcnt)

print("cache hits/misses/substitutions/evictions:", lib.cache_stats())
