"""
Reference counts and autorelease pools
======================================

Heap objects are counted, automatic ones live in a scope, and pools
release what they hold when they go away.
"""

from dynobj.corelib import make_runtime

rt = make_runtime()
g, c = rt.g, rt.c

obj = rt.gnew(c.Counter)
g.gretain(obj)
print("rc after retain:", obj.rc)
g.grelease(obj)
g.grelease(obj)
print("id after last release:", obj.id)

# a pool releases its objects in reverse order when deleted
pool = rt.gnew(c.AutoRelease)
items = [g.gautoRelease(rt.gnew(c.Counter)) for _ in range(3)]
print("live before pool delete:", rt.heap.live)
g.gdelete(pool)
print("live after pool delete:", rt.heap.live, [o.id for o in items])

# automatic objects are cloned when they need to outlive their scope
with rt.scope():
    tmp = rt.aCounter(5)
    kept = g.gretain(tmp)
print("clone kept:", kept.cnt, "original closed:", tmp.id == 0)
g.grelease(kept)

# with gc=True every new object lands in the current pool
gc = make_runtime(gc=True)
pool = gc.g.gnew(gc.c.AutoRelease)
strs = [gc.g.gnewWithStr(gc.c.String, "string") for _ in range(1000)]
gc.g.gdelete(pool)
gc.shutdown()
print("gc config, freed:", sum(s.id == 0 for s in strs), "live:", gc.heap.live)
