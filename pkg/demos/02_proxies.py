"""
Proxies and delegation
======================

A Proxy understands almost nothing itself.  Every message it does not
know is handed to the object it wraps, and the substitute is cached so
the second send costs about as much as a direct one.
"""

import time

from dynobj.corelib import make_runtime

rt = make_runtime()
g, c = rt.g, rt.c

counter = rt.gnew(c.Counter)
proxy = rt.gnewWith(c.Proxy, counter)

g.gincr(proxy)
g.gincrBy2(proxy, 10, 20)
print("delegate saw:", counter.cnt)

# a method returning its receiver hands back the proxy, not the delegate
one = rt.gnew(c.Counter)
one.cnt = 1
print("gaddTo returned the proxy:", g.gaddTo(proxy, one) is proxy)

ctx = rt.context()
before = ctx.substitutions
g.gincr(proxy)
print("new substitutions on repeat send:", ctx.substitutions - before)


def per_call(fn, arg, n=200_000):
    t0 = time.perf_counter()
    for _ in range(n):
        fn(arg)
    return (time.perf_counter() - t0) / n * 1e9


print(f"direct  gincr: {per_call(g.gincr, counter):.0f} ns")
print(f"proxied gincr: {per_call(g.gincr, proxy):.0f} ns")

# the proxy has no gincr method of its own, only the delegate does
print("proxy understands gincr:", rt.understands_message([proxy], g.gincr) is rt.True_)
print("counter understands gincr:", rt.understands_message([counter], g.gincr) is rt.True_)
