"""
Functors and lazy expressions
=============================

Messages sent to placeholders build expressions instead of running.
Evaluating them later fills the holes.
"""

from dynobj.corelib import make_runtime

rt = make_runtime()
g, F = rt.g, rt.functors

# a closure over a counter
k = rt.gnew(rt.c.Counter)
bump = F.make_functor(g.gincr, [k])
for _ in range(1000):
    g.geval(bump)
print("counter after 1000 evals:", k.cnt)

# x*x as an expression in one variable
x = g.aVar(0)
sq = g.gmul(x, x)
print("arity of x*x:", F.arity(sq))
print("7*7 =", g.gint(g.geval1(sq, rt.aInt(7))))

# forward difference (f(x+h) - f(x)) / h, with h fixed later
h = g.aVar(1)
grad = g.gdiv(g.gsub(g.geval1(sq, g.gadd(x, h)), g.geval1(sq, x)), h)
d = g.geval2(grad, rt.Var, rt.aFloat(0.5))
print("d/dx x^2 at 3 with dx=0.5:", g.gflt(g.geval1(d, rt.aFloat(3))))

# partial application from plain Python callables
fun = F.build_expression(lambda a, b, c: a * 100 + b * 10 + c, [rt.Var] * 3)
part = F.apply(fun, [1])
print("arity after one argument:", F.arity(part), "->", F.apply(part, [2, 3]))

# map over an array
arr = rt.new_array([rt.aInt(i) for i in range(5)])
print([g.gint(v) for v in g.gmap(g.gmul(g.aVar(0), rt.aInt(10)), arr).items])
