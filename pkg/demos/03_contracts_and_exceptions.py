"""
Contracts and exceptions
========================

Pre and post conditions plus class invariants, switched at run time, and
protected blocks with handlers, a catch-all and a finally clause.
"""

from dynobj import ContractLevel, Thrown, throw_
from dynobj.corelib import make_runtime
from dynobj.exceptions import new_exception

rt = make_runtime(contract_level=ContractLevel.PRE)
g, c = rt.g, rt.c

m = rt.gnew(c.MilliCounter)
try:
    g.gincrBy(m, 1500)
except Thrown as t:
    print("rejected:", t)

# at NONE the precondition is not checked at all
rt.contract_level = "none"
g.gincrBy(m, 1500)
print("accepted at none:", m.cnt, m.mcnt)

# invariants only run at ALL
rt.contract_level = "all"
m.mcnt = 5000
try:
    g.gincr(m)
except Thrown as t:
    print("invariant:", t.payload.msg, "from", t.func)
rt.contract_level = "pre"

# protected blocks; handlers are tried in order
log = []


def body():
    log.append("body")
    throw_(new_exception(rt, c.ExBadRange, "index 12"))


g.protected(body,
            [(c.ExBadValue, lambda ex: log.append("bad value")),
             (c.Exception, lambda ex: log.append("caught " + ex.payload.msg))],
            finally_=lambda: log.append("finally"))
print(log)

# throwing a class object: the metaclass catches it
print(g.protected(lambda: throw_(c.ExBadAlloc),
                  [(c.mExBadAlloc, lambda ex: "class handler")]))
