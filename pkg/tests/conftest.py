import pytest

from dynobj import Runtime
from dynobj.corelib import make_runtime


@pytest.fixture
def rt():
    """Sealed runtime with the example library loaded."""
    return make_runtime()


@pytest.fixture
def bare():
    """Open runtime with only the kernel classes and generics."""
    return Runtime()


@pytest.fixture
def abc(bare):
    """A :> B :> C plus a rank-2 generic with all nine specializations."""
    A = bare.defclass("A")
    B = bare.defclass("B", A)
    C = bare.defclass("C", B)
    gen = bare.defgeneric("gpair", 2, returns="obj")
    for x in (A, B, C):
        for y in (A, B, C):
            bare.defmethod(gen, [x, y], _tagger(x.name + y.name))
    return bare, (A, B, C), gen


def _tagger(tag):
    def body(f, a, b):
        return tag
    return body
