"""Generic functions: rank, open/closed parameters and selector identity."""

from __future__ import annotations

from typing import NamedTuple

from .object_model import DefinitionError, IdGenerator, SealedError

MIN_RANK, MAX_RANK = 1, 5

#: closed-parameter type tags with their packed size in bytes
TAG_SIZES = {"int": 4, "float": 8, "obj": 8, "str": 8}
VOID = "void"


def tag_size(tag: str) -> int:
    if tag in TAG_SIZES:
        return TAG_SIZES[tag]
    if tag.startswith("bytes(") and tag.endswith(")"):
        n = int(tag[6:-1])
        if n > 0:
            return n
    raise DefinitionError(f"unknown type tag {tag!r}")


class ParamSlot(NamedTuple):
    """Placement of one closed argument inside the argument pack."""
    index: int
    name: str
    tag: str
    offset: int
    size: int


class SignatureMismatch(DefinitionError):
    def __init__(self, generic, position, expected, got):
        self.position = position
        self.expected = expected
        self.got = got
        super().__init__(
            f"{generic}: closed parameter #{position} is {got!r}, expected {expected!r}")


def _layout(params):
    slots, offset = [], 0
    for i, (name, tag) in enumerate(params):
        size = tag_size(tag)
        align = min(size, 8)
        offset = (offset + align - 1) // align * align
        slots.append(ParamSlot(i, name, tag, offset, size))
        offset += size
    return tuple(slots)


class GenericDescriptor:
    """A message declaration; the object itself is the message selector.

    Calling a generic sends the message.  The runtime installs a per-generic
    dispatching ``__call__`` when the generic is defined.
    """

    __slots__ = ("name", "rank", "closed_params", "return_tag", "sel_id",
                 "layout", "seq", "runtime", "__weakref__")

    def __init__(self, name, rank, closed_params, return_tag, sel_id, seq):
        self.name = name
        self.rank = rank
        self.closed_params = tuple(closed_params)
        self.return_tag = return_tag
        self.sel_id = sel_id
        self.seq = seq
        self.layout = _layout(self.closed_params)
        self.runtime = None

    @property
    def param_names(self):
        return tuple(n for n, _ in self.closed_params)

    @property
    def arg_size(self):
        if not self.layout:
            return 0
        last = self.layout[-1]
        return last.offset + last.size

    @property
    def returns(self):
        return self.return_tag != VOID

    def pack(self, args) -> tuple:
        """Closed arguments in signature order."""
        args = tuple(args)
        if len(args) != len(self.closed_params):
            raise TypeError(f"{self.name} takes {len(self.closed_params)} closed "
                            f"argument(s), got {len(args)}")
        return args

    def signature_compatible(self, other: "GenericDescriptor") -> bool:
        return self.rank == other.rank and self.closed_params == other.closed_params

    def __repr__(self):
        return f"<generic {self.name}/{self.rank}>"


def validate_specialization_signature(gen: GenericDescriptor, params) -> None:
    """Check a specialization's closed parameters against its generic.

    Names and type tags must match position by position.
    """
    params = tuple(params)
    for i, expected in enumerate(gen.closed_params):
        got = params[i] if i < len(params) else None
        if got is None or tuple(got) != expected:
            raise SignatureMismatch(gen.name, i, expected, got)
    if len(params) > len(gen.closed_params):
        i = len(gen.closed_params)
        raise SignatureMismatch(gen.name, i, None, params[i])


class GenericTable:
    def __init__(self, ids: IdGenerator):
        self.ids = ids
        self.sealed = False
        self._by_name: dict[str, GenericDescriptor] = {}

    def define_generic(self, name: str, rank: int, closed_params=(), returns: str = VOID):
        if self.sealed:
            raise SealedError("generic table is sealed")
        if name in self._by_name:
            raise DefinitionError(f"duplicate generic {name!r}")
        if not isinstance(rank, int) or not MIN_RANK <= rank <= MAX_RANK:
            raise DefinitionError(f"generic rank must be in {MIN_RANK}..{MAX_RANK}, got {rank!r}")
        params = []
        for p in closed_params:
            pname, tag = p
            tag_size(tag)
            params.append((pname, tag))
        if len({n for n, _ in params}) != len(params):
            raise DefinitionError(f"{name}: duplicate closed parameter names")
        if returns != VOID:
            tag_size(returns)
        gen = GenericDescriptor(name, rank, params, returns,
                                self.ids.next_identity(), len(self._by_name))
        self._by_name[name] = gen
        return gen

    def seal(self):
        self.sealed = True

    def __getitem__(self, name):
        return self._by_name[name]

    def get(self, name, default=None):
        return self._by_name.get(name, default)

    def __contains__(self, name):
        return name in self._by_name

    def __iter__(self):
        return iter(self._by_name.values())

    def __len__(self):
        return len(self._by_name)
