"""dynobj: an embeddable dynamic object runtime with multi-method dispatch."""

from .contracts import ContractLevel
from .dispatch import ClosedScopeFault, DispatchConfig, Frame, RefCountError
from .exceptions import Thrown, protected, rethrow, throw_
from .generics import GenericDescriptor, SignatureMismatch
from .methods import MethodDescriptor
from .object_model import (RC_AUTO, RC_STATIC, ROOT, ClassDescriptor, DefinitionError,
                           LookupFailure, SealedError)
from .runtime import Runtime

__version__ = "0.1.0"

__all__ = [
    "ClassDescriptor", "ClosedScopeFault", "ContractLevel", "DefinitionError",
    "DispatchConfig", "Frame", "GenericDescriptor", "LookupFailure", "MethodDescriptor",
    "RC_AUTO", "RC_STATIC", "ROOT", "RefCountError", "Runtime", "SealedError",
    "SignatureMismatch", "Thrown", "protected", "rethrow", "throw_",
]
