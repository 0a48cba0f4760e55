"""Z^d subshifts of finite type: patterns, search, exchangeability and entropy."""

from .core import (
    Alphabet,
    ForbiddenPattern,
    Pattern,
    ShiftSpec,
    Support,
    TorusConfig,
    box,
    compile_wang,
    translate,
    validate_pattern,
    validate_torus,
)

__version__ = "0.1.0"

from . import zoo  # noqa: E402,F401  (registers custom validators)

__all__ = [
    "Alphabet", "ForbiddenPattern", "Pattern", "ShiftSpec", "Support", "TorusConfig", "box",
    "compile_wang", "translate", "validate_pattern", "validate_torus", "__version__",
]
