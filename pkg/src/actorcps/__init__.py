"""An actor language with futures, its continuation-passing compilation,
and executable checks that the compiled runtime only takes steps the source
semantics allows, at the same cost."""

from .compiler import compile_program
from .parser import parse_file, parse_program

__all__ = ["compile_program", "parse_file", "parse_program"]
__version__ = "0.1.0"
