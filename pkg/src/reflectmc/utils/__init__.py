from .parse import parse, parse_builtin
from .model import build_model
from .verify import verify
from .save import save_verdicts, save_summary, save_samples
from .dump import dump

__all__ = [
    "parse",
    "parse_builtin",
    "build_model",
    "verify",
    "save_verdicts",
    "save_summary",
    "save_samples",
    "dump",
]
