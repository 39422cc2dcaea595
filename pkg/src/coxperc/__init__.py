"""Exact growth, spectral and cycle computations for hyperbolic Coxeter groups,
with percolation diagnostics on finite Cayley balls."""

try:
    from importlib.metadata import PackageNotFoundError, version

    __version__ = version("artifact")
except Exception:  # not installed
    __version__ = "0.1.0"

from .errors import BudgetError, CoxpercError, ValidationError  # noqa: F401
