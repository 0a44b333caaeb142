"""Fixed points of Markov-type operators on vector measures."""

import json as _json

try:
    from . import _fracmeas as _core
except ImportError:  # plain CMake builds put the module on sys.path directly
    import _fracmeas as _core

BorelSet = _core.BorelSet
LipMap = _core.LipMap
MarkovOperator = _core.MarkovOperator
NumericalError = _core.NumericalError
SolverRefusal = _core.SolverRefusal
VectorMeasure = _core.VectorMeasure
matrix_exp = _core.matrix_exp
mk_norm = _core.mk_norm
mk_star_norm = _core.mk_star_norm
operator_norm = _core.operator_norm
run_config = _core.run_config
verify = _core.verify


def solve(op, tol=1e-8, force_iterations=None, atom_budget=100000):
    """Iterate to the fixed point; returns (measure, report dict)."""
    measure, report = _core.solve(op, tol, force_iterations, atom_budget)
    return measure, _json.loads(report)


def norms(mu, tol=1e-3):
    """The norms report block (mk, mk_star, variation) as a dict."""
    return _json.loads(_core.norms(mu, tol))


__all__ = [
    "BorelSet",
    "LipMap",
    "MarkovOperator",
    "NumericalError",
    "SolverRefusal",
    "VectorMeasure",
    "matrix_exp",
    "mk_norm",
    "mk_star_norm",
    "norms",
    "operator_norm",
    "run_config",
    "solve",
    "verify",
]
