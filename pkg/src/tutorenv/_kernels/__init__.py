"""Hot-loop kernels for the RL adapter and tabular agents.

The compiled extension (_qcore, built from _qcore.pyx) is preferred; the
pure-Python twin (qcore_py) is selected when the extension is unavailable or
when the TUTORENV_PURE_KERNELS environment variable is set to a non-empty
value. Both expose the same four functions with identical semantics; the
benchmark in benchmarks/bench_kernels.py compares them.
"""

import os

if os.environ.get("TUTORENV_PURE_KERNELS"):
    from . import qcore_py as _impl
else:
    try:
        from . import _qcore as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import qcore_py as _impl

IMPLEMENTATION = _impl.IMPLEMENTATION
best_action = _impl.best_action
row_max = _impl.row_max
td_update = _impl.td_update
fill_onehot = _impl.fill_onehot

__all__ = ["IMPLEMENTATION", "best_action", "row_max", "td_update", "fill_onehot"]
