"""Backend selection for the quadratic-in-history inner loops.

The convolution-memory loops are O(J^2) in the number of time steps and
dominate runtime for long histories.  They exist in two interchangeable
implementations: numba-jitted loops and pure NumPy.  Selection happens once
at import time via the environment variable ``MEMDIFF_NUMBA``:

    MEMDIFF_NUMBA=0   force the pure-NumPy path
    MEMDIFF_NUMBA=1   require numba (ImportError if unavailable)
    unset / auto      use numba when importable, NumPy otherwise

``benchmarks/bench_backends.py`` compares the two paths head to head.
"""

import os

_flag = os.environ.get("MEMDIFF_NUMBA", "auto").strip().lower()

if _flag in ("0", "no", "false", "off"):
    NUMBA_ENABLED = False
elif _flag in ("1", "yes", "true", "on"):
    import numba  # noqa: F401  (fail loudly if explicitly requested)

    NUMBA_ENABLED = True
else:
    try:
        import numba  # noqa: F401

        NUMBA_ENABLED = True
    except ImportError:
        NUMBA_ENABLED = False


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"
