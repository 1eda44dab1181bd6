"""Numba entry points with a pure-Python fallback when numba is unavailable."""
import logging

logger = logging.getLogger(__name__)

try:
    import numba
    from numba import njit, prange
    HAS_NUMBA = True
except ImportError:
    numba = None
    HAS_NUMBA = False
    prange = range

    def njit(*args, **kwargs):
        """No-op stand-in for numba.njit so kernels still run (slowly) as Python."""
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def decorator(func):
            return func
        return decorator


def set_worker_threads(workers):
    """Restrict numba's thread pool; returns the count actually in use."""
    if not HAS_NUMBA:
        logger.warning("numba not installed - trajectory kernels run as plain Python")
        return 1
    available = numba.config.NUMBA_NUM_THREADS
    threads = available if workers is None else max(1, min(int(workers), available))
    numba.set_num_threads(threads)
    return threads
