import os


def n_workers() -> int:
    """Worker count for FFTs and kernel sums, capped by PEREGRINE_THREADS."""
    cap = os.environ.get("PEREGRINE_THREADS", "").strip()
    n = os.cpu_count() or 1
    if cap:
        try:
            n = max(1, min(n, int(cap)))
        except ValueError:
            pass
    return n
