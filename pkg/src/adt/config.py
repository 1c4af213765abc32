import os

DEFAULT_BUDGET = 10**7


def budget(explicit: int | None = None) -> int:
    """Candidate budget for brute-force searches; ADT_BUDGET overrides the default."""
    if explicit is not None:
        return explicit
    raw = os.environ.get("ADT_BUDGET")
    if raw:
        try:
            return int(raw)
        except ValueError:
            pass
    return DEFAULT_BUDGET
