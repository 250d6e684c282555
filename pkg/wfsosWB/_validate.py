from typing import Any


def make_positive_int(value: Any, name: str) -> int:
    try:
        n = int(value)
    except Exception as e:
        raise ValueError(f"`{name}` must be an integer, got {value!r}.") from e
    if isinstance(value, bool) or n != value or n <= 0:
        raise ValueError(f"`{name}` must be a positive integer, got {value!r}.")
    return n
