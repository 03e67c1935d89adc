import os
from contextlib import contextmanager


@contextmanager
def atomic_write(path, newline=""):
    """Open ``path`` for writing via a temp file renamed into place on success."""
    path = os.fspath(path)
    tmp = f"{path}.tmp{os.getpid()}"
    try:
        with open(tmp, "w", newline=newline) as fh:
            yield fh
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)
