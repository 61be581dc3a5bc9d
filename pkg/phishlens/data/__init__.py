import os

DATA_DIR = os.path.dirname(os.path.abspath(__file__))


def data_path(name: str) -> str:
    """Absolute path of a file bundled with the package."""
    return os.path.join(DATA_DIR, name)
