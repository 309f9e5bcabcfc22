import pytest

from varseq.jetexpr import Signature


@pytest.fixture
def line():
    """One base coordinate x, one field u."""
    return Signature(("x",), ("u",), 6)


@pytest.fixture
def time_line():
    return Signature(("t",), ("u",), 6)


@pytest.fixture
def plane():
    """Two base coordinates x, y, one field u."""
    return Signature(("x", "y"), ("u",), 6)


@pytest.fixture
def particle():
    """Point particle in the plane: t -> (x, y)."""
    return Signature(("t",), ("x", "y"), 6)
