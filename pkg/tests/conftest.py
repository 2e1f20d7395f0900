import numpy as np
import pytest

from qmpso.mps import MatrixProductState


@pytest.fixture
def rng():
    return np.random.default_rng(20260814)


def random_state_mps(L: int, chi: int, rng, d: int = 2) -> MatrixProductState:
    """Normalized random MPS with ragged interior bonds <= chi."""
    dims = [1] + [min(chi, d ** min(n + 1, L - n - 1)) for n in range(L - 1)] + [1]
    tensors = [rng.standard_normal((dims[n], d, dims[n + 1]))
               + 1j * rng.standard_normal((dims[n], d, dims[n + 1]))
               for n in range(L)]
    psi = MatrixProductState(tensors, center=None)
    psi.canonicalize(0)
    psi.tensors[0] /= np.linalg.norm(psi.tensors[0])
    return psi


def random_unitary(dim: int, rng) -> np.ndarray:
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(m)
    return q * (np.diag(r) / np.abs(np.diag(r)))
