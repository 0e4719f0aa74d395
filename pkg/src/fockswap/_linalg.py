import numpy as np
import scipy.sparse as sp


def expi_hermitian(h: np.ndarray, t: float = 1.0) -> np.ndarray:
    """exp(-i t h) for Hermitian ``h``, through its eigendecomposition.

    Exactly unitary up to rounding regardless of the size of ``t * h``.
    """
    evals, evecs = np.linalg.eigh(h)
    return (evecs * np.exp(-1j * t * evals)) @ evecs.conj().T


def unitarity_error(u) -> float:
    """max |U^dag U - I| for dense or scipy.sparse ``u``."""
    prod = u.conj().T @ u
    if sp.issparse(prod):
        diff = (prod - sp.identity(prod.shape[0], format="csr")).tocsr()
        return float(np.max(np.abs(diff.data), initial=0.0))
    return float(np.max(np.abs(prod - np.eye(prod.shape[0]))))
