import numpy as np


def dense_principal(dense):
    """Oracle: leading eigenpair of a dense matrix by full nonsymmetric solve.

    Returns (lam, vec, gap) with vec normalized to positive sign and unit
    max-norm, gap = distance from the leading real part to the next one.
    """
    lam, vecs = np.linalg.eig(dense)
    order = np.argsort(lam.real)
    lead = order[-1]
    gap = float(lam.real[order[-1]] - lam.real[order[-2]])
    v = vecs[:, lead].real
    v = v * np.sign(v[np.argmax(np.abs(v))])
    v = v / np.max(np.abs(v))
    return float(lam[lead].real), v, gap


def l2_normalize(v, h, dim):
    return v / np.sqrt(np.sum(v * v) * h**dim)
