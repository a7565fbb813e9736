"""Reference implementations written without the package's kernels.

They favour the most literal form of each formula (explicit loops, dense
inverses, a different LAPACK driver) over speed.
"""

import numpy as np
import scipy.linalg


def svt_oracle(a, tau):
    u, s, vt = scipy.linalg.svd(a, full_matrices=False, lapack_driver="gesvd")
    return u @ np.diag(np.maximum(s - tau, 0.0)) @ vt


def difference_operator(n):
    """Psi_2 - Psi_1 built from its two selector blocks."""
    psi1 = np.zeros((n - 1, n))
    psi2 = np.zeros((n - 1, n))
    for t in range(n - 1):
        psi1[t, t] = 1.0
        psi2[t, t + 1] = 1.0
    return psi2 - psi1


def smoothing_oracle(b, alpha):
    n = b.shape[1]
    psi = difference_operator(n)
    return alpha * b @ np.linalg.inv(psi.T @ psi + alpha * np.eye(n))


def transform_oracle(x, phi):
    """out[m, i, k] = sum_j phi[j, k] x[m, i, j]."""
    m, i, j = x.shape
    out = np.zeros_like(x)
    for k in range(j):
        for jj in range(j):
            out[:, :, k] += phi[jj, k] * x[:, :, jj]
    return out


def inverse_transform_oracle(x, phi):
    return transform_oracle(x, phi.T)


def tensor_svt_oracle(z, phi, tau):
    t = transform_oracle(z, phi)
    for k in range(t.shape[2]):
        t[:, :, k] = svt_oracle(t[:, :, k], tau)
    return inverse_transform_oracle(t, phi)


def matrix_admm_oracle(y, observed, rho0, rho_max, coef, n_iter, growth=1.05):
    """Single-day, identity-transform solver as a plain matrix iteration.

    Returns the list of low-rank iterates, one per iteration.
    """
    z = np.where(observed, y, 0.0)
    dual = np.zeros_like(z)
    rho = rho0
    iterates = []
    for _ in range(n_iter):
        rho = min(growth * rho, rho_max)
        x = svt_oracle(z - dual / rho, 1.0 / rho)
        b = x + dual / rho
        z = smoothing_oracle(b, 1.0 / coef) if coef > 0 else b
        dual = dual + rho * (x - z)
        z = np.where(observed, y, z)
        iterates.append(x)
    return iterates
