"""
Numeric eigenvalue oracle.

Balancing, Householder reduction to Hessenberg form and a complex shifted QR
iteration, all on numpy arrays. The oracle only cross-checks exact results, so
it favours plain, predictable steps over speed.
"""

import logging
from typing import Optional, Sequence, Union

import numpy as np

from niep.config import config
from niep.core.errors import ConvergenceFailure
from niep.core.matrix import Matrix

logger = logging.getLogger(__name__)

_EPS = np.finfo(float).eps
_RADIX = 2.0


def balance(H: np.ndarray) -> np.ndarray:
    """Parlett–Reinsch balancing by powers of two; returns a balanced copy."""
    H = np.array(H, dtype=complex)
    n = H.shape[0]
    converged = False
    while not converged:
        converged = True
        for i in range(n):
            col = np.sum(np.abs(H[:, i])) - abs(H[i, i])
            row = np.sum(np.abs(H[i, :])) - abs(H[i, i])
            if col == 0.0 or row == 0.0:
                continue
            f = 1.0
            s = col + row
            while col < row / _RADIX:
                col *= _RADIX
                row /= _RADIX
                f *= _RADIX
            while col >= row * _RADIX:
                col /= _RADIX
                row *= _RADIX
                f /= _RADIX
            if col + row < 0.95 * s:
                converged = False
                H[i, :] /= f
                H[:, i] *= f
    return H


def hessenberg(H: np.ndarray) -> np.ndarray:
    """Reduce to upper Hessenberg form by Householder reflections."""
    H = np.array(H, dtype=complex)
    n = H.shape[0]
    for k in range(n - 2):
        x = H[k + 1 :, k].copy()
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x
        v[0] += phase * alpha
        v /= np.linalg.norm(v)
        H[k + 1 :, k:] -= 2.0 * np.outer(v, v.conj() @ H[k + 1 :, k:])
        H[:, k + 1 :] -= 2.0 * np.outer(H[:, k + 1 :] @ v, v.conj())
        H[k + 2 :, k] = 0.0
    return H


def _wilkinson_shift(block: np.ndarray) -> complex:
    a, b, c, d = block[0, 0], block[0, 1], block[1, 0], block[1, 1]
    half_trace = (a + d) / 2.0
    disc = np.sqrt(half_trace * half_trace - (a * d - b * c))
    mu1, mu2 = half_trace + disc, half_trace - disc
    return complex(mu1 if abs(mu1 - d) < abs(mu2 - d) else mu2)


def _qr_iterate(H: np.ndarray, max_iterations: int) -> list[complex]:
    n = H.shape[0]
    scale = max(np.max(np.abs(H)), 1.0)
    found: list[complex] = []
    hi = n - 1
    iterations = 0
    stagnant = 0
    while hi >= 0:
        if hi == 0:
            found.append(complex(H[0, 0]))
            break
        lo = hi
        while lo > 0:
            s = abs(H[lo, lo]) + abs(H[lo - 1, lo - 1]) or scale
            if abs(H[lo, lo - 1]) <= _EPS * s:
                H[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            found.append(complex(H[hi, hi]))
            hi -= 1
            stagnant = 0
            continue

        iterations += 1
        stagnant += 1
        if iterations > max_iterations:
            raise ConvergenceFailure(
                f"QR iteration did not converge after {max_iterations} steps", iterations
            )
        if stagnant % 10 == 0:
            # exceptional shift
            shift = H[hi, hi] + abs(H[hi, hi - 1]) * (0.75 + 0.4375j)
        else:
            shift = _wilkinson_shift(H[hi - 1 : hi + 1, hi - 1 : hi + 1])

        size = hi - lo + 1
        block = H[lo : hi + 1, lo : hi + 1] - shift * np.eye(size)
        Q, R = np.linalg.qr(block)
        H[lo : hi + 1, lo : hi + 1] = R @ Q + shift * np.eye(size)

    logger.debug("QR converged in %d iterations", iterations)
    return found


def _multiple_root_radius(multiplicity: int, scale: float) -> float:
    """Spread of the computed copies of an m-fold root: ``factor·eps^(1/m)·scale``."""
    eps = float(np.finfo(float).eps)
    return config.cluster_factor * eps ** (1.0 / multiplicity) * scale


def _merge_clusters(
    values: list[complex], scale: float, merge_radius: Optional[float] = None
) -> list[complex]:
    """
    Replace each numerically multiple root by its mean, keeping multiplicities.

    A value joins a cluster of size m when it lies within the radius of an
    (m+1)-fold root of some member, so distinct close eigenvalues stay apart.
    """
    remaining = sorted(values, key=lambda z: (z.real, z.imag))
    result: list[complex] = []
    while remaining:
        cluster = [remaining.pop(0)]
        grew = True
        while grew:
            grew = False
            for z in list(remaining):
                radius = (
                    merge_radius
                    if merge_radius is not None
                    else _multiple_root_radius(len(cluster) + 1, scale)
                )
                if any(abs(z - w) <= radius for w in cluster):
                    cluster.append(z)
                    remaining.remove(z)
                    grew = True
        mean = sum(cluster) / len(cluster)
        result.extend([complex(mean)] * len(cluster))
    return result


def numeric_eigenvalues(
    M: Union[Matrix, np.ndarray],
    merge_radius: Optional[float] = None,
    iteration_factor: Optional[int] = None,
) -> list[complex]:
    """
    All eigenvalues of ``M`` as complex floats.

    Args:
        M: Matrix in either mode, or a square numpy array
        merge_radius: Fixed radius for merging computed copies of a multiple
            root; by default m copies merge within
            ``cluster_factor·eps^(1/m)·max(1, ‖M‖)``
        iteration_factor: QR steps allowed per dimension

    Returns:
        Eigenvalues sorted by real part then imaginary part

    Raises:
        ConvergenceFailure: If the iteration cap is reached
    """
    array = M.to_numpy() if isinstance(M, Matrix) else np.asarray(M, dtype=complex)
    n = array.shape[0]
    if n == 0:
        return []
    if n == 1:
        return [complex(array[0, 0])]

    factor = iteration_factor or config.eigen_iteration_factor
    H = hessenberg(balance(array))
    values = _qr_iterate(H, factor * n)

    norm = float(np.max(np.sum(np.abs(array), axis=1)))
    merged = _merge_clusters(values, max(1.0, norm), merge_radius)
    return sorted(merged, key=lambda z: (round(z.real, 12), round(z.imag, 12)))


def match_eigenvalues(found: Sequence[complex], target: Sequence[complex]) -> float:
    """
    Pair each target with its nearest unused found value.

    Returns:
        The largest pairing distance, or ``inf`` if the lengths differ
    """
    if len(found) != len(target):
        return float("inf")
    unused = list(found)
    worst = 0.0
    for t in sorted(target, key=lambda z: (complex(z).real, complex(z).imag)):
        t = complex(t)
        best = min(range(len(unused)), key=lambda k: abs(unused[k] - t))
        worst = max(worst, abs(unused.pop(best) - t))
    return worst
