"""
Model Jet Builders
==================

Analytic jets used by the soliton fixtures:

1. Radial jets: F(q) with q = x_0^2 + ... + x_{m-1}^2, differentiated by
   Faa di Bruno (q is quadratic, so only blocks of size one and two occur)
2. Conformal metrics u(q) * delta embedded block-wise
3. Warped products dr^2 + P(r) (dtheta^2 + sin^2(theta) dphi^2) in the
   chart (r, theta, phi)
"""

from itertools import product
from typing import Iterator, List, Sequence, Tuple

import numpy as np

Block = Tuple[int, ...]


def _pair_partitions(indices: Tuple[int, ...]) -> Iterator[List[Block]]:
    """All partitions of ``indices`` into blocks of size one or two."""
    if not indices:
        yield []
        return
    first, rest = indices[0], indices[1:]
    for tail in _pair_partitions(rest):
        yield [(first,)] + tail
    for pos, partner in enumerate(rest):
        remaining = rest[:pos] + rest[pos + 1:]
        for tail in _pair_partitions(remaining):
            yield [(first, partner)] + tail


def radial_scalar_terms(
    x: np.ndarray,
    m: int,
    f_derivatives: Sequence[float],
    order: int,
) -> List[np.ndarray]:
    """
    Jet of F(q(x)), q = sum_{a<m} x_a^2.

    Args:
        x: chart coordinates (length n)
        m: number of leading coordinates entering q
        f_derivatives: F(q), F'(q), ... at least up to ``order``
        order: highest derivative order returned

    Returns:
        terms[k] of shape (n,)*k
    """
    n = len(x)
    mask = np.zeros(n)
    mask[:m] = 1.0
    y = 2.0 * mask * np.asarray(x, dtype=float)
    pair = 2.0 * np.diag(mask)

    terms: List[np.ndarray] = [np.asarray(float(f_derivatives[0]))]
    for k in range(1, order + 1):
        acc = np.zeros((n,) * k)
        for blocks in _pair_partitions(tuple(range(k))):
            piece = np.asarray(float(f_derivatives[len(blocks)]))
            labels: List[int] = []
            for block in blocks:
                piece = np.multiply.outer(piece, y if len(block) == 1 else pair)
                labels.extend(block)
            acc = acc + np.transpose(piece, np.argsort(labels))
        terms.append(acc)
    return terms


def conformal_metric_terms(scalar_terms: Sequence[np.ndarray], n: int) -> List[np.ndarray]:
    """Metric jet u * I from a scalar jet u."""
    eye = np.eye(n)
    return [np.multiply.outer(t, eye) for t in scalar_terms]


def embed_terms(
    terms: Sequence[np.ndarray],
    n: int,
    tensor_rank: int,
    constant: np.ndarray = None,
) -> List[np.ndarray]:
    """
    Embed jets of a k-dimensional factor into n dimensions by slice assignment.

    The block belonging to the factor is copied unchanged; the value term
    gets ``constant`` added (e.g. the flat line's metric entry).
    """
    out = []
    for k, term in enumerate(terms):
        big = np.zeros((n,) * (k + tensor_rank))
        small_dim = term.shape[0] if term.ndim else 0
        if term.ndim:
            big[(slice(0, small_dim),) * term.ndim] = term
        else:
            big = np.asarray(term, dtype=float).copy()
        if k == 0 and constant is not None:
            big = big + constant
        out.append(big)
    return out


def cigar_conformal_derivatives(q: float, order: int) -> List[float]:
    """Derivatives of u(q) = 1/(1+q): (-1)^k k! / (1+q)^(k+1)."""
    s = 1.0 + q
    out = []
    fact = 1.0
    for k in range(order + 1):
        if k:
            fact *= k
        out.append((-1.0) ** k * fact / s ** (k + 1))
    return out


def cigar_potential_derivatives(q: float, order: int) -> List[float]:
    """Derivatives of f(q) = -log(1+q): (-1)^k (k-1)! / (1+q)^k for k >= 1."""
    s = 1.0 + q
    out = [-np.log1p(q)]
    fact = 1.0
    for k in range(1, order + 1):
        if k > 1:
            fact *= k - 1
        out.append((-1.0) ** k * fact / s ** k)
    return out


def warped_metric_terms(
    theta: float,
    warp_derivatives: Sequence[float],
    order: int,
) -> List[np.ndarray]:
    """
    Jet of dr^2 + P(r) dtheta^2 + P(r) sin^2(theta) dphi^2.

    Args:
        theta: polar angle of the sphere chart
        warp_derivatives: P, P', ... at the radius, at least up to ``order``
        order: highest derivative order returned
    """
    sin2 = np.sin(2.0 * theta)
    cos2 = np.cos(2.0 * theta)
    sphere = [np.sin(theta) ** 2, sin2, 2.0 * cos2, -4.0 * sin2, -8.0 * cos2]

    terms = []
    for k in range(order + 1):
        term = np.zeros((3,) * k + (3, 3))
        if k == 0:
            term[0, 0] = 1.0
        for idx in product(range(3), repeat=k):
            if 2 in idx:
                continue
            n_theta = idx.count(1)
            n_r = k - n_theta
            if n_theta == 0:
                term[idx + (1, 1)] = warp_derivatives[n_r]
            term[idx + (2, 2)] = warp_derivatives[n_r] * sphere[n_theta]
        terms.append(term)
    return terms


def radial_function_terms(derivatives: Sequence[float], order: int) -> List[np.ndarray]:
    """Jet of a function of the first coordinate only."""
    terms = [np.asarray(float(derivatives[0]))]
    for k in range(1, order + 1):
        term = np.zeros((3,) * k)
        term[(0,) * k] = derivatives[k]
        terms.append(term)
    return terms
