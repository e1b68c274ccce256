"""Constructors and Schmidt splits for vacuum, W, boosted and Dicke states.

Amplitude arrays are indexed over the 2^N computational basis with site 0
as the least-significant bit (shared convention across the package).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .opspace import Region

NORM_TOL = 1e-12


def _popcounts(n_sites: int) -> np.ndarray:
    idx = np.arange(1 << n_sites, dtype=np.int64)
    counts = np.zeros(idx.shape, dtype=np.int64)
    for j in range(n_sites):
        counts += (idx >> j) & 1
    return counts


def vacuum(n_sites: int) -> np.ndarray:
    psi = np.zeros(1 << n_sites, dtype=complex)
    psi[0] = 1.0
    return psi


def w_state(n_sites: int) -> np.ndarray:
    return w_p(n_sites, 1)


def w_p(n_sites: int, p: int) -> np.ndarray:
    """Uniform superposition over all p-particle configurations."""
    if not 0 <= p <= n_sites:
        raise ValueError(f"p={p} outside 0..{n_sites}")
    psi = np.zeros(1 << n_sites, dtype=complex)
    mask = _popcounts(n_sites) == p
    psi[mask] = 1.0 / np.sqrt(comb(n_sites, p))
    return psi


def w_q(n_sites: int, m: int, conjugate: bool = False) -> np.ndarray:
    """Momentum-boosted W state with q = 2*pi*m/N and phases e^{-iqj}.

    ``conjugate`` flips to the e^{+iqj} convention used for twisted
    two-particle states.
    """
    q = 2.0 * np.pi * (m % n_sites) / n_sites
    sign = +1.0 if conjugate else -1.0
    psi = np.zeros(1 << n_sites, dtype=complex)
    for j in range(n_sites):
        psi[1 << j] = np.exp(sign * 1j * q * j) / np.sqrt(n_sites)
    return psi


def droplet(n_sites: int, m_size: int, p: int) -> np.ndarray:
    """W^p on sites 0..M-1 tensored with vacuum on the rest."""
    if not 1 <= m_size <= n_sites:
        raise ValueError(f"droplet size {m_size} outside 1..{n_sites}")
    if not 0 <= p <= m_size:
        raise ValueError(f"p={p} outside 0..{m_size}")
    psi = np.zeros(1 << n_sites, dtype=complex)
    inner = w_p(m_size, p)
    psi[: 1 << m_size] = inner
    return psi


def translate(psi: np.ndarray, shift: int, n_sites: int) -> np.ndarray:
    """Cyclic site translation j -> j + shift."""
    out = np.empty_like(psi)
    idx = np.arange(1 << n_sites, dtype=np.int64)
    s = shift % n_sites
    if s == 0:
        return psi.copy()
    full = (1 << n_sites) - 1
    rolled = ((idx << s) | (idx >> (n_sites - s))) & full
    out[rolled] = psi
    return out


@dataclass(frozen=True)
class SchmidtSplit:
    """Exact Schmidt data of a W^p state across a contiguous cut.

    coefficients holds (weight, l, p - l): weight on |W^l>_X (x) |W^{p-l}>_Xc.
    """

    region: Region
    p: int
    coefficients: tuple

    def weights(self) -> np.ndarray:
        return np.array([w for w, _, _ in self.coefficients])


def schmidt_w_family(n_sites: int, p: int, region: Region) -> SchmidtSplit:
    """Schmidt decomposition of W^p over region X vs complement.

    Weights are sqrt(C(|X|,l) C(N-|X|,p-l) / C(N,p)); the l sum is truncated
    exactly when |X| < p or |X^c| < p rather than assuming |X| >= p.
    """
    if region.n_sites != n_sites:
        raise ValueError("region defined for a different chain")
    size, csize = region.length, n_sites - region.length
    coeffs = []
    for l in range(max(0, p - csize), min(p, size) + 1):
        w = np.sqrt(comb(size, l) * comb(csize, p - l) / comb(n_sites, p))
        if w > 0:
            coeffs.append((float(w), l, p - l))
    return SchmidtSplit(region, p, tuple(coeffs))


def dense_schmidt_values(psi: np.ndarray, region: Region) -> np.ndarray:
    """Singular values of the reshaped amplitude matrix (brute-force oracle)."""
    n = region.n_sites
    if psi.shape != (1 << n,):
        raise ValueError("state/region mismatch")
    inside = region.sites()
    outside = [j for j in range(n) if j not in inside]
    idx = np.arange(1 << n)
    row = np.zeros(idx.shape, dtype=np.int64)
    for k, j in enumerate(inside):
        row |= ((idx >> j) & 1) << k
    col = np.zeros(idx.shape, dtype=np.int64)
    for k, j in enumerate(outside):
        col |= ((idx >> j) & 1) << k
    mat = np.zeros((1 << len(inside), 1 << len(outside)), dtype=complex)
    mat[row, col] = psi
    return np.linalg.svd(mat, compute_uv=False)


def state_by_name(name: str, n_sites: int) -> np.ndarray:
    """CLI-facing state names: vacuum, w, wq:m=3, wp:p=2, droplet:M=51,p=1."""
    base, _, arg_txt = name.partition(":")
    args = {}
    if arg_txt:
        for pair in arg_txt.split(","):
            key, _, val = pair.partition("=")
            args[key.strip()] = int(val)
    base = base.strip().lower()
    if base == "vacuum":
        return vacuum(n_sites)
    if base == "w":
        return w_state(n_sites)
    if base == "wq":
        return w_q(n_sites, args.get("m", 1))
    if base == "wp":
        return w_p(n_sites, args.get("p", 2))
    if base == "droplet":
        return droplet(n_sites, args.get("M", n_sites), args.get("p", 1))
    raise ValueError(f"unknown state {name!r}")
