"""Injective MPS machinery: transfer spectra, push-through, boundary action.

For a translation-invariant MPS tensor A^s and an on-site symmetry
U^theta = e^{i theta L} leaving the state invariant, the push-through
relation sum_s' U_{ss'} A^{s'} = V A^s V^dag defines a bond unitary V;
truncating the symmetry to a patch then acts as physical operators W on
R_inj boundary sites.  The symmetry generator sum_j L_j is itself a parent
Hamiltonian of the state, never type III here, and provably type II when
the transfer matrix E = sum_s A^s (x) (A^s)* is full-rank and V is not a
pure phase.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from . import boundary as boundary_mod

PUSH_TOL = 1e-10
FULL_RANK_TOL = 1e-10
DENSE_MAX_DIM = 70000


class NotSymmetricError(ValueError):
    """The MPS is not invariant under the requested symmetry."""


@dataclass(frozen=True)
class MPSTensor:
    data: np.ndarray          # (physical s, bond alpha, bond beta)

    def __post_init__(self):
        if self.data.ndim != 3 or self.data.shape[1] != self.data.shape[2]:
            raise ValueError("tensor must be (d, D, D)")

    @property
    def d(self) -> int:
        return self.data.shape[0]

    @property
    def bond(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class NotInjective:
    max_block: int


@dataclass(frozen=True)
class SymmetrySpec:
    generator: np.ndarray     # Hermitian d x d
    theta_samples: tuple = (0.3, 0.7, 1.1)

    def resolve(self, a: "MPSTensor") -> dict:
        """Bond unitary and push-through residual per sampled angle."""
        out = {}
        for theta in self.theta_samples:
            v, res = push_through_check(a, self.generator, theta)
            if v is None:
                raise NotSymmetricError(
                    f"push-through residual {res:.3e} at theta={theta}")
            out[theta] = (v, res)
        return out


def builtin_aklt() -> MPSTensor:
    """A^+- = +-sqrt(2/3) sigma^+-, A^0 = -(1/sqrt 3) sigma^z; basis (+,0,-)."""
    sp = np.array([[0, 1], [0, 0]], dtype=complex)
    sm = np.array([[0, 0], [1, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    data = np.stack([np.sqrt(2.0 / 3.0) * sp,
                     -sz / np.sqrt(3.0),
                     -np.sqrt(2.0 / 3.0) * sm])
    return MPSTensor(data)


def builtin_ssh() -> MPSTensor:
    """Dimerized singlet chain; two qubits (alpha, beta) per site, d = 4.

    Physical index s = 2*s_alpha + s_beta with up = 0, down = 1.
    """
    data = np.zeros((4, 2, 2), dtype=complex)
    s = 1.0 / np.sqrt(2.0)
    data[0, 1, 0] = -s      # |up up>
    data[1, 1, 1] = -s      # |up down>
    data[2, 0, 0] = s       # |down up>
    data[3, 0, 1] = s       # |down down>
    return MPSTensor(data)


def spin1_matrix(axis: str) -> np.ndarray:
    """Spin-1 generators in the (+, 0, -) basis."""
    r = 1.0 / np.sqrt(2.0)
    sx = np.array([[0, r, 0], [r, 0, r], [0, r, 0]], dtype=complex)
    sy = np.array([[0, -1j * r, 0], [1j * r, 0, -1j * r], [0, 1j * r, 0]],
                  dtype=complex)
    sz = np.diag([1.0, 0.0, -1.0]).astype(complex)
    return {"x": sx, "y": sy, "z": sz}[axis]


def ssh_sz_matrix() -> np.ndarray:
    """sigma^z_alpha + sigma^z_beta on the 4-dimensional doubled site."""
    sz = np.diag([1.0, -1.0])
    eye = np.eye(2)
    return np.kron(sz, eye) + np.kron(eye, sz)


def transfer_matrix(a: MPSTensor) -> np.ndarray:
    """E = sum_s A^s (x) (A^s)*, spectrum sorted by |eigenvalue| descending."""
    return sum(np.kron(a.data[s], a.data[s].conj()) for s in range(a.d))


def transfer_spectrum(a: MPSTensor) -> np.ndarray:
    vals = np.linalg.eigvals(transfer_matrix(a))
    return vals[np.argsort(-np.abs(vals))]


def is_full_rank(a: MPSTensor, tol: float = FULL_RANK_TOL) -> bool:
    svals = np.linalg.svd(transfer_matrix(a), compute_uv=False)
    return bool(svals[-1] > tol * svals[0])


def _blocked(a: MPSTensor, k: int) -> np.ndarray:
    """(d^k, D, D) stack of k-site products A^{s_1} ... A^{s_k}."""
    out = a.data
    for _ in range(k - 1):
        out = np.einsum("iab,jbc->ijac", out, a.data).reshape(
            -1, a.bond, a.bond)
    return out


def injectivity_length(a: MPSTensor, max_block: int = 6):
    """Smallest k whose blocked tensors span all D x D matrices."""
    if max_block > 6:
        raise ValueError("max_block <= 6")
    target = a.bond ** 2
    for k in range(1, max_block + 1):
        mats = _blocked(a, k).reshape(-1, target)
        svals = np.linalg.svd(mats, compute_uv=False)
        if svals.size >= target and svals[target - 1] > 1e-10 * svals[0]:
            return k
    return NotInjective(max_block)


def push_through_check(a: MPSTensor, generator: np.ndarray, theta: float):
    """Solve for the bond unitary V(theta); returns (V or None, residual).

    V is the dominant eigenvector of the symmetry-twisted transfer map
    M -> sum_s (U A)^s M (A^s)^dag, unitarized and gauge-fixed to
    det V real positive.  The residual is the worst Frobenius defect of
    the push-through relation; when it exceeds the tolerance the state is
    not symmetric and V is withheld.
    """
    u = expm(1j * theta * np.asarray(generator, dtype=complex))
    ua = np.einsum("st,tab->sab", u, a.data)
    d, dim = a.d, a.bond
    f_mat = sum(np.kron(ua[s], a.data[s].conj()) for s in range(d))
    vals, vecs = np.linalg.eig(f_mat)
    lead = np.argmax(np.abs(vals))
    m = vecs[:, lead].reshape(dim, dim)
    # unitarize: if push-through holds, m is proportional to a unitary
    gram = m @ m.conj().T
    scale = np.sqrt(np.trace(gram).real / dim)
    v = m / scale
    det = np.linalg.det(v)
    v = v * np.exp(-1j * np.angle(det) / dim)
    residual = max(
        float(np.linalg.norm(ua[s] - v @ a.data[s] @ v.conj().T))
        for s in range(d))
    if residual > PUSH_TOL:
        return None, residual
    return v, residual


def boundary_operators(a: MPSTensor, v: np.ndarray, r_inj: int):
    """Physical window operators (W_left, W_right) realizing the V insertion.

    The insertion is solved at generator level, O @ blocks = log(V) A^{(s)}
    (least squares; exact under injectivity), and exponentiated: since the
    matrix equation iterates, W = exp(O) then satisfies
    sum_{s'} W[s,s'] A^{(s')} = V A^{(s)} and is invertible by construction.
    """
    from scipy.linalg import logm
    blocks = _blocked(a, r_inj)
    flat = blocks.reshape(blocks.shape[0], -1)
    pinv = np.linalg.pinv(flat)
    vlog = logm(v)
    gen_l = np.einsum("ab,sbc->sac", vlog, blocks).reshape(blocks.shape[0], -1)
    gen_r = np.einsum("sab,bc->sac", blocks, -vlog).reshape(blocks.shape[0], -1)
    w_left = expm(gen_l @ pinv)
    w_right = expm(gen_r @ pinv)
    tgt_l = np.einsum("ab,sbc->sac", v, blocks).reshape(blocks.shape[0], -1)
    tgt_r = np.einsum("sab,bc->sac", blocks, v.conj().T).reshape(
        blocks.shape[0], -1)
    res_l = float(np.linalg.norm(w_left @ flat - tgt_l))
    res_r = float(np.linalg.norm(w_right @ flat - tgt_r))
    for name, w in (("left", w_left), ("right", w_right)):
        if np.linalg.cond(w) > 1e8:
            raise ValueError(f"{name} boundary operator not invertible")
    return w_left, w_right, max(res_l, res_r)


def to_dense(a: MPSTensor, n_sites: int) -> np.ndarray:
    """Normalized dense state sum Tr[A^{s_1}..A^{s_N}] |s_1..s_N>.

    Index convention matches the dense boundary solver: little-endian with
    site 1 as the most significant digit is avoided; amplitudes are indexed
    by sum_j s_j d^j with site j in 0..N-1.
    """
    if a.d ** n_sites > DENSE_MAX_DIM:
        raise ValueError("dense chain too large")
    acc = a.data                      # (d^k, D, D), site 0 slowest so far
    for _ in range(n_sites - 1):
        acc = np.einsum("iab,jbc->ijac", acc, a.data).reshape(-1, a.bond, a.bond)
    amps = np.trace(acc, axis1=1, axis2=2)
    # acc index is big-endian in site order (site 0 most significant);
    # convert to the package little-endian convention
    tens = amps.reshape((a.d,) * n_sites)
    amps = np.transpose(tens, list(range(n_sites - 1, -1, -1))).reshape(-1)
    return amps / np.linalg.norm(amps)


def _embed_window(mat: np.ndarray, sites, n_sites: int, local_dim: int,
                  psi: np.ndarray) -> np.ndarray:
    return boundary_mod._site_axes_apply(mat, psi, list(sites), local_dim, n_sites)


def truncated_symmetry_action(a: MPSTensor, generator, theta, lam_sites,
                              psi: np.ndarray, n_sites: int) -> np.ndarray:
    """U^theta restricted to the patch, applied to the dense state."""
    u = expm(1j * theta * np.asarray(generator, dtype=complex))
    out = psi
    for j in lam_sites:
        out = _embed_window(u, (j,), n_sites, a.d, out)
    return out


def verify_boundary_action(a: MPSTensor, generator, theta, n_sites: int,
                           r_inj: int) -> float:
    """||U^theta_Lam |psi> - W_l W_r |psi>|| on a dense PBC chain."""
    v, res = push_through_check(a, generator, theta)
    if v is None:
        raise NotSymmetricError(f"push-through residual {res:.3e}")
    w_left, w_right, _ = boundary_operators(a, v, r_inj)
    psi = to_dense(a, n_sites)
    lam = list(range(1, n_sites - 1))          # patch [1 .. N-2], PBC intact
    target = truncated_symmetry_action(a, generator, theta, lam, psi, n_sites)
    left_sites = lam[:r_inj]
    right_sites = lam[-r_inj:]
    got = _embed_window(w_left, left_sites, n_sites, a.d, psi)
    got = _embed_window(w_right, right_sites, n_sites, a.d, got)
    return float(np.linalg.norm(target - got))


def _boundary_generator_hermitian_feasible(a: MPSTensor, generator,
                                           n_sites: int, r_inj: int) -> bool:
    """Hermitian-feasibility of the truncated generator on a dense chain."""
    gen = np.asarray(generator, dtype=complex)
    psi = to_dense(a, n_sites)
    lam = list(range(1, n_sites - 1))
    target = np.zeros_like(psi)
    for j in lam:
        target = target + _embed_window(gen, (j,), n_sites, a.d, psi)
    width = max(r_inj, 1)
    *_, r_abs = boundary_mod.solve_boundary_dense(
        [target], [psi], n_sites, a.d,
        tuple(lam[:width]), tuple(lam[-width:]), hermitian=True)
    scale = len(lam) * float(np.abs(np.linalg.eigvalsh(gen)).max())
    return r_abs / max(scale, 1e-300) < boundary_mod.ACCEPT


def classify_symmetry_generator(a: MPSTensor, generator,
                                theta_samples=(0.3, 0.7, 1.1),
                                dense_sizes=(6, 8)) -> boundary_mod.TypeLabel:
    """Type of the symmetry generator sum_j L_j as a parent Hamiltonian.

    Never III (injective MPS always admit a boundary action).  Full-rank
    transfer matrix with a non-phase V certifies II; a locally symmetric
    tensor or a Hermitian-feasible dense boundary action gives I; the
    remaining rank-deficient non-Hermitian corner stays indeterminate.
    """
    evidence = []
    notes = []
    nontrivial = []
    for theta in theta_samples:
        v, res = push_through_check(a, generator, theta)
        if v is None:
            raise NotSymmetricError(
                f"state not symmetric at theta={theta}: residual {res:.3e}")
        phase_like = abs(abs(np.trace(v)) / a.bond - 1.0) < 1e-8
        nontrivial.append(not phase_like)
        evidence.append((theta, res, not phase_like))
    full_rank = is_full_rank(a)
    if not any(nontrivial):
        notes.append("tensor locally symmetric: V is a pure phase")
        return boundary_mod.TypeLabel("I", tuple(evidence), tuple(notes))
    if full_rank and all(nontrivial):
        notes.append("transfer matrix full-rank, V nontrivial")
        return boundary_mod.TypeLabel("II", tuple(evidence), tuple(notes))
    r_inj = injectivity_length(a)
    if isinstance(r_inj, NotInjective):
        return boundary_mod.TypeLabel("indeterminate", tuple(evidence),
                                      ("tensor not injective up to bound",))
    feasible = []
    for n_sites in dense_sizes:
        if a.d ** n_sites > DENSE_MAX_DIM:
            continue
        feasible.append(_boundary_generator_hermitian_feasible(
            a, generator, n_sites, r_inj))
    if feasible and all(feasible):
        notes.append("Hermitian boundary action found on dense chains")
        return boundary_mod.TypeLabel("I", tuple(evidence), tuple(notes))
    notes.append("rank-deficient transfer matrix, no Hermitian certificate")
    return boundary_mod.TypeLabel("indeterminate", tuple(evidence), tuple(notes))
