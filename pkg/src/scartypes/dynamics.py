"""Single-particle droplet quench dynamics on the ring.

A W-like droplet of size M inside the vacuum is a k=0 orbital on the first
M sites; under the particle-conserving hopping Hamiltonians it evolves as
a free wavepacket with dispersion eps_q.  Everything here works in
momentum space: occupations via FFT, the droplet-overlap deficit

    Upsilon_G(t,M,N) = (1/MN) sum_q sin^2(qM/2)/sin^2(q/2)
                                 * (1 - e^{i(qG - eps_q t)}),

its thermodynamic-limit integral (composite Gauss-Legendre with the
removable q=0 point evaluated by its limit), closed-form early-time
expansions, leakage profiles, scaling fits and the BEC-style extension to
p-particle droplets.  Sites are labeled 1..N with the droplet on 1..M.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OCCUPATION_TOL = 1e-12


class QuadratureError(RuntimeError):
    def __init__(self, message, achieved):
        super().__init__(message)
        self.achieved = achieved


@dataclass(frozen=True)
class Dispersion:
    """2-pi-periodic single-particle dispersion with eps(0) = 0."""

    kind: str
    w: float = 1.0
    alpha: float = 0.0
    beta: float = 0.0
    table: object = None      # callable q -> eps for kind "custom"

    def eps(self, q):
        q = np.asarray(q, dtype=float)
        if self.kind == "rehop":
            return self.w * (1.0 - np.cos(q))
        if self.kind == "imhop":
            return self.w * np.sin(q)
        if self.kind == "chop":
            return self.w * (self.alpha * (1.0 - np.cos(q)) + self.beta * np.sin(q))
        if self.kind == "custom":
            return np.asarray(self.table(q), dtype=float)
        raise ValueError(f"unknown dispersion kind {self.kind!r}")

    def velocity_scale(self) -> float:
        """Bound on |d eps/dq| used to size quadrature panels."""
        if self.kind == "rehop" or self.kind == "imhop":
            return abs(self.w)
        if self.kind == "chop":
            return abs(self.w) * float(np.hypot(self.alpha, self.beta))
        qs = np.linspace(-np.pi, np.pi, 4097)
        return float(np.abs(np.gradient(self.eps(qs), qs)).max())


def rehop(w: float = 1.0) -> Dispersion:
    return Dispersion("rehop", w)


def imhop(w: float = 1.0) -> Dispersion:
    return Dispersion("imhop", w)


def chop(alpha: float, beta: float, w: float = 1.0) -> Dispersion:
    return Dispersion("chop", w, alpha, beta)


def custom(table) -> Dispersion:
    return Dispersion("custom", 1.0, table=table)


@dataclass(frozen=True)
class DropletRun:
    n_sites: int
    m_size: int
    dispersion: Dispersion
    times: tuple = ()                   # optional evaluation grid
    g_schedule: object = None           # optional t -> integer shift, G(0) = 0

    def __post_init__(self):
        if not 1 <= self.m_size <= self.n_sites:
            raise ValueError("need 1 <= M <= N")
        if self.g_schedule is not None and self.g_schedule(0.0) != 0:
            raise ValueError("G schedule must start at zero shift")

    @property
    def momenta(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_sites) / self.n_sites

    def shift_at(self, t: float) -> float:
        return 0.0 if self.g_schedule is None else self.g_schedule(t)


def fq(m_size: int, n_sites: int, q) -> np.ndarray:
    """Momentum amplitudes of the droplet orbital, exact q=0 limit included."""
    q = np.atleast_1d(np.asarray(q, dtype=float))
    ratio = _dirichlet(q, m_size)
    out = ratio * np.exp(-1j * q * (m_size + 1) / 2.0) / np.sqrt(m_size * n_sites)
    return out if out.size > 1 else out[0]


def _dirichlet(q: np.ndarray, m_size: int) -> np.ndarray:
    """sin(qM/2)/sin(q/2) with the limit M at sin(q/2) -> 0."""
    s = np.sin(q / 2.0)
    small = np.abs(s) < 1e-9
    safe = np.where(small, 1.0, s)
    out = np.sin(q * m_size / 2.0) / safe
    return np.where(small, m_size * np.cos(q * m_size / 2.0) / np.cos(q / 2.0), out)


def orbital_amplitudes(run: DropletRun, t: float) -> np.ndarray:
    """<j|phi(t)> for sites j = 1..N (array index j-1)."""
    qs = run.momenta
    g = fq(run.m_size, run.n_sites, qs) * np.exp(-1j * run.dispersion.eps(qs) * t)
    amps = np.sqrt(run.n_sites) * np.fft.ifft(g)
    return np.roll(amps, -1)        # index 0 <-> site j=1


def occupations(run: DropletRun, t: float) -> np.ndarray:
    """n_j(t) for j = 1..N; sums to 1 by unitarity."""
    return np.abs(orbital_amplitudes(run, t)) ** 2


def upsilon_finite(run: DropletRun, t: float, g_shift: float) -> complex:
    """Overlap deficit Upsilon_G(t, M, N) as the exact momentum sum."""
    qs = run.momenta
    kern = _dirichlet(qs, run.m_size) ** 2
    phases = 1.0 - np.exp(1j * (qs * g_shift - run.dispersion.eps(qs) * t))
    return complex(np.sum(kern * phases) / (run.m_size * run.n_sites))


def upsilon_thermo(dispersion: Dispersion, m_size: int, t: float, g_shift: float,
                   tol: float = 1e-9, max_nodes: int = 2 ** 21) -> complex:
    """Thermodynamic-limit integral of the overlap deficit.

    Composite 16-point Gauss-Legendre on [-pi, pi]; the panel count scales
    with the total phase variation t * max|eps'| + |G| + M and is doubled
    until two refinements agree to ``tol``.
    """
    variation = (abs(t) * dispersion.velocity_scale() + abs(g_shift)
                 + m_size + 16.0)
    panels = max(16, int(variation / 2.0))
    nodes16, weights16 = np.polynomial.legendre.leggauss(16)

    def evaluate(n_panels: int) -> complex:
        edges = np.linspace(-np.pi, np.pi, n_panels + 1)
        mid = (edges[:-1] + edges[1:]) / 2.0
        half = (edges[1:] - edges[:-1]) / 2.0
        qs = (mid[:, None] + half[:, None] * nodes16[None, :]).ravel()
        wts = (half[:, None] * weights16[None, :]).ravel()
        kern = _dirichlet(qs, m_size) ** 2
        integrand = kern * (1.0 - np.exp(1j * (qs * g_shift - dispersion.eps(qs) * t)))
        return complex(np.sum(wts * integrand) / (2.0 * np.pi * m_size))

    prev = evaluate(panels)
    while True:
        panels *= 2
        if panels * 16 > max_nodes:
            raise QuadratureError(
                f"quadrature not converged below {tol:g}", abs(prev))
        cur = evaluate(panels)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur


def early_time(dispersion: Dispersion, m_size: int, t: float) -> complex:
    """Closed-form small-t limit of Upsilon_0(t, M) for the named kinds."""
    if m_size < 2:
        raise ValueError("closed forms assume M >= 2")
    w, wt = dispersion.w, dispersion.w * t
    if dispersion.kind == "rehop":
        return complex(wt ** 2 / (2 * m_size), wt / m_size)
    if dispersion.kind == "imhop":
        return complex(wt ** 2 / (2 * m_size), 0.0)
    if dispersion.kind == "chop":
        a, b = dispersion.alpha, dispersion.beta
        return complex((a * a + b * b) * wt ** 2 / (2 * m_size),
                       a * wt / m_size)
    raise ValueError("early-time forms exist for rehop/imhop/chop only")


def leakage(run: DropletRun, t: float, g_shift: float) -> float:
    """Occupation escaped past |j - center - G| > M/2 (strict), center (M+1)/2."""
    occ = occupations(run, t)
    center = (run.m_size + 1) / 2.0 + g_shift
    n = run.n_sites
    js = np.arange(1, n + 1, dtype=float)
    dist = np.abs((js - center + n / 2.0) % n - n / 2.0)
    return float(occ[dist > run.m_size / 2.0].sum())


def bec_overlap(run: DropletRun, t: float, g_shift: float, p: int) -> complex:
    """p-particle droplet overlap (1 - Upsilon_G)^p in the BEC approximation."""
    if p < 1:
        raise ValueError("p >= 1 required")
    return complex((1.0 - upsilon_finite(run, t, g_shift)) ** p)


def bec_overlap_density(rho: float, upsilon: complex) -> complex:
    """Finite-density form e^{-rho * upsilon} (p = rho M, M -> infinity)."""
    return complex(np.exp(-rho * upsilon))


@dataclass(frozen=True)
class ScalingFit:
    exponent: float
    prefactor: float
    stderr: float
    prefactor_complex: complex | None = None


def scaling_fit(series, window, theory_exponent: float | None = None) -> ScalingFit:
    """Power-law fit of |upsilon(t)| over the time window.

    ``series`` holds (t, upsilon) pairs; the fit is unweighted least
    squares on log|upsilon| vs log t.  When ``theory_exponent`` is given,
    the complex prefactor mean(upsilon / t^theory) is reported as well.
    """
    lo, hi = window
    pts = [(t, u) for t, u in series if lo <= t <= hi and abs(u) > 0]
    if len(pts) < 6:
        raise ValueError(f"need >= 6 points in window, have {len(pts)}")
    ts = np.array([p[0] for p in pts])
    us = np.array([p[1] for p in pts])
    lx, ly = np.log(ts), np.log(np.abs(us))
    coeffs, res, *_ = np.polyfit(lx, ly, 1, full=True)
    slope, intercept = float(coeffs[0]), float(coeffs[1])
    stderr = 0.0
    if len(pts) > 2 and res.size:
        stderr = float(np.sqrt(res[0] / (len(pts) - 2) / np.sum((lx - lx.mean()) ** 2)))
    pref_c = None
    if theory_exponent is not None:
        pref_c = complex(np.mean(us / ts ** theory_exponent))
    return ScalingFit(slope, float(np.exp(intercept)), stderr, pref_c)


def integer_g_times(schedule_rate: float, t_lo: float, t_hi: float,
                    max_points: int = 40) -> np.ndarray:
    """Log-spaced times snapped so that G(t) = rate * t is an integer.

    With rate 0 the grid is just log-spaced.
    """
    raw = np.geomspace(t_lo, t_hi, max_points)
    if schedule_rate == 0.0:
        return raw
    gs = np.unique(np.maximum(1, np.round(raw * schedule_rate)))
    return gs / schedule_rate
