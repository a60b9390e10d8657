"""Rabi-frequency extraction from pulse-duration scans."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares
from scipy.signal import lombscargle

from .dynamics import RabiScan

MIN_POINTS = 8
VARIANCE_FLOOR = 0.01
DECAY_MIN_FLOPS = 0.5
DECAY_DCHI2 = 4.0


@dataclass(frozen=True)
class FitResult:
    omega: float  # Hz
    contrast: float
    decay_time: float | None  # s
    offset: float
    omega_std: float
    converged: bool
    contrast_std: float = 0.0
    reduced_chi2: float = float("nan")

    def __post_init__(self):
        if self.omega < 0 or self.omega_std < 0:
            raise ValueError("omega and omega_std must be >= 0")


def rabi_model(t, omega, contrast, offset, decay_rate=0.0):
    """Transferred fraction offset + C/2 (1 - cos(2 pi omega t) exp(-t/tau))."""
    t = np.asarray(t, dtype=float)
    return offset + 0.5 * contrast * (1 - np.cos(2 * np.pi * omega * t) * np.exp(-decay_rate * t))


def _profile(t, y, w, freqs, contrast, offset):
    """Weighted RSS at each trial frequency with free linear parameters
    solved in closed form."""
    basis = 0.5 * (1 - np.cos(2 * np.pi * np.outer(freqs, t)))  # (F, N)
    if contrast is not None and offset is not None:
        r = y - offset - contrast * basis
        return np.sum(w * r * r, axis=1)
    if contrast is not None:
        r0 = y - contrast * basis
        off = np.sum(w * r0, axis=1) / np.sum(w)
        r = r0 - off[:, None]
        return np.sum(w * r * r, axis=1)
    target = y - (offset if offset is not None else 0.0)
    if offset is not None:
        c = np.sum(w * basis * target, axis=1) / np.maximum(np.sum(w * basis * basis, axis=1), 1e-300)
        r = target - c[:, None] * basis
        return np.sum(w * r * r, axis=1)
    sw, sb, sbb = np.sum(w), np.sum(w * basis, axis=1), np.sum(w * basis * basis, axis=1)
    sy, sby = np.sum(w * y), np.sum(w * basis * y, axis=1)
    det = sw * sbb - sb * sb
    det = np.where(np.abs(det) < 1e-300, 1e-300, det)
    off = (sbb * sy - sb * sby) / det
    c = (sw * sby - sb * sy) / det
    r = y - off[:, None] - c[:, None] * basis
    return np.sum(w * r * r, axis=1)


def _spectral_peak(t, y, span, n) -> float | None:
    freqs = np.linspace(0.5 / span, 0.5 * (n - 1) / span, 8 * n)
    yc = y - np.mean(y)
    if not np.any(yc):
        return None
    power = lombscargle(t, yc, 2 * np.pi * freqs)
    return float(freqs[np.argmax(power)])


def estimate_rabi(
    scan: RabiScan,
    *,
    contrast: float | None = None,
    offset: float | None = None,
    fit_decay: bool | None = None,
) -> FitResult:
    """Weighted least-squares Rabi fit.

    ``contrast`` / ``offset`` fix those parameters when given (useful when the
    scan spans less than a flop). ``fit_decay`` None adds an exponential
    envelope when the data span at least half a flop and the envelope
    lowers chi^2 by more than ``DECAY_DCHI2``.
    """
    t = scan.durations
    n = t.size
    if n < MIN_POINTS:
        raise ValueError(f"need at least {MIN_POINTS} durations, got {n}")
    shots = scan.shots_per_point
    y = scan.transferred_fraction
    k = y * shots
    p_hat = (k + 0.5) / (shots + 1)
    # binomial variance, floored so points at 0 or 1 cannot dominate
    sigma = np.sqrt(np.maximum(p_hat * (1 - p_hat), VARIANCE_FLOOR) / shots)
    w = 1 / sigma**2
    span = float(t.max() - t.min())
    if span <= 0:
        raise ValueError("durations span zero time")

    nyquist = 0.5 * (n - 1) / span
    grid = np.linspace(0.02 / span, max(nyquist, 2.0 / span), 800)
    prof = _profile(t, y, w, grid, contrast, offset)
    starts = [float(grid[np.argmin(prof)])]
    peak = _spectral_peak(t, y, span, n)
    if peak is not None:
        starts.append(peak)

    free_c, free_o = contrast is None, offset is None
    c0 = contrast if not free_c else float(np.clip(np.ptp(y), 0.05, 1.0))
    o0 = offset if not free_o else float(np.clip(np.min(y), 0.0, 1.0))

    def unpack(p, decay):
        it = iter(p)
        om = next(it)
        c = next(it) if free_c else contrast
        o = next(it) if free_o else offset
        g = next(it) if decay else 0.0
        return om, c, o, g

    def residuals(p, decay):
        om, c, o, g = unpack(p, decay)
        return (y - rabi_model(t, om, c, o, g)) * np.sqrt(w)

    def solve(x0, decay):
        lo = [0.0] * len(x0)
        hi = [np.inf] + ([1.0] if free_c else []) + ([1.0] if free_o else []) + ([np.inf] if decay else [])
        x0 = np.clip(x0, lo, hi)
        try:
            return least_squares(residuals, x0, args=(decay,), bounds=(lo, hi), x_scale="jac",
                                 xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=400)
        except ValueError:
            return None

    best = None
    for om0 in starts:
        base = [om0] + ([c0] if free_c else []) + ([o0] if free_o else [])
        if fit_decay is True:
            base.append(0.5 / span)
        res = solve(base, fit_decay is True)
        decay = fit_decay is True
        if res is not None and fit_decay is None and res.x[0] * span >= DECAY_MIN_FLOPS:
            # keep the envelope only when it lowers chi^2 significantly
            alt = solve(list(res.x) + [0.5 / span], True)
            if alt is not None and 2 * (res.cost - alt.cost) > DECAY_DCHI2:
                res, decay = alt, True
        if res is not None and (best is None or res.cost < best[0].cost):
            best = (res, decay)

    if best is None:
        return FitResult(0.0, 0.0, None, float(np.mean(y)), 0.0, False)
    res, decay = best
    om, c, o, g = unpack(res.x, decay)
    dof = max(1, n - res.x.size)
    chi2 = 2 * res.cost / dof
    jac = res.jac
    try:
        cov = np.linalg.inv(jac.T @ jac)
    except np.linalg.LinAlgError:
        cov = np.linalg.pinv(jac.T @ jac)
    cov = cov * max(1.0, chi2)
    om_std = float(math.sqrt(max(cov[0, 0], 0.0)))
    c_std = float(math.sqrt(max(cov[1, 1], 0.0))) if free_c else 0.0

    converged = bool(res.success) and math.isfinite(om_std)
    if free_c and not c > 3 * c_std:
        converged = False
    if free_c and c * shots < 1 and shots < 10**9:
        converged = False
    if not converged and free_c:
        return FitResult(0.0, float(c), None, float(o), 0.0, False, c_std, chi2)
    tau = (float(1 / g) if g > 0 else math.inf) if decay else None
    return FitResult(float(om), float(c), tau, float(o), om_std, converged, c_std, chi2)
