"""Detuning scans, Lorentzian fits, and width/depth extraction.

A scan builds one rate matrix per detuning, evolves the initial state for
the pulse duration, and converts the final population into the readout
fluorescence signal.  Signal dips are characterized either by a
free-baseline Lorentzian least-squares fit or, where the dip shape is
not Lorentzian, by direct numerical width/depth measurement.
"""

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import readout as ro
from .radiation import base_rate
from .rate_engine import (LeakWarning, PopulationState, SpectroscopyScenario,
                          build_rate_matrix, evolve)


class FitError(RuntimeError):
    """Least-squares fit failed (degenerate data or no convergence)."""


@dataclass
class SpectrumRecord:
    """Observables for one laser detuning."""
    detuning: float                 # rad/s from resonance
    fluorescence: float             # readout ground-state probability
    marginal: np.ndarray            # P(n_ip, n_op) after the pulse
    leaked: float
    leak_flag: bool = False


@dataclass
class FitResult:
    """Lorentzian dip parameters: P = baseline - depth * L(detuning)."""
    center: float
    fwhm: float
    depth: float
    baseline: float
    residual_norm: float
    covariance: np.ndarray          # diagonal, order (baseline, depth, center, fwhm)
    iterations: int
    converged: bool


def _solve_one(args):
    (scenario, detuning, tau_spec, pulse, second_pulse, leak_survival,
     method, include_spontaneous) = args
    matrix = build_rate_matrix(scenario, detuning,
                               include_spontaneous=include_spontaneous)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LeakWarning)
        state = evolve(matrix, PopulationState.ground(scenario), tau_spec,
                       method=method)
    if second_pulse is not None:
        signal = ro.two_pulse_fluorescence(state, pulse, second_pulse,
                                           leak_survival)
    else:
        signal = ro.fluorescence_probability(state, pulse, leak_survival)
    return SpectrumRecord(
        detuning=float(detuning), fluorescence=signal,
        marginal=state.motional_marginal(), leaked=state.leaked,
        leak_flag=state.leaked > scenario.leak_warn_fraction)


def readout_spectrum(scenario: SpectroscopyScenario, detunings, tau_spec: float,
                     pulse: Optional[ro.ReadoutPulse] = None,
                     second_pulse: Optional[ro.ReadoutPulse] = None,
                     leak_survival: float = 0.5, method: str = "lsoda",
                     include_spontaneous: bool = True,
                     workers: int = 1) -> list[SpectrumRecord]:
    """Fluorescence signal and motional populations across a detuning grid.

    pulse defaults to a pi-pulse on the out-of-phase red sideband; pass
    second_pulse for the consecutive two-mode readout.  Detunings are
    independent, so workers > 1 distributes them over processes.
    """
    if pulse is None:
        pulse = ro.pi_pulse(scenario.system, (0, -1))
    detunings = np.asarray(detunings, dtype=float)
    scenario.laser_coupling()  # build shared tables once, not per worker
    scenario.d_table()
    jobs = [(scenario, d, tau_spec, pulse, second_pulse, leak_survival,
             method, include_spontaneous) for d in detunings]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_solve_one, jobs, chunksize=4))
    else:
        records = [_solve_one(j) for j in jobs]
    if any(r.leak_flag for r in records):
        worst = max(r.leaked for r in records)
        warnings.warn(f"leaked population reaches {worst:.2%} on the scan",
                      LeakWarning, stacklevel=2)
    return records


def _records_to_xy(records_or_x, y):
    if y is not None:
        return np.asarray(records_or_x, dtype=float), np.asarray(y, dtype=float)
    x = np.array([r.detuning for r in records_or_x])
    y = np.array([r.fluorescence for r in records_or_x])
    return x, y


def _lorentzian_dip(x, params):
    baseline, depth, center, w = params
    return baseline - depth * (w / 2.0) ** 2 / ((x - center) ** 2 + (w / 2.0) ** 2)


def _initial_guess(x, y):
    baseline = float(y.max())
    depth = baseline - float(y.min())
    center = float(x[np.argmin(y)])
    half = baseline - depth / 2.0
    below = np.where(y < half)[0]
    if below.size >= 2:
        w = abs(x[below[-1]] - x[below[0]])
    else:
        w = 4.0 * abs(x[1] - x[0])
    return np.array([baseline, depth, center, max(w, abs(x[1] - x[0]))])


def fit_lorentzian(records_or_x, y=None, p0=None, max_iter: int = 200) -> FitResult:
    """Fit a free-baseline Lorentzian dip by Levenberg-Marquardt.

    Accepts a list of SpectrumRecord or explicit (x, y) arrays.  The
    Jacobian is finite-difference; damping starts at 1e-3, grows x10 on a
    rejected step and shrinks /10 on an accepted one.  p0 overrides the
    data-driven initial guess (baseline, depth, center, fwhm).
    """
    x, yv = _records_to_xy(records_or_x, y)
    if x.size < 8:
        raise FitError("need at least 8 points spanning the dip")
    if np.ptp(yv) == 0.0:
        raise FitError("flat data cannot constrain a Lorentzian dip")
    params = _initial_guess(x, yv) if p0 is None else np.asarray(p0, dtype=float).copy()
    scale = np.maximum(np.abs(params), [1e-3, 1e-3, abs(x).max() * 1e-6, abs(x).max() * 1e-6])

    def cost(p):
        r = _lorentzian_dip(x, p) - yv
        return r, float(r @ r)

    resid, chi2 = cost(params)
    lam = 1e-3
    n_iter = 0
    converged = False
    jac = np.empty((x.size, 4))
    for n_iter in range(1, max_iter + 1):
        for k in range(4):
            h = 1e-7 * scale[k]
            probe = params.copy()
            probe[k] += h
            jac[:, k] = (_lorentzian_dip(x, probe) - (resid + yv)) / h
        jtj = jac.T @ jac
        g = jac.T @ resid
        accepted = False
        for _ in range(40):
            try:
                step = np.linalg.solve(jtj + lam * np.diag(np.diag(jtj)), -g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            trial = params + step
            r_new, chi2_new = cost(trial)
            if chi2_new < chi2:
                params, resid, chi2 = trial, r_new, chi2_new
                lam = max(lam / 10.0, 1e-14)
                accepted = True
                break
            lam *= 10.0
        if not accepted:
            converged = True
            break
        if np.all(np.abs(step) <= 1e-12 * np.maximum(np.abs(params), scale)):
            converged = True
            break
    if not converged:
        raise FitError(f"no convergence after {max_iter} iterations")
    baseline, depth, center, w = params
    w = abs(w)
    dof = max(x.size - 4, 1)
    try:
        cov = np.linalg.inv(jac.T @ jac) * (chi2 / dof)
        cov_diag = np.diag(cov).copy()
    except np.linalg.LinAlgError:  # pragma: no cover - degenerate geometry
        cov_diag = np.full(4, np.nan)
    return FitResult(center=float(center), fwhm=float(w), depth=float(depth),
                     baseline=float(baseline), residual_norm=float(np.sqrt(chi2)),
                     covariance=cov_diag, iterations=n_iter, converged=True)


def numeric_fwhm_depth(records_or_x, y=None) -> tuple[float, float]:
    """Graphical width and depth of a dip, with no shape assumption.

    Baseline is the median of the outer 10% of points; depth is baseline
    minus the minimum; the FWHM comes from linear interpolation of the
    half-depth crossings on either side of the minimum.
    """
    x, yv = _records_to_xy(records_or_x, y)
    if x.size < 8:
        raise ValueError("need at least 8 points to measure a dip")
    edge = max(int(round(0.05 * x.size)), 1)
    baseline = float(np.median(np.concatenate([yv[:edge], yv[-edge:]])))
    i_min = int(np.argmin(yv))
    depth = baseline - float(yv[i_min])
    if depth <= 0:
        raise ValueError("no dip below the baseline")
    half = baseline - depth / 2.0

    def crossing(idx_range):
        prev = i_min
        for i in idx_range:
            if yv[i] >= half:
                # linear interpolation between grid neighbours
                frac = (half - yv[prev]) / (yv[i] - yv[prev])
                return x[prev] + frac * (x[i] - x[prev])
            prev = i
        raise ValueError("half-depth crossing outside the grid; widen the scan")

    left = crossing(range(i_min - 1, -1, -1))
    right = crossing(range(i_min + 1, x.size))
    return float(abs(right - left)), float(depth)


@dataclass
class WidthDepthPoint:
    """One (scaled time, width, depth) sample of a signal-evolution curve."""
    label: str
    tau_scaled: float
    tau_spec: float
    fwhm: float
    depth: float
    max_leaked: float
    flagged: bool


def width_depth_curves(scenarios: Sequence[tuple[str, SpectroscopyScenario]],
                       tau_scaled_values, detunings,
                       fit: str = "lorentzian",
                       pulse: Optional[ro.ReadoutPulse] = None,
                       second_pulse: Optional[ro.ReadoutPulse] = None,
                       leak_survival: float = 0.5, method: str = "lsoda",
                       workers: int = 1) -> list[WidthDepthPoint]:
    """Signal FWHM and depth versus scaled time for several scenarios.

    Each (label, scenario) pair is scanned at every requested scaled
    time; pulse durations are converted through the scenario's resonant
    absorption rate.  Points whose scans breach the leak threshold are
    flagged rather than dropped.
    """
    if fit not in ("lorentzian", "numeric"):
        raise ValueError("fit must be 'lorentzian' or 'numeric'")
    rows = []
    for label, scenario in scenarios:
        r_res = base_rate(scenario.laser, scenario.line, 0.0, "absorption")
        for ts in np.asarray(tau_scaled_values, dtype=float):
            tau_spec = ts / r_res
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", LeakWarning)
                records = readout_spectrum(scenario, detunings, tau_spec,
                                           pulse=pulse, second_pulse=second_pulse,
                                           leak_survival=leak_survival,
                                           method=method, workers=workers)
            if fit == "lorentzian":
                res = fit_lorentzian(records)
                fwhm, depth = res.fwhm, res.depth
            else:
                fwhm, depth = numeric_fwhm_depth(records)
            max_leak = max(r.leaked for r in records)
            rows.append(WidthDepthPoint(
                label=label, tau_scaled=float(ts), tau_spec=float(tau_spec),
                fwhm=float(fwhm), depth=float(depth), max_leaked=max_leak,
                flagged=max_leak > scenario.leak_warn_fraction))
    return rows
