"""Rate-equation engine for the driven two-ion motional state grid.

The population over (target internal state) x (n_ip, n_op) obeys linear
rate equations: absorption and stimulated emission proportional to the
laser-sideband couplings |xi|^2, spontaneous emission weighted by the
solid-angle-averaged coefficients D, and a uniform upward heating ladder
per mode.  The grid is truncated; any transition leaving it feeds an
absorbing leak accumulator so probability stays exactly conserved.
"""

import warnings
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .coupling import xi_mode_table
from .ion_mechanics import BeamGeometry, TwoIonSystem, lamb_dicke
from .radiation import (EmissionPattern, LaserField, TransitionLine,
                        base_rate, emission_coefficients)


class LeakWarning(UserWarning):
    """Population outside the truncated motional basis crossed the threshold."""


@dataclass
class SpectroscopyScenario:
    """Everything needed to simulate one spectroscopy configuration.

    Grid bounds are inclusive maxima (n = 0..n_max); sideband orders are
    truncated at +-s_ip_max / +-s_op_max.  heat_ip / heat_op are the
    per-mode trap heating rates in 1/s.  Derived coupling and emission
    tables are cached after first use and shared read-only.
    """
    system: TwoIonSystem
    line: TransitionLine
    laser: LaserField
    beam: BeamGeometry
    pattern: EmissionPattern
    n_ip_max: int = 19
    n_op_max: int = 19
    s_ip_max: int = 5
    s_op_max: int = 6
    heat_ip: float = 0.0
    heat_op: float = 0.0
    leak_warn_fraction: float = 0.01
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n_ip_max < 1 or self.n_op_max < 1:
            raise ValueError("grid bounds must be >= 1")
        if self.s_ip_max < 1 or self.s_op_max < 1:
            raise ValueError("sideband truncations must be >= 1")
        if self.heat_ip < 0 or self.heat_op < 0:
            raise ValueError("heating rates must be >= 0")

    # -- index bookkeeping ---------------------------------------------------
    @property
    def grid_shape(self) -> tuple[int, int]:
        return (self.n_ip_max + 1, self.n_op_max + 1)

    @property
    def n_motional(self) -> int:
        return (self.n_ip_max + 1) * (self.n_op_max + 1)

    @property
    def n_states(self) -> int:
        """2 internal states x motional grid + 1 leak row."""
        return 2 * self.n_motional + 1

    @property
    def leak_index(self) -> int:
        return 2 * self.n_motional

    def state_index(self, internal: int, n_ip: int, n_op: int) -> int:
        return internal * self.n_motional + n_ip * (self.n_op_max + 1) + n_op

    # -- cached tables ---------------------------------------------------------
    def laser_eta(self) -> tuple[float, float]:
        """Target Lamb-Dicke parameters for the spectroscopy beam."""
        return lamb_dicke(self.system, self.beam, "target")

    def laser_coupling(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-mode |xi|^2 tables (ip, op) for the spectroscopy beam."""
        if "xi2" not in self._cache:
            eta_ip, eta_op = self.laser_eta()
            self._cache["xi2"] = (
                xi_mode_table(eta_ip, self.n_ip_max, self.s_ip_max) ** 2,
                xi_mode_table(eta_op, self.n_op_max, self.s_op_max) ** 2,
            )
        return self._cache["xi2"]

    def d_table(self) -> np.ndarray:
        """Spontaneous-emission coefficients D on the scenario grid."""
        if "d" not in self._cache:
            self._cache["d"] = emission_coefficients(
                self.pattern, self.line, self.system,
                n_max=(self.n_ip_max, self.n_op_max),
                s_max=(self.s_ip_max, self.s_op_max))
        return self._cache["d"]

    def with_laser(self, **kw) -> "SpectroscopyScenario":
        """Copy of this scenario with laser fields replaced (tables kept)."""
        new = replace(self, laser=replace(self.laser, **kw))
        new._cache = self._cache  # coupling tables do not depend on the laser
        return new


@dataclass
class PopulationState:
    """Probabilities over internal x motional grid plus the leak accumulator.

    p has shape (2, n_ip_max+1, n_op_max+1) with p[0] the target ground
    state and p[1] the excited state.
    """
    p: np.ndarray
    leaked: float = 0.0

    @classmethod
    def ground(cls, scenario: SpectroscopyScenario) -> "PopulationState":
        """Everything in |g_t> with both modes in the motional ground state."""
        p = np.zeros((2,) + scenario.grid_shape)
        p[0, 0, 0] = 1.0
        return cls(p=p)

    @classmethod
    def from_vector(cls, vec: np.ndarray, grid_shape: tuple[int, int]) -> "PopulationState":
        n = 2 * grid_shape[0] * grid_shape[1]
        return cls(p=vec[:n].reshape((2,) + grid_shape).copy(), leaked=float(vec[n]))

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.p.ravel(), [self.leaked]])

    def total(self) -> float:
        return float(self.p.sum() + self.leaked)

    def motional_marginal(self) -> np.ndarray:
        """P(n_ip, n_op) summed over the internal state (in-grid part)."""
        return self.p.sum(axis=0)

    def validate(self, atol: float = 1e-7) -> None:
        if self.p.min() < -1e-10 or self.leaked < -1e-10:
            raise ValueError(f"negative population {min(self.p.min(), self.leaked):.2e}")
        if abs(self.total() - 1.0) > atol:
            raise ValueError(f"population not normalized: total = {self.total()!r}")


@dataclass
class RateMatrix:
    """Sparse generator G of dP/dt = G P for one laser detuning.

    Column sums vanish (the leak row absorbs anything leaving the grid),
    so total probability is conserved exactly.
    """
    generator: sp.csc_matrix
    detuning: float
    grid_shape: tuple[int, int]
    leak_warn_fraction: float = 0.01
    _dense: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    @property
    def n_states(self) -> int:
        return self.generator.shape[0]

    @property
    def leak_index(self) -> int:
        return 2 * self.grid_shape[0] * self.grid_shape[1]

    def dense(self) -> np.ndarray:
        if self._dense is None:
            self._dense = self.generator.toarray()
        return self._dense


def _transition_kernel(scenario: SpectroscopyScenario, weights: np.ndarray,
                       src_block: int, dest_block: int) -> sp.csc_matrix:
    """Unit-rate kernel for one transition family on the motional grid.

    weights[n_ip, n_op, s_ip_max+u_ip, s_op_max+u_op] is the relative rate
    for the motional jump n -> n+u while the internal state goes
    src_block -> dest_block.  Jumps leaving the grid route to the leak
    row; the diagonal balances every column to zero.
    """
    n_ip = scenario.n_ip_max + 1
    n_op = scenario.n_op_max + 1
    n_mot = n_ip * n_op
    leak = scenario.leak_index

    nip = np.arange(n_ip)[:, None, None, None]
    nop = np.arange(n_op)[None, :, None, None]
    uip = np.arange(-scenario.s_ip_max, scenario.s_ip_max + 1)[None, None, :, None]
    uop = np.arange(-scenario.s_op_max, scenario.s_op_max + 1)[None, None, None, :]
    mip = nip + uip
    mop = nop + uop
    # weights are exactly zero below the grid; mask anyway to keep indices legal
    valid = (mip >= 0) & (mop >= 0)
    in_grid = valid & (mip <= scenario.n_ip_max) & (mop <= scenario.n_op_max)

    src = np.broadcast_to((nip * n_op + nop), weights.shape) + src_block * n_mot
    dest = np.where(in_grid, mip * n_op + mop + dest_block * n_mot, leak)

    active = valid & (weights != 0.0)
    rows = dest[active]
    cols = src[active]
    data = weights[active]
    # diagonal: minus the total outgoing rate of each source column
    out_rate = np.where(active, weights, 0.0).sum(axis=(2, 3)).ravel()
    diag_idx = np.arange(n_mot) + src_block * n_mot
    rows = np.concatenate([rows, diag_idx])
    cols = np.concatenate([cols, diag_idx])
    data = np.concatenate([data, -out_rate])
    n = scenario.n_states
    return sp.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsc()


def _heating_kernel(scenario: SpectroscopyScenario) -> sp.csc_matrix:
    """Uniform upward ladder at heat_ip / heat_op for both internal states."""
    n_ip = scenario.n_ip_max + 1
    n_op = scenario.n_op_max + 1
    n_mot = n_ip * n_op
    leak = scenario.leak_index
    rows, cols, data = [], [], []
    for block in (0, 1):
        for i in range(n_ip):
            for j in range(n_op):
                src = block * n_mot + i * n_op + j
                for rate, di, dj in ((scenario.heat_ip, 1, 0), (scenario.heat_op, 0, 1)):
                    if rate == 0.0:
                        continue
                    ii, jj = i + di, j + dj
                    dest = (block * n_mot + ii * n_op + jj
                            if ii < n_ip and jj < n_op else leak)
                    rows += [dest, src]
                    cols += [src, src]
                    data += [rate, -rate]
    n = scenario.n_states
    return sp.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsc()


def _scenario_kernels(scenario: SpectroscopyScenario):
    """Detuning-independent pieces of the generator, cached on the scenario."""
    if "kernels" not in scenario._cache:
        x_ip, x_op = scenario.laser_coupling()
        xi2 = np.einsum("au,bv->abuv", x_ip, x_op)
        k_abs = _transition_kernel(scenario, xi2, src_block=0, dest_block=1)
        k_stim = _transition_kernel(scenario, xi2, src_block=1, dest_block=0)
        k_spon = _transition_kernel(scenario, scenario.d_table(),
                                    src_block=1, dest_block=0)
        k_heat = _heating_kernel(scenario)
        scenario._cache["kernels"] = (k_abs, k_stim, k_spon, k_heat)
    return scenario._cache["kernels"]


def build_rate_matrix(scenario: SpectroscopyScenario, detuning: float,
                      include_spontaneous: bool = True) -> RateMatrix:
    """Assemble the linear rate generator at one laser detuning (rad/s).

    Absorption g,(n) -> e,(n+s) at R_abs,0(detuning) |xi(n,s)|^2;
    stimulated emission e,(n) -> g,(n+s) at R_stim,0 |xi|^2 (the same
    table by the n_< / n_> symmetry); spontaneous emission at Gamma_t D;
    heating as an upward ladder.  Off-grid destinations feed the leak row.
    """
    k_abs, k_stim, k_spon, k_heat = _scenario_kernels(scenario)
    r_abs = base_rate(scenario.laser, scenario.line, detuning, "absorption")
    r_stim = base_rate(scenario.laser, scenario.line, detuning, "stimulated")
    gen = r_abs * k_abs + r_stim * k_stim + k_heat
    if include_spontaneous:
        gen = gen + scenario.line.gamma_t * k_spon
    return RateMatrix(generator=gen.tocsc(), detuning=detuning,
                      grid_shape=scenario.grid_shape,
                      leak_warn_fraction=scenario.leak_warn_fraction)


# ---------------------------------------------------------------------------
# time evolution
# ---------------------------------------------------------------------------

def _integrate(matrix: RateMatrix, p0: np.ndarray, times: np.ndarray,
               method: str, rtol: float, atol: float) -> np.ndarray:
    """Propagate p0 to each requested time; returns (n_states, len(times))."""
    t_end = float(times[-1])
    if t_end == 0.0:
        return np.repeat(p0[:, None], len(times), axis=1)
    if method == "expm":
        dense = matrix.dense()
        out = np.empty((p0.size, len(times)))
        for k, t in enumerate(times):
            out[:, k] = expm(dense * float(t)) @ p0
        return out
    gen = matrix.generator
    if method == "lsoda":
        sol = solve_ivp(lambda t, p: gen @ p, (0.0, t_end), p0, method="LSODA",
                        jac=lambda t, p: matrix.dense(), rtol=rtol, atol=atol,
                        t_eval=times)
    elif method == "bdf":
        sol = solve_ivp(lambda t, p: gen @ p, (0.0, t_end), p0, method="BDF",
                        jac=gen, rtol=rtol, atol=atol, t_eval=times)
    else:
        raise ValueError(f"unknown integration method {method!r}")
    if not sol.success:  # pragma: no cover - scipy failure path
        raise RuntimeError(f"integration failed: {sol.message}")
    return sol.y


def _check_and_wrap(matrix: RateMatrix, vec: np.ndarray) -> PopulationState:
    if vec.min() < -1e-10:
        raise RuntimeError(f"integration produced negative population {vec.min():.2e}")
    vec = np.clip(vec, 0.0, None)
    state = PopulationState.from_vector(vec, matrix.grid_shape)
    if state.leaked > matrix.leak_warn_fraction:
        warnings.warn(
            f"population outside the motional grid is {state.leaked:.2%} "
            f"(threshold {matrix.leak_warn_fraction:.2%})", LeakWarning,
            stacklevel=3)
    return state


def evolve(matrix: RateMatrix, initial: PopulationState, duration: float,
           method: str = "lsoda", rtol: float = 1e-9,
           atol: float = 1e-12) -> PopulationState:
    """Evolve a population for `duration` seconds under a fixed generator.

    method "lsoda" (default) and "bdf" are adaptive stiff integrators;
    "expm" evaluates the dense matrix exponential (exact up to roundoff,
    intended for cross-checks and small grids).  A LeakWarning is raised
    when the leaked probability exceeds the configured threshold.
    """
    if duration < 0:
        raise ValueError("duration must be >= 0")
    initial.validate()
    y = _integrate(matrix, initial.to_vector(), np.array([duration]),
                   method, rtol, atol)
    return _check_and_wrap(matrix, y[:, -1])


def evolve_series(matrix: RateMatrix, initial: PopulationState, times,
                  method: str = "lsoda", rtol: float = 1e-9,
                  atol: float = 1e-12) -> list[PopulationState]:
    """Evolve and sample the population at each time in an increasing list."""
    times = np.asarray(times, dtype=float)
    if times.size == 0 or np.any(np.diff(times) <= 0) or times[0] < 0:
        raise ValueError("times must be strictly increasing and >= 0")
    initial.validate()
    # solve_ivp cannot start and end at 0; prepend/strip if needed
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LeakWarning)
        y = _integrate(matrix, initial.to_vector(), times, method, rtol, atol)
        states = [_check_and_wrap(matrix, y[:, k]) for k in range(times.size)]
    if states and states[-1].leaked > matrix.leak_warn_fraction:
        warnings.warn(
            f"population outside the motional grid reaches {states[-1].leaked:.2%}",
            LeakWarning, stacklevel=2)
    return states


def scaled_time(tau_spec: float, scenario: SpectroscopyScenario) -> float:
    """Dimensionless pulse time: tau_spec times the resonant absorption rate.

    Roughly the number of photons scattered during the pulse; spectra at
    equal scaled time nearly coincide when heating is negligible.
    """
    r_res = base_rate(scenario.laser, scenario.line, 0.0, "absorption")
    return float(tau_spec * r_res)
