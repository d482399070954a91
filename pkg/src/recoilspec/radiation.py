"""Light-field machinery: lineshapes, rates, and emission-recoil tables.

Covers the spectral overlap of a laser line with the target transition
(effective spectral energy density), the absorption / stimulated-emission
base rates and saturation intensities derived from it, angular emission
patterns for spontaneous decay, and the solid-angle-averaged recoil
coefficients D that weight spontaneous emission on each motional sideband.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad

from .constants import C, HBAR
from .coupling import xi_mode_table
from .ion_mechanics import TwoIonSystem

# width ratio below which the narrow lineshape is treated as a delta
_NARROW_RATIO = 1e-4


class QuadratureError(RuntimeError):
    """A numerical integral failed its refinement convergence check."""


@dataclass(frozen=True)
class TransitionLine:
    """Target transition: center, natural width, level-structure scales.

    gamma_t is the natural FWHM decay rate (rad/s).  The scales are the
    squared Clebsch-Gordan / sub-level-averaging factors multiplying the
    two-level absorption and stimulated-emission base rates; they stay
    attached to the line rather than being folded into the saturation
    intensity formulas.
    """
    omega_t: float
    gamma_t: float
    absorption_scale: float = 1.0
    stimulated_scale: float = 1.0

    def __post_init__(self):
        if self.omega_t <= 0:
            raise ValueError("transition frequency must be positive")
        if self.gamma_t <= 0:
            raise ValueError("natural linewidth must be positive")
        for name in ("absorption_scale", "stimulated_scale"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1], got {v}")

    @classmethod
    def from_wavelength(cls, wavelength: float, gamma_t: float, **kw):
        return cls(omega_t=2.0 * np.pi * C / wavelength, gamma_t=gamma_t, **kw)

    @property
    def wavelength(self) -> float:
        return 2.0 * np.pi * C / self.omega_t


@dataclass(frozen=True)
class LaserField:
    """Spectroscopy light field.

    fwhm is the spectral FWHM Gamma_L = sqrt(8 ln 2) * sigma_L in rad/s;
    zero selects the delta-line (monochromatic) limit.  omega_L is the
    absolute line center; it may stay None when only detunings matter.
    """
    intensity: float            # W/m^2
    fwhm: float = 0.0           # rad/s
    shape: str = "delta"        # "gaussian" | "delta"
    omega_L: Optional[float] = None

    def __post_init__(self):
        if self.intensity < 0:
            raise ValueError("intensity must be >= 0")
        if self.fwhm < 0:
            raise ValueError("laser fwhm must be >= 0")
        if self.shape not in ("gaussian", "delta"):
            raise ValueError(f"unknown laser shape {self.shape!r}")
        if self.shape == "gaussian" and self.fwhm == 0.0:
            raise ValueError("gaussian laser needs fwhm > 0")
        if self.shape == "delta" and self.fwhm != 0.0:
            raise ValueError("delta laser must have fwhm = 0")

    @property
    def sigma(self) -> float:
        """Gaussian standard deviation sigma_L in rad/s."""
        return self.fwhm / np.sqrt(8.0 * np.log(2.0))


# ---------------------------------------------------------------------------
# lineshapes and spectral overlap
# ---------------------------------------------------------------------------

def lineshape_value(kind: str, omega: float, center: float, width: float):
    """Normalized spectral density (1/(rad/s)) at omega.

    kind "lorentzian": width is the FWHM decay rate Gamma.
    kind "gaussian":   width is the standard deviation sigma.
    """
    if width <= 0:
        raise ValueError("lineshape width must be positive")
    delta = np.asarray(omega, dtype=float) - center
    if kind == "lorentzian":
        val = (width / (2.0 * np.pi)) / (delta**2 + width**2 / 4.0)
    elif kind == "gaussian":
        val = np.exp(-delta**2 / (2.0 * width**2)) / (np.sqrt(2.0 * np.pi) * width)
    else:
        raise ValueError(f"unknown lineshape kind {kind!r}")
    return float(val) if np.isscalar(omega) else val


def _overlap_integral(gamma_t: float, sigma_L: float, detuning: float) -> float:
    """Integral of Lorentzian(Gamma_t) x Gaussian(sigma_L) line densities.

    The laser center sits at `detuning` from the transition.  Adaptive
    quadrature over +-8 combined widths around the two centers, with
    panel breakpoints laid out at octave multiples of each feature's own
    width so a spike much narrower than the window cannot slip between
    quadrature nodes.
    """
    span = 8.0 * (gamma_t + np.sqrt(8.0 * np.log(2.0)) * sigma_L)
    lo = min(0.0, detuning) - span
    hi = max(0.0, detuning) + span

    def integrand(u):
        lor = (gamma_t / (2.0 * np.pi)) / (u**2 + gamma_t**2 / 4.0)
        gau = np.exp(-(u - detuning)**2 / (2.0 * sigma_L**2)) / (np.sqrt(2.0 * np.pi) * sigma_L)
        return lor * gau

    interior = set()
    for center, width in ((0.0, gamma_t), (detuning, sigma_L)):
        interior.add(center)
        step = width / 2.0
        while step < hi - lo:
            interior.update((center - step, center + step))
            step *= 2.0
    points = sorted(p for p in interior if lo < p < hi)
    val, _ = quad(integrand, lo, hi, points=points, epsabs=0.0,
                  epsrel=1e-11, limit=max(400, 4 * len(points)))
    return val


def effective_spectral_density(laser: LaserField, line: TransitionLine,
                               detuning: float = 0.0) -> float:
    """Spectral energy density (J s / m^3) the transition sees.

    (3 I_L / c) times the overlap of the transition Lorentzian with the
    laser line, for a laser centered `detuning` rad/s from resonance.
    Narrow/broad limits replace the overlap by the broad shape evaluated
    at the narrow line's center; the general case is a numerical
    Lorentzian x Gaussian convolution.
    """
    gamma_t = line.gamma_t
    sigma = laser.sigma
    if laser.shape == "delta" or sigma == 0.0:
        overlap = lineshape_value("lorentzian", detuning, 0.0, gamma_t)
    elif gamma_t < _NARROW_RATIO * laser.fwhm:
        overlap = lineshape_value("gaussian", detuning, 0.0, sigma)
    elif laser.fwhm < _NARROW_RATIO * gamma_t:
        overlap = lineshape_value("lorentzian", detuning, 0.0, gamma_t)
    else:
        overlap = _overlap_integral(gamma_t, sigma, detuning)
    return 3.0 * laser.intensity / C * overlap


def saturation_intensity(line: TransitionLine, regime: str = "transition",
                         sigma_L: float = 0.0) -> float:
    """Two-level saturation intensity in W/m^2 (no level-structure scales).

    regime "transition" (narrow laser): hbar w_t^3 Gamma_t / (6 pi c^2).
    regime "laser" (broad Gaussian laser of width sigma_L):
    sqrt(2) hbar w_t^3 sigma_L / (3 pi^(3/2) c^2).
    """
    w3 = line.omega_t**3
    if regime == "transition":
        return HBAR * w3 * line.gamma_t / (6.0 * np.pi * C**2)
    if regime == "laser":
        if sigma_L <= 0:
            raise ValueError("laser-regime saturation intensity needs sigma_L > 0")
        return np.sqrt(2.0) * HBAR * w3 * sigma_L / (3.0 * np.pi**1.5 * C**2)
    raise ValueError(f"regime must be 'transition' or 'laser', got {regime!r}")


def effective_saturation_intensity(line: TransitionLine,
                                   regime: str = "transition",
                                   sigma_L: float = 0.0) -> float:
    """Saturation intensity including the level-structure absorption scale.

    This is the quantity laser intensities are usually quoted against:
    the intensity at which the actual resonant absorption rate (with its
    Clebsch-Gordan scaling) equals Gamma_t.
    """
    return saturation_intensity(line, regime, sigma_L) / line.absorption_scale


def base_rate(laser: LaserField, line: TransitionLine, detuning: float,
              channel: str = "absorption") -> float:
    """Absorption or stimulated-emission base rate (1/s) at one detuning.

    R = B * rho_eff(detuning) * channel_scale with B = pi^2 c^3 Gamma_t /
    (hbar w_t^3); multiply by |xi|^2 per sideband to get transition rates.
    On resonance this equals Gamma_t * (I_L / I_sat) * channel_scale with
    the unscaled two-level I_sat.
    """
    if channel == "absorption":
        scale = line.absorption_scale
    elif channel == "stimulated":
        scale = line.stimulated_scale
    else:
        raise ValueError(f"channel must be 'absorption' or 'stimulated', got {channel!r}")
    b_coef = np.pi**2 * C**3 * line.gamma_t / (HBAR * line.omega_t**3)
    return b_coef * effective_spectral_density(laser, line, detuning) * scale


# ---------------------------------------------------------------------------
# spontaneous-emission geometry
# ---------------------------------------------------------------------------

def _weight_pi(theta, phi):
    """Dipole pattern of a pi transition with quantization axis along y."""
    s2 = np.sin(theta)**2 * np.sin(phi)**2
    return 3.0 / (8.0 * np.pi) * (1.0 - s2)


def _weight_sigma(theta, phi):
    s2 = np.sin(theta)**2 * np.sin(phi)**2
    return 3.0 / (16.0 * np.pi) * (1.0 + s2)


def _weight_mg_mixed(theta, phi):
    return (2.0 / 3.0) * _weight_pi(theta, phi) + (1.0 / 3.0) * _weight_sigma(theta, phi)


def _weight_isotropic(theta, phi):
    return np.full_like(np.broadcast_to(np.asarray(phi, dtype=float),
                                        np.broadcast_shapes(np.shape(theta), np.shape(phi))),
                        1.0 / (4.0 * np.pi))


_PATTERNS: dict[str, Callable] = {
    "mg_mixed": _weight_mg_mixed,
    "isotropic": _weight_isotropic,
    "pi": _weight_pi,
    "sigma": _weight_sigma,
}


@dataclass(frozen=True)
class EmissionPattern:
    """Angular probability density W(theta, phi) of spontaneous photons.

    Named kinds are looked up in a module registry (and pickle cleanly);
    kind "custom" carries its own weight function, which must integrate
    to 1 over the sphere.
    """
    kind: str = "isotropic"
    weight_fn: Optional[Callable] = None

    def __post_init__(self):
        if self.kind == "custom":
            if self.weight_fn is None:
                raise ValueError("custom pattern needs a weight function")
        elif self.kind not in _PATTERNS:
            raise ValueError(f"unknown emission pattern {self.kind!r}")

    def weight(self, theta, phi):
        fn = self.weight_fn if self.kind == "custom" else _PATTERNS[self.kind]
        return fn(theta, phi)


def emission_weight(pattern: EmissionPattern, theta, phi):
    """W(theta, phi) in 1/steradian."""
    return pattern.weight(theta, phi)


def solid_angle_norm(pattern: EmissionPattern, n_theta: int = 64,
                     n_phi: int = 128) -> float:
    """Integral of W over the sphere (should be 1)."""
    nodes, wts = np.polynomial.legendre.leggauss(n_theta)
    phi = np.arange(n_phi) * 2.0 * np.pi / n_phi
    total = 0.0
    for c, w in zip(nodes, wts):
        theta = np.arccos(c)
        total += w * pattern.weight(theta, phi).sum() * (2.0 * np.pi / n_phi)
    return float(total)


def _spontaneous_eta_z(line: TransitionLine, system: TwoIonSystem) -> tuple[float, float]:
    """Target Lamb-Dicke parameters for a photon emitted straight along z."""
    k = line.omega_t / C
    eta_ip = k * abs(system.b_ip_t) * np.sqrt(HBAR / (2.0 * system.target.mass * system.omega_ip))
    eta_op = k * abs(system.b_op_t) * np.sqrt(HBAR / (2.0 * system.target.mass * system.omega_op))
    return float(eta_ip), float(eta_op)


def _d_table_once(pattern, eta_ip_z, eta_op_z, n_ip_max, n_op_max,
                  s_ip_max, s_op_max, n_theta, n_phi):
    nodes, wts = np.polynomial.legendre.leggauss(n_theta)
    phi = np.arange(n_phi) * 2.0 * np.pi / n_phi
    dphi = 2.0 * np.pi / n_phi
    # per-node axial recoil: eta(theta) = eta_z * cos(theta)
    t_ip = xi_mode_table(eta_ip_z * nodes, n_ip_max, s_ip_max) ** 2
    t_op = xi_mode_table(eta_op_z * nodes, n_op_max, s_op_max) ** 2
    w_phi = np.array([pattern.weight(np.arccos(c), phi).sum() * dphi for c in nodes])
    return np.einsum("k,kau,kbv->abuv", wts * w_phi, t_ip, t_op)


def emission_coefficients(pattern: EmissionPattern, line: TransitionLine,
                          system: TwoIonSystem,
                          n_max: tuple[int, int] = (19, 19),
                          s_max: tuple[int, int] = (5, 6),
                          n_theta: int = 32, n_phi: int = 64,
                          rtol: float = 1e-6) -> np.ndarray:
    """Sideband emission coefficients D on a motional grid.

    D[n_ip, n_op, s_ip_max + s_ip, s_op_max + s_op] is the probability
    that a spontaneously emitted photon changes the motional state from
    (n_ip, n_op) to (n_ip + s_ip, n_op + s_op): the solid-angle average
    of |xi|^2 over the emission pattern, with the axial recoil scaling
    as cos(theta).  Summed over an unbounded sideband range every row
    would add to 1.

    Quadrature is Gauss-Legendre in cos(theta) times a uniform grid in
    phi; one refinement doubling serves as the convergence check.
    """
    coarse = _d_table_once(pattern, *_spontaneous_eta_z(line, system),
                           n_max[0], n_max[1], s_max[0], s_max[1],
                           n_theta, n_phi)
    fine = _d_table_once(pattern, *_spontaneous_eta_z(line, system),
                         n_max[0], n_max[1], s_max[0], s_max[1],
                         2 * n_theta, 2 * n_phi)
    err = np.max(np.abs(fine - coarse))
    if err > rtol:
        raise QuadratureError(
            f"emission-coefficient quadrature changed by {err:.2e} on refinement "
            f"(tolerance {rtol:.0e}); raise n_theta/n_phi")
    return fine


def write_d_table_csv(d_table: np.ndarray, fh) -> None:
    """Dump a D table as CSV rows (n_ip, n_op, s_ip, s_op, D)."""
    n_ip, n_op, u_ip, u_op = d_table.shape
    s_ip_max, s_op_max = (u_ip - 1) // 2, (u_op - 1) // 2
    fh.write("n_ip,n_op,s_ip,s_op,D\n")
    for a in range(n_ip):
        for b in range(n_op):
            for i in range(u_ip):
                for j in range(u_op):
                    fh.write(f"{a},{b},{i - s_ip_max},{j - s_op_max},"
                             f"{d_table[a, b, i, j]:.12e}\n")


# ---------------------------------------------------------------------------
# composite target lineshape (Doppler + Zeeman broadening)
# ---------------------------------------------------------------------------

def _voigt_density(delta, gamma_fwhm: float, sigma: float):
    """Lorentzian(Gamma) convolved with Gaussian(sigma), by quadrature."""
    if sigma == 0.0:
        return lineshape_value("lorentzian", delta, 0.0, gamma_fwhm)
    if gamma_fwhm == 0.0:
        return lineshape_value("gaussian", delta, 0.0, sigma)
    return _overlap_integral(gamma_fwhm, sigma, float(delta))


def composite_target_lineshape(gamma_t: float, doppler_fwhm: float = 0.0,
                               zeeman_splitting: float = 0.0):
    """Effective target line profile and its FWHM (all rad/s).

    Equal-weight average of two Doppler-broadened Lorentzians centered
    at +-zeeman_splitting/2.  Returns (profile, fwhm) where profile maps
    detuning from the unshifted center to spectral density.  The FWHM is
    found by bisection on the numeric profile.
    """
    if gamma_t <= 0:
        raise ValueError("gamma_t must be positive")
    if doppler_fwhm < 0 or zeeman_splitting < 0:
        raise ValueError("broadening widths must be >= 0")
    sigma_d = doppler_fwhm / np.sqrt(8.0 * np.log(2.0))
    half = zeeman_splitting / 2.0

    def profile(delta):
        return 0.5 * (_voigt_density(delta - half, gamma_t, sigma_d)
                      + _voigt_density(delta + half, gamma_t, sigma_d))

    peak = profile(0.0)
    for x in (half,):
        if x > 0:
            peak = max(peak, profile(x))
    target = peak / 2.0
    # bracket the outer half-maximum crossing, then bisect
    width_guess = gamma_t + doppler_fwhm + zeeman_splitting
    hi = width_guess
    while profile(hi) > target:
        hi *= 2.0
        if hi > 1e4 * width_guess:  # pragma: no cover - defensive
            raise RuntimeError("could not bracket the half-maximum crossing")
    lo = 0.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if profile(mid) > target:
            lo = mid
        else:
            hi = mid
    return profile, float(lo + hi)
