"""Configuration-driven command line: scenario files in, CSV/JSON out.

Commands
--------
modes       mode frequencies, Lamb-Dicke parameters, saturation intensity
dynamics    motional population time series on (or off) resonance
spectrum    readout fluorescence spectrum across a detuning grid + fit
widthcurve  signal FWHM and depth versus scaled pulse time
reduced     three-level fast-model spectrum
dtable      spontaneous-emission coefficient table

Configs are JSON (nested key/value); CLI --set key=value flags override
file values, and every run writes the fully resolved config next to its
outputs so results can be reproduced bit for bit.

Exit codes: 0 ok, 1 usage/config error, 2 numeric failure, 3 leak
threshold exceeded (outputs still written).
"""

import argparse
import copy
import json
import os
import sys
import warnings
from dataclasses import replace

import numpy as np

from . import presets
from .constants import ion_mass_kg
from .ion_mechanics import BeamGeometry, IonSpecies, TwoIonSystem, lamb_dicke
from .radiation import (EmissionPattern, LaserField, QuadratureError,
                        TransitionLine, effective_saturation_intensity,
                        saturation_intensity, write_d_table_csv)
from .rate_engine import (LeakWarning, PopulationState, SpectroscopyScenario,
                          build_rate_matrix, evolve_series, scaled_time)
from .readout import pi_pulse
from .reduced_model import reduced_spectrum
from .scan_fit import (FitError, fit_lorentzian, numeric_fwhm_depth,
                       readout_spectrum, width_depth_curves)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERIC = 2
EXIT_LEAK = 3


class ConfigError(ValueError):
    pass


DEFAULT_CONFIG = {
    "preset": "mg24_ca40",
    "scenario": {
        # common knobs (null = keep the preset value)
        "omega_z_hz": 147.9e3,
        "heat_ip": 14.0,
        "heat_op": 1.7,
        "axial_projection": 0.7071067811865476,
        "intensity_sat_units": None,
        "intensity_w_m2": None,
        "laser_fwhm_hz": None,
        "n_ip_max": 19,
        "n_op_max": 19,
        "s_ip_max": None,
        "s_op_max": None,
        "leak_warn_fraction": 0.01,
        # explicit physics, required only when preset is null
        "target_mass_u": None,
        "readout_mass_u": None,
        "target_label": "target",
        "readout_label": "readout",
        "transition_wavelength_m": None,
        "gamma_t_hz": None,
        "absorption_scale": 1.0,
        "stimulated_scale": 1.0,
        "laser_shape": None,
        "pattern": None,
    },
    "readout": {
        "wavelength_m": 729e-9,
        "omega_0_hz": 10e3,
        "two_pulse": False,
        "leak_survival": 0.5,
    },
    "scan": {
        "span_hz": None,          # null = preset default (Mg 300 MHz, MgH 600 MHz)
        "points": 101,
        "tau_spec_s": 1.3e-3,
        "tau_scaled": None,       # overrides tau_spec_s when set
        "fit": None,              # null = lorentzian (mg) / numeric (mgh)
    },
    "dynamics": {
        "t_max_s": 5.3e-3,
        "points": 60,
        "detuning_hz": 0.0,
    },
    "widthcurve": {
        "tau_scaled": [1.0, 2.23, 4.0, 6.2, 9.1],
        "intensities_sat_units": None,   # null = just the scenario intensity
        "laser_fwhms_hz": None,          # mgh only
    },
    "reduced": {
        "contrast": 0.5,
    },
    "integrator": "lsoda",
    "workers": 0,                 # 0 = all logical cores
    "seed": 0,                    # reserved for stochastic extensions
}

_SCAN_SPAN_DEFAULT = {"mg24_ca40": 300e6, "mgh24_ca40": 600e6, None: 300e6}
_SCAN_FIT_DEFAULT = {"mg24_ca40": "lorentzian", "mgh24_ca40": "numeric", None: "lorentzian"}


# ---------------------------------------------------------------------------
# config plumbing
# ---------------------------------------------------------------------------

def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, val in override.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key: {where}")
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"{where} must be a mapping")
            out[key] = _merge(base[key], val, where)
        else:
            out[key] = val
    return out


def _parse_set(expr: str):
    if "=" not in expr:
        raise ConfigError(f"--set expects key=value, got {expr!r}")
    key, raw = expr.split("=", 1)
    try:
        val = json.loads(raw)
    except json.JSONDecodeError:
        val = raw  # bare strings are fine
    node = val
    for part in reversed(key.strip().split(".")):
        node = {part: node}
    return node


def load_config(path=None, sets=()) -> dict:
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if path is not None:
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config {path} is not valid JSON: {exc}")
        cfg = _merge(cfg, data)
    for expr in sets:
        cfg = _merge(cfg, _parse_set(expr))
    _validate(cfg)
    return cfg


def _require(cond, msg):
    if not cond:
        raise ConfigError(msg)


def _validate(cfg: dict) -> None:
    _require(cfg["preset"] in (None, *presets.PRESETS),
             f"preset must be one of {sorted(presets.PRESETS)} or null")
    sc = cfg["scenario"]
    _require(sc["omega_z_hz"] > 0, "scenario.omega_z_hz must be > 0")
    _require(sc["heat_ip"] >= 0 and sc["heat_op"] >= 0,
             "heating rates must be >= 0")
    _require(0 <= sc["axial_projection"] <= 1,
             "scenario.axial_projection must lie in [0, 1]")
    _require(not (sc["intensity_sat_units"] is not None
                  and sc["intensity_w_m2"] is not None),
             "set intensity_sat_units or intensity_w_m2, not both")
    _require(sc["n_ip_max"] >= 1 and sc["n_op_max"] >= 1,
             "grid bounds must be >= 1")
    if cfg["preset"] is None:
        for key in ("target_mass_u", "readout_mass_u", "transition_wavelength_m",
                    "gamma_t_hz", "laser_shape", "pattern"):
            _require(sc[key] is not None,
                     f"scenario.{key} is required when preset is null")
    _require(cfg["scan"]["points"] >= 8, "scan.points must be >= 8")
    _require(cfg["integrator"] in ("lsoda", "bdf", "expm"),
             "integrator must be lsoda, bdf or expm")
    _require(cfg["workers"] >= 0, "workers must be >= 0")
    ro = cfg["readout"]
    _require(ro["omega_0_hz"] > 0 and ro["wavelength_m"] > 0,
             "readout pulse needs positive Rabi frequency and wavelength")
    _require(0 <= ro["leak_survival"] <= 1,
             "readout.leak_survival must lie in [0, 1]")


def build_scenario(cfg: dict) -> SpectroscopyScenario:
    sc = cfg["scenario"]
    if cfg["preset"] is not None:
        kwargs = dict(omega_z=2 * np.pi * sc["omega_z_hz"],
                      heat_ip=sc["heat_ip"], heat_op=sc["heat_op"],
                      axial_projection=sc["axial_projection"])
        if sc["intensity_sat_units"] is not None:
            kwargs["intensity_sat_units"] = sc["intensity_sat_units"]
        if cfg["preset"] == "mgh24_ca40" and sc["laser_fwhm_hz"] is not None:
            kwargs["laser_fwhm"] = 2 * np.pi * sc["laser_fwhm_hz"]
        scenario = presets.PRESETS[cfg["preset"]](**kwargs)
    else:
        system = TwoIonSystem(
            target=IonSpecies(ion_mass_kg(sc["target_mass_u"]), sc["target_label"]),
            readout=IonSpecies(ion_mass_kg(sc["readout_mass_u"]), sc["readout_label"]),
            omega_z=2 * np.pi * sc["omega_z_hz"])
        line = TransitionLine.from_wavelength(
            sc["transition_wavelength_m"], gamma_t=2 * np.pi * sc["gamma_t_hz"],
            absorption_scale=sc["absorption_scale"],
            stimulated_scale=sc["stimulated_scale"])
        fwhm = 2 * np.pi * (sc["laser_fwhm_hz"] or 0.0)
        sat = sc["intensity_sat_units"]
        if sat is not None:
            if sc["laser_shape"] == "gaussian":
                sigma = fwhm / np.sqrt(8 * np.log(2))
                intensity = sat * effective_saturation_intensity(line, "laser", sigma)
            else:
                intensity = sat * effective_saturation_intensity(line)
        else:
            intensity = sc["intensity_w_m2"] or 0.0
        scenario = SpectroscopyScenario(
            system=system, line=line,
            laser=LaserField(intensity=intensity, fwhm=fwhm, shape=sc["laser_shape"]),
            beam=BeamGeometry(sc["transition_wavelength_m"], sc["axial_projection"]),
            pattern=EmissionPattern(sc["pattern"]))
    # post-construction overrides shared by both paths
    fields = {}
    for name in ("n_ip_max", "n_op_max", "s_ip_max", "s_op_max"):
        if sc[name] is not None and sc[name] != getattr(scenario, name):
            fields[name] = sc[name]
    if sc["leak_warn_fraction"] != scenario.leak_warn_fraction:
        fields["leak_warn_fraction"] = sc["leak_warn_fraction"]
    if fields:
        scenario = replace(scenario, **fields)
    if cfg["preset"] is not None and sc["intensity_w_m2"] is not None:
        scenario = scenario.with_laser(intensity=sc["intensity_w_m2"])
    return scenario


def _resolve_tau_spec(cfg: dict, scenario: SpectroscopyScenario) -> float:
    scan = cfg["scan"]
    if scan["tau_scaled"] is not None:
        return scan["tau_scaled"] / scaled_time(1.0, scenario)
    return scan["tau_spec_s"]


def _detuning_grid(cfg: dict) -> np.ndarray:
    span = cfg["scan"]["span_hz"]
    if span is None:
        span = _SCAN_SPAN_DEFAULT[cfg["preset"]]
    half = 2 * np.pi * span / 2.0
    return np.linspace(-half, half, cfg["scan"]["points"])


def _workers(cfg: dict) -> int:
    return cfg["workers"] or (os.cpu_count() or 1)


def _readout_pulses(cfg: dict, scenario: SpectroscopyScenario):
    ro = cfg["readout"]
    omega_0 = 2 * np.pi * ro["omega_0_hz"]
    first = pi_pulse(scenario.system, (0, -1), omega_0, ro["wavelength_m"])
    second = (pi_pulse(scenario.system, (-1, 0), omega_0, ro["wavelength_m"])
              if ro["two_pulse"] else None)
    return first, second


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _write_csv(path, header, rows):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path, payload):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_effective_config(prefix: str, cfg: dict) -> None:
    _write_json(prefix + "_config.json", cfg)


_MARGINAL_STATES = [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0),
                    (1, 2), (2, 1), (2, 2)]
_MARGINAL_HEADER = [f"P_{i}{j}" for i, j in _MARGINAL_STATES]


def _spectrum_rows(records, model: str):
    for r in records:
        yield ([r.detuning / (2 * np.pi), r.fluorescence, r.leaked,
                int(r.leak_flag), model]
               + [r.marginal[i, j] for i, j in _MARGINAL_STATES])


_SPECTRUM_HEADER = (["detuning_hz", "fluorescence_probability",
                     "leaked_probability", "leak_flag", "model"]
                    + _MARGINAL_HEADER)


def _write_gnuplot(prefix: str, csv_path: str, xlabel: str, ylabel: str,
                   xcol: int, ycol: int) -> None:
    path = prefix + ".gp"
    with open(path, "w") as fh:
        fh.write(f"""set datafile separator ','
set xlabel '{xlabel}'
set ylabel '{ylabel}'
set key off
plot '{os.path.basename(csv_path)}' using {xcol}:{ycol} with linespoints
""")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _cmd_modes(cfg, scenario, prefix, args):
    sys_ = scenario.system
    eta_t = lamb_dicke(sys_, scenario.beam, "target")
    eta_r = lamb_dicke(sys_, BeamGeometry(cfg["readout"]["wavelength_m"], 1.0),
                       "readout")
    if scenario.laser.shape == "gaussian":
        isat = effective_saturation_intensity(scenario.line, "laser",
                                              scenario.laser.sigma)
        regime = "laser"
    else:
        isat = effective_saturation_intensity(scenario.line)
        regime = "transition"
    report = {
        "mass_ratio": sys_.mass_ratio,
        "omega_ip_hz": sys_.omega_ip / (2 * np.pi),
        "omega_op_hz": sys_.omega_op / (2 * np.pi),
        "eigenvector_b_ip_readout": sys_.b_ip_r,
        "eigenvector_b_ip_target": sys_.b_ip_t,
        "eigenvector_b_op_readout": sys_.b_op_r,
        "eigenvector_b_op_target": sys_.b_op_t,
        "eta_ip_target": eta_t[0],
        "eta_op_target": eta_t[1],
        "eta_ip_readout": eta_r[0],
        "eta_op_readout": eta_r[1],
        "saturation_regime": regime,
        "saturation_intensity_w_m2": isat,
        "intensity_w_m2": scenario.laser.intensity,
        "intensity_sat_units": scenario.laser.intensity / isat if isat else None,
    }
    print(f"mode frequencies: ip {report['omega_ip_hz'] / 1e3:.1f} kHz, "
          f"op {report['omega_op_hz'] / 1e3:.1f} kHz")
    print(f"target Lamb-Dicke: eta_ip {eta_t[0]:.4f}, eta_op {eta_t[1]:.4f}")
    print(f"readout Lamb-Dicke: eta_ip {eta_r[0]:.4f}, eta_op {eta_r[1]:.4f}")
    print(f"saturation intensity ({regime}): {isat:.4g} W/m^2")
    _write_json(prefix + ".json", {"report": report, "config": cfg})
    _write_effective_config(prefix, cfg)
    return EXIT_OK


def _cmd_dynamics(cfg, scenario, prefix, args):
    dyn = cfg["dynamics"]
    times = np.linspace(0.0, dyn["t_max_s"], dyn["points"] + 1)[1:]
    matrix = build_rate_matrix(scenario, 2 * np.pi * dyn["detuning_hz"])
    leak_seen = False
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", LeakWarning)
        states = evolve_series(matrix, PopulationState.ground(scenario), times,
                               method=cfg["integrator"])
        leak_seen = any(issubclass(w.category, LeakWarning) for w in caught)
    rate = scaled_time(1.0, scenario)
    rows = []
    for t, st in zip(times, states):
        marg = st.motional_marginal()
        rows.append([t, t * rate, st.leaked, st.p[0, 0, 0], st.p[1, 0, 0]]
                    + [marg[i, j] for i, j in _MARGINAL_STATES])
    header = (["t_s", "tau_scaled", "leaked_probability",
               "p_ground_00", "p_excited_00"] + _MARGINAL_HEADER)
    csv_path = prefix + ".csv"
    _write_csv(csv_path, header, rows)
    _write_effective_config(prefix, cfg)
    if args.plot_script:
        _write_gnuplot(prefix, csv_path, "t (s)", "population", 1, 6)
    print(f"wrote {csv_path} ({len(rows)} time points)")
    return EXIT_LEAK if leak_seen else EXIT_OK


def _cmd_spectrum(cfg, scenario, prefix, args, model="full"):
    detunings = _detuning_grid(cfg)
    tau_spec = _resolve_tau_spec(cfg, scenario)
    if model == "reduced":
        records = reduced_spectrum(scenario, detunings, tau_spec,
                                   contrast=cfg["reduced"]["contrast"])
    else:
        pulse, second = _readout_pulses(cfg, scenario)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LeakWarning)
            records = readout_spectrum(
                scenario, detunings, tau_spec, pulse=pulse, second_pulse=second,
                leak_survival=cfg["readout"]["leak_survival"],
                method=cfg["integrator"], workers=_workers(cfg))
    csv_path = prefix + ".csv"
    _write_csv(csv_path, _SPECTRUM_HEADER, _spectrum_rows(records, model))
    fit_mode = cfg["scan"]["fit"] or _SCAN_FIT_DEFAULT[cfg["preset"]]
    fit_payload = {"fit": None, "fit_error": None}
    try:
        if fit_mode == "numeric":
            fwhm, depth = numeric_fwhm_depth(records)
            fit_payload["fit"] = {"mode": "numeric", "fwhm_hz": fwhm / (2 * np.pi),
                                  "depth": depth}
        else:
            res = fit_lorentzian(records)
            fit_payload["fit"] = {
                "mode": "lorentzian", "center_hz": res.center / (2 * np.pi),
                "fwhm_hz": res.fwhm / (2 * np.pi), "depth": res.depth,
                "baseline": res.baseline, "residual_norm": res.residual_norm,
                "covariance_diag": list(res.covariance),
                "iterations": res.iterations}
    except (FitError, ValueError) as exc:
        fit_payload["fit_error"] = str(exc)
    fit_payload["tau_spec_s"] = tau_spec
    fit_payload["tau_scaled"] = scaled_time(tau_spec, scenario)
    fit_payload["model"] = model
    fit_payload["config"] = cfg
    _write_json(prefix + "_fit.json", fit_payload)
    _write_effective_config(prefix, cfg)
    if args.plot_script:
        _write_gnuplot(prefix, csv_path, "detuning (Hz)", "fluorescence", 1, 2)
    leak = any(getattr(r, "leak_flag", False) for r in records)
    if fit_payload["fit"]:
        f = fit_payload["fit"]
        print(f"{model} spectrum: FWHM {f['fwhm_hz'] / 1e6:.2f} MHz, "
              f"depth {f['depth']:.3f} -> {csv_path}")
    else:
        print(f"{model} spectrum written to {csv_path}; fit failed: "
              f"{fit_payload['fit_error']}")
    return EXIT_LEAK if leak else EXIT_OK


def _cmd_widthcurve(cfg, scenario, prefix, args):
    wc = cfg["widthcurve"]
    entries = []
    if wc["intensities_sat_units"]:
        for s in wc["intensities_sat_units"]:
            isat = (effective_saturation_intensity(scenario.line, "laser",
                                                   scenario.laser.sigma)
                    if scenario.laser.shape == "gaussian"
                    else effective_saturation_intensity(scenario.line))
            entries.append((f"I={s:g}Isat", scenario.with_laser(intensity=s * isat)))
    elif wc["laser_fwhms_hz"]:
        sc = cfg["scenario"]
        for f in wc["laser_fwhms_hz"]:
            sub = dict(cfg, scenario=dict(sc, laser_fwhm_hz=f))
            entries.append((f"GammaL={f / 1e6:g}MHz", build_scenario(sub)))
    else:
        entries.append(("scan", scenario))
    fit_mode = cfg["scan"]["fit"] or _SCAN_FIT_DEFAULT[cfg["preset"]]
    pulse, second = _readout_pulses(cfg, scenario)
    rows = width_depth_curves(entries, wc["tau_scaled"], _detuning_grid(cfg),
                              fit=fit_mode, pulse=pulse, second_pulse=second,
                              leak_survival=cfg["readout"]["leak_survival"],
                              method=cfg["integrator"], workers=_workers(cfg))
    csv_path = prefix + ".csv"
    _write_csv(csv_path,
               ["label", "tau_scaled", "tau_spec_s", "fwhm_hz", "depth",
                "max_leaked_probability", "leak_flag"],
               [[r.label, r.tau_scaled, r.tau_spec, r.fwhm / (2 * np.pi),
                 r.depth, r.max_leaked, int(r.flagged)] for r in rows])
    _write_effective_config(prefix, cfg)
    if args.plot_script:
        _write_gnuplot(prefix, csv_path, "tau_scaled", "FWHM (Hz)", 2, 4)
    print(f"wrote {csv_path} ({len(rows)} points)")
    return EXIT_LEAK if any(r.flagged for r in rows) else EXIT_OK


def _cmd_dtable(cfg, scenario, prefix, args):
    table = scenario.d_table()
    csv_path = prefix + ".csv"
    os.makedirs(os.path.dirname(csv_path) or ".", exist_ok=True)
    with open(csv_path, "w") as fh:
        write_d_table_csv(table, fh)
    _write_effective_config(prefix, cfg)
    print(f"wrote {csv_path} ({table.size} coefficients)")
    return EXIT_OK


_COMMANDS = {
    "modes": _cmd_modes,
    "dynamics": _cmd_dynamics,
    "spectrum": _cmd_spectrum,
    "widthcurve": _cmd_widthcurve,
    "reduced": lambda cfg, sc, prefix, args: _cmd_spectrum(cfg, sc, prefix, args,
                                                           model="reduced"),
    "dtable": _cmd_dtable,
}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="recoilspec",
        description="Photon-recoil spectroscopy simulator for two-ion crystals")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("-c", "--config", help="JSON config file")
    parser.add_argument("-p", "--preset", help="scenario preset name")
    parser.add_argument("-s", "--set", action="append", default=[],
                        metavar="KEY=VALUE",
                        help="override a config entry (dotted keys, JSON values)")
    parser.add_argument("-o", "--output", default=None,
                        help="output path prefix (default out/<command>)")
    parser.add_argument("-w", "--workers", type=int, default=None,
                        help="worker processes for detuning scans")
    parser.add_argument("--plot-script", action="store_true",
                        help="also emit a gnuplot script next to the CSV")
    parser.add_argument("--print-config", action="store_true",
                        help="print the resolved config and exit")
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        sets = list(args.set)
        if args.preset:
            sets.insert(0, f"preset={args.preset}")
        if args.workers is not None:
            sets.append(f"workers={args.workers}")
        cfg = load_config(args.config, sets)
        scenario = build_scenario(cfg)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.print_config:
        print(json.dumps(cfg, indent=2, sort_keys=True))
        return EXIT_OK
    prefix = args.output or os.path.join("out", args.command)
    try:
        return _COMMANDS[args.command](cfg, scenario, prefix, args)
    except (FitError, QuadratureError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
