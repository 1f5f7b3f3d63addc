"""Experiment configuration: flat dotted-key text files with a strict schema.

Config files hold ``key = value`` lines (``#`` comments, blank lines
ignored); every key must appear in the schema below, and every schema key
has a documented default, so an empty file is a valid configuration.  CLI
``--set key=value`` overrides are applied after the file.  The same schema
is rendered in docs/config_schema.md.
"""

import math
import os
from dataclasses import dataclass

from .errors import ConfigError

EXPERIMENTS = ("simulate", "linear-decay", "resonances", "phase-bound",
               "cs-sweep", "scattering")

# key -> (type, default, description). type "floats"/"strs" = comma list.
SCHEMA = {
    "output_dir": ("str", "", "output directory; empty -> $EMLAB_OUTPUT_DIR or ./emlab_out"),
    "physical.c_s": ("float", 0.5, "speed of sound, in (0,1)"),
    "grid.box_length": ("float", 64.0, "periodic box side L"),
    "grid.points_per_axis": ("int", 48, "grid points per axis (even, >= 8)"),
    "integrator.scheme": ("str", "exponential-rk4",
                          "exponential-rk4 (diagonal) or classical-rk4 (primitive)"),
    "integrator.dt": ("float", 0.05, "time step; 0 -> scheme default"),
    "integrator.t_end": ("float", 50.0, "final time"),
    "integrator.snapshot_stride": ("int", 100, "steps between snapshots"),
    "integrator.constraint_check_stride": ("int", 20,
                                           "steps between constraint-residual records"),
    "ic.seed": ("int", 1, "random-data seed"),
    "ic.amplitude": ("float", 1e-3, "sup-norm amplitude of the initial data"),
    "ic.band_fraction": ("float", 0.25, "initial data supported on |j| <= fraction * n"),
    "diagnostics.sobolev_n": ("int", 4, "ledger index N"),
    "diagnostics.sobolev_npp": ("int", 3, "ledger index N''"),
    "diagnostics.sobolev_np": ("int", 2, "ledger index N'"),
    "diagnostics.delta1": ("float", 0.01, "ledger exponent delta_1"),
    "diagnostics.constraint_tol": ("float", 1e-9, "accept states as constraint-satisfying"),
    "diagnostics.x_norms": ("bool", True, "emit the X-norm component ledger for simulate"),
    "resonance.search_radius": ("float", 8.0, "reduced-coordinate search radius"),
    "resonance.tol": ("float", 1e-9, "phase/gradient residual tolerance after polish"),
    "resonance.seed_step": ("float", 0.01, "dense-scan seed grid step"),
    "resonance.cloud_step": ("float", 0.05, "sampling step for the S/T point clouds"),
    "resonance.with_clouds": ("bool", True, "emit sampled S/T point clouds"),
    "phase_bound.c_r": ("float", 3.0, "germ-radius bound C_R for the scan"),
    "phase_bound.c0": ("float", 100.0, "inner radius C0 of the outcome region"),
    "phase_bound.step": ("float", 0.01, "scan step in reduced coordinates"),
    "phase_bound.s_max": ("float", 0.0, "outer |xi| radius; 0 -> 20 * C0"),
    "decay.p_values": ("strs", "inf,6,2", "Lebesgue exponents to fit"),
    "decay.speed": ("str", "1", "propagation speed: 1 or cs"),
    "decay.sigma": ("float", 1.0, "Gaussian datum width"),
    "decay.t_min": ("float", 5.0, "fit window start"),
    "decay.t_max": ("float", 40.0, "fit window end"),
    "decay.n_times": ("int", 9, "sample times (geometric) in the window"),
    "sweep.cs_values": ("floats", "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9",
                        "sound speeds for cs-sweep"),
    "sweep.workers": ("int", 1, "parallel workers for cs-sweep"),
    "scattering.times": ("floats", "5,10,20,40", "geometric profile snapshot times"),
    "scattering.inject_forcing": ("bool", False,
                                  "negative control: inject non-decaying profile forcing"),
    "scattering.forcing_seed": ("int", 7, "seed for the injected forcing field"),
}


def _parse_value(key, typ, raw):
    raw = raw.strip()
    try:
        if typ == "float":
            return float(raw)
        if typ == "int":
            v = float(raw)
            if v != int(v):
                raise ValueError
            return int(v)
        if typ == "bool":
            if raw.lower() in ("true", "1", "yes", "on"):
                return True
            if raw.lower() in ("false", "0", "no", "off"):
                return False
            raise ValueError
        if typ == "str":
            return raw
        if typ == "strs":
            return raw
        if typ == "floats":
            [float(x) for x in raw.split(",") if x.strip()]
            return raw
    except ValueError:
        raise ConfigError(f"bad value {raw!r} for key {key!r} (expected {typ})",
                          key=key) from None
    raise ConfigError(f"unknown schema type {typ!r}", key=key)


@dataclass
class ExperimentConfig:
    """A validated experiment name plus the resolved key-value map."""

    experiment: str
    values: dict

    def __getitem__(self, key):
        return self.values[key]

    def floats(self, key):
        raw = self.values[key]
        out = [float(x) for x in str(raw).split(",") if x.strip()]
        if not out:
            raise ConfigError(f"key {key!r} needs at least one value", key=key)
        return out

    def pvalues(self, key):
        out = []
        for tok in str(self.values[key]).split(","):
            tok = tok.strip()
            if not tok:
                continue
            out.append(math.inf if tok in ("inf", "Inf", "INF") else float(tok))
        return out

    def speed(self, key):
        raw = str(self.values[key]).strip()
        if raw == "1":
            return 1.0
        if raw in ("cs", "c_s"):
            return float(self.values["physical.c_s"])
        raise ConfigError(f"speed must be '1' or 'cs', got {raw!r}", key=key)

    def output_dir(self):
        out = self.values["output_dir"]
        if out:
            return out
        env = os.environ.get("EMLAB_OUTPUT_DIR", "")
        return env or "./emlab_out"


def default_config(experiment):
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}; "
                          f"choose one of {', '.join(EXPERIMENTS)}")
    return ExperimentConfig(experiment,
                            {k: spec[1] for k, spec in SCHEMA.items()})


def parse_config_file(path):
    """Read ``key = value`` lines; unknown keys are rejected by name."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ConfigError(
                    f"{path}:{lineno}: expected 'key = value', got {text!r}")
            key, raw = (part.strip() for part in text.split("=", 1))
            if key not in SCHEMA:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}", key=key)
            out[key] = _parse_value(key, SCHEMA[key][0], raw)
    return out


def apply_overrides(cfg, overrides):
    """Apply 'key=value' strings (CLI --set) on top of a config."""
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, raw = (part.strip() for part in item.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key!r}", key=key)
        cfg.values[key] = _parse_value(key, SCHEMA[key][0], raw)
    return cfg


def load_config(experiment, path=None, overrides=(), output_dir=None):
    cfg = default_config(experiment)
    if path:
        cfg.values.update(parse_config_file(path))
    apply_overrides(cfg, overrides)
    if output_dir:
        cfg.values["output_dir"] = output_dir
    validate(cfg)
    return cfg


def validate(cfg):
    v = cfg.values
    if not 0.0 < v["physical.c_s"] < 1.0:
        raise ConfigError("physical.c_s must lie in (0,1)", key="physical.c_s")
    n = v["grid.points_per_axis"]
    if n < 8 or n % 2:
        raise ConfigError("grid.points_per_axis must be even and >= 8",
                          key="grid.points_per_axis")
    if v["grid.box_length"] <= 0:
        raise ConfigError("grid.box_length must be positive", key="grid.box_length")
    if v["integrator.scheme"] not in ("exponential-rk4", "classical-rk4"):
        raise ConfigError("integrator.scheme must be exponential-rk4 or classical-rk4",
                          key="integrator.scheme")
    if v["integrator.dt"] < 0 or v["integrator.t_end"] < 0:
        raise ConfigError("integrator.dt and t_end must be nonnegative",
                          key="integrator.dt")
    if v["phase_bound.c0"] <= v["phase_bound.c_r"]:
        raise ConfigError("phase_bound.c0 must exceed phase_bound.c_r",
                          key="phase_bound.c0")
    for key in ("sweep.cs_values", "scattering.times"):
        cfg.floats(key)
    cfg.pvalues("decay.p_values")
    cfg.speed("decay.speed")
    return cfg


def schema_markdown():
    """Render the schema as a markdown table (the published schema document)."""
    lines = ["| key | type | default | description |",
             "|-----|------|---------|-------------|"]
    for key, (typ, default, desc) in SCHEMA.items():
        lines.append(f"| `{key}` | {typ} | `{default}` | {desc} |")
    return "\n".join(lines) + "\n"
