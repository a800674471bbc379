"""Experiment configuration files, snapshots, and CSV emission.

Config files are line-based `key = value` text.  Blank lines and lines
starting with `#` are ignored.  Recognized keys:

    n, R, k, speed, integrator, dt, T, L_max, init, out_dir, cadence

Speed values follow `mean`, `power_mean m=1 beta=2`, or `elementary l=2`.
Initial data follows `const:c`, `harmonic:l,p,amp`, `random:amp,lmax,seed`,
or `sphere:z0,z1,...`.  Unknown or repeated keys are rejected with the line
number; so is any malformed value.

Snapshots are plain text: four header lines (n, R, L_max, t) followed by
one `l p value` line per stored coefficient, 17 significant digits, which
round-trips float64 exactly.  Coefficients not listed are zero.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .analysis import sphere_from_coords
from .errors import ConfigError, SnapshotError
from .flow import FlowConfig, FlowState, default_timestep
from .harmonics import Grid, RadialField, build_grid, harmonic_multiplicity
from .speeds import SpeedSpec, make_speed

CONFIG_KEYS = ("n", "R", "k", "speed", "integrator", "dt", "T", "L_max",
               "init", "out_dir", "cadence")

RUN_COLUMNS = ("t", "h_k", "V", "sup_G", "sup_rho", "sphere_residual_sup",
               "mode_energy_l2", "mode_energy_l3", "mode_energy_l4",
               "mode_energy_l5", "mode_energy_l6", "mode_energy_l7",
               "mode_energy_l8")


@dataclass(frozen=True)
class InitSpec:
    """Parsed initial-data descriptor; built into a field once a grid exists."""

    kind: str
    params: tuple

    def describe(self) -> str:
        if self.kind == "const":
            return f"const:{self.params[0]:g}"
        if self.kind == "harmonic":
            l, p, amp = self.params
            return f"harmonic:{l},{p},{amp:g}"
        if self.kind == "random":
            amp, lmax, seed = self.params
            return f"random:{amp:g},{lmax},{seed}"
        if self.kind == "sphere":
            return "sphere:" + ",".join(f"{z:g}" for z in self.params)
        return self.kind

    def build(self, grid: Grid, R: float) -> RadialField:
        if self.kind == "const":
            return RadialField(grid, R, values=np.full(grid.shape, self.params[0]))
        if self.kind == "harmonic":
            l, p, amp = self.params
            coeffs = np.zeros(grid.size)
            coeffs[grid.flat_index(l, p)] = amp
            return RadialField(grid, R, coeffs=coeffs)
        if self.kind == "random":
            amp, lmax, seed = self.params
            return random_band_field(grid, R, amp, 2, lmax, seed)
        if self.kind == "sphere":
            return sphere_from_coords(np.asarray(self.params), grid, R)
        raise ConfigError(f"unknown init kind {self.kind!r}")


def random_band_field(grid: Grid, R: float, amp: float, l_lo: int, l_hi: int,
                      seed: int) -> RadialField:
    """Seeded band-limited field, scaled so the sup norm equals amp.

    Coefficients are uniform on [-1, 1] for degrees l_lo..l_hi and zero
    outside, in particular on the constant and degree-1 modes.
    """
    rng = np.random.default_rng(seed)
    c = rng.uniform(-1.0, 1.0, grid.size)
    deg = grid.degrees
    c[(deg < l_lo) | (deg > l_hi)] = 0.0
    sup = float(np.max(np.abs(grid.synthesize(c))))
    if sup == 0.0:
        raise ConfigError(f"random init has no content in degrees {l_lo}..{l_hi}")
    return RadialField(grid, R, coeffs=c * (amp / sup))


@dataclass(frozen=True)
class ParsedConfig:
    config: FlowConfig
    init: InitSpec
    out_dir: str


def _parse_speed(value: str, n: int, R: float, lineno: int) -> SpeedSpec:
    parts = value.split()
    kind = parts[0]
    kwargs: dict = {}
    for item in parts[1:]:
        if "=" not in item:
            raise ConfigError(f"line {lineno}: bad speed parameter {item!r}")
        key, _, raw = item.partition("=")
        if key not in ("m", "beta", "l"):
            raise ConfigError(f"line {lineno}: unknown speed parameter {key!r}")
        try:
            kwargs[key] = float(raw) if key == "beta" else int(raw)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad speed parameter value {raw!r}") from exc
    try:
        return make_speed(kind, n=n, R=R, **kwargs)
    except Exception as exc:
        raise ConfigError(f"line {lineno}: {exc}") from exc


def _parse_init(value: str, lineno: int) -> InitSpec:
    kind, sep, rest = value.partition(":")
    if not sep:
        raise ConfigError(f"line {lineno}: init needs the form kind:params")
    try:
        if kind == "const":
            return InitSpec("const", (float(rest),))
        if kind == "harmonic":
            l, p, amp = rest.split(",")
            return InitSpec("harmonic", (int(l), int(p), float(amp)))
        if kind == "random":
            amp, lmax, seed = rest.split(",")
            return InitSpec("random", (float(amp), int(lmax), int(seed)))
        if kind == "sphere":
            return InitSpec("sphere", tuple(float(v) for v in rest.split(",")))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"line {lineno}: bad init parameters {rest!r}") from exc
    raise ConfigError(f"line {lineno}: unknown init kind {kind!r}")


def parse_config_text(text: str) -> ParsedConfig:
    """Parse config text into a flow configuration plus initial data."""
    raw: dict[str, tuple[str, int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key = value, got {stripped!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(
                f"line {lineno}: key {key!r} already set on line {raw[key][1]}")
        if not value:
            raise ConfigError(f"line {lineno}: missing value for {key!r}")
        raw[key] = (value, lineno)

    def take(key: str, cast, default):
        if key not in raw:
            return default
        value, lineno = raw[key]
        try:
            return cast(value)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {value!r}") from exc

    n = take("n", int, 2)
    R = take("R", float, 1.0)
    k = take("k", int, -1)
    integrator = take("integrator", str, "imex")
    dt = take("dt", float, None)
    T = take("T", float, 1.0)
    L_max = take("L_max", int, 16)
    cadence = take("cadence", int, 10)
    out_dir = take("out_dir", str, ".")
    if "k" in raw and not -1 <= k <= n - 1:
        raise ConfigError(
            f"line {raw['k'][1]}: k = {k} is outside [-1, {n - 1}] for n = {n}")
    if "speed" in raw:
        speed = _parse_speed(raw["speed"][0], n, R, raw["speed"][1])
    else:
        speed = make_speed("mean", n=n, R=R)
    if "init" in raw:
        init = _parse_init(raw["init"][0], raw["init"][1])
    else:
        init = InitSpec("const", (0.0,))
    try:
        config = FlowConfig(n=n, R=R, k=k, speed=speed, integrator=integrator,
                            dt=dt, T=T, L_max=L_max, cadence=cadence)
    except Exception as exc:
        keys = ", ".join(f"{key}(line {v[1]})" for key, v in raw.items())
        raise ConfigError(f"inconsistent configuration [{keys}]: {exc}") from exc
    if init.kind == "harmonic" and init.params[0] > L_max:
        raise ConfigError(
            f"line {raw['init'][1]}: init degree {init.params[0]} exceeds L_max={L_max}")
    if init.kind == "sphere" and len(init.params) != n + 2:
        raise ConfigError(
            f"line {raw['init'][1]}: sphere init needs {n + 2} coordinates, got {len(init.params)}")
    return ParsedConfig(config=config, init=init, out_dir=out_dir)


def parse_config(path: str) -> ParsedConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def config_echo(parsed: ParsedConfig) -> list[str]:
    """Config re-serialized as key = value lines (for file headers)."""
    cfg = parsed.config
    dt = default_timestep(cfg)
    lines = [
        f"n = {cfg.n}",
        f"R = {cfg.R:g}",
        f"k = {cfg.k}",
        f"speed = {cfg.speed.describe()}",
        f"integrator = {cfg.integrator}",
        f"dt = {dt:g}",
        f"T = {cfg.T:g}",
        f"L_max = {cfg.L_max}",
        f"cadence = {cfg.cadence}",
        f"init = {parsed.init.describe()}",
    ]
    return lines


def run_meta(parsed: ParsedConfig, grid: Grid) -> list[str]:
    """Header lines for run.csv: code version, grid description, config echo."""
    from . import __version__

    if grid.n == 1:
        gdesc = f"{grid.shape[0]} uniform nodes"
    else:
        gdesc = f"{grid.shape[0]} x {grid.shape[1]} nodes (Gauss-Legendre x uniform)"
    return [f"version = {__version__}", f"grid = {gdesc}"] + config_echo(parsed)


# -- snapshots ------------------------------------------------------------------


def write_snapshot(state: FlowState, path: str) -> None:
    """Store a flow state as text; exact round trip of every coefficient."""
    rho = state.rho
    grid = rho.grid
    lines = [
        f"n = {grid.n}",
        f"R = {rho.R:.17g}",
        f"L_max = {grid.L_max}",
        f"t = {state.t:.17g}",
    ]
    coeffs = rho.coeffs
    idx = 0
    for l in range(grid.L_max + 1):
        for p in range(1, harmonic_multiplicity(l, grid.n) + 1):
            lines.append(f"{l} {p} {coeffs[idx]:.17g}")
            idx += 1
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _header_value(lines: list[str], lineno: int, key: str) -> str:
    if lineno > len(lines):
        raise SnapshotError(f"line {lineno}: missing header line {key!r}")
    line = lines[lineno - 1]
    k, sep, v = line.partition("=")
    if not sep or k.strip() != key:
        raise SnapshotError(f"line {lineno}: expected {key} = ..., got {line!r}")
    return v.strip()


def read_snapshot(path: str, oversample: float = 2.0) -> FlowState:
    """Rebuild a flow state from a snapshot file.

    Coefficient lines may be sparse; anything not listed is zero.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    try:
        n = int(_header_value(lines, 1, "n"))
        R = float(_header_value(lines, 2, "R"))
        L_max = int(_header_value(lines, 3, "L_max"))
        t = float(_header_value(lines, 4, "t"))
    except ValueError as exc:
        raise SnapshotError(f"bad header value: {exc}") from exc
    try:
        grid = build_grid(n, L_max, oversample)
    except Exception as exc:
        raise SnapshotError(f"cannot build grid from header: {exc}") from exc
    coeffs = np.zeros(grid.size)
    seen = set()
    for lineno, line in enumerate(lines[4:], start=5):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 3:
            raise SnapshotError(f"line {lineno}: expected 'l p value', got {line!r}")
        try:
            l, p, value = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError as exc:
            raise SnapshotError(f"line {lineno}: {exc}") from exc
        try:
            flat = grid.flat_index(l, p)
        except IndexError as exc:
            raise SnapshotError(f"line {lineno}: {exc}") from exc
        if flat in seen:
            raise SnapshotError(f"line {lineno}: coefficient ({l}, {p}) listed twice")
        seen.add(flat)
        coeffs[flat] = value
    return FlowState(t=t, rho=RadialField(grid, R, coeffs=coeffs))


# -- CSV ----------------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def run_csv_lines(records, meta: list[str]) -> list[str]:
    """run.csv content for a list of diagnostics records."""
    lines = [f"# {m}" for m in meta]
    lines.append(",".join(RUN_COLUMNS))
    for r in records:
        energies = [r.mode_energy[l] if l < len(r.mode_energy) else 0.0
                    for l in range(2, 9)]
        row = [r.t, r.h_k, r.V, r.sup_G, r.sup_rho, r.sphere_residual_sup, *energies]
        lines.append(",".join(_fmt(v) for v in row))
    return lines


def write_lines(path: str, lines: list[str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def resolve_out_dir(requested: str) -> str:
    """Environment override wins over the configured output directory."""
    out = os.environ.get("MIXEDFLOW_OUT", "").strip() or requested
    os.makedirs(out, exist_ok=True)
    return out
