"""Run configuration: one INI-style file of ``key = value`` lines in sections.

Every key has a documented default, unknown sections or keys are errors,
and all errors carry the line and column they refer to.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field

from .grid import BOUNDARIES, GridSpec
from .nonlinearity import FAMILIES, Nonlinearity, make_builtin


class ConfigError(ValueError):
    def __init__(self, message, source="<config>", line=None, col=None):
        self.source, self.line, self.col = source, line, col
        where = source if line is None else f"{source}:{line}:{col or 1}"
        super().__init__(f"{where}: {message}")


def _floats(text):
    return tuple(float(t) for t in text.replace(",", " ").split())


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional_float(text):
    return None if text.strip().lower() in ("", "auto", "none") else float(text)


# section -> key -> (parser, default, description)
SCHEMA = {
    "run": {
        "out": (str, "run_out", "output directory (overridden by --out)"),
        "seed": (int, 0, "seed for any random perturbation"),
    },
    "grid": {
        "L": (float, 80.0, "half width of the computational interval [-L, L)"),
        "N": (int, 4096, "number of grid points (even)"),
        "boundary": (str, "periodic", "periodic (torus) or free (lattice operator on the whole line)"),
    },
    "oracle": {
        "L": (float, 80.0, "half width for the soliton oracle"),
        "N": (int, 4096, "grid points for the soliton oracle"),
        "boundary": (str, "free", "free (default; no periodic images) or periodic"),
    },
    "nonlinearity": {
        "family": (str, "pure_power", "pure_power | paper_critical | exp_power"),
        "p": (float, 2.0, "pure_power exponent, f = |s|^(p-1) s"),
        "lam": (float, 40.0, "paper_critical coefficient of the power term"),
        "q": (float, 4.0, "paper_critical power"),
        "alpha0": (float, math.pi / 4, "critical exponent of the exponential factor"),
        "nu": (float, 2.0, "exp_power exponent of |s| inside the exponential"),
    },
    "solver": {
        "init": (str, "gaussian", "gaussian | bump | file"),
        "width": (float, 1.0, "initial profile width"),
        "amplitude": (float, 1.0, "initial profile amplitude"),
        "init_file": (str, "", "field CSV used when init = file"),
        "init_noise": (float, 0.0, "amplitude of a seeded random perturbation"),
        "step0": (float, 1.0, "initial line-search step"),
        "shrink": (float, 0.5, "backtracking factor"),
        "armijo": (float, 1e-4, "Armijo sufficient-decrease constant"),
        "tol_residual": (float, 1e-8, "stop when the dual residual drops below this"),
        "max_iters": (int, 500, "iteration cap"),
        "recenter_every": (int, 10, "recenter every this many iterations (0 disables)"),
        "recenter_radius": (float, 5.0, "window half width R for recentering"),
        "rho": (float, 1e-3, "asserted lower bound for ||u|| over projected iterates"),
        "rho0": (float, 1.0, "norm-smallness monitor threshold"),
        "gamma": (float, 0.1, "non-vanishing threshold for the windowed mass"),
    },
    "audit": {
        "theta": (float, 3.0, "Ambrosetti-Rabinowitz exponent"),
        "C_q": (float, 0.3, "lower-bound constant in F(s) >= C_q |s|^q"),
        "q": (float, 3.0, "power in the lower bound"),
        "s_min": (float, 1e-6, "smallest sampled |s|"),
        "s_max": (float, 6.0, "largest sampled |s|"),
        "n_samples": (int, 400, "log-spaced samples per sign"),
    },
    "moser": {
        "alpha": (_floats, (0.5, 1.0, 2.0), "exponents to probe (comma separated)"),
        "family": (str, "gaussian", "gaussian | bump | log"),
        "budget": (int, 24, "trials per probe"),
        "small_amplitude": (float, 1e-3, "amplitude of the Taylor-regime trial"),
        "scan": (_bool, False, "also run a log-profile concentration scan"),
        "scan_L": (float, 20.0, "half width of the scan grid"),
        "scan_N": (int, 65536, "points of the scan grid"),
        "scan_eps_max": (float, 0.5, "least concentrated profile"),
        "scan_eps_min": (float, 1e-3, "most concentrated profile"),
        "scan_points": (int, 12, "number of concentration levels"),
    },
    "verify": {
        "separations": (_floats, (10.0, 20.0, 40.0), "bump separations (grid-step multiples)"),
        "bump": (str, "gaussian", "gaussian (exp(-x^2)) | wave_packet"),
        "split_tol": (float, 1e-6, "tolerance for the splitting identity relative to ||u_n||^2"),
        "envelope_alpha": (float, 1.0, "alpha in the growth envelopes (must exceed alpha0)"),
        "envelope_D": (_optional_float, None, "D in the growth envelopes; auto reports the minimal D"),
        "envelope_q": (float, 4.0, "q in the growth envelopes"),
    },
}


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)   # section -> key -> typed value
    raw: dict = field(default_factory=dict)      # section -> key -> text as given
    source: str = "<defaults>"

    def __getitem__(self, section):
        return self.values[section]

    def grid(self) -> GridSpec:
        g = self.values["grid"]
        return GridSpec(g["L"], g["N"], g["boundary"])

    def oracle_grid(self) -> GridSpec:
        o = self.values["oracle"]
        return GridSpec(o["L"], o["N"], o["boundary"])

    def nonlinearity(self) -> Nonlinearity:
        n = self.values["nonlinearity"]
        fam = n["family"]
        if fam == "pure_power":
            return make_builtin(fam, p=n["p"])
        if fam == "paper_critical":
            return make_builtin(fam, lam=n["lam"], q=n["q"], alpha0=n["alpha0"])
        return make_builtin(fam, alpha0=n["alpha0"], nu=n["nu"])

    def echo(self) -> str:
        """Fully resolved configuration in the input syntax."""
        out = []
        for sec, keys in SCHEMA.items():
            out.append(f"[{sec}]")
            for k in keys:
                out.append(f"{k} = {_format(self.values[sec][k])}")
            out.append("")
        return "\n".join(out)


def _format(v):
    if isinstance(v, tuple):
        return ", ".join(f"{x:.17g}" for x in v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.17g}"
    if v is None:
        return "auto"
    return str(v)


def defaults() -> RunConfig:
    return RunConfig({s: {k: spec[1] for k, spec in keys.items()} for s, keys in SCHEMA.items()}, {})


def _locate(text: str, section: str, key: str | None):
    """1-based (line, col) of a section header or of a key inside it."""
    current = None
    for i, line in enumerate(text.splitlines(), 1):
        m = re.match(r"\s*\[([^\]]*)\]", line)
        if m:
            current = m.group(1).strip()
            if key is None and current == section:
                return i, line.index("[") + 1
            continue
        if current == section and key is not None:
            m = re.match(r"(\s*)([^=:#;\s][^=:]*?)\s*[=:]", line)
            if m and m.group(2) == key:
                return i, len(m.group(1)) + 1
    return None, None


def _validate(cfg: RunConfig, where):
    g = cfg.values["grid"]
    if g["boundary"] not in BOUNDARIES:
        raise where("grid", "boundary", f"boundary must be one of {BOUNDARIES}")
    try:
        cfg.grid()
    except ValueError as exc:
        raise where("grid", "N", str(exc)) from None
    o = cfg.values["oracle"]
    if o["boundary"] not in BOUNDARIES:
        raise where("oracle", "boundary", f"boundary must be one of {BOUNDARIES}")
    try:
        cfg.oracle_grid()
    except ValueError as exc:
        raise where("oracle", "N", str(exc)) from None
    fam = cfg.values["nonlinearity"]["family"]
    if fam not in FAMILIES:
        raise where("nonlinearity", "family", f"family must be one of {FAMILIES}")
    try:
        cfg.nonlinearity()
    except ValueError as exc:
        raise where("nonlinearity", "family", str(exc)) from None
    s = cfg.values["solver"]
    if s["init"] not in ("gaussian", "bump", "file"):
        raise where("solver", "init", "init must be gaussian, bump or file")
    if s["init"] == "file" and not s["init_file"]:
        raise where("solver", "init_file", "init = file needs init_file")
    if not s["tol_residual"] > 0:
        raise where("solver", "tol_residual", "tol_residual must be positive")
    if s["max_iters"] < 1:
        raise where("solver", "max_iters", "max_iters must be >= 1")
    if not 0 < s["recenter_radius"] < g["L"]:
        raise where("solver", "recenter_radius", "recenter_radius must lie in (0, L)")
    if not 0 < s["shrink"] < 1:
        raise where("solver", "shrink", "shrink must lie in (0, 1)")
    if cfg.values["moser"]["family"] not in ("gaussian", "bump", "log"):
        raise where("moser", "family", "family must be gaussian, bump or log")
    if any(a <= 0 for a in cfg.values["moser"]["alpha"]):
        raise where("moser", "alpha", "alpha values must be positive")
    if cfg.values["verify"]["bump"] not in ("gaussian", "wave_packet"):
        raise where("verify", "bump", "bump must be gaussian or wave_packet")


def parse_config(text: str, source: str = "<config>", overrides=()) -> RunConfig:
    """Parse config text plus ``section.key=value`` overrides into a RunConfig."""
    cp = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#", ";"), default_section="__none__", strict=True
    )
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        msg = getattr(exc, "message", str(exc)).splitlines()[0]
        raise ConfigError(msg, source, line, 1) from None

    cfg = defaults()
    cfg.source = source

    def where(sec, key, msg):
        line, col = _locate(text, sec, key)
        return ConfigError(f"[{sec}] {key}: {msg}" if key else msg, source, line, col)

    def assign(sec, key, value, err):
        if sec not in SCHEMA:
            raise err(sec, None, f"unknown section [{sec}]")
        if key not in SCHEMA[sec]:
            raise err(sec, key, f"unknown key (known: {', '.join(SCHEMA[sec])})")
        parser = SCHEMA[sec][key][0]
        try:
            cfg.values[sec][key] = parser(value.strip())
        except ValueError as exc:
            raise err(sec, key, f"cannot parse {value!r}: {exc}") from None
        cfg.raw.setdefault(sec, {})[key] = value

    for sec in cp.sections():
        if sec not in SCHEMA:
            raise where(sec, None, f"unknown section [{sec}]")
        for key, value in cp.items(sec):
            assign(sec, key, value, where)

    def override_err(sec, key, msg):
        return ConfigError(f"[{sec}] {key}: {msg}" if key else msg, "--override")

    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"expected section.key=value, got {item!r}", "--override")
        lhs, value = item.split("=", 1)
        sec, key = lhs.strip().split(".", 1)
        assign(sec, key, value, override_err)

    _validate(cfg, where)
    return cfg


def load_config(path=None, overrides=()) -> RunConfig:
    if path is None:
        return parse_config("", "<defaults>", overrides)
    with open(path) as fh:
        return parse_config(fh.read(), str(path), overrides)
