"""Run configuration: INI file plus command-line overrides.

A file may hold a ``[run]`` section and one section per subcommand; the
subcommand's own section wins over ``[run]``, and flags win over both.
Reals accept a ``pi`` suffix (``0.4pi``); grids are ``start:stop:count``
or comma lists.
"""
import configparser
import math
import os
from dataclasses import dataclass, field

from . import spin
from .chaos import THREADS_ENV
from .errors import ConfigError, ParameterError

SUBCOMMANDS = ("oat", "tat", "qkr", "lyap-map", "poincare", "breaktime-scan", "qpt", "depth")

DEFAULT_KIND = {
    "oat": "off", "tat": "constant", "qkr": "kicked", "lyap-map": "kicked",
    "poincare": "kicked", "breaktime-scan": "kicked", "qpt": "ramp", "depth": "off",
}

# fields a drive kind may carry
KIND_FIELDS = {"off": set(), "constant": {"A"}, "kicked": {"A", "tau0", "tau1"}, "ramp": {"v"}}
DRIVE_FIELDS = {"A", "tau0", "tau1", "v"}


def parse_real(text):
    t = str(text).strip().replace(" ", "").lower()
    if t.endswith("pi"):
        head = t[:-2].rstrip("*")
        scale = 1.0 if head in ("", "+") else (-1.0 if head == "-" else float(head))
        return scale * math.pi
    return float(t)


def parse_int(text):
    v = float(str(text).strip())
    if v != int(v):
        raise ValueError(f"{text!r} is not an integer")
    return int(v)


def parse_bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"{text!r} is not a boolean")


def parse_grid(text):
    t = str(text).strip()
    if ":" in t:
        parts = t.split(":")
        if len(parts) != 3:
            raise ValueError("grid must be start:stop:count")
        lo, hi, n = parse_real(parts[0]), parse_real(parts[1]), parse_int(parts[2])
        if n < 1:
            raise ValueError("grid count must be >= 1")
        if n == 1:
            return (lo,)
        return tuple(lo + (hi - lo) * i / (n - 1) for i in range(n))
    return tuple(parse_real(p) for p in t.split(",") if p.strip())


def parse_int_list(text):
    return tuple(parse_int(p) for p in str(text).split(",") if p.strip())


def _choice(*options):
    def parse(text):
        t = str(text).strip()
        if t not in options:
            raise ValueError(f"{t!r} not in {options}")
        return t
    return parse


def _positive(x):
    return x > 0


def _nonneg(x):
    return x >= 0


# key -> (parser, default, range check or None)
SCHEMA = {
    "N": (parse_int, 400, lambda n: n >= 1),
    "N_list": (parse_int_list, (64, 100, 144, 196, 256, 324, 400),
               lambda xs: len(xs) > 0 and all(n >= 1 for n in xs)),
    "c": (parse_real, math.pi, None),
    "A": (parse_real, 0.4 * math.pi, None),
    "kind": (_choice(*spin.DRIVE_KINDS), None, None),
    "tau0": (parse_real, 1.0, _positive),
    "tau1": (parse_real, 0.01, _positive),
    "v": (parse_real, 1e-3, _positive),
    "sign": (parse_int, 1, lambda s: s in (1, -1)),
    "dt": (parse_real, 1e-2, _positive),
    "t_end": (parse_real, None, _nonneg),
    "samples": (parse_int, 201, lambda n: n >= 2),
    "amplitudes": (parse_bool, False, None),
    "g": (parse_real, 0.01, lambda g: 0 < g < 1),
    "tier": (_choice("BMF", "HP", "both", "exact"), None, None),
    "regime": (_choice("stable", "saddle", "chaotic"), "stable", None),
    "t_max": (parse_real, 100.0, _positive),
    "n_min": (parse_int, 100, lambda n: n >= 1),
    "periods": (parse_int, 500, lambda n: n >= 1),
    "delta0": (parse_real, 1e-5, _positive),
    "substeps": (parse_int, 200, lambda n: n >= 1),
    "A_grid": (parse_grid, None, lambda xs: len(xs) > 0),
    "c_grid": (parse_grid, None, lambda xs: len(xs) > 0),
    "seeds": (parse_int, 20, lambda n: n >= 1),
    "A_max": (parse_real, None, _positive),
    "sample_dA": (parse_real, 1e-3, _positive),
    "pole": (parse_int, 1, lambda s: s in (1, -1)),
    "input": (str, "", None),
    "threads": (parse_int, None, lambda n: n >= 1),
    "out": (str, "out", None),
}


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    params: spin.ModelParams
    values: dict
    explicit: frozenset = field(default_factory=frozenset)

    @property
    def out(self):
        return self.values["out"]

    @property
    def threads(self):
        return self.values["threads"]

    def __getitem__(self, key):
        return self.values[key]

    def hashed_values(self):
        """Values that determine the artifacts (output dir and threads excluded)."""
        return {k: v for k, v in self.values.items() if k not in ("out", "threads")}


def _convert(key, raw, where):
    if key not in SCHEMA:
        raise ConfigError(f"unknown key {key!r} in {where}")
    parser, _, check = SCHEMA[key]
    try:
        value = parser(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key!r} in {where}: {exc}") from None
    if check is not None and not check(value):
        raise ConfigError(f"value {raw!r} for {key!r} in {where} is out of range")
    return value


def read_config_file(path, subcommand):
    """Return {key: (value, where)} from ``path`` for ``subcommand``."""
    if not os.path.isfile(path):
        raise ConfigError(f"config file {path!r} not found")
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    found = {}
    for section in cp.sections():
        if section != "run" and section not in SUBCOMMANDS:
            raise ConfigError(f"unknown section [{section}] in {path}")
        for key, raw in cp[section].items():
            value = _convert(key, raw, f"[{section}] of {path}")
            if section == "run" and key not in found:
                found[key] = (value, f"[run] of {path}")
            elif section == subcommand:
                found[key] = (value, f"[{section}] of {path}")
    return found


def _subcommand_defaults(sub, values):
    v = values
    if v["kind"] is None:
        v["kind"] = DEFAULT_KIND[sub]
    if v["tier"] is None:
        v["tier"] = "both" if sub == "qpt" else "BMF"
    if v["A_grid"] is None:
        v["A_grid"] = parse_grid("0:1pi:11")
    if v["c_grid"] is None:
        v["c_grid"] = parse_grid("0:2pi:21")
    if v["A_max"] is None:
        v["A_max"] = 2.0 * abs(v["c"])
    if v["t_end"] is None:
        if sub in ("oat", "depth"):
            v["t_end"] = v["N"] * math.pi / (2 * abs(v["c"])) if v["c"] else 10.0
        else:
            v["t_end"] = 10.0
    if v["threads"] is None:
        env = os.environ.get(THREADS_ENV, "").strip()
        v["threads"] = _convert("threads", env, f"${THREADS_ENV}") if env else 1
    if sub == "qpt" and "sign" not in v["_explicit"]:
        v["sign"] = -1


def parse_config(subcommand, path=None, overrides=None):
    """Validated :class:`RunConfig`.

    ``overrides`` maps keys to raw strings or ``(raw, where)`` pairs; they
    beat the file.
    A thread count from $BMFQFI_THREADS beats the file but not a flag.
    Errors name the offending key and where it came from.
    """
    if subcommand not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    found = read_config_file(path, subcommand) if path else {}
    env = os.environ.get(THREADS_ENV, "").strip()
    if env:
        found["threads"] = (_convert("threads", env, f"${THREADS_ENV}"), f"${THREADS_ENV}")
    for key, raw in (overrides or {}).items():
        where = f"flag --{key}"
        if isinstance(raw, tuple):
            raw, where = raw
        if raw is None:
            continue
        found[key] = (_convert(key, raw, where), where)
    values = {k: spec[1] for k, spec in SCHEMA.items()}
    values.update({k: v for k, (v, _) in found.items()})
    explicit = frozenset(found)
    values["_explicit"] = explicit
    _subcommand_defaults(subcommand, values)
    del values["_explicit"]

    kind = values["kind"]
    stray = (explicit & DRIVE_FIELDS) - KIND_FIELDS[kind]
    if subcommand == "qpt":
        if kind != "ramp":
            raise ConfigError(f"qpt needs kind=ramp, got kind={kind} ({found['kind'][1]})")
    if subcommand in ("lyap-map", "poincare") and kind != "kicked":
        raise ConfigError(f"{subcommand} needs kind=kicked ({found['kind'][1]})")
    if stray:
        key = sorted(stray)[0]
        raise ConfigError(f"{key!r} ({found[key][1]}) conflicts with kind={kind}")
    if subcommand == "qpt" and values["sign"] != -1:
        raise ConfigError("qpt runs the attractive model; sign must be -1")

    try:
        drive = {
            "off": lambda: spin.DriveProtocol.off(),
            "constant": lambda: spin.DriveProtocol.constant(values["A"]),
            "kicked": lambda: spin.DriveProtocol.kicked(values["A"], values["tau0"], values["tau1"]),
            "ramp": lambda: spin.DriveProtocol.ramp(values["v"]),
        }[kind]()
        params = spin.ModelParams(values["N"], values["c"], drive, values["sign"])
    except ParameterError as exc:
        raise ConfigError(str(exc)) from None
    return RunConfig(subcommand, params, values, explicit)
