"""JSON experiment configuration with field-level validation."""

import copy
import json
from pathlib import Path

import numpy as np

from .errors import DomainError
from .noise import OUKernel, WhiteKernel, load_tabulated_csv
from .phase_space import GaussianState, QuadraticHamiltonian, is_valid_state, sym

CONVENTIONS = {
    "hbar": 1,
    "mass": 1,
    "omega": [[0, 1], [-1, 0]],
    "vacuum_cm": [[0.5, 0], [0, 0.5]],
    "fidelity": "(Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2",
}

DEFAULTS = {
    "hamiltonian": {"type": "free"},
    "kernel": {"type": "ou", "gamma": 1.0, "d_q": 1.0, "d_p": 0.0},
    "times": {"start": 0.0, "stop": 10.0, "step": 0.01},
    "t0_values": [0.0],
    "gammas": [0.1, 1.0, 10.0],
    "states": {"r1": 1.5, "r2": -1.5},
    "triples": [[0.0, 0.5, 1.0], [0.0, 1.0, 2.0], [1.0, 2.0, 4.0], [0.0, 2.0, 5.0]],
    "pairs": [[0.5, 1.0], [1.0, 2.0], [2.0, 5.0]],
    "violation": {"t0": 1.0, "dt": 0.01},
    "montecarlo": {"t0": 0.0, "t": 1.0, "dt": 1e-3, "n_paths": 20000},
    "seed": 0,
    "tolerances": {"monotone": 1e-9, "semigroup": 1e-9, "z_max": 4.0},
    "method": "auto",
}


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending field."""


def _merge(base, override, path=""):
    out = copy.deepcopy(base)
    for key, val in override.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"{where}: unknown field")
        if isinstance(base[key], dict) and key not in ("hamiltonian", "kernel", "states"):
            if not isinstance(val, dict):
                raise ConfigError(f"{where}: expected an object")
            out[key] = _merge(base[key], val, where + ".")
        else:
            out[key] = copy.deepcopy(val)
    return out


def _number(cfg, path, positive=False, nonneg=False):
    node = cfg
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            raise ConfigError(f"{path}: missing")
        node = node[part]
    if isinstance(node, bool) or not isinstance(node, (int, float)) or not np.isfinite(node):
        raise ConfigError(f"{path}: expected a finite number, got {node!r}")
    if positive and not node > 0:
        raise ConfigError(f"{path}: must be > 0")
    if nonneg and node < 0:
        raise ConfigError(f"{path}: must be >= 0")
    return float(node)


def load_config(path=None, seed=None):
    """Read a config file (or take defaults), apply ``seed`` and validate.

    Returns the fully materialised config dictionary.
    """
    raw = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"config: cannot read {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config: top level must be a JSON object")
    cfg = _merge(DEFAULTS, raw)
    if seed is not None:
        cfg["seed"] = seed
    validate(cfg)
    return cfg


def validate(cfg):
    build_hamiltonian(cfg)
    build_kernel(cfg)
    build_states(cfg)
    start = _number(cfg, "times.start", nonneg=True)
    stop = _number(cfg, "times.stop")
    _number(cfg, "times.step", positive=True)
    if stop < start:
        raise ConfigError("times.stop: must be >= times.start")
    for name in ("t0_values", "gammas"):
        vals = cfg[name]
        if not isinstance(vals, list) or not vals:
            raise ConfigError(f"{name}: expected a non-empty list")
        for i, v in enumerate(vals):
            if isinstance(v, bool) or not isinstance(v, (int, float)) or v < 0:
                raise ConfigError(f"{name}[{i}]: expected a number >= 0")
    if any(g <= 0 for g in cfg["gammas"]):
        raise ConfigError("gammas: all values must be > 0")
    for name, size in (("triples", 3), ("pairs", 2)):
        for i, item in enumerate(cfg[name]):
            if not isinstance(item, list) or len(item) != size:
                raise ConfigError(f"{name}[{i}]: expected {size} numbers")
            if any(not isinstance(x, (int, float)) for x in item):
                raise ConfigError(f"{name}[{i}]: expected numbers")
            if list(item) != sorted(item) or item[0] < 0:
                raise ConfigError(f"{name}[{i}]: times must be non-decreasing and >= 0")
    _number(cfg, "violation.t0", positive=True)
    _number(cfg, "violation.dt", positive=True)
    mc_t0 = _number(cfg, "montecarlo.t0", nonneg=True)
    if _number(cfg, "montecarlo.t") <= mc_t0:
        raise ConfigError("montecarlo.t: must be > montecarlo.t0")
    _number(cfg, "montecarlo.dt", positive=True)
    n_paths = cfg["montecarlo"]["n_paths"]
    if not isinstance(n_paths, int) or n_paths < 100:
        raise ConfigError("montecarlo.n_paths: expected an integer >= 100")
    if not isinstance(cfg["seed"], int) or isinstance(cfg["seed"], bool) or cfg["seed"] < 0:
        raise ConfigError("seed: expected a non-negative integer")
    for key in ("monotone", "semigroup", "z_max"):
        _number(cfg, f"tolerances.{key}", positive=True)
    if cfg["method"] not in ("auto", "quadrature"):
        raise ConfigError("method: expected 'auto' or 'quadrature'")


def build_hamiltonian(cfg):
    node = cfg["hamiltonian"]
    kind = node.get("type") if isinstance(node, dict) else None
    if kind == "free":
        return QuadraticHamiltonian.free_particle()
    if kind == "oscillator":
        return QuadraticHamiltonian.oscillator(node.get("omega", 1.0))
    if kind == "hessian":
        try:
            return QuadraticHamiltonian(sym(node["xx"], node["xp"], node["pp"]))
        except (KeyError, TypeError, DomainError) as exc:
            raise ConfigError(f"hamiltonian: needs numeric xx, xp, pp ({exc})") from exc
    raise ConfigError("hamiltonian.type: expected 'free', 'oscillator' or 'hessian'")


def build_kernel(cfg, gamma=None):
    node = cfg["kernel"]
    kind = node.get("type") if isinstance(node, dict) else None
    try:
        if kind == "ou":
            g = node.get("gamma", 1.0) if gamma is None else gamma
            return OUKernel(float(g), float(node.get("d_q", 0.0)), float(node.get("d_p", 0.0)))
        if kind == "white":
            return WhiteKernel(np.array(node["d"], dtype=float))
        if kind == "tabulated":
            return load_tabulated_csv(node["path"])
    except (KeyError, TypeError, ValueError, OSError) as exc:
        raise ConfigError(f"kernel: {exc}") from exc
    raise ConfigError("kernel.type: expected 'ou', 'white' or 'tabulated'")


def build_states(cfg):
    node = cfg["states"]
    if not isinstance(node, dict):
        raise ConfigError("states: expected an object")
    out = []
    for i in (1, 2):
        if f"cm{i}" in node:
            try:
                state = GaussianState(sym(*node[f"cm{i}"]))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"states.cm{i}: expected [xx, xp, pp] ({exc})") from exc
        elif f"r{i}" in node:
            r = node[f"r{i}"]
            if isinstance(r, bool) or not isinstance(r, (int, float)):
                raise ConfigError(f"states.r{i}: expected a number")
            state = GaussianState.squeezed(r)
        else:
            raise ConfigError(f"states: need r{i} or cm{i}")
        if not is_valid_state(state)[0]:
            raise ConfigError(f"states.{'cm' if f'cm{i}' in node else 'r'}{i}: not a physical state")
        out.append(state)
    return tuple(out)


def time_grid(cfg):
    t = cfg["times"]
    n = int(round((t["stop"] - t["start"]) / t["step"]))
    return np.round(t["start"] + t["step"] * np.arange(n + 1), 12)
