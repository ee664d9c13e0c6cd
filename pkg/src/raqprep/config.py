"""Config-file parsing for the CLI: flat structured text with nested sections
(INI syntax via configparser). Every field is optional with a documented
default; unknown sections or keys are hard errors so typos cannot silently
corrupt a sweep.
"""

from __future__ import annotations

import configparser
from pathlib import Path
from typing import Optional

from .dilation import CoolingConfig
from .engine import GradientMode, RandomizationStrategy, RunConfig, StopRule
from .linalg import PauliString
from .sampling import TwoDesignConfig, weight_graded_pool
from .sweeps import SweepSpec, log_checkpoints


class ConfigError(ValueError):
    """Invalid command line or config file content."""


_KNOWN_KEYS = {
    "run": {"name", "n_qubits", "hamiltonian", "gamma", "max_steps", "seed",
            "trials", "gradient_mode", "descent_repeats"},
    "strategy": {"kind", "generator", "design_flavor", "design_layers", "pool"},
    "stop": {"alpha_threshold", "grad_tol", "patience"},
    "sweep": {"kind", "name", "values", "trials", "checkpoints_per_decade"},
    "cool": {"n_system", "n_ancilla", "target", "rho0", "max_steps", "seed",
             "trials", "gamma", "fidelity_threshold"},
}

RUN_DEFAULTS = {
    "name": "run",
    "hamiltonian": "ising:complete:2",
    "gamma": "auto",
    "max_steps": 1000,
    "seed": 0,
    "trials": 1,
    "gradient_mode": "exact",
}


def _read(path: Optional[Path], text: Optional[str] = None) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        if text is not None:
            parser.read_string(text)
        elif path is not None:
            with open(path) as fh:
                parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    for section in parser.sections():
        if section not in _KNOWN_KEYS:
            raise ConfigError(f"unknown config section [{section}]")
        for key in parser[section]:
            if key not in _KNOWN_KEYS[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
    return parser


def _get(parser, section: str, key: str, default=None) -> Optional[str]:
    if parser.has_section(section) and key in parser[section]:
        return parser[section][key].strip()
    return default


def _get_int(parser, section, key, default):
    raw = _get(parser, section, key)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} must be an integer, got {raw!r}") from exc


def _get_float(parser, section, key, default):
    raw = _get(parser, section, key)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} must be a number, got {raw!r}") from exc


def parse_generator(text: str, n_qubits: int) -> PauliString:
    """'X@0' (letter at qubit) or a full label like 'XIZ'."""
    if "@" in text:
        letter, _, qubit = text.partition("@")
        if letter not in ("X", "Y", "Z"):
            raise ConfigError(f"generator letter must be X/Y/Z, got {letter!r}")
        q = int(qubit)
        if not 0 <= q < n_qubits:
            raise ConfigError(f"generator qubit {q} out of range for n={n_qubits}")
        return PauliString.single(letter, q, n_qubits)
    if len(text) != n_qubits:
        raise ConfigError(f"generator label {text!r} must have length {n_qubits}")
    return PauliString.from_label(text)


def parse_pool(text: str, n_qubits: int) -> tuple:
    """'full', 'weight:<w>', 'size:<m>', or comma-separated labels."""
    if text == "full":
        return weight_graded_pool(n_qubits)
    if text.startswith("weight:"):
        return weight_graded_pool(n_qubits, max_weight=int(text.split(":", 1)[1]))
    if text.startswith("size:"):
        size = int(text.split(":", 1)[1])
        graded = weight_graded_pool(n_qubits)
        if not 1 <= size <= len(graded):
            raise ConfigError(f"pool size {size} out of range (1..{len(graded)})")
        return graded[:size]
    try:
        return tuple(PauliString.from_label(lbl.strip()) for lbl in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad pool spec {text!r}: {exc}") from exc


def _infer_n_qubits(parser) -> int:
    explicit = _get_int(parser, "run", "n_qubits", None)
    if explicit is not None:
        return explicit
    spec = _get(parser, "run", "hamiltonian", RUN_DEFAULTS["hamiltonian"])
    from . import hamiltonians as ham

    try:
        return ham.hamiltonian_from_spec(spec).n_qubits
    except (ValueError, OSError) as exc:
        raise ConfigError(
            f"n_qubits not given and not inferrable from hamiltonian {spec!r}: {exc}"
        ) from exc


def _parse_strategy(parser, n_qubits: int) -> RandomizationStrategy:
    kind = _get(parser, "strategy", "kind", "haar")
    generator_text = _get(parser, "strategy", "generator")
    generator = parse_generator(generator_text, n_qubits) if generator_text else None
    design = TwoDesignConfig(
        flavor=_get(parser, "strategy", "design_flavor", "clifford"),
        layers=_get_int(parser, "strategy", "design_layers", 1),
    )
    pool = ()
    if kind == "pool":
        pool = parse_pool(_get(parser, "strategy", "pool", "full"), n_qubits)
    try:
        return RandomizationStrategy(kind, generator=generator, design=design, pool=pool)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _parse_stop(parser) -> StopRule:
    return StopRule(
        alpha_threshold=_get_float(parser, "stop", "alpha_threshold", None),
        grad_tol=_get_float(parser, "stop", "grad_tol", None),
        patience=_get_int(parser, "stop", "patience", 1),
    )


def load_run_config(path: Optional[Path] = None, text: Optional[str] = None) -> tuple:
    """Returns (RunConfig, run name)."""
    parser = _read(path, text)
    n_qubits = _infer_n_qubits(parser)
    gamma_raw = _get(parser, "run", "gamma", RUN_DEFAULTS["gamma"])
    gamma = gamma_raw if gamma_raw == "auto" else float(gamma_raw)
    try:
        cfg = RunConfig(
            n_qubits=n_qubits,
            hamiltonian=_get(parser, "run", "hamiltonian", RUN_DEFAULTS["hamiltonian"]),
            strategy=_parse_strategy(parser, n_qubits),
            gamma=gamma,
            max_steps=_get_int(parser, "run", "max_steps", RUN_DEFAULTS["max_steps"]),
            stop=_parse_stop(parser),
            gradient_mode=GradientMode.parse(
                _get(parser, "run", "gradient_mode", RUN_DEFAULTS["gradient_mode"])),
            descent_repeats=_get_int(parser, "run", "descent_repeats", 1),
            seed=_get_int(parser, "run", "seed", RUN_DEFAULTS["seed"]),
            trials=_get_int(parser, "run", "trials", RUN_DEFAULTS["trials"]),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg, _get(parser, "run", "name", RUN_DEFAULTS["name"])


SWEEP_KINDS = ("fig2", "fig3a", "fig3b", "fig3_insets")


def load_sweep_spec(path: Optional[Path] = None, text: Optional[str] = None) -> tuple:
    """Returns (SweepSpec, sweep kind)."""
    parser = _read(path, text)
    kind = _get(parser, "sweep", "kind", "fig2")
    if kind not in SWEEP_KINDS:
        raise ConfigError(f"sweep kind must be one of {SWEEP_KINDS}, got {kind!r}")
    base, _ = load_run_config(path, text)
    trials = _get_int(parser, "sweep", "trials", 100)
    values_text = _get(parser, "sweep", "values")
    if values_text:
        try:
            values = tuple(int(v.strip()) for v in values_text.split(","))
        except ValueError as exc:
            raise ConfigError(f"[sweep] values must be integers: {values_text!r}") from exc
    elif kind in ("fig2", "fig3a"):
        per_decade = _get_int(parser, "sweep", "checkpoints_per_decade", 10)
        values = log_checkpoints(base.max_steps, per_decade)
    elif kind == "fig3b":
        from .sweeps import geometric_pool_sizes

        values = geometric_pool_sizes(base.n_qubits)
    else:
        values = (3, 4, 5, 6, 7)
    axis = {"fig2": "steps_M", "fig3a": "steps_M",
            "fig3b": "pool_size", "fig3_insets": "n_qubits"}[kind]
    name = _get(parser, "sweep", "name", kind)
    try:
        spec = SweepSpec(name=name, base=base, axis=axis, values=values, trials=trials)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return spec, kind


def load_cooling_config(path: Optional[Path] = None, text: Optional[str] = None) -> CoolingConfig:
    parser = _read(path, text)
    n_system = _get_int(parser, "cool", "n_system", 1)
    n_ancilla = _get_int(parser, "cool", "n_ancilla", 1)
    n_total = n_system + n_ancilla
    strategy = _parse_strategy(parser, n_total)
    gamma_raw = _get(parser, "cool", "gamma", "auto")
    threshold = _get_float(parser, "cool", "fidelity_threshold", None)
    try:
        return CoolingConfig(
            n_system=n_system,
            n_ancilla=n_ancilla,
            target=_get(parser, "cool", "target", "zero"),
            rho0_system=_get(parser, "cool", "rho0", "maximally_mixed"),
            strategy=strategy,
            gamma=gamma_raw if gamma_raw == "auto" else float(gamma_raw),
            max_steps=_get_int(parser, "cool", "max_steps", 1000),
            stop=StopRule(alpha_threshold=threshold),
            seed=_get_int(parser, "cool", "seed", 0),
            trials=_get_int(parser, "cool", "trials", 1),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def flatten_echo(echo: dict, prefix: str = "") -> list:
    """Flatten a nested config echo into sorted 'key = value' lines."""
    lines = []
    for key in sorted(echo):
        value = echo[key]
        full = f"{prefix}{key}"
        if isinstance(value, dict):
            lines.extend(flatten_echo(value, prefix=f"{full}."))
        else:
            lines.append(f"{full} = {value}")
    return lines
