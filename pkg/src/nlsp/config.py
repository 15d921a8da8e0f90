"""Experiment configuration: defaults, JSON loading, validation.

Configuration files are flat JSON objects.  Unknown keys are rejected, and
every diagnostic names the offending field and, where recoverable, the line
in the file.  Command-line flags override file values, which override the
documented defaults.  Worker-thread count is a runtime concern and is
deliberately **not** a file key: it comes from the ``--threads`` flag or
the ``NLSP_THREADS`` environment variable and never affects results.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, NlspError
from .mappings import FiniteMeasureSpace, check_p
from .targets import TargetSpace, make_target

#: Default check tolerances, overridable per run via ``tolerances`` in a
#: config file or repeated ``--tolerance NAME=VALUE`` flags.  ``None`` means
#: the check derives its tolerance from the objects involved (the geodesic
#: energy-equality tolerance depends on the target's curvature class).
DEFAULT_TOLERANCES: dict[str, float | None] = {
    "fubini_rel": 1e-13,
    "transport_residual": 2e-3,
    "speed_residual": 2e-3,
    "order_min": 0.9,
    "variation_residual": 1e-12,
    "counterexample_tv": 1e-12,
    "geodesic_residual": 1e-9,
    "curvature_sign": 1e-8,
    "curvature_flat": 1e-10,
    "length_equality": None,
    "speed_consistency": 5e-3,
    "skorokhod_example": 1e-3,
}

_ALLOWED_KEYS = ("seed", "target", "base", "p", "grid", "trials",
                 "tolerances", "output")


def _line_of(text: str, key: str) -> int | None:
    """Best-effort line number of a JSON key, for diagnostics."""
    needle = f'"{key}"'
    for lineno, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return lineno
    return None


def _require_int(value, name: str, minimum: int, line: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"expected an integer, got {value!r}",
                          field=name, line=line)
    if value < minimum:
        raise ConfigError(f"must be >= {minimum}, got {value}",
                          field=name, line=line)
    return int(value)


def validate_seed(value, line: int | None = None) -> int:
    seed = _require_int(value, "seed", 0, line)
    if seed >= 2 ** 64:
        raise ConfigError(f"must fit in 64 bits, got {seed}",
                          field="seed", line=line)
    return seed


def validate_p(value, line: int | None = None) -> float:
    try:
        return check_p(value)
    except NlspError as exc:
        raise ConfigError(str(exc), field="p", line=line) from exc


def validate_grid(value, line: int | None = None) -> tuple[int, ...]:
    """A grid spec is one node count or an increasing list of node counts."""
    if isinstance(value, (int, bool)):
        return (_require_int(value, "grid", 2, line),)
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(
            f"expected a node count or a non-empty list of node counts, "
            f"got {value!r}", field="grid", line=line)
    sizes = tuple(_require_int(v, "grid", 2, line) for v in value)
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ConfigError(
            f"node counts must be strictly increasing, got {list(sizes)}",
            field="grid", line=line)
    return sizes


def validate_tolerances(value, line: int | None = None) -> dict[str, float]:
    if not isinstance(value, dict):
        raise ConfigError(f"expected an object of name -> value, got {value!r}",
                          field="tolerances", line=line)
    out = {}
    for name, tol in value.items():
        if name not in DEFAULT_TOLERANCES:
            raise ConfigError(
                f"unknown tolerance {name!r}; known names: "
                f"{sorted(DEFAULT_TOLERANCES)}",
                field=f"tolerances.{name}", line=line)
        if isinstance(tol, bool) or not isinstance(tol, (int, float)) \
                or not math.isfinite(tol) or tol <= 0.0:
            raise ConfigError(
                f"expected a positive finite number, got {tol!r}",
                field=f"tolerances.{name}", line=line)
        out[str(name)] = float(tol)
    return out


def base_space_from_config(data, line: int | None = None) -> FiniteMeasureSpace:
    """Build a finite measure space from its config form.

    Either an explicit atom list::

        {"atoms": [{"id": "x0", "weight": 0.5}, ...]}

    or a generated family::

        {"count": 4, "weight_law": "uniform" | "linear", "mass": 1.0}
    """
    if not isinstance(data, dict):
        raise ConfigError(f"expected an object, got {data!r}",
                          field="base", line=line)
    if "atoms" in data:
        extra = set(data) - {"atoms"}
        if extra:
            raise ConfigError(
                f"unexpected keys {sorted(extra)} next to 'atoms'",
                field="base", line=line)
        atoms = data["atoms"]
        if not isinstance(atoms, list) or not atoms:
            raise ConfigError(f"'atoms' must be a non-empty list, got {atoms!r}",
                              field="base.atoms", line=line)
        ids, weights = [], []
        for k, atom in enumerate(atoms):
            if not isinstance(atom, dict) or set(atom) != {"id", "weight"}:
                raise ConfigError(
                    f"atom #{k} must be an object with keys 'id' and "
                    f"'weight', got {atom!r}", field="base.atoms", line=line)
            if not isinstance(atom["id"], str):
                raise ConfigError(f"atom #{k} id must be a string, got "
                                  f"{atom['id']!r}", field="base.atoms",
                                  line=line)
            w = atom["weight"]
            if isinstance(w, bool) or not isinstance(w, (int, float)) \
                    or not math.isfinite(w) or w < 0.0:
                raise ConfigError(
                    f"atom #{k} weight must be a finite number >= 0, got "
                    f"{w!r}", field="base.atoms", line=line)
            ids.append(atom["id"])
            weights.append(float(w))
        try:
            return FiniteMeasureSpace(tuple(ids), tuple(weights))
        except NlspError as exc:
            raise ConfigError(str(exc), field="base.atoms", line=line) from exc
    extra = set(data) - {"count", "weight_law", "mass"}
    if extra:
        raise ConfigError(
            f"unknown keys {sorted(extra)}; expected 'atoms' or "
            f"'count'/'weight_law'/'mass'", field="base", line=line)
    if "count" not in data:
        raise ConfigError("an object with neither 'atoms' nor 'count' "
                          "describes no atoms", field="base", line=line)
    count = _require_int(data["count"], "base.count", 1, line)
    law = data.get("weight_law", "uniform")
    mass = data.get("mass", 1.0)
    if isinstance(mass, bool) or not isinstance(mass, (int, float)) \
            or not math.isfinite(mass) or mass <= 0.0:
        raise ConfigError(f"mass must be a positive finite number, got {mass!r}",
                          field="base.mass", line=line)
    if law == "uniform":
        weights = [float(mass) / count] * count
    elif law == "linear":
        total = count * (count + 1) / 2.0
        weights = [float(mass) * (j + 1) / total for j in range(count)]
    else:
        raise ConfigError(
            f"unknown weight law {law!r}; expected 'uniform' or 'linear'",
            field="base.weight_law", line=line)
    return FiniteMeasureSpace(tuple(f"x{j}" for j in range(count)),
                              tuple(weights))


@dataclass
class ExperimentConfig:
    """Resolved experiment settings (defaults < file < flags)."""

    seed: int = 7
    target: dict | None = None
    base: dict | None = None
    p: float | None = None
    grid: tuple[int, ...] | None = None
    trials: int | None = None
    tolerances: dict[str, float] = field(default_factory=dict)
    output: str = "."
    threads: int = 1

    def target_space(self) -> TargetSpace | None:
        if self.target is None:
            return None
        try:
            return make_target(self.target)
        except NlspError as exc:
            raise ConfigError(str(exc), field="target") from exc

    def base_space(self) -> FiniteMeasureSpace | None:
        if self.base is None:
            return None
        return base_space_from_config(self.base)

    def effective_tolerances(self) -> dict[str, float]:
        out = {k: v for k, v in DEFAULT_TOLERANCES.items() if v is not None}
        out.update(self.tolerances)
        return out

    def normalized(self) -> dict:
        """JSON-able echo of the settings that can influence results.

        Output location and thread count are excluded: neither changes a
        single computed number, so two runs that differ only there must
        produce identical summaries.
        """
        out: dict = {"seed": int(self.seed)}
        if self.target is not None:
            out["target"] = self.target
        if self.base is not None:
            out["base"] = self.base
        if self.p is not None:
            out["p"] = "inf" if math.isinf(self.p) else float(self.p)
        if self.grid is not None:
            out["grid"] = [int(n) for n in self.grid]
        if self.trials is not None:
            out["trials"] = int(self.trials)
        if self.tolerances:
            out["tolerances"] = {k: float(v)
                                 for k, v in sorted(self.tolerances.items())}
        return out


def load_config_file(path) -> dict:
    """Read and validate a JSON config file into keyword form."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    if not isinstance(data, dict):
        raise ConfigError(
            f"top-level value must be an object, got {type(data).__name__}")
    out = {}
    for key, value in data.items():
        line = _line_of(text, key)
        if key not in _ALLOWED_KEYS:
            raise ConfigError(
                f"unknown key {key!r}; allowed keys: {list(_ALLOWED_KEYS)} "
                "(worker threads are runtime-only: use --threads or "
                "NLSP_THREADS)", field=key, line=line)
        if key == "seed":
            out["seed"] = validate_seed(value, line)
        elif key == "p":
            out["p"] = validate_p(value, line)
        elif key == "grid":
            out["grid"] = validate_grid(value, line)
        elif key == "trials":
            out["trials"] = _require_int(value, "trials", 1, line)
        elif key == "tolerances":
            out["tolerances"] = validate_tolerances(value, line)
        elif key == "target":
            if not isinstance(value, dict):
                raise ConfigError(f"expected an object, got {value!r}",
                                  field="target", line=line)
            try:
                make_target(value)
            except NlspError as exc:
                raise ConfigError(str(exc), field="target", line=line) from exc
            out["target"] = value
        elif key == "base":
            base_space_from_config(value, line)  # validate eagerly
            out["base"] = value
        elif key == "output":
            if not isinstance(value, str) or not value:
                raise ConfigError(f"expected a non-empty string, got {value!r}",
                                  field="output", line=line)
            out["output"] = value
    return out


def build_config(config_path=None, **flag_overrides) -> ExperimentConfig:
    """Resolve an :class:`ExperimentConfig` from a file plus flag overrides.

    ``flag_overrides`` entries with value ``None`` are ignored; tolerance
    overrides merge on top of (rather than replace) file-level tolerances.
    """
    settings: dict = {}
    if config_path is not None:
        settings.update(load_config_file(config_path))
    file_tols = settings.pop("tolerances", {})
    flag_tols = flag_overrides.pop("tolerances", None) or {}
    for key, value in flag_overrides.items():
        if value is not None:
            settings[key] = value
    merged_tols = dict(file_tols)
    merged_tols.update(validate_tolerances(flag_tols)
                       if flag_tols else {})
    return ExperimentConfig(tolerances=merged_tols, **settings)
