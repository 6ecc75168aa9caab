"""
Parameter configuration spaces with single-parent conditional parameters.

A :class:`ConfigurationSpace` is an ordered list of :class:`ParameterSpec`.
Configurations are total assignments: inactive parameters are stored at their
default, which keeps the numeric encoding fixed-width and archives joinable.
"""
from __future__ import annotations

import enum
import math
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from ._rng import rng_for

KINDS = ("real", "integer", "boolean", "categorical")
NEIGHBOR_STEP = 0.2


class _Sentinel(enum.Enum):
    TOO_LARGE = "too large"

    def __repr__(self) -> str:
        return "TOO_LARGE"


TOO_LARGE = _Sentinel.TOO_LARGE


@dataclass(frozen=True)
class Condition:
    """Parameter is active iff ``parent`` is active and takes one of ``values``."""

    parent: str
    values: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(self.values))


@dataclass(frozen=True)
class ParameterSpec:
    name: str
    kind: str
    domain: tuple
    default: Any
    condition: Condition | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"parameter {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == "boolean":
            domain: tuple = (False, True)
        else:
            domain = tuple(self.domain)
        if self.kind in ("real", "integer"):
            if len(domain) != 2:
                raise ValueError(f"parameter {self.name!r}: numeric domain must be [lo, hi]")
            lo, hi = domain
            if self.kind == "integer":
                lo, hi = _as_int(lo, self.name), _as_int(hi, self.name)
            else:
                lo, hi = float(lo), float(hi)
                if not (math.isfinite(lo) and math.isfinite(hi)):
                    raise ValueError(f"parameter {self.name!r}: bounds must be finite")
            if lo > hi:
                raise ValueError(f"parameter {self.name!r}: lo > hi")
            domain = (lo, hi)
        elif self.kind == "categorical":
            if not domain:
                raise ValueError(f"parameter {self.name!r}: empty categorical domain")
            if len(set(domain)) != len(domain):
                raise ValueError(f"parameter {self.name!r}: duplicate categorical values")
        object.__setattr__(self, "domain", domain)
        default = self.normalize(self.default)
        if not self.contains(default):
            raise ValueError(f"parameter {self.name!r}: default {self.default!r} not in domain")
        object.__setattr__(self, "default", default)

    @property
    def lo(self):
        return self.domain[0]

    @property
    def hi(self):
        return self.domain[-1]

    @property
    def width(self) -> int:
        """Number of encoded coordinates, excluding the activity flag."""
        return len(self.domain) if self.kind == "categorical" else 1

    def normalize(self, value: Any) -> Any:
        """Coerce a JSON-ish value to the canonical Python type for this kind."""
        if self.kind == "real":
            if isinstance(value, (bool, np.bool_)) or not isinstance(value, (int, float, np.number)):
                return value
            return float(value)
        if self.kind == "integer":
            if isinstance(value, (bool, np.bool_)):
                return value
            if isinstance(value, (int, np.integer)):
                return int(value)
            if isinstance(value, (float, np.floating)) and float(value).is_integer():
                return int(value)
            return value
        if self.kind == "boolean":
            if isinstance(value, (bool, np.bool_)):
                return bool(value)
            if isinstance(value, str) and value.lower() in ("true", "false"):
                return value.lower() == "true"
            return value
        return value

    def contains(self, value: Any) -> bool:
        if self.kind == "real":
            return (isinstance(value, float) and math.isfinite(value)
                    and self.lo <= value <= self.hi)
        if self.kind == "integer":
            return (isinstance(value, int) and not isinstance(value, bool)
                    and self.lo <= value <= self.hi)
        if self.kind == "boolean":
            return isinstance(value, bool)
        return any(value == v and type(value) is type(v) for v in self.domain)

    def discrete_values(self, steps: int | None = None) -> list:
        """Domain values in canonical order; reals need ``steps``."""
        if self.kind == "real":
            if steps is None:
                raise ValueError("real parameters need a discretization step count")
            if steps == 1 or self.lo == self.hi:
                return [float(self.lo)]
            return [float(v) for v in np.linspace(self.lo, self.hi, steps)]
        if self.kind == "integer":
            return list(range(self.lo, self.hi + 1))
        return list(self.domain)

    def to_dict(self) -> dict:
        d: dict[str, Any] = {"name": self.name, "kind": self.kind,
                             "domain": list(self.domain), "default": self.default}
        if self.condition is not None:
            d["condition"] = {"parent": self.condition.parent,
                              "values": list(self.condition.values)}
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "ParameterSpec":
        cond = d.get("condition")
        kind = d["kind"]
        domain = d.get("domain", (False, True)) if kind == "boolean" else d["domain"]
        return cls(name=d["name"], kind=kind, domain=tuple(domain), default=d["default"],
                   condition=Condition(cond["parent"], tuple(cond["values"])) if cond else None)


def _as_int(v: Any, name: str) -> int:
    if isinstance(v, bool) or not float(v).is_integer():
        raise ValueError(f"parameter {name!r}: integer bounds must be integral")
    return int(v)


class Configuration(Mapping):
    """Immutable mapping parameter-name -> value."""

    __slots__ = ("_data", "_hash")

    def __init__(self, assignments: Mapping[str, Any] | None = None, **kwargs: Any) -> None:
        data = dict(assignments or {})
        data.update(kwargs)
        self._data = data
        self._hash: int | None = None

    def __getitem__(self, key: str) -> Any:
        return self._data[key]

    def __iter__(self) -> Iterator[str]:
        return iter(self._data)

    def __len__(self) -> int:
        return len(self._data)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._data.items()))
        return self._hash

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Mapping):
            return dict(self._data) == dict(other)
        return NotImplemented

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v!r}" for k, v in self._data.items())
        return f"Configuration({inner})"

    def replace(self, **changes: Any) -> "Configuration":
        data = dict(self._data)
        data.update(changes)
        return Configuration(data)


@dataclass(frozen=True)
class ValidityReport:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class Slot:
    """Where one parameter lives in the encoded vector."""

    name: str
    start: int
    stop: int
    flag: int | None  # index of the activity flag, conditional parameters only


@dataclass(frozen=True)
class ConfigurationSpace:
    params: tuple[ParameterSpec, ...]
    _by_name: dict = field(init=False, repr=False, compare=False)
    layout: tuple[Slot, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        params = tuple(self.params)
        object.__setattr__(self, "params", params)
        by_name: dict[str, ParameterSpec] = {}
        for p in params:
            if p.name in by_name:
                raise ValueError(f"duplicate parameter name {p.name!r}")
            if p.condition is not None:
                parent = by_name.get(p.condition.parent)
                # parents declared first; this also rules out cycles
                if parent is None:
                    raise ValueError(f"parameter {p.name!r}: condition parent "
                                     f"{p.condition.parent!r} must be declared before it")
                bad = [v for v in p.condition.values if not parent.contains(parent.normalize(v))]
                if bad:
                    raise ValueError(f"parameter {p.name!r}: condition values {bad!r} "
                                     f"outside the domain of {parent.name!r}")
                object.__setattr__(p, "condition", Condition(
                    p.condition.parent, tuple(parent.normalize(v) for v in p.condition.values)))
            by_name[p.name] = p
        object.__setattr__(self, "_by_name", by_name)
        slots, pos = [], 0
        for p in params:
            flag = None
            if p.condition is not None:
                flag, pos = pos, pos + 1
            slots.append(Slot(p.name, pos, pos + p.width, flag))
            pos += p.width
        object.__setattr__(self, "layout", tuple(slots))

    @property
    def q(self) -> int:
        return len(self.params)

    @property
    def names(self) -> list[str]:
        return [p.name for p in self.params]

    @property
    def dim(self) -> int:
        return self.layout[-1].stop if self.layout else 0

    def __getitem__(self, name: str) -> ParameterSpec:
        return self._by_name[name]

    def __contains__(self, name: object) -> bool:
        return name in self._by_name

    def __iter__(self) -> Iterator[ParameterSpec]:
        return iter(self.params)

    def __len__(self) -> int:
        return len(self.params)

    # -- construction helpers -------------------------------------------------

    def default(self) -> Configuration:
        return Configuration({p.name: p.default for p in self.params})

    def make(self, values: Mapping[str, Any] | None = None, **kwargs: Any) -> Configuration:
        """Build a configuration: missing parameters get defaults, inactive ones are reset.

        Raises ValueError for unknown names or out-of-domain values.
        """
        given = dict(values or {})
        given.update(kwargs)
        unknown = set(given) - set(self._by_name)
        if unknown:
            raise ValueError(f"unknown parameters {sorted(unknown)}")
        data = {p.name: p.normalize(given.get(p.name, p.default)) for p in self.params}
        cfg = self.repair(Configuration(data))
        report = validate(self, cfg)
        if not report:
            raise ValueError("; ".join(report.violations))
        return cfg

    def is_active(self, name: str, assignment: Mapping[str, Any]) -> bool:
        p = self._by_name[name]
        while p.condition is not None:
            if assignment.get(p.condition.parent) not in p.condition.values:
                return False
            p = self._by_name[p.condition.parent]
        return True

    def active_names(self, cfg: Mapping[str, Any]) -> list[str]:
        return [p.name for p in self.params if self.is_active(p.name, cfg)]

    def repair(self, cfg: Mapping[str, Any]) -> Configuration:
        """Reset every inactive parameter to its default (top-down)."""
        data = dict(cfg)
        for p in self.params:
            if p.condition is not None and not self.is_active(p.name, data):
                data[p.name] = p.default
        return Configuration(data)

    # -- canonical forms ----------------------------------------------------------

    def key(self, cfg: Mapping[str, Any]) -> tuple[float, ...]:
        """Canonical encoding as a hashable, totally ordered tuple."""
        return tuple(float(v) for v in encode(self, cfg))

    def digest(self, cfg: Mapping[str, Any]) -> str:
        return ",".join(f"{v:.12g}" for v in encode(self, cfg))

    def to_list(self) -> list[dict]:
        return [p.to_dict() for p in self.params]

    @classmethod
    def from_list(cls, decls: Sequence[Mapping]) -> "ConfigurationSpace":
        return cls(tuple(ParameterSpec.from_dict(d) for d in decls))

    def config_to_json(self, cfg: Mapping[str, Any]) -> dict:
        return {p.name: cfg[p.name] for p in self.params}


def validate(space: ConfigurationSpace, cfg: Mapping[str, Any]) -> ValidityReport:
    """Check a configuration against the space; violations are returned, not raised."""
    violations: list[str] = []
    for name in cfg:
        if name not in space:
            violations.append(f"unknown parameter {name}")
    for p in space.params:
        if p.name not in cfg:
            violations.append(f"missing parameter {p.name}")
            continue
        value = cfg[p.name]
        if not p.contains(value):
            violations.append(f"{p.name} out of domain")
        elif not space.is_active(p.name, cfg) and value != p.default:
            violations.append(f"non-default inactive value {p.name}")
    return ValidityReport(tuple(violations))


def sample_uniform(space: ConfigurationSpace, seed: int, n: int) -> list[Configuration]:
    """Draw ``n`` feasible configurations, parameters independent and uniform."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = rng_for(seed)
    return [_draw(space, rng) for _ in range(n)]


def _draw(space: ConfigurationSpace, rng: np.random.Generator) -> Configuration:
    data: dict[str, Any] = {}
    for p in space.params:
        if not space.is_active(p.name, data):
            data[p.name] = p.default
        else:
            data[p.name] = _draw_value(p, rng)
    return Configuration(data)


def _draw_value(p: ParameterSpec, rng: np.random.Generator) -> Any:
    if p.kind == "real":
        return float(rng.uniform(p.lo, p.hi))
    if p.kind == "integer":
        return int(rng.integers(p.lo, p.hi + 1))
    if p.kind == "boolean":
        return bool(rng.random() < 0.5)
    return p.domain[int(rng.integers(len(p.domain)))]


def encode(space: ConfigurationSpace, cfg: Mapping[str, Any]) -> np.ndarray:
    out = np.zeros(space.dim)
    for p, slot in zip(space.params, space.layout):
        active = space.is_active(p.name, cfg)
        value = cfg[p.name] if active else p.default
        if slot.flag is not None:
            out[slot.flag] = 1.0 if active else 0.0
        if p.kind in ("real", "integer"):
            out[slot.start] = 0.0 if p.hi == p.lo else (value - p.lo) / (p.hi - p.lo)
        elif p.kind == "boolean":
            out[slot.start] = 1.0 if value else 0.0
        else:
            out[slot.start + p.domain.index(value)] = 1.0
    return out


def decode(space: ConfigurationSpace, values: Sequence[float]) -> Configuration:
    """Inverse of :func:`encode`; one-hot blocks by argmax, numerics clamped."""
    v = np.asarray(values, dtype=float)
    if v.shape != (space.dim,):
        raise ValueError(f"expected vector of dimension {space.dim}, got shape {v.shape}")
    data: dict[str, Any] = {}
    for p, slot in zip(space.params, space.layout):
        if p.kind in ("real", "integer"):
            u = min(max(float(v[slot.start]), 0.0), 1.0)
            x = p.lo + u * (p.hi - p.lo)
            if p.kind == "integer":
                x = min(max(int(math.floor(x + 0.5)), p.lo), p.hi)
            else:
                x = min(max(float(x), p.lo), p.hi)
            data[p.name] = x
        elif p.kind == "boolean":
            data[p.name] = bool(v[slot.start] >= 0.5)
        else:
            data[p.name] = p.domain[int(np.argmax(v[slot.start:slot.stop]))]
    return space.repair(data)


def neighbors(space: ConfigurationSpace, cfg: Mapping[str, Any], seed: int,
              k: int) -> list[Configuration]:
    """Up to ``k`` distinct one-parameter moves away from ``cfg``.

    Numeric parameters take a truncated Gaussian step of scale 0.2*(hi-lo);
    booleans/categoricals switch to a different value. Descendants that become
    inactive are reset to their defaults.
    """
    cfg = Configuration(cfg)
    movable = [p for p in space.params
               if space.is_active(p.name, cfg) and _n_moves(p) > 0]
    if not movable or k < 1:
        return []
    if all(p.kind != "real" for p in movable):
        everything = [space.repair(cfg.replace(**{p.name: v}))
                      for p in movable for v in p.discrete_values() if v != cfg[p.name]]
        if len(everything) <= k:
            return everything
    rng = rng_for(seed)
    seen: set[Configuration] = set()
    out: list[Configuration] = []
    attempts = 0
    while len(out) < k and attempts < 100 * k + 100:
        attempts += 1
        p = movable[int(rng.integers(len(movable)))]
        value = _move_value(p, cfg[p.name], rng)
        if value is None or value == cfg[p.name]:
            continue
        cand = space.repair(cfg.replace(**{p.name: value}))
        if cand in seen:
            continue
        seen.add(cand)
        out.append(cand)
    return out


def _n_moves(p: ParameterSpec) -> float:
    if p.kind == "real":
        return math.inf if p.hi > p.lo else 0
    if p.kind == "integer":
        return p.hi - p.lo
    return len(p.domain) - 1


def _move_value(p: ParameterSpec, current: Any, rng: np.random.Generator) -> Any:
    if p.kind in ("real", "integer"):
        scale = NEIGHBOR_STEP * (p.hi - p.lo)
        for _ in range(20):
            x = current + rng.normal(0.0, scale)
            if p.lo <= x <= p.hi:
                break
        else:
            x = min(max(x, p.lo), p.hi)
        if p.kind == "integer":
            x = int(math.floor(x + 0.5))
            if x == current:
                x = current + (1 if rng.random() < 0.5 else -1)
            x = min(max(x, p.lo), p.hi)
            return x
        return float(x)
    others = [v for v in p.discrete_values() if v != current]
    return others[int(rng.integers(len(others)))]


def enumerate_space(space: ConfigurationSpace, limit: int,
                    steps: int | None = None) -> list[Configuration] | _Sentinel:
    """The full feasible set in lexicographic parameter order, or ``TOO_LARGE``.

    Spaces with real parameters are infinite unless ``steps`` discretizes them
    (see :func:`grid`). Inactive branches collapse to the default value.
    """
    if limit < 1:
        raise ValueError("limit must be >= 1")
    if steps is None and any(p.kind == "real" for p in space.params):
        return TOO_LARGE
    values = [p.discrete_values(steps) for p in space.params]
    out: list[Configuration] = []

    def walk(i: int, data: dict) -> bool:
        if i == len(space.params):
            out.append(Configuration(dict(data)))
            return len(out) <= limit
        p = space.params[i]
        options = values[i] if space.is_active(p.name, data) else [p.default]
        for v in options:
            data[p.name] = v
            if not walk(i + 1, data):
                return False
        del data[p.name]
        return True

    if not walk(0, {}):
        return TOO_LARGE
    return out


def grid(space: ConfigurationSpace, steps: int,
         limit: int = 10**6) -> list[Configuration] | _Sentinel:
    """Enumerate the space with each real parameter discretized to ``steps`` points."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    return enumerate_space(space, limit, steps=steps)
