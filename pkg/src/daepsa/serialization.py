"""Deterministic CSV/JSON output and the run configuration.

Floats are always written with 17 significant digits, so identical inputs
give byte-identical files.  In JSON, non-finite floats are written as the
strings ``"inf"``, ``"-inf"`` and ``"nan"`` and complex numbers as
``[re, im]`` pairs.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, fields

import numpy as np

from .errors import InputError
from .pseudospectra import GridSpec


def fmt_float(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0:
        return "0"  # also normalises -0.0
    return format(x, ".17g")


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        s = fmt_float(obj)
        return f'"{s}"' if s in ("inf", "-inf", "nan") else s
    if isinstance(obj, (complex, np.complexfloating)):
        return _encode([obj.real, obj.imag], indent, level)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist(), indent, level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        parts = [_encode(v, indent, level + 1) for v in obj]
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) or isinstance(v, complex) for v in obj) \
                and sum(map(len, parts)) < 100:
            return "[" + ", ".join(parts) + "]"
        return "[\n" + ",\n".join(pad + p for p in parts) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    return _encode(obj, indent, 0) + "\n"


def _atomic_write(path, text: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_json(path, obj) -> None:
    _atomic_write(path, dumps(obj))


def write_csv(path, header, rows) -> None:
    """Rows of numbers (floats formatted with 17 digits) or strings."""
    def cell(v):
        if isinstance(v, str):
            return v
        if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
            return str(int(v))
        return fmt_float(v)

    lines = [",".join(header)]
    lines += [",".join(cell(v) for v in row) for row in rows]
    _atomic_write(path, "\n".join(lines) + "\n")


def field_rows(field):
    """``(re, im, sigmin)`` rows in lattice order (real part outermost)."""
    Z = field.grid.points
    S = field.sigmin
    for i in range(Z.shape[0]):
        for j in range(Z.shape[1]):
            yield (Z[i, j].real, Z[i, j].imag, S[i, j])


def read_field_csv(path):
    """Inverse of the field dump: ``(xs, ys, sigmin[nx, ny])``."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    xs = np.unique(data[:, 0])
    ys = np.unique(data[:, 1])
    return xs, ys, data[:, 2].reshape(xs.size, ys.size)


# ----------------------------------------------------------------------------
# run configuration
# ----------------------------------------------------------------------------

def parse_complex(text) -> complex:
    """``"1.5"`` or ``"1.5,-2"`` -> complex."""
    parts = [p.strip() for p in str(text).split(",")]
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise InputError(f"expected RE or RE,IM, got {text!r}")


def parse_floats(text) -> tuple:
    try:
        vals = tuple(float(s) for s in str(text).split(",") if s.strip())
    except ValueError:
        raise InputError(f"expected a comma-separated list of numbers, got {text!r}") from None
    if not vals:
        raise InputError("empty list")
    return vals


FORMATS = ("csv", "json", "svg")


@dataclass(frozen=True)
class RunConfig:
    """Everything a CLI run depends on, in canonical form."""

    A: str | None = None
    E: str | None = None
    H: str | None = None
    mu: str = "auto"
    d: int | None = None
    grid: str | None = None
    eps: tuple = ()
    tmax: float = 20.0
    nt: int = 401
    k: int | None = None
    seed: int = 0
    out: str = "."
    formats: tuple = FORMATS

    def __post_init__(self):
        if self.mu != "auto":
            z = parse_complex(self.mu)
            object.__setattr__(self, "mu", f"{fmt_float(z.real)},{fmt_float(z.imag)}")
        if self.grid is not None:
            object.__setattr__(self, "grid", GridSpec.parse(self.grid).as_text())
        object.__setattr__(self, "eps", tuple(float(e) for e in self.eps))
        if any(not e > 0 for e in self.eps):
            raise InputError("epsilon values must be positive")
        bad = [f for f in self.formats if f not in FORMATS]
        if bad:
            raise InputError(f"unknown output formats {bad}; choose from {FORMATS}")
        object.__setattr__(self, "formats", tuple(sorted(set(self.formats), key=FORMATS.index)))
        if not self.tmax > 0 or int(self.nt) < 2:
            raise InputError("need tmax > 0 and nt >= 2")
        object.__setattr__(self, "tmax", float(self.tmax))
        object.__setattr__(self, "nt", int(self.nt))
        object.__setattr__(self, "seed", int(self.seed))
        if self.d is not None:
            object.__setattr__(self, "d", int(self.d))
        if self.k is not None:
            object.__setattr__(self, "k", int(self.k))

    @property
    def mu_value(self) -> complex | None:
        return None if self.mu == "auto" else parse_complex(self.mu)

    @property
    def grid_spec(self) -> GridSpec | None:
        return None if self.grid is None else GridSpec.parse(self.grid)

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.tmax, self.nt)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["eps"] = list(self.eps)
        d["formats"] = list(self.formats)
        return dict(sorted(d.items()))

    def to_json(self) -> str:
        return dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise InputError(f"unknown configuration keys {sorted(unknown)}")
        data = dict(data)
        for key in ("tmax",):
            if isinstance(data.get(key), str):
                data[key] = float(data[key])
        if "eps" in data:
            data["eps"] = tuple(float(e) for e in data["eps"])
        if "formats" in data:
            data["formats"] = tuple(data["formats"])
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"configuration is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise InputError("configuration must be a JSON object")
        return cls.from_dict(data)
