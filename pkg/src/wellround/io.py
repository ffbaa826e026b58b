"""JSON/CSV serialization and run configuration.

Every float written by this module is rounded to 12 significant digits so
that repeated runs produce byte-identical files.  Infinite box bounds are
written as null.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .covering import Cover, Element, GridDomain
from .exterior import Flag
from .lattice import GEOM_TOL, RANK_TOL, Lattice, normalize

SIG_DIGITS = 12


def _round(v):
    v = float(v)
    if not math.isfinite(v):
        return None
    r = float(f"{v:.{SIG_DIGITS}g}")
    return 0.0 if r == 0 else r


def plain(obj):
    """Recursively convert numpy and Fraction values to rounded JSON types."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (float, np.floating)):
        return _round(obj)
    return obj


def dumps(obj):
    return json.dumps(plain(obj), indent=2, ensure_ascii=False) + "\n"


def write_json(obj, path):
    Path(path).write_text(dumps(obj), encoding="utf-8")


def load_json(source):
    """Accept a path, a JSON string or an already parsed object."""
    if isinstance(source, (dict, list)):
        return source
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith(("{", "["))):
        return json.loads(Path(source).read_text(encoding="utf-8"))
    return json.loads(source)


# -- lattices and orbits -----------------------------------------------------

def read_lattice(source) -> Lattice:
    data = load_json(source)
    basis = np.array(data["basis"], dtype=float)
    if "dim" in data and basis.shape != (int(data["dim"]),) * 2:
        raise ValueError(f"basis shape {basis.shape} does not match dim {data['dim']}")
    return normalize(basis)


def lattice_to_dict(x):
    return {"dim": x.dim, "basis": x.basis}


def read_orbit_spec(source):
    data = load_json(source)
    if not isinstance(data, dict) or not isinstance(data.get("blocks"), list) or not data["blocks"]:
        raise ValueError("orbit spec needs a nonempty 'blocks' list")
    return data


def trace_csv(result):
    """CSV text with columns t_1..t_{n-1}, spread (t_n = -(t_1 + ... + t_{n-1}))."""
    n = result.lattice.dim
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"t_{i}" for i in range(1, n)] + ["spread"])
    for t, value in result.trace or []:
        w.writerow([repr(_round(v)) for v in t[: n - 1]] + [repr(_round(value))])
    return buf.getvalue()


# -- flags -------------------------------------------------------------------

def read_flag(source) -> Flag:
    """A flag file {"n", "subspaces"} or a lattice file, whose basis b_1..b_n
    gives the flag span(b_1) < span(b_1, b_2) < ... < span(b_1..b_{n-1})."""
    data = load_json(source)
    if "subspaces" in data:
        n = int(data.get("n", len(data["subspaces"][0][0])))
        return Flag(n, data["subspaces"])
    basis = data["basis"]
    n = len(basis)
    return Flag(n, [basis[:k] for k in range(1, n)])


# -- covers ------------------------------------------------------------------

def _bound(v, default):
    return default if v is None else float(v)


def read_cover(source):
    """Returns (Cover, GridDomain) from {"domain": {...}, "elements": [...]}.

    Each box is a pair [lo, hi] of corner vectors; null entries are infinite.
    """
    data = load_json(source)
    d = GridDomain.from_dict(data["domain"])
    elems = []
    for i, e in enumerate(data["elements"]):
        boxes = []
        for lo, hi in e["boxes"]:
            if len(lo) != d.ndim or len(hi) != d.ndim:
                raise ValueError(f"element {i}: box corners must have {d.ndim} coordinates")
            boxes.append(([_bound(v, -math.inf) for v in lo], [_bound(v, math.inf) for v in hi]))
        elems.append(Element(boxes, str(e.get("label", i))))
    if not elems:
        raise ValueError("cover has no elements")
    return Cover(elems), d


def cover_to_dict(c, d):
    return {
        "domain": d.to_dict(),
        "elements": [
            {"label": e.label, "boxes": [[list(lo), list(hi)] for lo, hi in e.boxes]}
            for e in c.elements
        ],
    }


def grid_cover_to_dict(g):
    """Materialised cover: domain plus, per element, the grid indices it contains."""
    return {
        "domain": g.domain.to_dict(),
        "labels": list(g.labels),
        "elements": [np.argwhere(m).tolist() for m in g.masks],
    }


def multiplicity_csv(g):
    """CSV heatmap: one row per domain grid point with its coordinates and multiplicity."""
    d = g.domain
    mask = d.mask()
    pts = d.coords()[mask]
    mult = g.multiplicity()[mask]
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"x_{i}" for i in range(1, d.ndim + 1)] + ["multiplicity"])
    for p, m in zip(pts, mult):
        w.writerow([repr(_round(v)) for v in p] + [int(m)])
    return buf.getvalue()


# -- configuration -------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    budget: int = 5000
    rank_tol: float = RANK_TOL
    geom_tol: float = 1e-6
    eta_margin: float = GEOM_TOL
    output_dir: str | None = None
    format: str = "json"
    tolerances: dict = field(default=None, repr=False)

    def __post_init__(self):
        if self.tolerances:
            for k, v in self.tolerances.items():
                if k not in ("rank_tol", "geom_tol", "eta_margin"):
                    raise ValueError(f"unknown tolerance {k!r}")
                object.__setattr__(self, k, float(v))
            object.__setattr__(self, "tolerances", None)
        if int(self.budget) < 100:
            raise ValueError("budget must be at least 100")
        if min(self.rank_tol, self.geom_tol, self.eta_margin) <= 0:
            raise ValueError("tolerances must be positive")
        if self.format not in ("json", "csv"):
            raise ValueError("format must be json or csv")

    def to_dict(self):
        out = asdict(self)
        out.pop("tolerances")
        return out


def load_config(path=None, **overrides):
    """Defaults, then the JSON config file, then non-None overrides (flags)."""
    values = {}
    if path is not None:
        data = dict(load_json(Path(path)))
        values.update(data.pop("tolerances", None) or {})
        values.update(data)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**values)
