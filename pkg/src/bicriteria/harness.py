"""Instance files, the solver registry, run records and curve sweeps."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
import time
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np

from . import continuous as cs
from . import discrete as ds
from .constraints import (
    BaseConstraint,
    Cardinality,
    GraphicMatroid,
    Knapsack,
    Matroid,
    PartitionMatroid,
    UniformMatroid,
    as_knapsack,
    as_region,
    cardinality_polytope,
    density,
    rho,
)
from .core import BicriteriaOutcome, SetFunction, members
from .functions import FAMILIES, DirectedCut
from .multilinear import MultilinearExtension
from .oracle import BRUTE_N, brute_opt

SCHEMA_VERSION = 1

CSV_COLUMNS = [
    "instance_id", "solver", "epsilon", "delta", "T", "dt", "seed", "value",
    "opt", "alpha", "beta_achieved", "beta_bound", "queries", "wall_ms",
]


# ---------------------------------------------------------------- serialization


def _encode(v):
    if isinstance(v, bool) or v is None:
        return v
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, int):
        return v
    if isinstance(v, (list, tuple)):
        return [_encode(w) for w in v]
    raise TypeError(f"cannot encode {type(v).__name__}")


def _decode(v):
    if isinstance(v, str):
        return float(v)
    if isinstance(v, list):
        return tuple(_decode(w) for w in v)
    return v


_FAMILY_TAGS = {cls: tag for tag, cls in FAMILIES.items()}


@dataclass(frozen=True)
class InstanceSpec:
    """Everything needed to rebuild an instance.  Reals are stored as decimal
    strings so files round-trip exactly."""

    family: Any
    constraint: dict
    seed: int = 0

    @property
    def n(self) -> int:
        return self.family.n

    def to_dict(self) -> dict:
        fam = {"type": _FAMILY_TAGS[type(self.family)]}
        for fld in dataclasses.fields(self.family):
            fam[fld.name] = _encode(getattr(self.family, fld.name))
        return {
            "schema_version": SCHEMA_VERSION,
            "n": self.n,
            "family": fam,
            "constraint": self.constraint,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "InstanceSpec":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema version {d.get('schema_version')!r}")
        fam = dict(d["family"])
        tag = fam.pop("type")
        if tag not in FAMILIES:
            raise ValueError(f"unknown family {tag!r}")
        family_cls = FAMILIES[tag]
        kwargs = {}
        for fld in dataclasses.fields(family_cls):
            if fld.name in fam:
                raw = fam[fld.name]
                # integer-valued fields are stored as JSON ints and stay ints
                kwargs[fld.name] = _decode(raw)
        spec = cls(family_cls(**kwargs), dict(d["constraint"]), int(d.get("seed", 0)))
        if d.get("n") != spec.n:
            raise ValueError("ground set size does not match the family")
        return spec

    @classmethod
    def from_json(cls, text: str) -> "InstanceSpec":
        return cls.from_dict(json.loads(text))

    @property
    def instance_id(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:12]

    def build(self):
        f, own = self.family.build(self.seed)
        return f, build_constraint(self.constraint, self.n, own)


def build_constraint(desc: dict, n: int, own=None):
    kind = desc.get("type")
    if kind == "family":
        return own
    if kind == "none":
        return None
    if kind == "cardinality":
        return Cardinality(n, int(desc["k"]))
    if kind == "knapsack":
        return Knapsack([float(p) for p in desc["prices"]], float(desc["budget"]))
    if kind == "uniform_matroid":
        return UniformMatroid(n, int(desc["k"]))
    if kind == "partition_matroid":
        return PartitionMatroid(n, desc["parts"], desc["limits"])
    if kind == "graphic_matroid":
        return GraphicMatroid(int(desc["n_vertices"]), [tuple(e) for e in desc["edges"]])
    raise ValueError(f"unknown constraint type {kind!r}")


def describe_constraint(con) -> dict:
    """Inverse of build_constraint for the builtin constraint types."""
    if isinstance(con, Cardinality):
        return {"type": "cardinality", "k": con.k}
    if isinstance(con, Knapsack):
        return {"type": "knapsack", "prices": [repr(float(p)) for p in con.prices], "budget": repr(con.budget)}
    if isinstance(con, UniformMatroid):
        return {"type": "uniform_matroid", "k": con.k}
    if isinstance(con, PartitionMatroid):
        return {"type": "partition_matroid", "parts": [list(p) for p in con.parts], "limits": con.limits}
    if isinstance(con, GraphicMatroid):
        return {"type": "graphic_matroid", "n_vertices": con.n_vertices, "edges": [list(e) for e in con.edges]}
    raise TypeError(f"cannot describe {type(con).__name__}")


# ---------------------------------------------------------------- solvers


@dataclass
class Params:
    epsilon: float = 0.25
    delta: float | None = None
    T: float | None = None
    dt: float | None = None
    samples: int | None = None
    seed: int = 0
    ell: int = 2


def _ext(f: SetFunction, p: Params) -> MultilinearExtension:
    if p.samples:
        return MultilinearExtension(f, "sampled", samples=p.samples, seed=p.seed)
    return MultilinearExtension(f)


def _log(x: float) -> float:
    return math.log(x)


@dataclass
class Solver:
    run: Callable[[SetFunction, Any, Params], BicriteriaOutcome]
    beta_bound: Callable[[Any, Params], float]
    horizon: Callable[[Params], float | None] = lambda p: None


def _knap_bound(con, p):
    if isinstance(con, Cardinality):
        return float(math.ceil(_log(1 / p.epsilon) - 1e-12))
    return 1 + _log(1 / p.epsilon)


def _sym_bound(con, p):
    return 1 + 0.5 * _log(1 / (2 * p.epsilon))


def _comb_bound(con, p):
    ell = math.ceil(1 / (2 * p.epsilon))
    return 3.0 * ell if isinstance(con, Knapsack) else 2.0 * ell


def _mcg_T(p):
    return p.T if p.T is not None else _log(1 / p.epsilon)


def _more_T(p):
    return p.T if p.T is not None else 0.5 * _log(1 / (2 * p.epsilon))


def _dt(p, T):
    return p.dt if p.dt is not None else (T / 200 if T > 0 else 1.0)


def _more_bound(con, p):
    T = _more_T(p)
    if isinstance(con, (Knapsack, Cardinality)):
        return cs.knapsack_density_cap(density(as_knapsack(con)), T)
    return T


SOLVERS: dict[str, Solver] = {
    "density_greedy": Solver(lambda f, c, p: ds.density_greedy_monotone(f, c, p.epsilon), _knap_bound),
    "matroid_greedy": Solver(
        lambda f, c, p: ds.iterative_matroid_greedy(f, c, p.epsilon),
        lambda c, p: float(math.ceil(math.log2(1 / p.epsilon) - 1e-12)),
    ),
    "warmup": Solver(
        lambda f, c, p: ds.warmup_cardinality(f, c.k, p.epsilon, p.seed),
        lambda c, p: 2.0 * math.ceil(1 / (2 * p.epsilon)),
    ),
    "combinatorial": Solver(lambda f, c, p: ds.combinatorial_general(f, c, p.epsilon, p.seed), _comb_bound),
    "symmetric_greedy": Solver(
        lambda f, c, p: ds.density_greedy_symmetric(f, c, p.epsilon, p.delta if p.delta is not None else 0.05),
        _sym_bound,
    ),
    "mcg": Solver(
        lambda f, c, p: cs.measured_continuous_greedy(_ext(f, p), as_region(c), _mcg_T(p), _dt(p, _mcg_T(p))),
        lambda c, p: _mcg_T(p),
        _mcg_T,
    ),
    "more_mcg": Solver(
        lambda f, c, p: cs.more_mcg(_ext(f, p), as_region(c), _more_T(p), _dt(p, _more_T(p))),
        _more_bound,
        _more_T,
    ),
    "continuous_double_greedy": Solver(
        lambda f, c, p: cs.continuous_double_greedy_knapsack(_ext(f, p), c, p.epsilon, p.dt or 1 / 200),
        lambda c, p: rho(density(as_knapsack(c)), p.epsilon),
        lambda p: 1.0,
    ),
    "general_bicriteria": Solver(
        lambda f, c, p: cs.general_bicriteria(_ext(f, p), as_region(c), p.epsilon, p.seed, p.dt or 0.01),
        lambda c, p: 2 * (1 / p.epsilon + 2),
        lambda p: 2.0,
    ),
    "mcg_multi_opt": Solver(
        lambda f, c, p: cs.mcg_multi_opt(_ext(f, p), as_region(c), _mcg_T(p), p.ell, _dt(p, _mcg_T(p))),
        lambda c, p: _mcg_T(p),
        _mcg_T,
    ),
}


@dataclass
class RunRecord:
    instance_id: str
    solver: str
    epsilon: float
    delta: float | None
    T: float | None
    dt: float | None
    seed: int
    value: float
    opt: float | None
    alpha: float | None
    beta_achieved: float | None
    beta_bound: float
    queries: int
    wall_ms: float

    def row(self) -> list:
        return [_cell(getattr(self, c)) for c in CSV_COLUMNS]

    def key(self) -> tuple:
        """Everything except wall time."""
        return tuple(getattr(self, c) for c in CSV_COLUMNS if c != "wall_ms")


def _cell(v):
    if v is None:
        return "NA"
    if isinstance(v, float):
        return repr(v)
    return v


def run(spec: InstanceSpec, solver: str, params: Params) -> RunRecord:
    if solver not in SOLVERS:
        raise KeyError(f"unknown solver {solver!r}; known: {', '.join(sorted(SOLVERS))}")
    entry = SOLVERS[solver]
    f, con = spec.build()
    start = time.perf_counter()
    out = entry.run(f, con, params)
    wall = (time.perf_counter() - start) * 1000
    opt = None
    if f.n <= BRUTE_N:
        opt = brute_opt(f, con)[1]
    alpha = out.value / opt if opt else None
    T = entry.horizon(params)
    dt = None
    if T is not None:
        dt = params.dt if params.dt is not None else (1 / 200 if solver == "continuous_double_greedy"
                                                      else 0.01 if solver == "general_bicriteria"
                                                      else (T / 200 if T > 0 else 1.0))
    return RunRecord(
        spec.instance_id, solver, params.epsilon, params.delta, T, dt, params.seed,
        float(out.value), opt, alpha, out.infeasibility, float(entry.beta_bound(con, params)),
        int(out.queries), wall,
    )


def write_records(records: Sequence[RunRecord], fmt: str = "csv") -> str:
    if fmt == "json":
        return json.dumps([dict(zip(CSV_COLUMNS, r.row())) for r in records], indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(r.row())
    return buf.getvalue()


# ---------------------------------------------------------------- sweeps


def disjoint_arcs(count: int) -> tuple[SetFunction, Cardinality]:
    """count disjoint arcs 2i -> 2i+1 under a cardinality-1 constraint: the
    optimal sets {2i} are pairwise disjoint."""
    f, _ = DirectedCut(2 * count, tuple((2 * i, 2 * i + 1, 1.0) for i in range(count))).build()
    return f, Cardinality(2 * count, 1)


def sweep_curve(ells: Sequence[int], betas: Sequence[float], *, empirical: bool = True, steps: int = 200) -> list[dict]:
    rows = []
    for ell in ells:
        if ell < 2:
            raise ValueError("ell must be at least 2")
        f, con = disjoint_arcs(ell)
        opt = brute_opt(f, con)[1]
        for beta in betas:
            row = {"ell": ell, "beta": float(beta), "curve": cs.multi_opt_bound(ell, beta)}
            if empirical:
                if beta > 0:
                    out = cs.mcg_multi_opt(MultilinearExtension(f), cardinality_polytope(f.n, 1), beta, ell, beta / steps)
                    row["empirical"] = out.value / opt
                else:
                    row["empirical"] = 0.0
            rows.append(row)
    return rows


def write_sweep(rows: list[dict], fmt: str = "csv") -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    cols = ["ell", "beta", "curve", "empirical"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in cols])
    return buf.getvalue()


# ---------------------------------------------------------------- generators


def generate(kind: str, n: int, seed: int) -> InstanceSpec:
    """Random instance specs used by the `gen` command."""
    from .functions import random_coverage, random_graph

    rng = np.random.default_rng(seed)
    if kind == "coverage":
        fam = random_coverage(n, max(2, 2 * n), seed)
        con = {"type": "cardinality", "k": max(1, n // 4)}
    elif kind == "modular":
        from .functions import Modular

        fam = Modular(tuple(float(round(1 - rng.random(), 6)) for _ in range(n)))
        prices = [round(float(0.2 + 0.8 * rng.random()), 3) for _ in range(n)]
        budget = round(max(max(prices), 0.3 * sum(prices)), 3)
        con = {"type": "knapsack", "prices": [repr(p) for p in prices], "budget": repr(budget)}
    elif kind in ("cut", "dicut"):
        fam = random_graph(n, 0.5, seed, directed=kind == "dicut")
        con = {"type": "cardinality", "k": max(1, n // 3)}
    else:
        raise ValueError(f"unknown generator {kind!r}")
    return InstanceSpec(fam, con, seed)
