"""Seeded generators for constraint systems, objectives, and initial points.

Constraint rows are unit-norm with a Bernoulli sparsity pattern plus one
guaranteed nonzero per row; right-hand sides are built around a random
witness point so every instance contains a ball of radius 0.1 (around the
witness with the offset variant, around the origin without it). Quadratic
objectives draw their sparsity from Erdos-Renyi or Barabasi-Albert graphs;
transmit-power instances linearise the capacity requirements exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import networkx as nx
import numpy as np

from .kernels import scatter
from .model import SparseConstraintSystem

# Stream tags: one independent substream per concern, so (cfg, seed) pins
# every artefact bit-exactly no matter which generator wraps which.
_TAG_CONSTRAINTS = 0
_TAG_OBJECTIVE = 1
_TAG_WITNESS = 2

DEFAULT_SIGMA = 0.1
DEFAULT_P_MAX = 1.0
INTERIOR_RADIUS = 0.1


def _rng(seed, tag):
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(tag,)))


@dataclass(frozen=True)
class GeneratorConfig:
    n: int
    m: int
    d: int = 3
    delta: float = 1.0
    offset: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("degree d must be >= 1")
        if self.delta < 0:
            raise ValueError("delta must be >= 0")


@dataclass
class LinearObjective:
    c: np.ndarray
    kind: str = "linear"


@dataclass
class QuadraticObjective:
    c: np.ndarray
    q: np.ndarray
    topology: str
    kind: str = "quadratic"


@dataclass
class TransmitPowerObjective:
    h: np.ndarray
    sigma: float
    s: np.ndarray
    p_max: float
    kind: str = "transmit_power"


@dataclass
class ProblemInstance:
    system: SparseConstraintSystem
    objective: object | None
    seed: int
    family: str
    d: int
    delta: float


def _constraints_with_witness(cfg):
    rng = _rng(cfg.seed, _TAG_CONSTRAINTS)
    n, m, d = cfg.n, cfg.m, cfg.d
    mask = rng.random((m, n)) < (d - 1) / n
    extra = rng.integers(0, n, size=m)
    mask[np.arange(m), extra] = True

    triplets = []
    for i in range(m):
        cols = np.nonzero(mask[i])[0]
        vals = rng.standard_normal(cols.size)
        vals /= np.linalg.norm(vals)
        triplets.extend((i, int(j), float(v)) for j, v in zip(cols, vals))

    s = rng.standard_normal(n)
    rows = np.array([t[0] for t in triplets], dtype=np.int64)
    cols = np.array([t[1] for t in triplets], dtype=np.int64)
    vals = np.array([t[2] for t in triplets])
    a_s = scatter(rows, vals * s[cols], m)
    if cfg.offset:
        u = rng.uniform(INTERIOR_RADIUS, 1.0, m)
        b = a_s + u
        witness = s
    else:
        # rows are unit norm, so b_i >= 0.1 puts the origin-centred
        # 0.1-ball inside every halfspace
        b = np.maximum(a_s, INTERIOR_RADIUS)
        witness = np.zeros(n)
    return SparseConstraintSystem(n, m, triplets, b), witness


def gen_constraints(cfg):
    """Random sparse unit-row system with a guaranteed interior ball."""
    return _constraints_with_witness(cfg)[0]


def interior_point(cfg):
    """A strictly feasible point of ``gen_constraints(cfg)`` (slack >= 0.1)."""
    return _constraints_with_witness(cfg)[1]


def gen_initial_point(n, delta, seed):
    """Coordinatewise uniform point in [-delta, delta]^n."""
    if delta < 0:
        raise ValueError("delta must be >= 0")
    rng = np.random.default_rng(seed)
    return rng.uniform(-delta, delta, n)


def gen_lp(cfg):
    system = gen_constraints(cfg)
    rng = _rng(cfg.seed, _TAG_OBJECTIVE)
    c = rng.uniform(-1.0, 1.0, cfg.n)
    return ProblemInstance(system, LinearObjective(c=c), cfg.seed, "lp", cfg.d, cfg.delta)


def gen_quadratic(cfg, topology):
    """Quadratic objective with ER or BA sparsity; entries U(-10, 10), symmetric."""
    if topology not in ("er", "ba"):
        raise ValueError("topology must be 'er' or 'ba'")
    system = gen_constraints(cfg)
    rng = _rng(cfg.seed, _TAG_OBJECTIVE)
    c = rng.uniform(-1.0, 1.0, cfg.n)
    gseed = int(rng.integers(2**31 - 1))
    if topology == "er":
        graph = nx.gnp_random_graph(cfg.n, cfg.d / cfg.n, seed=gseed)
    else:
        graph = nx.barabasi_albert_graph(cfg.n, max(1, round(cfg.d / 2)), seed=gseed)
    q = np.zeros((cfg.n, cfg.n))
    for i, j in sorted(graph.edges()):
        v = rng.uniform(-10.0, 10.0)
        q[i, j] = v
        q[j, i] = v
    return ProblemInstance(
        system,
        QuadraticObjective(c=c, q=q, topology=topology),
        cfg.seed,
        f"quad-{topology}",
        cfg.d,
        cfg.delta,
    )


def capacities(h, x, sigma):
    """Channel capacities log(1 + SINR_i) for powers x >= 0."""
    x = np.asarray(x, dtype=np.float64)
    diag = np.diag(h)
    interference = h @ x - diag * x
    return np.log1p(diag * x / (interference + sigma**2))


def transmit_witness(cfg, p_max=DEFAULT_P_MAX):
    """The power vector whose halved capacities become the requirements."""
    rng = _rng(cfg.seed, _TAG_WITNESS)
    return rng.uniform(INTERIOR_RADIUS, p_max, cfg.n)


def gen_transmit_power(cfg, sigma=DEFAULT_SIGMA, p_max=DEFAULT_P_MAX):
    """Geometric-graph gains with capacity requirements met by construction.

    Emits the exact linearisation of log(1 + SINR_i) >= s_i (valid for
    x >= 0) together with the box rows 0 <= x_i <= p_max, so m = 3n. The
    requirements are half the capacities of a random interior power vector,
    which is therefore strictly feasible.
    """
    rng = _rng(cfg.seed, _TAG_OBJECTIVE)
    n = cfg.n
    pos = rng.random((n, 2))
    radius = math.sqrt(cfg.d / (math.pi * max(n - 1, 1)))
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=2))
    h = np.where(dist < radius, (dist + 1.0) ** -3, 0.0)
    np.fill_diagonal(h, 1.0)

    witness = transmit_witness(cfg, p_max)
    s = 0.5 * capacities(h, witness, sigma)

    triplets = []
    b = np.empty(3 * n)
    growth = np.expm1(s)
    for i in range(n):
        for j in range(n):
            if j != i and h[i, j] > 0:
                triplets.append((i, j, float(growth[i] * h[i, j])))
        triplets.append((i, i, float(-h[i, i])))
        b[i] = -growth[i] * sigma**2
    for i in range(n):
        triplets.append((n + i, i, 1.0))
        b[n + i] = p_max
        triplets.append((2 * n + i, i, -1.0))
        b[2 * n + i] = 0.0
    system = SparseConstraintSystem(n, 3 * n, triplets, b)
    return ProblemInstance(
        system,
        TransmitPowerObjective(h=h, sigma=sigma, s=s, p_max=p_max),
        cfg.seed,
        "power",
        cfg.d,
        cfg.delta,
    )


FAMILIES = ("constraints-only", "lp", "quad-er", "quad-ba", "power")


def gen_instance(family, cfg):
    """Dispatch by family tag; see FAMILIES."""
    if family == "constraints-only":
        system = gen_constraints(cfg)
        return ProblemInstance(system, None, cfg.seed, family, cfg.d, cfg.delta)
    if family == "lp":
        return gen_lp(cfg)
    if family == "quad-er":
        return gen_quadratic(cfg, "er")
    if family == "quad-ba":
        return gen_quadratic(cfg, "ba")
    if family == "power":
        return gen_transmit_power(cfg)
    raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")


def _objective_to_doc(obj):
    if obj is None:
        return None
    if isinstance(obj, LinearObjective):
        return {"kind": "linear", "c": [float(v) for v in obj.c]}
    if isinstance(obj, QuadraticObjective):
        rows, cols = np.nonzero(obj.q)
        return {
            "kind": "quadratic",
            "c": [float(v) for v in obj.c],
            "q_triplets": [
                [int(i), int(j), float(obj.q[i, j])] for i, j in zip(rows, cols)
            ],
            "topology": obj.topology,
        }
    if isinstance(obj, TransmitPowerObjective):
        rows, cols = np.nonzero(obj.h)
        return {
            "kind": "transmit_power",
            "h_triplets": [
                [int(i), int(j), float(obj.h[i, j])] for i, j in zip(rows, cols)
            ],
            "sigma": float(obj.sigma),
            "s": [float(v) for v in obj.s],
            "p_max": float(obj.p_max),
        }
    raise TypeError(f"unknown objective type {type(obj)!r}")


def _objective_from_doc(doc, n):
    if doc is None:
        return None
    kind = doc["kind"]
    if kind == "linear":
        return LinearObjective(c=np.array(doc["c"]))
    if kind == "quadratic":
        q = np.zeros((n, n))
        for i, j, v in doc["q_triplets"]:
            q[i, j] = v
        return QuadraticObjective(
            c=np.array(doc["c"]), q=q, topology=doc["topology"]
        )
    if kind == "transmit_power":
        h = np.zeros((n, n))
        for i, j, v in doc["h_triplets"]:
            h[i, j] = v
        return TransmitPowerObjective(
            h=h, sigma=doc["sigma"], s=np.array(doc["s"]), p_max=doc["p_max"]
        )
    raise ValueError(f"unknown objective kind {kind!r}")


def save_instance(instance, path):
    """Write an instance as a self-describing JSON document (0-based indices)."""
    doc = {
        "n": instance.system.n,
        "m": instance.system.m,
        "triplets": [
            [int(i), int(j), float(v)] for i, j, v in instance.system.triplets
        ],
        "b": [float(v) for v in instance.system.b],
        "meta": {
            "seed": int(instance.seed),
            "family": instance.family,
            "d": int(instance.d),
            "delta": float(instance.delta),
        },
    }
    obj = _objective_to_doc(instance.objective)
    if obj is not None:
        doc["objective"] = obj
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def load_instance(path):
    doc = json.loads(Path(path).read_text())
    system = SparseConstraintSystem(doc["n"], doc["m"], doc["triplets"], doc["b"])
    meta = doc["meta"]
    return ProblemInstance(
        system=system,
        objective=_objective_from_doc(doc.get("objective"), doc["n"]),
        seed=meta["seed"],
        family=meta["family"],
        d=meta["d"],
        delta=meta["delta"],
    )
