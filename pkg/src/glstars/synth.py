"""Synthetic ground-truth precision matrices and graph-recovery metrics.

Two generator families:

* neighborhood graphs: p points on the unit square, each pair linked
  with probability exp(-4 * ||y_i - y_j||^2) / sqrt(2*pi), subject to a
  per-node degree cap of floor(1/rho) - 1 so the unit-diagonal matrix
  stays strictly diagonally dominant.
* hub graphs: nodes partitioned into groups of size s, each group a
  star around its first ("pivotal") node.

Both set all linked entries of the precision matrix to a single weight
rho and the diagonal to one.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import linalg
from .errors import DimensionMismatch, InvalidGroupSize, InvalidRho

DEFAULT_NEIGHBORHOOD_RHO = 0.245
DEFAULT_HUB_GROUP_SIZE = 20


@dataclass(frozen=True)
class GroundTruth:
    """A known sparse precision matrix, its covariance, and its graph."""

    omega: np.ndarray
    sigma: np.ndarray
    edges: np.ndarray
    kind: str
    params: dict


def _edges_of_omega(omega: np.ndarray) -> np.ndarray:
    edges = omega != 0.0
    np.fill_diagonal(edges, False)
    return edges


def _finish(omega: np.ndarray, kind: str, params: dict) -> GroundTruth:
    # raises NotPositiveDefinite if the construction failed to stay PD
    sigma = linalg.inverse(omega)
    return GroundTruth(omega=omega, sigma=sigma, edges=_edges_of_omega(omega),
                       kind=kind, params=params)


def gen_neighborhood(p: int, rho: float = DEFAULT_NEIGHBORHOOD_RHO,
                     seed: int = 0) -> GroundTruth:
    """Geometric random graph with bounded degree on the unit square.

    Candidate pairs are visited in a seed-shuffled order and accepted
    greedily; a link is rejected when it would raise either endpoint's
    degree to floor(1/rho) or beyond. Each row's off-diagonal sum is
    then at most (floor(1/rho) - 1) * rho < 1, so the matrix is
    strictly diagonally dominant and positive definite.
    """
    if not 0.0 < rho < 1.0:
        raise InvalidRho(f"rho must be in (0, 1), got {rho}")
    if p < 2:
        raise ValueError(f"p must be >= 2, got {p}")
    rng = np.random.default_rng((seed, 0))
    points = rng.uniform(size=(p, 2))
    iu, ju = np.triu_indices(p, 1)
    order = rng.permutation(iu.size)
    coins = rng.uniform(size=iu.size)

    cap = int(math.floor(1.0 / rho))
    degree = np.zeros(p, dtype=int)
    omega = np.eye(p)
    const = 1.0 / math.sqrt(2.0 * math.pi)
    for rank, t in enumerate(order):
        i, j = int(iu[t]), int(ju[t])
        dist2 = float(np.sum((points[i] - points[j]) ** 2))
        if coins[rank] < const * math.exp(-4.0 * dist2):
            if degree[i] + 1 < cap and degree[j] + 1 < cap:
                omega[i, j] = omega[j, i] = rho
                degree[i] += 1
                degree[j] += 1
    return _finish(omega, "neighborhood", {"p": p, "rho": rho, "seed": seed})


def gen_hub(p: int, s: int = DEFAULT_HUB_GROUP_SIZE, seed: int = 0,
            rho: float | None = None) -> GroundTruth:
    """Star-shaped groups around pivotal rows 0, s, 2s, ...

    Rows are split into floor(p/s) groups of size s (leftover rows stay
    isolated); within each group every member is linked to the pivot
    with weight rho, which defaults to 1/(s+1) so pivot rows remain
    diagonally dominant. A custom rho must keep the matrix positive
    definite (checked by factorization).
    """
    if not 2 <= s < p:
        raise InvalidGroupSize(f"need 2 <= s < p, got s={s}, p={p}")
    if rho is None:
        rho = 1.0 / (s + 1)
    if not 0.0 < rho < 1.0:
        raise InvalidRho(f"rho must be in (0, 1), got {rho}")
    omega = np.eye(p)
    for pivot in range(0, (p // s) * s, s):
        for i in range(pivot + 1, pivot + s):
            omega[i, pivot] = omega[pivot, i] = rho
    return _finish(omega, "hub", {"p": p, "s": s, "rho": rho, "seed": seed})


def generate(kind: str, p: int, seed: int = 0, **params) -> GroundTruth:
    """Dispatch to a generator by kind ('neighborhood' or 'hub')."""
    if kind == "neighborhood":
        return gen_neighborhood(p, seed=seed, **params)
    if kind == "hub":
        return gen_hub(p, seed=seed, **params)
    raise ValueError(f"unknown graph kind {kind!r}")


def metrics(estimated: np.ndarray, truth: np.ndarray) -> tuple[float, float, float]:
    """(precision, recall, f1) of an estimated edge set against the truth.

    precision is 1 when both edge sets are empty and 0 when only the
    estimate is empty; f1 is 0 whenever precision + recall is 0.
    """
    estimated = np.asarray(estimated, dtype=bool)
    truth = np.asarray(truth, dtype=bool)
    if estimated.shape != truth.shape:
        raise DimensionMismatch(
            f"edge sets have shapes {estimated.shape} and {truth.shape}"
        )
    n_est = np.count_nonzero(estimated) // 2
    n_true = np.count_nonzero(truth) // 2
    n_common = np.count_nonzero(estimated & truth) // 2
    if n_est == 0:
        precision = 1.0 if n_true == 0 else 0.0
    else:
        precision = n_common / n_est
    recall = 1.0 if n_true == 0 else n_common / n_true
    if precision + recall == 0.0:
        f1 = 0.0
    else:
        f1 = 2.0 * precision * recall / (precision + recall)
    return precision, recall, f1


def edge_pairs(edges: np.ndarray) -> list[tuple[int, int]]:
    """Sorted (i, j) pairs, i < j, of a boolean adjacency matrix."""
    iu, ju = np.nonzero(np.triu(np.asarray(edges, dtype=bool), 1))
    return list(zip(iu.tolist(), ju.tolist()))


def save_truth(truth: GroundTruth, directory: str | Path) -> None:
    """Write omega.csv, edges.tsv, and meta.json into a directory.

    omega.csv holds dense row-major entries at 17 significant digits
    (lossless for doubles); edges.tsv one "i<TAB>j" line per undirected
    edge with i < j, zero-based.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / "omega.csv", "w") as fh:
        for row in truth.omega:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
    with open(directory / "edges.tsv", "w") as fh:
        for i, j in edge_pairs(truth.edges):
            fh.write(f"{i}\t{j}\n")
    meta = {"kind": truth.kind, "params": truth.params}
    with open(directory / "meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_truth(directory: str | Path) -> GroundTruth:
    """Rebuild a GroundTruth from a directory written by save_truth."""
    directory = Path(directory)
    omega = np.loadtxt(directory / "omega.csv", delimiter=",", ndmin=2)
    with open(directory / "meta.json") as fh:
        meta = json.load(fh)
    return _finish(omega, meta["kind"], meta["params"])
