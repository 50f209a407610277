"""Band-constrained dynamic time warping between frame sequences.

Alignments are monotone unit-step paths on the ``K_x x K_y`` grid, made of
H ``(1, 0)``, V ``(0, 1)`` and D ``(1, 1)`` moves and restricted to the band
``|i - j| <= delta``. A path's cost is the root of the mean node value::

    sqrt( sum_n node(n) * w_n / (K_x + K_y) )

where ``node(n) = (1/J) sum_j (x[i_n, j] - y[j_n, j])^2``. For the plain
variant every ``w_n`` is 1; for the diagonal-weighted variant ``w_n`` is
the step size ``di + dj`` (so nodes reached by a D move count twice) and
``w_0 = 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BandError, ContractViolation, OracleScaleError, UsageError

WEIGHTINGS = ("plain", "diagonal")

# (di, dj) per move, listed in tie-breaking preference order
MOVES = {"D": (1, 1), "H": (1, 0), "V": (0, 1)}

ORACLE_MAX_CELLS = 64


@dataclass(frozen=True, eq=False)
class WarpPath:
    phi_x: np.ndarray
    phi_y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "phi_x", np.asarray(self.phi_x, dtype=int))
        object.__setattr__(self, "phi_y", np.asarray(self.phi_y, dtype=int))

    def __len__(self):
        return len(self.phi_x)

    def steps(self) -> np.ndarray:
        """Per-node weight ``di + dj`` with 1 for the start node."""
        return np.concatenate(([1], np.diff(self.phi_x) + np.diff(self.phi_y)))

    def moves(self) -> str:
        names = {v: k for k, v in MOVES.items()}
        return "".join(names[(int(a), int(b))] for a, b in zip(np.diff(self.phi_x), np.diff(self.phi_y)))

    def mirrored(self) -> "WarpPath":
        return WarpPath(self.phi_y, self.phi_x)

    def validate(self, kx: int, ky: int, delta: int | None = None) -> None:
        px, py = self.phi_x, self.phi_y
        if len(px) != len(py) or len(px) == 0:
            raise ContractViolation("index tables must be non-empty and of equal length")
        if px[0] != 0 or py[0] != 0 or px[-1] != kx - 1 or py[-1] != ky - 1:
            raise ContractViolation(f"path must run from (0, 0) to ({kx - 1}, {ky - 1})")
        dx, dy = np.diff(px), np.diff(py)
        ok = ((dx == 1) & (dy == 0)) | ((dx == 0) & (dy == 1)) | ((dx == 1) & (dy == 1))
        if not np.all(ok):
            raise ContractViolation("path steps must be H (1,0), V (0,1) or D (1,1)")
        if delta is not None and np.any(np.abs(px - py) > delta):
            raise ContractViolation(f"path leaves the band |i - j| <= {delta}")


@dataclass(frozen=True)
class DtwConfig:
    delta: int | None = None
    weighting: str = "plain"

    def __post_init__(self):
        if self.weighting not in WEIGHTINGS:
            raise UsageError(f"unknown weighting {self.weighting!r}; expected one of {WEIGHTINGS}")
        if self.delta is not None and self.delta < 0:
            raise UsageError("delta must be non-negative")


def default_delta(kx: int, ky: int) -> int:
    """A tenth of the shorter length, widened so an end-to-end path exists."""
    return max(math.ceil(0.1 * min(kx, ky)), abs(kx - ky))


def _as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2 or a.shape[0] < 1:
        raise UsageError("feature sequences must be non-empty K x J arrays")
    return a


def node_costs(x, y) -> np.ndarray:
    """``C[i, j] = mean_j (x[i] - y[j])^2`` over descriptor columns."""
    x, y = _as_matrix(x), _as_matrix(y)
    if x.shape[1] != y.shape[1]:
        raise UsageError(f"descriptor count mismatch: {x.shape[1]} vs {y.shape[1]}")
    diff = x[:, None, :] - y[None, :, :]
    return (diff**2).mean(axis=2)


def path_cost(x, y, path: WarpPath, weighting: str = "plain") -> float:
    x, y = _as_matrix(x), _as_matrix(y)
    path.validate(len(x), len(y))
    if weighting not in WEIGHTINGS:
        raise UsageError(f"unknown weighting {weighting!r}")
    nodes = node_costs(x, y)[path.phi_x, path.phi_y]
    if weighting == "diagonal":
        nodes = nodes * path.steps()
    return math.sqrt(float(nodes.sum()) / (len(x) + len(y)))


def check_band(kx: int, ky: int, delta: int) -> None:
    if delta < abs(kx - ky):
        raise BandError(
            f"band delta={delta} admits no path for lengths {kx} and {ky}; "
            f"minimal feasible delta is {abs(kx - ky)}",
            abs(kx - ky),
        )


def solve(x, y, cfg: DtwConfig = DtwConfig()) -> tuple[float, WarpPath]:
    """Exact minimum-cost band-constrained alignment.

    Dynamic programming over the grid DAG in row-major (topological) order.
    Among equal-cost predecessors D is preferred over H, and H over V.

    Returns:
        (distance, path)
    """
    x, y = _as_matrix(x), _as_matrix(y)
    kx, ky = len(x), len(y)
    delta = default_delta(kx, ky) if cfg.delta is None else cfg.delta
    check_band(kx, ky, delta)
    cost = node_costs(x, y)
    diagonal = cfg.weighting == "diagonal"

    acc = np.full((kx, ky), np.inf)
    # 0 = start, 1 = D, 2 = H, 3 = V
    came = np.zeros((kx, ky), dtype=np.int8)
    acc[0, 0] = cost[0, 0]
    for i in range(kx):
        lo, hi = max(0, i - delta), min(ky - 1, i + delta)
        row_prev = acc[i - 1] if i else None
        row = acc[i]
        crow = cost[i]
        for j in range(lo, hi + 1):
            if i == 0 and j == 0:
                continue
            c = crow[j]
            best = math.inf
            move = 0
            if i and j:
                cand = row_prev[j - 1] + (2 * c if diagonal else c)
                if cand < best:
                    best, move = cand, 1
            if i:
                cand = row_prev[j] + c
                if cand < best:
                    best, move = cand, 2
            if j:
                cand = row[j - 1] + c
                if cand < best:
                    best, move = cand, 3
            row[j] = best
            came[i, j] = move

    total = acc[kx - 1, ky - 1]
    px, py = [kx - 1], [ky - 1]
    i, j = kx - 1, ky - 1
    while i or j:
        move = came[i, j]
        if move == 1:
            i, j = i - 1, j - 1
        elif move == 2:
            i -= 1
        else:
            j -= 1
        px.append(i)
        py.append(j)
    path = WarpPath(px[::-1], py[::-1])
    return math.sqrt(total / (kx + ky)), path


def dtw_distance(x, y, cfg: DtwConfig = DtwConfig()) -> float:
    return solve(x, y, cfg)[0]


def enumerate_paths(kx: int, ky: int, delta: int) -> list[WarpPath]:
    """Every valid warp path on a small grid (exhaustive test oracle)."""
    if kx < 1 or ky < 1:
        raise UsageError("grid dimensions must be >= 1")
    if kx * ky > ORACLE_MAX_CELLS:
        raise OracleScaleError(f"{kx}x{ky} grid exceeds the oracle limit of {ORACLE_MAX_CELLS} cells")
    paths = []

    def extend(px, py):
        i, j = px[-1], py[-1]
        if i == kx - 1 and j == ky - 1:
            paths.append(WarpPath(list(px), list(py)))
            return
        for di, dj in MOVES.values():
            ni, nj = i + di, j + dj
            if ni < kx and nj < ky and abs(ni - nj) <= delta:
                px.append(ni)
                py.append(nj)
                extend(px, py)
                px.pop()
                py.pop()

    extend([0], [0])
    return paths


def node_count_edge_count(kx: int, ky: int, delta: int) -> tuple[int, int]:
    """Nodes ``(i, j)`` with ``|i - j| <= delta`` and H/V/D edges between them."""
    nodes = edges = 0
    for i in range(kx):
        for j in range(ky):
            if abs(i - j) > delta:
                continue
            nodes += 1
            for di, dj in MOVES.values():
                ni, nj = i + di, j + dj
                if ni < kx and nj < ky and abs(ni - nj) <= delta:
                    edges += 1
    return nodes, edges
