"""Cross-exponent behavior, potentials, weight gradients, and a-posteriori
error certificates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    InputError,
    ModulusError,
    ParameterError,
    UnsupportedOperationError,
)
from .families import WalkFamily, rho_shortest_distances
from .graph import EdgeDensity, Graph, _density_values
from .solver import ModulusResult, modulus

DEFAULT_P_GRID: tuple[float, ...] = (1.0, 1.25, 1.5, 2.0, 3.0, 4.0, 8.0, 16.0, 32.0, math.inf)


@dataclass(frozen=True)
class SweepRow:
    """One exponent of a sweep.

    ``normalized`` is ``sigma_total**(-1/p) * value**(1/p)`` for finite p and
    the value itself at infinity; it is nondecreasing in p while ``value`` is
    nonincreasing, so each row carries a verdict against its predecessor
    (None for the first comparable row or after a failed row).
    """

    p: float
    value: float | None
    normalized: float | None
    dual_lower: float | None
    primal_upper: float | None
    gap: float | None
    iterations: int | None
    monotone_ok: bool | None = None
    normalized_ok: bool | None = None
    error: str | None = None


@dataclass(frozen=True)
class PotentialResult:
    """Vertex potential reconstructed from a connecting-family density."""

    phi: dict[str, float]
    max_mismatch: float


def _normalized(value: float, p: float, sigma_total: float) -> float:
    if math.isinf(p):
        return value
    if value < 0.0:
        raise InputError("modulus values cannot be negative")
    return sigma_total ** (-1.0 / p) * value ** (1.0 / p)


def p_sweep(
    graph: Graph,
    family: WalkFamily,
    p_list: Sequence[float] | None = None,
    tol: float = 1e-8,
) -> list[SweepRow]:
    """Run the solver once per exponent and annotate monotonicity verdicts.

    Verdicts compare consecutive successful finite rows with slack ``2*tol``:
    values must not increase and normalized values must not decrease.  A row
    whose solve fails is reported with its error and skipped in later
    comparisons; the sweep continues.
    """
    grid = tuple(DEFAULT_P_GRID if p_list is None else p_list)
    if not grid:
        raise ParameterError("p_list must not be empty")
    for a, b in zip(grid, grid[1:]):
        if not a < b:
            raise ParameterError("p_list must be strictly ascending")
    if not grid[0] >= 1.0:
        raise ParameterError("every exponent must be at least 1")

    rows: list[SweepRow] = []
    prev: SweepRow | None = None
    for p in grid:
        try:
            res = modulus(graph, family, p, tol)
        except ModulusError as exc:
            rows.append(
                SweepRow(
                    p=p,
                    value=None,
                    normalized=None,
                    dual_lower=None,
                    primal_upper=None,
                    gap=None,
                    iterations=None,
                    error=str(exc),
                )
            )
            continue
        normalized = _normalized(res.value, p, graph.sigma_total)
        monotone_ok = None
        normalized_ok = None
        if prev is not None and not math.isinf(p):
            monotone_ok = res.value <= prev.value + 2.0 * tol
            normalized_ok = normalized >= prev.normalized - 2.0 * tol
        row = SweepRow(
            p=p,
            value=res.value,
            normalized=normalized,
            dual_lower=res.dual_lower,
            primal_upper=res.primal_upper,
            gap=res.gap,
            iterations=res.iterations,
            monotone_ok=monotone_ok,
            normalized_ok=normalized_ok,
        )
        rows.append(row)
        if not math.isinf(p):
            prev = row
    return rows


def reconstruct_potential(
    graph: Graph,
    source: str,
    target: str,
    rho_star: EdgeDensity | Iterable[float],
    tol: float = 1e-8,
) -> PotentialResult:
    """Rebuild the vertex potential generating a connecting-family density.

    The potential at a vertex is its shortest rho-distance from the source,
    after normalizing the density so that the source-to-target distance is
    one.  For the exact extremal density of a connecting family on an
    undirected graph the per-edge mismatch
    ``|rho(x,y) - |phi(x) - phi(y)||`` vanishes; the reported maximum
    certifies how close the supplied density is to being potential-driven.
    Vertices unreachable from the source are assigned potential zero.
    """
    if graph.directed:
        raise UnsupportedOperationError(
            "potential reconstruction is defined for undirected graphs"
        )
    values = _density_values(rho_star, graph.m)
    if values.size and values.min() < 0.0:
        raise ParameterError("density must be nonnegative")
    s = graph.vertex_index(source)
    t = graph.vertex_index(target)
    if s == t:
        raise InputError("source and target must be distinct")

    dist = rho_shortest_distances(graph, values, source)
    length = dist[t]
    if math.isinf(length):
        raise InputError("source and target are not connected")
    if length <= 0.0:
        raise InputError("density gives the connecting family zero length")
    if abs(length - 1.0) > tol:
        values = values / length
    dist = dist / length

    phi = np.where(np.isfinite(dist), dist, 0.0)
    mismatch = 0.0
    for k, (tail, head) in enumerate(graph.edges):
        a, b = graph.vertex_index(tail), graph.vertex_index(head)
        mismatch = max(mismatch, abs(values[k] - abs(phi[a] - phi[b])))
    return PotentialResult(
        phi={v: float(phi[i]) for i, v in enumerate(graph.vertices)},
        max_mismatch=float(mismatch),
    )


def sigma_gradient(
    graph: Graph, family: WalkFamily, p: float, tol: float = 1e-8
) -> np.ndarray:
    """Per-edge sensitivity of the modulus to its weight.

    The extremal density raised to the p-th power approximates the partial
    derivative of the modulus with respect to each edge weight.
    """
    if not (1.0 < p < math.inf):
        raise ParameterError(f"gradient requires finite p > 1, got {p}")
    res = modulus(graph, family, p, tol)
    return res.rho_star.values**p


def finite_difference_gradient(
    graph: Graph,
    family: WalkFamily,
    p: float,
    tol: float = 1e-10,
    rel_step: float = 1e-4,
) -> np.ndarray:
    """Central finite differences of the modulus in each edge weight.

    Independent check for :func:`sigma_gradient`; each edge costs two solver
    runs at weight ``sigma(e) * (1 +/- rel_step)``.
    """
    if not (1.0 < p < math.inf):
        raise ParameterError(f"gradient requires finite p > 1, got {p}")
    base = np.asarray(graph.sigma, dtype=float)
    out = np.zeros(graph.m)
    for k in range(graph.m):
        h = rel_step * base[k]
        for sign in (+1.0, -1.0):
            bumped = base.copy()
            bumped[k] += sign * h
            res = modulus(graph.with_sigma(bumped), family, p, tol)
            out[k] += sign * res.value
        out[k] /= 2.0 * h
    return out


def clarkson_certificate(
    p: float, sigma_min: float, energy_of_rho: float, lower_bound: float
) -> float:
    """A-posteriori bound on the p-norm distance to the extremal density.

    Clarkson's inequalities turn an energy surplus of an admissible density
    over the true modulus into a distance bound.  The unknown modulus is
    replaced by the certified lower bound, which can only loosen the result,
    so the return value is a valid upper bound on
    ``||rho - rho_star||_p`` (plain p-norm, no weights).
    """
    if not (1.0 < p < math.inf):
        raise ParameterError(f"certificate requires finite p > 1, got {p}")
    if sigma_min <= 0.0:
        raise ParameterError("sigma_min must be positive")
    if lower_bound > energy_of_rho * (1.0 + 1e-12) + 1e-300:
        raise InputError("lower bound exceeds the supplied energy")
    lower = min(max(lower_bound, 0.0), energy_of_rho)
    gap = max(energy_of_rho - lower, 0.0)
    if p >= 2.0:
        return float((2.0 ** (p - 1.0) / sigma_min * gap) ** (1.0 / p))
    conj = p / (p - 1.0)
    expo = conj / p  # equals 1 / (p - 1)
    scale = (2.0**p / sigma_min) ** expo
    if lower == 0.0:
        bracket = (gap / 2.0) ** expo
    else:
        # (lower + gap/2) ** expo - lower ** expo without cancellation
        bracket = lower**expo * math.expm1(expo * math.log1p(gap / (2.0 * lower)))
    return float((scale * bracket) ** (1.0 / conj))


def certificate_for(result: ModulusResult, sigma_min: float) -> float:
    """Clarkson certificate of a converged solver result."""
    return clarkson_certificate(
        result.p, sigma_min, result.primal_upper, result.dual_lower
    )


def density_continuity_check(
    graph: Graph,
    family: WalkFamily,
    p: float,
    q: float,
    tol: float = 1e-8,
) -> float:
    """Distance in p-norm between the extremal densities at two exponents.

    For a fixed p the distance shrinks as q approaches p, down to the level
    of the two runs' certificates.
    """
    if not (1.0 < p < math.inf) or not (1.0 < q < math.inf):
        raise ParameterError("both exponents must be finite and exceed 1")
    res_p = modulus(graph, family, p, tol)
    res_q = modulus(graph, family, q, tol)
    diff = np.abs(res_p.rho_star.values - res_q.rho_star.values)
    return float(np.sum(diff**p) ** (1.0 / p))
