"""Modulus of walk families via constraint generation with dual certificates.

The outer loop alternates between solving a finite restricted program over
the walks generated so far and querying the family oracle for a shortest
walk under the current density.  A walk of length below one is a violated
constraint and joins the active set; otherwise the run is certified by an
exactly feasible rescaling (upper bound) and the dual energy of the
accumulated walk weights (lower bound).
"""

from __future__ import annotations

import math
import warnings
from collections import deque
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ConvergenceError, InputError, InternalError, ParameterError
from .families import UsageMatrix, WalkFamily, usage_row
from .graph import EdgeDensity, Graph, Walk

_EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class ModulusResult:
    """Converged modulus estimate with its certificates.

    ``dual_lower <= value <= primal_upper`` by weak duality, ``rho_star`` is
    exactly admissible for the generated subfamily and admissible for the
    whole family up to the run tolerance, and ``dual_weights`` holds one
    nonnegative multiplier per active walk.
    """

    p: float
    value: float
    rho_star: EdgeDensity
    active_walks: tuple[Walk, ...]
    dual_weights: np.ndarray
    primal_upper: float
    dual_lower: float
    gap: float
    iterations: int


def _as_weights(sigma, m: int) -> np.ndarray:
    sig = np.asarray(sigma, dtype=float)
    if sig.shape != (m,):
        raise InputError(f"expected {m} edge weights, got shape {sig.shape}")
    if m and np.any(sig <= 0.0):
        raise InputError("edge weights must be strictly positive")
    return sig


def dual_energy(
    lam: Iterable[float], usage: UsageMatrix, sigma, p: float
) -> float:
    """Dual energy of nonnegative walk weights.

    Evaluates ``sum(lam) - (p-1) * sum_e sigma(e) * u(e)**(p/(p-1))`` with
    ``u(e) = (sum_walks counts(walk,e) * lam(walk)) / (p * sigma(e))``.  When
    the usage rows are genuine members of the family, any value returned here
    is a valid lower bound on the modulus (weak duality).
    """
    if not (1.0 < p < math.inf):
        raise ParameterError(f"dual energy requires finite p > 1, got {p}")
    lam = np.asarray(lam, dtype=float)
    counts = usage.counts
    if lam.shape != (counts.shape[0],):
        raise InputError("one weight per usage row is required")
    if lam.size and lam.min() < 0.0:
        raise ParameterError("walk weights must be nonnegative")
    sig = _as_weights(sigma, counts.shape[1])
    u = (counts.T @ lam) / (p * sig)
    return float(lam.sum() - (p - 1.0) * np.sum(sig * u ** (p / (p - 1.0))))


def solve_restricted_program(
    usage: UsageMatrix,
    sigma,
    p: float,
    tol: float,
    *,
    warm_start: np.ndarray | None = None,
    max_iterations: int = 100_000,
    raise_on_stall: bool = True,
) -> tuple[EdgeDensity, np.ndarray]:
    """Solve the finite p-energy program restricted to the given walks.

    Runs projected ascent on the smooth concave dual in the walk weights,
    preferring a Newton step on the free set with a Barzilai-Borwein
    gradient step as fallback; the density is recovered from the weights
    through the stationarity map ``rho(e) = u(e)**(1/(p-1))`` with
    ``u = (counts^T lam) / (p sigma)``.  Stops when the restricted duality
    gap is at most ``tol`` relative to the feasible primal energy.  When no
    representable step improves the dual before that point, the best
    iterate is returned if ``raise_on_stall`` is false, and a diagnostic
    error carrying the achieved gap is raised otherwise.
    """
    if not (1.0 < p < math.inf):
        raise ParameterError(f"restricted program requires finite p > 1, got {p}")
    if tol <= 0.0:
        raise ParameterError("tol must be positive")
    counts = usage.counts.astype(float)
    k, m = counts.shape
    if k == 0 or m == 0:
        raise InputError("usage matrix must be nonempty")
    sig = _as_weights(sigma, m)
    if p < 1.05:
        warnings.warn(
            f"p={p} is close to 1; the dual exponent 1/(p-1) is poorly "
            "conditioned, tightening the inner tolerance",
            RuntimeWarning,
            stacklevel=2,
        )
        tol = tol * 1e-2
    q = p / (p - 1.0)
    inv = 1.0 / (p - 1.0)
    psig = p * sig
    counts_t = np.ascontiguousarray(counts.T)

    def pieces(lam):
        u = counts_t @ lam / psig
        with np.errstate(over="ignore"):
            rho = u**inv
        s_energy = float(sig @ (u * rho))  # sigma * u**q, also E_p(rho)
        n_rho = counts @ rho
        f_val = float(lam.sum()) - (p - 1.0) * s_energy
        return u, rho, s_energy, n_rho, f_val

    def rescaled(lam, u, rho, s_energy, n_rho):
        # 1-D maximizer of F(c * lam); keeps all quantities well scaled.
        total = float(lam.sum())
        if total <= 0.0 or s_energy <= 0.0 or not math.isfinite(s_energy):
            return lam, u, rho, s_energy, n_rho
        log_c = (p - 1.0) * (math.log(total) - math.log(p * s_energy))
        log_c = min(max(log_c, -600.0), 600.0)
        c = math.exp(log_c)
        lam = lam * c
        u = u * c
        scale = c**inv
        rho = rho * scale
        n_rho = n_rho * scale
        s_energy = s_energy * (c**q)
        return lam, u, rho, s_energy, n_rho

    def newton_direction(lam, u, grad):
        # Curvature of the dual is -counts diag(w) counts^T with
        # w_e = u_e**(inv-1) * inv / (p sigma_e); solve on the free set.
        free = (lam > 0.0) | (grad > 0.0)
        if not free.any():
            return None
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            w = inv * u ** (inv - 1.0) / psig
        w[~np.isfinite(w)] = 0.0
        w[u <= 0.0] = 0.0
        sub = counts[free]
        hess = (sub * w) @ sub.T
        scale = float(np.abs(np.diag(hess)).max()) if hess.size else 0.0
        if scale <= 0.0:
            return None
        hess = hess + (1e-14 * scale) * np.eye(hess.shape[0])
        try:
            d_free = np.linalg.solve(hess, grad[free])
        except np.linalg.LinAlgError:
            return None
        direction = np.zeros(k)
        direction[free] = d_free
        return direction

    lam = np.ones(k) if warm_start is None else np.maximum(
        np.asarray(warm_start, dtype=float), 0.0
    )
    if lam.shape != (k,):
        raise InputError("warm start must provide one weight per usage row")
    if lam.sum() <= 0.0:
        lam = np.ones(k)
    u, rho, s_energy, n_rho, f_val = pieces(lam)
    lam, u, rho, s_energy, n_rho = rescaled(lam, u, rho, s_energy, n_rho)
    f_val = float(lam.sum()) - (p - 1.0) * s_energy
    grad = 1.0 - n_rho
    step = (float(np.abs(lam).max()) + 1e-300) / (float(np.abs(grad).max()) + 1e-300)
    history: deque[float] = deque([f_val], maxlen=10)
    best_rel = math.inf
    best: tuple[np.ndarray, np.ndarray] | None = None
    best_gap = math.inf

    for _ in range(max_iterations):
        lmin = float(n_rho.min())
        if lmin > 0.0:
            primal = s_energy / lmin**p
            gap = primal - f_val
            rel = gap / abs(primal) if primal else math.inf
            if rel < best_rel:
                best_rel = rel
                best_gap = gap
                best = (rho.copy(), lam.copy())
            if gap <= tol * abs(primal) + 64.0 * _EPS * (abs(primal) + abs(f_val)):
                return EdgeDensity(rho), lam

        reference = min(history)
        accepted = False
        # Newton step on the free set first; it handles the poorly
        # conditioned large-p regime where plain gradient ascent crawls.
        # Acceptance is monotone here so that a garbage direction from a
        # near-singular curvature matrix cannot throw the iterate back.
        newton = newton_direction(lam, u, grad)
        if newton is not None:
            t_newton = 1.0
            for _ in range(40):
                cand = np.maximum(lam + t_newton * newton, 0.0)
                delta = cand - lam
                if not delta.any():
                    break
                u_c, rho_c, s_c, n_rho_c, f_c = pieces(cand)
                gain = float(grad @ delta)
                if math.isfinite(f_c) and gain >= 0.0 and f_c >= f_val + 1e-4 * gain:
                    accepted = True
                    break
                t_newton *= 0.5
        if not accepted:
            for _ in range(200):
                cand = np.maximum(lam + step * grad, 0.0)
                delta = cand - lam
                if not delta.any():
                    break
                u_c, rho_c, s_c, n_rho_c, f_c = pieces(cand)
                if math.isfinite(f_c) and f_c >= reference + 1e-4 * float(grad @ delta):
                    accepted = True
                    break
                step *= 0.25
        if not accepted:
            break  # no representable ascent step left

        grad_c = 1.0 - n_rho_c
        d_grad = grad_c - grad
        denom = -float(delta @ d_grad)
        step = float(delta @ delta) / denom if denom > 1e-300 else step * 2.0
        lam, u, rho, s_energy, n_rho, f_val, grad = (
            cand,
            u_c,
            rho_c,
            s_c,
            n_rho_c,
            f_c,
            grad_c,
        )
        lam, u, rho, s_energy, n_rho = rescaled(lam, u, rho, s_energy, n_rho)
        f_val = float(lam.sum()) - (p - 1.0) * s_energy
        grad = 1.0 - n_rho
        history.append(f_val)

    lmin = float(n_rho.min())
    if lmin > 0.0:
        primal = s_energy / lmin**p
        gap = primal - f_val
        rel = gap / abs(primal) if primal else math.inf
        if rel < best_rel:
            best_rel = rel
            best_gap = gap
            best = (rho.copy(), lam.copy())
        if gap <= tol * abs(primal) + 64.0 * _EPS * (abs(primal) + abs(f_val)):
            return EdgeDensity(rho), lam
    if best is not None and not raise_on_stall:
        return EdgeDensity(best[0]), best[1]
    raise ConvergenceError(
        "restricted dual ascent stalled above the requested tolerance",
        primal=s_energy / lmin**p if lmin > 0 else None,
        dual=f_val,
        gap=best_gap if best is not None else None,
    )


def _simplex_max(
    a_mat: np.ndarray, b_vec: np.ndarray, c_vec: np.ndarray, *, max_pivots: int = 100_000
) -> tuple[np.ndarray, np.ndarray, float]:
    """Maximize ``c @ x`` over ``A x <= b, x >= 0`` with ``b > 0``.

    Dense tableau simplex started from the slack basis, with Bland's rule
    for both the entering and leaving choices (finite and deterministic).
    Returns the optimal ``x``, the constraint shadow prices, and the value.
    """
    ncon, nvar = a_mat.shape
    tab = np.zeros((ncon + 1, nvar + ncon + 1))
    tab[:ncon, :nvar] = a_mat
    tab[:ncon, nvar : nvar + ncon] = np.eye(ncon)
    tab[:ncon, -1] = b_vec
    tab[-1, :nvar] = -c_vec
    basis = list(range(nvar, nvar + ncon))

    for _ in range(max_pivots):
        objective = tab[-1, :-1]
        enter = -1
        for j in range(nvar + ncon):
            if objective[j] < -1e-11:
                enter = j
                break
        if enter < 0:
            break
        col = tab[:ncon, enter]
        rhs = tab[:ncon, -1]
        leave = -1
        best = math.inf
        for i in range(ncon):
            if col[i] > 1e-11:
                ratio = rhs[i] / col[i]
                if ratio < best - 1e-12 or (
                    abs(ratio - best) <= 1e-12
                    and (leave < 0 or basis[i] < basis[leave])
                ):
                    best = ratio
                    leave = i
        if leave < 0:
            raise InternalError("restricted LP is unbounded")
        tab[leave] /= tab[leave, enter]
        for i in range(ncon + 1):
            if i != leave and tab[i, enter] != 0.0:
                tab[i] -= tab[i, enter] * tab[leave]
        basis[leave] = enter
    else:
        raise InternalError("simplex pivot cap exceeded")

    x = np.zeros(nvar)
    for i, b_i in enumerate(basis):
        if b_i < nvar:
            x[b_i] = tab[i, -1]
    shadow = tab[-1, nvar : nvar + ncon].copy()
    return np.maximum(x, 0.0), np.maximum(shadow, 0.0), float(tab[-1, -1])


def _centered_lp_density(
    counts: np.ndarray,
    sig: np.ndarray,
    value: float,
    lam_init: np.ndarray,
    fallback: np.ndarray,
    *,
    max_iterations: int = 60_000,
) -> np.ndarray:
    """Minimum-Euclidean-norm optimal density of the restricted LP.

    Linear programs over walk constraints typically have many optimal
    densities; projecting the origin onto the optimal face picks a
    deterministic, reproducible representative.  Solved through the dual of
    ``min 0.5 ||rho||^2  s.t.  counts rho >= 1, sigma.rho <= value, rho >= 0``
    by the same projected adaptive-step ascent used for the p > 1 programs.
    """
    k, m = counts.shape
    counts_t = np.ascontiguousarray(counts.T)
    theta = np.concatenate([np.maximum(lam_init, 0.0), [0.0]])

    def pieces(th):
        rho = counts_t @ th[:k] - th[k] * sig
        np.maximum(rho, 0.0, out=rho)
        n_rho = counts @ rho
        budget = float(sig @ rho)
        g_val = float(th[:k].sum()) - th[k] * value - 0.5 * float(rho @ rho)
        grad = np.concatenate([1.0 - n_rho, [budget - value]])
        return rho, n_rho, budget, g_val, grad

    rho, n_rho, budget, g_val, grad = pieces(theta)
    step = 1.0 / (1.0 + float(np.abs(grad).max()))
    history: deque[float] = deque([g_val], maxlen=10)

    for _ in range(max_iterations):
        primal = 0.5 * float(rho @ rho)
        feasible = (
            n_rho.size
            and float(n_rho.min()) >= 1.0 - 1e-11
            and budget <= value * (1.0 + 1e-11)
        )
        if feasible and primal - g_val <= 1e-11 * max(1.0, primal):
            break
        reference = min(history)
        accepted = False
        for _ in range(200):
            cand = np.maximum(theta + step * grad, 0.0)
            delta = cand - theta
            if not delta.any():
                break
            rho_c, n_rho_c, budget_c, g_c, grad_c = pieces(cand)
            if g_c >= reference + 1e-4 * float(grad @ delta):
                accepted = True
                break
            step *= 0.25
        if not accepted:
            break
        d_grad = grad_c - grad
        denom = -float(delta @ d_grad)
        step = float(delta @ delta) / denom if denom > 1e-300 else step * 2.0
        theta, rho, n_rho, budget, g_val, grad = (
            cand,
            rho_c,
            n_rho_c,
            budget_c,
            g_c,
            grad_c,
        )
        history.append(g_val)

    # Feasibility polish, then prefer the candidate of smaller total weight
    # (the vertex from the pivoting solve is always available).
    def polish(r: np.ndarray) -> np.ndarray | None:
        n_r = counts @ r
        lmin = float(n_r.min()) if n_r.size else 0.0
        if lmin <= 0.0:
            return None
        return np.maximum(r / lmin, 0.0)

    best = None
    for cand in (polish(rho), polish(fallback)):
        if cand is not None and (best is None or sig @ cand < sig @ best):
            best = cand
    if best is None:
        raise InternalError("no feasible density for the restricted LP")
    return best


def solve_restricted_lp(
    usage: UsageMatrix, sigma
) -> tuple[EdgeDensity, np.ndarray]:
    """Solve the restricted unit-exponent program and its dual exactly.

    The primal ``min sigma.rho`` over ``counts rho >= 1, rho >= 0`` and the
    dual ``max sum(lam)`` over ``counts^T lam <= sigma, lam >= 0`` share
    their optimal value.  The dual is solved by a self-contained dense
    simplex; the reported density is the minimum-norm point of the primal
    optimal face, so repeated runs agree entrywise.
    """
    counts = usage.counts.astype(float)
    k, m = counts.shape
    if k == 0 or m == 0:
        raise InputError("usage matrix must be nonempty")
    sig = _as_weights(sigma, m)
    lam, rho_vertex, value = _simplex_max(
        np.ascontiguousarray(counts.T), sig, np.ones(k)
    )
    rho = _centered_lp_density(counts, sig, value, lam, rho_vertex)
    return EdgeDensity(rho), lam


def mod_infinity(family: WalkFamily) -> tuple[float, EdgeDensity]:
    """Closed-form limiting modulus: the reciprocal of the fewest hops of
    any member, witnessed by the constant density at that value."""
    graph = family.graph
    found = family.hop_shortest_walk()
    if found is None:
        return 0.0, EdgeDensity.zeros(graph)
    hops = found[1]
    return 1.0 / hops, EdgeDensity.constant(graph, 1.0 / hops)


def _empty_result(graph: Graph, p: float) -> ModulusResult:
    return ModulusResult(
        p=p,
        value=0.0,
        rho_star=EdgeDensity.zeros(graph),
        active_walks=(),
        dual_weights=np.zeros(0),
        primal_upper=0.0,
        dual_lower=0.0,
        gap=0.0,
        iterations=0,
    )


def modulus(
    graph: Graph,
    family: WalkFamily,
    p: float,
    tol: float = 1e-8,
    max_iterations: int | None = None,
) -> ModulusResult:
    """Compute the p-modulus of a walk family on a weighted graph.

    The active set is seeded with the hop-shortest walk and grown by
    constraint generation until the shortest walk under the current density
    has length at least ``1 - tol`` and the certified duality gap is at most
    ``tol * max(1, value)``.  The returned density is the exactly feasible
    rescaling of the last restricted solution, so ``value`` equals its
    energy.  An empty family yields a zero result immediately.
    """
    if not (tol > 0.0):
        raise ParameterError("tol must be positive")
    if not (p >= 1.0):
        raise ParameterError(f"p must be at least 1 or inf, got {p}")
    if not family.graph.same_structure(graph):
        raise InputError("family was built on a different graph")

    seed = family.hop_shortest_walk()
    if seed is None:
        return _empty_result(graph, p)

    if math.isinf(p):
        walk, hops = seed
        value = 1.0 / hops
        return ModulusResult(
            p=p,
            value=value,
            rho_star=EdgeDensity.constant(graph, value),
            active_walks=(walk,),
            dual_weights=np.array([value]),
            primal_upper=value,
            dual_lower=value,
            gap=0.0,
            iterations=0,
        )

    sig = graph.sigma
    cap = 10 * graph.m if max_iterations is None else max_iterations
    walks: list[Walk] = [seed[0]]
    rows: list[np.ndarray] = [usage_row(seed[0])]
    seen = {rows[0].tobytes()}
    lam: np.ndarray | None = None
    inner_rel = max(tol * 1e-2, 5e-15)
    tol_add = tol / (4.0 * max(p, 1.0))
    tighten_rounds = 0
    iterations = 0
    last_bounds: tuple[float | None, float | None, float | None] = (None, None, None)

    while iterations < cap:
        iterations += 1
        usage = UsageMatrix(tuple(walks), np.vstack(rows))
        if p == 1.0:
            rho_d, lam = solve_restricted_lp(usage, sig)
        else:
            rho_d, lam = solve_restricted_program(
                usage, sig, p, inner_rel, warm_start=lam, raise_on_stall=False
            )

        found = family.shortest_walk(rho_d)
        if found is None:
            raise InternalError("family oracle reported empty after seeding")
        walk, ell = found
        row = usage_row(walk)
        key = row.tobytes()

        if ell < 1.0 - tol_add and key not in seen:
            seen.add(key)
            walks.append(walk)
            rows.append(row)
            if lam is not None and p != 1.0:
                lam = np.append(lam, 0.0)
            continue

        if ell <= 0.0:
            raise InternalError("nonpositive family length at certification")

        rho_hat = rho_d.values / ell
        upper = float(np.sum(sig * rho_hat**p))
        lower = float(lam.sum()) if p == 1.0 else dual_energy(lam, usage, sig, p)
        lower = min(lower, upper)
        gap = upper - lower
        last_bounds = (upper, lower, gap)

        noise = 32.0 * _EPS * (abs(upper) + abs(lower))
        if (1.0 - ell) <= tol and gap <= tol * max(1.0, upper) + noise:
            if rho_hat.size and (
                rho_hat.min() < -(tol + 1e-12) or rho_hat.max() > 1.0 + tol + 1e-12
            ):
                raise InternalError("extremal density violates its box bounds")
            return ModulusResult(
                p=p,
                value=upper,
                rho_star=EdgeDensity(rho_hat),
                active_walks=tuple(walks),
                dual_weights=np.maximum(np.asarray(lam, dtype=float), 0.0),
                primal_upper=upper,
                dual_lower=lower,
                gap=max(gap, 0.0),
                iterations=iterations,
            )

        # Certification failed: keep any still-violated walk the oracle
        # produced and sharpen the restricted solves.
        added = False
        if key not in seen and ell < 1.0:
            seen.add(key)
            walks.append(walk)
            rows.append(row)
            if lam is not None and p != 1.0:
                lam = np.append(lam, 0.0)
            added = True
        tighten_rounds += 1
        inner_rel = max(inner_rel * 1e-2, 1e-16)
        if not added and (p == 1.0 or tighten_rounds > 12):
            raise ConvergenceError(
                "modulus failed to certify the requested tolerance",
                primal=last_bounds[0],
                dual=last_bounds[1],
                gap=last_bounds[2],
            )

    raise ConvergenceError(
        f"outer iteration cap of {cap} reached before certification",
        primal=last_bounds[0],
        dual=last_bounds[1],
        gap=last_bounds[2],
    )
