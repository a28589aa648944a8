"""Iterative schemes for the graph denoising models.

Both schemes move every active vertex simultaneously, reading only the
previous iterate (two-buffer Jacobi-style sweeps):

* explicit: ``f_{n+1}(u) = exp_{f_n(u)}( dt * T(u) )``
* jacobi:   ``f_{n+1}(u) = exp_{f_n(u)}( T(u) / (lam + sum_v b(u,v)) )``

where ``T(u) = sum_v b(u,v) log_{f_n(u)} f_n(v) + lam log_{f_n(u)} f0(u)``
collects the model's edge coefficients ``b`` (which absorb the p-Laplacian
weights, smoothed for p < 2) plus the data pull.  ``T = -residual``: the
explicit scheme is the descent flow of the model energy, and a vanishing
``T`` is exactly the stationarity condition the residual diagnostic
measures.

Stopping: after each sweep the mean geodesic change over active vertices is
compared against ``stop_tol``; the run also ends at ``max_iters``.  On
manifolds with a finite injectivity radius each sweep's result is checked
for admissibility; a violation raises an injectivity error unless
``halve_dt_on_injectivity`` is set, in which case the offending (explicit)
sweep is retried with a halved dt.  The halving is per-sweep: the next
sweep starts again from the configured dt.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .calculus import (EPS_SMOOTH_DEFAULT, _aniso_coeff, _expand, _iso_alpha,
                       _scatter, edge_logs, energy_aniso, energy_iso)
from .errors import ConfigError, DomainError, InjectivityError
from .fields import VertexFunction, check_admissible
from .graphs import WeightedGraph

JACOBI_MIN_LAM = 1e-6

_MODELS = ("aniso", "iso")
_SCHEMES = ("explicit", "jacobi")

_MAX_HALVINGS = 60


@dataclass
class SolverConfig:
    """Model and scheme parameters for :func:`solve`."""

    model: str = "aniso"
    p: float = 2.0
    lam: float = 1.0
    dt: float = 1e-3
    eps_smooth: float = EPS_SMOOTH_DEFAULT
    max_iters: int = 1000
    stop_tol: float = 1e-7
    scheme: str = "explicit"
    record_energy: bool = False
    rng_seed: int = 0          # reserved; the schemes are deterministic
    halve_dt_on_injectivity: bool = False

    def validate(self):
        if self.model not in _MODELS:
            raise ConfigError(f"model must be one of {_MODELS}, "
                              f"got {self.model!r}")
        if self.scheme not in _SCHEMES:
            raise ConfigError(f"scheme must be one of {_SCHEMES}, "
                              f"got {self.scheme!r}")
        if not self.p > 0:
            raise ConfigError("p must be positive")
        if self.lam < 0:
            raise ConfigError("lam must be non-negative")
        if self.eps_smooth < 0:
            raise ConfigError("eps_smooth must be non-negative")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be at least 1")
        if self.stop_tol < 0:
            raise ConfigError("stop_tol must be non-negative")
        if self.scheme == "explicit" and not self.dt > 0:
            raise ConfigError("the explicit scheme requires dt > 0")
        if self.scheme == "jacobi" and self.lam < JACOBI_MIN_LAM:
            raise ConfigError(
                "the jacobi linearization needs a data term: lam must be at "
                f"least {JACOBI_MIN_LAM:g} (use the explicit scheme for "
                "smaller lam)")


@dataclass
class SolveReport:
    """Diagnostics of one :func:`solve` run."""

    iterations: int
    final_change: float
    change_trace: list = field(default_factory=list)
    energy_trace: list | None = None
    residual_max: float = 0.0
    reason: str = "max_iters"


def _descent_tangent(graph, f: VertexFunction, f0: VertexFunction,
                     cfg: SolverConfig):
    """Per-vertex update direction T and coefficient sums (see module doc)."""
    logs, d = edge_logs(graph, f)
    w = graph.weight
    if cfg.model == "aniso":
        b = np.sqrt(w) ** cfg.p * _aniso_coeff(d, cfg.p, cfg.eps_smooth)
    else:
        S = np.bincount(graph.src, weights=w * d * d,
                        minlength=graph.n_vertices)
        b = _iso_alpha(S, cfg.p, cfg.eps_smooth)[graph.src] * w
    ps = f.manifold.point_shape
    T = _scatter(graph.src, _expand(b, ps) * logs, graph.n_vertices)
    bsum = np.bincount(graph.src, weights=b, minlength=graph.n_vertices)
    if cfg.lam > 0:
        act = f.active & f0.active
        idx = np.flatnonzero(act)
        if idx.size:
            try:
                T[idx] += cfg.lam * f.manifold.log(f.values[idx],
                                                   f0.values[idx])
            except InjectivityError as err:
                i = err.vertex
                u = int(idx[i]) if i is not None and i < idx.size else -1
                raise InjectivityError(
                    f"fidelity term undefined at vertex {u}: the iterate "
                    "and the datum are (numerically) antipodal",
                    vertex=u) from None
    return T, bsum


def _masked_exp(f: VertexFunction, step):
    """Exponential update on active vertices; inactive rows are copied."""
    m = f.manifold
    if f.mask is None:
        return f.with_values(m.exp(f.values, step))
    out = f.values.copy()
    idx = np.flatnonzero(f.mask)
    if idx.size:
        out[idx] = m.exp(f.values[idx], step[idx])
    return f.with_values(out)


def _checked(graph, new: VertexFunction):
    if np.isfinite(new.manifold.injectivity_radius):
        check_admissible(graph, new)
    return new


def explicit_step(graph, f: VertexFunction, f0: VertexFunction,
                  cfg: SolverConfig) -> VertexFunction:
    """One explicit sweep ``exp_{f(u)}(dt * T(u))`` over active vertices.

    Raises an injectivity error when the update leaves the admissible set.
    (Not validated against the config: ``dt = 0`` is the exact identity.)
    """
    T, _ = _descent_tangent(graph, f, f0, cfg)
    return _checked(graph, _masked_exp(f, cfg.dt * T))


def jacobi_step(graph, f: VertexFunction, f0: VertexFunction,
                cfg: SolverConfig) -> VertexFunction:
    """One semi-implicit sweep ``exp_{f(u)}(T(u) / (lam + sum_v b(u,v)))``."""
    if cfg.lam <= 0:
        raise ConfigError("jacobi_step requires lam > 0")
    T, bsum = _descent_tangent(graph, f, f0, cfg)
    step = T / _expand(cfg.lam + bsum, f.manifold.point_shape)
    return _checked(graph, _masked_exp(f, step))


def _sweep(graph, f, f0, cfg):
    if cfg.scheme == "jacobi":
        return jacobi_step(graph, f, f0, cfg)
    if not cfg.halve_dt_on_injectivity:
        return explicit_step(graph, f, f0, cfg)
    dt = cfg.dt
    for _ in range(_MAX_HALVINGS):
        try:
            return explicit_step(graph, f, f0, replace(cfg, dt=dt))
        except InjectivityError:
            dt *= 0.5
    raise InjectivityError(
        f"explicit sweep still inadmissible after {_MAX_HALVINGS} dt halvings")


def solve(graph: WeightedGraph, f0: VertexFunction, cfg: SolverConfig,
          init: VertexFunction | None = None):
    """Run the configured scheme from ``init`` (default: the data ``f0``).

    Returns ``(f, report)``.  The energy trace (when recorded) holds the
    model energy of the start iterate and of every sweep's result.
    """
    cfg.validate()
    if f0.n_vertices != graph.n_vertices:
        raise DomainError("data length does not match the graph")
    if init is None:
        f = f0.copy()
    else:
        if init.manifold != f0.manifold or init.n_vertices != f0.n_vertices:
            raise DomainError("init must match the data's manifold and size")
        f = VertexFunction(f0.manifold, init.values.copy(),
                           None if f0.mask is None else f0.mask.copy(),
                           validate=False)

    act = np.flatnonzero(f.active)
    energy_fn = energy_aniso if cfg.model == "aniso" else energy_iso
    etrace = None
    if cfg.record_energy:
        etrace = [energy_fn(graph, f, f0, cfg.lam, cfg.p)]

    changes = []
    reason = "max_iters"
    for _ in range(cfg.max_iters):
        f_new = _sweep(graph, f, f0, cfg)
        if act.size:
            d = f.manifold.dist(f.values[act], f_new.values[act])
            change = float(np.mean(d))
        else:
            change = 0.0
        f = f_new
        changes.append(change)
        if etrace is not None:
            etrace.append(energy_fn(graph, f, f0, cfg.lam, cfg.p))
        if change < cfg.stop_tol:
            reason = "converged"
            break

    T, _ = _descent_tangent(graph, f, f0, cfg)
    rmax = float(f.manifold.norm(f.values[act], T[act]).max()) if act.size \
        else 0.0
    report = SolveReport(iterations=len(changes),
                         final_change=changes[-1] if changes else 0.0,
                         change_trace=changes,
                         energy_trace=etrace,
                         residual_max=rmax,
                         reason=reason)
    return f, report
