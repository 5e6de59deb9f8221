"""Input-to-state map, its adjoint, duality identities, and controllability verdicts.

The input map Psi_tau u = int_0^tau U(tau,s) B(s) u(s) ds and its adjoint
(Psi_tau* z)(t) = B(t)* U(tau,t)* z tie exact controllability to coercivity of
W_tau = Psi_tau Psi_tau*: the duality constant delta = sqrt(lambda_min(W_tau))
is the observability constant of the adjoint final-value problem. Null
controllability is the range inclusion Ran U(tau,0) within Ran W_tau^{1/2},
certified by the smallest c with ||U(tau,0)* z|| <= c ||Psi_tau* z||_{L2}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gramian import COERCIVITY_TOL, coercivity_check, ctrl_gramian_quadrature
from .propagate import Propagator
from .sysmodel import ControlSignal, LtvSystem, l2_inner

RANGE_INCLUSION_TOL = 1e-8


@dataclass(frozen=True)
class DualityReport:
    controllable: bool
    lambda_min_W: float
    obs_constant_delta: float
    admissibility_M: float
    null_controllable: bool
    null_inclusion_c: float      # +inf sentinel when inclusion fails
    coercivity_tol: float = COERCIVITY_TOL


def input_map(p: Propagator, u: ControlSignal) -> np.ndarray:
    """Psi_tau u; equals propagate_state with x0 = 0."""
    return p.propagate_state(np.zeros(p.sys.n), u, p.steps)


def input_map_adjoint(p: Propagator, z) -> ControlSignal:
    """The signal t_i -> B(t_i)* U(tau, t_i)* z."""
    z = np.asarray(z).reshape(p.sys.n)
    nodes = p.grid.nodes
    to_end = p.transitions_to_end()
    B = p.sys.B
    values = np.empty((nodes.size, p.sys.m), dtype=np.result_type(float, z.dtype))
    for i, t in enumerate(nodes):
        values[i] = B(t).T @ (to_end[i].conj().T @ z)
    return ControlSignal(p.grid, values)


def adjoint_identity_residual(p: Propagator, u: ControlSignal, z) -> float:
    """| <Psi u, z> - <u, Psi* z>_{L2} |, the numerical adjointness witness."""
    z = np.asarray(z).reshape(p.sys.n)
    lhs = np.vdot(z, input_map(p, u))
    rhs = l2_inner(u, input_map_adjoint(p, z))
    return float(abs(lhs - rhs))


def key_identity_residual(p: Propagator, u: ControlSignal, z_tau) -> float:
    """| <x(tau), z_tau> - int_0^tau <u(s), B(s)* z(s)> ds | with x(0) = 0."""
    z_tau = np.asarray(z_tau).reshape(p.sys.n)
    x_tau = p.propagate_state(np.zeros(p.sys.n), u, p.steps)
    lhs = np.vdot(z_tau, x_tau)
    w = p.grid.weights()
    nodes = p.grid.nodes
    B = p.sys.B
    rhs = 0.0
    for i, t in enumerate(nodes):
        if w[i] == 0.0:
            continue
        bz = B(t).T @ p.adjoint_state(z_tau, i)
        rhs += w[i] * np.vdot(bz, u.values[i])
    return float(abs(lhs - rhs))


def admissibility_constant(p: Propagator) -> float:
    """Smallest M with int_s^tau ||C(t) U(t,s) x||^2 dt <= M^2 ||x||^2 for all x, s.

    Realized as the max over grid nodes s of sqrt(lambda_max) of the windowed
    observability Gramian int_s^tau U(t,s)* C(t)* C(t) U(t,s) dt.
    """
    nodes = p.grid.nodes
    N = p.steps
    C = p.sys.C
    CC = [C(t) for t in nodes]
    best = 0.0
    for s in range(N + 1):
        if s == N:
            break  # zero-length window
        w = _window_weights(nodes, s)
        Q = np.zeros((p.sys.n, p.sys.n))
        acc = np.eye(p.sys.n)  # U(t_i, t_s)
        for i in range(s, N + 1):
            if w[i - s] != 0.0:
                CU = CC[i] @ acc
                Q += w[i - s] * (CU.T @ CU)
            if i < N:
                acc = p.step_transitions[i] @ acc
        lam = float(np.linalg.eigvalsh(0.5 * (Q + Q.T))[-1])
        best = max(best, lam)
    return float(np.sqrt(max(best, 0.0)))


def _window_weights(nodes: np.ndarray, s: int) -> np.ndarray:
    # trapezoid weights on [t_s, tau]; windows generally have odd panel
    # counts so Simpson is not attempted here
    d = np.diff(nodes[s:])
    w = np.zeros(nodes.size - s)
    w[:-1] += d / 2
    w[1:] += d / 2
    return w


def null_controllability_test(p: Propagator, rank_tol: float = COERCIVITY_TOL,
                              inclusion_tol: float = RANGE_INCLUSION_TOL) -> tuple[bool, float]:
    """Range-inclusion test Ran U(tau,0) within Ran W_tau^{1/2}, with constant c.

    feasible iff every column of U(tau,0) projects onto the numerical range of
    W_tau with residual <= inclusion_tol * column norm; c is the largest
    generalized singular value of the pair (U(tau,0), W_tau^{1/2}) on that
    range, so ||U(tau,0)* z|| <= c ||Psi_tau* z||_{L2} for all z. Infeasible
    verdicts report c = +inf.
    """
    W = ctrl_gramian_quadrature(p).W
    K = p.transitions_to_end()[0]  # U(tau, 0)
    lam, V = np.linalg.eigh(W)
    lam_max = float(lam[-1])
    mask = lam > rank_tol * max(lam_max, 0.0)
    if not np.any(mask):
        return False, math.inf
    Vr = V[:, mask]
    resid = K - Vr @ (Vr.T @ K)
    col_norms = np.linalg.norm(K, axis=0)
    res_norms = np.linalg.norm(resid, axis=0)
    feasible = bool(np.all(res_norms <= inclusion_tol * np.maximum(col_norms, 1e-300)))
    if not feasible:
        return False, math.inf
    scaled = (Vr.T @ K) / np.sqrt(lam[mask])[:, None]
    c = float(np.linalg.norm(scaled, 2))
    return True, c


def exact_controllability_test(sys: LtvSystem, propagator: Propagator | None = None,
                               tol: float = COERCIVITY_TOL) -> DualityReport:
    """Full duality verdict: coercivity of W_tau, duality constant, admissibility,
    and the null-controllability range test."""
    p = propagator if propagator is not None else Propagator(sys)
    gram = ctrl_gramian_quadrature(p)
    controllable, lam_min = coercivity_check(gram, tol)
    delta = float(np.sqrt(max(lam_min, 0.0)))
    adm = admissibility_constant(p)
    null_ok, c = null_controllability_test(p, rank_tol=tol)
    return DualityReport(
        controllable=controllable,
        lambda_min_W=lam_min,
        obs_constant_delta=delta,
        admissibility_M=adm,
        null_controllable=null_ok,
        null_inclusion_c=c,
        coercivity_tol=tol,
    )
