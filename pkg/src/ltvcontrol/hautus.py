"""Hautus-type observability certificates.

Frozen-time generators are G = -A(s0), matching the sign of x' + A(t)x = 0.
Two inequalities are evaluated:

* the classical frequency-domain bound for a generator G over the open left
  half-plane, ||(sI - G)x||^2 + |Re s| ||Cx||^2 >= m^2 |Re s|^2 ||x||^2, with
  the constant m carried explicitly so callers can bisect for the largest
  feasible value; and

* the non-autonomous functional over Re(lambda) > 0,

      ||C x|| / sqrt(2 Re lambda)
      + M * int_0^tau ||(lambda I + A(s)) x|| e^{-Re(lambda) s} ds
      >= delta ||x||,

  a necessary condition for exact observability when delta is the
  observability constant and M the admissibility constant of C.

Also here: the frozen-parameter observability constants m(s0) of the
autonomous systems obtained by fixing A at one instant, the measure-witness
selection of a time where ||f(s)x|| clears its average lower bound, and the
averaging identity f(0) = (1/sigma) int f - int (1/t^2) int (f(t) - f(s)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .duality import admissibility_constant
from .gramian import obs_gramian
from .propagate import Propagator
from .rng import Lcg64
from .sysmodel import LtvSystem, TimeGrid


@dataclass(frozen=True)
class HautusGrid:
    """Complex test frequencies plus unit test vectors, in one half-plane."""

    lambdas: np.ndarray
    test_vectors: np.ndarray     # shape (count, n), unit rows
    half_plane: str = "right"    # "right" (Re > 0) or "left" (Re < 0)

    def __post_init__(self):
        lambdas = np.asarray(self.lambdas, dtype=complex)
        vectors = np.asarray(self.test_vectors)
        object.__setattr__(self, "lambdas", lambdas)
        object.__setattr__(self, "test_vectors", vectors)
        if self.half_plane == "right":
            if not np.all(lambdas.real > 0):
                raise ValueError("all lambdas must satisfy Re(lambda) > 0")
        elif self.half_plane == "left":
            if not np.all(lambdas.real < 0):
                raise ValueError("all lambdas must satisfy Re(lambda) < 0")
        else:
            raise ValueError(f"unknown half_plane {self.half_plane!r}")
        norms = np.linalg.norm(vectors, axis=1)
        if not np.all(np.abs(norms - 1.0) <= 1e-12):
            raise ValueError("test vectors must have unit norm")


@dataclass(frozen=True)
class HautusReport:
    margins: np.ndarray          # lambdas x test vectors
    min_margin: float
    witness_lambda: complex
    witness_vector: np.ndarray
    delta: float
    admissibility_M: float
    constant_C: bool             # False when C(t) varies; C(0) used then


def default_hautus_grid(n: int, seed: int = 1, n_vectors: int = 50,
                        re_bounds: tuple[float, float] = (0.1, 10.0),
                        re_points: int = 7,
                        im_values: tuple[float, ...] = (0.0, 1.0, -1.0, 10.0, -10.0)) -> HautusGrid:
    """Logarithmic Re(lambda) sweep crossed with fixed imaginary offsets,
    plus seeded random unit test vectors."""
    res = np.geomspace(re_bounds[0], re_bounds[1], re_points)
    lambdas = np.array([complex(r, im) for r in res for im in im_values])
    gen = Lcg64(seed)
    vectors = np.array([gen.unit_vector(n) for _ in range(n_vectors)])
    return HautusGrid(lambdas, vectors)


# --- classical left half-plane form ----------------------------------------

def russell_weiss_margin(G: np.ndarray, C: np.ndarray, s: complex, x, m: float) -> float:
    """||(sI - G)x||^2 + |Re s| ||Cx||^2 - m^2 |Re s|^2 ||x||^2 for Re s < 0."""
    s = complex(s)
    if s.real >= 0:
        raise ValueError("Re(s) must be negative")
    G = np.asarray(G)
    C = np.asarray(C)
    x = np.asarray(x).reshape(G.shape[0])
    res = s * x - G @ x
    re = abs(s.real)
    return float(
        np.vdot(res, res).real + re * np.vdot(C @ x, C @ x).real
        - m * m * re * re * np.vdot(x, x).real
    )


def russell_weiss_min_margin(G: np.ndarray, C: np.ndarray, s: complex,
                             m: float) -> tuple[float, np.ndarray]:
    """Minimum of russell_weiss_margin over unit x, with the minimizing vector.

    The quadratic form is (sI-G)*(sI-G) + |Re s| C*C, Hermitian PSD, so the
    minimum is its smallest eigenvalue minus m^2 |Re s|^2.
    """
    s = complex(s)
    if s.real >= 0:
        raise ValueError("Re(s) must be negative")
    G = np.asarray(G, dtype=complex)
    C = np.asarray(C, dtype=complex)
    n = G.shape[0]
    R = s * np.eye(n) - G
    H = R.conj().T @ R + abs(s.real) * (C.conj().T @ C)
    eigs, vecs = np.linalg.eigh(H)
    return float(eigs[0] - m * m * s.real * s.real), vecs[:, 0]


# --- non-autonomous functional ----------------------------------------------

def nonautonomous_hautus_margin(sys: LtvSystem, p: Propagator, lam: complex, x,
                                delta: float, M: float) -> float:
    """Signed margin of the non-autonomous inequality at one (lambda, x).

    Nonnegative whenever the system is exactly observable with constant delta
    and C is admissible with constant M. When C(t) varies, the boundary term
    uses C(0).
    """
    lam = complex(lam)
    if lam.real <= 0:
        raise ValueError("Re(lambda) must be positive")
    x = np.asarray(x).reshape(sys.n)
    xnorm = float(np.linalg.norm(x))
    if xnorm == 0.0:
        return 0.0
    boundary = float(np.linalg.norm(sys.C(0.0) @ x)) / np.sqrt(2 * lam.real)
    integral = _hautus_integral(sys, lam, x[:, None])[0]
    return boundary + M * integral - delta * xnorm


def _hautus_integral(sys: LtvSystem, lam: complex, X: np.ndarray) -> np.ndarray:
    """Columnwise quadrature of int_0^tau ||(lambda I + A(s)) x|| e^{-Re(lambda) s} ds."""
    nodes = sys.grid.nodes
    w = sys.grid.weights()
    out = np.zeros(X.shape[1])
    for i, t in enumerate(nodes):
        if w[i] == 0.0:
            continue
        shifted = lam * X + sys.A(t) @ X
        out += w[i] * np.exp(-lam.real * t) * np.linalg.norm(shifted, axis=0)
    return out


def hautus_sweep(sys: LtvSystem, grid: HautusGrid,
                 propagator: Propagator | None = None) -> HautusReport:
    """Margins over all (lambda, test vector) pairs with internally computed
    delta and M; min_margin >= -1e-9 certifies the necessary condition on the grid."""
    if grid.half_plane != "right":
        raise ValueError("hautus_sweep needs Re(lambda) > 0 frequencies")
    p = propagator if propagator is not None else Propagator(sys)
    delta = float(np.sqrt(max(obs_gramian(p).lambda_min, 0.0)))
    M = admissibility_constant(p)
    constant_C = sys.C.kind == "constant"
    C0 = sys.C(0.0)
    X = grid.test_vectors.T  # n x count
    margins = np.empty((grid.lambdas.size, X.shape[1]))
    for a, lam in enumerate(grid.lambdas):
        boundary = np.linalg.norm(C0 @ X, axis=0) / np.sqrt(2 * lam.real)
        integral = _hautus_integral(sys, complex(lam), X)
        margins[a] = boundary + M * integral - delta * np.linalg.norm(X, axis=0)
    flat = int(np.argmin(margins))
    ia, ix = divmod(flat, X.shape[1])
    return HautusReport(
        margins=margins,
        min_margin=float(margins[ia, ix]),
        witness_lambda=complex(grid.lambdas[ia]),
        witness_vector=np.array(grid.test_vectors[ix]),
        delta=delta,
        admissibility_M=M,
        constant_C=constant_C,
    )


# --- frozen-parameter comparison ---------------------------------------------

def _frozen_gramian(A0: np.ndarray, C0: np.ndarray, grid: TimeGrid) -> np.ndarray:
    """int_0^tau e^{-A0* t} C0* C0 e^{-A0 t} dt by the grid's quadrature."""
    nodes = grid.nodes
    w = grid.weights()
    n = A0.shape[0]
    Q = np.zeros((n, n))
    if grid.is_uniform():
        E = scipy.linalg.expm(-A0 * (nodes[1] - nodes[0]))
        P = np.eye(n)
        for i in range(nodes.size):
            if w[i] != 0.0:
                CU = C0 @ P
                Q += w[i] * (CU.T @ CU)
            if i < nodes.size - 1:
                P = E @ P
    else:
        for i, t in enumerate(nodes):
            if w[i] == 0.0:
                continue
            CU = C0 @ scipy.linalg.expm(-A0 * t)
            Q += w[i] * (CU.T @ CU)
    return 0.5 * (Q + Q.T)


def frozen_observability_constant(sys: LtvSystem, s0: float) -> float:
    """m(s0) = sqrt(lambda_min) of the frozen-coefficient observability Gramian
    at time s0; independent of s0 for autonomous systems."""
    if not 0 <= s0 <= sys.tau * (1 + 1e-12):
        raise ValueError(f"s0 = {s0} outside [0, {sys.tau}]")
    Q = _frozen_gramian(sys.A(s0), sys.C(s0), sys.grid)
    return float(np.sqrt(max(np.linalg.eigvalsh(Q)[0], 0.0)))


@dataclass(frozen=True)
class FrozenComparison:
    s_values: np.ndarray
    m_values: np.ndarray
    inf_frozen: float
    delta_ltv: float


def frozen_vs_ltv_report(sys: LtvSystem, propagator: Propagator | None = None,
                         stride: int = 1) -> FrozenComparison:
    """Frozen constants m(s) across grid nodes next to the LTV constant delta.

    Observational only: positivity of both is reported, never asserted as an
    implication between the frozen and time-varying notions.
    """
    p = propagator if propagator is not None else Propagator(sys)
    delta = float(np.sqrt(max(obs_gramian(p).lambda_min, 0.0)))
    idx = list(range(0, sys.grid.steps + 1, max(stride, 1)))
    if idx[-1] != sys.grid.steps:
        idx.append(sys.grid.steps)
    s_values = sys.grid.nodes[idx]
    m_values = np.array([frozen_observability_constant(sys, s) for s in s_values])
    return FrozenComparison(
        s_values=s_values,
        m_values=m_values,
        inf_frozen=float(np.min(m_values)),
        delta_ltv=delta,
    )


# --- measure witness and averaging identity ---------------------------------

def find_witness_time(samples, a: float, b: float, delta: float, x_norm: float) -> float:
    """Pick a sample time s* with value(s*) >= (delta / (b - a)) * x_norm.

    Requires the trapezoid quadrature of the samples over [a, b] to reach
    delta * x_norm; the argmax sample then clears the averaged bound.
    """
    pairs = sorted((float(s), float(v)) for s, v in samples)
    s_vals = np.array([s for s, _ in pairs])
    values = np.array([v for _, v in pairs])
    if s_vals.size < 2 or s_vals[0] < a - 1e-12 or s_vals[-1] > b + 1e-12:
        raise ValueError("samples must contain at least two points inside [a, b]")
    total = float(np.trapezoid(values, s_vals))
    if total < delta * x_norm * (1 - 1e-12):
        raise ValueError(
            f"quadrature {total} below the required mass {delta * x_norm}"
        )
    return float(s_vals[int(np.argmax(values))])


def averaging_identity_residual(f_samples, sigma: float) -> float:
    """Residual of f(0) = (1/sigma) int_0^sigma f(s) ds
    - int_0^sigma (1/t^2) (int_0^t (f(t) - f(s)) ds) dt on uniform samples.

    The inner cancellation t f(t) - int_0^t f is carried out before dividing
    by t^2; its value at t = 0 (which tends to f'(0)/2) is filled by linear
    extrapolation from the first two interior nodes.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    f = np.asarray(f_samples, dtype=float)
    if f.ndim != 1 or f.size < 3:
        raise ValueError("need at least 3 uniform samples on [0, sigma]")
    t = np.linspace(0.0, float(sigma), f.size)
    h = t[1] - t[0]
    F = np.concatenate([[0.0], np.cumsum((f[1:] + f[:-1]) * h / 2)])
    g = np.empty_like(f)
    g[1:] = (t[1:] * f[1:] - F[1:]) / t[1:] ** 2
    g[0] = 2 * g[1] - g[2]
    rhs = F[-1] / sigma - float(np.trapezoid(g, t))
    return float(abs(f[0] - rhs))
