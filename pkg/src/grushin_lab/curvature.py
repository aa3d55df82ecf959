"""Weighted Riemannian curvature of the Grushin half-planes.

Off the y-axis the Grushin plane is the Riemannian metric
g = dx^2 + dy^2 / x^2, and Lebesgue measure is e^{-V} vol_g with
V = -log|x|.  The Bakry-Emery tensor

    Ric_{N,V} = Ric_g + Hess V - dV (x) dV / (N - n),   n = 2,

is everywhere <= -g / x^2, so the curvature-dimension route via Bakry-Emery
cannot produce MCP(0, N) for any N.

Tensors are stored as 2x2 arrays in the coordinate coframe (dx, dy); the
orthonormal frame is X1 = d/dx, X2 = x d/dy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadDimension, SingularLocus

AXIS_GUARD = 1e-8
DIM = 2


@dataclass(frozen=True)
class TensorEval:
    """Symmetric bilinear form at ``point``, coordinate components."""

    point: tuple
    components: np.ndarray

    def frame_components(self) -> np.ndarray:
        """Components on the orthonormal frame (X1, X2)."""
        E = frame_matrix(self.point[0])
        return E.T @ self.components @ E

    @classmethod
    def from_frame(cls, point, frame_comp) -> TensorEval:
        Einv = np.linalg.inv(frame_matrix(point[0]))
        return cls(tuple(point), Einv.T @ np.asarray(frame_comp, dtype=float) @ Einv)

    def __add__(self, other):
        return TensorEval(self.point, self.components + other.components)

    def __sub__(self, other):
        return TensorEval(self.point, self.components - other.components)

    def scaled(self, c: float):
        return TensorEval(self.point, c * self.components)


@dataclass(frozen=True)
class WeightedData:
    V: float
    n: int
    N: float


@dataclass(frozen=True)
class FrameConnection:
    """Coefficient pairs (on X1, X2) of nabla_{Xi} Xj."""

    d11: tuple
    d12: tuple
    d21: tuple
    d22: tuple


def _guard(p):
    x = p[0]
    if abs(x) < AXIS_GUARD:
        raise SingularLocus(f"x = {x} is on the singular set x = 0")
    return x


def _check_N(N):
    if not N > DIM:
        raise BadDimension(f"N = {N} must exceed the dimension {DIM}")


def frame_matrix(x: float) -> np.ndarray:
    """Columns are X1, X2 in coordinates (d/dx, d/dy)."""
    return np.array([[1.0, 0.0], [0.0, x]])


def metric_at(p) -> TensorEval:
    x = _guard(p)
    return TensorEval(tuple(p), np.diag([1.0, 1.0 / (x * x)]))


def weighted_data(p, N: float) -> WeightedData:
    x = _guard(p)
    _check_N(N)
    return WeightedData(V=-math.log(abs(x)), n=DIM, N=N)


def connection_coeffs(p) -> FrameConnection:
    """Levi-Civita connection in the frame: nabla_{X2} X1 = -X2/x, nabla_{X2} X2 = X1/x."""
    x = _guard(p)
    w = 1.0 / x
    return FrameConnection(d11=(0.0, 0.0), d12=(0.0, 0.0), d21=(0.0, -w), d22=(w, 0.0))


def gauss_curvature(p) -> float:
    """<R(X1, X2) X2, X1> from the frame connection.

    With omega = 1/x, nabla_{X2} X2 = omega X1 and [X1, X2] = X2 / x:
    R(X1, X2) X2 = X1(omega) X1 - (1/x) omega X1.
    """
    x = _guard(p)
    omega, d_omega = 1.0 / x, -1.0 / (x * x)
    bracket = 1.0 / x
    return d_omega - bracket * omega


def ricci(p) -> TensorEval:
    """Ric_g = K g (two dimensions)."""
    return metric_at(p).scaled(gauss_curvature(p))


def hessian_weight(p) -> TensorEval:
    """Hess V(Xi, Xj) = Xi(Xj V) - (nabla_{Xi} Xj) V with V = -log|x|."""
    x = _guard(p)
    dV = np.array([-1.0 / x, 0.0])  # (X1 V, X2 V)
    d_X1V_dx = 1.0 / (x * x)  # X1(X1 V)
    conn = connection_coeffs(p)
    H = np.zeros((2, 2))
    H[0, 0] = d_X1V_dx - np.dot(conn.d11, dV)
    H[0, 1] = 0.0 - np.dot(conn.d12, dV)
    H[1, 0] = 0.0 - np.dot(conn.d21, dV)
    H[1, 1] = 0.0 - np.dot(conn.d22, dV)
    return TensorEval.from_frame(p, H)


def dV_squared(p) -> TensorEval:
    """dV (x) dV = dx (x) dx / x^2."""
    x = _guard(p)
    return TensorEval(tuple(p), np.array([[1.0 / (x * x), 0.0], [0.0, 0.0]]))


def bakry_emery_assembled(p, N: float) -> TensorEval:
    _check_N(N)
    return ricci(p) + hessian_weight(p) - dV_squared(p).scaled(1.0 / (N - DIM))


def bakry_emery(p, N: float) -> TensorEval:
    """Closed form -g / x^2 - dx (x) dx / (x^2 (N - 2))."""
    x = _guard(p)
    _check_N(N)
    g = metric_at(p).components
    dx2 = np.array([[1.0, 0.0], [0.0, 0.0]])
    return TensorEval(tuple(p), -g / (x * x) - dx2 / (x * x * (N - DIM)))


def negativity_eigenvalues(p, N: float) -> np.ndarray:
    """Eigenvalues (ascending) of Ric_{N,V} + g / x^2 in the orthonormal frame."""
    x = _guard(p)
    shifted = bakry_emery(p, N) + metric_at(p).scaled(1.0 / (x * x))
    return np.linalg.eigvalsh(shifted.frame_components())


def negativity_check(p, N: float, tol: float = 1e-12) -> bool:
    """True iff Ric_{N,V} <= -g / x^2 at p."""
    return bool(np.all(negativity_eigenvalues(p, N) <= tol))


# ---------------------------------------------------------------------------
# Finite-difference oracles
# ---------------------------------------------------------------------------


def _coord_metric(x, y):
    return np.array([[1.0, 0.0], [0.0, 1.0 / (x * x)]])


def _brioschi(x, y, h, E, G) -> float:
    def W(a, b):
        return math.sqrt(E(a, b) * G(a, b))

    def Gx_over_W(a, b):
        return (G(a + h, b) - G(a - h, b)) / (2 * h) / W(a, b)

    def Ey_over_W(a, b):
        return (E(a, b + h) - E(a, b - h)) / (2 * h) / W(a, b)

    dx_term = (Gx_over_W(x + h, y) - Gx_over_W(x - h, y)) / (2 * h)
    dy_term = (Ey_over_W(x, y + h) - Ey_over_W(x, y - h)) / (2 * h)
    return -(dx_term + dy_term) / (2 * W(x, y))


def fd_gauss_curvature(p, h: float = 1e-3, E=None, G=None, richardson: bool = True) -> float:
    """Gauss curvature of an orthogonal metric E dx^2 + G dy^2 by central differences.

    K = -1 / (2 sqrt(EG)) * [ d/dx (G_x / sqrt(EG)) + d/dy (E_y / sqrt(EG)) ]

    The nested differences are O(h^2); with ``richardson`` the steps h and h/2
    are combined into an O(h^4) estimate.
    """
    x, y = p
    if abs(x) <= 2 * h:
        raise SingularLocus("finite-difference stencil reaches the y-axis")
    E = E or (lambda a, b: 1.0)
    G = G or (lambda a, b: 1.0 / (a * a))
    coarse = _brioschi(x, y, h, E, G)
    if not richardson:
        return coarse
    fine = _brioschi(x, y, h / 2, E, G)
    return (4 * fine - coarse) / 3


def fd_christoffel(p, h: float = 1e-5) -> np.ndarray:
    """Coordinate Christoffel symbols Gamma[k, i, j] from finite differences of g."""
    x, y = p
    if abs(x) <= 2 * h:
        raise SingularLocus("finite-difference stencil reaches the y-axis")
    dg = np.zeros((2, 2, 2))  # dg[l, i, j] = d_l g_ij
    dg[0] = (_coord_metric(x + h, y) - _coord_metric(x - h, y)) / (2 * h)
    dg[1] = (_coord_metric(x, y + h) - _coord_metric(x, y - h)) / (2 * h)
    ginv = np.linalg.inv(_coord_metric(x, y))
    gamma = np.zeros((2, 2, 2))
    for k in range(2):
        for i in range(2):
            for j in range(2):
                gamma[k, i, j] = 0.5 * sum(
                    ginv[k, l] * (dg[i, j, l] + dg[j, i, l] - dg[l, i, j]) for l in range(2)
                )
    return gamma


def fd_frame_connection(p, h: float = 1e-5) -> FrameConnection:
    """Frame connection rebuilt from finite-difference Christoffel symbols.

    nabla_{Xi} Xj = Xi(Xj^k) d_k + Xi^a Xj^b Gamma^k_ab d_k, then expressed
    back on (X1, X2).
    """
    x = p[0]
    gamma = fd_christoffel(p, h)
    E = frame_matrix(x)
    # derivative of frame components along each frame field: only X1(X2^y) = 1
    dframe = np.zeros((2, 2, 2))  # dframe[i, j] = Xi applied to coordinate components of Xj
    dframe[0, 1] = [0.0, 1.0]
    Einv = np.linalg.inv(E)
    out = {}
    for i in range(2):
        for j in range(2):
            coord = dframe[i, j] + np.einsum("kab,a,b->k", gamma, E[:, i], E[:, j])
            out[f"d{i + 1}{j + 1}"] = tuple(float(c) for c in Einv @ coord)
    return FrameConnection(**out)
