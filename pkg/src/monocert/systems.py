"""Dynamical system definitions.

The main citizen is the planar double pendulum with unit masses and rod
lengths in a constant gravity field, written as a first-order system in
``(alpha1, alpha2, alpha1_dot, alpha2_dot)``. All right-hand sides accept
complex states so trajectories can be continued along paths in complex time.

A small registry of closed-form systems with known complex-time behaviour
(power-law branch point, simple pole, square-root branch) backs the test
suite: their monodromies and singular times are known exactly, so they act
as end-to-end oracles for the transport machinery.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .errors import VectorFieldSingularError

#: below this mass-matrix determinant modulus the pendulum field refuses to evaluate
MASS_DET_TOL = 1e-14

VectorField = Callable[[complex, np.ndarray], np.ndarray]
MatrixField = Callable[[complex, np.ndarray], np.ndarray]
ScalarField = Callable[[np.ndarray], complex]


@dataclass(frozen=True)
class SystemDef:
    """A dynamical system ``dx/dt = field(t, x)`` with analytic Jacobian.

    ``field`` and ``jacobian`` take the (complex) time first so explicitly
    time-dependent systems fit the same interface; autonomous systems ignore
    it. ``jacobian`` is the derivative with respect to the state only.

    ``first_integrals`` are named conserved quantities used as transport
    diagnostics. ``legendre_frame``, when present, maps a state to the
    linearization of the change into canonical coordinates; conjugating a
    monodromy matrix by it must yield a symplectic matrix.
    """

    name: str
    dim: int
    field: VectorField
    jacobian: MatrixField
    first_integrals: tuple[tuple[str, ScalarField], ...] = ()
    legendre_frame: Optional[Callable[[np.ndarray], np.ndarray]] = None
    params: Mapping[str, float] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# double pendulum
# ---------------------------------------------------------------------------

def pendulum_field(x: np.ndarray, g: float = 1.0) -> np.ndarray:
    """Equations of motion of the double pendulum (unit masses and lengths).

    The kinetic energy is ``v1^2 + v1*v2*cos(delta) + v2^2/2`` with
    ``delta = alpha1 - alpha2`` and the potential is
    ``-2g*cos(alpha1) - g*cos(alpha2)``. Solving the Euler-Lagrange
    equations for the accelerations gives the mass-matrix system

        [[2, cos(delta)], [cos(delta), 1]] @ acc = b,
        b1 = -v2^2*sin(delta) - 2g*sin(alpha1),
        b2 =  v1^2*sin(delta) -  g*sin(alpha2),

    inverted in closed form. For complex states the determinant
    ``2 - cos(delta)^2`` can vanish; that is reported as an explicit
    :class:`VectorFieldSingularError` rather than a NaN.
    """
    a1, a2, v1, v2 = x
    delta = a1 - a2
    c = np.cos(delta)
    s = np.sin(delta)
    det = 2.0 - c * c
    if abs(det) < MASS_DET_TOL:
        raise VectorFieldSingularError(
            f"pendulum mass matrix is singular (|2 - cos^2(delta)| = {abs(det):.3e})"
        )
    b1 = -v2 * v2 * s - 2.0 * g * np.sin(a1)
    b2 = v1 * v1 * s - g * np.sin(a2)
    return np.array([v1, v2, (b1 - c * b2) / det, (-c * b1 + 2.0 * b2) / det])


def pendulum_jacobian(x: np.ndarray, g: float = 1.0) -> np.ndarray:
    """State Jacobian of :func:`pendulum_field`, derived analytically.

    With ``acc = adj(M) @ b / det``, the chain rule splits each partial into
    the ``b`` variation at frozen mass matrix plus the ``delta`` variation of
    ``adj(M)/det`` applied to ``b``.
    """
    a1, a2, v1, v2 = x
    delta = a1 - a2
    c = np.cos(delta)
    s = np.sin(delta)
    det = 2.0 - c * c
    if abs(det) < MASS_DET_TOL:
        raise VectorFieldSingularError(
            f"pendulum mass matrix is singular (|2 - cos^2(delta)| = {abs(det):.3e})"
        )
    b1 = -v2 * v2 * s - 2.0 * g * np.sin(a1)
    b2 = v1 * v1 * s - g * np.sin(a2)
    acc1 = (b1 - c * b2) / det
    acc2 = (-c * b1 + 2.0 * b2) / det

    # d(acc)/d(delta) at frozen b:  adj' = [[0, s], [s, 0]],  det' = 2*c*s
    u1 = (s * b2 - 2.0 * c * s * acc1) / det
    u2 = (s * b1 - 2.0 * c * s * acc2) / det

    # partials of b; alpha1/alpha2 enter both directly and through delta
    db1_da1 = -v2 * v2 * c - 2.0 * g * np.cos(a1)
    db1_da2 = v2 * v2 * c
    db1_dv2 = -2.0 * v2 * s
    db2_da1 = v1 * v1 * c
    db2_da2 = -v1 * v1 * c - g * np.cos(a2)
    db2_dv1 = 2.0 * v1 * s

    def minv(y1, y2):
        return (y1 - c * y2) / det, (-c * y1 + 2.0 * y2) / det

    da1_1, da1_2 = minv(db1_da1, db2_da1)
    da2_1, da2_2 = minv(db1_da2, db2_da2)
    dv1_1, dv1_2 = minv(0.0 * v1, db2_dv1)
    dv2_1, dv2_2 = minv(db1_dv2, 0.0 * v2)

    zero = 0.0 * a1  # keeps dtype (real in, real out)
    one = zero + 1.0
    return np.array(
        [
            [zero, zero, one, zero],
            [zero, zero, zero, one],
            [da1_1 + u1, da1_2 - u1, dv1_1, dv2_1],
            [da2_1 + u2, da2_2 - u2, dv1_2, dv2_2],
        ]
    )


def pendulum_energy(x: np.ndarray, g: float = 1.0) -> complex:
    """Total energy, the Legendre transform of the Lagrangian."""
    a1, a2, v1, v2 = x
    delta = a1 - a2
    return (
        v1 * v1
        + v1 * v2 * np.cos(delta)
        + 0.5 * v2 * v2
        - 2.0 * g * np.cos(a1)
        - g * np.cos(a2)
    )


def pendulum_legendre_frame(x: np.ndarray) -> np.ndarray:
    """Linearized change from (q, qdot) to canonical (q, p) coordinates.

    ``p1 = 2*v1 + v2*cos(delta)``, ``p2 = v1*cos(delta) + v2``; the frame is
    the block matrix ``[[I, 0], [dp/dq, dp/dqdot]]``. Conjugating variational
    monodromy by it lands in coordinates where the matrix must be symplectic.
    """
    a1, a2, v1, v2 = x
    delta = a1 - a2
    c = np.cos(delta)
    s = np.sin(delta)
    zero = 0.0 * a1
    one = zero + 1.0
    return np.array(
        [
            [one, zero, zero, zero],
            [zero, one, zero, zero],
            [-v2 * s, v2 * s, 2.0 + zero, c],
            [-v1 * s, v1 * s, c, one],
        ]
    )


def double_pendulum(g: float = 1.0) -> SystemDef:
    """Double-pendulum system definition with gravity ``g``."""
    return SystemDef(
        name="double-pendulum",
        dim=4,
        field=lambda t, x: pendulum_field(x, g),
        jacobian=lambda t, x: pendulum_jacobian(x, g),
        first_integrals=(("energy", lambda x: pendulum_energy(x, g)),),
        legendre_frame=pendulum_legendre_frame,
        params={"g": g},
    )


# ---------------------------------------------------------------------------
# closed-form oracle systems
# ---------------------------------------------------------------------------

def linear_branch(exponent: float | complex = 1.0 / 3.0) -> SystemDef:
    """``dx/dt = exponent * x / t``: solution ``c * t**exponent``.

    A loop winding once around t = 0 multiplies the solution (and its 1x1
    variational frame) by ``exp(2*pi*i*exponent)``.
    """
    lam = complex(exponent)

    def fld(t, x):
        return lam * x / t

    def jac(t, x):
        return np.array([[lam / t]])

    return SystemDef(
        name="linear-branch", dim=1, field=fld, jacobian=jac,
        params={"exponent_re": lam.real, "exponent_im": lam.imag},
    )


def pole_system() -> SystemDef:
    """``dx/dt = x^2``: solution ``1/(c - t)`` with a simple (order-1) pole."""
    return SystemDef(
        name="pole",
        dim=1,
        field=lambda t, x: x * x,
        jacobian=lambda t, x: np.array([[2.0 * x[0]]]),
    )


def root_system() -> SystemDef:
    """``dx/dt = 1/(2x)``: solution ``sqrt(t + c)`` with an order-2 branch point.

    The state stays bounded at the singularity while the field blows up, so
    this oracle exercises detection by step collapse rather than state norm.
    """
    return SystemDef(
        name="root",
        dim=1,
        field=lambda t, x: 0.5 / x,
        jacobian=lambda t, x: np.array([[-0.5 / (x[0] * x[0])]]),
    )


def oracle_registry() -> list[SystemDef]:
    """Validation systems with closed-form complex-time behaviour."""
    return [linear_branch(), pole_system(), root_system()]


def system_by_name(name: str, params: Mapping[str, float] | None = None) -> SystemDef:
    """Resolve a CLI/config system name.

    Accepted names: ``double-pendulum`` (parameter ``g``),
    ``oracle:linear-branch:<exponent>`` (exponent as a float or ``p/q``),
    ``oracle:pole``, ``oracle:root``.
    """
    params = dict(params or {})
    if name == "double-pendulum":
        return double_pendulum(g=float(params.get("g", 1.0)))
    if name.startswith("oracle:"):
        parts = name.split(":")
        kind = parts[1] if len(parts) > 1 else ""
        if kind == "linear-branch":
            if len(parts) > 2 and parts[2]:
                raw = parts[2]
                if "/" in raw:
                    num, den = raw.split("/")
                    exponent = float(num) / float(den)
                else:
                    exponent = float(raw)
            else:
                exponent = 1.0 / 3.0
            return linear_branch(exponent)
        if kind == "pole":
            return pole_system()
        if kind == "root":
            return root_system()
    raise ValueError(f"unknown system name: {name!r}")
