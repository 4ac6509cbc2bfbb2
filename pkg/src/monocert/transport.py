"""Adaptive transport of states and variational frames along complex-time paths.

Each path segment is parametrized by a real ``s`` in [0, 1]; the chain-rule
factor ``dgamma/ds`` turns the complex-time system

    dx/dt = v(t, x),   dXi/dt = A(t, x) Xi,   dw/dt = tr A(t, x)

into a real-parameter (still complex-valued) system stepped with an embedded
Dormand-Prince 5(4) pair under PI step-size control. The fundamental matrix
``Xi`` starts at the identity and the trace integral ``w`` at zero, so every
completed transport carries its own Wronskian consistency check
``det Xi = exp(w)``.

Blow-up of the state norm, step-size underflow (the typical signature of an
algebraic branch point where only derivatives blow up), and step-budget
exhaustion are reported as statuses with the failure location on the path,
never as exceptions.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .errors import TransportError, VectorFieldSingularError
from .geometry import Line, PathSpec, require_finite
from .systems import SystemDef

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
# fifth-order minus embedded fourth-order weights
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

# Hairer-style PI controller constants
_SAFE = 0.9
_BETA = 0.04
_EXPO1 = 0.2 - 0.75 * _BETA
_FAC_MIN = 0.2   # strongest shrink per step
_FAC_MAX = 10.0  # strongest growth per step


class TransportStatus(enum.Enum):
    COMPLETED = "completed"
    BLOWUP = "blowup"
    STEP_UNDERFLOW = "step-underflow"
    MAX_STEPS = "max-steps"


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and guards for the adaptive stepper.

    ``blowup_norm`` bounds the state 2-norm; crossing it flags a blow-up.
    ``h_min``/``h_init`` are in segment-parameter units (segments span
    s in [0, 1]).
    """

    rtol: float = 1e-10
    atol: float = 1e-12
    h_init: float = 1e-3
    h_min: float = 1e-13
    max_steps: int = 10_000_000
    blowup_norm: float = 1e8

    def __post_init__(self):
        for name in ("rtol", "atol", "h_init", "h_min", "blowup_norm"):
            if not (getattr(self, name) > 0.0):
                raise ValueError(f"IntegratorConfig.{name} must be positive")
        if not self.h_min < self.h_init:
            raise ValueError("IntegratorConfig requires h_min < h_init")
        if self.max_steps <= 0:
            raise ValueError("IntegratorConfig.max_steps must be positive")

    def tightened(self, factor: float) -> "IntegratorConfig":
        """Same configuration with tolerances divided by ``factor``."""
        return replace(self, rtol=self.rtol / factor, atol=self.atol / factor)


@dataclass(frozen=True)
class TransportResult:
    """Outcome of one transport.

    ``param_estimate``/``segment_index`` locate the failure on the path for
    non-completed statuses. ``log_det`` accumulates the integral of the
    Jacobian trace (only when the variational matrix is carried) and
    ``log_det_residual`` is the relative Wronskian defect
    ``|det Xi - exp(w)| / |exp(w)|``.
    """

    status: TransportStatus
    x_end: np.ndarray
    fundamental: Optional[np.ndarray]
    log_det: complex
    steps: int
    max_local_error: float
    segment_index: Optional[int] = None
    param_estimate: Optional[float] = None
    t_end: Optional[complex] = None
    trace: Optional[list[tuple[float, float, float, float, float]]] = None

    @property
    def completed(self) -> bool:
        return self.status is TransportStatus.COMPLETED

    @property
    def log_det_residual(self) -> float:
        if self.fundamental is None:
            return math.nan
        expected = np.exp(self.log_det)
        return float(
            abs(np.linalg.det(self.fundamental) - expected) / max(abs(expected), 1e-300)
        )


def _scaled_error(err_vec: np.ndarray, y_old: np.ndarray, y_new: np.ndarray,
                  atol: float, rtol: float) -> float:
    scale = atol + rtol * np.maximum(np.abs(y_old), np.abs(y_new))
    ratio = np.abs(err_vec) / scale
    return float(np.sqrt(np.mean(ratio * ratio)))


def transport(
    system: SystemDef,
    x0: np.ndarray,
    path: PathSpec,
    cfg: IntegratorConfig = IntegratorConfig(),
    with_variational: bool = True,
    collect_trace: bool = False,
) -> TransportResult:
    """Integrate state (and optionally the variational frame) along ``path``."""
    dim = system.dim
    x0 = np.asarray(x0, dtype=complex)
    if x0.shape != (dim,):
        raise ValueError(f"initial state must have shape ({dim},), got {x0.shape}")
    require_finite(x0, "initial state")

    nvar = dim * dim if with_variational else 0
    y = np.empty(dim + nvar + (1 if with_variational else 0), dtype=complex)
    y[:dim] = x0
    if with_variational:
        y[dim:dim + nvar] = np.eye(dim, dtype=complex).ravel()
        y[-1] = 0.0

    trace_rows: Optional[list] = [] if collect_trace else None
    steps_total = 0
    max_err = 0.0
    budget = cfg.max_steps

    def unpack(status, seg_index=None, param=None, t_end=None):
        xi = y[dim:dim + nvar].reshape(dim, dim).copy() if with_variational else None
        return TransportResult(
            status=status,
            x_end=y[:dim].copy(),
            fundamental=xi,
            log_det=complex(y[-1]) if with_variational else 0.0,
            steps=steps_total,
            max_local_error=max_err,
            segment_index=seg_index,
            param_estimate=param,
            t_end=t_end,
            trace=trace_rows,
        )

    if not path.segments:
        return unpack(TransportStatus.COMPLETED, t_end=None)

    for seg_index, seg in enumerate(path.segments):

        def rhs(s: float, yv: np.ndarray) -> np.ndarray:
            t = seg.point(s)
            dtds = seg.velocity(s)
            x = yv[:dim]
            out = np.empty_like(yv)
            out[:dim] = dtds * system.field(t, x)
            if with_variational:
                a = system.jacobian(t, x)
                xi = yv[dim:dim + nvar].reshape(dim, dim)
                out[dim:dim + nvar] = (dtds * (a @ xi)).ravel()
                out[-1] = dtds * np.trace(a)
            return out

        status, y, s_stop, used, seg_max_err = _step_segment(
            rhs, y, seg, seg_index, cfg, budget, dim, trace_rows
        )
        steps_total += used
        budget -= used
        max_err = max(max_err, seg_max_err)
        if status is not TransportStatus.COMPLETED:
            return unpack(status, seg_index, s_stop, seg.point(s_stop))

    return unpack(TransportStatus.COMPLETED, t_end=path.end_point)


def _step_segment(rhs, y, seg, seg_index, cfg, budget, dim, trace_rows):
    """March one segment from s = 0 to 1. Returns (status, y, s, steps, max_err)."""
    s = 0.0
    h = min(cfg.h_init, 1.0)
    steps = 0
    max_err = 0.0
    facold = 1e-4
    rejected = False

    try:
        k1 = rhs(s, y)
        if not np.all(np.isfinite(k1)):
            raise VectorFieldSingularError("non-finite field at segment start")
    except VectorFieldSingularError:
        return TransportStatus.STEP_UNDERFLOW, y, s, steps, max_err

    if trace_rows is not None:
        t0 = seg.point(0.0)
        trace_rows.append(
            (float(seg_index), t0.real, t0.imag, float(np.linalg.norm(y[:dim])), h)
        )

    k = [k1] + [np.empty_like(y) for _ in range(6)]

    with np.errstate(all="ignore"):
        while s < 1.0:
            if h < cfg.h_min:
                return TransportStatus.STEP_UNDERFLOW, y, s, steps, max_err
            if steps >= budget:
                return TransportStatus.MAX_STEPS, y, s, steps, max_err
            last = h >= (1.0 - s) * (1.0 - 1e-14)
            if last:
                h = 1.0 - s

            bad = False
            try:
                for i in range(1, 7):
                    yi = y + h * sum(_A[i][j] * k[j] for j in range(i))
                    if not np.all(np.isfinite(yi)):
                        bad = True
                        break
                    k[i] = rhs(s + _C[i] * h, yi)
                    if not np.all(np.isfinite(k[i])):
                        bad = True
                        break
            except VectorFieldSingularError:
                bad = True

            if not bad:
                y_new = y + h * sum(_B5[i] * k[i] for i in range(7))
                err_vec = h * sum(_E[i] * k[i] for i in range(7))
                bad = not np.all(np.isfinite(y_new))

            if bad:
                h *= 0.25
                rejected = True
                continue

            err = _scaled_error(err_vec, y, y_new, cfg.atol, cfg.rtol)
            steps += 1

            if err <= 1.0:
                s = 1.0 if last else s + h
                y = y_new
                k[0] = k[6]  # FSAL: y_new's first stage was already evaluated
                max_err = max(max_err, err)
                if trace_rows is not None:
                    t = seg.point(s)
                    trace_rows.append(
                        (seg_index + s, t.real, t.imag,
                         float(np.linalg.norm(y[:dim])), h)
                    )
                if float(np.linalg.norm(y[:dim])) > cfg.blowup_norm:
                    return TransportStatus.BLOWUP, y, s, steps, max_err
                fac11 = err ** _EXPO1
                fac = fac11 / facold ** _BETA
                fac = max(1.0 / _FAC_MAX, min(1.0 / _FAC_MIN, fac / _SAFE))
                h_new = h / fac
                if rejected:
                    h_new = min(h_new, h)
                    rejected = False
                facold = max(err, 1e-4)
                h = h_new
            else:
                fac11 = err ** _EXPO1
                h = h / min(1.0 / _FAC_MIN, fac11 / _SAFE)
                rejected = True

    return TransportStatus.COMPLETED, y, 1.0, steps, max_err


@dataclass(frozen=True)
class RayHit:
    """A singular time localized on a ray, with its uncertainty radius."""

    time: complex
    uncertainty: float
    param: float  # segment parameter of the hit on the ray


def locate_singular_time(
    system: SystemDef,
    x0: np.ndarray,
    ray: Line,
    cfg: IntegratorConfig = IntegratorConfig(),
    uncertainty_target: float = 1e-4,
) -> Optional[RayHit]:
    """Localize the first singular time on a ray, or ``None`` if it completes.

    The ray is first transported in full; a blow-up or step underflow marks a
    singularity. Its parameter is then bracketed by bisection on the ray
    endpoint: integrate to the midpoint and recurse on the failing half until
    the bracket maps to a time interval below ``uncertainty_target``. The
    first probes are seeded at the observed failure parameter, which usually
    collapses the bracket immediately.
    """
    if not isinstance(ray, Line):
        raise TypeError("locate_singular_time expects a Line segment")
    full = transport(system, x0, PathSpec((ray,)), cfg, with_variational=False)
    if full.completed:
        return None
    if full.status is TransportStatus.MAX_STEPS:
        raise TransportError(
            "step budget exhausted before the ray either completed or failed; "
            "raise max_steps or shorten the ray"
        )

    seg_len = ray.length
    target_width = 2.0 * uncertainty_target / seg_len

    def fails_at(param: float) -> Optional[float]:
        """Failure parameter (global units) of the truncated ray, or None."""
        if param <= 0.0:
            return None
        sub = Line(ray.start, ray.point(param))
        res = transport(system, x0, PathSpec((sub,)), cfg, with_variational=False)
        if res.completed:
            return None
        if res.status is TransportStatus.MAX_STEPS:
            raise TransportError("step budget exhausted during singularity bisection")
        return res.param_estimate * param

    lo, hi = 0.0, 1.0
    p0 = full.param_estimate
    # seed the bracket near the observed failure before plain bisection
    margin = max(target_width / 2.0, 1e-12)
    probe = min(1.0, p0 + margin)
    if probe < hi and fails_at(probe) is not None:
        hi = probe
    probe = max(0.0, p0 - margin)
    if probe > lo and fails_at(probe) is None:
        lo = probe

    while (hi - lo) > target_width:
        mid = 0.5 * (lo + hi)
        if fails_at(mid) is None:
            lo = mid
        else:
            hi = mid

    param = 0.5 * (lo + hi)
    return RayHit(
        time=ray.point(param),
        uncertainty=0.5 * (hi - lo) * seg_len + uncertainty_target / 2.0,
        param=param,
    )
