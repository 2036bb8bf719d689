"""Square nonlinear root finder: Powell-hybrid trust-region dogleg.

The correction is a convex combination of the Newton direction and the scaled
steepest-descent direction, constrained to a trust region measured in
column-scaled variables; the Jacobian starts from forward differences and is
kept up to date by Broyden rank-1 updates, with a full refresh after repeated
trust-region shrinks.  The residual map is evaluated defensively: any
exception or non-finite value is treated as a rejected step, never raised.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

SINGULAR_CONDITION = 1e15


class SolveStatus(enum.Enum):
    CONVERGED = "converged"
    STALLED = "stalled"
    MAX_ITER = "max_iter"
    NON_FINITE = "non_finite"


@dataclass
class SolveReport:
    x: np.ndarray
    fval: np.ndarray
    residual_norm: float          # inf-norm of fval
    iterations: int               # accepted steps
    n_fev: int                    # residual evaluations
    condition: float              # 1-norm condition estimate of last full J
    status: SolveStatus
    jacobian: np.ndarray = None   # final (possibly Broyden-updated) J
    message: str = ""

    @property
    def converged(self) -> bool:
        return self.status is SolveStatus.CONVERGED


@dataclass
class IterationRecord:
    """One trust-region iteration, kept only when a log list is passed in."""

    kind: str                     # 'newton' or 'dogleg'
    step_scaled_norm: float
    trust_radius: float
    accepted: bool
    broyden: bool                 # Jacobian updated by rank-1 after this step
    dx: np.ndarray = None
    df: np.ndarray = None
    jacobian_after: np.ndarray = None
    residual_norm: float = math.nan


def _safe_eval(fun, x, n):
    try:
        f = np.asarray(fun(x), dtype=float)
    except (ArithmeticError, ValueError) as exc:  # propagation blow-ups
        return np.full(n, np.nan), str(exc)
    if f.shape != (n,):
        raise ValueError(f"residual shape {f.shape} != ({n},)")
    return f, ""


def _fd_jacobian(fun, x, fx, fd_step):
    n = len(x)
    jac = np.empty((n, n))
    nfev = 0
    for i in range(n):
        h = max(fd_step, fd_step * abs(x[i]))
        xp = x.copy()
        xp[i] += h
        fp, _ = _safe_eval(fun, xp, n)
        nfev += 1
        jac[:, i] = (fp - fx) / h
    return jac, nfev


def condition_estimate(jac: np.ndarray) -> float:
    """1-norm condition estimate; infinite when numerically singular."""
    if not np.all(np.isfinite(jac)):
        return math.inf
    try:
        inv = np.linalg.inv(jac)
    except np.linalg.LinAlgError:
        return math.inf
    est = np.linalg.norm(jac, 1) * np.linalg.norm(inv, 1)
    return float(est)


def _dogleg(dN, jac, fx, scale, delta):
    """Step within ||scale * step|| <= delta; returns (step, scaled_norm, kind)."""
    dn_scaled = float(np.linalg.norm(scale * dN))
    if dn_scaled <= delta:
        return dN, dn_scaled, "newton"
    g = jac.T @ fx                       # gradient of 0.5*||F||^2
    gs = g / scale                       # scaled-space gradient
    norm_gs = float(np.linalg.norm(gs))
    if norm_gs == 0.0 or not math.isfinite(norm_gs):
        step = dN * (delta / dn_scaled)
        return step, delta, "dogleg"
    jg = jac @ (gs / scale)
    denom = float(jg @ jg)
    t_c = norm_gs ** 2 / denom if denom > 0.0 else 0.0
    p_c = -t_c * gs                      # Cauchy point (scaled space)
    npc = float(np.linalg.norm(p_c))
    if npc >= delta or npc == 0.0:
        p = -(delta / norm_gs) * gs
    else:
        p_n = scale * dN
        d = p_n - p_c
        # positive root of ||p_c + s d||^2 = delta^2
        aa = float(d @ d)
        bb = 2.0 * float(p_c @ d)
        cc = npc ** 2 - delta ** 2
        disc = max(bb * bb - 4.0 * aa * cc, 0.0)
        s = (-bb + math.sqrt(disc)) / (2.0 * aa) if aa > 0.0 else 0.0
        p = p_c + min(max(s, 0.0), 1.0) * d
    step = p / scale
    return step, float(np.linalg.norm(p)), "dogleg"


def solve(fun, x0, tol: float = 1e-8, max_eval: int = None,
          fd_step: float = 1e-8, j0: np.ndarray = None,
          log: list = None) -> SolveReport:
    """Find x with ||fun(x)||_inf <= tol starting from x0.

    max_eval bounds residual evaluations (default 200*n); j0 warm-starts the
    Jacobian (skipping the initial finite-difference sweep); log, when given,
    collects IterationRecord entries including Jacobian snapshots.
    """
    x = np.asarray(x0, dtype=float).copy()
    n = len(x)
    if max_eval is None:
        max_eval = 200 * n

    fx, msg = _safe_eval(fun, x, n)
    nfev = 1
    if not np.all(np.isfinite(fx)):
        return SolveReport(x, fx, math.inf, 0, nfev, math.inf,
                           SolveStatus.NON_FINITE,
                           message=msg or "residual not finite at x0")
    fnorm = float(np.max(np.abs(fx)))
    if fnorm <= tol:
        return SolveReport(x, fx, fnorm, 0, nfev, math.nan,
                           SolveStatus.CONVERGED)

    if j0 is not None and np.all(np.isfinite(j0)):
        jac = np.array(j0, dtype=float)
        fresh = False
    else:
        jac, used = _fd_jacobian(fun, x, fx, fd_step)
        nfev += used
        fresh = True
    cond = condition_estimate(jac)

    scale = np.linalg.norm(jac, axis=0)
    scale[scale == 0.0] = 1.0
    delta = 100.0 * float(np.linalg.norm(scale * x))
    if delta == 0.0:
        delta = 100.0

    iters = 0
    shrinks = 0
    grow_streak = 0
    rejects_fresh = 0

    while nfev < max_eval:
        try:
            dN = np.linalg.solve(jac, -fx)
        except np.linalg.LinAlgError:
            dN, *_ = np.linalg.lstsq(jac, -fx, rcond=None)
        if not np.all(np.isfinite(dN)):
            if fresh:
                return SolveReport(x, fx, fnorm, iters, nfev, cond,
                                   SolveStatus.NON_FINITE,
                                   message="Newton direction not finite")
            jac, used = _fd_jacobian(fun, x, fx, fd_step)
            nfev += used
            fresh = True
            cond = condition_estimate(jac)
            scale = np.maximum(scale, np.linalg.norm(jac, axis=0))
            continue

        step, step_scaled, kind = _dogleg(dN, jac, fx, scale, delta)
        fn, _ = _safe_eval(fun, x + step, n)
        nfev += 1

        pred = float(fx @ fx) - float((fx + jac @ step) @ (fx + jac @ step))
        finite = bool(np.all(np.isfinite(fn)))
        act = float(fx @ fx) - float(fn @ fn) if finite else -math.inf
        rho = act / pred if pred > 0.0 else (0.0 if act <= 0.0 else 1.0)

        accepted = finite and rho > 1e-4
        record = None
        if log is not None:
            record = IterationRecord(kind, step_scaled, delta, accepted,
                                     broyden=False)
            log.append(record)

        if accepted:
            dx = step
            df = fn - fx
            x = x + step
            fx = fn
            fnorm = float(np.max(np.abs(fx)))
            iters += 1
            rejects_fresh = 0
            if fnorm <= tol:
                if record is not None:
                    record.residual_norm = fnorm
                return SolveReport(x, fx, fnorm, iters, nfev, cond,
                                   SolveStatus.CONVERGED, jacobian=jac)
            denom = float(dx @ dx)
            if denom > 0.0:
                jac = jac + np.outer(df - jac @ dx, dx) / denom
                fresh = False
                if record is not None:
                    record.broyden = True
                    record.dx = dx.copy()
                    record.df = df.copy()
                    record.jacobian_after = jac.copy()
            if record is not None:
                record.residual_norm = fnorm
        elif fresh:
            rejects_fresh += 1

        # trust-region update
        if rho < 0.1:
            delta = 0.5 * step_scaled
            shrinks += 1
            grow_streak = 0
        else:
            shrinks = 0
            if rho > 0.75 and step_scaled >= 0.9 * delta:
                grow_streak += 1
                delta = max(delta, 2.0 * step_scaled)

        floor = 1e-13 * max(1.0, float(np.linalg.norm(scale * x)))
        if delta < floor or rejects_fresh >= 12:
            if fresh:
                return SolveReport(x, fx, fnorm, iters, nfev, cond,
                                   SolveStatus.STALLED, jacobian=jac,
                                   message="trust radius collapsed")
            jac, used = _fd_jacobian(fun, x, fx, fd_step)
            nfev += used
            fresh = True
            cond = condition_estimate(jac)
            scale = np.linalg.norm(jac, axis=0)
            scale[scale == 0.0] = 1.0
            delta = max(delta, 1e-3 * max(1.0, float(np.linalg.norm(scale * x))))
            rejects_fresh = 0
            shrinks = 0
            continue

        if shrinks >= 2 and not fresh:
            jac, used = _fd_jacobian(fun, x, fx, fd_step)
            nfev += used
            fresh = True
            cond = condition_estimate(jac)
            scale = np.linalg.norm(jac, axis=0)
            scale[scale == 0.0] = 1.0
            shrinks = 0

    return SolveReport(x, fx, fnorm, iters, nfev, cond, SolveStatus.MAX_ITER,
                       jacobian=jac, message="evaluation budget exhausted")
