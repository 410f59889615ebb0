"""First-order solvers for ``min_x f_p(x)`` with full iterate traces.

Three methods share one stopping rule and trace format:

* ``polyak``: subgradient steps of length ``(f(x) - f*) / ||g||^2``.
* ``geometric``: normalized subgradient steps ``lam0 * q**k``.
* ``prox_linear`` (``p=2`` only): each outer step minimizes the convex model
  with the square linearized inside the absolute value, plus a proximal term.

When the instance carries a planted signal, the distance to ``{x*, -x*}`` is
recorded at every iterate and can drive termination.
"""
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .core import as_signal, check_p, dist_to_sign_pair

METHODS = ("polyak", "geometric", "prox_linear")


@dataclass
class SolverConfig:
    """Solver settings.

    ``tol_dist`` is relative: stop once ``dist(x, {+-x*}) <= tol_dist * ||x*||``
    (only when the planted signal is known). ``tol_obj`` is absolute on
    ``f(x) - f*``. ``fstar_mode`` is ``"known"`` (use ``fstar_value``, or the
    planted ``f_p(x*)`` when that is None) or ``"zero"``.
    ``inner_tol`` bounds the prox-linear model duality gap relative to the
    current objective value.
    """

    method: str = "polyak"
    max_iters: int = 500
    tol_dist: float | None = 1e-5
    tol_obj: float | None = None
    fstar_mode: str = "known"
    fstar_value: float | None = None
    lam0: float | None = None
    q: float = 0.98
    prox_t: float | None = None
    inner_tol: float = 1e-12
    inner_max_iters: int | None = None
    stall_window: int = 200
    stall_rtol: float = 1e-14
    keep_every: int = 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")
        for name in ("tol_dist", "tol_obj"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive")
        if self.fstar_mode not in ("known", "zero"):
            raise ValueError(f"fstar_mode must be 'known' or 'zero', got {self.fstar_mode!r}")
        if self.fstar_value is not None and not np.isfinite(self.fstar_value):
            raise ValueError("fstar_value must be finite")
        if self.lam0 is not None and not self.lam0 >= 0:
            raise ValueError("lam0 must be nonnegative")
        if not 0 < self.q < 1:
            raise ValueError("q must lie in (0, 1)")
        if self.prox_t is not None and not self.prox_t > 0:
            raise ValueError("prox_t must be positive")
        if not self.inner_tol > 0:
            raise ValueError("inner_tol must be positive")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown solver settings: {sorted(unknown)}")
        return cls(**d)


@dataclass
class SolveTrace:
    method: str
    x: np.ndarray
    objective: np.ndarray
    dist: np.ndarray | None
    termination: str
    wall_time: float = 0.0
    iterates: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def iterations(self):
        return len(self.objective) - 1

    def summary(self, xstar=None, tau=None):
        out = {
            "method": self.method,
            "termination": self.termination,
            "iterations": self.iterations,
            "final_objective": float(self.objective[-1]),
            "wall_time": self.wall_time,
            "x": self.x.tolist(),
        }
        if self.dist is not None:
            out["final_dist"] = float(self.dist[-1])
        if xstar is not None and tau is not None:
            d = dist_to_sign_pair(self.x, xstar)
            out["success"] = bool(d <= tau * float(np.linalg.norm(xstar)))
        return out


def weighted_median(values, weights):
    """Smallest value at which the cumulative weight reaches half the total."""
    order = np.argsort(values, kind="stable")
    cw = np.cumsum(weights[order])
    k = int(np.searchsorted(cw, 0.5 * cw[-1], side="left"))
    return float(values[order[min(k, len(order) - 1)]])


def spectral_init(A, b, p, power_iters=200, eig_tol=1e-10, quantile=0.9):
    """Truncated spectral estimate of the signal.

    Direction: leading eigenvector of ``(1/m) sum_i w_i a_i a_i^T`` over the rows
    with ``0 <= w_i <= `` the ``quantile`` of ``w`` (``w = b`` for ``p=2``,
    ``b**2`` for ``p=1``), by power iteration. Magnitude: the exact minimizer of
    ``f_p`` along that direction, a weighted median of ``b_i / |a_i^T d|^p``.
    """
    p = check_p(p)
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    m, n = A.shape
    if not np.any(b != 0):
        raise ValueError("degenerate measurements")
    w = b if p == 2 else b * b
    thr = np.quantile(w, quantile, method="inverted_cdf")
    keep = (w >= 0) & (w <= thr)
    Ak = A[keep]
    D = (Ak.T * w[keep]) @ Ak / m
    if not np.any(D):
        raise ValueError("degenerate measurements")

    v = D[:, int(np.argmax(np.diag(D)))].copy()
    v /= np.linalg.norm(v)
    for _ in range(power_iters):
        Dv = D @ v
        lam = float(v @ Dv)
        if np.linalg.norm(Dv - lam * v) <= eig_tol * abs(lam):
            break
        v = Dv / np.linalg.norm(Dv)

    alpha = np.abs(A @ v) ** p
    pos = alpha > 0
    tau = weighted_median(b[pos] / alpha[pos], alpha[pos]) if np.any(pos) else 0.0
    if tau <= 0:
        # line fit degenerate; fall back to the truncated second moment
        tau = float(np.mean(w[keep])) ** (p / 2.0)
    return v * tau ** (1.0 / p)


class _Run:
    """Shared bookkeeping: histories, stopping rule, stall detection."""

    def __init__(self, instance, config, x0):
        self.A = instance.A
        self.b = instance.b
        self.p = instance.p
        self.cfg = config
        self.xstar = instance.xstar
        self.xnorm = None if self.xstar is None else float(np.linalg.norm(self.xstar))
        if config.fstar_mode == "zero":
            self.fstar = 0.0
        elif config.fstar_value is not None:
            self.fstar = float(config.fstar_value)
        elif self.xstar is not None:
            self.fstar = instance.fstar()
        else:
            self.fstar = None
        if config.method == "polyak" and (self.fstar is None or not np.isfinite(self.fstar)):
            raise ValueError("Polyak steps need a finite optimal value f*")
        self.objective = []
        self.dist = [] if self.xstar is not None else None
        self.iterates = []
        self._stall = 0
        self.t0 = time.perf_counter()
        self.x = as_signal(x0, "x0").copy()
        if self.x.shape[0] != self.A.shape[1]:
            raise ValueError(f"x0 has length {self.x.shape[0]}, expected {self.A.shape[1]}")
        self.f, self.g = kernels.objective_subgradient(self.A, self.b, self.x, self.p)
        self._record()

    def _record(self):
        k = len(self.objective)
        self.objective.append(self.f)
        if self.dist is not None:
            self.dist.append(dist_to_sign_pair(self.x, self.xstar))
        if self.cfg.keep_every and k % self.cfg.keep_every == 0:
            self.iterates.append(self.x.copy())

    def move(self, x_new):
        f_prev = self.f
        self.x = x_new
        self.f, self.g = kernels.objective_subgradient(self.A, self.b, self.x, self.p)
        self._record()
        if abs(self.f - f_prev) <= self.cfg.stall_rtol * max(abs(f_prev), 1e-300):
            self._stall += 1
        else:
            self._stall = 0

    @property
    def stalled(self):
        return self._stall >= self.cfg.stall_window

    def converged(self):
        cfg = self.cfg
        if cfg.tol_dist is not None and self.dist is not None:
            if self.dist[-1] <= cfg.tol_dist * self.xnorm:
                return True
        if cfg.tol_obj is not None and self.fstar is not None:
            if self.f - self.fstar <= cfg.tol_obj:
                return True
        return False

    def finish(self, termination, **info):
        if self.cfg.keep_every and (len(self.objective) - 1) % self.cfg.keep_every != 0:
            self.iterates.append(self.x.copy())
        return SolveTrace(
            method=self.cfg.method,
            x=self.x,
            objective=np.asarray(self.objective),
            dist=None if self.dist is None else np.asarray(self.dist),
            termination=termination,
            wall_time=time.perf_counter() - self.t0,
            iterates=self.iterates,
            info=info,
        )


def solve_polyak(instance, config, x0):
    run = _Run(instance, config, x0)
    for _ in range(config.max_iters):
        if run.converged():
            return run.finish("converged")
        gap = run.f - run.fstar
        gg = float(run.g @ run.g)
        if gap <= 0 or gg == 0:
            # optimal up to rounding, or a zero subgradient above f*
            return run.finish("stalled")
        run.move(run.x - (gap / gg) * run.g)
        if run.stalled:
            return run.finish("stalled")
    return run.finish("converged" if run.converged() else "max_iters")


def default_lam0(x0):
    return 0.5 * float(np.linalg.norm(x0))


def solve_geometric(instance, config, x0):
    lam0 = default_lam0(x0) if config.lam0 is None else config.lam0
    run = _Run(instance, config, x0)
    step = lam0
    for _ in range(config.max_iters):
        if run.converged():
            return run.finish("converged", lam0=lam0)
        gn = float(np.linalg.norm(run.g))
        if gn > 0 and step > 0:
            run.move(run.x - (step / gn) * run.g)
        else:
            run.move(run.x.copy())
        step *= config.q
        if run.stalled:
            return run.finish("stalled", lam0=lam0)
    return run.finish("converged" if run.converged() else "max_iters", lam0=lam0)


def prox_linear_model_step(c, G, t, tol, max_iters):
    """Minimize ``||c + G d||_1 + ||d||^2 / (2t)`` over ``d``.

    Primal-dual interior point (Mehrotra predictor-corrector) on the dual box
    QP ``min_{|u|<=1} (t/2) ||G^T u||^2 - c^T u``, with ``d = -t G^T u``. The
    Newton systems are ``m x m`` diagonal plus rank ``n`` and are solved by
    Woodbury in O(m n^2). Returns ``(d, gap)`` where ``gap`` is the exact
    duality gap of the returned pair; iteration stops once
    ``gap <= tol * ||c||_1``.
    """
    m, n = G.shape
    target = tol * float(np.abs(c).sum())
    if target == 0.0:
        return np.zeros(n), 0.0

    def certify(u):
        d = -t * (G.T @ u)
        z = c + G @ d
        return d, float(np.abs(z).sum() - z @ u)

    u = np.zeros(m)
    lam = np.ones(m)  # multiplier of u <= 1
    nu = np.ones(m)  # multiplier of u >= -1
    best_d, best_gap = certify(u)
    I_t = np.eye(n) / t

    def newton(rd, rl, rn, dg):
        rhs = -rd + rl / (1.0 - u) - rn / (1.0 + u)
        inv = 1.0 / dg
        S = I_t + (G.T * inv) @ G
        y = inv * rhs
        du = y - inv * (G @ np.linalg.solve(S, G.T @ y))
        dl = (-rl + lam * du) / (1.0 - u)
        dn = (-rn - nu * du) / (1.0 + u)
        return du, dl, dn

    def max_step(du, dl, dn):
        a = 1.0
        for val, dval in ((1.0 - u, -du), (1.0 + u, du), (lam, dl), (nu, dn)):
            neg = dval < 0
            if np.any(neg):
                a = min(a, float(np.min(-val[neg] / dval[neg])))
        return a

    for _ in range(max_iters):
        if np.any(1.0 - u <= 0) or np.any(1.0 + u <= 0):
            break  # boundary reached in floating point
        rd = t * (G @ (G.T @ u)) - c + lam - nu
        cl = lam * (1.0 - u)
        cn = nu * (1.0 + u)
        mu = float(cl.sum() + cn.sum()) / (2 * m)
        dg = lam / (1.0 - u) + nu / (1.0 + u)
        # predictor
        du, dl, dn = newton(rd, cl, cn, dg)
        a = max_step(du, dl, dn)
        mu_aff = float(
            ((lam + a * dl) * (1.0 - u - a * du)).sum()
            + ((nu + a * dn) * (1.0 + u + a * du)).sum()
        ) / (2 * m)
        sigma = (mu_aff / mu) ** 3 if mu > 0 else 0.0
        # corrector
        du, dl, dn = newton(
            rd, cl - sigma * mu - dl * du, cn - sigma * mu + dn * du, dg
        )
        a = min(1.0, 0.99 * max_step(du, dl, dn))
        u = u + a * du
        lam = lam + a * dl
        nu = nu + a * dn
        d, gap = certify(u)
        if gap < best_gap:
            best_d, best_gap = d, gap
        if best_gap <= target:
            break
    return best_d, max(best_gap, 0.0)


def solve_prox_linear(instance, config, x0):
    if check_p(instance.p) != 2:
        raise ValueError("prox-linear requires smooth inner map")
    A = instance.A
    m, n = A.shape
    t = config.prox_t
    if t is None:
        # model majorizes f_2 when 1/(2t) >= ||A||^2
        t = 1.0 / (2.0 * float(np.linalg.norm(A, 2)) ** 2)
    inner_max = config.inner_max_iters
    if inner_max is None:
        inner_max = int(np.ceil(10 * n * np.log(1.0 / config.inner_tol)))
    run = _Run(instance, config, x0)
    gaps = []
    for _ in range(config.max_iters):
        if run.converged():
            return run.finish("converged", t=t, inner_gaps=gaps)
        s = A @ run.x
        c = s * s - instance.b
        G = (2.0 * s)[:, None] * A
        d, gap = prox_linear_model_step(c, G, t, config.inner_tol, inner_max)
        gaps.append(gap)
        if not np.any(d):
            return run.finish("stalled", t=t, inner_gaps=gaps)
        run.move(run.x + d)
        if run.stalled:
            return run.finish("stalled", t=t, inner_gaps=gaps)
    return run.finish(
        "converged" if run.converged() else "max_iters", t=t, inner_gaps=gaps
    )


_DISPATCH = {
    "polyak": solve_polyak,
    "geometric": solve_geometric,
    "prox_linear": solve_prox_linear,
}


def solve(instance, config, x0=None):
    """Run the configured method, from the spectral estimate unless ``x0`` is given."""
    if x0 is None:
        x0 = spectral_init(instance.A, instance.b, instance.p)
    return _DISPATCH[config.method](instance, config, x0)
