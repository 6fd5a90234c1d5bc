"""Differentiable modular adversary against the path witness frontier.

The adversary builds a classical two-module causal path c -> b out of softmax
tangent kernels

    alpha(c) = softmax(a)_c,            alpha_dot_c = alpha_c (a_dot_c - <a_dot>),
    beta(b|c) = softmax(d_c.)_b,        beta_dot_cb = beta_cb (d_dot_cb - <d_dot>_c),

and tries to maximize the saturation ratio

    Gamma_adv = F_B^(u) / (1/F_ac + 1/F_cb)^(-1),   u = (1, 1),

where F_ac and F_cb are the local module Fisher informations and F_B is the
2x2 endpoint Fisher matrix of p_b = sum_c alpha_c beta_cb with respect to the
two module parameters.  The series law caps Gamma_adv at 1 for every modular
parameterization; gradient ascent with random restarts probes how tightly the
bound can be approached.

The gradient is computed analytically by reverse-mode composition through the
softmax-tangent, module-FI, endpoint-FIM, and pseudoinverse stages.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateBenchmarkError, OptimizationError
from .fim import PINV_RCOND, ROWSPACE_TOL, FisherMatrix, effective_fi
from .rng import derive_rng

# Module FIs below this make the harmonic benchmark degenerate.
FI_FLOOR = 1e-14

_U = np.ones(2)
_TAG_RESTART = 5


@dataclass(frozen=True)
class AdversaryParams:
    """Logits and logit-derivatives of the two softmax tangent kernels.

    The expansion point (theta1_0, theta2_0) never enters the local
    computation; it is carried as metadata only.
    """

    a: np.ndarray
    a_dot: np.ndarray
    d: np.ndarray
    d_dot: np.ndarray
    theta1_0: float = 0.0
    theta2_0: float = 0.0

    def __post_init__(self) -> None:
        a = np.asarray(self.a, dtype=float)
        a_dot = np.asarray(self.a_dot, dtype=float)
        d = np.asarray(self.d, dtype=float)
        d_dot = np.asarray(self.d_dot, dtype=float)
        if a.ndim != 1 or a_dot.shape != a.shape:
            raise ValueError("a and a_dot must be 1-D arrays of equal length")
        if d.ndim != 2 or d_dot.shape != d.shape or d.shape[0] != a.size:
            raise ValueError("d and d_dot must be L x M arrays")
        if a.size < 1 or d.shape[1] < 2:
            raise ValueError("need L >= 1 mediator values and M >= 2 outcomes")
        for name, arr in (("a", a), ("a_dot", a_dot), ("d", d), ("d_dot", d_dot)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} has non-finite entries")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "a_dot", a_dot)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "d_dot", d_dot)

    @property
    def l(self) -> int:
        return self.a.size

    @property
    def m(self) -> int:
        return self.d.shape[1]


@dataclass(frozen=True)
class AdversaryEval:
    """Kernels, module FIs, endpoint matrix, and the saturation ratio."""

    alpha: np.ndarray
    alpha_dot: np.ndarray
    beta: np.ndarray
    beta_dot: np.ndarray
    f_ac: float
    f_cb: float
    f_b: FisherMatrix
    gamma_adv: float


@dataclass(frozen=True)
class OptimizeResult:
    """Outcome of Adam ascent with restarts."""

    best_gamma: float
    restart_gammas: tuple[float, ...]
    max_evaluated: float
    trajectories: tuple[np.ndarray, ...] = field(default=())


def _softmax(x: np.ndarray) -> np.ndarray:
    e = np.exp(x - x.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def eval_kernels(params: AdversaryParams
                 ) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Kernels and their tangents at the expansion point."""
    alpha = _softmax(params.a)
    alpha_dot = alpha * (params.a_dot - alpha @ params.a_dot)
    beta = _softmax(params.d)
    beta_dot = beta * (params.d_dot
                       - (beta * params.d_dot).sum(axis=1, keepdims=True))
    return alpha, alpha_dot, beta, beta_dot


def module_fis(kernels: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]
               ) -> tuple[float, float]:
    """Local FIs F_ac = sum alpha_dot^2/alpha and
    F_cb = sum_c alpha_c sum_b beta_dot^2/beta."""
    alpha, alpha_dot, beta, beta_dot = kernels
    f_ac = float(np.sum(alpha_dot ** 2 / alpha))
    f_cb = float(np.sum(alpha * np.sum(beta_dot ** 2 / beta, axis=1)))
    return f_ac, f_cb


def endpoint_fim(kernels: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]
                 ) -> FisherMatrix:
    """2x2 endpoint Fisher matrix of p_b in the two module parameters."""
    alpha, alpha_dot, beta, beta_dot = kernels
    p = beta.T @ alpha
    v1 = beta.T @ alpha_dot
    v2 = beta_dot.T @ alpha
    live = p > 1e-300
    mat = np.array([
        [np.sum(v1[live] ** 2 / p[live]), np.sum(v1[live] * v2[live] / p[live])],
        [np.sum(v1[live] * v2[live] / p[live]), np.sum(v2[live] ** 2 / p[live])],
    ])
    return FisherMatrix(0.5 * (mat + mat.T))


def evaluate(params: AdversaryParams) -> AdversaryEval:
    """Full evaluation; raises when the benchmark is degenerate."""
    kernels = eval_kernels(params)
    f_ac, f_cb = module_fis(kernels)
    if f_ac < FI_FLOOR or f_cb < FI_FLOOR:
        raise DegenerateBenchmarkError(
            f"module FI vanished (f_ac={f_ac}, f_cb={f_cb})")
    f_b = endpoint_fim(kernels)
    gamma = effective_fi(f_b, _U) * (1.0 / f_ac + 1.0 / f_cb)
    return AdversaryEval(*kernels, f_ac=f_ac, f_cb=f_cb, f_b=f_b,
                         gamma_adv=float(gamma))


def gamma_adv(params: AdversaryParams) -> float:
    """Saturation ratio of the adversary; always <= 1 (series law)."""
    return evaluate(params).gamma_adv


def _forward(a, a_dot, d, d_dot):
    """Total objective used by the optimizer: 0 on degenerate iterates.

    Returns (gamma, context-or-None).  Matches `gamma_adv` exactly on
    nondegenerate parameters: same eigendecomposition pseudoinverse, same
    cutoff constants.
    """
    alpha = _softmax(a)
    ra = a_dot - alpha @ a_dot
    alpha_dot = alpha * ra
    beta = _softmax(d)
    rb = d_dot - (beta * d_dot).sum(axis=1, keepdims=True)
    beta_dot = beta * rb
    f_ac = float(np.sum(alpha * ra ** 2))
    g_rows = np.sum(beta * rb ** 2, axis=1)
    f_cb = float(np.sum(alpha * g_rows))
    if f_ac < FI_FLOOR or f_cb < FI_FLOOR:
        return 0.0, None

    p = beta.T @ alpha
    v1 = beta.T @ alpha_dot
    v2 = beta_dot.T @ alpha
    live_p = p > 1e-300
    pl, v1l, v2l = p[live_p], v1[live_p], v2[live_p]
    fb = np.array([[np.sum(v1l ** 2 / pl), np.sum(v1l * v2l / pl)],
                   [np.sum(v1l * v2l / pl), np.sum(v2l ** 2 / pl)]])
    fb = 0.5 * (fb + fb.T)

    w, vecs = np.linalg.eigh(fb)
    cutoff = PINV_RCOND * max(w.max(), 0.0)
    live = w > cutoff
    coords = vecs.T @ _U
    harmonic_res = 1.0 / f_ac + 1.0 / f_cb
    if np.linalg.norm(coords[~live]) > ROWSPACE_TOL * np.linalg.norm(_U):
        # direction lost at the endpoint: zero effective FI, flat objective
        return 0.0, (alpha, alpha_dot, beta, beta_dot, ra, rb, g_rows,
                     f_ac, f_cb, p, v1, v2, live_p, None, None, harmonic_res)
    resistance = float(np.sum(coords[live] ** 2 / w[live]))
    q = vecs[:, live] @ (coords[live] / w[live])
    gamma = (1.0 / resistance) * harmonic_res
    return gamma, (alpha, alpha_dot, beta, beta_dot, ra, rb, g_rows,
                   f_ac, f_cb, p, v1, v2, live_p, q, resistance, harmonic_res)


def _backward(ctx) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Reverse-mode gradient of Gamma_adv given the forward context."""
    (alpha, alpha_dot, beta, beta_dot, ra, rb, g_rows,
     f_ac, f_cb, p, v1, v2, live_p, q, resistance, harmonic_res) = ctx
    if q is None:
        # flat zero region (direction outside the endpoint row space)
        return (np.zeros_like(alpha), np.zeros_like(alpha),
                np.zeros_like(beta), np.zeros_like(beta))

    # Gamma = harmonic_res / resistance; dresistance/dF_B = -qq^T
    w_tilde = (harmonic_res / resistance ** 2) * np.outer(q, q)
    g_fac = -(1.0 / resistance) / f_ac ** 2
    g_fcb = -(1.0 / resistance) / f_cb ** 2

    safe_p = np.where(live_p, p, 1.0)
    gv1 = np.where(live_p, 2.0 * (w_tilde[0, 0] * v1 + w_tilde[0, 1] * v2) / safe_p, 0.0)
    gv2 = np.where(live_p, 2.0 * (w_tilde[1, 1] * v2 + w_tilde[0, 1] * v1) / safe_p, 0.0)
    gp = np.where(
        live_p,
        -(w_tilde[0, 0] * v1 ** 2 + 2.0 * w_tilde[0, 1] * v1 * v2
          + w_tilde[1, 1] * v2 ** 2) / safe_p ** 2,
        0.0)

    # accumulate into kernel space: F_ac = sum alpha ra^2 has
    # dF/dalpha = -ra^2 and dF/dalpha_dot = 2 ra in (alpha, alpha_dot) terms
    g_alpha = g_fac * (-ra ** 2) + g_fcb * g_rows + beta @ gp + beta_dot @ gv2
    g_alpha_dot = g_fac * (2.0 * ra) + beta @ gv1
    g_beta = (g_fcb * (-alpha[:, None] * rb ** 2)
              + alpha[:, None] * gp[None, :]
              + alpha_dot[:, None] * gv1[None, :])
    g_beta_dot = (g_fcb * (2.0 * alpha[:, None] * rb)
                  + alpha[:, None] * gv2[None, :])

    def through_softmax(prob, tang, g_prob, g_tang):
        # backward of prob = softmax(x), tang = prob*(xdot - <xdot>)
        gx = (prob * (g_prob - g_prob @ prob)
              + g_tang * tang - prob * (g_tang @ tang) - tang * (g_tang @ prob))
        gxdot = prob * (g_tang - g_tang @ prob)
        return gx, gxdot

    ga, ga_dot = through_softmax(alpha, alpha_dot, g_alpha, g_alpha_dot)
    gd = np.empty_like(beta)
    gd_dot = np.empty_like(beta)
    for c in range(beta.shape[0]):
        gd[c], gd_dot[c] = through_softmax(beta[c], beta_dot[c],
                                           g_beta[c], g_beta_dot[c])
    return ga, ga_dot, gd, gd_dot


def gamma_adv_gradient(params: AdversaryParams
                       ) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Analytic gradient of Gamma_adv with respect to (a, a_dot, d, d_dot)."""
    gamma, ctx = _forward(params.a, params.a_dot, params.d, params.d_dot)
    if ctx is None:
        raise DegenerateBenchmarkError("gradient undefined: module FI vanished")
    return _backward(ctx)


def _run_restart(l: int, m: int, steps: int, lr: float, seed: int,
                 restart: int, track: bool):
    rng = derive_rng(seed, _TAG_RESTART, restart)
    n_par = 2 * l + 2 * l * m
    for _ in range(100):
        theta = rng.normal(size=n_par)
        if _forward(*_unpack(theta, l, m))[1] is not None:
            break
    else:
        raise OptimizationError("could not draw a nondegenerate initialization")

    m1 = np.zeros(n_par)
    m2 = np.zeros(n_par)
    best = -np.inf
    seen = -np.inf
    trajectory = [] if track else None
    for t in range(1, steps + 1):
        gamma, ctx = _forward(*_unpack(theta, l, m))
        best = max(best, gamma)
        seen = max(seen, gamma)
        if trajectory is not None:
            trajectory.append(gamma)
        if ctx is None:
            grad = np.zeros(n_par)
        else:
            grad = np.concatenate([g.ravel() for g in _backward(ctx)])
        m1 = 0.9 * m1 + 0.1 * grad
        m2 = 0.999 * m2 + 0.001 * grad ** 2
        step = (m1 / (1.0 - 0.9 ** t)) / (np.sqrt(m2 / (1.0 - 0.999 ** t)) + 1e-8)
        theta = theta + lr * step
    gamma, _ = _forward(*_unpack(theta, l, m))
    best = max(best, gamma)
    seen = max(seen, gamma)
    if trajectory is not None:
        trajectory.append(gamma)
    return best, seen, (np.asarray(trajectory) if track else None)


def _unpack(theta: np.ndarray, l: int, m: int):
    a = theta[:l]
    a_dot = theta[l:2 * l]
    d = theta[2 * l:2 * l + l * m].reshape(l, m)
    d_dot = theta[2 * l + l * m:].reshape(l, m)
    return a, a_dot, d, d_dot


def _max_workers(n_tasks: int) -> int:
    env = os.environ.get("CFII_THREADS")
    if env is not None:
        try:
            cap = int(env)
        except ValueError as exc:
            raise ValueError(f"CFII_THREADS must be an integer, got {env!r}") from exc
        if cap < 1:
            raise ValueError(f"CFII_THREADS must be >= 1, got {cap}")
    else:
        cap = os.cpu_count() or 1
    return max(1, min(n_tasks, cap))


def optimize_restarts(l: int, m: int, n_restarts: int = 36, steps: int = 2000,
                      lr: float = 0.05, seed: int = 0,
                      track_trajectories: bool = False) -> OptimizeResult:
    """Adam ascent on Gamma_adv from independent standard-normal
    initializations, one derived RNG stream per restart.

    Restarts run on a thread pool sized by CFII_THREADS (auto when absent);
    results are aggregated deterministically by restart index.  Each
    restart reports the best objective it ever evaluated; `max_evaluated`
    is the maximum over every iterate of every restart.
    """
    if l < 2 or m < 2:
        raise ValueError("adversary search needs l >= 2 and m >= 2")
    if n_restarts < 1 or steps < 0:
        raise ValueError("need n_restarts >= 1 and steps >= 0")

    workers = _max_workers(n_restarts)
    if workers == 1:
        outs = [_run_restart(l, m, steps, lr, seed, r, track_trajectories)
                for r in range(n_restarts)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outs = list(pool.map(
                lambda r: _run_restart(l, m, steps, lr, seed, r,
                                       track_trajectories),
                range(n_restarts)))

    bests = tuple(o[0] for o in outs)
    return OptimizeResult(
        best_gamma=max(bests),
        restart_gammas=bests,
        max_evaluated=max(o[1] for o in outs),
        trajectories=tuple(o[2] for o in outs) if track_trajectories else (),
    )
