"""
Pulse design.

A symmetric pulse V(t) = a0 + Σ_{m=1..M} a_m cos(mΩt) is parameterized by
its first M − L cosine coefficients; a0 fixes the rotation angle and the
last L coefficients are solved from the end-point conditions. The
objective is the squared mismatch of the bare rotation plus the squared
moments R_1..R_K over every cluster the target order needs. It is driven
to zero by simulated annealing on its logarithm, steepest descent and a
Levenberg-Marquardt polish.
"""

import csv
import io
import logging
from dataclasses import dataclass, field

import numpy as np
from django.conf import settings
from scipy.optimize import brentq, least_squares

from matcore.ops import PAULI, kron_all, rotation
from propagate.integrator import integrate_perturbative
from pulseshape.builtins import hermite_shape
from pulseshape.shapes import OMEGA, PulseShape
from sequences.schedule import parse_sequence
from spinmodel.chain import ODD, ClusterSpec, enumerate_clusters, preset

from .exceptions import EliminationError, InfeasibleGoalError

logger = logging.getLogger(__name__)

DESIGN_SEQUENCE = "X1"


@dataclass(frozen=True)
class DesignGoal:
    angle: float = np.pi
    K: int = 1
    L: int = 1
    M: int = 3
    model: object = None
    steps: int | None = None

    def __post_init__(self):
        if self.K < 0 or self.L < 1:
            raise InfeasibleGoalError("K must be nonnegative and L at least 1")
        if self.M < self.K + self.L:
            raise InfeasibleGoalError(
                f"M = {self.M} harmonics leave too few free parameters for K = {self.K}, L = {self.L}"
            )
        if self.model is None:
            object.__setattr__(self, "model", preset("ising"))

    @property
    def a0(self):
        return self.angle / OMEGA

    @property
    def n_free(self):
        return self.M - self.L

    @property
    def design_steps(self):
        return self.steps or settings.REFOCUS["DESIGN_STEPS_PER_INTERVAL"]


# --------------------------
# Constraints
# --------------------------
def eliminate_constraints(free, goal):
    """
    Full coefficient vector (a0, a_1..a_M) from the M − L free cosines.

    The dependent a_{M−L+1}..a_M solve Σ_m m^(2j) a_m = −a0 δ_j0 for
    j = 0..L−1, which makes V and its even derivatives vanish at the ends.
    """
    free = np.asarray(free, dtype=float)
    if free.shape != (goal.n_free,):
        raise EliminationError(f"expected {goal.n_free} free coefficients, got {free.shape}")
    powers = 2 * np.arange(goal.L)
    m_free = np.arange(1, goal.n_free + 1, dtype=float)
    m_dep = np.arange(goal.n_free + 1, goal.M + 1, dtype=float)
    system = m_dep[None, :] ** powers[:, None]
    rhs = -(m_free[None, :] ** powers[:, None]) @ free
    rhs[0] -= goal.a0
    try:
        dependent = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError as exc:
        raise EliminationError(f"singular end-point system: {exc}") from exc
    return np.concatenate([[goal.a0], free, dependent])


def shape_from_coefficients(coeffs, goal, name="design"):
    coeffs = np.asarray(coeffs, dtype=float)
    return PulseShape(
        name=name, a0=float(coeffs[0]), a=tuple(coeffs[1:]),
        smoothness_L=goal.L, claimed_K=goal.K,
    )


# --------------------------
# Objective
# --------------------------
def target_unitary(cluster, angle):
    odd = rotation(angle, 0.0)
    return kron_all([odd if cluster.parity(i) == ODD else np.eye(2) for i in range(cluster.n_sites)])


def residual_vector(coeffs, goal):
    """Real vector whose squared norm is the objective."""
    schedule = parse_sequence(DESIGN_SEQUENCE, shape_from_coefficients(coeffs, goal))
    # K = 0 asks for the bare rotation only
    clusters = enumerate_clusters(goal.K, goal.model) if goal.K else [ClusterSpec(1, ODD)]
    parts = []
    for cluster in clusters:
        result = integrate_perturbative(cluster, goal.model, schedule, max(goal.K, 1), goal.design_steps)
        parts.append((result.u0 - target_unitary(cluster, goal.angle)).ravel())
        parts.extend(rk.ravel() for rk in result.r[:goal.K])
    flat = np.concatenate(parts)
    return np.concatenate([flat.real, flat.imag])


def objective(coeffs, goal):
    r = residual_vector(coeffs, goal)
    return float(r @ r)


def gradient(f, p, h=1e-6):
    """Central finite-difference gradient of a scalar function."""
    p = np.asarray(p, dtype=float)
    g = np.empty_like(p)
    for i in range(p.size):
        step = np.zeros_like(p)
        step[i] = h
        g[i] = (f(p + step) - f(p - step)) / (2 * h)
    return g


# --------------------------
# Search
# --------------------------
@dataclass
class DesignResult:
    goal: DesignGoal
    seed: int
    shape: PulseShape
    objective: float
    converged: bool
    # (iteration, temperature, objective)
    log: list = field(default_factory=list)

    def log_csv(self):
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["iteration", "temperature", "objective"])
        for it, temperature, value in self.log:
            writer.writerow([it, f"{temperature:.12g}", f"{value:.12g}"])
        return buffer.getvalue()


def _anneal(f, start, rng, log, config):
    current, current_value = start, f(start)
    best, best_value = current, current_value
    temperature = config["ANNEAL_T0"]
    for sweep in range(config["ANNEAL_SWEEPS"]):
        proposal = current + rng.normal(0.0, config["ANNEAL_STEP"], size=current.size)
        value = f(proposal)
        delta = np.log10(value + 1e-300) - np.log10(current_value + 1e-300)
        if delta <= 0 or np.exp(-delta / temperature) >= rng.random():
            current, current_value = proposal, value
            if value < best_value:
                best, best_value = proposal, value
        log.append((sweep, temperature, current_value))
        temperature *= config["ANNEAL_DECAY"]
    return best, best_value


def _descend(f, start, value, target, log, config, offset):
    p = start
    for it in range(config["DESCENT_ITERATIONS"]):
        if value < target:
            break
        g = gradient(f, p)
        norm = np.linalg.norm(g)
        if norm == 0:
            break
        step = 0.1 / norm
        while step > 1e-12:
            trial = p - step * g
            trial_value = f(trial)
            if trial_value < value - 1e-4 * step * norm ** 2:
                p, value = trial, trial_value
                break
            step /= 2
        else:
            break
        log.append((offset + it, 0.0, value))
    return p, value


def design_pulse(goal, seed=0, name=None):
    config = settings.REFOCUS
    rng = np.random.default_rng(seed)
    log = []

    def f(free):
        return objective(eliminate_constraints(free, goal), goal)

    def residuals(free):
        return residual_vector(eliminate_constraints(free, goal), goal)

    start = rng.normal(0.0, 1.0, size=goal.n_free)
    p, value = _anneal(f, start, rng, log, config)
    logger.info("seed %d: annealing reached %.3g", seed, value)

    p, value = _descend(f, p, value, config["DESIGN_TARGET"], log, config, len(log))
    logger.info("seed %d: descent reached %.3g", seed, value)

    if value >= config["DESIGN_TARGET"] and goal.n_free:
        fit = least_squares(residuals, p, method="lm", max_nfev=config["POLISH_EVALUATIONS"],
                            xtol=1e-15, ftol=1e-15, gtol=1e-15)
        polished = float(fit.fun @ fit.fun)
        if polished < value:
            p, value = fit.x, polished
        log.append((len(log), 0.0, value))
        logger.info("seed %d: polish reached %.3g", seed, value)

    converged = value < config["DESIGN_ACCEPT"]
    if not converged:
        logger.warning("seed %d did not converge: best objective %.3g", seed, value)
    shape = shape_from_coefficients(
        eliminate_constraints(p, goal), goal,
        name=name or f"design-K{goal.K}L{goal.L}M{goal.M}-s{seed}",
    )
    return DesignResult(goal=goal, seed=seed, shape=shape, objective=value, converged=converged, log=log)


# --------------------------
# Certification
# --------------------------
@dataclass
class Certificate:
    shape: str
    order: int
    angle: float
    expected_angle: float
    smoothness_residuals: list
    # order k -> {cluster label: ‖R_k‖_F}
    residuals: dict
    tolerance: float

    @property
    def smooth(self):
        limit = settings.REFOCUS["SMOOTHNESS_TOLERANCE"]
        return all(abs(r) <= limit for r in self.smoothness_residuals)

    @property
    def angle_ok(self):
        return abs(self.angle - self.expected_angle) <= 1e-9

    @property
    def refocused(self):
        return all(v <= self.tolerance for row in self.residuals.values() for v in row.values())

    @property
    def passed(self):
        return self.smooth and self.angle_ok and self.refocused

    def to_dict(self):
        return {
            "shape": self.shape,
            "order": self.order,
            "passed": self.passed,
            "smooth": self.smooth,
            "smoothness_residuals": self.smoothness_residuals,
            "angle": self.angle,
            "expected_angle": self.expected_angle,
            "residuals": {
                str(k): dict(sorted(row.items())) for k, row in sorted(self.residuals.items())
            },
            "tolerance": self.tolerance,
        }


def certify_shape(shape, model=None, K=None, angle=np.pi, steps=None):
    """
    Smoothness, rotation angle and R_1..R_K on clusters of up to K + 2
    sites. A shape that claims no refocusing is held to first order.
    """
    model = model or preset("ising")
    K = K or max(shape.claimed_K, 1)
    schedule = parse_sequence(DESIGN_SEQUENCE, shape)
    residuals = {k: {} for k in range(1, K + 1)}
    sizes = ([1] if model.has_bath else []) + list(range(2, K + 3))
    for size in sizes:
        for parity in (0, 1):
            cluster = ClusterSpec(size, parity)
            result = integrate_perturbative(cluster, model, schedule, K, steps)
            for k, norm in enumerate(result.residual_norms(), start=1):
                residuals[k][cluster.label] = norm

    certificate = Certificate(
        shape=shape.name,
        order=K,
        angle=shape.rotation_angle(),
        expected_angle=angle,
        smoothness_residuals=shape.smoothness_residuals() + shape.odd_residuals(),
        residuals=residuals,
        tolerance=settings.REFOCUS["ZERO_THRESHOLD"],
    )
    logger.info("certified %s to order %d: %s", shape.name, K, "pass" if certificate.passed else "fail")
    return certificate


# --------------------------
# Hermite calibration
# --------------------------
def first_order_weight(shape, steps=None):
    """
    Coefficient of σy⊗σz in i·R_1 for one pulse on the two-site Ising
    chain; a symmetric π pulse refocuses to first order iff it vanishes.
    """
    cluster = ClusterSpec(2, ODD)
    schedule = parse_sequence(DESIGN_SEQUENCE, shape)
    steps = steps or settings.REFOCUS["DESIGN_STEPS_PER_INTERVAL"]
    r1 = integrate_perturbative(cluster, preset("ising"), schedule, 1, steps).r[0]
    yz = np.kron(PAULI["y"], PAULI["z"])
    return float(np.real(1j * np.trace(yz @ r1))) / cluster.dim


def calibrate_hermite(sigma, steps=None):
    """Hermite β at which the first-order weight vanishes."""
    def weight(beta):
        return first_order_weight(hermite_shape(beta, sigma), steps)

    grid = np.linspace(0.0, 1.8, 19)
    values = [weight(b) for b in grid]
    for lo, hi, f_lo, f_hi in zip(grid, grid[1:], values, values[1:]):
        if f_lo == 0:
            return float(lo)
        if f_lo * f_hi < 0:
            return float(brentq(weight, lo, hi, xtol=1e-12))
    raise InfeasibleGoalError(f"no Hermite calibration root for sigma={sigma}")
