"""Time-optimal bang-bang sequence synthesis for single-qubit pi rotations.

The control problem: a qubit with drift (omega0/2)*sigma_z and a single
bounded drive axis, H(t) = (omega0/2)*sigma_z + (Omega(t)/2)*sigma_x with
|Omega| <= Omega_bar.  Time-optimal solutions switch Omega between the
extreme values {+Omega_bar, 0, -Omega_bar}; each constant piece ("bang")
evolves by a closed-form SU(2) rotation about one of two tilted axes

    n_(+/-) = (+/- sin(theta), 0, cos(theta)),   tan(theta) = Omega_bar/omega0,

at rate omega = sqrt(omega0^2 + Omega_bar^2), or about z at rate omega0
for a singular (Omega = 0) piece.

Weak driving (theta < pi/4): n = pi/(2*theta) equal bangs of duration
pi/omega, alternating sign.  The product is sigma_x for odd n and
sigma_y for even n, so only one parity is analytically synthesizable at
each such theta; the other parity is handled by the numerical search.

Strong driving (theta > pi/4): three bangs with closed-form durations.

All constructors verify the realized unitary against the target to 1e-9
before returning; synthesis never hands back an unchecked sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product as _iproduct

import numpy as np
from scipy import integrate, optimize

from .qmat import PAULI_X, PAULI_Y, aligned_distance, exp_su2

__all__ = [
    "DriveParams",
    "BangSequence",
    "derive_params",
    "params_from_theta",
    "weak_pi_sequence",
    "strong_pi_sequence",
    "synthesize_pi",
    "search_to_sequence",
    "rwa_reference",
    "si_pi",
    "bang_unitary",
    "sequence_unitary",
    "NonPositiveInput",
    "ThetaMismatch",
    "ParityMismatch",
    "WeakRegime",
    "StrongRegime",
    "NotFound",
    "EmptySequence",
]


class NonPositiveInput(ValueError):
    """An input required to be strictly positive is not."""


class ThetaMismatch(ValueError):
    """Drive angle is incompatible with the requested bang count."""


class ParityMismatch(ValueError):
    """Requested gate parity disagrees with the bang count parity."""


class WeakRegime(ValueError):
    """Operation requires strong driving (theta > pi/4)."""


class StrongRegime(ValueError):
    """Operation requires weak driving (theta <= pi/4)."""


class NotFound(RuntimeError):
    """Numerical search failed to reach the requested tolerance."""

    def __init__(self, message: str, best_residual: float = math.nan):
        super().__init__(message)
        self.best_residual = best_residual


class EmptySequence(ValueError):
    """Operation requires a sequence with at least one bang."""


@dataclass(frozen=True)
class DriveParams:
    """Physical frame of the control problem.

    Attributes
    ----------
    omega0 : float
        Drift frequency (rad/time), > 0.
    omega_bar : float
        Drive amplitude bound (rad/time), > 0.
    theta : float
        arctan(omega_bar/omega0), in (0, pi/2).
    omega : float
        sqrt(omega0^2 + omega_bar^2) = omega0/cos(theta).
    """

    omega0: float
    omega_bar: float
    theta: float
    omega: float

    def __post_init__(self):
        if not (self.omega0 > 0 and self.omega_bar > 0):
            raise NonPositiveInput("omega0 and omega_bar must be strictly positive")
        if abs(self.theta - math.atan2(self.omega_bar, self.omega0)) > 1e-12:
            raise ThetaMismatch("theta does not satisfy tan(theta)=omega_bar/omega0")
        if abs(self.omega - math.hypot(self.omega0, self.omega_bar)) > 1e-12 * self.omega:
            raise ThetaMismatch("omega does not satisfy omega^2=omega0^2+omega_bar^2")


def derive_params(omega0: float, omega_bar: float) -> DriveParams:
    """Build DriveParams from the two physical inputs."""
    if not (omega0 > 0 and omega_bar > 0):
        raise NonPositiveInput("omega0 and omega_bar must be strictly positive")
    return DriveParams(
        omega0=float(omega0),
        omega_bar=float(omega_bar),
        theta=math.atan2(omega_bar, omega0),
        omega=math.hypot(omega0, omega_bar),
    )


def params_from_theta(theta: float, omega0: float = 1.0) -> DriveParams:
    """Build DriveParams from the tilt angle instead of the amplitude."""
    if not 0 < theta < math.pi / 2:
        raise NonPositiveInput("theta must lie strictly inside (0, pi/2)")
    return derive_params(omega0, omega0 * math.tan(theta))


@dataclass(frozen=True)
class BangSequence:
    """Ordered piecewise-constant control: (level, duration) pairs.

    Levels are normalized to {+1, 0, -1}; the physical drive is
    Omega(t) = omega_bar * level.  Zero-duration bangs are disallowed
    and consecutive bangs never share a level (they would merge).
    """

    bangs: tuple[tuple[int, float], ...]
    params: DriveParams
    total_time: float
    time_optimal: bool = False
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for level, duration in self.bangs:
            if level not in (-1, 0, 1):
                raise ValueError(f"bang level {level!r} outside {{-1,0,1}}")
            if not duration > 0:
                raise NonPositiveInput("bang durations must be strictly positive")
        for (la, _), (lb, _) in zip(self.bangs, self.bangs[1:]):
            if la == lb:
                raise ValueError("consecutive bangs share a level; merge them")
        if abs(self.total_time - sum(d for _, d in self.bangs)) > 1e-12 * max(1.0, self.total_time):
            raise ValueError("total_time inconsistent with bang durations")
        if self.time_optimal and len(self.bangs) > 2:
            interior = [d for lv, d in self.bangs[1:-1] if lv != 0]
            t_floor = math.pi / self.params.omega
            if interior and (max(interior) - min(interior) > 1e-10
                             or min(interior) < t_floor - 1e-10):
                raise ValueError("interior bang durations violate the equal-time "
                                 "constraint t_m >= pi/omega")

    @property
    def levels(self) -> tuple[int, ...]:
        return tuple(lv for lv, _ in self.bangs)

    @property
    def durations(self) -> tuple[float, ...]:
        return tuple(d for _, d in self.bangs)


def bang_unitary(level: int, duration: float, params: DriveParams) -> np.ndarray:
    """Exact unitary of a single bang.

    Nonzero level: rotation about (level*sin(theta), 0, cos(theta)) by
    half-angle omega*t/2.  Singular level: drift rotation about z by
    half-angle omega0*t/2.
    """
    if level == 0:
        return exp_su2(0.0, 0.0, 1.0, params.omega0 * duration / 2)
    return exp_su2(
        level * math.sin(params.theta),
        0.0,
        math.cos(params.theta),
        params.omega * duration / 2,
    )


def sequence_unitary(seq: BangSequence) -> np.ndarray:
    """Product of exact bang unitaries, later bangs applied on the left."""
    u = np.eye(2, dtype=complex)
    for level, duration in seq.bangs:
        u = bang_unitary(level, duration, seq.params) @ u
    return u


def _gate_target(gate: str) -> np.ndarray:
    g = gate.lower()
    if g == "x":
        return PAULI_X
    if g == "y":
        return PAULI_Y
    raise ValueError(f"gate must be 'x' or 'y', got {gate!r}")


def weak_pi_sequence(gate: str, n: int, params: DriveParams) -> BangSequence:
    """Alternating n-bang solution for a pi rotation, theta = pi/(2n).

    Each bang lasts pi/omega; the total time n*pi/omega equals
    pi^2*cos(theta)/(2*theta*omega0).  Odd n realizes sigma_x, even n
    sigma_y; asking for the wrong parity raises ParityMismatch.
    """
    if n < 2:
        raise NonPositiveInput("weak solutions need n >= 2 bangs")
    if abs(params.theta - math.pi / (2 * n)) > 1e-9:
        raise ThetaMismatch(
            f"theta={params.theta!r} is not pi/(2*{n}) within 1e-9")
    g = gate.lower()
    if (g == "x") != (n % 2 == 1):
        raise ParityMismatch(f"gate {gate!r} needs {'odd' if g == 'x' else 'even'} n, got {n}")
    t_m = math.pi / params.omega
    bangs = tuple((1 if i % 2 == 0 else -1, t_m) for i in range(n))
    seq = BangSequence(bangs=bangs, params=params, total_time=n * t_m,
                       time_optimal=True, meta={"gate": g})
    check = aligned_distance(_gate_target(gate), sequence_unitary(seq))
    if check > 1e-9:
        raise NotFound(f"weak construction missed target by {check:.3e}", check)
    return seq


def strong_pi_sequence(gate: str, params: DriveParams) -> BangSequence:
    """Three-bang solution for a pi rotation in strong driving (theta > pi/4).

    X: levels (+1, -1, +1) with t1 = t3 = 2*arccsc(2 sin theta)/omega.
    The middle duration admits two literal readings,
    (2*pi - 2*arccsc(2 sin theta))/omega  and  2*pi - 2*arccsc(2 sin theta)/omega;
    both are evaluated and the one whose product reaches sigma_x is kept
    (recorded in meta["t2x_parsing"]).

    Y: the middle bang is singular.  t1 = 2*arccot(sqrt(-cos 2theta))/omega,
    t2 = 2*arctan(sqrt(tan^2 theta - 1))/omega0, and the final bang takes
    the opposite sign of the first, (+1, 0, -1): the equal-sign variant
    has a reflected rotation axis and cannot reach sigma_y for any choice
    of durations.
    """
    theta = params.theta
    if theta <= math.pi / 4:
        raise WeakRegime("strong solutions need theta > pi/4; "
                         "theta = pi/4 belongs to the weak branch with n = 2")
    g = gate.lower()
    omega, omega0 = params.omega, params.omega0
    if g == "x":
        arc = math.asin(1.0 / (2.0 * math.sin(theta)))  # arccsc(2 sin theta)
        t1 = 2 * arc / omega
        candidates = {
            "parenthesized": (2 * math.pi - 2 * arc) / omega,
            "outer": 2 * math.pi - 2 * arc / omega,
        }
        for parsing, t2 in candidates.items():
            if t2 <= 0:
                continue
            seq = BangSequence(
                bangs=((1, t1), (-1, t2), (1, t1)),
                params=params,
                total_time=2 * t1 + t2,
                time_optimal=True,
                meta={"gate": "x", "t2x_parsing": parsing},
            )
            if aligned_distance(PAULI_X, sequence_unitary(seq)) < 1e-9:
                return seq
        raise NotFound("neither middle-duration reading reaches sigma_x")
    if g == "y":
        t1 = 2 * math.atan(1.0 / math.sqrt(-math.cos(2 * theta))) / omega
        t2 = 2 * math.atan(math.sqrt(math.tan(theta) ** 2 - 1.0)) / omega0
        seq = BangSequence(
            bangs=((1, t1), (0, t2), (-1, t1)),
            params=params,
            total_time=2 * t1 + t2,
            time_optimal=True,
            meta={"gate": "y"},
        )
        check = aligned_distance(PAULI_Y, sequence_unitary(seq))
        if check > 1e-9:
            raise NotFound(f"strong Y construction missed target by {check:.3e}", check)
        return seq
    raise ValueError(f"gate must be 'x' or 'y', got {gate!r}")


# ---------------------------------------------------------------------------
# Numerical search
# ---------------------------------------------------------------------------

def _pattern_levels(n: int) -> list[tuple[int, ...]]:
    """Candidate level patterns for n bangs: alternating signs, both
    starting signs, plus (odd n) the variant with a singular middle bang."""
    pats = []
    for start in (1, -1):
        alt = tuple(start * (1 if i % 2 == 0 else -1) for i in range(n))
        pats.append(alt)
        if n == 1:
            continue
        if n % 2 == 1 and n >= 3:
            mid = n // 2
            pats.append(alt[:mid] + (0,) + alt[mid + 1:])
    if n == 1:
        pats.append((0,))
    return pats


def _durations_from_triple(n: int, t_i: float, t_m: float, t_f: float) -> np.ndarray:
    if n == 1:
        return np.array([t_i])
    if n == 2:
        return np.array([t_i, t_f])
    return np.array([t_i] + [t_m] * (n - 2) + [t_f])


def _stack_products(levels: tuple[int, ...], durs: np.ndarray,
                    params: DriveParams) -> np.ndarray:
    """Products for a batch of duration vectors, shape (m, n) -> (m, 2, 2)."""
    m, n = durs.shape
    out = np.broadcast_to(np.eye(2, dtype=complex), (m, 2, 2)).copy()
    sth, cth = math.sin(params.theta), math.cos(params.theta)
    for j in range(n):
        lv = levels[j]
        if lv == 0:
            phi = params.omega0 * durs[:, j] / 2
            nx, nz = 0.0, 1.0
        else:
            phi = params.omega * durs[:, j] / 2
            nx, nz = lv * sth, cth
        c, s = np.cos(phi), np.sin(phi)
        u = np.empty((m, 2, 2), complex)
        u[:, 0, 0] = c - 1j * s * nz
        u[:, 0, 1] = -1j * s * nx
        u[:, 1, 0] = -1j * s * nx
        u[:, 1, 1] = c + 1j * s * nz
        out = np.matmul(u, out)
    return out


def synthesize_pi(gate: str, params: DriveParams) -> BangSequence:
    """Route a pi-rotation request to the matching synthesis family.

    theta = pi/(2n) with the parity that admits the requested gate (odd
    n for x, even for y) goes to the analytic weak construction; any
    theta above pi/4 goes to the strong three-bang construction; every
    other theta falls back to the numerical search, which may raise
    NotFound where no sequence exists within the searched family.
    """
    g = gate.lower()
    theta = params.theta
    n_guess = round(math.pi / (2 * theta))
    if (n_guess >= 2 and abs(theta - math.pi / (2 * n_guess)) < 1e-9
            and (g == "x") == (n_guess % 2 == 1)):
        return weak_pi_sequence(g, n_guess, params)
    if theta > math.pi / 4:
        return strong_pi_sequence(g, params)
    return search_to_sequence(_gate_target(g), params)


def search_to_sequence(target: np.ndarray, params: DriveParams,
                       n_max: int | None = None, tol: float = 1e-9) -> BangSequence:
    """Derivative-free multi-start search for a sequence realizing target.

    Candidate sequences have n in {1..n_max} bangs with equal interior
    durations, parametrized by (t_i, t_m, t_f).  For each level pattern
    an 8x8x8 grid over [0, 2pi/omega]^3 seeds Nelder-Mead refinements of
    the infidelity 1 - |Tr(target^dag U)|/2; solutions below tol are
    collected and the shortest total time wins.  Ties break toward fewer
    bangs, then lexicographically smaller (t_i, t_m, t_f), so the result
    is deterministic for any evaluation order.

    The default n_max = max(3, floor(pi/(2*theta)) + 1) covers the
    analytic families on both branches; it is a search cap, not a claim
    about where optimal solutions live.
    """
    target = np.asarray(target, dtype=complex)
    if target.shape != (2, 2):
        raise ValueError("search targets must be 2x2 unitaries")
    if tol <= 0:
        raise NonPositiveInput("tol must be positive")
    if n_max is None:
        n_max = max(3, int(math.floor(math.pi / (2 * params.theta))) + 1)
    if n_max < 1:
        raise NonPositiveInput("n_max must be >= 1")

    # Identity is reached in zero time; the empty sequence is the optimum.
    if aligned_distance(np.eye(2, dtype=complex), target) < tol:
        return BangSequence(bangs=(), params=params, total_time=0.0)

    span = 2 * math.pi / params.omega
    axis = np.linspace(0.0, span, 9)[1:]  # skip 0 to avoid degenerate starts
    eye_removed_grid = np.array(list(_iproduct(axis, axis, axis)))

    def infidelity(triple, levels, n):
        t_i, t_m, t_f = triple
        if min(t_i, t_m, t_f) < 0:
            return 2.0 + abs(min(t_i, t_m, t_f))
        durs = _durations_from_triple(n, t_i, t_m, t_f)[None, :]
        u = _stack_products(levels, durs, params)[0]
        return 1.0 - abs(np.trace(target.conj().T @ u)) / 2.0

    def prune(triple, levels, n):
        """Drop numerically-zero bangs; None if neighbors then collide."""
        durs = _durations_from_triple(n, *triple)
        keep = durs > 1e-9
        kept_levels = tuple(int(lv) for lv, k in zip(levels, keep) if k)
        kept_durs = tuple(float(d) for d, k in zip(durs, keep) if k)
        if any(a == b for a, b in zip(kept_levels, kept_levels[1:])):
            return None
        return kept_durs, kept_levels

    solutions = []  # (total_time, n_kept, key_triple, n, full levels)

    for n in range(1, n_max + 1):
        for levels in _pattern_levels(n):
            durs_grid = np.stack(
                [_durations_from_triple(n, *g) for g in eye_removed_grid])
            prods = _stack_products(levels, durs_grid, params)
            infs = 1.0 - np.abs(np.einsum("ij,mji->m", target.conj().T, prods)) / 2.0
            order = np.argsort(infs, kind="stable")[:8]
            for idx in order:
                res = optimize.minimize(
                    lambda tr: infidelity(tr, levels, n),
                    eye_removed_grid[idx], method="Nelder-Mead",
                    options={"fatol": 1e-12, "xatol": 1e-10, "maxiter": 2000})
                if res.fun < tol:
                    kept = prune(res.x, levels, n)
                    if kept is None:
                        continue
                    kept_durs, kept_levels = kept
                    solutions.append((sum(kept_durs), len(kept_durs),
                                      tuple(res.x), n, levels))

    if not solutions:
        raise NotFound(f"no pattern with n <= {n_max} reached infidelity < {tol}")

    solutions.sort(key=lambda s: (round(s[0], 9), s[1], s[2]))
    total, _, triple, n, levels = solutions[0]

    # Infidelity is quadratic in the gate error, so in float64 its
    # valley floor is flat over ~sqrt(eps)/omega of duration error and
    # simplex refinement alone leaves T wrong at the 1e-4 level.  The
    # winner is therefore re-solved as a root-finding problem whose
    # residuals vanish *linearly* in the parameter error: realizing the
    # target up to phase means W = target^dag U = exp(i phi) I, i.e.
    # w01 = 0 and w00 = w11.
    def residuals(tr):
        durs = _durations_from_triple(n, *tr)[None, :]
        u = _stack_products(levels, durs, params)[0]
        w = target.conj().T @ u
        d = w[0, 0] - w[1, 1]
        return [w[0, 1].real, w[0, 1].imag, d.real, d.imag]

    res = optimize.least_squares(residuals, np.asarray(triple), method="lm",
                                 xtol=1e-15, ftol=1e-15, gtol=1e-15)
    best = (total,) + prune(triple, levels, n)
    durs_full = _durations_from_triple(n, *res.x)
    if (res.cost < 1e-24 and np.all(durs_full > -1e-9)
            and infidelity(res.x, levels, n) < tol
            and abs(float(durs_full.sum()) - total) < 0.05 * max(1.0, total)):
        kept = prune(res.x, levels, n)
        if kept is not None:
            best = (sum(kept[0]),) + kept

    total, durs, levels = best
    return BangSequence(
        bangs=tuple(zip(levels, durs)),
        params=params,
        total_time=total,
        meta={"search_tol": tol},
    )


def si_pi() -> float:
    """Sine integral Si(pi) by adaptive quadrature of sin(u)/u to 1e-12."""
    val, _ = integrate.quad(lambda u: math.sin(u) / u if u else 1.0, 0.0, math.pi,
                            epsabs=1e-12, epsrel=1e-12)
    return val


def rwa_reference(params: DriveParams) -> tuple[float, float]:
    """On-resonance reference timing.

    Returns (t_rwa, ratio): the pi-pulse duration 2*pi/omega_bar of
    resonant driving at the same amplitude bound (effective Rabi rate
    omega_bar/2), and the time ratio of the bang-bang strategy to it,
    Si(pi)*sin(theta)/(2*theta), which accounts for the Gibbs overshoot
    of the truncated switching function.  Only defined for theta <= pi/4
    where resonant driving is meaningful.
    """
    if params.theta > math.pi / 4:
        raise StrongRegime("on-resonance comparison requires theta <= pi/4")
    t_rwa = 2 * math.pi / params.omega_bar
    ratio = si_pi() * math.sin(params.theta) / (2 * params.theta)
    return t_rwa, ratio
