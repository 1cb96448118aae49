"""Excitable-media dynamics on a mesh: two-variable reaction kinetics
(excitation ``u``, recovery ``v``) diffused through the cotangent Laplace
operator, integrated with explicit Euler steps.

The default reaction constants are the standard values for this model
family (k=8, a=0.15, eps0=0.002, mu1=0.2, mu2=0.3); every one of them is a
config knob.  Pacing sources inject a constant forcing term into ``du/dt``
on their vertex sets while active.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, StabilityError
from .mesh import max_eigenvalue


@dataclass(frozen=True)
class APParams:
    """Reaction constants, diffusion coefficient, and stepping controls."""

    k: float = 8.0
    a: float = 0.15
    eps0: float = 0.002
    mu1: float = 0.2
    mu2: float = 0.3
    D: float = 0.02
    dt: float = 0.02
    steps: int = 10000
    record_every: int = 50

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.steps < 1:
            raise ValueError("steps must be at least 1")
        if self.D < 0:
            raise ValueError("D must be nonnegative")
        if self.record_every < 1:
            raise ValueError("record_every must be at least 1")


@dataclass(frozen=True)
class StimulusProtocol:
    """A pacing source: forcing of ``amplitude`` on ``vertices`` during
    windows of length ``duration`` starting at ``start`` (repeating with
    ``period`` if nonzero, one-shot otherwise)."""

    vertices: tuple
    amplitude: float
    start: float
    duration: float
    period: float = 0.0

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        if len(self.vertices) == 0:
            raise ValueError("stimulus needs at least one vertex")

    def active(self, t):
        phase = t - self.start
        if phase < 0:
            return False
        if self.period > 0:
            phase = phase % self.period
        return phase < self.duration


@dataclass
class SimulationResult:
    """Recorded excitation field: one row per recorded step, one column
    per vertex.

    ``u_range`` and ``v_range`` hold the extremes of both state variables
    over every integration step (not just recorded ones), so boundedness
    of an accepted run can be checked after the fact.
    """

    U: np.ndarray
    times: np.ndarray
    u_range: tuple = (0.0, 0.0)
    v_range: tuple = (0.0, 0.0)

    @property
    def num_times(self):
        return len(self.times)


def simulate_aliev_panfilov(mesh, lap, params, stimuli=(), seed=0):
    """Integrate the two-variable excitable dynamics on the mesh.

    The state starts at rest (u = v = 0) and is advanced with explicit
    Euler steps; the run is rejected up front if ``dt * D`` exceeds the
    stability bound ``2 / lambda_max`` of the diffusion operator.  The
    scheme is deterministic; ``seed`` is accepted for interface uniformity
    with the noisy-observation pipeline.

    Raises
    ------
    StabilityError
        If the explicit step violates the diffusion stability bound.
    NumericalError
        If the state goes non-finite (names the failing step).
    """
    del seed  # deterministic integration
    n = mesh.num_vertices
    p = params
    if p.D > 0:
        lam_max = max_eigenvalue(lap)
        if p.dt * p.D * lam_max > 2.0:
            raise StabilityError(
                f"dt*D*lambda_max = {p.dt * p.D * lam_max:.3f} exceeds 2; "
                f"reduce dt below {2.0 / (p.D * lam_max):.3e}"
            )

    for s in stimuli:
        verts = np.asarray(s.vertices, dtype=np.int64)
        if verts.min() < 0 or verts.max() >= n:
            raise ValueError("stimulus vertex out of range")

    u = np.zeros(n)
    v = np.zeros(n)
    C = lap.stiffness
    m = lap.mass

    n_rec = p.steps // p.record_every
    U = np.empty((n_rec, n))
    times = np.empty(n_rec)
    rec = 0

    u_lo = u_hi = v_lo = v_hi = 0.0
    # the explicit finiteness check below is the error path; numpy's
    # overflow warnings on the way to it are noise
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(p.steps):
            t = step * p.dt
            du = -p.k * u * (u - p.a) * (u - 1.0) - u * v
            if p.D > 0:
                du += p.D * (-(C @ u) / m)
            dv = (p.eps0 + p.mu1 * v / (u + p.mu2)) * (
                -v - p.k * u * (u - p.a - 1.0))
            for s in stimuli:
                if s.active(t):
                    du[np.asarray(s.vertices, dtype=np.int64)] += s.amplitude
            u = u + p.dt * du
            v = v + p.dt * dv
            if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
                raise NumericalError(
                    f"state went non-finite at step {step + 1}", step=step + 1
                )
            u_lo = min(u_lo, float(u.min()))
            u_hi = max(u_hi, float(u.max()))
            v_lo = min(v_lo, float(v.min()))
            v_hi = max(v_hi, float(v.max()))
            if (step + 1) % p.record_every == 0:
                U[rec] = u
                times[rec] = (step + 1) * p.dt
                rec += 1

    return SimulationResult(U=U, times=times, u_range=(u_lo, u_hi),
                            v_range=(v_lo, v_hi))


def add_noise(U, noise_level, seed):
    """Add iid Gaussian noise of standard deviation ``noise_level``."""
    if noise_level < 0:
        raise ValueError("noise_level must be nonnegative")
    U = np.asarray(U, dtype=float)
    if noise_level == 0:
        return U.copy()
    rng = np.random.default_rng(seed)
    return U + noise_level * rng.standard_normal(U.shape)


def two_source_pacing(mesh, period=40.0, amplitude=0.4, duration=1.5,
                      patch_radius=None):
    """Benchmark pacing protocol: a regular source at the apex (highest-z
    vertex) plus a faster source (0.6x period) near the farthest +x vertex,
    whose interacting wavefronts produce irregular activity.

    Each source fires a geodesic patch (a single vertex cannot ignite a
    wave against diffusion), sized at a few edge lengths by default.  The
    amplitude is kept low enough that the cubic reaction term caps ``u``
    near 1 even when a window lands on already-excited tissue.
    """
    from .mesh import geodesic_distances

    if patch_radius is None:
        patch_radius = 2.75 * float(mesh.edge_graph.data.mean())
    apex = int(np.argmax(mesh.vertices[:, 2]))
    side = int(np.argmax(mesh.vertices[:, 0]))

    def patch(center):
        d = geodesic_distances(mesh, center).distances
        return tuple(int(i) for i in np.where(d < patch_radius)[0])

    return (
        StimulusProtocol(vertices=patch(apex), amplitude=amplitude, start=0.0,
                         duration=duration, period=period),
        StimulusProtocol(vertices=patch(side), amplitude=amplitude,
                         start=0.5 * period, duration=duration,
                         period=0.6 * period),
    )
