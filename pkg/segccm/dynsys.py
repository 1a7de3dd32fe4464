"""
Autonomous ODE systems, fixed-step RK4 integration, measurement
functions and observation noise.

The systems themselves live in `segccm.catalogue`; this module holds
the types they are built from and everything that runs them.
"""

import logging
import zlib
from dataclasses import dataclass
from dataclasses import field as dataclass_field
from typing import Callable, Mapping, Optional, Tuple

import numpy as np

from .exceptions import ArgumentError, DivergenceError, NumericalError
from .libs import csvio, taylor

logger = logging.getLogger(__name__)

# Per-component magnitude beyond which an integration is declared diverged
DIVERGENCE_GUARD = 1e12

SYMMETRY_KINDS = ("none", "c2", "reflection", "c4")


@dataclass(frozen=True)
class ReferenceConfig:
    """ Simulation and embedding defaults of a catalogue system """

    x0: Tuple[float, ...]
    dt: float
    t_span: Tuple[float, float]
    tau: int
    m: int

    def __post_init__(self):
        if not self.dt > 0:
            raise ArgumentError("dt must be positive, got %s" % self.dt)
        if not self.t_span[1] > self.t_span[0]:
            raise ArgumentError("t_span must be increasing, got %s" % (self.t_span,))
        if self.tau < 1 or self.m < 1:
            raise ArgumentError(
                "tau and m must be >= 1, got tau=%s m=%s" % (self.tau, self.m)
            )

    @property
    def n_steps(self):
        return int(round((self.t_span[1] - self.t_span[0]) / self.dt))


@dataclass(frozen=True)
class Symmetry:
    """
    A linear symmetry g of the vector field, v(g x) = g v(x).

    kind is one of none, c2 (half-turn), reflection, c4 (quarter-turn).
    `matrix` is the representation; None for kind none.
    """

    kind: str = "none"
    matrix: Optional[Tuple[Tuple[float, ...], ...]] = None
    description: str = ""

    def __post_init__(self):
        if self.kind not in SYMMETRY_KINDS:
            raise ArgumentError("Unknown symmetry kind '%s'" % self.kind)
        if self.kind != "none" and self.matrix is None:
            raise ArgumentError("Symmetry '%s' needs a representation" % self.kind)

    @classmethod
    def diagonal(cls, kind, signs, description=""):
        n = len(signs)
        matrix = tuple(
            tuple(float(signs[i]) if i == j else 0.0 for j in range(n))
            for i in range(n)
        )
        return cls(kind, matrix, description)

    @property
    def representation(self):
        if self.matrix is None:
            return None
        return np.array(self.matrix, dtype=float)

    @property
    def is_order_two(self):
        return self.kind in ("c2", "reflection")

    def act(self, x):
        """ g x for a state (or an array of states along the last axis) """
        if self.matrix is None:
            return np.array(x, dtype=float)
        return np.asarray(x, dtype=float) @ self.representation.T

    def parity(self, index):
        """ +1 or -1 if coordinate `index` is even or odd under g """
        R = self.representation
        if R is None or not np.array_equal(R, np.diag(np.diag(R))):
            raise ArgumentError("Parity is defined for diagonal symmetries only")
        return int(R[index, index])


NO_SYMMETRY = Symmetry()


@dataclass(frozen=True)
class SystemSpec:
    """
    An autonomous ODE system.

    `field(state, params)` returns the derivative as a list. It is written
    with arithmetic and `segccm.libs.taylor.sqrt` only so that it also
    evaluates on Taylor jets.
    """

    name: str
    dim: int
    params: Mapping[str, float]
    field: Callable = dataclass_field(repr=False, compare=False)
    variables: Tuple[str, ...] = ()
    symmetry: Symmetry = NO_SYMMETRY
    default_config: Optional[ReferenceConfig] = None
    extended: bool = False
    description: str = ""

    def __post_init__(self):
        if not self.variables:
            object.__setattr__(
                self, "variables", tuple("x%d" % i for i in range(self.dim))
            )
        if len(self.variables) != self.dim:
            raise ArgumentError(
                "%s: %s variable names for dimension %s"
                % (self.name, len(self.variables), self.dim)
            )

    def vector_field(self, x):
        """ v(x) without argument checks """
        return np.array(self.field(x, self.params), dtype=float)

    def variable_index(self, name):
        if isinstance(name, (int, np.integer)):
            index = int(name)
        elif str(name) in self.variables:
            index = self.variables.index(str(name))
        elif str(name).lstrip("-").isdigit():
            index = int(name)
        else:
            raise ArgumentError(
                "%s has no variable '%s' (variables: %s)"
                % (self.name, name, ", ".join(self.variables))
            )
        if not 0 <= index < self.dim:
            raise ArgumentError(
                "Coordinate index %s out of range for dimension %s" % (index, self.dim)
            )
        return index


@dataclass
class Trajectory:
    """ Full-state samples at a fixed step """

    states: np.ndarray
    dt: float
    t0: float = 0.0
    variables: Tuple[str, ...] = ()
    system: str = ""

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=float)
        if self.states.ndim != 2 or len(self.states) < 2:
            raise ArgumentError("A trajectory needs at least two state vectors")
        if not np.all(np.isfinite(self.states)):
            raise ArgumentError("Trajectory states must be finite")
        if not self.variables:
            self.variables = tuple("x%d" % i for i in range(self.dim))

    def __len__(self):
        return len(self.states)

    @property
    def dim(self):
        return self.states.shape[1]

    @property
    def times(self):
        return self.t0 + self.dt * np.arange(len(self.states))

    def to_csv(self, path):
        csvio.write_trajectory_csv(path, self.times, self.states, self.variables)

    @classmethod
    def from_csv(cls, path):
        header, data = csvio.read_table(path)
        if not header or header[0] != "t" or len(header) < 2:
            raise ArgumentError("%s is not a trajectory CSV (t,x0,x1,...)" % path)
        times = data[:, 0]
        dt = float(times[1] - times[0]) if len(times) > 1 else 1.0
        return cls(data[:, 1:], dt, float(times[0]), tuple(header[1:]))


@dataclass
class TimeSeries:
    """ Scalar observations at a fixed sampling interval """

    values: np.ndarray
    dt: float = 1.0
    t0: float = 0.0
    name: str = "value"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).ravel()
        if not np.all(np.isfinite(self.values)):
            raise ArgumentError("Series values must be finite")
        if not self.dt > 0:
            raise ArgumentError("dt must be positive, got %s" % self.dt)

    def __len__(self):
        return len(self.values)

    @property
    def times(self):
        return self.t0 + self.dt * np.arange(len(self.values))

    def to_csv(self, path):
        csvio.write_series_csv(path, self.times, self.values)

    @classmethod
    def from_csv(cls, path, column=None):
        """ Read `t,value` files, or one named column of a wider table """
        header, data = csvio.read_table(path)
        if header[0] != "t" or len(header) < 2:
            raise ArgumentError("%s has no leading 't' column" % path)
        if column is None:
            index = 1
        elif column in header[1:]:
            index = header.index(column)
        else:
            raise ArgumentError(
                "%s has no column '%s' (columns: %s)"
                % (path, column, ", ".join(header[1:]))
            )
        times = data[:, 0]
        dt = float(times[1] - times[0]) if len(times) > 1 else 1.0
        return cls(data[:, index], dt, float(times[0]), header[index])


def _check_state(spec, x):
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.dim,):
        raise ArgumentError(
            "%s expects a state of dimension %s, got shape %s"
            % (spec.name, spec.dim, x.shape)
        )
    if not np.all(np.isfinite(x)):
        raise ArgumentError("State must be finite, got %s" % x)
    return x


def eval_vector_field(spec, x):
    """ v(x) for a finite state of dimension spec.dim """
    return spec.vector_field(_check_state(spec, x))


def integrate_rk4(spec, x0, dt, n_steps, t0=0.0):
    """
    Classical fourth-order Runge-Kutta with fixed step.

    Returns a Trajectory of n_steps + 1 states starting at x0. Raises
    DivergenceError naming the step at which a component exceeds
    DIVERGENCE_GUARD (or turns non-finite).
    """
    x = _check_state(spec, x0)
    if not dt > 0:
        raise ArgumentError("dt must be positive, got %s" % dt)
    if n_steps < 1:
        raise ArgumentError("n_steps must be >= 1, got %s" % n_steps)

    logger.debug("Integrating %s: %s steps of %s" % (spec.name, n_steps, dt))
    f = spec.vector_field
    half = 0.5 * dt
    sixth = dt / 6.0
    states = np.empty((n_steps + 1, spec.dim))
    states[0] = x
    for step in range(1, n_steps + 1):
        k1 = f(x)
        k2 = f(x + half * k1)
        k3 = f(x + half * k2)
        k4 = f(x + dt * k3)
        x = x + sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.abs(x) <= DIVERGENCE_GUARD):
            raise DivergenceError(
                "%s diverged at step %s (|x| > %g)" % (spec.name, step, DIVERGENCE_GUARD),
                step,
            )
        states[step] = x
    return Trajectory(states, dt, t0, spec.variables, spec.name)


def simulate(spec, burn_in=0, t_end=None, x0=None, dt=None):
    """
    Run a system at its ReferenceConfig.

    `burn_in` samples are dropped from the front (default 0 keeps the
    whole trajectory); `t_end`, `x0` and `dt` override the configuration.
    """
    config = spec.default_config
    if config is None:
        raise ArgumentError("%s has no reference configuration" % spec.name)
    dt = config.dt if dt is None else dt
    t_start = config.t_span[0]
    t_end = config.t_span[1] if t_end is None else t_end
    n_steps = int(round((t_end - t_start) / dt))
    if burn_in < 0 or burn_in > n_steps - 1:
        raise ArgumentError(
            "burn_in must lie in [0, %s], got %s" % (n_steps - 1, burn_in)
        )
    traj = integrate_rk4(spec, config.x0 if x0 is None else x0, dt, n_steps, t_start)
    if burn_in:
        traj = Trajectory(
            traj.states[burn_in:],
            dt,
            t_start + burn_in * dt,
            traj.variables,
            traj.system,
        )
    return traj


def measurement_weights(measurement, dim, variables=()):
    """
    Weight vector w of a linear measurement h(x) = w . x.

    `measurement` is a coordinate index, a variable name, a sequence of
    `dim` weights, a mapping {variable or index: weight}, or a string
    like "x+z".
    """
    variables = tuple(variables) or tuple("x%d" % i for i in range(dim))

    def index_of(key):
        if isinstance(key, (int, np.integer)):
            index = int(key)
        elif key in variables:
            index = variables.index(key)
        elif str(key).isdigit():
            index = int(key)
        else:
            raise ArgumentError(
                "Unknown variable '%s' (variables: %s)" % (key, ", ".join(variables))
            )
        if not 0 <= index < dim:
            raise ArgumentError(
                "Coordinate index %s out of range for dimension %s" % (index, dim)
            )
        return index

    w = np.zeros(dim)
    if isinstance(measurement, str) and "+" in measurement:
        for part in measurement.split("+"):
            w[index_of(part.strip())] += 1.0
    elif isinstance(measurement, (int, np.integer, str)):
        w[index_of(measurement)] = 1.0
    elif isinstance(measurement, Mapping):
        for key, weight in measurement.items():
            w[index_of(key)] += float(weight)
    else:
        weights = np.asarray(measurement, dtype=float)
        if weights.shape != (dim,):
            raise ArgumentError(
                "Measurement weights must have length %s, got %s"
                % (dim, weights.shape)
            )
        w = weights.copy()
    if not np.any(w):
        raise ArgumentError("Measurement has all-zero weights")
    return w


def measurement_name(measurement, variables):
    if isinstance(measurement, (int, np.integer)):
        return variables[int(measurement)]
    if isinstance(measurement, str):
        return measurement
    return "h"


def observe(traj, measurement):
    """ value_i = h(state_i) for a coordinate or linear measurement h """
    w = measurement_weights(measurement, traj.dim, traj.variables)
    nonzero = np.flatnonzero(w)
    if len(nonzero) == 1 and w[nonzero[0]] == 1.0:
        values = traj.states[:, nonzero[0]].copy()
    else:
        values = traj.states @ w
    return TimeSeries(values, traj.dt, traj.t0, measurement_name(measurement, traj.variables))


def derive_seed(seed, *labels):
    """
    Sub-seed for one randomized step.

    numpy.random.SeedSequence(seed, spawn_key=(crc32(label), ...)) with
    the first 64-bit word of its state as the result. Labels are strings
    naming the step ("noise:x", "symmetry", ...); equal (seed, labels)
    always give the same sub-seed.
    """
    key = tuple(zlib.crc32(str(label).encode("utf-8")) for label in labels)
    sequence = np.random.SeedSequence(int(seed), spawn_key=key)
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def add_noise(series, sigma, seed):
    """
    Add i.i.d. normal(0, sigma) observation noise.

    Uses numpy's PCG64 Generator seeded with `seed` (normals by the
    ziggurat method). sigma = 0 returns `series` itself.
    """
    if sigma < 0:
        raise ArgumentError("Noise sigma must be >= 0, got %s" % sigma)
    if sigma == 0:
        return series
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, sigma, len(series))
    return TimeSeries(series.values + noise, series.dt, series.t0, series.name)


def lie_derivatives(spec, measurement, state, order):
    """
    L_f^j h(x) for j = 0..order-1 at `state`.

    The values are the time derivatives of h along the flow at t = 0,
    evaluated by Taylor-mode recursion on the vector field.
    """
    x = _check_state(spec, state)
    if order < 1:
        raise ArgumentError("order must be >= 1, got %s" % order)
    w = measurement_weights(measurement, spec.dim, spec.variables)
    try:
        with np.errstate(over="raise", invalid="raise", divide="raise"):
            values = taylor.time_derivatives(
                lambda s: spec.field(s, spec.params), x, w, order
            )
    except (FloatingPointError, ZeroDivisionError, ValueError) as e:
        raise NumericalError("Lie derivatives of %s failed: %s" % (spec.name, e), order)
    bad = np.flatnonzero(~np.isfinite(values))
    if len(bad):
        raise NumericalError(
            "Lie derivative of order %s is not finite" % bad[0], int(bad[0])
        )
    return values


def check_equivariance(spec, n_states=100, seed=0, scale=None):
    """
    max over random states of |v(g x) - g v(x)| for the system's symmetry.

    States are drawn uniformly from a box of half-width `scale`
    (default: 2 * max |x0|, at least 1).
    """
    if spec.symmetry.matrix is None:
        raise ArgumentError("%s has no symmetry to check" % spec.name)
    if scale is None:
        x0 = spec.default_config.x0 if spec.default_config else (1.0,)
        scale = max(1.0, 2.0 * float(np.max(np.abs(x0))))
    rng = np.random.default_rng(seed)
    worst = 0.0
    for x in rng.uniform(-scale, scale, (n_states, spec.dim)):
        lhs = spec.vector_field(spec.symmetry.act(x))
        rhs = spec.symmetry.act(spec.vector_field(x))
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def linear_system(A, name="linear", x0=None):
    """ SystemSpec for x' = A x """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ArgumentError("A must be square, got shape %s" % (A.shape,))
    n = A.shape[0]
    rows = [[float(a) for a in row] for row in A]

    def linear_field(s, p):
        return [sum(rows[i][j] * s[j] for j in range(n)) for i in range(n)]

    params = {"a%d%d" % (i, j): rows[i][j] for i in range(n) for j in range(n)}
    config = ReferenceConfig(
        tuple(x0) if x0 is not None else (1.0,) * n, 0.01, (0.0, 10.0), 1, n
    )
    return SystemSpec(name, n, params, linear_field, default_config=config)


def induced_lorenz_coordinates(traj, sigma=10.0, rho=28.0):
    """
    (u, v, w) = (x, sigma (y - x), sigma ((rho + sigma) x - (sigma + 1) y - x z))

    The image of a Lorenz63 trajectory that evolves under the induced
    third-order system.
    """
    x, y, z = traj.states[:, 0], traj.states[:, 1], traj.states[:, 2]
    u = x
    v = sigma * (y - x)
    w = sigma * ((rho + sigma) * x - (sigma + 1.0) * y - x * z)
    return np.column_stack([u, v, w])


def invariant_burke_shaw_coordinates(traj):
    """ (x^2 - y^2, 2 x y, z): the quotient map of the half-turn about z """
    x, y, z = traj.states[:, 0], traj.states[:, 1], traj.states[:, 2]
    return np.column_stack([x * x - y * y, 2.0 * x * y, z])


def central_difference(values, dt):
    """ Second-order centred derivative for interior samples """
    values = np.asarray(values, dtype=float)
    return (values[2:] - values[:-2]) / (2.0 * dt)
