"""
Catalogue of benchmark systems.

Each entry builds a SystemSpec with its parameters, symmetry and reference
simulation. Vector fields return plain lists and use arithmetic and
`taylor.sqrt` only, so the same function serves RK4 integration and
Taylor-mode Lie derivatives.

Systems flagged `extended` take their equations from the literature they
are usually cited from; they are never used to gate reproductions.
"""

import logging
import math

from .dynsys import ReferenceConfig, Symmetry, SystemSpec, NO_SYMMETRY
from .exceptions import UnknownSystemError
from .libs.taylor import sqrt

logger = logging.getLogger(__name__)

# Half-turn about the z axis, (x, y, z) -> (-x, -y, z)
ROTATION_Z = Symmetry.diagonal("c2", (-1, -1, 1), "half-turn about z")


def lorenz63(s, p):
    x, y, z = s
    return [
        p["sigma"] * (y - x),
        p["rho"] * x - y - x * z,
        x * y - p["beta"] * z,
    ]


def chen_ueta(s, p):
    x, y, z = s
    a, b, c = p["alpha"], p["beta"], p["gamma"]
    return [a * (y - x), (c - a) * x - x * z + c * y, x * y - b * z]


def burke_shaw(s, p):
    # alpha enters with the sign that gives the bounded attractor, S = -alpha
    x, y, z = s
    S, b = -p["alpha"], p["beta"]
    return [-S * (x + y), -y - S * x * z, b + S * x * y]


def three_scroll(s, p):
    x, y, z = s
    return [
        p["a"] * (y - x) + p["d"] * x * z,
        p["b"] * x + p["f"] * y - x * z,
        -p["e"] * x ** 2 + x * y + p["c"] * z,
    ]


def kissing(s, p):
    x, y, z = s
    return [x - x * y, z, -y - p["a"] * z + x ** 2]


def induced_lorenz(s, p):
    # third-order form of Lorenz63 in (x, x', x'')
    u, v, w = s
    sg, r, b = p["sigma"], p["rho"], p["beta"]
    return [
        v,
        w,
        b * sg * (r - 1) * u
        - b * (sg + 1) * v
        - (1 + b + sg) * w
        - u * u * v
        - sg * u ** 3
        + (v / u) * (w + (1 + sg) * v),
    ]


def burke_shaw_invariant(s, p):
    u, v, w = s
    S, b = -p["alpha"], p["beta"]
    rho = sqrt(u * u + v * v)
    return [
        -(S + 1) * u - S * (1 - w) * v + (1 - S) * rho,
        S * (1 - w) * u - S * (1 + w) * rho - (S + 1) * v,
        S / 2 * v + b,
    ]


def circuit4d(s, p):
    x, y, z, w = s
    return [p["a"] * (y - x), x * z + w, p["b"] - x * y, y * z - p["c"] * w]


def lorenz4d_hyper(s, p):
    x, y, z, w = s
    return [
        p["sigma"] * (y - x),
        p["rho"] * x - y - x * z + w,
        -p["beta"] * z + x * y,
        p["k1"] * x + p["k2"] * y,
    ]


def lorenz5d_hyper(s, p):
    x, y, z, u, w = s
    return [
        p["sigma"] * (y - x) + u,
        p["rho"] * x - y - x * z - w,
        -p["beta"] * z + x * y,
        -x * z + p["k1"] * u,
        p["k2"] * y,
    ]


def fourfold_burke_shaw(s, p):
    x, y, z = s
    S, V = p["S"], p["V"]
    r2 = x * x + y * y
    u3 = x ** 3 - 3 * x * y * y
    v3 = 3 * x * x * y - y ** 3
    v4 = 4 * x ** 3 * y - 4 * x * y ** 3
    return [
        -(S + 1) * x / 4 - S * (1 - z) * y / 4
        + (u3 * (1 - S) - v3 * S * (1 + z)) / (4 * r2),
        S * (1 - z) * x / 4 - (S + 1) * y / 4
        - (v3 * (1 - S) + u3 * S * (1 + z)) / (4 * r2),
        V + S / 2 * v4,
    ]


def lorenz9d(s, p):
    x1, x2, x3, x4, x5, x6, x7, x8, x9 = s
    sg, R = p["sigma"], p["R"]
    b1, b2, b3, b4, b5, b6 = p["b1"], p["b2"], p["b3"], p["b4"], p["b5"], p["b6"]
    return [
        -sg * (b1 * x1 + b2 * x7) + x4 * (b4 * x4 - x2) + b3 * x3 * x5,
        -sg * x2 + x1 * x4 - x2 * x5 + x4 * x5 - (2 / sg) * x9,
        sg * (b2 * x8 - b1 * x3) + x2 * x4 - b4 * x2 ** 2 - b3 * x1 * x5 / sg,
        -sg * x4 - x2 * x3 - x2 * x5 + x4 * x5 + x9 / 2,
        -sg * b5 * x5 + x2 ** 2 / 2 - x4 ** 2 / 2,
        -b6 * x6 + x2 * x9 - x4 * x9,
        -b1 * x7 - R * x1 + 2 * x5 * x8 - x4 * x9,
        -b1 * x8 + R * x3 - 2 * x5 * x7 + x2 * x9,
        -x9 + (R + 2 * x6) * (x4 - x2) + x4 * x7 - x2 * x8,
    ]


def rossler(s, p):
    x, y, z = s
    return [-y - z, x + p["a"] * y, p["b"] + x * z - p["c"] * z]


def ramp_sine(s, p):
    # x ramps linearly, (y, q) is a harmonic oscillator
    x, y, q = s
    return [p["rate"], p["omega"] * q, -p["omega"] * y]


def shimizu_morioka(s, p):
    x, y, z = s
    return [y, x - p["a"] * y - x * z, -p["b"] * z + x ** 2]


def rucklidge(s, p):
    x, y, z = s
    return [-p["kappa"] * x + p["lam"] * y - y * z, x, -z + y ** 2]


def sprott_b(s, p):
    x, y, z = s
    return [y * z, x - y, 1 - x * y]


def sprott_c(s, p):
    x, y, z = s
    return [y * z, x - y, 1 - x ** 2]


def rikitake(s, p):
    x, y, z = s
    return [-p["mu"] * x + z * y, -p["mu"] * y + (z - p["a"]) * x, 1 - x * y]


def lu_chen_cheng(s, p):
    x, y, z = s
    return [p["a"] * (y - x), -x * z + p["c"] * y, x * y - p["b"] * z]


def chongxin(s, p):
    x, y, z = s
    return [
        p["a"] * (y - x),
        p["b"] * x - p["k"] * x * z,
        -p["c"] * z + p["h"] * x ** 2,
    ]


def _spec(name, field, params, x0, dt, t_span, tau, m, variables=("x", "y", "z"),
          symmetry=ROTATION_Z, extended=False, description=""):
    return SystemSpec(
        name=name,
        dim=len(x0),
        params={k: float(v) for k, v in params.items()},
        field=field,
        variables=tuple(variables),
        symmetry=symmetry,
        default_config=ReferenceConfig(tuple(float(v) for v in x0), dt, t_span, tau, m),
        extended=extended,
        description=description,
    )


_BUILDERS = {
    "lorenz63": lambda: _spec(
        "lorenz63", lorenz63, {"sigma": 10, "rho": 28, "beta": 8 / 3},
        (1, 1, 1), 0.01, (0.0, 100.0), 9, 3,
        description="Lorenz63 convection model",
    ),
    "chen_ueta": lambda: _spec(
        "chen_ueta", chen_ueta, {"alpha": 35, "beta": 3, "gamma": 28},
        (-10, 0, 37), 0.005, (0.0, 50.0), 20, 3,
        description="Chen & Ueta system",
    ),
    "burke_shaw": lambda: _spec(
        "burke_shaw", burke_shaw, {"alpha": -10.0, "beta": 4.272},
        (0.5, 0.5, 0.5), 0.01, (0.0, 100.0), 10, 3,
        description="Burke & Shaw system",
    ),
    "three_scroll": lambda: _spec(
        "three_scroll", three_scroll,
        {"a": 40, "b": 55, "c": 11 / 6, "d": 0.16, "e": 0.65, "f": 20},
        (2, 2, 2), 0.0015, (0.0, 150.0), 20, 3,
        description="three-scroll chaotic system",
    ),
    "kissing": lambda: _spec(
        "kissing", kissing, {"a": 0.7},
        (2, 2, 0), 0.01, (0.0, 200.0), 10, 3,
        symmetry=Symmetry.diagonal("reflection", (-1, 1, 1), "mirror in x = 0"),
        description="reflection-equivariant 'kissing' attractor",
    ),
    "induced_lorenz": lambda: _spec(
        "induced_lorenz", induced_lorenz, {"sigma": 10, "rho": 28, "beta": 8 / 3},
        (1, 0, 260), 0.01, (0.0, 100.0), 9, 3, variables=("u", "v", "w"),
        symmetry=Symmetry.diagonal("c2", (-1, -1, -1), "inversion through 0"),
        description="Lorenz63 written in the derivatives of x",
    ),
    "burke_shaw_invariant": lambda: _spec(
        "burke_shaw_invariant", burke_shaw_invariant,
        {"alpha": -10.0, "beta": 4.272},
        (0, 0.5, 0.5), 0.01, (0.0, 100.0), 10, 3, variables=("u", "v", "w"),
        symmetry=NO_SYMMETRY,
        description="image of Burke & Shaw under (x^2 - y^2, 2xy, z)",
    ),
    "circuit4d": lambda: _spec(
        "circuit4d", circuit4d, {"a": 6, "b": 11, "c": 5},
        (10, 10, 0, 0), 0.01, (0.0, 100.0), 50, 4, variables=("x", "y", "z", "w"),
        symmetry=Symmetry.diagonal("c2", (-1, -1, 1, -1), "half-turn about z"),
        description="four-dimensional oscillatory modular circuit",
    ),
    "lorenz4d_hyper": lambda: _spec(
        "lorenz4d_hyper", lorenz4d_hyper,
        {"sigma": 10, "rho": 28, "beta": 8 / 3, "k1": -9.3, "k2": -5},
        (1, 1, 1, 1), 0.005, (0.0, 50.0), 15, 4, variables=("x", "y", "z", "w"),
        symmetry=Symmetry.diagonal("c2", (-1, -1, 1, -1), "half-turn about z"),
        description="Lorenz63 with a linear controller on y",
    ),
    "lorenz5d_hyper": lambda: _spec(
        "lorenz5d_hyper", lorenz5d_hyper,
        {"sigma": 10, "rho": 28, "beta": 8 / 3, "k1": 1, "k2": 30},
        (1, 1, 1, 1, 1), 0.01, (0.0, 100.0), 60, 5,
        variables=("x", "y", "z", "u", "w"),
        symmetry=Symmetry.diagonal("c2", (-1, -1, 1, -1, -1), "half-turn about z"),
        description="five-dimensional hyperchaotic Lorenz-like system",
    ),
    "fourfold_burke_shaw": lambda: _spec(
        "fourfold_burke_shaw", fourfold_burke_shaw, {"S": 10, "V": 4.271},
        (0.1, 0.1, 0.1), 0.01, (0.0, 100.0), 10, 3,
        symmetry=Symmetry(
            "c4",
            ((0.0, -1.0, 0.0), (1.0, 0.0, 0.0), (0.0, 0.0, 1.0)),
            "quarter-turn about z",
        ),
        description="four-fold cover of the Burke & Shaw system",
    ),
    "lorenz9d": lambda: _spec(
        "lorenz9d", lorenz9d,
        {
            "sigma": 0.5, "R": 14.3,
            "b1": 5 / 1.5, "b2": 0.6, "b3": 1.2,
            "b4": 0.2, "b5": 2 / 1.5, "b6": 4 / 1.5,
        },
        (0.01, 0, 0.01, 0, 0, 0, 0, 0, 0.01), 0.02, (0.0, 800.0), 12, 9,
        variables=tuple("x%d" % i for i in range(1, 10)),
        symmetry=NO_SYMMETRY,
        description="nine-mode truncation of three-dimensional convection",
    ),
    "rossler": lambda: _spec(
        "rossler", rossler, {"a": 0.2, "b": 0.2, "c": 5.7},
        (1, 1, 0), 0.01, (0.0, 4000.0), 40, 3, symmetry=NO_SYMMETRY,
        description="Rossler system",
    ),
    "ramp_sine": lambda: _spec(
        "ramp_sine", ramp_sine, {"rate": 1 / 2000, "omega": math.pi / 50},
        (0, 0, 1), 1.0, (0.0, 1999.0), 25, 2, variables=("x", "y", "q"),
        symmetry=NO_SYMMETRY,
        description="monotone ramp x = t/2000 next to y = sin(pi t / 50)",
    ),
    "shimizu_morioka": lambda: _spec(
        "shimizu_morioka", shimizu_morioka, {"a": 0.85, "b": 0.5},
        (0.1, 0, 0), 0.01, (0.0, 200.0), 30, 3, extended=True,
        description="Shimizu-Morioka system",
    ),
    "rucklidge": lambda: _spec(
        "rucklidge", rucklidge, {"kappa": 2, "lam": 6.7},
        (1, 0, 4.5), 0.01, (0.0, 200.0), 20, 3, extended=True,
        description="Rucklidge double convection model",
    ),
    "sprott_b": lambda: _spec(
        "sprott_b", sprott_b, {}, (0.05, 0.05, 0.05), 0.01, (0.0, 200.0), 20, 3,
        extended=True, description="Sprott case B",
    ),
    "sprott_c": lambda: _spec(
        "sprott_c", sprott_c, {}, (0.05, 0.05, 0.05), 0.01, (0.0, 200.0), 20, 3,
        extended=True, description="Sprott case C",
    ),
    "rikitake": lambda: _spec(
        "rikitake", rikitake, {"mu": 2, "a": 5},
        (1, 0, 0.5), 0.01, (0.0, 200.0), 20, 3, extended=True,
        description="Rikitake two-disk dynamo",
    ),
    "lu_chen_cheng": lambda: _spec(
        "lu_chen_cheng", lu_chen_cheng, {"a": 36, "b": 3, "c": 20},
        (1, 1, 1), 0.005, (0.0, 50.0), 10, 3, extended=True,
        description="Lu-Chen-Cheng system",
    ),
    "chongxin": lambda: _spec(
        "chongxin", chongxin, {"a": 10, "b": 40, "c": 2.5, "h": 4, "k": 1},
        (2.2, 2.4, 38), 0.005, (0.0, 50.0), 15, 3, extended=True,
        description="Liu Chongxin system",
    ),
}

# alternative spellings accepted on the command line
ALIASES = {
    "lorenz": "lorenz63",
    "chen": "chen_ueta",
    "burke": "burke_shaw",
    "4d_circuit": "circuit4d",
    "lorenz4d": "lorenz4d_hyper",
    "lorenz5d": "lorenz5d_hyper",
    "counterexample_eq27": "ramp_sine",
}


def available_systems(extended=True):
    if extended:
        return sorted(_BUILDERS)
    return sorted(n for n in _BUILDERS if not _BUILDERS[n]().extended)


def catalogue_system(name):
    """
    SystemSpec for a catalogue identifier.

    >>> spec = catalogue_system("lorenz63")
    >>> spec.params["sigma"], spec.default_config.tau
    (10.0, 9)
    """
    key = ALIASES.get(name, name)
    try:
        builder = _BUILDERS[key]
    except KeyError:
        raise UnknownSystemError(name, _BUILDERS) from None
    logger.debug("Building catalogue system %s" % key)
    return builder()
