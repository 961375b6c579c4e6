"""Self-contained suite of the 24 noiseless BBOB-style benchmark functions.

Instances are seeded transformations (translation, rotation, target offset) of
the core function definitions.  They are regenerated from a seed derived from
(function_id, instance_id, dimension), so two processes always agree bit for
bit.  The suite is deliberately *not* COCO-compatible: a few definitions whose
published optimum sits on the domain boundary or is only implicit are adapted
so that ``evaluate(x_opt) == f_opt`` holds for every function, which makes the
global-optimality invariant uniformly testable.

Search domain is [-5, 5]^d.  Evaluation outside the box is permitted; the
standard boundary penalties only activate there.
"""

from dataclasses import dataclass, field

import numpy as np

from .util import InvalidArgumentError, derive_seed

N_FUNCTIONS = 24
LOWER, UPPER = -5.0, 5.0

FUNCTION_NAMES = {
    1: "sphere",
    2: "ellipsoid_separable",
    3: "rastrigin_separable",
    4: "bueche_rastrigin",
    5: "linear_slope",
    6: "attractive_sector",
    7: "step_ellipsoid",
    8: "rosenbrock",
    9: "rosenbrock_rotated",
    10: "ellipsoid",
    11: "discus",
    12: "bent_cigar",
    13: "sharp_ridge",
    14: "different_powers",
    15: "rastrigin",
    16: "weierstrass",
    17: "schaffers_f7",
    18: "schaffers_f7_ill",
    19: "griewank_rosenbrock",
    20: "schwefel",
    21: "gallagher_101",
    22: "gallagher_21",
    23: "katsuura",
    24: "lunacek_bi_rastrigin",
}


@dataclass(frozen=True)
class ProblemInstance:
    """One parameterized benchmark problem.

    Immutable after construction; all derived arrays live in `extras` and are
    recomputed from `seed`, never serialized.
    """

    function_id: int
    instance_id: int
    dimension: int
    seed: int
    x_opt: np.ndarray
    f_opt: float
    rotation_r: np.ndarray
    rotation_q: np.ndarray
    extras: dict = field(repr=False)

    @property
    def name(self) -> str:
        return FUNCTION_NAMES[self.function_id]


def _gram_schmidt(rng: np.random.Generator, d: int) -> np.ndarray:
    """Orthogonal matrix from modified Gram-Schmidt on a seeded normal draw."""
    a = rng.standard_normal((d, d))
    for i in range(d):
        for j in range(i):
            a[i] -= np.dot(a[i], a[j]) * a[j]
        a[i] /= np.linalg.norm(a[i])
    return a


def _j_frac(d: int) -> np.ndarray:
    # 0-based index fraction i/(d-1); suite requires d >= 2
    return np.arange(d) / (d - 1)


def _lam(alpha: float, d: int) -> np.ndarray:
    """Diagonal of the conditioning matrix Lambda^alpha."""
    return alpha ** (0.5 * _j_frac(d))


def _t_osz(x: np.ndarray) -> np.ndarray:
    """Oscillation transform, elementwise, zero-preserving."""
    ax = np.abs(x)
    with np.errstate(divide="ignore"):
        xhat = np.where(x != 0.0, np.log(np.where(ax > 0, ax, 1.0)), 0.0)
    c1 = np.where(x > 0.0, 10.0, 5.5)
    c2 = np.where(x > 0.0, 7.9, 3.1)
    return np.sign(x) * np.exp(xhat + 0.049 * (np.sin(c1 * xhat) + np.sin(c2 * xhat)))


def _t_asy(x: np.ndarray, beta: float) -> np.ndarray:
    """Asymmetry transform applied row-wise to an (m, d) batch."""
    d = x.shape[-1]
    expo = 1.0 + beta * _j_frac(d) * np.sqrt(np.where(x > 0.0, x, 0.0))
    return np.where(x > 0.0, np.where(x > 0.0, x, 1.0) ** expo, x)


def _f_pen(x: np.ndarray) -> np.ndarray:
    out = np.abs(x) - 5.0
    return np.sum(np.square(np.where(out > 0.0, out, 0.0)), axis=-1)


def make_instance(function_id: int, instance_id: int, dimension: int = 10) -> ProblemInstance:
    """Build a fully parameterized instance, deterministic in its arguments."""
    if not 1 <= function_id <= N_FUNCTIONS:
        raise InvalidArgumentError(f"function_id must be in 1..24, got {function_id}")
    if instance_id < 1:
        raise InvalidArgumentError(f"instance_id must be >= 1, got {instance_id}")
    if dimension < 2:
        raise InvalidArgumentError(f"dimension must be >= 2, got {dimension}")

    seed = derive_seed("bbob", function_id, instance_id, dimension)
    rng = np.random.Generator(np.random.PCG64(seed))
    d = dimension

    # Fixed draw order: x_opt, f_opt, R, Q, then function-specific extras.
    x_raw = rng.uniform(-4.0, 4.0, d)
    f_opt = float(np.clip(np.round(rng.standard_cauchy(), 2), -1000.0, 1000.0))
    rot_r = _gram_schmidt(rng, d)
    rot_q = _gram_schmidt(rng, d)

    signs = np.where(x_raw >= 0.0, 1.0, -1.0)
    if function_id == 8:
        x_opt = 0.75 * x_raw  # keep the Rosenbrock basin well inside the box
    elif function_id == 20:
        x_opt = signs * (4.2096874633 / 2.0)
    elif function_id == 22:
        x_opt = 0.98 * x_raw
    elif function_id == 24:
        x_opt = signs * 1.25
    else:
        x_opt = x_raw

    extras = {}
    if function_id in (21, 22):
        n_peaks = 101 if function_id == 21 else 21
        alpha0 = 1000.0 if function_id == 21 else 1000.0 ** 2
        lo, hi = (-5.0, 5.0) if function_id == 21 else (-4.9, 4.9)
        alpha_rest = 1000.0 ** (2.0 * np.arange(n_peaks - 1) / (n_peaks - 2))
        alphas = np.concatenate(([alpha0], rng.permutation(alpha_rest)))
        cdiag = np.empty((n_peaks, d))
        for k in range(n_peaks):
            diag = _lam(alphas[k], d) / alphas[k] ** 0.25
            cdiag[k] = diag[rng.permutation(d)]
        peaks = np.empty((n_peaks, d))
        peaks[0] = x_opt
        peaks[1:] = rng.uniform(lo, hi, (n_peaks - 1, d))
        w = np.empty(n_peaks)
        w[0] = 10.0
        w[1:] = 1.1 + 8.0 * np.arange(n_peaks - 1) / (n_peaks - 2)
        extras["peaks_rot"] = peaks @ rot_r.T  # row k = R @ peak_k
        extras["peak_cond"] = cdiag
        extras["peak_height"] = w

    inst = ProblemInstance(
        function_id=function_id,
        instance_id=instance_id,
        dimension=dimension,
        seed=seed,
        x_opt=x_opt,
        f_opt=f_opt,
        rotation_r=rot_r,
        rotation_q=rot_q,
        extras=extras,
    )
    for arr in (x_opt, rot_r, rot_q):
        arr.setflags(write=False)
    return inst


def list_suite(instances_per_function: int, dimension: int = 10) -> list:
    """All 24 functions x requested instances, (function_id, instance_id) ordered."""
    if instances_per_function < 1:
        raise InvalidArgumentError("instances_per_function must be >= 1")
    return [
        make_instance(fid, iid, dimension)
        for fid in range(1, N_FUNCTIONS + 1)
        for iid in range(1, instances_per_function + 1)
    ]


def descriptor(inst: ProblemInstance) -> dict:
    """JSON-serializable identity; transformations re-derive from the seed."""
    return {
        "function_id": inst.function_id,
        "instance_id": inst.instance_id,
        "dimension": inst.dimension,
        "seed": inst.seed,
    }


def instance_from_descriptor(doc: dict) -> ProblemInstance:
    inst = make_instance(doc["function_id"], doc["instance_id"], doc["dimension"])
    if inst.seed != doc["seed"]:
        raise InvalidArgumentError("descriptor seed does not match derivation")
    return inst


# ---------------------------------------------------------------------------
# Core definitions.  Each _f* maps an (m, d) batch to (m,) values that are 0 at
# z = 0 (i.e. at x_opt); evaluate() adds f_opt and any boundary penalty.
# ---------------------------------------------------------------------------

def _f1_sphere(inst, x):
    z = x - inst.x_opt
    return np.sum(z * z, axis=-1)


def _f2_ellipsoid_sep(inst, x):
    z = _t_osz(x - inst.x_opt)
    return np.sum(10.0 ** (6.0 * _j_frac(inst.dimension)) * z * z, axis=-1)


def _rastrigin_core(z):
    d = z.shape[-1]
    return 10.0 * (d - np.sum(np.cos(2.0 * np.pi * z), axis=-1)) + np.sum(z * z, axis=-1)


def _f3_rastrigin_sep(inst, x):
    z = _lam(10.0, inst.dimension) * _t_asy(_t_osz(x - inst.x_opt), 0.2)
    return _rastrigin_core(z)


def _f4_bueche(inst, x):
    d = inst.dimension
    z = _t_osz(x - inst.x_opt)
    s = 10.0 ** (0.5 * _j_frac(d))
    odd = (np.arange(d) % 2) == 0  # 1-based odd coordinates
    s = np.where(odd & (z > 0.0), 10.0 * s, s)
    return _rastrigin_core(s * z)


def _f5_linear_slope(inst, x):
    # Adapted: weighted L1 cone so the optimum stays interior to the box.
    s = 10.0 ** _j_frac(inst.dimension)
    return np.sum(s * np.abs(x - inst.x_opt), axis=-1)


def _f6_attractive_sector(inst, x):
    z = (x - inst.x_opt) @ inst.rotation_r.T
    z = (_lam(10.0, inst.dimension) * z) @ inst.rotation_q.T
    s = np.where(z * inst.x_opt > 0.0, 100.0, 1.0)
    total = np.sum(np.square(s * z), axis=-1)
    return _t_osz(total) ** 0.9


def _f7_step_ellipsoid(inst, x):
    d = inst.dimension
    zhat = (_lam(10.0, d) * ((x - inst.x_opt) @ inst.rotation_r.T))
    ztilde = np.where(
        np.abs(zhat) > 0.5, np.floor(0.5 + zhat), np.floor(0.5 + 10.0 * zhat) / 10.0
    )
    z = ztilde @ inst.rotation_q.T
    body = np.sum(10.0 ** (2.0 * _j_frac(d)) * z * z, axis=-1)
    return 0.1 * np.maximum(np.abs(zhat[..., 0]) / 1e4, body)


def _rosen_core(z):
    zi, zn = z[..., :-1], z[..., 1:]
    return np.sum(100.0 * np.square(zi * zi - zn) + np.square(zi - 1.0), axis=-1)


def _f8_rosenbrock(inst, x):
    c = max(1.0, np.sqrt(inst.dimension) / 8.0)
    return _rosen_core(c * (x - inst.x_opt) + 1.0)


def _f9_rosenbrock_rot(inst, x):
    # Adapted: rotate about x_opt instead of the implicit COCO shift.
    c = max(1.0, np.sqrt(inst.dimension) / 8.0)
    return _rosen_core(c * ((x - inst.x_opt) @ inst.rotation_r.T) + 1.0)


def _f10_ellipsoid(inst, x):
    z = _t_osz((x - inst.x_opt) @ inst.rotation_r.T)
    return np.sum(10.0 ** (6.0 * _j_frac(inst.dimension)) * z * z, axis=-1)


def _f11_discus(inst, x):
    z = _t_osz((x - inst.x_opt) @ inst.rotation_r.T)
    return 1e6 * z[..., 0] ** 2 + np.sum(z[..., 1:] ** 2, axis=-1)


def _f12_bent_cigar(inst, x):
    z = _t_asy((x - inst.x_opt) @ inst.rotation_r.T, 0.5) @ inst.rotation_r.T
    return z[..., 0] ** 2 + 1e6 * np.sum(z[..., 1:] ** 2, axis=-1)


def _f13_sharp_ridge(inst, x):
    z = (x - inst.x_opt) @ inst.rotation_r.T
    z = (_lam(10.0, inst.dimension) * z) @ inst.rotation_q.T
    return z[..., 0] ** 2 + 100.0 * np.sqrt(np.sum(z[..., 1:] ** 2, axis=-1))


def _f14_different_powers(inst, x):
    z = (x - inst.x_opt) @ inst.rotation_r.T
    expo = 2.0 + 4.0 * _j_frac(inst.dimension)
    return np.sqrt(np.sum(np.abs(z) ** expo, axis=-1))


def _f15_rastrigin(inst, x):
    d = inst.dimension
    z = _t_asy(_t_osz((x - inst.x_opt) @ inst.rotation_r.T), 0.2) @ inst.rotation_q.T
    z = (_lam(10.0, d) * z) @ inst.rotation_r.T
    return _rastrigin_core(z)


_WEIER_K = np.arange(12)
_WEIER_HALF = 0.5 ** _WEIER_K
_WEIER_THREE = 3.0 ** _WEIER_K
_WEIER_F0 = float(np.sum(_WEIER_HALF * np.cos(np.pi * _WEIER_THREE)))


def _f16_weierstrass(inst, x):
    d = inst.dimension
    z = _t_osz((x - inst.x_opt) @ inst.rotation_r.T) @ inst.rotation_q.T
    z = (_lam(0.01, d) * z) @ inst.rotation_r.T
    terms = _WEIER_HALF * np.cos(2.0 * np.pi * _WEIER_THREE * (z[..., None] + 0.5))
    out = np.sum(terms, axis=(-1, -2))
    return 10.0 * (out / d - _WEIER_F0) ** 3


def _schaffers_core(z, d):
    zi, zn = z[..., :-1], z[..., 1:]
    s = np.sqrt(zi * zi + zn * zn)
    rs = np.sqrt(s)
    total = np.sum(rs + rs * np.sin(50.0 * s ** 0.2) ** 2, axis=-1)
    return (total / (d - 1.0)) ** 2


def _f17_schaffers(inst, x):
    d = inst.dimension
    z = _t_asy((x - inst.x_opt) @ inst.rotation_r.T, 0.5) @ inst.rotation_q.T
    return _schaffers_core(_lam(10.0, d) * z, d)


def _f18_schaffers_ill(inst, x):
    d = inst.dimension
    z = _t_asy((x - inst.x_opt) @ inst.rotation_r.T, 0.5) @ inst.rotation_q.T
    return _schaffers_core(_lam(1000.0, d) * z, d)


def _f19_griewank_rosen(inst, x):
    # Adapted: explicit optimum at x_opt (z = 1 there).
    d = inst.dimension
    c = max(1.0, np.sqrt(d) / 8.0)
    z = c * ((x - inst.x_opt) @ inst.rotation_r.T) + 1.0
    zi, zn = z[..., :-1], z[..., 1:]
    s = 100.0 * np.square(zi * zi - zn) + np.square(zi - 1.0)
    return 10.0 * np.sum(s / 4000.0 - np.cos(s), axis=-1) / (d - 1.0) + 10.0


def _f20_schwefel(inst, x):
    d = inst.dimension
    signs = np.where(inst.x_opt >= 0.0, 1.0, -1.0)
    xhat = 2.0 * signs * x
    two_abs = 2.0 * np.abs(inst.x_opt)
    zhat = np.empty_like(xhat)
    zhat[..., 0] = xhat[..., 0]
    zhat[..., 1:] = xhat[..., 1:] + 0.25 * (xhat[..., :-1] - two_abs[:-1])
    z = 100.0 * (_lam(10.0, d) * (zhat - two_abs) + two_abs)
    body = np.sum(z * np.sin(np.sqrt(np.abs(z))), axis=-1)
    return -body / (100.0 * d) + 4.189828872724339 + 100.0 * _f_pen(z / 100.0)


def _gallagher(inst, x):
    d = inst.dimension
    xr = x @ inst.rotation_r.T
    u = xr[..., None, :] - inst.extras["peaks_rot"]  # (m, K, d)
    quad = np.sum(inst.extras["peak_cond"] * u * u, axis=-1)
    vals = inst.extras["peak_height"] * np.exp(-quad / (2.0 * d))
    return np.square(_t_osz(10.0 - np.max(vals, axis=-1)))


_KATS_J = 2.0 ** np.arange(1, 33)


def _f23_katsuura(inst, x):
    d = inst.dimension
    z = (x - inst.x_opt) @ inst.rotation_r.T
    z = (_lam(100.0, d) * z) @ inst.rotation_q.T
    zj = z[..., None] * _KATS_J
    s = np.sum(np.abs(zj - np.round(zj)) / _KATS_J, axis=-1)
    prod = np.prod(1.0 + np.arange(1, d + 1) * s, axis=-1)
    return (10.0 / d ** 2) * (prod ** (10.0 / d ** 1.2) - 1.0)


def _f24_lunacek(inst, x):
    d = inst.dimension
    mu0 = 2.5
    s = 1.0 - 1.0 / (2.0 * np.sqrt(d + 20.0) - 8.2)
    mu1 = -np.sqrt((mu0 ** 2 - 1.0) / s)
    signs = np.where(inst.x_opt >= 0.0, 1.0, -1.0)
    xhat = 2.0 * signs * x
    z = ((xhat - mu0) @ inst.rotation_r.T)
    z = (_lam(100.0, d) * z) @ inst.rotation_q.T
    s1 = np.sum(np.square(xhat - mu0), axis=-1)
    s2 = np.sum(np.square(xhat - mu1), axis=-1)
    s3 = np.sum(np.cos(2.0 * np.pi * z), axis=-1)
    return np.minimum(s1, 1.0 * d + s * s2) + 10.0 * (d - s3)


_CORE = {
    1: _f1_sphere,
    2: _f2_ellipsoid_sep,
    3: _f3_rastrigin_sep,
    4: _f4_bueche,
    5: _f5_linear_slope,
    6: _f6_attractive_sector,
    7: _f7_step_ellipsoid,
    8: _f8_rosenbrock,
    9: _f9_rosenbrock_rot,
    10: _f10_ellipsoid,
    11: _f11_discus,
    12: _f12_bent_cigar,
    13: _f13_sharp_ridge,
    14: _f14_different_powers,
    15: _f15_rastrigin,
    16: _f16_weierstrass,
    17: _f17_schaffers,
    18: _f18_schaffers_ill,
    19: _f19_griewank_rosen,
    20: _f20_schwefel,
    21: _gallagher,
    22: _gallagher,
    23: _f23_katsuura,
    24: _f24_lunacek,
}

# multiplier of the standard boundary penalty added outside the box
_PENALTY = {4: 100.0, 7: 1.0, 17: 10.0, 18: 10.0, 21: 1.0, 22: 1.0, 23: 1.0, 24: 1e4}


def evaluate_batch(inst: ProblemInstance, x: np.ndarray) -> np.ndarray:
    """Evaluate an (m, d) batch of points; returns (m,) objective values."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[-1] != inst.dimension:
        raise InvalidArgumentError(
            f"point dimension {x.shape[-1]} != instance dimension {inst.dimension}"
        )
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError("non-finite coordinates")
    vals = _CORE[inst.function_id](inst, x)
    pen = _PENALTY.get(inst.function_id)
    if pen is not None:
        vals = vals + pen * _f_pen(x)
    elif inst.function_id == 16:
        vals = vals + (10.0 / inst.dimension) * _f_pen(x)
    return vals + inst.f_opt


def evaluate(inst: ProblemInstance, x) -> float:
    """Objective value at a single point."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise InvalidArgumentError("evaluate expects a single point; use evaluate_batch")
    return float(evaluate_batch(inst, x)[0])
