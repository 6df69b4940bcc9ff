"""
Spectral action of the toy model, its closed form, and tools to explore it.

The potential is V(D') = -(f2/2 pi^2) L^2 Tr(D'^2) + (f0/8 pi^2) Tr(D'^4),
evaluated on fluctuated operators.  Because the fluctuation closes on the
field pair (x, v), V reduces to a polynomial in |x|^2 and |v|^2, which this
module exposes both through honest traces and through the closed form.

Minimization works on the real chart

    coords = (x, s1, s2)  ->  FieldPoint(x, 1 + s1, s2),

so the origin of the chart is the unfluctuated point.  The optimizer is a
plain two-phase scheme: Armijo gradient descent far from a critical point,
then a damped Newton iteration on finite-difference derivatives.  Nothing
fancy, but it drives the gradient norm to 1e-10 on this landscape, degenerate
flat directions included.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .matrix_core import adjoint, commutator, frob_norm
from .spectral_triple import FiniteSpectralTriple, anti_hermitian_basis, represent
from .toy_model import FieldPoint, ToyParams, assemble_dirac, build_toy, closed_dirac

__all__ = [
    "ActionParams",
    "CriticalPoint",
    "MinimizeResult",
    "ScanResult",
    "classify_point",
    "field_point",
    "grad_hess",
    "grid_scan",
    "minimize",
    "multi_start_minimize",
    "potential_fn",
    "sigma_grid",
    "sigma_valley_radius",
    "stabilizer_dim",
    "v_closed",
    "v_reduced",
    "v_trace",
    "vev_transform_check",
    "x_grid",
]

PI_SQ = math.pi ** 2


@dataclass(frozen=True)
class ActionParams:
    """Moments of the cutoff function and the cutoff scale; all positive."""

    f2: float = 1.0
    f0: float = 1.0
    lam: float = 1.0

    def __post_init__(self):
        for name in ("f2", "f0", "lam"):
            value = float(getattr(self, name))
            if value <= 0.0:
                raise ValueError(f"{name} must be positive")
            object.__setattr__(self, name, value)


def v_trace(tp: ToyParams, ap: ActionParams, fp: FieldPoint) -> float:
    """The potential from honest traces of the fluctuated operator."""
    d = closed_dirac(tp, fp)
    d2 = d @ d
    tr2 = np.trace(d2)
    if abs(tr2.imag) > 1e-12 * max(1.0, abs(tr2)):
        raise ArithmeticError("trace of D'^2 acquired an imaginary part")
    # D'^2 is hermitian, so Tr(D'^4) is its squared Frobenius norm.
    tr4 = float(np.linalg.norm(d2, "fro") ** 2)
    return float(
        -ap.f2 / (2.0 * PI_SQ) * ap.lam ** 2 * tr2.real + ap.f0 / (8.0 * PI_SQ) * tr4
    )


def v_reduced(tp: ToyParams, ap: ActionParams, x_sq, v_sq):
    """Closed form as a function of u = |x|^2 and s = |v|^2 (vectorizes)."""
    kx2 = abs(tp.k_x) ** 2
    ky2 = abs(tp.k_y) ** 2
    u = np.asarray(x_sq, dtype=float)
    s = np.asarray(v_sq, dtype=float)
    quad = 4.0 * kx2 * u + ky2 * s ** 2
    quart = 4.0 * kx2 ** 2 * u ** 2 + 4.0 * kx2 * ky2 * u * s ** 2 + ky2 ** 2 * s ** 4
    return -ap.f2 * ap.lam ** 2 / PI_SQ * quad + ap.f0 / (4.0 * PI_SQ) * quart


def v_closed(tp: ToyParams, ap: ActionParams, fp: FieldPoint) -> float:
    """The same potential evaluated without building any operator."""
    u = abs(fp.x) ** 2
    s = abs(fp.v1) ** 2 + abs(fp.v2) ** 2
    return float(v_reduced(tp, ap, u, s))


def field_point(coords) -> FieldPoint:
    """Chart (x, s1, s2) -> FieldPoint(x, 1 + s1, s2) on the real slice."""
    c = np.asarray(coords, dtype=float)
    if c.shape != (3,):
        raise ValueError("coords must be a real 3-vector")
    return FieldPoint(c[0], 1.0 + c[1], c[2])


def potential_fn(tp: ToyParams, ap: ActionParams):
    """The scalar objective on the real chart, backed by v_trace."""

    def fun(coords) -> float:
        return v_trace(tp, ap, field_point(coords))

    return fun


# ---------------------------------------------------------------------------
# Finite differences


def grad_hess(fun, point, step: float = 1e-5):
    """
    Central-difference gradient and Hessian of ``fun`` at ``point``.

    Per-coordinate steps are ``step * max(1, |x_i|)``; the Hessian uses the
    standard four-point stencil off the diagonal and is exactly symmetric.
    """
    x = np.asarray(point, dtype=float).copy()
    m = x.size
    h = np.array([step * max(1.0, abs(x[i])) for i in range(m)])
    f0 = fun(x)
    grad = np.zeros(m)
    hess = np.zeros((m, m))

    def at(**shifts):
        xp = x.copy()
        for idx, delta in shifts.items():
            xp[int(idx)] += delta
        return fun(xp)

    for i in range(m):
        fp = at(**{str(i): h[i]})
        fm = at(**{str(i): -h[i]})
        grad[i] = (fp - fm) / (2.0 * h[i])
        hess[i, i] = (fp - 2.0 * f0 + fm) / h[i] ** 2
    for i in range(m):
        for j in range(i + 1, m):
            fpp = at(**{str(i): h[i], str(j): h[j]})
            fpm = at(**{str(i): h[i], str(j): -h[j]})
            fmp = at(**{str(i): -h[i], str(j): h[j]})
            fmm = at(**{str(i): -h[i], str(j): -h[j]})
            hess[i, j] = hess[j, i] = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j])
    return grad, hess


def _fd_grad(fun, x, step):
    g = np.zeros(x.size)
    for i in range(x.size):
        h = step * max(1.0, abs(x[i]))
        xp = x.copy()
        xp[i] += h
        xm = x.copy()
        xm[i] -= h
        g[i] = (fun(xp) - fun(xm)) / (2.0 * h)
    return g


def _fd_hess(fun, x, step):
    _, hess = grad_hess(fun, x, step=step)
    return hess


# ---------------------------------------------------------------------------
# Minimization


@dataclass
class MinimizeResult:
    coords: np.ndarray
    value: float
    grad_norm: float
    converged: bool
    iterations: int


def minimize(
    fun,
    start,
    fixed: dict | None = None,
    grad=None,
    gate: float = 1e-10,
    max_iter: int = 100_000,
    fd_step: float = 3e-6,
) -> MinimizeResult:
    """
    Drive the gradient norm below ``gate`` from ``start``.

    ``fixed`` pins coordinates (index -> value) and optimizes the rest.
    Derivatives come from central differences with relative step ``fd_step``
    (chosen so that difference noise sits below the gate) unless an analytic
    ``grad`` callback is supplied.  Phase one is Armijo-backtracked gradient
    descent; once the gradient is small the iteration switches to a damped
    Newton method, and finishes with Newton polish steps while they still
    strictly decrease the value.
    """
    start = np.asarray(start, dtype=float).copy()
    fixed = dict(fixed) if fixed else {}
    for idx, val in fixed.items():
        start[int(idx)] = float(val)
    free = [i for i in range(start.size) if i not in {int(k) for k in fixed}]
    if not free:
        val = float(fun(start))
        return MinimizeResult(start, val, 0.0, True, 0)

    def embed(z):
        full = start.copy()
        full[free] = z
        return full

    def fv(z) -> float:
        return float(fun(embed(z)))

    if grad is None:
        def gv(z):
            return _fd_grad(fv, z, fd_step)
    else:
        def gv(z):
            return np.asarray(grad(embed(z)), dtype=float)[free]

    z = start[free].copy()
    fz = fv(z)
    iters = 0

    # Phase one: gradient descent with Armijo backtracking.
    while iters < max_iter:
        g = gv(z)
        ng = float(np.linalg.norm(g))
        if ng <= 1e-4:
            break
        t = 1.0
        while fv(z - t * g) > fz - 1e-4 * t * ng ** 2:
            t *= 0.5
            if t < 1e-16:
                break
        if t < 1e-16:
            break
        z = z - t * g
        fz = fv(z)
        iters += 1

    # Phase two: damped Newton on finite-difference derivatives.
    lam = 1e-3
    converged = False
    while iters < max_iter:
        g = gv(z)
        ng = float(np.linalg.norm(g))
        if ng <= gate:
            converged = True
            break
        hess = _fd_hess(fv, z, 1e-4)
        stalled = False
        while True:
            try:
                step_vec = np.linalg.solve(hess + lam * np.eye(len(free)), -g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            f_new = fv(z + step_vec)
            if f_new < fz:
                z = z + step_vec
                fz = f_new
                lam = max(lam / 10.0, 1e-12)
                break
            lam *= 10.0
            if lam > 1e12:
                stalled = True
                break
        iters += 1
        if stalled:
            converged = float(np.linalg.norm(gv(z))) <= gate
            break

    # Polish: plain Newton while it still strictly improves the value.
    if converged:
        for _ in range(10):
            g = gv(z)
            hess = _fd_hess(fv, z, 1e-4)
            try:
                step_vec = np.linalg.solve(hess + 1e-12 * np.eye(len(free)), -g)
            except np.linalg.LinAlgError:
                break
            f_new = fv(z + step_vec)
            if f_new < fz:
                z = z + step_vec
                fz = f_new
            else:
                break

    ng = float(np.linalg.norm(gv(z)))
    return MinimizeResult(embed(z), fz, ng, converged or ng <= gate, iters)


@dataclass
class CriticalPoint:
    coords: np.ndarray
    value: float
    grad_norm: float
    kind: str
    eigenvalues: np.ndarray
    hits: int = 1


def classify_point(fun, coords, step: float = 1e-4, degenerate_tol: float = 1e-6):
    """Label a critical point by its Hessian spectrum."""
    _, hess = grad_hess(fun, coords, step=step)
    eigs = np.linalg.eigvalsh(hess)
    scale = max(1.0, float(np.max(np.abs(eigs))))
    if np.any(np.abs(eigs) < degenerate_tol * scale):
        kind = "degenerate"
    elif np.all(eigs > 0):
        kind = "minimum"
    elif np.all(eigs < 0):
        kind = "maximum"
    else:
        kind = "saddle"
    return kind, eigs


def multi_start_minimize(
    fun,
    n_starts: int = 32,
    seed: int = 0,
    box: float = 2.5,
    fixed: dict | None = None,
    merge_tol: float = 1e-5,
    gate: float = 1e-10,
) -> list:
    """
    Seeded multistart: start i draws from default_rng(seed + i) uniformly in
    [-box, box]^3, converged results are merged by coordinate distance and
    classified.  Returns CriticalPoint entries sorted by value.
    """
    found: list[CriticalPoint] = []
    for i in range(n_starts):
        rng = np.random.default_rng(seed + i)
        start = rng.uniform(-box, box, size=3)
        res = minimize(fun, start, fixed=fixed, gate=gate)
        if not res.converged:
            continue
        merged = False
        for cp in found:
            if np.linalg.norm(cp.coords - res.coords) <= merge_tol:
                cp.hits += 1
                if res.value < cp.value:
                    cp.coords = res.coords
                    cp.value = res.value
                    cp.grad_norm = res.grad_norm
                merged = True
                break
        if not merged:
            kind, eigs = classify_point(fun, res.coords)
            found.append(
                CriticalPoint(res.coords, res.value, res.grad_norm, kind, eigs)
            )
    found.sort(key=lambda cp: cp.value)
    return found


# ---------------------------------------------------------------------------
# Symmetry diagnostics


def stabilizer_dim(t: FiniteSpectralTriple, d_op, spec=None) -> int:
    """
    Real dimension of the unitary-gauge stabilizer of an operator: the
    anti-hermitian X in the algebra with [pi(X) + hat(pi(X)), d_op] = 0.
    """
    spec = spec if spec is not None else t.algebra
    basis = anti_hermitian_basis(spec)
    cols = []
    for xe in basis:
        k = commutator(represent(t, xe) + t.hat(represent(t, xe)), np.asarray(d_op, dtype=complex))
        cols.append(np.concatenate([k.ravel().real, k.ravel().imag]))
    mat = np.column_stack(cols)
    svals = np.linalg.svd(mat, compute_uv=False)
    smax = float(svals.max(initial=0.0))
    if smax == 0.0:
        return len(basis)
    return int(np.sum(svals < 1e-8 * smax))


def vev_transform_check(tp: ToyParams, fp: FieldPoint, u, tol: float = 1e-9) -> float:
    """
    Residual of the covariance law for a unitary u = (diag(r, l), m) of the
    even subalgebra: conjugating the fluctuated operator by pi(u) hat(pi(u))
    lands on the field point (r conj(l) x, conj(r) m v).
    """
    t = build_toy(tp)
    uu = (u * u.star()).vec()
    unit = t.algebra.unit().vec()
    if np.linalg.norm(uu - unit) > tol * max(1.0, float(np.linalg.norm(unit))):
        raise ValueError("element is not unitary")
    pu = represent(t, u)
    big = pu @ t.hat(pu)
    lhs = big @ closed_dirac(tp, fp) @ adjoint(big)
    lam_r = u.blocks[0][0, 0]
    lam_l = u.blocks[0][1, 1]
    m = u.blocks[1]
    x_new = lam_r * np.conj(lam_l) * fp.x
    v_new = np.conj(lam_r) * (m @ fp.v)
    rhs = assemble_dirac(tp.k_x * x_new, tp.k_y * np.outer(v_new, v_new))
    return frob_norm(lhs - rhs) / max(1.0, frob_norm(rhs))


# ---------------------------------------------------------------------------
# Scans


@dataclass
class ScanResult:
    value: float
    x_sq: float
    v_sq: float


def grid_scan(
    tp: ToyParams,
    ap: ActionParams,
    n: int = 4001,
    x_sq_max: float = 4.0,
    v_sq_max: float = 4.0,
    chunk: int = 256,
) -> ScanResult:
    """Running minimum of the reduced potential over an n x n grid."""
    us = np.linspace(0.0, x_sq_max, n)
    ss = np.linspace(0.0, v_sq_max, n)
    best = math.inf
    best_u = 0.0
    best_s = 0.0
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        block = v_reduced(tp, ap, us[lo:hi][:, None], ss[None, :])
        idx = np.unravel_index(np.argmin(block), block.shape)
        if block[idx] < best:
            best = float(block[idx])
            best_u = float(us[lo + idx[0]])
            best_s = float(ss[idx[1]])
    return ScanResult(best, best_u, best_s)


def sigma_grid(tp: ToyParams, ap: ActionParams, n: int = 201, lim: float = 3.0):
    """
    Potential at x = 0 over a real (s1, s2) grid; the fields there are
    v = (1 + s1, s2).  Returns (s1 axis, s2 axis, V matrix).
    """
    s1 = np.linspace(-lim, lim, n)
    s2 = np.linspace(-lim, lim, n)
    v_sq = (1.0 + s1[:, None]) ** 2 + s2[None, :] ** 2
    values = v_reduced(tp, ap, np.zeros_like(v_sq), v_sq)
    return s1, s2, values


def sigma_valley_radius(tp: ToyParams, ap: ActionParams) -> float:
    """|v|^2 minimizing the potential on the x = 0 slice (0 when k_y = 0)."""
    ky2 = abs(tp.k_y) ** 2
    if ky2 == 0.0:
        return 0.0
    return math.sqrt(2.0 * ap.f2 * ap.lam ** 2 / (ap.f0 * ky2))


def x_grid(tp: ToyParams, ap: ActionParams, n: int = 201, lim: float = 2.5):
    """
    Potential over complex x = a + ib with v pinned on the sigma valley at
    (sqrt(w), 0), w the valley radius.  Returns (Re axis, Im axis, V matrix).
    """
    re = np.linspace(-lim, lim, n)
    im = np.linspace(-lim, lim, n)
    x_sq = re[:, None] ** 2 + im[None, :] ** 2
    v_sq = np.full_like(x_sq, sigma_valley_radius(tp, ap))
    values = v_reduced(tp, ap, x_sq, v_sq)
    return re, im, values
