"""Eigenvalues bifurcating from the edge of the essential spectrum.

The eigenvalue problem is U' + (K + eps*Kt_xi) * U - lambda B U = 0 with
a localized perturbation Kt_xi = V(xi) * P (P a matrix Dirac factor or a
convolution kernel).  When the dispersion function

    d(nu, lambda) = det(nu I + K_hat(nu) - lambda B)

is diffusive at the origin (double root in nu, opposite-sign curvature
against the lambda slope), a small localized perturbation pushes a
simple eigenvalue out of the edge at the quadratic rate
lambda_*(eps) / eps^2 -> M^2, with M computable from the kernel data.

The eigenfunction is sought with far fields carried analytically,

    U = a_+ e_+(g) chi_+ exp(nu_+(g) x) + a_- e_-(g) chi_- exp(nu_-(g) x) + w,

g^2 = lambda, so the slowly decaying modes never meet the grid
truncation; only the fast-decaying remainder w lives on the window.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .charmatrix import axis_cutoff, char_eval, delta_eval
from .errors import (CompatibilityViolated, GenericityViolated,
                     NewtonDiverged, RankMismatch)
from .griddisc import Grid, weight_exponent
from .symbols import ShiftTerm, Symbol

__all__ = [
    "EdgeModel", "EdgeData", "EdgeEigenvalue", "diffusive_check",
    "edge_vectors", "edge_constant", "edge_eigenvalue", "edge_scaling",
    "smooth_ramp",
]


@dataclass
class EdgeModel:
    """Eigenvalue-problem data in the convolution-plus-Dirac form.

    `kernel` and `dirac` describe the unperturbed part in the convention
    U' + K*U + dirac U - lambda B U = 0 (K may be None).  The
    perturbation acts as eps * V(xi) * (P U) for a matrix P, or
    eps * V(xi) * (pert_kernel * U) for a kernel.
    """

    n: int
    B: np.ndarray
    kernel: object = None              # KernelSpec, paper-sign convention
    dirac: np.ndarray | None = None    # constant Dirac matrix C
    V: object = None                   # callable xi -> scalar (vectorized)
    P: np.ndarray | None = None        # Dirac matrix factor of the perturbation
    pert_kernel: object = None
    decay_delta: float = 1.0
    eta: float = 0.5                   # strip used for root searches
    weight_eta: float = 0.5            # decay rate enforced on the remainder

    def __post_init__(self):
        self.B = np.atleast_2d(np.asarray(self.B, dtype=float))
        if self.dirac is not None:
            self.dirac = np.atleast_2d(np.asarray(self.dirac, dtype=float))
        if self.P is not None:
            self.P = np.atleast_2d(np.asarray(self.P, dtype=float))

    def symbol_at(self, lam):
        """Constant-coefficient symbol of the unperturbed operator."""
        A1 = lam * self.B
        if self.dirac is not None:
            A1 = A1 - self.dirac
        kernel = None if self.kernel is None else self.kernel.scaled(-1.0)
        return Symbol(self.n, kernel, (ShiftTerm(0.0, A1),), self.eta)

    def khat_p(self, nu, order=0):
        """Transform of the full unperturbed kernel, paper convention."""
        nu = np.asarray(nu, dtype=complex)
        out = np.zeros(nu.shape + (self.n, self.n), dtype=complex)
        if self.kernel is not None:
            out = out + self.kernel.transform(nu, order)
        if self.dirac is not None and order == 0:
            out = out + self.dirac
        return out

    def pert_transform0(self):
        if self.P is not None:
            return self.P.astype(complex)
        return self.pert_kernel.transform(0.0)

    def V_integral(self):
        val, _ = quad(lambda x: float(self.V(np.array([x]))[0]),
                      -np.inf, np.inf, epsabs=1e-12, epsrel=1e-12)
        return val


def _adjugate(A):
    n = A.shape[0]
    if n == 1:
        return np.ones((1, 1), dtype=A.dtype)
    adj = np.empty_like(A)
    rows = np.arange(n)
    for i in range(n):
        for j in range(n):
            minor = np.delete(np.delete(A, i, axis=0), j, axis=1)
            adj[j, i] = (-1) ** (i + j) * np.linalg.det(minor)
    return adj


def _dispersion(model, nu, lam):
    return complex(np.linalg.det(
        nu * np.eye(model.n) + model.khat_p(np.asarray(nu))[()] - lam * model.B))


@dataclass
class DiffusiveReport:
    d00: complex
    d_nu: complex
    d_nunu: complex
    d_lambda: complex
    away_margin: float
    diffusive: bool
    failures: list[str]


def diffusive_check(model, tol=1e-10):
    """Verify the three edge conditions on the dispersion function.

    The nu-derivatives at the origin come from a contour integral of the
    analytic map nu -> d(nu, 0); the lambda slope uses the adjugate, so
    it stays exact at the singular matrix.  Condition three scans the
    axis away from a 1e-3 neighborhood of zero.  Reporting only.
    """
    radius = min(0.25, 0.5 * model.eta)
    k = 64
    theta = 2 * np.pi * np.arange(k) / k
    z = radius * np.exp(1j * theta)
    dz = np.array([_dispersion(model, zz, 0.0) for zz in z])
    d00 = np.mean(dz)
    d_nu = np.mean(dz * np.exp(-1j * theta)) / radius
    d_nunu = 2.0 * np.mean(dz * np.exp(-2j * theta)) / radius ** 2

    Delta0 = model.khat_p(np.array(0.0 + 0j))[()] + 0.0 * np.eye(model.n)
    d_lambda = complex(-np.trace(_adjugate(Delta0) @ model.B))

    sym0 = model.symbol_at(0.0)
    cap = axis_cutoff(sym0)
    ells = np.concatenate([np.linspace(1e-3, cap, 2001),
                           -np.linspace(1e-3, cap, 2001)])
    dvals = np.abs(np.linalg.det(delta_eval(sym0, 1j * ells)))
    away_margin = float(dvals.min())

    failures = []
    if abs(d00) > tol:
        failures.append(f"|d(0,0)| = {abs(d00):.2e}")
    if abs(d_nu) > tol:
        failures.append(f"|d_nu(0,0)| = {abs(d_nu):.2e}")
    if not (np.real(d_nunu) * np.real(d_lambda) < 0):
        failures.append("curvature-slope product is not negative")
    if away_margin <= tol:
        failures.append("axis root away from the origin")
    return DiffusiveReport(d00=complex(d00), d_nu=complex(d_nu),
                           d_nunu=complex(d_nunu), d_lambda=d_lambda,
                           away_margin=away_margin,
                           diffusive=not failures, failures=failures)


@dataclass
class EdgeData:
    e0: np.ndarray
    e0_star: np.ndarray
    e1: np.ndarray
    e1_star: np.ndarray
    d_lambda: float
    d_nunu: float
    slope: float                      # s = sqrt(-2 d_lambda / d_nunu)
    report: DiffusiveReport


def edge_vectors(model, rank_gap=1e6):
    """Kernel vectors of K_hat(0) and the first-order correctors.

    e0 and e0* span ker K_hat(0) and ker K_hat(0)^T (one-dimensional up
    to the declared SVD gap); e1 and e1* are the minimum-norm solutions
    of the corrector equations.  All compatibility identities are
    verified to 1e-10.
    """
    rep = diffusive_check(model)
    if not rep.diffusive:
        raise CompatibilityViolated(
            "dispersion is not diffusive: " + "; ".join(rep.failures))
    K0 = np.real(model.khat_p(np.array(0.0 + 0j))[()])
    K1 = np.real(model.khat_p(np.array(0.0 + 0j), 1)[()])
    K2 = np.real(model.khat_p(np.array(0.0 + 0j), 2)[()])
    n = model.n
    if n == 1:
        if abs(K0[0, 0]) > 1e-10:
            raise RankMismatch("scalar K_hat(0) does not vanish")
        e0 = np.array([1.0])
        e0s = np.array([1.0])
    else:
        U, svals, Vh = np.linalg.svd(K0)
        if svals[-2] < rank_gap * max(svals[-1], 1e-300):
            raise RankMismatch(
                f"kernel of K_hat(0) is not cleanly one-dimensional "
                f"(svals {svals})")
        e0 = Vh[-1]
        e0s = U[:, -1]
        if e0[np.argmax(np.abs(e0))] < 0:
            e0 = -e0
        if e0s[np.argmax(np.abs(e0s))] < 0:
            e0s = -e0s

    I = np.eye(n)
    c1 = float(e0s @ ((I + K1) @ e0))
    if abs(c1) > 1e-10:
        raise CompatibilityViolated(
            f"first compatibility pairing is {c1:.2e}")
    e1 = np.linalg.lstsq(K0, -(I + K1) @ e0, rcond=None)[0]
    e1s = np.linalg.lstsq(K0.T, (I + K1.T) @ e0s, rcond=None)[0]
    lhs = float(e0s @ ((I + K1) @ e1))
    rhs = -float(e1s @ ((I + K1) @ e0))
    if abs(lhs - rhs) > 1e-8 * (1 + abs(lhs)):
        raise CompatibilityViolated(
            f"corrector identity violated: {lhs:.3e} vs {rhs:.3e}")
    nondeg = lhs + 0.5 * float(e0s @ (K2 @ e0))
    if abs(nondeg) < 1e-10:
        raise CompatibilityViolated("nondegeneracy pairing vanishes")
    d_l = float(np.real(rep.d_lambda))
    d_nn = float(np.real(rep.d_nunu))
    slope = float(np.sqrt(-2.0 * d_l / d_nn))
    return EdgeData(e0=e0, e0_star=e0s, e1=e1, e1_star=e1s,
                    d_lambda=d_l, d_nunu=d_nn, slope=slope, report=rep)


def edge_constant(model, data=None):
    """Generic constant M controlling lambda_*(eps) ~ (M eps)^2.

    Numerator: the L2 pairing of the perturbation against e0, e0*, which
    for a separable perturbation is (integral of V) times a matrix
    pairing.  Denominator: the corrector pairing; its vanishing means
    the perturbation is non-generic.
    """
    data = data or edge_vectors(model)
    K1 = np.real(model.khat_p(np.array(0.0 + 0j), 1)[()])
    K2 = np.real(model.khat_p(np.array(0.0 + 0j), 2)[()])
    I = np.eye(model.n)
    denom = float(data.e0_star @ ((2.0 * (I + K1)) @ data.e1 + K2 @ data.e0))
    if abs(denom) < 1e-10:
        raise GenericityViolated("corrector pairing vanishes")
    P0 = np.real(model.pert_transform0())
    numer = model.V_integral() * float(data.e0_star @ (P0 @ data.e0))
    M = numer / denom * np.sqrt(-data.d_nunu / (2.0 * data.d_lambda))
    return float(M)


def smooth_ramp(xi):
    """Odd C-infinity ramp equal to -+1 for |xi| >= 1, tanh-shaped inside.

    Returns (rho, rho').  The clamp blends tanh(2 xi) into the constant
    branches over |xi| in [0.8, 1], keeping both values and derivatives
    smooth; the precise shape only affects the solver through terms that
    vanish to the tested order.
    """
    xi = np.asarray(xi, dtype=float)
    t = np.tanh(2.0 * xi)
    dt = 2.0 / np.cosh(2.0 * xi) ** 2
    s = np.sign(xi)
    u = np.clip((np.abs(xi) - 0.8) / 0.2, 0.0, 1.0)

    def f(v):
        with np.errstate(divide="ignore", over="ignore"):
            out = np.where(v > 0, np.exp(-1.0 / np.maximum(v, 1e-300)), 0.0)
        return out

    fu, fv = f(u), f(1.0 - u)
    m = fu / (fu + fv)
    with np.errstate(divide="ignore", invalid="ignore"):
        dm = np.where((u > 0) & (u < 1),
                      fu * fv * (1.0 / np.maximum(u, 1e-300) ** 2
                                 + 1.0 / np.maximum(1.0 - u, 1e-300) ** 2)
                      / (fu + fv) ** 2, 0.0)
    rho = (1.0 - m) * t + m * s
    drho = (1.0 - m) * dt + dm * (s - t) * s / 0.2
    return rho, drho


def dispersion_root(model, gamma, branch):
    """Root nu of d(nu, gamma^2) = 0 continued from branch * slope * gamma.

    Newton steps are clamped inside the strip; an overshooting step is
    halved rather than evaluated past the analyticity boundary.
    """
    sym = model.symbol_at(gamma * gamma)
    rep = diffusive_check(model)
    slope = np.sqrt(-2.0 * np.real(rep.d_lambda) / np.real(rep.d_nunu))
    nu = complex(branch * slope * gamma)
    cap = 0.95 * model.eta
    for _ in range(60):
        ce = char_eval(sym, nu, orders=(0, 1))
        if ce.d1 in (None, 0):
            break
        step = ce.d / ce.d1
        while abs((nu - step).real) >= cap and abs(step) > 1e-16:
            step *= 0.5
        nu = nu - step
        if abs(step) < 1e-14 * (1 + abs(nu)):
            break
    return nu


def _null_vector(mat, align):
    _, _, Vh = np.linalg.svd(mat)
    v = np.conj(Vh[-1])
    ip = align @ np.real(v)
    if abs(ip) < 1e-12:
        ip = np.real(v[np.argmax(np.abs(v))])
    return np.real(v) * np.sign(ip) if np.abs(np.imag(v)).max() < 1e-9 else v * np.sign(ip)


@dataclass
class EdgeEigenvalue:
    lam: float
    gamma: float
    a_minus: float
    x: np.ndarray
    U: np.ndarray
    w: np.ndarray
    resonance: bool
    residual: float
    iterations: int
    diagnostics: dict = field(default_factory=dict)


class _EdgeSystem:
    """Residual/Jacobian of the far-field ansatz eigenvalue equation."""

    def __init__(self, model, grid, eps, data):
        self.model = model
        self.grid = grid
        self.eps = float(eps)
        self.data = data
        self.x = grid.nodes
        self.m = len(self.x)
        self.h = grid.h
        self.n = model.n

        rho, drho = smooth_ramp(self.x)
        self.chi_p = 0.5 * (1.0 + rho)
        self.chi_m = 0.5 * (1.0 - rho)
        self.dchi = 0.5 * drho

        we = model.weight_eta
        wexp = weight_exponent(self.x, -we, we)
        self.Wvec = np.exp(wexp - wexp.min())
        self.dwexp = we * self.x / np.sqrt(self.x * self.x + 1.0)
        pad = max(0.15 * grid.L, 5 * grid.h)
        self.active = np.abs(self.x) <= grid.L - pad
        self.active_flat = np.repeat(self.active, self.n)
        # rows entering the convergence norm: the extreme boundary rows
        # carry O(h^2) one-sided quadrature defects against the far field
        self.conv_rows = np.repeat(np.abs(self.x) <= grid.L - 1.0, self.n)

        self.D4 = _fd4(self.m, self.h)
        self.Vx = np.asarray(model.V(self.x), dtype=float).reshape(self.m)

        # window convolution matrix of the base kernel acting on w
        self.kernel_o = None
        if model.kernel is not None:
            self.kernel_o = model.kernel.scaled(-1.0)
            self.Cw = _window_conv_matrix(self.kernel_o, self.m, self.n, self.h)
        else:
            self.Cw = None
        self.pert_Cw = None
        if model.pert_kernel is not None:
            self.pert_Cw = _window_conv_matrix(model.pert_kernel, self.m,
                                               self.n, self.h)

    # -- far-field data ---------------------------------------------------

    def far_fields(self, gamma):
        lam = gamma * gamma
        sym = self.model.symbol_at(lam)
        nu_p = dispersion_root(self.model, gamma, +1)
        nu_m = dispersion_root(self.model, gamma, -1)
        e_p = _null_vector(delta_eval(sym, np.array(nu_p))[()], self.data.e0)
        e_m = _null_vector(delta_eval(sym, np.array(nu_m))[()], self.data.e0)
        return lam, nu_p, nu_m, np.real(e_p), np.real(e_m)

    def unpack(self, z):
        a_minus, gamma = z[0], z[1]
        w = np.zeros(self.m * self.n)
        w[self.active_flat] = z[2:]
        return a_minus, gamma, w.reshape(self.m, self.n)

    def ansatz(self, a_minus, gamma):
        lam, nu_p, nu_m, e_p, e_m = self.far_fields(gamma)
        up = np.exp(np.real(nu_p) * self.x)
        um = np.exp(np.real(nu_m) * self.x)
        U = (self.chi_p * up)[:, None] * e_p[None, :]
        U = U + a_minus * (self.chi_m * um)[:, None] * e_m[None, :]
        dU = (self.dchi * up + self.chi_p * np.real(nu_p) * up)[:, None] * e_p[None, :]
        dU = dU + a_minus * ((-self.dchi) * um
                             + self.chi_m * np.real(nu_m) * um)[:, None] * e_m[None, :]
        return lam, nu_p, nu_m, e_p, e_m, U, dU

    def conv_base(self, field_grid, a_minus, gamma, nu_p, nu_m, e_p, e_m):
        """K_o * U with the far tails handled by partial transforms."""
        if self.kernel_o is None:
            return np.zeros((self.m, self.n))
        flat = self.Cw @ field_grid.reshape(-1)
        out = flat.real.reshape(self.m, self.n)
        L = self.grid.L
        tr = self.kernel_o.head_transform(self.x - L, np.real(nu_p))
        out = out + np.real(
            np.einsum("mij,j->mi", tr, e_p) * np.exp(np.real(nu_p) * self.x)[:, None])
        tl = self.kernel_o.tail_transform(self.x + L, np.real(nu_m))
        out = out + a_minus * np.real(
            np.einsum("mij,j->mi", tl, e_m) * np.exp(np.real(nu_m) * self.x)[:, None])
        return out

    def residual(self, z):
        a_minus, gamma, w = self.unpack(z)
        lam, nu_p, nu_m, e_p, e_m, U, dU = self.ansatz(a_minus, gamma)
        wW = w / self.Wvec[:, None]
        Ufull = U + wW
        dw = (self.D4 @ w - self.dwexp[:, None] * w) / self.Wvec[:, None]
        Uprime = dU + dw

        A1 = lam * self.model.B
        if self.model.dirac is not None:
            A1 = A1 - self.model.dirac
        R = Uprime - Ufull @ A1.T
        R = R - self.conv_base(Ufull, a_minus, gamma, nu_p, nu_m, e_p, e_m)
        pert = self._pert_apply(Ufull, a_minus, nu_p, nu_m, e_p, e_m)
        R = R + self.eps * self.Vx[:, None] * pert
        return R.reshape(-1)

    def _pert_apply(self, Ufull, a_minus, nu_p, nu_m, e_p, e_m):
        if self.model.P is not None:
            return Ufull @ self.model.P.T
        flat = self.pert_Cw @ Ufull.reshape(-1)
        out = flat.real.reshape(self.m, self.n)
        L = self.grid.L
        tr = self.model.pert_kernel.head_transform(self.x - L, np.real(nu_p))
        out = out + np.real(np.einsum("mij,j->mi", tr, e_p)
                            * np.exp(np.real(nu_p) * self.x)[:, None])
        tl = self.model.pert_kernel.tail_transform(self.x + L, np.real(nu_m))
        out = out + a_minus * np.real(np.einsum("mij,j->mi", tl, e_m)
                                      * np.exp(np.real(nu_m) * self.x)[:, None])
        return out

    def jacobian(self, z):
        a_minus, gamma, w = self.unpack(z)
        lam, nu_p, nu_m, e_p, e_m, U, dU = self.ansatz(a_minus, gamma)
        m, n = self.m, self.n
        invW = np.repeat(1.0 / self.Wvec, n)

        # analytic block in w; the derivative chain divides by the weight
        # at the output node (row scaling), the convolution at the input
        # node (column scaling)
        Dx = np.kron(self.D4, np.eye(n)) - np.diag(np.repeat(self.dwexp, n))
        JW = Dx * invW[:, None]
        A1 = lam * self.model.B
        if self.model.dirac is not None:
            A1 = A1 - self.model.dirac
        JW = JW - np.kron(np.eye(m), A1) * invW[None, :]
        if self.Cw is not None:
            JW = JW - self.Cw.real * invW[None, :]
        if self.model.P is not None:
            JW = JW + self.eps * np.kron(np.diag(self.Vx), self.model.P) * invW[None, :]
        else:
            JW = JW + self.eps * (np.repeat(self.Vx, n)[:, None]
                                  * self.pert_Cw.real) * invW[None, :]

        base = self.residual(z)
        Jp = np.zeros((len(base), 2))
        for k in range(2):
            dz = z.copy()
            step = 1e-7 * (1.0 + abs(z[k]))
            dz[k] += step
            Jp[:, k] = (self.residual(dz) - base) / step
        return np.hstack([Jp, JW[:, self.active_flat]]), base


def _fd4(m, h):
    D = np.zeros((m, m))
    c = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / (12.0 * h)
    for i in range(2, m - 2):
        D[i, i - 2:i + 3] = c
    e = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / (12.0 * h)
    for i in (0, 1):
        D[i, i:i + 5] = e
    for i in (m - 1, m - 2):
        D[i, i - 4:i + 1] = -e[::-1]
    return D


def _window_conv_matrix(kernel, m, n, h):
    """Trapezoid convolution matrix on the window with kink corrections.

    Corner rows take the one-sided kernel branch at the coincident kink
    and skip the interior jump correction.
    """
    diffs = h * np.arange(-(m - 1), m)
    vals = kernel.value(diffs)
    idx = np.arange(m)
    off = idx[:, None] - idx[None, :] + (m - 1)
    w_quad = np.full(m, h)
    w_quad[0] = w_quad[-1] = 0.5 * h
    j0, j1 = kernel.kink_jumps()
    vm = kernel.value_one_sided(-1)
    vp = kernel.value_one_sided(+1)
    cc = h * h / 12.0
    D2 = np.zeros((m, m))
    r = np.arange(1, m - 1)
    D2[r, r - 1] = -0.5 / h
    D2[r, r + 1] = 0.5 / h
    C = np.zeros((m * n, m * n), dtype=complex)
    eye = np.eye(m)
    eye[0, 0] = eye[-1, -1] = 0.0
    for a_ in range(n):
        for b_ in range(n):
            blk = vals[off, a_, b_] * w_quad[None, :]
            blk[0, 0] = vm[a_, b_] * w_quad[0]
            blk[-1, -1] = vp[a_, b_] * w_quad[-1]
            blk = blk + cc * j1[a_, b_] * eye
            blk = blk - cc * j0[a_, b_] * D2
            C[a_::n, b_::n] = blk
    return C


def edge_eigenvalue(model, eps, grid=None, tol=1e-11, max_iter=40,
                    M_hint=None):
    """Bifurcating eigenvalue lambda_*(eps) = gamma^2 and its eigenfunction.

    Newton on (a_-, gamma, w) with a_+ normalized to 1, seeded on the
    branch gamma ~ -M eps.  A negative M*eps puts the continuation on
    the resonance branch (eigenfunction grows); the result is computed
    anyway and flagged.
    """
    data = edge_vectors(model)
    M = M_hint if M_hint is not None else edge_constant(model, data)
    resonance = (M * eps) < 0
    grid = grid or Grid(L=40.0, h=0.1)
    sys = _EdgeSystem(model, grid, eps, data)
    z = np.concatenate([[1.0, -M * eps], np.zeros(int(sys.active_flat.sum()))])
    res = sys.residual(z)
    scale = 1.0 + abs(eps) * np.abs(sys.Vx).max()

    def rnorm_of(r):
        return np.abs(r[sys.conv_rows]).max()

    # quadrature defects against the analytic far field floor the
    # attainable residual for convolution kernels; a stalled iteration
    # already below this level counts as converged at the floor
    plateau = 1e-6 * scale
    for it in range(max_iter):
        rnorm = rnorm_of(res)
        if rnorm <= tol * scale:
            break
        J, _ = sys.jacobian(z)
        colnorm = np.linalg.norm(J, axis=0)
        colnorm[colnorm == 0] = 1.0
        step, *_ = np.linalg.lstsq(J / colnorm[None, :], -res, rcond=None)
        step = step / colnorm
        lam_dampen = 1.0
        for _ in range(8):
            z_new = z + lam_dampen * step
            res_new = sys.residual(z_new)
            if rnorm_of(res_new) < rnorm:
                break
            lam_dampen *= 0.5
        else:
            if rnorm <= plateau:
                break
            raise NewtonDiverged("edge eigenvalue iteration stalled")
        z, res = z_new, res_new
        if rnorm_of(res) > 0.5 * rnorm and rnorm_of(res) <= plateau:
            break
    else:
        raise NewtonDiverged(
            f"edge eigenvalue: no convergence ({rnorm_of(res):.2e})")

    a_minus, gamma, w = sys.unpack(z)
    lam, nu_p, nu_m, e_p, e_m, U, dU = sys.ansatz(a_minus, gamma)
    Ufull = U + w / sys.Wvec[:, None]
    return EdgeEigenvalue(
        lam=float(gamma * gamma), gamma=float(gamma), a_minus=float(a_minus),
        x=sys.x, U=Ufull, w=w, resonance=resonance,
        residual=float(rnorm_of(res)), iterations=it + 1,
        diagnostics={
            "nu_plus": complex(nu_p), "nu_minus": complex(nu_m),
            "M": float(M), "predicted_nu_plus": float(-data.slope * M * eps),
            "grid": (grid.L, grid.h),
        })


@dataclass
class EdgeScaling:
    rows: list                         # (eps, lambda_star, lambda/eps^2)
    intercept: float
    slope_fit: float
    M: float

    @property
    def M_squared(self):
        return self.M * self.M

    @property
    def intercept_rel_error(self):
        return abs(self.intercept - self.M_squared) / self.M_squared


def edge_scaling(model, eps_list, grid=None):
    """lambda_*(eps) sweep with the quadratic-law fit of the ratio."""
    M = edge_constant(model)
    rows = []
    for eps in eps_list:
        r = edge_eigenvalue(model, eps, grid=grid, M_hint=M)
        rows.append((float(eps), r.lam, r.lam / eps ** 2))
    eps_arr = np.array([r[0] for r in rows])
    ratio = np.array([r[2] for r in rows])
    A = np.vstack([np.ones_like(eps_arr), eps_arr]).T
    coef, *_ = np.linalg.lstsq(A, ratio, rcond=None)
    return EdgeScaling(rows=rows, intercept=float(coef[0]),
                       slope_fit=float(coef[1]), M=float(M))
