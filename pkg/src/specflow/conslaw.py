"""Stationary shock profiles in nonlocal conservation laws with sources.

The model is u_t = (K * F(u) + G(u))_x + eps * H(x), with a nonlocal
flux part K * F and a local flux G.  Around the zero state, transport is
governed by dG + K_hat(0) dF: its negated eigenvalues are the
characteristic speeds.  A small localized source produces a smooth
stationary transition layer; its far-field states are resolved on the
outgoing characteristics and the jump across the layer is, to leading
order, determined by the integrated source alone.

The stationary solver works with the ansatz

    U(x) = sum_j a_j e_j chi_+(x) + sum_j b_j e_j chi_-(x) + W(x),

chi_+- = (1 +- tanh x)/2, with W sought in an exponentially weighted
space (unknowns V = W_w * W on the grid, so the correction is forced to
decay).  The residual evaluates the flux derivative analytically:
(K*F(U))' = K' * F(U) including the Dirac part from a kernel jump, plus
dG(U) U' with the slowly-varying ansatz differentiated in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad_vec

from .errors import (DegeneracyViolated, IndexMismatch, NewtonDiverged,
                     NonrealSpectrum, RepeatedSpeeds, SingularMatrix)
from .griddisc import Grid, weight_exponent
from .kernels import TransformedKernel
from .symbols import ShiftTerm, Symbol
from .flow import weighted_index

__all__ = [
    "ShockModel", "ShockSolution", "characteristic_speeds",
    "linearization_index", "linearization_symbol", "jump_leading_order",
    "shock_profile", "validate_model", "zero_speed_constant",
    "zero_speed_selection",
]


@dataclass
class ShockModel:
    """Problem data for the stationary shock computation.

    Fluxes are linear by default; optional quadratic tensors F2, G2 add
    F_i += 0.5 * F2[i,j,k] u_j u_k (same for G).  The source is a
    callable x -> (len(x), n) array, exponentially localized with the
    declared constants (decay_C, decay_delta).
    """

    n: int
    kernel: object                     # KernelSpec of the physical kernel
    dF: np.ndarray
    dG: np.ndarray
    source: object
    F2: np.ndarray | None = None
    G2: np.ndarray | None = None
    decay_C: float = 1.0
    decay_delta: float = 1.0
    eps_max: float = 0.05
    eta: float = 0.25                  # weight rate for the correction term

    def __post_init__(self):
        self.dF = np.atleast_2d(np.asarray(self.dF, dtype=float))
        self.dG = np.atleast_2d(np.asarray(self.dG, dtype=float))
        if abs(np.linalg.det(self.dG)) < 1e-12:
            raise SingularMatrix("dG must be invertible")
        if self.F2 is not None:
            self.F2 = np.asarray(self.F2, dtype=float)
        if self.G2 is not None:
            self.G2 = np.asarray(self.G2, dtype=float)

    # -- flux evaluations -------------------------------------------------

    def flux_F(self, U):
        out = U @ self.dF.T
        if self.F2 is not None:
            out = out + 0.5 * np.einsum("ijk,mj,mk->mi", self.F2, U, U)
        return out

    def flux_G(self, U):
        out = U @ self.dG.T
        if self.G2 is not None:
            out = out + 0.5 * np.einsum("ijk,mj,mk->mi", self.G2, U, U)
        return out

    def dflux_F(self, U):
        """Jacobian dF(U) per node, shape (m, n, n)."""
        m = U.shape[0]
        out = np.broadcast_to(self.dF, (m, self.n, self.n)).copy()
        if self.F2 is not None:
            out = out + np.einsum("ijk,mk->mij", self.F2, U)
        return out

    def dflux_G(self, U):
        m = U.shape[0]
        out = np.broadcast_to(self.dG, (m, self.n, self.n)).copy()
        if self.G2 is not None:
            out = out + np.einsum("ijk,mk->mij", self.G2, U)
        return out

    def transport_matrix(self):
        K0 = np.real(self.kernel.transform(0.0))
        return self.dG + K0 @ self.dF

    def source_at(self, x):
        return np.asarray(self.source(np.asarray(x, dtype=float)))


def validate_model(model, ell_cap=None, samples=4001):
    """Check the structural flux hypotheses; returns a list of failures.

    Verifies that dG is invertible, the transport matrix has real
    distinct eigenvalues, dG + K_hat(i ell) dF stays invertible for
    ell != 0, and that the symmetric-flux condition holds.
    """
    failures = []
    if abs(np.linalg.det(model.dG)) < 1e-12:
        failures.append("dG is singular")
    M0 = model.transport_matrix()
    lam = np.linalg.eigvals(M0)
    if np.abs(lam.imag).max() > 1e-10 * max(1.0, np.abs(lam).max()):
        failures.append("transport matrix has complex eigenvalues")
    lam = np.sort(lam.real)
    if len(lam) > 1 and np.min(np.diff(lam)) < 1e-10 * max(1.0, np.abs(lam).max()):
        failures.append("transport eigenvalues are not distinct")
    cap = ell_cap or (model.n * (model.kernel.l1_bound()
                                 * np.linalg.norm(model.dF, 2)
                                 + np.linalg.norm(model.dG, 2)) + 1.0)
    ells = np.linspace(1e-3, cap, samples)
    ells = np.concatenate([-ells[::-1], ells])
    Kv = model.kernel.transform(1j * ells)
    mats = model.dG + np.einsum("mij,jk->mik", Kv, model.dF)
    dets = np.abs(np.linalg.det(mats))
    if dets.min() < 1e-8:
        k = int(np.argmin(dets))
        failures.append(
            f"dG + K_hat(i ell) dF nearly singular at ell = {ells[k]:.4f}")
    for nu in (0.0, 0.3j, 0.9j, 0.2):
        KF = model.kernel.transform(np.array(complex(nu)))[()] @ model.dF
        if np.abs(KF - KF.T).max() > 1e-9 * (1 + np.abs(KF).max()):
            failures.append("K_hat(nu) dF is not symmetric")
            break
    if np.abs(model.dG - model.dG.T).max() > 1e-12 * (1 + np.abs(model.dG).max()):
        failures.append("dG is not symmetric")
    return failures


def characteristic_speeds(model):
    """Speeds c_j and the orthonormal transport eigenbasis.

    The transport matrix dG + K_hat(0) dF has eigenvalues -c_j; the
    speeds are returned in increasing order.  Raises NonrealSpectrum for
    complex eigenvalues (non-symmetric data) and RepeatedSpeeds when the
    strict ordering fails.
    """
    M0 = model.transport_matrix()
    if np.allclose(M0, M0.T, atol=1e-12 * max(1.0, np.abs(M0).max())):
        lam, E = np.linalg.eigh(M0)
    else:
        lam, E = np.linalg.eig(M0)
        if np.abs(lam.imag).max() > 1e-10 * max(1.0, np.abs(lam).max()):
            raise NonrealSpectrum("transport matrix has complex eigenvalues")
        lam, E = lam.real, E.real
    speeds = -lam
    order = np.argsort(speeds)
    speeds = speeds[order]
    E = E[:, order]
    scale = max(1.0, np.abs(speeds).max())
    if np.min(np.diff(speeds)) < 1e-10 * scale if len(speeds) > 1 else False:
        raise RepeatedSpeeds("characteristic speeds are not distinct")
    return speeds, E


def linearization_symbol(model, eta=None):
    """Symbol of the normalized linearized operator U + dG^-1 (K_x * dF U).

    The x-derivative of the convolution kernel contributes a smooth part
    and, for kernels with a jump at 0, a Dirac term; both are folded into
    the symbol data.
    """
    dGinv = np.linalg.inv(model.dG)
    dK, jump = model.kernel.derivative()
    kernel = TransformedKernel(dK, -dGinv, model.dF)
    shifts = [ShiftTerm(0.0, -dGinv @ jump @ model.dF)]
    if eta is None:
        eta = 0.9 * kernel.strip
    return Symbol(model.n, kernel, tuple(shifts), eta)


def linearization_index(model, eta):
    """Fredholm index of the linearization in the symmetric weight e^{eta|x|}.

    The weight corresponds to the two-sided rates (-eta, +eta); with all
    speeds nonzero the characteristic root at 0 has multiplicity n and
    the index is -n, gaining one more when exactly one speed vanishes
    with a generic kernel slope.
    """
    sym = linearization_symbol(model)
    if not 0 < eta < sym.eta:
        raise ValueError(f"need 0 < eta < {sym.eta:g}")
    return weighted_index(sym, -eta, eta)


def jump_leading_order(model):
    """Leading-order jump per unit eps: -(K_hat(0) dF + dG)^{-1} integral H."""
    M0 = model.transport_matrix()
    if abs(np.linalg.det(M0)) < 1e-14:
        raise SingularMatrix("transport matrix is singular (zero speed)")
    integral, _ = quad_vec(lambda x: model.source_at(np.array([x]))[0],
                           -np.inf, np.inf, epsabs=1e-12, epsrel=1e-12)
    return -np.linalg.solve(M0, integral)


@dataclass
class ShockSolution:
    a: np.ndarray                      # outgoing coefficients (eigenbasis)
    b: np.ndarray                      # ingoing coefficients (eigenbasis)
    x: np.ndarray
    U: np.ndarray                      # profile on the grid, (m, n)
    W: np.ndarray                      # localized correction, (m, n)
    residual: float
    iterations: int
    basis: np.ndarray = None           # eigenbasis columns e_j
    diagnostics: dict = field(default_factory=dict)

    @property
    def jump(self):
        """State-space jump U(+inf) - U(-inf)."""
        d = self.a - self.b
        return d if self.basis is None else self.basis @ d


def _fd4_matrix(m, h):
    """Fourth-order first-derivative matrix with one-sided closures."""
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


class _ShockSystem:
    """Discrete residual and Jacobian for the stationary layer equation.

    The correction unknowns are V = W_w * W on the nodes with
    |x| <= L - pad; V is pinned to zero on the outer pad.  This encodes
    the required decay of W, removes the boundary-layer null directions
    of the truncated operator from the unknown space, and makes the
    collocation system (all rows kept) solvable by least squares.
    """

    def __init__(self, model, grid, b, eps, free_b_index=None):
        self.model = model
        self.grid = grid
        self.eps = float(eps)
        self.b = np.asarray(b, dtype=float)
        self.free_b = free_b_index
        self.x = grid.nodes
        self.m = len(self.x)
        self.h = grid.h
        n = model.n
        self.n = n

        speeds, E = characteristic_speeds(model)
        self.E = E
        self.chi_p = 0.5 * (1.0 + np.tanh(self.x))
        self.chi_m = 0.5 * (1.0 - np.tanh(self.x))
        self.dchi = 0.5 / np.cosh(self.x) ** 2

        wexp = weight_exponent(self.x, -model.eta, model.eta)
        self.Wvec = np.exp(wexp - wexp.min())   # 1 at the center, grows out
        self.dwexp = (0.5 * (model.eta - (-model.eta))
                      * self.x / np.sqrt(self.x * self.x + 1.0))
        pad = max(0.15 * grid.L, 5 * grid.h)
        self.active = np.abs(self.x) <= grid.L - pad
        self.active_flat = np.repeat(self.active, n)

        self.D4 = _fd4_matrix(self.m, self.h)
        self.Hx = self.eps * model.source_at(self.x)

        # Convolution with K' (smooth part of the flux-kernel derivative)
        # is split: the slowly varying ansatz (chi ramps and constants) is
        # convolved on an extended grid with exact constant tails beyond,
        # so window-edge quadrature errors act only on quantities that
        # vanish there; the compactly supported remainder F(U) - F(Ubar)
        # is convolved on the window itself.
        self.dK, self.K_jump = model.kernel.derivative()
        self.j0 = np.real(self.dK.kink_jumps()[0])
        self.j1 = np.real(self.dK.kink_jumps()[1])
        self.cc = self.h * self.h / 12.0

        ext = 12.0
        next_ = int(round(ext / self.h))
        self.x_ext = -grid.L - ext + self.h * np.arange(self.m + 2 * next_)
        m_ext = len(self.x_ext)
        w_ext = np.full(m_ext, self.h)
        w_ext[0] = w_ext[-1] = 0.5 * self.h
        diffs = self.x[:, None] - self.x_ext[None, :]
        vals_ext = np.real(self.dK.value(diffs.ravel())).reshape(
            self.m, m_ext, n, n)
        self.Cext = vals_ext * w_ext[None, :, None, None]
        self.chi_p_ext = 0.5 * (1.0 + np.tanh(self.x_ext))
        self.chi_m_ext = 0.5 * (1.0 - np.tanh(self.x_ext))
        self.dchi_ext = 0.5 / np.cosh(self.x_ext) ** 2

        # window convolution matrix for the compact remainder
        idx = np.arange(self.m)
        diffs_w = self.h * np.arange(-(self.m - 1), self.m)
        vals = np.real(self.dK.value(diffs_w))
        off = idx[:, None] - idx[None, :] + (self.m - 1)
        w_quad = np.full(self.m, self.h)
        w_quad[0] = w_quad[-1] = 0.5 * self.h
        D2 = np.zeros((self.m, self.m))
        r = np.arange(1, self.m - 1)
        D2[r, r - 1] = -0.5 / self.h
        D2[r, r + 1] = 0.5 / self.h
        self.Cmat = np.zeros((self.m * n, self.m * n))
        eye = np.eye(self.m)
        for a_ in range(n):
            for b_ in range(n):
                blk = vals[off, a_, b_] * w_quad[None, :]
                blk = blk + self.cc * self.j1[a_, b_] * eye
                blk = blk - self.cc * self.j0[a_, b_] * D2
                self.Cmat[a_::n, b_::n] = blk

        # exact constant tails beyond the extended grid
        xr = self.x - self.x_ext[-1]
        xl = self.x - self.x_ext[0]
        self.tail_right = np.real(self.dK.head_transform(xr, 0.0))
        self.tail_left = np.real(self.dK.tail_transform(xl, 0.0))

    # -- helpers ----------------------------------------------------------

    @property
    def n_params(self):
        return self.n + (1 if self.free_b is not None else 0)

    def unpack(self, z):
        n, m = self.n, self.m
        a = z[:n]
        k = n
        if self.free_b is not None:
            bfree = z[k]
            k += 1
        else:
            bfree = None
        V = np.zeros(m * n)
        V[self.active_flat] = z[k:]
        V = V.reshape(m, n)
        b = self.b.copy()
        if bfree is not None:
            b[self.free_b] = bfree
        return a, b, V

    def profile(self, a, b, V):
        return self.ansatz_base(a, b) + V / self.Wvec[:, None]

    def profile_derivative(self, a, b, V):
        dbase = self.dchi[:, None] * (self.E @ (a - b))[None, :]
        Vp = self.D4 @ V
        return dbase + (Vp - self.dwexp[:, None] * V) / self.Wvec[:, None]

    def ansatz_base(self, a, b):
        return (self.chi_p[:, None] * (self.E @ a)[None, :]
                + self.chi_m[:, None] * (self.E @ b)[None, :])

    def conv_ansatz(self, a, b):
        """(K' * F(Ubar))(x) for the slowly varying ansatz part.

        Trapezoid on the extended grid, explicit kink correction at the
        diagonal, and exact constant tails beyond the extension.
        """
        ea, eb = self.E @ a, self.E @ b
        Ubar_ext = (self.chi_p_ext[:, None] * ea[None, :]
                    + self.chi_m_ext[:, None] * eb[None, :])
        F_ext = self.model.flux_F(Ubar_ext)
        out = np.einsum("xmij,mj->xi", self.Cext, F_ext)
        Ubar = self.ansatz_base(a, b)
        dUbar = self.dchi[:, None] * (ea - eb)[None, :]
        FU = self.model.flux_F(Ubar)
        dFU = np.einsum("mij,mj->mi", self.model.dflux_F(Ubar), dUbar)
        out = out + self.cc * (FU @ self.j1.T - dFU @ self.j0.T)
        out = out + np.einsum("mij,j->mi", self.tail_right,
                              self.model.flux_F(ea[None, :])[0])
        out = out + np.einsum("mij,j->mi", self.tail_left,
                              self.model.flux_F(eb[None, :])[0])
        return out

    def residual(self, z):
        a, b, V = self.unpack(z)
        U = self.profile(a, b, V)
        Up = self.profile_derivative(a, b, V)
        FU = self.model.flux_F(U)
        dF_compact = FU - self.model.flux_F(self.ansatz_base(a, b))
        R = self.conv_ansatz(a, b)
        R = R + (self.Cmat @ dF_compact.reshape(-1)).reshape(self.m, self.n)
        R = R + FU @ np.real(self.K_jump).T
        dGU = self.model.dflux_G(U)
        R = R + np.einsum("mij,mj->mi", dGU, Up)
        R = R + self.Hx
        R = R.reshape(-1)
        if self.free_b is not None:
            # gauge row: shifting the zero-speed content of both far
            # fields together is (nearly) residual-free, so the split is
            # pinned symmetrically
            R = np.append(R, a[self.free_b] + b[self.free_b])
        return R

    def jacobian(self, z):
        n, m = self.n, self.m
        a, b, V = self.unpack(z)
        U = self.profile(a, b, V)
        Up = self.profile_derivative(a, b, V)
        dFU = self.model.dflux_F(U)
        dGU = self.model.dflux_G(U)

        # block-diagonal multiplication operators
        def blockdiag(mats, post=None):
            B = np.zeros((m * n, m * n))
            for i in range(m):
                B[i * n:(i + 1) * n, i * n:(i + 1) * n] = mats[i]
            return B

        invW = 1.0 / self.Wvec
        # d/dV of F(U): Fu(U) * (1/W)
        BF = blockdiag(dFU * invW[:, None, None])
        JV = (self.Cmat + np.kron(np.eye(m), np.real(self.K_jump))) @ BF
        # d/dV of dG(U) U': quadratic-G term plus transport of the derivative
        Dx = self.D4 - np.diag(self.dwexp)
        DxW = Dx * invW[:, None]
        BG = blockdiag(dGU)
        JV = JV + _blockwise_apply(BG, DxW, n)
        if self.model.G2 is not None:
            G2U = np.einsum("ijk,mk->mij", self.model.G2, Up)
            JV = JV + blockdiag(G2U * invW[:, None, None])

        if self.free_b is not None:
            JV = np.vstack([JV, np.zeros((1, JV.shape[1]))])
        # finite-difference columns for a (and the free b component)
        base = self.residual(z)
        npar = self.n_params
        Jp = np.zeros((len(base), npar))
        for k in range(npar):
            dz = z.copy()
            step = 1e-7 * (1.0 + abs(z[k]))
            dz[k] += step
            Jp[:, k] = (self.residual(dz) - base) / step
        return np.hstack([Jp, JV[:, self.active_flat]]), base


def _blockwise_apply(B, S, n):
    """(block-diagonal B) @ (scalar-pattern S kron I_n)."""
    m = S.shape[0]
    out = np.zeros((m * n, m * n))
    for a_ in range(n):
        for b_ in range(n):
            diag = B[a_::n, b_::n].diagonal()
            out[a_::n, b_::n] = diag[:, None] * S
    return out


def shock_profile(model, b, eps, grid=None, validate_index=False,
                  tol=1e-10, max_iter=50):
    """Solve the stationary layer equation for given ingoing data b.

    Newton iteration on (a, V); the b states are prescribed.  Requires
    every characteristic speed nonzero and |eps| <= the model's eps_max.
    """
    if abs(eps) > model.eps_max:
        raise ValueError(f"|eps| exceeds eps_max = {model.eps_max:g}")
    speeds, _ = characteristic_speeds(model)
    if np.min(np.abs(speeds)) < 1e-10:
        raise ValueError("zero characteristic speed: use zero_speed_selection")
    if validate_index:
        idx = linearization_index(model, model.eta)
        if idx != -model.n:
            raise IndexMismatch(
                f"linearization index {idx} != -n = {-model.n}")
    grid = grid or Grid(L=30.0, h=0.05)
    sys = _ShockSystem(model, grid, b, eps)
    z = np.concatenate([np.asarray(b, dtype=float),
                        np.zeros(int(sys.active_flat.sum()))])
    return _newton_solve(sys, z, tol, max_iter, model, b)


def _newton_solve(sys, z, tol, max_iter, model, b):
    scale = 1.0 + np.abs(sys.Hx).max()
    res = sys.residual(z)
    for it in range(max_iter):
        rnorm = np.abs(res).max()
        if rnorm <= tol * scale:
            break
        J, _ = sys.jacobian(z)
        # column equilibration: the weighted correction variables carry
        # exponentially disparate scales, which a plain least-squares
        # solve cannot handle
        colnorm = np.linalg.norm(J, axis=0)
        colnorm[colnorm == 0] = 1.0
        step, *_ = np.linalg.lstsq(J / colnorm[None, :], -res, rcond=None)
        step = step / colnorm
        lam = 1.0
        for _ in range(7):
            z_new = z + lam * step
            res_new = sys.residual(z_new)
            if np.abs(res_new).max() < rnorm:
                break
            lam *= 0.5
        else:
            raise NewtonDiverged("stationary solver stalled while damping")
        z, res = z_new, res_new
    else:
        raise NewtonDiverged(
            f"no convergence after {max_iter} iterations "
            f"(residual {np.abs(res).max():.2e})")
    a, bfull, V = sys.unpack(z)
    W = V / sys.Wvec[:, None]
    U = sys.profile(a, bfull, V)
    return ShockSolution(
        a=a, b=bfull, x=sys.x, U=U, W=W,
        residual=float(np.abs(res).max()), iterations=it + 1, basis=sys.E,
        diagnostics={"grid": (sys.grid.L, sys.grid.h), "eps": sys.eps,
                     "scale": scale})


def zero_speed_constant(model):
    """Selection constant M for the vanishing characteristic.

    M is the first moment of the source against the zero-speed direction
    divided by the kernel-slope pairing; an even source has M = 0 by
    parity.  Returns (M, j0, pairing).
    """
    speeds, E = characteristic_speeds(model)
    zero = np.where(np.abs(speeds) < 1e-8)[0]
    if len(zero) != 1:
        raise ValueError("need exactly one vanishing speed")
    j0 = int(zero[0])
    e0 = E[:, j0]
    K1 = np.real(model.kernel.transform(0.0, 1))
    pairing = float(e0 @ (K1 @ model.dF @ e0))
    if abs(pairing) < 1e-10:
        raise DegeneracyViolated("kernel-slope pairing vanishes")
    moment, _ = quad_vec(lambda x: x * float(model.source_at(np.array([x]))[0] @ e0),
                         -np.inf, np.inf, epsabs=1e-13, epsrel=1e-13)
    return float(moment) / pairing, j0, pairing


def zero_speed_selection(model, eps, b_rest=None, grid=None,
                         tol=1e-10, max_iter=50):
    """Selection of the layer data on a vanishing characteristic.

    Exactly one speed must vanish; the source's first moment against the
    zero-speed direction, normalized by the kernel-slope pairing, gives
    the selection constant M.  The solver treats the zero-speed ingoing
    coefficient as an additional unknown and returns
    (a_j0, b_j0, M, solution).
    """
    Mconst, j0, pairing = zero_speed_constant(model)
    speeds, E = characteristic_speeds(model)
    e0 = E[:, j0]
    # a stationary layer requires zero net source mass along the
    # vanishing characteristic: nothing transports that mass away
    mass, _ = quad_vec(lambda x: float(model.source_at(np.array([x]))[0] @ e0),
                       -np.inf, np.inf, epsabs=1e-13, epsrel=1e-13)
    if abs(mass) > 1e-8 * (1.0 + abs(Mconst)):
        raise ValueError(
            "source has nonzero mass on the zero-speed characteristic; "
            "no stationary layer exists")

    b = np.zeros(model.n) if b_rest is None else np.asarray(b_rest, dtype=float)
    grid = grid or Grid(L=30.0, h=0.05)
    sys = _ShockSystem(model, grid, b, eps, free_b_index=j0)
    z = np.concatenate([b, [0.0], np.zeros(int(sys.active_flat.sum()))])
    sol = _newton_solve(sys, z, tol, max_iter, model, b)
    a_j0 = float(sol.a[j0])
    b_j0 = float(sol.b[j0])
    sol.diagnostics["M"] = Mconst
    sol.diagnostics["j0"] = j0
    return a_j0, b_j0, Mconst, sol
