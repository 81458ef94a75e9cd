"""Constant-coefficient symbols and parametrized families of them.

A Symbol bundles a matrix convolution kernel, a finite list of Dirac
shift terms and a declared strip half-width eta.  It represents the
constant-coefficient operator

    T U = dU/dxi - K * U - sum_j A_j U(. - xi_j)

through its transform data.  An OperatorFamily maps a real parameter to
Symbols, with identified limits at the interval ends; it models both
xi-dependent operators and homotopies between constant ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import StripViolation
from .kernels import KernelSpec, SumKernel, TransformedKernel

__all__ = [
    "ShiftTerm", "Symbol", "OperatorFamily", "HypothesisReport",
    "fourier_eval", "weight_shift", "combine_symbols", "check_hypotheses",
]


@dataclass(frozen=True)
class ShiftTerm:
    """A Dirac term A * U(. - xi)."""
    xi: float
    A: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "xi", float(self.xi))
        object.__setattr__(self, "A", np.atleast_2d(np.asarray(self.A, dtype=complex)))


@dataclass(frozen=True)
class Symbol:
    """Constant-coefficient nonlocal symbol on a strip |Re nu| < eta."""

    n: int
    kernel: KernelSpec | None
    shifts: tuple[ShiftTerm, ...]
    eta: float
    loc_norm: float = field(init=False)

    def __post_init__(self):
        shifts = tuple(s if isinstance(s, ShiftTerm) else ShiftTerm(*s)
                       for s in self.shifts)
        object.__setattr__(self, "shifts", shifts)
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.kernel is not None:
            if self.kernel.n != self.n:
                raise ValueError("kernel dimension mismatch")
            if self.eta >= self.kernel.strip:
                raise StripViolation(
                    f"eta = {self.eta:g} must be < kernel strip {self.kernel.strip:g}")
        xis = [s.xi for s in shifts]
        if len(set(xis)) != len(xis):
            raise ValueError("shift offsets must be pairwise distinct")
        for s in shifts:
            if s.A.shape != (self.n, self.n):
                raise ValueError("shift matrix dimension mismatch")
        loc = sum(np.linalg.norm(s.A, 2) * np.exp(self.eta * abs(s.xi)) for s in shifts)
        object.__setattr__(self, "loc_norm", float(loc))

    # -- evaluation -----------------------------------------------------

    def khat(self, nu, order=0):
        nu = np.asarray(nu, dtype=complex)
        if self.kernel is None:
            return np.zeros(nu.shape + (self.n, self.n), dtype=complex)
        return self.kernel.transform(nu, order)

    def shift_sum(self, nu, order=0):
        """sum_j A_j (-xi_j)^order exp(-nu xi_j), broadcast over nu."""
        nu = np.asarray(nu, dtype=complex)
        out = np.zeros(nu.shape + (self.n, self.n), dtype=complex)
        for s in self.shifts:
            out += ((-s.xi) ** order * np.exp(-nu * s.xi))[..., None, None] * s.A
        return out

    def is_real(self):
        ker_ok = True
        if self.kernel is not None:
            probe = self.kernel.value(np.linspace(-2.0, 2.0, 7))
            ker_ok = np.max(np.abs(probe.imag)) < 1e-14 * (1 + np.max(np.abs(probe)))
        return ker_ok and all(np.max(np.abs(s.A.imag)) == 0 for s in self.shifts)

    def shift_norm_sum(self):
        return sum(np.linalg.norm(s.A, 2) for s in self.shifts)


def fourier_eval(kernel, nu, order=0):
    """Transform of a kernel (None meaning the zero kernel).

    Raises StripViolation outside the declared strip and QuadratureTail
    when a sampled kernel violates its declared decay at truncation.
    """
    if kernel is None:
        raise ValueError("fourier_eval needs a kernel; use Symbol.khat for symbols")
    kernel.check_strip(nu)
    return kernel.transform(nu, order)


def weight_shift(symbol, gamma):
    """Conjugation by exp(gamma xi) at the symbol level.

    The kernel is multiplied pointwise by exp(gamma zeta), the shift
    matrix at 0 gains gamma*I and every other shift matrix is scaled by
    exp(gamma xi_j).  Characteristic roots translate right by gamma.
    """
    gamma = float(gamma)
    if abs(gamma) >= symbol.eta:
        raise StripViolation(
            f"|gamma| = {abs(gamma):g} must be < eta = {symbol.eta:g}")
    if gamma == 0.0:
        return symbol
    kernel = None if symbol.kernel is None else symbol.kernel.weight_shift(gamma)
    shifts = []
    has_zero = False
    for s in symbol.shifts:
        if s.xi == 0.0:
            shifts.append(ShiftTerm(0.0, s.A + gamma * np.eye(symbol.n)))
            has_zero = True
        else:
            shifts.append(ShiftTerm(s.xi, s.A * np.exp(gamma * s.xi)))
    if not has_zero:
        shifts.insert(0, ShiftTerm(0.0, gamma * np.eye(symbol.n)))
    return Symbol(symbol.n, kernel, tuple(shifts), symbol.eta - abs(gamma))


def combine_symbols(s0, s1, w0, w1, eta=None):
    """Entrywise affine combination w0*s0 + w1*s1 (shared dimension)."""
    if s0.n != s1.n:
        raise ValueError("dimension mismatch")
    parts = []
    if s0.kernel is not None and w0 != 0.0:
        parts.append(TransformedKernel(s0.kernel, w0 * np.eye(s0.n), np.eye(s0.n)))
    if s1.kernel is not None and w1 != 0.0:
        parts.append(TransformedKernel(s1.kernel, w1 * np.eye(s1.n), np.eye(s1.n)))
    kernel = SumKernel(parts) if parts else None
    table = {}
    for w, sym in ((w0, s0), (w1, s1)):
        if w == 0.0:
            continue
        for t in sym.shifts:
            table[t.xi] = table.get(t.xi, 0) + w * t.A
    shifts = tuple(ShiftTerm(xi, A) for xi, A in sorted(table.items()))
    if eta is None:
        eta = min(s0.eta, s1.eta)
    return Symbol(s0.n, kernel, shifts, eta)


class OperatorFamily:
    """Parameter-dependent symbol rho -> Symbol with identified limits.

    Three evaluation rules are supported: an affine homotopy between two
    symbols driven by sigma(rho) = (1 + tanh rho)/2, a tabulated path
    with entrywise linear interpolation, and an arbitrary user rule.
    `differentiable` marks rules smooth enough for crossing speeds.
    """

    def __init__(self, rho_min, rho_max, evaluate, s_minus, s_plus,
                 kind="rule", differentiable=True):
        if not rho_min < rho_max:
            raise ValueError("need rho_min < rho_max")
        self.rho_min = float(rho_min)
        self.rho_max = float(rho_max)
        self._evaluate = evaluate
        self.s_minus = s_minus
        self.s_plus = s_plus
        self.kind = kind
        self.differentiable = differentiable
        if s_minus.n != s_plus.n:
            raise ValueError("endpoint dimensions differ")
        self.n = s_minus.n

    def at(self, rho):
        rho = float(np.clip(rho, self.rho_min, self.rho_max))
        return self._evaluate(rho)

    @classmethod
    def affine_homotopy(cls, s0, s1, rho_min=-10.0, rho_max=10.0):
        def evaluate(rho):
            sig = 0.5 * (1.0 + np.tanh(rho))
            return combine_symbols(s0, s1, 1.0 - sig, sig)
        return cls(rho_min, rho_max, evaluate, s0, s1, kind="affine")

    @classmethod
    def tabulated(cls, points):
        pts = sorted(points, key=lambda p: p[0])
        if len(pts) < 2:
            raise ValueError("a tabulated path needs at least two points")
        rhos = np.array([p[0] for p in pts])
        syms = [p[1] for p in pts]

        def evaluate(rho):
            k = int(np.clip(np.searchsorted(rhos, rho) - 1, 0, len(rhos) - 2))
            t = (rho - rhos[k]) / (rhos[k + 1] - rhos[k])
            t = float(np.clip(t, 0.0, 1.0))
            return combine_symbols(syms[k], syms[k + 1], 1.0 - t, t)

        return cls(rhos[0], rhos[-1], evaluate, syms[0], syms[-1],
                   kind="tabulated", differentiable=False)

    @classmethod
    def from_rule(cls, rule, rho_min, rho_max, s_minus=None, s_plus=None):
        return cls(rho_min, rho_max, rule,
                   s_minus if s_minus is not None else rule(rho_min),
                   s_plus if s_plus is not None else rule(rho_max),
                   kind="rule")

    def endpoint_residual(self, probes=5):
        """Worst entrywise mismatch of Delta at the interval ends.

        Compared against the declared limits at 5 probe points on the
        imaginary axis; the family invariant requires <= 1e-8.
        """
        from .charmatrix import delta_eval
        ls = np.linspace(-2.0, 2.0, probes)
        nu = 1j * ls
        worst = 0.0
        for rho, ref in ((self.rho_min, self.s_minus), (self.rho_max, self.s_plus)):
            d_fam = delta_eval(self.at(rho), nu)
            d_ref = delta_eval(ref, nu)
            worst = max(worst, float(np.max(np.abs(d_fam - d_ref))))
        return worst


@dataclass
class HypothesisReport:
    """Numerical margins for the standing assumptions on a family.

    Margins are nonnegative numbers; the report passes when every margin
    exceeds its tolerance.  Failures are recorded, never raised.
    """

    loc_norm_minus: float
    loc_norm_plus: float
    shift_sum: float
    endpoint_residual: float
    margin_minus: float
    margin_plus: float
    strip_bound: float
    strip_ok: bool
    failures: list[str]

    @property
    def passed(self):
        return not self.failures


def check_hypotheses(family, tol_endpoint=1e-8, tol_margin=1e-10):
    """Verify localization, endpoint convergence and limit hyperbolicity.

    Reporting only: every violated condition appends a line to
    `failures`, and the margins are returned for inspection.
    """
    from .charmatrix import is_hyperbolic

    failures = []
    sm, sp = family.s_minus, family.s_plus
    strip_ok = True
    strip_bound = 0.0
    for name, sym in (("minus", sm), ("plus", sp)):
        if sym.kernel is not None:
            if sym.eta >= sym.kernel.strip:
                strip_ok = False
                failures.append(f"strip violation at {name} endpoint")
            else:
                res = np.linspace(-0.9 * sym.eta, 0.9 * sym.eta, 5)
                ims = np.linspace(-8.0, 8.0, 17)
                nu = (res[:, None] + 1j * ims[None, :]).ravel()
                try:
                    strip_bound = max(strip_bound,
                                      float(np.max(np.abs(sym.khat(nu)))))
                except Exception as exc:  # sampled tail violations land here
                    strip_ok = False
                    failures.append(f"transform evaluation failed at {name}: {exc}")
    res_end = family.endpoint_residual()
    if res_end > tol_endpoint:
        failures.append(
            f"endpoint residual {res_end:.3e} exceeds {tol_endpoint:.1e}")
    hyp_m = is_hyperbolic(sm)
    hyp_p = is_hyperbolic(sp)
    if not hyp_m.hyperbolic:
        failures.append("limit at -infinity is not hyperbolic")
    if not hyp_p.hyperbolic:
        failures.append("limit at +infinity is not hyperbolic")
    if min(hyp_m.margin, hyp_p.margin) <= tol_margin:
        failures.append("hyperbolicity margin below tolerance")
    return HypothesisReport(
        loc_norm_minus=sm.loc_norm,
        loc_norm_plus=sp.loc_norm,
        shift_sum=max(sm.shift_norm_sum(), sp.shift_norm_sum()),
        endpoint_residual=res_end,
        margin_minus=hyp_m.margin,
        margin_plus=hyp_p.margin,
        strip_bound=strip_bound,
        strip_ok=strip_ok,
        failures=failures,
    )
