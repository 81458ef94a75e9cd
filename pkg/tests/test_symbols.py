import numpy as np
import pytest

from specflow.charmatrix import delta_eval
from specflow.errors import StripViolation
from specflow.kernels import exponential_kernel, gaussian_kernel
from specflow.symbols import (OperatorFamily, ShiftTerm, Symbol,
                              check_hypotheses, weight_shift)

from conftest import random_scalar_symbol


def test_symbol_validation():
    K = exponential_kernel(2.0, [[1.0]])
    with pytest.raises(StripViolation):
        Symbol(1, K, (), 2.5)          # eta beyond the kernel strip
    with pytest.raises(ValueError):
        Symbol(1, K, (ShiftTerm(0.0, [[1.0]]), ShiftTerm(0.0, [[2.0]])), 1.0)
    sym = Symbol(1, K, (ShiftTerm(1.0, [[0.5]]),), 1.0)
    assert sym.loc_norm == pytest.approx(0.5 * np.e, rel=1e-12)


def test_weight_shift_identity_and_zero(rng):
    sym = random_scalar_symbol(rng, want_hyperbolic=False)
    assert weight_shift(sym, 0.0) is sym
    gamma = 0.2
    shifted = weight_shift(sym, gamma)
    for _ in range(20):
        nu = complex(rng.uniform(-0.5, 0.5), rng.uniform(-5, 5))
        lhs = delta_eval(shifted, np.array(nu))
        rhs = delta_eval(sym, np.array(nu - gamma))
        assert np.abs(lhs - rhs).max() < 1e-12


def test_weight_shift_pure_shift_matrix():
    sym = Symbol(1, None, (ShiftTerm(0.0, [[1.3]]),), 2.0)
    shifted = weight_shift(sym, 0.4)
    assert shifted.shifts[0].A[0, 0] == pytest.approx(1.7)


def test_weight_shift_nonzero_offsets_scale():
    A = np.array([[0.5]])
    sym = Symbol(1, None, (ShiftTerm(0.0, [[0.1]]), ShiftTerm(1.5, A)), 2.0)
    shifted = weight_shift(sym, 0.3)
    xi_map = {s.xi: s.A for s in shifted.shifts}
    assert xi_map[1.5][0, 0] == pytest.approx(0.5 * np.exp(0.3 * 1.5))


def test_affine_family_endpoint_agreement(rng):
    s0 = random_scalar_symbol(rng)
    s1 = random_scalar_symbol(rng)
    fam = OperatorFamily.affine_homotopy(s0, s1)
    assert fam.endpoint_residual() <= 1e-8


def test_tabulated_family_interpolates(rng):
    s0 = random_scalar_symbol(rng, want_hyperbolic=False)
    s1 = random_scalar_symbol(rng, want_hyperbolic=False)
    fam = OperatorFamily.tabulated([(0.0, s0), (1.0, s1)])
    mid = fam.at(0.5)
    nu = 0.1 + 0.4j
    ref = 0.5 * (delta_eval(s0, np.array(nu)) + delta_eval(s1, np.array(nu)))
    assert np.abs(delta_eval(mid, np.array(nu)) - ref).max() < 1e-12


def test_check_hypotheses_passing(rng):
    s0 = random_scalar_symbol(rng)
    s1 = random_scalar_symbol(rng)
    rep = check_hypotheses(OperatorFamily.affine_homotopy(s0, s1))
    assert rep.passed
    assert rep.margin_minus > 0 and rep.margin_plus > 0


def test_check_hypotheses_endpoint_mismatch(rng):
    s0 = random_scalar_symbol(rng)
    s1 = random_scalar_symbol(rng)
    other = Symbol(1, gaussian_kernel(1.0, [[0.4]]),
                   (ShiftTerm(0.0, [[0.9]]),), 1.2)
    fam = OperatorFamily.tabulated([(0.0, s0), (1.0, s1)])
    # declare a wrong limit on purpose
    fam.s_plus = other
    rep = check_hypotheses(fam)
    assert not rep.passed
    assert any("endpoint" in msg for msg in rep.failures)


def test_check_hypotheses_nonhyperbolic_limit():
    sym = Symbol(1, None, (ShiftTerm(0.0, [[0.0]]),), 1.0)  # root on axis
    fam = OperatorFamily.affine_homotopy(sym, sym)
    rep = check_hypotheses(fam)
    assert not rep.passed


def test_fourier_eval_frontend():
    from specflow.symbols import fourier_eval
    from specflow.kernels import exponential_kernel
    K = exponential_kernel(2.0, [[1.0]])
    assert fourier_eval(K, 0.0)[0, 0] == pytest.approx(1.0, abs=1e-12)
    nu = 0.3 + 1.1j
    assert fourier_eval(K, nu, 1)[0, 0] == pytest.approx(
        K.transform(nu, 1)[0, 0], abs=1e-14)
    with pytest.raises(StripViolation):
        fourier_eval(K, 2.3)


def test_strip_violations_rejected_at_construction():
    # a declared strip wider than the kernel decay cannot be represented
    from specflow.kernels import sample_kernel, exponential_kernel
    K = exponential_kernel(2.0, [[1.0]])
    S = sample_kernel(K, h=0.02, R=14.0, eta0=2.0)
    with pytest.raises(StripViolation):
        Symbol(1, S, (ShiftTerm(0.0, [[1.0]]),), 2.5)
