"""JSON configuration parsing for symbols, families and models.

Complex scalars are encoded as [re, im]; plain numbers are real.
Matrices are nested lists.  Kernels, symbols and families follow the
schemas documented in the README; validation errors carry the offending
key path and map to CLI exit code 2.
"""

from __future__ import annotations

import json

import numpy as np

from .conslaw import ShockModel
from .edgebif import EdgeModel
from .errors import ConfigurationError
from .kernels import (ExpPolyKernel, SampledKernel, SumKernel,
                      exponential_kernel, gaussian_kernel,
                      one_sided_exponential_kernel)
from .symbols import OperatorFamily, ShiftTerm, Symbol

__all__ = [
    "load_config", "symbol_from_json", "family_from_json",
    "shock_model_from_json", "edge_model_from_json", "kernel_from_json",
]

_SAFE_FUNCS = {
    "tanh": np.tanh, "exp": np.exp, "sin": np.sin, "cos": np.cos,
    "sqrt": np.sqrt, "abs": np.abs, "pi": np.pi, "cosh": np.cosh,
    "sinh": np.sinh,
}


def _fail(path, msg):
    raise ConfigurationError(f"{path}: {msg}")


def _complex_entry(v, path):
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(v[0], v[1])
    _fail(path, f"expected a number or [re, im] pair, got {v!r}")


def _matrix(v, path, n=None):
    if not isinstance(v, list):
        _fail(path, "expected a matrix (list of rows)")
    M = np.array([[_complex_entry(x, path) for x in row] for row in v])
    if M.shape[0] != M.shape[1]:
        _fail(path, f"matrix must be square, got {M.shape}")
    if n is not None and M.shape[0] != n:
        _fail(path, f"expected dimension {n}, got {M.shape[0]}")
    if np.abs(M.imag).max() == 0:
        M = M.real
    return M


def kernel_from_json(spec, n, path="kernel"):
    if spec is None:
        return None
    family = spec.get("family")
    if family == "exponential":
        return exponential_kernel(float(spec["a"]), _matrix(spec["M"], path + ".M", n))
    if family == "one_sided_exponential":
        return one_sided_exponential_kernel(
            float(spec["a"]), _matrix(spec["M"], path + ".M", n),
            side=int(spec.get("side", 1)))
    if family == "gaussian":
        return gaussian_kernel(float(spec["sigma"]), _matrix(spec["M"], path + ".M", n))
    if family == "exp_poly":
        terms = [(int(t.get("side", 1)), float(t["rate"]), int(t.get("power", 0)),
                  _matrix(t["C"], path + ".terms.C", n))
                 for t in spec["terms"]]
        return ExpPolyKernel(n, terms)
    if family == "sampled":
        samples = np.array([[[_complex_entry(x, path + ".samples") for x in row]
                             for row in mat] for mat in spec["samples"]])
        return SampledKernel(float(spec["h"]), samples, float(spec["eta0"]),
                             tol_tail=float(spec.get("tol_tail", 1e-6)))
    if family == "sum":
        return SumKernel([kernel_from_json(p, n, path + ".parts")
                          for p in spec["parts"]])
    _fail(path, f"unknown kernel family {family!r}")


def symbol_from_json(spec, path="symbol"):
    try:
        n = int(spec["n"])
        eta = float(spec["eta"])
    except KeyError as exc:
        _fail(path, f"missing key {exc}")
    kernel = kernel_from_json(spec.get("kernel"), n, path + ".kernel")
    shifts = []
    for k, sh in enumerate(spec.get("shifts", [])):
        shifts.append(ShiftTerm(float(sh["xi"]),
                                _matrix(sh["A"], f"{path}.shifts[{k}].A", n)))
    try:
        return Symbol(n, kernel, tuple(shifts), eta)
    except Exception as exc:
        _fail(path, str(exc))


def _rule_family(spec, path):
    n = int(spec["n"])
    eta = float(spec["eta"])
    kernel = kernel_from_json(spec.get("kernel"), n, path + ".kernel")
    exprs = spec["shift_matrix_exprs"]
    compiled = [[compile(e, "<config>", "eval") for e in row] for row in exprs]
    rho_min = float(spec.get("rho_min", -10.0))
    rho_max = float(spec.get("rho_max", 10.0))

    def rule(rho):
        env = dict(_SAFE_FUNCS, rho=rho)
        A = np.array([[float(eval(c, {"__builtins__": {}}, env))
                       for c in row] for row in compiled])
        return Symbol(n, kernel, (ShiftTerm(0.0, A),), eta)

    return OperatorFamily.from_rule(rule, rho_min, rho_max)


def family_from_json(spec, path="family"):
    pspec = spec.get("path")
    if pspec is None:
        _fail(path, "missing 'path' section")
    kind = pspec.get("type")
    if kind == "affine":
        s0 = symbol_from_json(pspec["s0"], path + ".path.s0")
        s1 = symbol_from_json(pspec["s1"], path + ".path.s1")
        return OperatorFamily.affine_homotopy(
            s0, s1, rho_min=float(pspec.get("rho_min", -10.0)),
            rho_max=float(pspec.get("rho_max", 10.0)))
    if kind == "tabulated":
        pts = [(float(p["rho"]), symbol_from_json(p["symbol"], path + ".path"))
               for p in pspec["points"]]
        return OperatorFamily.tabulated(pts)
    if kind == "rule":
        return _rule_family(pspec, path + ".path")
    _fail(path, f"unknown path type {kind!r}")


def _source_from_json(spec, n, path="source"):
    kind = spec.get("type")
    if kind == "gaussian":
        vec = np.array([float(v) for v in spec["vector"]])
        width = float(spec.get("width", 1.0))
        center = float(spec.get("center", 0.0))

        def H(x):
            x = np.asarray(x, dtype=float)
            return np.exp(-((x - center) / width) ** 2)[:, None] * vec[None, :]
        return H, 1.0 / width
    if kind == "moment":
        # x * gaussian in a single component: odd first-moment source
        vec = np.array([float(v) for v in spec["vector"]])
        width = float(spec.get("width", 1.0))

        def H(x):
            x = np.asarray(x, dtype=float)
            return (x * np.exp(-(x / width) ** 2))[:, None] * vec[None, :]
        return H, 1.0 / width
    if kind == "expr":
        comp = [compile(e, "<config>", "eval") for e in spec["exprs"]]
        if len(comp) != n:
            _fail(path, f"need {n} component expressions")

        def H(x):
            x = np.asarray(x, dtype=float)
            env = dict(_SAFE_FUNCS)
            out = np.zeros((len(x), n))
            for j, c in enumerate(comp):
                env["x"] = x
                out[:, j] = eval(c, {"__builtins__": {}}, env)
            return out
        return H, float(spec.get("decay", 1.0))
    _fail(path, f"unknown source type {kind!r}")


def shock_model_from_json(spec, path="shock"):
    n = int(spec["n"])
    kernel = kernel_from_json(spec.get("kernel"), n, path + ".kernel")
    if kernel is None:
        _fail(path, "a shock model needs a convolution kernel")
    flux = spec.get("flux", {})
    dF = np.real(_matrix(flux["dF"], path + ".flux.dF", n))
    dG = np.real(_matrix(flux["dG"], path + ".flux.dG", n))
    F2 = np.array(flux["F2"], dtype=float) if "F2" in flux else None
    G2 = np.array(flux["G2"], dtype=float) if "G2" in flux else None
    source, decay = _source_from_json(spec["source"], n, path + ".source")
    return ShockModel(
        n=n, kernel=kernel, dF=dF, dG=dG, source=source, F2=F2, G2=G2,
        decay_delta=decay, eps_max=float(spec.get("eps_max", 0.05)),
        eta=float(spec.get("eta", 0.25)))


def _potential_from_json(spec, path):
    kind = spec.get("type", "gaussian")
    if kind == "gaussian":
        amp = float(spec.get("amplitude", 1.0))
        width = float(spec.get("width", 1.0))
        center = float(spec.get("center", 0.0))

        def V(x):
            x = np.asarray(x, dtype=float)
            return amp * np.exp(-((x - center) / width) ** 2)
        return V, 1.0 / width
    if kind == "expr":
        c = compile(spec["expr"], "<config>", "eval")

        def V(x):
            x = np.asarray(x, dtype=float)
            env = dict(_SAFE_FUNCS, x=x)
            return np.asarray(eval(c, {"__builtins__": {}}, env), dtype=float)
        return V, float(spec.get("decay", 1.0))
    _fail(path, f"unknown potential type {kind!r}")


def edge_model_from_json(spec, path="edge"):
    n = int(spec["n"])
    B = np.real(_matrix(spec["B"], path + ".B", n))
    kernel = kernel_from_json(spec.get("kernel"), n, path + ".kernel")
    dirac = (np.real(_matrix(spec["dirac"], path + ".dirac", n))
             if "dirac" in spec else None)
    pert = spec.get("perturbation", {})
    V, decay = _potential_from_json(pert.get("V", {}), path + ".perturbation.V")
    P = (np.real(_matrix(pert["matrix"], path + ".perturbation.matrix", n))
         if "matrix" in pert else None)
    pk = kernel_from_json(pert.get("kernel"), n, path + ".perturbation.kernel") \
        if "kernel" in pert else None
    if P is None and pk is None:
        _fail(path, "perturbation needs 'matrix' or 'kernel'")
    return EdgeModel(
        n=n, B=B, kernel=kernel, dirac=dirac, V=V, P=P, pert_kernel=pk,
        decay_delta=decay, eta=float(spec.get("eta", 0.5)),
        weight_eta=float(spec.get("weight_eta", 0.5)))


def load_config(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigurationError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"invalid JSON in {path}: {exc}")
