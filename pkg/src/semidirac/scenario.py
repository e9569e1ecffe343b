"""
Scenario files.

A scenario is a TOML document::

    model = "berry"                # berry | pauli | classical

    [constants]                    # optional, defaults m = c = e = hbar = 1
    hbar = 0.01

    [initial]
    r = [0.0, 0.0, 0.0]
    p = [0.1, 0.0, 0.0]

    [spin]
    S = [0.0, 0.0, 1.0]            # or chi = [re1, im1, re2, im2]

    [field]
    kind = "uniform"               # uniform | crossed_uniform | coulomb
    E0 = [1e-4, 0.0, 0.0]
    H0 = [0.0, 0.0, 0.0]

    [integrator]
    T = 20.0
    scheme = "rk45_adaptive"       # or rk4_fixed (needs dt)
    tol = 1e-10
    output_every = 0.1

    [analysis]                     # optional
    kind = "spin-hall"             # spin-hall | monopole | cyclotron | helicity

    [output]                       # optional
    path = "traj.csv"
    format = "csv"

    [sweep]                        # optional
    hbar = [0.1, 0.01, 0.001]

Validation is fail-fast: unknown keys, missing sections and inadmissible
values raise :class:`~semidirac.errors.ScenarioError` naming the offending
key. Physics-bearing entries (initial state, spin, field, ``T``) have no
defaults.
"""

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .constants import PhysConstants
from .dynamics import ParticleState, RhsModel, as_model
from .errors import PreconditionError, ScenarioError
from .fields import FieldConfig
from .spin import spin_from_spinor

ANALYSIS_KINDS = ("spin-hall", "monopole", "cyclotron", "helicity")
SCHEMES = ("rk45_adaptive", "rk4_fixed")

_SCHEMA = {
    "model": None,
    "constants": {"m", "c", "e", "hbar"},
    "initial": {"r", "p", "t"},
    "spin": {"S", "chi"},
    "field": {"kind", "E0", "H0", "Z", "softening"},
    "integrator": {"scheme", "dt", "tol", "atol", "T", "output_every"},
    "analysis": {"kind", "tolerance"},
    "output": {"path", "format"},
    "sweep": {"hbar"},
}
_REQUIRED = ("initial", "spin", "field", "integrator")
_FIELD_KEYS = {
    "uniform": ({"E0", "H0"}, set()),
    "crossed_uniform": ({"E0", "H0"}, set()),
    "coulomb": ({"Z", "softening"}, {"H0"}),
}


@dataclass(frozen=True)
class IntegratorSpec:
    T: float
    scheme: str = "rk45_adaptive"
    dt: Optional[float] = None
    tol: float = 1e-10
    atol: float = 1e-12
    output_every: Optional[float] = None

    def kwargs(self):
        return dict(scheme=self.scheme, T=self.T, dt=self.dt, tol=self.tol, atol=self.atol,
                    output_every=self.output_every)


@dataclass(frozen=True)
class Scenario:
    constants: PhysConstants
    initial: ParticleState
    field: FieldConfig
    integrator: IntegratorSpec
    model: RhsModel = RhsModel.BERRY_FULL
    analysis: Optional[dict] = None
    output_path: Optional[str] = None
    output_format: str = "csv"
    sweep_hbar: tuple = ()

    def with_overrides(self, hbar=None, tol=None, model=None):
        out = self
        if hbar is not None:
            out = replace(out, constants=out.constants.with_hbar(hbar))
        if tol is not None:
            if not tol > 0:
                raise ScenarioError("--tol must be positive")
            out = replace(out, integrator=replace(out.integrator, tol=float(tol)))
        if model is not None:
            out = replace(out, model=_model(model, "--model"))
        return out

    def sweep(self):
        """One scenario per sweep point (or just ``self`` without a sweep)."""
        if not self.sweep_hbar:
            return [self]
        return [self.with_overrides(hbar=h) for h in self.sweep_hbar]


def _number(v, key, positive=False, nonneg=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioError(f"{key}: expected a number, got {v!r}")
    v = float(v)
    if not math.isfinite(v):
        raise ScenarioError(f"{key}: value must be finite")
    if positive and not v > 0:
        raise ScenarioError(f"{key}: must be positive, got {v!r}")
    if nonneg and v < 0:
        raise ScenarioError(f"{key}: must be non-negative, got {v!r}")
    return v


def _vector(v, key, n=3):
    if not isinstance(v, list) or len(v) != n:
        raise ScenarioError(f"{key}: expected a list of {n} numbers, got {v!r}")
    return np.array([_number(x, f"{key}[{i}]") for i, x in enumerate(v)])


def _model(v, key):
    try:
        return as_model(v)
    except (ValueError, KeyError):
        raise ScenarioError(f"{key}: unknown model {v!r}") from None


def _check_keys(doc):
    for name, value in doc.items():
        if name not in _SCHEMA:
            keys = [f"{name}.{sub}" for sub in value] if isinstance(value, dict) and value else [name]
            raise ScenarioError("unknown key " + ", ".join(f"'{x}'" for x in keys))
        allowed = _SCHEMA[name]
        if allowed is None:
            continue
        if not isinstance(value, dict):
            raise ScenarioError(f"'{name}' must be a table")
        for sub in value:
            if sub not in allowed:
                raise ScenarioError(f"unknown key '{name}.{sub}'")
    for name in _REQUIRED:
        if name not in doc:
            raise ScenarioError(f"missing section [{name}]")


def _parse_constants(d):
    vals = {}
    for key in ("m", "c", "e", "hbar"):
        if key in d:
            vals[key] = _number(d[key], f"constants.{key}")
    try:
        return PhysConstants(**vals)
    except PreconditionError as exc:
        raise ScenarioError(f"constants: {exc}") from None


def _parse_spin(d):
    if ("S" in d) == ("chi" in d):
        raise ScenarioError("spin: give exactly one of spin.S or spin.chi")
    if "S" in d:
        S = _vector(d["S"], "spin.S")
        n = np.linalg.norm(S)
        if not n > 0:
            raise ScenarioError("spin.S: spin not normalizable")
        return S / n, None
    c = _vector(d["chi"], "spin.chi", n=4)
    chi = np.array([c[0] + 1j * c[1], c[2] + 1j * c[3]])
    n = np.linalg.norm(chi)
    if not n > 0:
        raise ScenarioError("spin.chi: spin not normalizable")
    chi = chi / n
    return spin_from_spinor(chi), chi


def _parse_field(d):
    kind = d.get("kind")
    if kind is None:
        raise ScenarioError("missing key 'field.kind'")
    if kind not in _FIELD_KEYS:
        raise ScenarioError(f"field.kind: unsupported kind {kind!r}; expected one of {tuple(_FIELD_KEYS)}")
    required, optional = _FIELD_KEYS[kind]
    for key in sorted(required):
        if key not in d:
            raise ScenarioError(f"missing key 'field.{key}' for kind {kind!r}")
    for key in d:
        if key != "kind" and key not in required | optional:
            raise ScenarioError(f"field.{key}: not used by kind {kind!r}")
    try:
        if kind == "coulomb":
            H0 = _vector(d["H0"], "field.H0") if "H0" in d else (0.0, 0.0, 0.0)
            return FieldConfig.coulomb(
                _number(d["Z"], "field.Z"), _number(d["softening"], "field.softening", positive=True), H0=H0
            )
        E0, H0 = _vector(d["E0"], "field.E0"), _vector(d["H0"], "field.H0")
        return FieldConfig(kind, E0=E0, H0=H0)
    except PreconditionError as exc:
        raise ScenarioError(f"field: {exc}") from None


def _parse_integrator(d):
    if "T" not in d:
        raise ScenarioError("missing key 'integrator.T'")
    kw = {"T": _number(d["T"], "integrator.T", positive=True)}
    scheme = d.get("scheme", "rk45_adaptive")
    if scheme not in SCHEMES:
        raise ScenarioError(f"integrator.scheme: unknown scheme {scheme!r}; expected one of {SCHEMES}")
    kw["scheme"] = scheme
    for key in ("dt", "tol", "atol", "output_every"):
        if key in d:
            kw[key] = _number(d[key], f"integrator.{key}", positive=True)
    if scheme == "rk4_fixed" and "dt" not in kw:
        raise ScenarioError("integrator.dt is required for scheme 'rk4_fixed'")
    return IntegratorSpec(**kw)


def _parse_analysis(d):
    if d is None:
        return None
    kind = d.get("kind")
    if kind not in ANALYSIS_KINDS:
        raise ScenarioError(f"analysis.kind: expected one of {ANALYSIS_KINDS}, got {kind!r}")
    out = {"kind": kind}
    if "tolerance" in d:
        out["tolerance"] = _number(d["tolerance"], "analysis.tolerance", positive=True)
    return out


def parse_scenario(text):
    """Parse and validate a TOML scenario string."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"malformed scenario: {exc}") from None
    _check_keys(doc)

    k = _parse_constants(doc.get("constants", {}))
    ini = doc["initial"]
    for key in ("r", "p"):
        if key not in ini:
            raise ScenarioError(f"missing key 'initial.{key}'")
    S, chi = _parse_spin(doc["spin"])
    t0 = _number(ini["t"], "initial.t") if "t" in ini else 0.0
    state = ParticleState(t0, _vector(ini["r"], "initial.r"), _vector(ini["p"], "initial.p"), S, chi)

    model = _model(doc.get("model", "berry"), "model")
    out = doc.get("output", {})
    fmt = out.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ScenarioError(f"output.format: expected 'csv' or 'json', got {fmt!r}")
    sweep = doc.get("sweep", {}).get("hbar", [])
    if not isinstance(sweep, list):
        raise ScenarioError("sweep.hbar: expected a list")
    sweep = tuple(_number(h, f"sweep.hbar[{i}]", nonneg=True) for i, h in enumerate(sweep))

    return Scenario(
        constants=k,
        initial=state,
        field=_parse_field(doc["field"]),
        integrator=_parse_integrator(doc["integrator"]),
        model=model,
        analysis=_parse_analysis(doc.get("analysis")),
        output_path=out.get("path"),
        output_format=fmt,
        sweep_hbar=sweep,
    )


def load_scenario(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from None
    return parse_scenario(text)
