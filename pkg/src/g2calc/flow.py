"""Time integration for the six-parameter family of 3-form evolutions.

The right-hand side assembled here is

    d(phi)/dt = (mu Ric + nu R g + a L_{V(T)} g + lam F) diamond phi
                + (b1 div T + b2 div T^t) interior psi,

optionally corrected by the Lie derivative of phi along the gauge vector
field W^k = g^{ij} (Gamma^k_ij - Gamma~^k_ij) - 2a (V(T))^k built from a
fixed background structure.  The same ``FlowParams`` record drives both
this module and the principal-symbol analysis, so a parameter choice can
be screened for ellipticity before it is integrated.

Integration uses classical fixed-step schemes (forward Euler and RK4).
Positivity of the evolving 3-form is re-validated whenever diagnostics
are collected; a failure raises ``PositivityLost`` carrying the time and
offending metric eigenvalue, and ``run_flow`` converts that into a clean
halt that retains the partial diagnostics history.

The two ``verify_*`` entry points are finite-difference oracles: they
deform ``phi`` along a prescribed direction field and compare measured
first variations of the metric, dual 4-form, volume, torsion, and the
quadratic torsion functionals against their closed-form counterparts.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .algebra import decompose_tensor2, diamond, circledcirc, v_op
from .frame import _E, NotPositive, t2_inner, t2_trace
from .fields.calculus import (
    christoffel,
    curvature,
    lie_derivative_metric,
    lie_derivative_phi,
    nabla,
)
from .fields.structure import StructureField
from .fields.torsion import mat_mul, mat_vec, torsion
from .symbols import FlowParams, assemble_flow_symbol

__all__ = [
    "PositivityLost",
    "FlowWarning",
    "FlowConfig",
    "FlowState",
    "DeTurckField",
    "DIAG_COLUMNS",
    "POSITIVITY_EPS",
    "deturck_field",
    "flow_rhs",
    "diagnostics_row",
    "flow_step",
    "run_flow",
    "cfl_advisory",
    "write_diagnostics",
    "config_to_dict",
    "EvolutionReport",
    "verify_evolution",
    "evolution_richardson",
    "GRADIENT_FUNCTIONALS",
    "functional_gradients",
    "GradientReport",
    "verify_functional_gradients",
]

POSITIVITY_EPS = 1e-10


class PositivityLost(RuntimeError):
    """The evolving 3-form stopped inducing a positive-definite metric."""

    def __init__(self, t: float, min_eig: float, row: dict | None = None):
        super().__init__(f"positivity lost at t={t}: min metric eigenvalue {min_eig}")
        self.t = float(t)
        self.min_eig = float(min_eig)
        self.row = row


class FlowWarning(UserWarning):
    """Advisory raised for risky but not fatal flow configurations."""


# ---------------------------------------------------------------------------
# configuration and state


@dataclass(frozen=True)
class FlowConfig:
    params: FlowParams
    dt: float
    steps: int
    deturck: bool = False
    background: StructureField | None = None
    integrator: str = "rk4"
    diagnostics_every: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.steps < 0:
            raise ValueError(f"steps must be nonnegative, got {self.steps}")
        if self.integrator not in ("euler", "rk4"):
            raise ValueError(f"unknown integrator {self.integrator!r}")
        if self.diagnostics_every < 1:
            raise ValueError("diagnostics_every must be at least 1")
        if self.deturck and self.background is None:
            raise ValueError("gauge-fixed runs need a background field")


@dataclass
class FlowState:
    t: float
    sf: StructureField
    diagnostics: list = field(default_factory=list)
    step_count: int = 0
    halted: dict | None = None


@dataclass(frozen=True)
class DeTurckField:
    """Gauge vector field, stored with both index placements."""

    vector: np.ndarray
    covector: np.ndarray

    def max_abs(self) -> float:
        return float(np.abs(self.vector).max())


def deturck_field(sf: StructureField, background: StructureField, a: float = 0.0, tp=None) -> DeTurckField:
    """W^k = g^{ij}(Gamma^k_ij - Gamma~^k_ij) - 2a (V(T))^k against a fixed
    background structure on the same grid."""
    if background.grid != sf.grid:
        raise ValueError("background lives on a different grid")
    dgam = christoffel(sf) - christoffel(background)
    w_up = _E("...ij,...ijk->...k", sf.ginv, dgam)
    if a != 0.0:
        tp = torsion(sf) if tp is None else tp
        w_up = w_up - 2.0 * a * _E("...kl,...l->...k", sf.ginv, tp.VT)
    w_cov = _E("...kl,...l->...k", sf.g, w_up)
    return DeTurckField(vector=w_up, covector=w_cov)


# ---------------------------------------------------------------------------
# right-hand side


def _interior_psi(sf: StructureField, y: np.ndarray) -> np.ndarray:
    """(Y interior psi)_ijk = Y^p psi_pijk for a covector field Y."""
    return _E("...p,...pq,...qijk->...ijk", y, sf.ginv, sf.psi)


def flow_rhs(
    sf: StructureField,
    params: FlowParams,
    deturck: bool = False,
    background: StructureField | None = None,
) -> np.ndarray:
    """d(phi)/dt for the parameter family, as an alternating 3-tensor field."""
    tp = torsion(sf)
    b = np.zeros(sf.grid.shape + (7, 7))
    if params.mu != 0.0 or params.nu != 0.0 or params.lam != 0.0:
        cv = curvature(sf)
        if params.mu != 0.0:
            b = b + params.mu * cv.ricci
        if params.nu != 0.0:
            b = b + params.nu * cv.scalar[..., None, None] * sf.g
        if params.lam != 0.0:
            b = b + params.lam * cv.fmap
    if params.a != 0.0:
        b = b + params.a * lie_derivative_metric(sf, tp.VT)
    out = diamond(b, sf.phi, sf.fp)
    y = params.b1 * tp.divT + params.b2 * tp.divTt
    if params.b1 != 0.0 or params.b2 != 0.0:
        out = out + _interior_psi(sf, y)
    if deturck:
        if background is None:
            raise ValueError("gauge-fixed right-hand side needs a background field")
        w = deturck_field(sf, background, params.a, tp=tp)
        out = out + lie_derivative_phi(sf, w.covector)
    return out


# ---------------------------------------------------------------------------
# diagnostics


DIAG_COLUMNS = (
    "t",
    "normT2",
    "normT1_2",
    "normT27_2",
    "normT7_2",
    "normT14_2",
    "int_R",
    "min_eig_g",
    "int_vol",
)

_DENSITY_KEYS = ("normT2", "normT1_2", "normT27_2", "normT7_2", "normT14_2")


def diagnostics_row(sf: StructureField, t: float) -> dict:
    """One diagnostics record: torsion component norms, total scalar
    curvature, metric positivity margin, and total volume."""
    dens = torsion(sf).scalar_densities()
    row = {"t": float(t)}
    for key in _DENSITY_KEYS:
        row[key] = sf.integrate(dens[key])
    row["int_R"] = sf.integrate(curvature(sf).scalar)
    row["min_eig_g"] = sf.min_eig_g()
    row["int_vol"] = sf.total_volume()
    return row


def write_diagnostics(state: FlowState, path: str) -> str:
    """Diagnostics history as CSV with a fixed column order."""
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(DIAG_COLUMNS)
        for row in state.diagnostics:
            wr.writerow([repr(float(row[c])) for c in DIAG_COLUMNS])
    return path


def config_to_dict(cfg: FlowConfig, background_path: str | None = None) -> dict:
    """JSON-ready echo of a flow configuration."""
    return {
        "params": cfg.params.to_dict(),
        "dt": cfg.dt,
        "steps": cfg.steps,
        "deturck": cfg.deturck,
        "background": background_path,
        "integrator": cfg.integrator,
        "diagnostics_every": cfg.diagnostics_every,
    }


# ---------------------------------------------------------------------------
# stepping


def _field_at(grid, phi: np.ndarray, meta, t: float) -> StructureField:
    try:
        return StructureField(grid, phi, meta=meta)
    except NotPositive as exc:
        raise PositivityLost(t, float("-inf")) from exc


def flow_step(state: FlowState, cfg: FlowConfig) -> FlowState:
    """Advance one fixed time step, appending diagnostics on schedule."""
    sf = state.sf
    dt = cfg.dt
    t0 = state.t

    def rhs(s: StructureField) -> np.ndarray:
        return flow_rhs(s, cfg.params, deturck=cfg.deturck, background=cfg.background)

    if cfg.integrator == "euler":
        phi1 = sf.phi + dt * rhs(sf)
    else:
        k1 = rhs(sf)
        s2 = _field_at(sf.grid, sf.phi + 0.5 * dt * k1, sf.meta, t0 + 0.5 * dt)
        k2 = rhs(s2)
        s3 = _field_at(sf.grid, sf.phi + 0.5 * dt * k2, sf.meta, t0 + 0.5 * dt)
        k3 = rhs(s3)
        s4 = _field_at(sf.grid, sf.phi + dt * k3, sf.meta, t0 + dt)
        k4 = rhs(s4)
        phi1 = sf.phi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    t1 = t0 + dt
    nsf = _field_at(sf.grid, phi1, sf.meta, t1)
    count = state.step_count + 1
    diags = state.diagnostics
    if count % cfg.diagnostics_every == 0:
        row = diagnostics_row(nsf, t1)
        if row["min_eig_g"] < POSITIVITY_EPS:
            raise PositivityLost(t1, row["min_eig_g"], row=row)
        diags = diags + [row]
    return FlowState(t=t1, sf=nsf, diagnostics=diags, step_count=count)


def _stencil_eig(m: int, h: float) -> float:
    return (8.0 * np.sin(m * h) - np.sin(2.0 * m * h)) / (6.0 * h)


def cfl_advisory(cfg: FlowConfig, sf: StructureField, n_xi: int = 8) -> dict:
    """Crude stability estimate dt * max|symbol eig| * |xi_max|^2 against the
    stability interval of the integrator.  Emits a warning, never an error."""
    rng = np.random.default_rng(0)
    scale = 0.0
    for _ in range(n_xi):
        xi = rng.standard_normal(7)
        xi /= np.linalg.norm(xi)
        sm = assemble_flow_symbol(cfg.params, xi=xi, deturck=cfg.deturck)
        scale = max(scale, float(np.abs(sm.sym_eigenvalues()).max()))
    xi2 = 0.0
    for h, n in zip(sf.grid.spacings, sf.grid.sizes):
        xi2 += max(_stencil_eig(m, h) ** 2 for m in range(n // 2 + 1))
    return {"scale": scale, "xi2_max": xi2}


def run_flow(cfg: FlowConfig, initial: StructureField) -> FlowState:
    """Integrate the configured flow; a positivity failure halts cleanly and
    the partial diagnostics history is kept on the returned state."""
    if cfg.deturck and not cfg.params.strongly_elliptic_conditions:
        warnings.warn(
            "gauge-fixed run with parameters outside the strong-ellipticity region",
            FlowWarning,
            stacklevel=2,
        )
    _advise_stability(cfg, initial)
    state = FlowState(
        t=0.0,
        sf=initial,
        diagnostics=[diagnostics_row(initial, 0.0)],
        step_count=0,
    )
    if state.diagnostics[0]["min_eig_g"] < POSITIVITY_EPS:
        return replace(
            state,
            halted={"t": 0.0, "min_eig": state.diagnostics[0]["min_eig_g"]},
        )
    for _ in range(cfg.steps):
        try:
            state = flow_step(state, cfg)
        except PositivityLost as exc:
            diags = state.diagnostics + ([exc.row] if exc.row is not None else [])
            return replace(
                state,
                diagnostics=diags,
                halted={"t": exc.t, "min_eig": exc.min_eig},
            )
    return state


def _advise_stability(cfg: FlowConfig, sf: StructureField) -> None:
    info = cfl_advisory(cfg, sf)
    budget = 2.78 if cfg.integrator == "rk4" else 2.0
    estimate = cfg.dt * info["scale"] * info["xi2_max"]
    if estimate > budget:
        warnings.warn(
            f"time step looks unstable: dt*max|eig|*|xi_max|^2 = {estimate:.3g} "
            f"exceeds the {cfg.integrator} stability budget {budget}",
            FlowWarning,
            stacklevel=3,
        )


# ---------------------------------------------------------------------------
# first-variation oracles


def _direction_pair(a: np.ndarray, fp) -> tuple[np.ndarray, np.ndarray]:
    """Split a 2-tensor direction A into (h, X) with
    A diamond phi = h diamond phi + X interior psi."""
    d = decompose_tensor2(a, fp)
    h = d.trace_part() + d.sym0
    x = -0.5 * d.vec7
    return h, x


@dataclass(frozen=True)
class EvolutionReport:
    eps: float
    residuals: dict

    def max_residual(self) -> float:
        return max(self.residuals.values())


def _torsion_rate(sf: StructureField, a: np.ndarray) -> np.ndarray:
    """Closed-form first variation of the full torsion along A:
    dT_pq = (1/2)(nab_i A_pj + nab_i A_jp - nab_p A_ij) phi^{ij}_q
            + T_p^k A_qk."""
    na = nabla(sf, a, 2)
    combo = na + np.swapaxes(na, -1, -2) - np.swapaxes(na, -3, -2)
    principal = 0.5 * _E(
        "...ipj,...ia,...jb,...abq->...pq", combo, sf.ginv, sf.ginv, sf.phi
    )
    tp = torsion(sf)
    lot = _E("...pk,...kl,...ql->...pq", tp.T, sf.ginv, a)
    return principal + lot


def verify_evolution(sf: StructureField, a: np.ndarray, eps: float = 1e-4) -> EvolutionReport:
    """Deform phi along A diamond phi and compare centered differences of g,
    psi, vol, and T against their closed-form rates."""
    a = np.asarray(a, dtype=float)
    if a.shape != sf.grid.shape + (7, 7):
        raise ValueError(f"direction field has shape {a.shape}")
    dphi = diamond(a, sf.phi, sf.fp)
    sp = StructureField(sf.grid, sf.phi + eps * dphi)
    sm = StructureField(sf.grid, sf.phi - eps * dphi)

    def rate(plus, minus):
        return (plus - minus) / (2.0 * eps)

    res = {}
    res["g"] = float(np.abs(rate(sp.g, sm.g) - (a + np.swapaxes(a, -1, -2))).max())
    res["psi"] = float(np.abs(rate(sp.psi, sm.psi) - diamond(a, sf.psi, sf.fp)).max())
    tra = t2_trace(a, sf.ginv)
    res["vol"] = float(np.abs(rate(sp.vol, sm.vol) - tra * sf.vol).max())
    res["torsion"] = float(
        np.abs(rate(torsion(sp).T, torsion(sm).T) - _torsion_rate(sf, a)).max()
    )
    return EvolutionReport(eps=eps, residuals=res)


def evolution_richardson(sf: StructureField, a: np.ndarray, eps: float = 1e-4) -> dict:
    """Residual ratios under halving of the deformation step; a ratio near 4
    certifies that the closed-form rate matches through second order."""
    coarse = verify_evolution(sf, a, eps=eps).residuals
    fine = verify_evolution(sf, a, eps=0.5 * eps).residuals
    floor = 1e-13
    return {k: coarse[k] / max(fine[k], floor) for k in coarse}


# ---------------------------------------------------------------------------
# functional gradients


GRADIENT_FUNCTIONALS = (
    "trT2",
    "normT2",
    "TTt",
    "TPT",
    "normT1_2",
    "normT27_2",
    "normT7_2",
    "normT14_2",
)


def _sym(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + np.swapaxes(m, -1, -2))


def functional_gradients(sf: StructureField) -> dict:
    """Gradients of the integrated quadratic torsion invariants.

    Each value is a pair (hpart, xpart): for a deformation with direction
    (h, X) the first variation of the functional is the integral of
    <hpart, h> + <xpart, X>.  The four component-norm entries are the exact
    pointwise linear combinations of the four primary invariants."""
    fp = sf.fp
    g, ginv = sf.g, sf.ginv
    tp = torsion(sf)
    cv = curvature(sf)
    T = tp.T
    Tt = np.swapaxes(T, -1, -2)
    PT = tp.PT
    VT = tp.VT
    trT = tp.trT[..., None, None]
    s = tp.scalar_densities()
    ric = cv.ricci
    fmap = cv.fmap
    scal = cv.scalar[..., None, None]

    T2 = mat_mul(T, T, ginv)
    TTt_m = mat_mul(T, Tt, ginv)
    TPT_m = mat_mul(T, PT, ginv)
    PTT_m = mat_mul(PT, T, ginv)
    TVT = mat_vec(T, VT, ginv)
    VT2 = v_op(T2, fp)
    TcT = circledcirc(T, T, fp)
    lievt = lie_derivative_metric(sf, tp.VT)
    Tsym = _sym(T)

    grads = {
        "trT2": (
            s["trT2"][..., None, None] * g - 2.0 * trT * Tsym,
            -2.0 * tp.divTt + 2.0 * TVT - 2.0 * tp.trT[..., None] * VT,
        ),
        "normT2": (
            2.0 * ric
            + lievt
            + s["normT2"][..., None, None] * g
            - 2.0 * trT * Tsym
            + 2.0 * _sym(T2)
            - 2.0 * TTt_m
            - 2.0 * _sym(TPT_m),
            -2.0 * tp.divT,
        ),
        "TTt": (
            0.5 * fmap
            + s["TTt"][..., None, None] * g
            + _sym(TcT)
            - 2.0 * _sym(T2)
            + 2.0 * _sym(PTT_m),
            -2.0 * tp.divTt - 2.0 * VT2,
        ),
        "TPT": (
            2.0 * ric
            - 0.5 * fmap
            - scal * g
            + (s["trT2"] - s["TTt"])[..., None, None] * g
            - _sym(TcT)
            - 2.0 * trT * Tsym
            + 2.0 * _sym(T2)
            - 2.0 * _sym(PTT_m),
            -2.0 * tp.trT[..., None] * VT + 2.0 * VT2 + 2.0 * TVT,
        ),
    }

    def combo(parts):
        hs = sum(c * grads[k][0] for k, c in parts)
        xs = sum(c * grads[k][1] for k, c in parts)
        return hs, xs

    grads["normT1_2"] = combo([("trT2", 1.0 / 7.0)])
    grads["normT27_2"] = combo([("normT2", 0.5), ("TTt", 0.5), ("trT2", -1.0 / 7.0)])
    grads["normT7_2"] = combo(
        [("normT2", 1.0 / 6.0), ("TTt", -1.0 / 6.0), ("TPT", -1.0 / 6.0)]
    )
    grads["normT14_2"] = combo(
        [("normT2", 1.0 / 3.0), ("TTt", -1.0 / 3.0), ("TPT", 1.0 / 6.0)]
    )
    return grads


@dataclass(frozen=True)
class GradientReport:
    eps: float
    rows: dict

    def max_residual(self) -> float:
        return max(r["residual"] for r in self.rows.values())


def verify_functional_gradients(
    sf: StructureField, a: np.ndarray, eps: float = 1e-4
) -> GradientReport:
    """Centered difference of each integrated invariant along A diamond phi
    against the gradient pairing <hpart, h> + <xpart, X>."""
    a = np.asarray(a, dtype=float)
    h, x = _direction_pair(a, sf.fp)
    dphi = diamond(a, sf.phi, sf.fp)
    sp = StructureField(sf.grid, sf.phi + eps * dphi)
    sm = StructureField(sf.grid, sf.phi - eps * dphi)
    dens_p = torsion(sp).scalar_densities()
    dens_m = torsion(sm).scalar_densities()
    grads = functional_gradients(sf)
    rows = {}
    for name in GRADIENT_FUNCTIONALS:
        fd = (sp.integrate(dens_p[name]) - sm.integrate(dens_m[name])) / (2.0 * eps)
        hpart, xpart = grads[name]
        dens = t2_inner(hpart, h, sf.ginv) + _E(
            "...a,...ab,...b->...", xpart, sf.ginv, x
        )
        predicted = sf.integrate(dens)
        rows[name] = {
            "fd": fd,
            "formula": predicted,
            "residual": abs(fd - predicted),
        }
    return GradientReport(eps=eps, rows=rows)
