"""Closed-form bounds on the extremal eigenvalues and their verification.

The two-sided estimates evaluated here:

* belsup(m)  <= Lambda(m) <= min(Lambda_D, m/|Omega|)
* inflow(m)  <= lambda(m) <= min(lambda_1(Omega), m/|Omega|)   (p > dim)

where belsup and inflow share the closed form
m * L / ((|Omega| L)^{1/(p-1)} + m^{1/(p-1)})^{p-1} with L the Dirichlet
eigenvalue respectively the minimal point-constrained eigenvalue. All
inequalities are checked against the discrete quantities computed on the
same mesh, with a relative slack of 1e-3 absorbing solver tolerance
stacking; any violation beyond slack produces a failing report, never a
silent pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .energy import SolverParams
from .errors import ConfigError
from .maximizer import _FCache, dirichlet_ceiling, sigma_max
from .mesh import Mesh
from .minimizer import lambda_inf, scan_point_eigen

__all__ = ["belsup", "inflow", "inradius_bound", "check_all", "BoundsReport", "BoundsRow"]

_SLACK = 1e-3


def _lower_bound_form(m, level, volume, p):
    return m * level / ((volume * level) ** (1.0 / (p - 1.0)) + m ** (1.0 / (p - 1.0))) ** (p - 1.0)


def belsup(m: float, lam_dirichlet: float, volume: float, p: float) -> float:
    """Lower bound for the maximal eigenvalue Lambda(m)."""
    if min(m, lam_dirichlet, volume) <= 0 or p <= 1:
        raise ConfigError("belsup needs positive m, eigenvalue, volume and p > 1")
    return _lower_bound_form(m, lam_dirichlet, volume, p)


def inflow(m: float, lambda1_omega: float | None, volume: float, p: float, dim: int | None = None) -> float:
    """Lower bound for the minimal eigenvalue lambda(m); 0 when p <= dim.

    For p <= dim every quantity in the inequality vanishes, so the bound is
    trivially 0 (returned, with the caller expected to note it).
    """
    if dim is not None and p <= dim:
        return 0.0
    if lambda1_omega is None:
        return 0.0
    if min(m, lambda1_omega, volume) <= 0 or p <= 1:
        raise ConfigError("inflow needs positive m, eigenvalue, volume and p > 1")
    return _lower_bound_form(m, lambda1_omega, volume, p)


def inradius_bound(sigma_const: float, inradius: float | None, p: float) -> float:
    """Convex-domain lower bound for a constant weight in terms of the inradius."""
    if inradius is None:
        raise ConfigError("inradius bound needs a convex domain (inradius unset)")
    if sigma_const < 0:
        raise ConfigError("constant weight must be nonnegative")
    if sigma_const == 0.0:
        return 0.0
    r = float(inradius)
    return ((p - 1.0) / p) ** p * sigma_const / (
        r * (1.0 + sigma_const ** (1.0 / (p - 1.0)) * r) ** (p - 1.0)
    )


@dataclass
class BoundsRow:
    m: float
    belsup: float
    Lambda: float
    upper: float               # min(Lambda_D, m/|Omega|)
    inflow: float | None
    lam: float | None
    upper2: float | None       # min(lambda1(Omega), m/|Omega|)
    ok: bool
    slack_used: float
    inradius_bound: float | None = None   # constant-weight bound, convex domains

    def to_dict(self):
        return {
            "m": self.m, "belsup": self.belsup, "Lambda": self.Lambda,
            "upper": self.upper, "inflow": self.inflow, "lambda": self.lam,
            "upper2": self.upper2, "ok": self.ok, "slack_used": self.slack_used,
            "inradius_bound": self.inradius_bound,
        }


@dataclass
class BoundsReport:
    p: float
    dim: int
    volume: float
    lam_dirichlet: float
    lambda1_omega: float | None
    inradius: float | None = None
    rows: list = field(default_factory=list)
    all_pass: bool = True
    note: str | None = None

    def to_dict(self):
        return {
            "p": self.p, "dim": self.dim, "volume": self.volume,
            "lam_dirichlet": self.lam_dirichlet,
            "lambda1_omega": self.lambda1_omega,
            "inradius": self.inradius,
            "all_pass": self.all_pass, "note": self.note,
            "rows": [r.to_dict() for r in self.rows],
        }

    def csv_lines(self):
        lines = ["m,belsup,Lambda,upper,inflow,lambda,upper2,pass"]
        for r in self.rows:
            vals = [r.m, r.belsup, r.Lambda, r.upper, r.inflow, r.lam, r.upper2]
            cells = ["" if v is None else repr(float(v)) for v in vals]
            lines.append(",".join(cells + [str(int(r.ok))]))
        return lines


def check_all(mesh: Mesh, p: float, m_list, params: SolverParams | None = None) -> BoundsReport:
    """Run the maximizer (and minimizer when p > dim) over a mass grid and
    verify both closed-form sandwiches at 1e-3 relative slack."""
    params = params or SolverParams(p=p)
    if params.p != p:
        raise ConfigError("params.p disagrees with the requested exponent")
    lam_d = dirichlet_ceiling(mesh, params)
    scan = None
    lam1 = None
    if p > mesh.dim:
        scan = scan_point_eigen(mesh, params)
        lam1 = scan.lambda1_omega
    note = None if p > mesh.dim else (
        "p <= dim: the infimum side is exactly 0 and not attained; "
        "only the maximizer sandwich is checked"
    )

    cache = _FCache(mesh, params, lam_d)
    rows = []
    all_ok = True
    for m in m_list:
        m = float(m)
        rep = sigma_max(mesh, m, params, lam_dirichlet=lam_d, _cache=cache)
        big = rep.Lambda
        bel = belsup(m, lam_d, mesh.volume, p)
        upper = min(lam_d, m / mesh.volume)
        ok = (bel <= big * (1.0 + _SLACK)) and (big <= upper * (1.0 + _SLACK))
        rb = None
        if mesh.inradius is not None:
            # equidistributing the mass gives a constant weight, so this
            # convex-domain bound also sits below the maximal eigenvalue
            rb = inradius_bound(m / mesh.boundary_measure, mesh.inradius, p)
            ok = ok and (rb <= big * (1.0 + _SLACK))
        low = lam = up2 = None
        if p > mesh.dim:
            mrep = lambda_inf(mesh, m, params, scan=scan)
            lam = mrep.lambda_inf
            low = inflow(m, lam1, mesh.volume, p, dim=mesh.dim)
            up2 = min(lam1, m / mesh.volume)
            ok = ok and (low <= lam * (1.0 + _SLACK)) and (lam <= up2 * (1.0 + _SLACK))
        all_ok = all_ok and ok
        rows.append(BoundsRow(
            m=m, belsup=bel, Lambda=big, upper=upper,
            inflow=low, lam=lam, upper2=up2, ok=ok, slack_used=_SLACK,
            inradius_bound=rb,
        ))
    return BoundsReport(
        p=p, dim=mesh.dim, volume=mesh.volume, lam_dirichlet=lam_d,
        lambda1_omega=lam1, inradius=mesh.inradius, rows=rows, all_pass=all_ok,
        note=note,
    )
