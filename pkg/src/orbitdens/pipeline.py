"""solve → smooth → semiclassical → compare, and the files each run writes."""
from __future__ import annotations

import hashlib
import io
import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import metrics, quantum, semiclassical as sc, smooth, svgplot
from .classical import actions_table, classical_actions
from .config import DEFAULT_CHECKS_1D, DEFAULT_CHECKS_RADIAL, RunConfig
from .errors import ConfigError, OpenShellError
from .potentials import PotentialSpec, turning_points

log = logging.getLogger(__name__)


@dataclass
class RunReport:
    metrics: dict
    manifest: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)
    out_dir: Path | None = None

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks.values())

    def to_dict(self) -> dict:
        return {"metrics": self.metrics, "checks": self.checks, "manifest": self.manifest}


def _csv_bytes(columns: dict[str, np.ndarray]) -> bytes:
    names = list(columns)
    data = np.column_stack([np.asarray(columns[n], dtype=float) for n in names]) + 0.0  # no "-0"
    buf = io.StringIO(newline="")
    np.savetxt(buf, data, fmt="%.12e", delimiter=",", header=",".join(names), comments="", newline="\n")
    return buf.getvalue().encode("utf-8")


class _Writer:
    def __init__(self, out: Path):
        self.out = out
        self.pending: dict[str, bytes] = {}

    def add(self, name: str, payload: bytes):
        self.pending[name] = payload

    def flush(self) -> list:
        self.out.mkdir(parents=True, exist_ok=True)
        manifest = []
        for name, payload in self.pending.items():
            (self.out / name).write_bytes(payload)
            manifest.append({"file": name, "bytes": len(payload), "sha256": hashlib.sha256(payload).hexdigest()})
        return manifest


def _solve_radial_for(pot: PotentialSpec, N: int, lam: float, hbar: float, m: float):
    e_cut = pot.v_min + 1.3 * (lam - pot.v_min)
    for _ in range(6):
        sol = quantum.solve_radial_below(pot, e_cut, hbar, m)
        try:
            return sol, quantum.fill_levels(sol, N)
        except OpenShellError:
            raise
        except ValueError:
            e_cut = pot.v_min + 1.5 * (e_cut - pot.v_min)
    raise ValueError("could not solve enough radial states")


def _first_zeros(r, f, n=2):
    z = metrics.zero_crossings(r, f)
    z = z[z > 0]
    out = list(z[:n]) + [float("nan")] * (n - min(n, z.size))
    return out


def _run_1d(cfg: RunConfig, pot: PotentialSpec, k_max: int, writer: _Writer, svg: bool) -> dict:
    sp = cfg.semiclassical
    hbar, m, N = cfg.hbar, cfg.m, cfg.N
    lam = smooth.fermi_energy_smooth(pot, N, hbar, m)
    ca = classical_actions(pot, lam, m, hbar)
    sol = quantum.solve_1d(pot, N + 1, cfg.grid.spacing, hbar, m)
    occ = quantum.fill_levels(sol, N)
    x = sol.grid
    ref = smooth.tf_densities(pot, lam, x, hbar, m)
    prof = quantum.densities_qm(sol, occ).with_smooth(lam, ref.rho_tf, ref.tau_tf)
    fld = sc.delta_kinetic_1d(sc.delta_rho_1d(pot, lam, x, k_max, sp.turning_zone, hbar, m, actions=ca), pot, lam)
    v = pot.value(x)

    central = sc.interior_mask(ca, x, sp.central_window) & (v - pot.v_min < sp.v_window * (lam - pot.v_min))
    drho_central = np.full(x.shape, np.nan)
    drho_series = np.full(x.shape, np.nan)
    if central.any():
        drho_central[central] = sc.delta_rho_central_1d(pot, lam, N, x[central], "closed", k_max, sp.v_window,
                                                        hbar, m, actions=ca)
        drho_series[central] = sc.delta_rho_central_1d(pot, lam, N, x[central], "series", k_max, sp.v_window,
                                                       hbar, m, actions=ca)
    window = sc.interior_mask(ca, x, sp.metric_window) & ~fld.flagged
    cmp = metrics.compare(x, fld.drho, x, prof.drho, window)
    ccmp = metrics.compare(x, drho_central, x, fld.drho, central)
    rel = sc.local_virial_residual(prof, pot, lam, sp.metric_window, m)
    p_lam = ref.p_lambda
    wl_ref = math.pi * hbar / p_lam
    wl_scl = metrics.wavelength(x[central], fld.drho[central])
    wl_qm = metrics.wavelength(x[central], prof.drho[central])
    i0 = int(np.argmin(np.abs(x - pot.center)))
    closed0 = float(sc.delta_rho_central_1d(pot, lam, N, pot.center, "closed", actions=ca)[0])
    po = smooth.po_cancellation_diagnostic(pot, N, sol, occ, sp.metric_window, hbar=hbar, m=m)
    out = {
        "dimension": 1,
        "N": N,
        "lam_tilde": lam,
        "lam_qm": occ.lam_qm,
        "T1": ca.T1,
        "S1": ca.S1,
        "p_lambda": p_lam,
        "delta_phi": ca.delta_phi,
        "x_minus": ca.turning.x_minus,
        "x_plus": ca.turning.x_plus,
        "grid_points": int(x.size),
        "grid_spacing": sol.h,
        "solver_convergence": sol.convergence,
        "k_max": k_max,
        "int_rho": prof.integral(prof.rho),
        "int_tau": prof.integral(prof.tau),
        "int_tau1": prof.integral(prof.tau1),
        "rms_drho": cmp["rms"],
        "max_abs_drho": cmp["max_abs"],
        "rel_rms_drho": cmp["rel_rms"],
        "amplitude_ratio_scl_qm": cmp["amplitude_ratio"],
        "drho0_qm": float(prof.drho[i0]),
        "drho0_scl": float(fld.drho[i0]),
        "drho0_closed": closed0,
        "drho0_dev": abs(float(fld.drho[i0]) / closed0 - 1.0),
        "central_amplitude_ratio": ccmp["amplitude_ratio"],
        "central_amplitude_dev": abs(ccmp["amplitude_ratio"] - 1.0),
        "wavelength_ref": wl_ref,
        "wavelength_scl": wl_scl,
        "wavelength_qm": wl_qm,
        "wavelength_dev": abs(wl_scl / wl_ref - 1.0),
        "virial_rms": rel["virial_rms"],
        "virial_max": rel["virial_max"],
        "tautau_rms": rel["tautau_rms"],
        "tautau_max": rel["tautau_max"],
        "truncation_error_max": float(np.nanmax(np.where(window, fld.error, np.nan))),
        "fermi_offset": smooth.fermi_offset(pot, N, occ, hbar, m),
    }
    out.update(po.as_metrics())

    arts = cfg.artifacts
    if "spectrum" in arts:
        writer.add("spectrum.csv", _csv_bytes({"n": np.arange(sol.energies.size), "E": sol.energies}))
    if "densities" in arts:
        writer.add("densities.csv", _csv_bytes({
            "x": x, "V": v, "rho_qm": prof.rho, "rho_tf": prof.rho_tf, "drho_qm": prof.drho, "drho_scl": fld.drho,
            "drho_central": drho_central, "dtau_qm": prof.dtau, "dtau1_qm": prof.dtau1,
            "dtau_virial": (lam - v) * prof.drho}))
    if "oscillations" in arts:
        writer.add("oscillations.csv", _csv_bytes({
            "x": x, "drho_scl": fld.drho, "drho_error": fld.error, "flagged": fld.flagged.astype(float),
            "dtau_scl": fld.dtau, "dtau1_scl": fld.dtau1, "drho_central_series": drho_series}))
    if "relations" in arts:
        writer.add("relations.csv", _csv_bytes({
            "x": x, "virial_residual": rel["residual"], "tautau_residual": prof.dtau1 + prof.dtau,
            "laplace_identity": prof.tau - prof.tau1 + hbar**2 / (4 * m) * prof.lap_rho,
            "in_window": rel["mask"].astype(float)}))
    if "actions" in arts:
        inner = (x > ca.turning.x_minus) & (x < ca.turning.x_plus)
        writer.add("actions.csv", _csv_bytes(actions_table(ca, x[inner])))
    if "fig1" in arts and svg:
        xs = (x >= pot.center - 1.15 * (pot.center - ca.turning.x_minus)) & \
             (x <= pot.center + 1.15 * (ca.turning.x_plus - pot.center))
        step = max(1, int(xs.sum() // 400))
        pts = np.nonzero(xs)[0][::step]
        writer.add("fig1_upper.svg", svgplot.line_plot([
            {"x": x[pts], "y": prof.drho[pts], "label": "quantum", "style": "points"},
            {"x": x[xs], "y": fld.drho[xs], "label": "closed-orbit sum"},
            {"x": x[xs], "y": drho_central[xs], "label": "central formula", "style": "dashed"},
        ], title=f"density oscillation, {pot.kind}, N = {N}", xlabel="x", ylabel="δρ(x)").encode())
        writer.add("fig1_lower.svg", svgplot.line_plot([
            {"x": x[xs], "y": prof.dtau[xs], "label": "δτ"},
            {"x": x[xs], "y": -prof.dtau1[xs], "label": "-δτ₁", "style": "dashed"},
            {"x": x[xs], "y": ((lam - v) * prof.drho)[xs], "label": "(λ̃ - V) δρ", "style": "dotted"},
        ], title=f"kinetic-energy density oscillations, N = {N}", xlabel="x", ylabel="").encode())
    return out


def _run_radial(cfg: RunConfig, pot: PotentialSpec, writer: _Writer, svg: bool) -> dict:
    sp = cfg.semiclassical
    hbar, m, N, D = cfg.hbar, cfg.m, cfg.N, pot.dimension
    lam = smooth.fermi_energy_smooth(pot, N, hbar, m)
    sol, occ = _solve_radial_for(pot, N, lam, hbar, m)
    r = sol.grid
    ref = smooth.tf_densities(pot, lam, r, hbar, m)
    prof = quantum.densities_qm(sol, occ).with_smooth(lam, ref.rho_tf, ref.tau_tf)
    T_r1 = sc.radial_period(pot, lam, m)
    bes = sc.delta_rho_radial_central(pot, lam, occ.shells, r, T_r1, hbar, m)
    v = pot.value(r)
    zq = _first_zeros(r, prof.drho)
    zb = _first_zeros(r, bes.drho)
    lap_qm = sc.laplace_relation_residual(r, prof.drho, pot, lam, D, sp.v_window, hbar, m)
    lap_b = sc.laplace_relation_residual(r, bes.drho, None, lam, D, sp.v_window, hbar, m)
    rel = sc.local_virial_residual(prof, pot, lam, sp.metric_window, m)
    sign_qm = float(np.sign(prof.drho[0]))
    out = {
        "dimension": D,
        "N": N,
        "shells": occ.shells,
        "lam_tilde": lam,
        "lam_qm": occ.lam_qm,
        "T_r1": T_r1,
        "p_lambda": ref.p_lambda,
        "r_plus": turning_points(pot, lam).x_plus,
        "grid_points": int(r.size),
        "grid_spacing": sol.h,
        "solver_convergence": sol.convergence,
        "int_rho": prof.integral(prof.rho),
        "int_tau": prof.integral(prof.tau),
        "int_tau1": prof.integral(prof.tau1),
        "drho0_qm": float(prof.drho[0]),
        "drho0_bessel": float(bes.drho[0]),
        "amplitude_ratio_r0": float(prof.drho[0] / bes.drho[0]),
        "sign_expected_r0": float((-1) ** (occ.shells - 1)),
        "sign_mismatch_r0": float(sign_qm != (-1) ** (occ.shells - 1)),
        "zero1_qm": zq[0], "zero2_qm": zq[1], "zero1_bessel": zb[0], "zero2_bessel": zb[1],
        "zero1_dev": abs(zq[0] / zb[0] - 1.0),
        "zero2_dev": abs(zq[1] / zb[1] - 1.0),
        "laplace_qm": lap_qm["laplace_rms"],
        "laplace_bessel": lap_b["laplace_rms"],
        "virial_rms": rel["virial_rms"],
        "tautau_rms": rel["tautau_rms"],
    }
    arts = cfg.artifacts
    if "spectrum" in arts:
        rows = [(ch.l, n, e, ch.degeneracy) for ch in sol.channels for n, e in enumerate(ch.energies)]
        rows.sort(key=lambda t: (t[2], t[0]))
        a = np.array(rows, dtype=float)
        writer.add("spectrum.csv", _csv_bytes({"l": a[:, 0], "n_r": a[:, 1], "E": a[:, 2], "degeneracy": a[:, 3]}))
    if "densities" in arts:
        writer.add("densities.csv", _csv_bytes({
            "r": r, "V": v, "rho_qm": prof.rho, "rho_tf": prof.rho_tf, "drho_qm": prof.drho,
            "drho_bessel": bes.drho, "dtau_qm": prof.dtau, "dtau1_qm": prof.dtau1,
            "dtau_virial": (lam - v) * prof.drho}))
    if "relations" in arts:
        writer.add("relations.csv", _csv_bytes({
            "r": r, "laplace_residual_qm": lap_qm["residual"], "virial_residual": rel["residual"],
            "tautau_residual": prof.dtau1 + prof.dtau}))
    if "fig1" in arts and svg:
        rs = r <= 1.15 * out["r_plus"]
        writer.add("fig1_upper.svg", svgplot.line_plot([
            {"x": r[rs][::2], "y": prof.drho[rs][::2], "label": "quantum", "style": "points"},
            {"x": r[rs], "y": bes.drho[rs], "label": "Bessel law"},
        ], title=f"radial density oscillation, D = {D}, N = {N}", xlabel="r", ylabel="δρ(r)").encode())
        writer.add("fig1_lower.svg", svgplot.line_plot([
            {"x": r[rs], "y": prof.dtau[rs], "label": "δτ"},
            {"x": r[rs], "y": -prof.dtau1[rs], "label": "-δτ₁", "style": "dashed"},
            {"x": r[rs], "y": ((lam - v) * prof.drho)[rs], "label": "(λ̃ - V) δρ", "style": "dotted"},
        ], title=f"kinetic-energy density oscillations, D = {D}", xlabel="r", ylabel="").encode())
    return out


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


def evaluate_checks(values: dict, checks: dict) -> dict:
    """Each check passes when |metric| ≤ threshold; a missing or non-finite metric fails."""
    out = {}
    for name, limit in checks.items():
        val = values.get(name)
        ok = val is not None and math.isfinite(float(val)) and abs(float(val)) <= limit
        out[name] = {"value": _jsonable(val), "threshold": float(limit), "passed": bool(ok)}
    return out


def resolve_out(cfg: RunConfig, out_dir=None, default_name: str = "run", env_root: str | None = None) -> Path:
    target = Path(out_dir or cfg.out or Path("orbitdens-out") / default_name)
    if env_root and not target.is_absolute():
        target = Path(env_root) / target
    return target


def run(cfg: RunConfig, out_dir=None, k_max: int | None = None, svg: bool = True, strict: bool = False,
        name: str = "run", env_root: str | None = None) -> RunReport:
    """Execute the requested stages and write all files at the end.

    ``strict`` adds the default checks for the run's dimension to the
    configured ones, so every check the pipeline knows about must pass.
    """
    t0 = time.perf_counter()
    pot = cfg.build_potential()
    if k_max is not None and k_max < 1:
        raise ConfigError("must be >= 1", "semiclassical.k_max")
    kmax = k_max if k_max is not None else cfg.semiclassical.k_max
    out = resolve_out(cfg, out_dir, name, env_root)
    writer = _Writer(out)
    if pot.dimension == 1:
        values = _run_1d(cfg, pot, kmax, writer, svg)
    else:
        values = _run_radial(cfg, pot, writer, svg)
    checks = dict(cfg.checks)
    if strict:
        defaults = DEFAULT_CHECKS_1D if pot.dimension == 1 else DEFAULT_CHECKS_RADIAL
        checks = {**defaults, **checks}
    values = {k: _jsonable(v) for k, v in values.items()}
    report = RunReport(values, checks=evaluate_checks(values, checks), out_dir=out)
    manifest = writer.flush()
    body = {"config": cfg.model_dump(), "metrics": values, "checks": report.checks, "files": manifest,
            "runtime_s": round(time.perf_counter() - t0, 3)}
    payload = (json.dumps(body, indent=2, ensure_ascii=False) + "\n").encode("utf-8")
    (out / "metrics.json").write_bytes(payload)
    report.manifest = manifest
    log.info("wrote %d files to %s", len(manifest) + 1, out)
    return report
