"""Integration of ``H = h(I) + eps f(I, phi)`` and confinement diagnostics.

The integrator is a Strang splitting: half a step of the exact flow of
``h`` (actions frozen, ``phi += omega(I) dt / 2``), a full implicit-midpoint
step of ``eps f`` iterated to a fixed residual, then another half step of
``h``. Both pieces are symmetric and symplectic, so the composition is a
symmetric, symplectic, second-order method; with ``eps = 0`` the actions are
never touched.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .atlas import Atlas
from .constants import ConstantSet, epsilon_scales
from .model import HamiltonianModel
from .numeric import MP, mpf, to_json_number

__all__ = [
    "SCHEME_ID",
    "ConvergenceError",
    "Trajectory",
    "integrate",
    "drift_metrics",
    "Episode",
    "TrapTrace",
    "resonance_trace",
    "confinement_report",
]

SCHEME_ID = "strang(h exact, eps f implicit midpoint)"
TWO_PI = 2.0 * np.pi


class ConvergenceError(RuntimeError):
    """The implicit-midpoint fixed point did not converge; reduce ``dt``."""


@njit(cache=True)
def _mono(I, e):
    v = 1.0
    for i in range(I.shape[0]):
        if e[i] > 0:
            v *= I[i] ** e[i]
    return v


@njit(cache=True)
def _omega(I, h_exps, h_coef, out):
    n = I.shape[0]
    for i in range(n):
        out[i] = 0.0
    for t in range(h_coef.shape[0]):
        for i in range(n):
            ei = h_exps[t, i]
            if ei == 0:
                continue
            v = h_coef[t] * ei
            for k in range(n):
                ek = h_exps[t, k]
                if k == i:
                    ek -= 1
                if ek > 0:
                    v *= I[k] ** ek
            out[i] += v


@njit(cache=True)
def _h_value(I, h_exps, h_coef):
    s = 0.0
    for t in range(h_coef.shape[0]):
        s += h_coef[t] * _mono(I, h_exps[t])
    return s


@njit(cache=True)
def _f_value(I, phi, fk, fe, fcr, fci):
    s = 0.0
    for t in range(fcr.shape[0]):
        th = 0.0
        for i in range(I.shape[0]):
            th += fk[t, i] * phi[i]
        s += _mono(I, fe[t]) * (fcr[t] * math.cos(th) - fci[t] * math.sin(th))
    return s


@njit(cache=True)
def _f_vector_field(I, phi, fk, fe, fcr, fci, dI, dphi):
    """dI = -df/dphi, dphi = df/dI."""
    n = I.shape[0]
    for i in range(n):
        dI[i] = 0.0
        dphi[i] = 0.0
    for t in range(fcr.shape[0]):
        th = 0.0
        for i in range(n):
            th += fk[t, i] * phi[i]
        c, s = math.cos(th), math.sin(th)
        re = fcr[t] * c - fci[t] * s  # Re(c_t e^{i th})
        im = fcr[t] * s + fci[t] * c  # Im(c_t e^{i th})
        mono = _mono(I, fe[t])
        for i in range(n):
            # d/dphi_i Re(c e^{i th}) = -k_i Im(c e^{i th})
            dI[i] += fk[t, i] * im * mono
            ei = fe[t, i]
            if ei > 0:
                d = ei * re
                for k in range(n):
                    ek = fe[t, k]
                    if k == i:
                        ek -= 1
                    if ek > 0:
                        d *= I[k] ** ek
                dphi[i] += d


@njit(cache=True)
def _run(I0, phi0, dt, steps, stride, eps, h_exps, h_coef, fk, fe, fcr, fci, tol, maxit):
    n = I0.shape[0]
    ns = steps // stride + 1
    Is = np.empty((ns, n))
    Ps = np.empty((ns, n))
    Es = np.empty(ns)
    I = I0.copy()
    phi = phi0.copy()
    w = np.empty(n)
    dI = np.empty(n)
    dphi = np.empty(n)
    Im = np.empty(n)
    Pm = np.empty(n)
    In = np.empty(n)
    Pn = np.empty(n)
    Is[0] = I
    Ps[0] = phi
    Es[0] = _h_value(I, h_exps, h_coef) + eps * _f_value(I, phi, fk, fe, fcr, fci)
    k = 1
    active = eps != 0.0 and fcr.shape[0] > 0
    for step in range(1, steps + 1):
        _omega(I, h_exps, h_coef, w)
        for i in range(n):
            phi[i] += 0.5 * dt * w[i]
        if active:
            # implicit midpoint for the flow of eps f
            for i in range(n):
                In[i] = I[i]
                Pn[i] = phi[i]
            converged = False
            for it in range(maxit):
                for i in range(n):
                    Im[i] = 0.5 * (I[i] + In[i])
                    Pm[i] = 0.5 * (phi[i] + Pn[i])
                _f_vector_field(Im, Pm, fk, fe, fcr, fci, dI, dphi)
                err = 0.0
                for i in range(n):
                    a = I[i] + eps * dt * dI[i]
                    b = phi[i] + eps * dt * dphi[i]
                    err = max(err, abs(a - In[i]) / (1.0 + abs(a)), abs(b - Pn[i]) / (1.0 + abs(b)))
                    In[i] = a
                    Pn[i] = b
                if err <= tol:
                    converged = True
                    break
            if not converged:
                return Is[:k], Ps[:k], Es[:k], step
            for i in range(n):
                I[i] = In[i]
                phi[i] = Pn[i]
        _omega(I, h_exps, h_coef, w)
        for i in range(n):
            phi[i] += 0.5 * dt * w[i]
        if step % stride == 0:
            Is[k] = I
            Ps[k] = phi
            Es[k] = _h_value(I, h_exps, h_coef) + eps * _f_value(I, phi, fk, fe, fcr, fci)
            k += 1
    return Is[:k], Ps[:k], Es[:k], -1


@dataclass
class Trajectory:
    times: np.ndarray
    actions: np.ndarray
    angles: np.ndarray  # reduced mod 2 pi
    energy: np.ndarray
    dt: float
    eps: float
    I0: np.ndarray
    phi0: np.ndarray
    stride: int
    scheme: str = SCHEME_ID
    angles_unwrapped: np.ndarray | None = field(default=None, repr=False)

    @property
    def energy_error(self) -> float:
        return float(np.max(np.abs(self.energy - self.energy[0])))

    def final_state(self) -> tuple[np.ndarray, np.ndarray]:
        return self.actions[-1].copy(), self.angles_unwrapped[-1].copy()

    def to_csv_rows(self):
        n = self.actions.shape[1]
        header = ["t"] + [f"I{i + 1}" for i in range(n)] + [f"phi{i + 1}" for i in range(n)] + ["H"]
        rows = [
            [float(t), *map(float, I), *map(float, p), float(e)]
            for t, I, p, e in zip(self.times, self.actions, self.angles, self.energy)
        ]
        return header, rows


def _model_arrays(model: HamiltonianModel):
    h_exps = np.ascontiguousarray(model.h.exps, dtype=np.int64)
    h_coef = np.ascontiguousarray(model.h.coeffs, dtype=np.float64)
    fk, fe, fc = model.f.flat_terms()
    return (
        h_exps,
        h_coef,
        np.ascontiguousarray(fk, dtype=np.float64),
        np.ascontiguousarray(fe, dtype=np.int64),
        np.ascontiguousarray(fc.real, dtype=np.float64),
        np.ascontiguousarray(fc.imag, dtype=np.float64),
    )


def integrate(
    model: HamiltonianModel,
    eps: float,
    I0,
    phi0,
    dt: float,
    steps: int,
    stride: int = 1,
    tol: float = 1e-13,
    maxit: int = 100,
) -> Trajectory:
    """Advance ``(I0, phi0)`` by ``steps`` steps of size ``dt`` (negative ``dt`` runs backwards).

    Raises :class:`ConvergenceError` if an implicit-midpoint solve stalls.
    """
    if dt == 0 or steps < 1 or stride < 1:
        raise ValueError("need dt != 0, steps >= 1 and stride >= 1")
    I0 = np.asarray(I0, dtype=float).copy()
    phi0 = np.asarray(phi0, dtype=float).copy()
    if I0.shape != (model.n,) or phi0.shape != (model.n,):
        raise ValueError(f"initial data must be {model.n}-vectors")
    arrays = _model_arrays(model)
    Is, Ps, Es, failed = _run(I0, phi0, float(dt), int(steps), int(stride), float(eps), *arrays, tol, maxit)
    if failed >= 0:
        raise ConvergenceError(f"implicit midpoint did not converge at step {failed} (dt={dt})")
    times = np.arange(len(Is)) * (stride * dt)
    return Trajectory(times, Is, np.mod(Ps, TWO_PI), Es, float(dt), float(eps), I0, phi0, stride, SCHEME_ID, Ps)


def drift_metrics(traj: Trajectory, bound: float | None = None, radii: dict | None = None) -> dict:
    """Action drift ``|I_t - I_0|`` and its comparison with supplied bounds."""
    disp = traj.actions - traj.actions[0]
    dist = np.linalg.norm(disp, axis=1)
    out = {
        "max_drift": float(dist.max()),
        "max_component_drift": np.max(np.abs(disp), axis=0).tolist(),
        "energy_error": traj.energy_error,
        "series": dist,
    }
    if bound is not None:
        out["bound"] = float(bound)
        out["within_bound"] = bool(dist.max() <= bound)
    for name, r in (radii or {}).items():
        out[f"within_{name}"] = bool(dist.max() <= r)
    return out


@dataclass
class Episode:
    start: int  # sample index
    stop: int  # exclusive
    dim: int
    lattices: tuple[str, ...]
    max_normal: float | None = None  # max |d(t)| within the episode
    max_reach: float | None = None  # max |I_t - I_anchor|
    rho_L: float | None = None
    r_j: float | None = None
    residual: float | None = None

    def to_json(self, times) -> dict:
        return {
            "t_start": float(times[self.start]),
            "t_stop": float(times[self.stop - 1]),
            "dim": self.dim,
            "lattices": list(self.lattices),
            "max_normal_drift": self.max_normal,
            "three_quarter_rho": None if self.rho_L is None else 0.75 * self.rho_L,
            "max_reach": self.max_reach,
            "r_j": self.r_j,
            "decomposition_residual": self.residual,
        }


@dataclass
class TrapTrace:
    episodes: list[Episode]
    exits: list[dict]
    entries: list[dict]
    times: np.ndarray = field(repr=False)

    @property
    def exits_descend(self) -> bool:
        return all(e["to_dim"] < e["from_dim"] for e in self.exits)

    @property
    def max_residual(self) -> float:
        vals = [e.residual for e in self.episodes if e.residual is not None]
        return max(vals) if vals else 0.0

    def to_json(self) -> dict:
        return {
            "episodes": [e.to_json(self.times) for e in self.episodes],
            "exits": self.exits,
            "entries": self.entries,
            "exits_descend": self.exits_descend,
            "max_decomposition_residual": self.max_residual,
        }


def resonance_trace(traj: Trajectory, atlas: Atlas) -> TrapTrace:
    """Block episodes visited by a trajectory and fast-drift decompositions.

    Consecutive samples with the same label form an episode. The end of a
    resonant episode before the horizon is an exit; a move out of the
    nonresonant block is recorded as an entry. Inside a resonant episode
    ``I_t - I_anchor`` is split into ``v`` along the lattice span and the
    normal part ``d``.
    """
    c = atlas.classify(traj.actions)
    labels = []
    for row, j in zip(c.inside, c.jstar):
        labs = tuple(L.label for L, ok in zip(atlas.lattices, row) if ok and L.dim == j) if j else ()
        labels.append((int(j), labs))
    episodes: list[Episode] = []
    start = 0
    for i in range(1, len(labels) + 1):
        if i == len(labels) or labels[i] != labels[start]:
            episodes.append(Episode(start, i, labels[start][0], labels[start][1]))
            start = i
    scales = atlas.scales
    for ep in episodes:
        if ep.dim == 0:
            continue
        L = atlas.lattices[atlas.index[_basis_of(ep.lattices[0])]]
        q = L.orthonormal_basis
        rel = traj.actions[ep.start : ep.stop] - traj.actions[ep.start]
        v = (rel @ q) @ q.T
        d = rel - v
        ep.residual = float(np.max(np.abs(v + d - rel)))
        ep.max_normal = float(np.max(np.linalg.norm(d, axis=1)))
        ep.max_reach = float(np.max(np.linalg.norm(rel, axis=1)))
        ep.rho_L = float(atlas.rho_L[atlas.index[L.basis]])
        ep.r_j = float(scales.r_drift[L.dim - 1])
    exits, entries = [], []
    for a, b in zip(episodes, episodes[1:]):
        ev = {"t": float(traj.times[b.start]), "from_dim": a.dim, "to_dim": b.dim, "from": list(a.lattices), "to": list(b.lattices)}
        (exits if a.dim > 0 else entries).append(ev)
    return TrapTrace(episodes, exits, entries, traj.times)


def _basis_of(label: str) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(int(x) for x in row.split(",")) for row in label.split(";"))


def confinement_report(
    model: HamiltonianModel,
    consts: ConstantSet,
    eps_list,
    horizon: float,
    initial_data,
    dt: float = 1e-2,
) -> dict:
    """Measured drift next to the theorem's radius and time for each ``eps``.

    Bound times are evaluated in extended precision and also given as
    log10 values, so astronomically large times stay finite in the report.
    """
    steps = max(1, int(round(horizon / dt)))
    rows = []
    I0, phi0 = (np.asarray(x, dtype=float) for x in initial_data)
    for eps in eps_list:
        traj = integrate(model, eps, I0, phi0, dt, steps, stride=max(1, steps // 1000))
        drift = drift_metrics(traj)["max_drift"]
        if eps == 0:
            rows.append({
                "eps": 0.0, "K": "inf", "r": 0.0, "radius_bound": 0.0, "max_drift": drift,
                "T_exp": "inf", "stability_time": "inf", "log10_stability_time": "inf",
                "horizon_fraction": 0.0, "regime": "integrable",
            })
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            s = epsilon_scales(consts, eps)
        radius = consts.R * mpf(eps) ** mpf(consts.table.b)
        st = s.stability_time
        rows.append({
            "eps": float(eps),
            "K": to_json_number(s.K),
            "r": to_json_number(s.r),
            "radius_bound": to_json_number(radius),
            "max_drift": drift,
            "within_radius": bool(drift <= radius),
            "T_exp": to_json_number(s.T_exp),
            "stability_time": to_json_number(st),
            "log10_stability_time": float(MP.log10(st)),
            "horizon_fraction": float(mpf(horizon) / st),
            "regime": "theorem" if mpf(eps) <= consts.eps_star else "above threshold",
        })
    inside = all(r["horizon_fraction"] <= 1 for r in rows)
    return {
        "horizon": horizon,
        "dt": dt,
        "rows": rows,
        "horizon_within_stability_time": inside,
        "statement": (
            "the horizon lies inside every stability time; "
            if inside
            else "the horizon exceeds some stability times, where the theorem claims nothing; "
        )
        + "the estimate is exercised only as 'no violation observed'",
    }
