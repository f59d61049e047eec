"""Persistence verdicts from boundary eigen-signatures, plus a simulation probe.

Two boundary configurations are known to force uniform persistence.
Each is a table of (eigenvalues with Re > 0, eigenvalues with Re < 0) for
the boundary equilibria that must be present, and a list of patterns that
must be absent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..equilibria import enumerate_equilibria
from ..errors import PropertyViolation
from ..kinetics import default_kinetics
from ..stability import HYPERBOLIC_TOL, classify
from .cycles import sample_interior
from .integrate import integrate

# Without phenol inflow.
THEOREM_1 = {
    "required": {"000": (2, 1), "100": (1, 2), "001": (1, 2), "110": (1, 2)},
    "absent": ("010", "011", "101"),
}
# With phenol inflow E011 appears through a transcritical bifurcation off
# E001, which therefore gains an unstable x1 direction: E001 is (2, 1).
THEOREM_2 = {
    "required": {"000": (2, 1), "100": (1, 2), "001": (2, 1), "011": (1, 2), "110": (1, 2)},
    "absent": ("010", "101"),
}
THEOREMS = {"theorem-1": THEOREM_1, "theorem-2": THEOREM_2}


def _kin(p, k):
    return default_kinetics(p) if k is None else k


@dataclass
class PersistenceVerdict:
    matched_theorem: str  # theorem-1 | theorem-2 | none
    signatures: dict
    uniform_persistent: bool
    notes: list = field(default_factory=list)


def _match(table, sigs, counts):
    problems = []
    for pat, want in table["required"].items():
        n = counts.get(pat, 0)
        if n != 1:
            problems.append(f"E{pat}: expected exactly one, found {n}")
            continue
        got = sigs[pat][0]
        if got != want:
            problems.append(f"E{pat}: signature {got}, expected {want}")
    for pat in table["absent"]:
        if counts.get(pat, 0):
            problems.append(f"E{pat} present but must be absent")
    return problems


def persistence_check(p, k=None, tol: float = HYPERBOLIC_TOL) -> PersistenceVerdict:
    """Match the boundary equilibria against the two persistence configurations."""
    k = _kin(p, k)
    sigs: dict[str, list] = {}
    counts: dict[str, int] = {}
    notes = []
    named = {}
    for e in enumerate_equilibria(p, k):
        lab = e.pattern.label
        if lab == "111":
            continue
        r = classify(p, k, e, tol)
        counts[lab] = counts.get(lab, 0) + 1
        sigs.setdefault(lab, []).append((r.n_pos, r.n_neg))
        named[e.name] = (r.n_pos, r.n_neg)
        if r.n_zero:
            notes.append(f"{e.name} is nonhyperbolic (eigenvalues {np.round(r.eigenvalues, 12).tolist()})")
    if notes:
        return PersistenceVerdict("none", named, False, notes)
    for name, table in THEOREMS.items():
        problems = _match(table, sigs, counts)
        if not problems:
            return PersistenceVerdict(name, named, True, [f"boundary configuration matches {name}"])
        notes.append(f"{name}: " + "; ".join(problems))
    stable = [n for n, s in named.items() if s[0] == 0]
    if stable:
        notes.append("stable boundary equilibria: " + ", ".join(stable))
    return PersistenceVerdict("none", named, False, notes)


@dataclass
class PersistenceSimulation:
    floors: np.ndarray  # per component, min over samples of min over the final 20%
    per_sample: np.ndarray
    t_end: float
    samples: int
    seed: int
    floor_eps: float
    passed: bool


def verify_persistence_by_simulation(p, k=None, samples: int = 50, t_end: float | None = None,
                                     seed: int = 0, tol: float = 1e-8, floor_eps: float = 1e-6,
                                     raise_on_fail: bool = False,
                                     initial_states=None) -> PersistenceSimulation:
    """Liminf proxy: minimum of each x_i over the last 20% of the horizon.

    The default horizon is 20/alpha.
    """
    k = _kin(p, k)
    if t_end is None:
        t_end = 20.0 / p.alpha
    inits = list(initial_states) if initial_states is not None else sample_interior(p, samples, seed)
    t_tail = 0.8 * t_end
    mins = []
    for y0 in inits:
        low = np.full(3, np.inf)

        def observer(t_old, t, y, solver, low=low):
            if t >= t_tail:
                np.minimum(low, y[:3], out=low)
            return False

        tr = integrate(p, k, y0, t_end, tol=tol, observer=observer, record=False)
        np.minimum(low, tr.final[:3], out=low)
        mins.append(low)
    per = np.array(mins)
    floors = per.min(axis=0)
    passed = bool((floors > floor_eps).all())
    rep = PersistenceSimulation(floors, per, t_end, len(inits), seed, floor_eps, passed)
    if raise_on_fail and not passed:
        raise PropertyViolation(f"persistence floor violated: floors {floors.tolist()}")
    return rep
