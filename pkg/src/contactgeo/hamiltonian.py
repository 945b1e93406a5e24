"""Contact Hamiltonian vector fields, symmetry generators and their flows.

Hamilton's equations are used in the convention

    qdot^a = -dh/dp_a,
    pdot_a =  dh/dq^a + p_a dh/dw,
    wdot   =  h - sum_b p_b dh/dp_b,

for which the defining relation ``eta(X_h) = h`` and the contact-transformation
property ``L_{X_h} eta = (dh/dw) eta`` hold exactly.

Two horizontal generators get closed-form flows: the per-plane rotation
generator ``(1/2) sum_i (q_i^2 + p_i^2)`` whose quarter turn is the partial
Legendre transformation, and the scaling generator ``sum_a q^a p_a`` whose
flow is ``q -> q e^-t, p -> p e^t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import expr
from .expr import Expr
from .phase_space import CoordinateMap, PhasePoint, PhaseSpace, TensorField, _obj, frame

__all__ = [
    "ContactHamiltonian",
    "IndexSubset",
    "rotation_generator",
    "scaling_generator",
    "hamiltonian_vector_field",
    "rotation_flow",
    "scaling_flow",
    "partial_legendre",
    "integrate_flow",
    "generator_commutator",
    "closed_form_commutator",
    "legendre_map",
    "scaling_map",
    "rotation_map",
    "random_polynomial_hamiltonian",
]


@dataclass(frozen=True)
class ContactHamiltonian:
    """A smooth function of ``(w, q, p)`` acting as a contact Hamiltonian."""

    h: Expr
    label: str = ""


@dataclass(frozen=True)
class IndexSubset:
    """A sorted set of distinct conjugate-pair indices (1-based)."""

    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(sorted(set(self.indices)))
        if idx != self.indices:
            object.__setattr__(self, "indices", idx)
        if any(i < 1 for i in self.indices):
            raise ValueError("indices are 1-based")

    @classmethod
    def of(cls, indices: Iterable[int] | int) -> "IndexSubset":
        if isinstance(indices, int):
            indices = (indices,)
        return cls(tuple(int(i) for i in indices))

    def validate(self, n: int, require_nonempty: bool = True):
        if require_nonempty and not self.indices:
            raise ValueError("index subset must be non-empty")
        if any(i > n for i in self.indices):
            raise ValueError(f"index out of range for n={n}")

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, i) -> bool:
        return i in self.indices

    def __len__(self) -> int:
        return len(self.indices)


def rotation_generator(m: int) -> ContactHamiltonian:
    """``(1/2) sum_{i<=m} (q_i^2 + p_i^2)``: rotates the first m contact planes."""
    if m < 1:
        raise ValueError("m must be >= 1")
    h = expr.ZERO
    for i in range(1, m + 1):
        h = h + (expr.var(f"q{i}") ** 2 + expr.var(f"p{i}") ** 2)
    return ContactHamiltonian(expr.const(0.5) * h, label="hL")


def scaling_generator(n: int) -> ContactHamiltonian:
    """``sum_{a<=n} q^a p_a``: generates the anisotropic polarization scalings."""
    if n < 1:
        raise ValueError("n must be >= 1")
    h = expr.ZERO
    for a in range(1, n + 1):
        h = h + expr.var(f"q{a}") * expr.var(f"p{a}")
    return ContactHamiltonian(h, label="hS")


def hamiltonian_vector_field(space: PhaseSpace, h: ContactHamiltonian | Expr) -> TensorField:
    """The unique field with ``eta(X_h) = h``, via Hamilton's equations."""
    hh = h.h if isinstance(h, ContactHamiltonian) else h
    comps = _obj(space.dim)
    dh_dw = expr.differentiate(hh, "w")
    wdot = hh
    for a in range(1, space.n + 1):
        dh_dpa = expr.differentiate(hh, f"p{a}")
        comps[space.q_index(a)] = expr.neg(dh_dpa)
        comps[space.p_index(a)] = expr.differentiate(hh, f"q{a}") + expr.var(f"p{a}") * dh_dw
        wdot = wdot - expr.var(f"p{a}") * dh_dpa
    comps[0] = wdot
    return TensorField((1, 0), comps)


def rotation_flow(t: float, I: IndexSubset, x: PhasePoint) -> PhasePoint:
    """Closed-form rotation flow on the selected conjugate pairs.

    On each selected plane ``(q^i, p_i)`` rotates by angle ``t`` and shifts
    ``w`` accordingly; the remaining coordinates are untouched.
    """
    I.validate(x.n)
    ct, st = math.cos(t), math.sin(t)
    q = list(x.q)
    p = list(x.p)
    w = x.w
    for i in I:
        q0, p0 = x.q[i - 1], x.p[i - 1]
        w -= 0.5 * st * ((p0 * p0 - q0 * q0) * ct + 2.0 * st * q0 * p0)
        q[i - 1] = q0 * ct - p0 * st
        p[i - 1] = q0 * st + p0 * ct
    return PhasePoint(w, tuple(q), tuple(p))


def scaling_flow(t: float, x: PhasePoint) -> PhasePoint:
    """Anisotropic scaling ``q -> q e^-t``, ``p -> p e^t``; ``w`` unchanged."""
    em, ep = math.exp(-t), math.exp(t)
    return PhasePoint(x.w, tuple(q * em for q in x.q), tuple(p * ep for p in x.p))


def partial_legendre(I: IndexSubset, x: PhasePoint) -> PhasePoint:
    """Exact partial Legendre transformation (quarter turn of the selected planes).

    ``w -> w - sum_{i in I} q^i p_i`` and ``(q^i, p_i) -> (-p_i, q^i)`` for
    ``i in I``; identity elsewhere.  Equals ``rotation_flow(pi/2, I, x)`` up to
    roundoff, but is computed with exact arithmetic on the coordinates.
    """
    I.validate(x.n)
    q = list(x.q)
    p = list(x.p)
    w = x.w
    for i in I:
        w -= x.q[i - 1] * x.p[i - 1]
        q[i - 1] = -x.p[i - 1]
        p[i - 1] = x.q[i - 1]
    return PhasePoint(w, tuple(q), tuple(p))


def integrate_flow(X: TensorField, x: PhasePoint, t: float, steps: int) -> PhasePoint:
    """Classical fixed-step RK4 integration of ``xdot = X(x)`` over time ``t``."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if X.valence != (1, 0):
        raise ValueError("integrate_flow expects a vector field")
    names = x.space.coord_names()
    comps = X.comps

    def rhs(arr: np.ndarray) -> np.ndarray:
        bindings = dict(zip(names, arr))
        memo: dict = {}
        return np.array([expr._eval(e, bindings, memo) for e in comps])

    h = t / steps
    y = x.as_array()
    for k in range(steps):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * h * k1)
        k3 = rhs(y + 0.5 * h * k2)
        k4 = rhs(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise FloatingPointError(f"non-finite state at step {k + 1}")
    return PhasePoint.from_array(y)


def generator_commutator(space: PhaseSpace, m: int) -> TensorField:
    """``[X_hS, X_hL]`` computed with the generic Lie bracket."""
    if not 1 <= m <= space.n:
        raise ValueError(f"m must satisfy 1 <= m <= {space.n}")
    from .calculus import lie_bracket

    XS = hamiltonian_vector_field(space, scaling_generator(space.n))
    XL = hamiltonian_vector_field(space, rotation_generator(m))
    return lie_bracket(space, XS, XL)


def closed_form_commutator(space: PhaseSpace, m: int) -> TensorField:
    """``sum_{i<=m} [(p_i^2 - q_i^2) xi - 2 (p_i Q_i + q^i P^i)]`` built from the frame."""
    if not 1 <= m <= space.n:
        raise ValueError(f"m must satisfy 1 <= m <= {space.n}")
    fields = frame(space)
    xi = fields[0]
    comps = _obj(space.dim)
    for i in range(1, m + 1):
        qi, pi = expr.var(f"q{i}"), expr.var(f"p{i}")
        Qi = fields[i]
        Pi = fields[space.n + i]
        coef_xi = pi * pi - qi * qi
        for c in range(space.dim):
            term = coef_xi * xi.comps[c] - expr.const(2.0) * (pi * Qi.comps[c] + qi * Pi.comps[c])
            comps[c] = comps[c] + term
    return TensorField((1, 0), comps)


def _identity_exprs(space: PhaseSpace) -> np.ndarray:
    return np.array([expr.var(name) for name in space.coord_names()], dtype=object)


def legendre_map(space: PhaseSpace, I: IndexSubset) -> CoordinateMap:
    """The partial Legendre transformation as a symbolic coordinate map."""
    I.validate(space.n)
    exprs = _identity_exprs(space)
    w = exprs[0]
    for i in I:
        qi, pi = expr.var(f"q{i}"), expr.var(f"p{i}")
        w = w - qi * pi
        exprs[space.q_index(i)] = expr.neg(pi)
        exprs[space.p_index(i)] = qi
    exprs[0] = w
    return CoordinateMap(exprs, label=f"legendre{I.indices}")


def scaling_map(space: PhaseSpace, t: float) -> CoordinateMap:
    """The finite scaling ``delta_t`` as a symbolic coordinate map."""
    exprs = _identity_exprs(space)
    em, ep = math.exp(-t), math.exp(t)
    for a in range(1, space.n + 1):
        exprs[space.q_index(a)] = expr.const(em) * expr.var(f"q{a}")
        exprs[space.p_index(a)] = expr.const(ep) * expr.var(f"p{a}")
    return CoordinateMap(exprs, label=f"scaling(t={t})")


def rotation_map(space: PhaseSpace, t: float, I: IndexSubset) -> CoordinateMap:
    """The finite rotation flow at time ``t`` as a symbolic coordinate map."""
    I.validate(space.n)
    exprs = _identity_exprs(space)
    ct, st = expr.const(math.cos(t)), expr.const(math.sin(t))
    half = expr.const(0.5)
    w = exprs[0]
    for i in I:
        qi, pi = expr.var(f"q{i}"), expr.var(f"p{i}")
        w = w - half * st * ((pi * pi - qi * qi) * ct + expr.const(2.0) * st * qi * pi)
        exprs[space.q_index(i)] = qi * ct - pi * st
        exprs[space.p_index(i)] = qi * st + pi * ct
    exprs[0] = w
    return CoordinateMap(exprs, label=f"rotation(t={t},{I.indices})")


def random_polynomial_hamiltonian(space: PhaseSpace, rng: np.random.Generator,
                                  terms: int = 4, max_degree: int = 2) -> ContactHamiltonian:
    """A random polynomial in ``(w, q, p)`` with small integer coefficients."""
    names = space.coord_names()
    h = expr.ZERO
    for _ in range(terms):
        coeff = float(rng.integers(-3, 4))
        if coeff == 0.0:
            coeff = 1.0
        term = expr.const(coeff)
        for name in names:
            d = int(rng.integers(0, max_degree + 1))
            if d:
                term = term * expr.power(expr.var(name), d)
        h = h + term
    return ContactHamiltonian(h, label="random")
