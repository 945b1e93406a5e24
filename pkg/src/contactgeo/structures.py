"""Almost contact / para-contact structures and their scaled deformations.

Each structure is a (1,1) field that kills the Reeb direction and acts on the
horizontal frame per pair:

    phi      : Q_a -> -P^a,            P^a -> Q_a      (quarter turn)
    phi_pi   : Q_a -> -Q_a,            P^a -> -P^a     (half turn)
    phi_r    : Q_a ->  Q_a,            P^a -> -P^a     (polarization reflection)
    phi_s    : Q_a ->  P^a,            P^a -> Q_a      (reflection o quarter turn)
    phi_L    : Q_a ->  L_a Q_a,        P^a -> -L_a P^a (index-wise scaled reflection)
    phi_Lbar : Q_a ->  Q_a / L_a,      P^a -> -P^a / L_a

The quarter turn satisfies ``phi^2 = -1 + eta (x) xi``; the half turn, the
reflection and their composition satisfy ``phi^2 = 1 - eta (x) xi``.  The
scaled families satisfy the generalized identity with the index-wise scaled
horizontal identity, and the pair is mutually inverse on the horizontal
distribution: ``phi_L o phi_Lbar = 1 - eta (x) xi``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import expr
from .expr import Expr
from .hamiltonian import IndexSubset, partial_legendre
from .phase_space import PhasePoint, PhaseSpace, TensorField, _obj

__all__ = [
    "StructureKind",
    "LambdaFamily",
    "product_lambda",
    "build_structure",
    "StructureReport",
    "check_structure_identities",
    "scaled_horizontal_identity",
    "lambda_scaling_residual",
    "lambda_legendre_residual",
]


class StructureKind(Enum):
    ALMOST_CONTACT = "phi"
    PI_ROTATION = "pi"
    REFLECTION = "r"
    COMPOSITE = "s"
    LAMBDA = "lambda"
    LAMBDA_BAR = "lambdabar"


@dataclass(frozen=True)
class LambdaFamily:
    """Index-wise scaling functions ``L_a(w, q, p)`` with symmetry metadata.

    The claim flags record what the family is supposed to satisfy; they are
    validated at runtime through :func:`lambda_scaling_residual` and
    :func:`lambda_legendre_residual` rather than trusted.
    """

    exprs: tuple[Expr, ...]
    claims_scaling_invariant: bool = False
    claims_legendre_invariant: bool = False
    claims_odd: bool = False

    @property
    def n(self) -> int:
        return len(self.exprs)

    @classmethod
    def of(cls, items, **flags) -> "LambdaFamily":
        parsed = tuple(e if isinstance(e, Expr) else expr.parse(e) for e in items)
        return cls(parsed, **flags)


def product_lambda(n: int, power: int = 1) -> LambdaFamily:
    """The product family ``L_a = (q^a p_a)^power``; odd powers are invariant."""
    exprs = tuple(expr.power(expr.var(f"q{a}") * expr.var(f"p{a}"), power)
                  for a in range(1, n + 1))
    odd = power % 2 == 1
    return LambdaFamily(exprs, claims_scaling_invariant=True,
                        claims_legendre_invariant=odd, claims_odd=odd)


def _reciprocal(lam: LambdaFamily) -> tuple[Expr, ...]:
    return tuple(expr.div(expr.ONE, e) for e in lam.exprs)


def _pair_action(space: PhaseSpace, kind: StructureKind, lam: LambdaFamily | None):
    """Per-index frame action (alpha, beta, gamma, delta):
    phi(Q_a) = alpha_a Q_a + beta_a P^a, phi(P^a) = gamma_a Q_a + delta_a P^a."""
    one, zero = expr.ONE, expr.ZERO
    none = (zero,) * space.n

    if kind in (StructureKind.LAMBDA, StructureKind.LAMBDA_BAR):
        if lam is None:
            raise ValueError(f"{kind.value} structure requires a LambdaFamily")
        if lam.n != space.n:
            raise ValueError(f"LambdaFamily has {lam.n} entries, space needs {space.n}")
        coeffs = lam.exprs if kind == StructureKind.LAMBDA else _reciprocal(lam)
        return coeffs, none, none, tuple(expr.neg(c) for c in coeffs)

    ones = (one,) * space.n
    neg_ones = (expr.const(-1.0),) * space.n
    if kind == StructureKind.ALMOST_CONTACT:
        return none, neg_ones, ones, none
    if kind == StructureKind.PI_ROTATION:
        return neg_ones, none, none, neg_ones
    if kind == StructureKind.REFLECTION:
        return ones, none, none, neg_ones
    if kind == StructureKind.COMPOSITE:
        return none, ones, ones, none
    raise ValueError(f"unknown structure kind {kind}")


def build_structure(space: PhaseSpace, kind: StructureKind,
                    lam: LambdaFamily | None = None) -> TensorField:
    """The (1,1) automorphism field for ``kind`` in coordinate components."""
    alpha, beta, gamma, delta = _pair_action(space, kind, lam)
    comps = _obj((space.dim, space.dim))
    for a in range(1, space.n + 1):
        qi, pi = space.q_index(a), space.p_index(a)
        pa = expr.var(f"p{a}")
        al, be, ga, de = alpha[a - 1], beta[a - 1], gamma[a - 1], delta[a - 1]
        # phi(d/dq^a) = phi(Q_a) since phi kills xi and d/dq^a = Q_a - p_a xi
        comps[0, qi] = al * pa
        comps[qi, qi] = al
        comps[pi, qi] = be
        comps[0, pi] = ga * pa
        comps[qi, pi] = ga
        comps[pi, pi] = de
    return TensorField((1, 1), comps)


def scaled_horizontal_identity(space: PhaseSpace, coeffs: tuple[Expr, ...]) -> TensorField:
    """``eta (x) xi + sum_a c_a (dq^a (x) Q_a + dp_a (x) P^a)`` for given coefficients."""
    comps = _obj((space.dim, space.dim))
    comps[0, 0] = expr.ONE
    for a in range(1, space.n + 1):
        qi, pi = space.q_index(a), space.p_index(a)
        pa = expr.var(f"p{a}")
        c = coeffs[a - 1]
        # eta (x) xi contributes -p_a on the (w, q^a) slot; dq^a (x) Q_a adds c_a p_a
        comps[0, qi] = pa * (c - expr.ONE)
        comps[qi, qi] = c
        comps[pi, pi] = c
    return TensorField((1, 1), comps)


@dataclass
class StructureReport:
    """Max residuals of the defining identities over the sampled points."""

    kind: StructureKind
    n: int
    points: int
    residuals: dict[str, float]

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())


def check_structure_identities(space: PhaseSpace, kind: StructureKind,
                               lam: LambdaFamily | None = None,
                               points: list[PhasePoint] | None = None,
                               rng: np.random.Generator | None = None,
                               count: int = 100) -> StructureReport:
    """Evaluate the defining identities of the structure at sampled points.

    Residuals are reported, never raised: ``square`` is the deviation of
    ``phi o phi`` from its target, ``eta_phi`` of ``eta o phi`` from zero,
    ``kills_reeb`` of ``phi(xi)`` from zero, and for the scaled families
    ``duality`` of ``phi_L o phi_Lbar`` from ``1 - eta (x) xi``.
    """
    from .phase_space import contact_form, frame, outer_11, sample_points

    if points is None:
        rng = rng if rng is not None else np.random.default_rng(0)
        points = sample_points(space, rng, count)

    phi = build_structure(space, kind, lam)
    eta = contact_form(space)
    xi = frame(space)[0]
    eta_xi = outer_11(eta, xi)
    identity = np.eye(space.dim)

    if kind == StructureKind.ALMOST_CONTACT:
        square_target = lambda pt: -identity + eta_xi.evaluate(pt)
    elif kind in (StructureKind.PI_ROTATION, StructureKind.REFLECTION, StructureKind.COMPOSITE):
        square_target = lambda pt: identity - eta_xi.evaluate(pt)
    else:
        coeffs = lam.exprs if kind == StructureKind.LAMBDA else _reciprocal(lam)
        squared = tuple(expr.mul(c, c) for c in coeffs)
        one_lam = scaled_horizontal_identity(space, squared)
        square_target = lambda pt: one_lam.evaluate(pt) - eta_xi.evaluate(pt)

    dual = None
    if kind in (StructureKind.LAMBDA, StructureKind.LAMBDA_BAR):
        other = StructureKind.LAMBDA_BAR if kind == StructureKind.LAMBDA else StructureKind.LAMBDA
        dual = build_structure(space, other, lam)

    residuals = {"square": 0.0, "eta_phi": 0.0, "kills_reeb": 0.0}
    if dual is not None:
        residuals["duality"] = 0.0
    for pt in points:
        m = phi.evaluate(pt)
        eta_vals = eta.evaluate(pt)
        xi_vals = xi.evaluate(pt)
        residuals["square"] = max(residuals["square"],
                                  float(np.max(np.abs(m @ m - square_target(pt)))))
        residuals["eta_phi"] = max(residuals["eta_phi"], float(np.max(np.abs(eta_vals @ m))))
        residuals["kills_reeb"] = max(residuals["kills_reeb"], float(np.max(np.abs(m @ xi_vals))))
        if dual is not None:
            target = identity - eta_xi.evaluate(pt)
            residuals["duality"] = max(residuals["duality"],
                                       float(np.max(np.abs(m @ dual.evaluate(pt) - target))))
    return StructureReport(kind, space.n, len(points), residuals)


def lambda_scaling_residual(space: PhaseSpace, lam: LambdaFamily,
                            point: PhasePoint) -> np.ndarray:
    """Per-index residual of ``sum_b (p_b dL_a/dp_b - q^b dL_a/dq^b) = 0``.

    This is the condition for the scaled structure to be preserved by the
    polarization scaling flow.
    """
    residual_exprs = []
    for la in lam.exprs:
        acc = expr.ZERO
        for b in range(1, space.n + 1):
            acc = acc + expr.var(f"p{b}") * expr.differentiate(la, f"p{b}")
            acc = acc - expr.var(f"q{b}") * expr.differentiate(la, f"q{b}")
        residual_exprs.append(acc)
    bindings = point.bindings()
    memo: dict = {}
    # the id-keyed memo is only valid while every tree in residual_exprs is alive
    return np.array([expr._eval(e, bindings, memo) for e in residual_exprs])


def lambda_legendre_residual(space: PhaseSpace, lam: LambdaFamily, I: IndexSubset,
                             point: PhasePoint) -> np.ndarray:
    """Per-index residual of the finite Legendre-invariance conditions.

    Under the partial Legendre map on ``I`` the family must flip sign on the
    transformed indices and be unchanged on the rest:
    ``L_i(Phi x) = -L_i(x)`` for ``i in I`` and ``L_a(Phi x) = L_a(x)`` otherwise.
    """
    I.validate(space.n)
    image = partial_legendre(I, point)
    b_here = point.bindings()
    b_image = image.bindings()
    out = np.empty(space.n)
    for a, la in enumerate(lam.exprs, start=1):
        here = expr.evaluate(la, b_here)
        there = expr.evaluate(la, b_image)
        out[a - 1] = there + here if a in I else there - here
    return out
