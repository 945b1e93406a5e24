"""The (2n+1)-dimensional phase space in Darboux coordinates.

Coordinates are ordered ``(w, q1..qn, p1..pn)`` everywhere, including
serialized output.  The contact form is ``eta = dw - sum_a p_a dq^a``, the
Reeb field is ``xi = d/dw`` and the horizontal frame is

    Q_a = d/dq^a + p_a d/dw,      P^a = d/dp_a,

which satisfies the Heisenberg commutation relations ``[P^a, Q_b] = delta^a_b xi``.

Exterior-derivative convention: the antisymmetrization carries a factor 1/2,
so ``d_eta = -(1/2) sum_a (dp_a (x) dq^a - dq^a (x) dp_a)`` componentwise and
``d_eta(Q_a, P^a) = 1/2``.  Consequently the duals of the frame under the
flat map ``X -> eta(X) eta + i_X d_eta`` carry a factor 1/2 as well
(``i_{Q_a} d_eta = dp_a / 2``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr
from .expr import Expr

__all__ = [
    "PhaseSpace",
    "PhasePoint",
    "TensorField",
    "CoordinateMap",
    "contact_form",
    "frame",
    "coframe",
    "d_eta",
    "outer_02",
    "outer_11",
    "add_tensors",
    "scale_tensor",
    "zero_tensor",
    "sample_points",
]


@dataclass(frozen=True)
class PhaseSpace:
    """Phase space with ``n`` conjugate coordinate pairs (dimension ``2n+1``)."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("phase space needs n >= 1 conjugate pairs")

    @property
    def dim(self) -> int:
        return 2 * self.n + 1

    def coord_names(self) -> tuple[str, ...]:
        n = self.n
        return ("w",) + tuple(f"q{a}" for a in range(1, n + 1)) + tuple(f"p{a}" for a in range(1, n + 1))

    def coord_vars(self) -> tuple[Expr, ...]:
        return tuple(expr.var(name) for name in self.coord_names())

    def q_index(self, a: int) -> int:
        """Position of q^a (1-based a) in the coordinate ordering."""
        if not 1 <= a <= self.n:
            raise ValueError(f"index {a} out of range 1..{self.n}")
        return a

    def p_index(self, a: int) -> int:
        if not 1 <= a <= self.n:
            raise ValueError(f"index {a} out of range 1..{self.n}")
        return self.n + a

    def point(self, w, q, p) -> "PhasePoint":
        pt = PhasePoint(float(w), tuple(float(x) for x in np.atleast_1d(q)),
                        tuple(float(x) for x in np.atleast_1d(p)))
        if pt.n != self.n:
            raise ValueError(f"point has {pt.n} pairs, space has {self.n}")
        return pt


@dataclass(frozen=True)
class PhasePoint:
    """A point ``(w, q^1..q^n, p_1..p_n)`` of the phase space."""

    w: float
    q: tuple[float, ...]
    p: tuple[float, ...]

    def __post_init__(self):
        if len(self.q) != len(self.p):
            raise ValueError("q and p must have the same length")
        vals = (self.w,) + self.q + self.p
        if not all(np.isfinite(v) for v in vals):
            raise ValueError("phase point has non-finite entries")

    @property
    def n(self) -> int:
        return len(self.q)

    @property
    def space(self) -> PhaseSpace:
        return PhaseSpace(self.n)

    def as_array(self) -> np.ndarray:
        return np.array((self.w,) + self.q + self.p, dtype=float)

    @classmethod
    def from_array(cls, arr) -> "PhasePoint":
        arr = np.asarray(arr, dtype=float)
        if arr.ndim != 1 or arr.size % 2 == 0 or arr.size < 3:
            raise ValueError("expected a flat array of odd length >= 3")
        n = (arr.size - 1) // 2
        return cls(float(arr[0]), tuple(arr[1:n + 1]), tuple(arr[n + 1:]))

    def bindings(self) -> dict[str, float]:
        b = {"w": self.w}
        for a, (qa, pa) in enumerate(zip(self.q, self.p), start=1):
            b[f"q{a}"] = qa
            b[f"p{a}"] = pa
        return b


@dataclass(frozen=True, eq=False)
class TensorField:
    """Coordinate-component tensor field of valence (1,0), (0,1), (1,1) or (0,2).

    Components are :class:`Expr` values in an object array indexed over the
    coordinate ordering ``(w, q1..qn, p1..pn)``.  For valence (1,1) the first
    axis is the output (upper) index and the second the input (lower) index.
    """

    valence: tuple[int, int]
    comps: np.ndarray

    def __post_init__(self):
        if self.valence not in ((1, 0), (0, 1), (1, 1), (0, 2)):
            raise ValueError(f"unsupported valence {self.valence}")
        rank = sum(self.valence)
        if self.comps.ndim != rank:
            raise ValueError("component array rank does not match valence")
        if rank == 2 and self.comps.shape[0] != self.comps.shape[1]:
            raise ValueError("component array must be square")

    @property
    def dim(self) -> int:
        return self.comps.shape[0]

    @property
    def n(self) -> int:
        return (self.dim - 1) // 2

    def evaluate(self, point: PhasePoint) -> np.ndarray:
        bindings = point.bindings()
        memo: dict = {}
        out = np.empty(self.comps.shape, dtype=float)
        flat_in = self.comps.reshape(-1)
        flat_out = out.reshape(-1)
        for i, e in enumerate(flat_in):
            flat_out[i] = expr._eval(e, bindings, memo)
        return out

    def to_json(self) -> dict:
        def nest(a):
            if isinstance(a, np.ndarray):
                return [nest(x) for x in a]
            return expr.to_string(a)

        return {"valence": list(self.valence), "components": nest(self.comps)}


def _obj(shape) -> np.ndarray:
    a = np.empty(shape, dtype=object)
    a.reshape(-1)[:] = expr.ZERO
    return a


def zero_tensor(space: PhaseSpace, valence: tuple[int, int]) -> TensorField:
    shape = (space.dim,) * sum(valence)
    return TensorField(valence, _obj(shape))


def contact_form(space: PhaseSpace) -> TensorField:
    """The Darboux contact form ``eta = dw - sum_a p_a dq^a`` as a covector field."""
    comps = _obj(space.dim)
    comps[0] = expr.ONE
    for a in range(1, space.n + 1):
        comps[space.q_index(a)] = expr.neg(expr.var(f"p{a}"))
    return TensorField((0, 1), comps)


def frame(space: PhaseSpace) -> tuple[TensorField, ...]:
    """The Reeb field and horizontal frame ``(xi, Q_1..Q_n, P^1..P^n)``."""
    fields = []
    xi = _obj(space.dim)
    xi[0] = expr.ONE
    fields.append(TensorField((1, 0), xi))
    for a in range(1, space.n + 1):
        comps = _obj(space.dim)
        comps[space.q_index(a)] = expr.ONE
        comps[0] = expr.var(f"p{a}")
        fields.append(TensorField((1, 0), comps))
    for a in range(1, space.n + 1):
        comps = _obj(space.dim)
        comps[space.p_index(a)] = expr.ONE
        fields.append(TensorField((1, 0), comps))
    return tuple(fields)


def coframe(space: PhaseSpace) -> tuple[TensorField, ...]:
    """The coordinate coframe ``(dw, dq^1..dq^n, dp_1..dp_n)``."""
    fields = []
    for c in range(space.dim):
        comps = _obj(space.dim)
        comps[c] = expr.ONE
        fields.append(TensorField((0, 1), comps))
    return tuple(fields)


def d_eta(space: PhaseSpace) -> TensorField:
    """Exterior derivative of the contact form under the 1/2 convention.

    The only nonzero components are ``[q^a, p_a] = +1/2`` and
    ``[p_a, q^a] = -1/2``; on the horizontal distribution this is the
    symplectic form of each contact plane.
    """
    comps = _obj((space.dim, space.dim))
    half = expr.const(0.5)
    for a in range(1, space.n + 1):
        comps[space.q_index(a), space.p_index(a)] = half
        comps[space.p_index(a), space.q_index(a)] = expr.const(-0.5)
    return TensorField((0, 2), comps)


def outer_02(alpha: TensorField, beta: TensorField) -> TensorField:
    """Tensor product of two covector fields: ``(alpha (x) beta)_ab = alpha_a beta_b``."""
    if alpha.valence != (0, 1) or beta.valence != (0, 1):
        raise ValueError("outer_02 expects two covector fields")
    dim = alpha.dim
    comps = _obj((dim, dim))
    for i in range(dim):
        for j in range(dim):
            comps[i, j] = expr.mul(alpha.comps[i], beta.comps[j])
    return TensorField((0, 2), comps)


def outer_11(alpha: TensorField, X: TensorField) -> TensorField:
    """The endomorphism ``alpha (x) X : Y -> alpha(Y) X`` as a (1,1) field."""
    if alpha.valence != (0, 1) or X.valence != (1, 0):
        raise ValueError("outer_11 expects a covector and a vector field")
    dim = alpha.dim
    comps = _obj((dim, dim))
    for c in range(dim):
        for b in range(dim):
            comps[c, b] = expr.mul(X.comps[c], alpha.comps[b])
    return TensorField((1, 1), comps)


def add_tensors(*fields: TensorField) -> TensorField:
    valence = fields[0].valence
    if any(f.valence != valence for f in fields):
        raise ValueError("cannot add tensor fields of different valence")
    comps = _obj(fields[0].comps.shape)
    flat = comps.reshape(-1)
    for f in fields:
        for i, e in enumerate(f.comps.reshape(-1)):
            flat[i] = expr.add(flat[i], e)
    return TensorField(valence, comps)


def scale_tensor(field: TensorField, s) -> TensorField:
    s = s if isinstance(s, Expr) else expr.const(s)
    comps = _obj(field.comps.shape)
    flat_out = comps.reshape(-1)
    for i, e in enumerate(field.comps.reshape(-1)):
        flat_out[i] = expr.mul(s, e)
    return TensorField(field.valence, comps)


@dataclass(frozen=True, eq=False)
class CoordinateMap:
    """A phase-space map given by exact coordinate expressions.

    The Jacobian is obtained by symbolic differentiation of the component
    expressions, so pullbacks through these maps are exact.
    """

    exprs: np.ndarray
    label: str = ""

    @property
    def dim(self) -> int:
        return self.exprs.shape[0]

    def apply(self, point: PhasePoint) -> PhasePoint:
        bindings = point.bindings()
        memo: dict = {}
        vals = np.array([expr._eval(e, bindings, memo) for e in self.exprs])
        return PhasePoint.from_array(vals)

    def jacobian(self, point: PhasePoint) -> np.ndarray:
        names = point.space.coord_names()
        bindings = point.bindings()
        memo: dict = {}
        J = np.empty((self.dim, self.dim), dtype=float)
        for i, e in enumerate(self.exprs):
            for j, name in enumerate(names):
                J[i, j] = expr._eval(expr.differentiate(e, name), bindings, memo)
        return J


def sample_points(space: PhaseSpace, rng: np.random.Generator, count: int,
                  w_range=(-1.0, 1.0), magnitude=(0.5, 2.0)) -> list[PhasePoint]:
    """Draw points with ``|q|, |p|`` in ``magnitude`` (random sign) and ``w`` in ``w_range``.

    Keeping the coordinates away from zero keeps sampled points off the
    ``Lambda = 0`` loci of the reciprocal structures.
    """
    pts = []
    for _ in range(count):
        w = rng.uniform(*w_range)
        mags = rng.uniform(magnitude[0], magnitude[1], size=2 * space.n)
        signs = rng.choice((-1.0, 1.0), size=2 * space.n)
        vals = mags * signs
        pts.append(PhasePoint(w, tuple(vals[:space.n]), tuple(vals[space.n:])))
    return pts
