"""Closed-form Lie derivatives of the six (0,2) tensors along the generators.

These are the expected right-hand sides that the generic coordinate Lie
derivative must reproduce, with the rotation generator acting on the first
``m`` conjugate pairs and the scaling generator on all of them:

    tensor   along rotation generator                     along scaling generator
    ------   -------------------------------------------  -----------------------
    g        0                                            sum_a (dp (x) dp - dq (x) dq)
    a_pi     0                                            0
    g_r      -sum_i (dq (x) dq - dp (x) dp)               0
    g_s      -sum_i (dq (x) dp + dp (x) dq)               -sum_a (dp (x) dp + dq (x) dq)
    g_L      sum_a -(1/2) X(L_a) (dp (x) dq + dq (x) dp)  sum_a -(1/2) X(L_a) (dp (x) dq + dq (x) dp)
               - sum_i L_i (dq (x) dq - dp (x) dp)
    g_Lbar   same as g_L with L -> 1/L

where ``X(L_a)`` is the scalar derivative of the scaling function along the
generator; it vanishes along the scaling generator exactly when the family
satisfies the scaling-invariance condition.
"""

from __future__ import annotations

from . import expr
from .calculus import directional_derivative
from .hamiltonian import (hamiltonian_vector_field, rotation_generator,
                          scaling_generator)
from .metrics import MetricKind
from .phase_space import (PhaseSpace, TensorField, add_tensors, coframe,
                          outer_02, scale_tensor, zero_tensor)
from .structures import LambdaFamily, _reciprocal

__all__ = ["lie_derivative_closed_form"]


def _sym(dq: TensorField, dp: TensorField) -> TensorField:
    return add_tensors(outer_02(dp, dq), outer_02(dq, dp))


def lie_derivative_closed_form(space: PhaseSpace, kind: MetricKind, generator: str,
                               m: int | None = None,
                               lam: LambdaFamily | None = None) -> TensorField:
    """Expected ``L_X g`` for the tensor of ``kind`` along one generator.

    ``generator`` is ``"rotation"`` (needs ``m``) or ``"scaling"``.
    """
    kind = MetricKind(kind)
    if generator not in ("rotation", "scaling"):
        raise ValueError("generator must be 'rotation' or 'scaling'")
    rotation = generator == "rotation"
    if rotation:
        if m is None:
            raise ValueError("the rotation generator needs m")
        if not 1 <= m <= space.n:
            raise ValueError(f"m must satisfy 1 <= m <= {space.n}")
    co = coframe(space)
    dq = [co[space.q_index(a)] for a in range(1, space.n + 1)]
    dp = [co[space.p_index(a)] for a in range(1, space.n + 1)]
    zero = zero_tensor(space, (0, 2))

    if kind == MetricKind.ALPHA_PI:
        return zero

    if kind == MetricKind.ACS:
        if rotation:
            return zero
        return add_tensors(*[add_tensors(outer_02(dp[a], dp[a]),
                                         scale_tensor(outer_02(dq[a], dq[a]), -1.0))
                             for a in range(space.n)])

    if kind == MetricKind.R:
        if not rotation:
            return zero
        return add_tensors(*[add_tensors(scale_tensor(outer_02(dq[i], dq[i]), -1.0),
                                         outer_02(dp[i], dp[i]))
                             for i in range(m)])

    if kind == MetricKind.S:
        if rotation:
            return add_tensors(*[scale_tensor(_sym(dq[i], dp[i]), -1.0) for i in range(m)])
        return add_tensors(*[scale_tensor(add_tensors(outer_02(dp[a], dp[a]),
                                                      outer_02(dq[a], dq[a])), -1.0)
                             for a in range(space.n)])

    if kind in (MetricKind.LAMBDA, MetricKind.LAMBDA_BAR):
        if lam is None:
            raise ValueError(f"{kind.value} needs a LambdaFamily")
        coeffs = lam.exprs if kind == MetricKind.LAMBDA else _reciprocal(lam)
        gen = rotation_generator(m) if rotation else scaling_generator(space.n)
        X = hamiltonian_vector_field(space, gen)
        pieces = []
        for a in range(space.n):
            rate = directional_derivative(space, X, coeffs[a])
            pieces.append(scale_tensor(_sym(dq[a], dp[a]),
                                       expr.mul(expr.const(-0.5), rate)))
        if rotation:
            for i in range(m):
                pieces.append(scale_tensor(add_tensors(outer_02(dq[i], dq[i]),
                                                       scale_tensor(outer_02(dp[i], dp[i]), -1.0)),
                                           expr.neg(coeffs[i])))
        return add_tensors(*pieces)

    raise ValueError(f"unknown metric kind {kind}")
