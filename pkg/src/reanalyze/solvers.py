"""The four linear solution paths: direct, full-system PCG, SRI and FDP.

SRI solves the reduced system (K_La^-1 + C_s K_Lb^-1 C_s^T) F_a = B by
conjugate gradients preconditioned with the same operator built from the
original (unmodified) structure; FDP solves it in closed form through a dense
q x q factorization; PCG iterates on the full system preconditioned with the
factorized original stiffness.  All paths return a uniform SolveReport and,
per the operation-count model, evaluate strictly as matrix-vector chains with
the operator applied once per iteration.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import costmodel
from .assembly import (
    SystemPartition,
    assemble_global,
    factorize_stiffness,
    reduced_apply,
    reduced_gram,
    reduced_rhs,
)
from .errors import InternalError
from .model import StructuralModel

DEFAULT_TOL = 1e-12


@dataclass
class SolveReport:
    """Uniform result record of one linear solve."""

    method: str
    d: np.ndarray
    iterations: int = 0
    f_a: np.ndarray | None = None
    residual_history: list[float] = field(default_factory=list)
    rz_history: list[float] = field(default_factory=list)  # (r, M^-1 r) per iteration
    flops_estimate: int | None = None
    wall_time: float = 0.0
    converged: bool = True


def solve_conventional(model: StructuralModel) -> SolveReport:
    """Complete analysis: assemble the stiffness and solve K d = R directly."""
    t0 = time.perf_counter()
    lu = factorize_stiffness(model)
    d = lu.solve(model.load_vector())
    return SolveReport(method="conventional", d=d, wall_time=time.perf_counter() - t0)


def solve_pcg_full(model_modified: StructuralModel, k0_factorization, tol: float = DEFAULT_TOL,
                   max_iter: int | None = None, k_matrix=None,
                   norm_ref: float | None = None) -> SolveReport:
    """Preconditioned CG on the full modified system.

    k0_factorization is the factorized stiffness of the original structure
    (obtained in advance via factorize_stiffness) and acts as the
    preconditioner; k_matrix may pass a pre-assembled modified stiffness so
    assembly stays outside the timed solve.
    """
    k = k_matrix if k_matrix is not None else assemble_global(model_modified)
    r_vec = model_modified.load_vector()
    n = model_modified.n
    if max_iter is None:
        max_iter = 10 * n

    t0 = time.perf_counter()
    x = np.zeros(n)
    r = r_vec.copy()
    ref = norm_ref if norm_ref is not None else float(np.linalg.norm(r_vec))
    history: list[float] = []
    iterations = 0
    converged = True
    if ref == 0.0:
        history.append(0.0)
    else:
        res = float(np.linalg.norm(r)) / ref
        history.append(res)
        if res >= tol:
            z = k0_factorization.solve(r)
            p = z.copy()
            rz = float(r @ z)
            converged = False
            while iterations < max_iter:
                ap = k @ p
                alpha = rz / float(p @ ap)
                x += alpha * p
                r -= alpha * ap
                iterations += 1
                res = float(np.linalg.norm(r)) / ref
                history.append(res)
                if res < tol:
                    converged = True
                    break
                z = k0_factorization.solve(r)
                rz_new = float(r @ z)
                p = z + (rz_new / rz) * p
                rz = rz_new
    wall = time.perf_counter() - t0
    return SolveReport(method="pcg", d=x, iterations=iterations,
                       residual_history=history,
                       flops_estimate=costmodel.flops_pcg(n, iterations),
                       wall_time=wall, converged=converged)


class SriPreconditioner:
    """Dense reduced operator of the original structure, factorized once.

    matrix = C_s K_Lb0^-1 C_s^T + K_La0^-1 is symmetric positive definite by
    construction; apply() realizes its inverse action on a vector.
    """

    def __init__(self, matrix: np.ndarray):
        self.matrix = matrix
        self.q = matrix.shape[0]
        if self.q:
            try:
                self._cho = sla.cho_factor(matrix, lower=True)
            except np.linalg.LinAlgError as exc:
                raise InternalError(
                    f"reduced preconditioner is not positive definite: {exc}") from exc
        else:
            self._cho = None

    def apply(self, v: np.ndarray) -> np.ndarray:
        if self.q == 0:
            return v.copy()
        return sla.cho_solve(self._cho, v)


def build_sri_preconditioner(partition_original: SystemPartition) -> SriPreconditioner:
    """Materialize and factorize the q x q reduced operator of the original
    structure; cheap to apply afterwards, built once per reanalysis campaign."""
    q = partition_original.q
    m = reduced_gram(partition_original)
    for blk, off in zip(partition_original.add_blocks_inv, partition_original.add_offsets[:-1]):
        w = blk.shape[0]
        m[off:off + w, off:off + w] += blk
    if q == 0:
        m = np.zeros((0, 0))
    return SriPreconditioner(m)


def recover_displacements(partition: SystemPartition, f_a: np.ndarray, r: np.ndarray,
                          b_s: np.ndarray | None = None) -> np.ndarray:
    """Displacements from additional-component forces:
    d = C_b^-1 (B_s - K_Lb^-1 C_s^T F_a), with B_s = K_Lb^-1 C_b^-T R reusable."""
    if b_s is None:
        b_s = partition.k_lb_inv @ partition.solve_c_b_t(r)
    if partition.q:
        w = partition.cs_t @ f_a
        inner = b_s - partition.k_lb_inv @ w
    else:
        inner = b_s
    return partition.solve_c_b(inner)


def solve_sri(partition_modified: SystemPartition, r: np.ndarray,
              preconditioner: SriPreconditioner, tol: float = DEFAULT_TOL,
              max_iter: int | None = None, norm_ref: float | None = None) -> SolveReport:
    """Reduced preconditioned iteration for the modified structure.

    Runs CG on the additional-component force vector with the original
    structure's reduced operator as preconditioner, then recovers the full
    displacement field through the basis factorization.  The convergence test
    divides the residual norm by ||B|| unless norm_ref overrides the
    denominator (the nonlinear driver normalizes by the step load instead).
    """
    if preconditioner.q != partition_modified.q:
        raise InternalError(
            f"preconditioner size {preconditioner.q} != reduced size {partition_modified.q}")
    n, q = partition_modified.n, partition_modified.q
    if max_iter is None:
        max_iter = max(10 * q, 1)

    t0 = time.perf_counter()
    if q == 0:
        b_s = partition_modified.k_lb_inv @ partition_modified.solve_c_b_t(r)
        d = partition_modified.solve_c_b(b_s)
        return SolveReport(method="sri", d=d, f_a=np.zeros(0), residual_history=[0.0],
                           flops_estimate=costmodel.flops_sri(n, 0, 0),
                           wall_time=time.perf_counter() - t0)

    b, b_s = reduced_rhs(partition_modified, r)
    x = np.zeros(q)
    res_vec = b.copy()
    ref = norm_ref if norm_ref is not None else float(np.linalg.norm(b))
    history: list[float] = []
    rz_history: list[float] = []
    iterations = 0
    converged = True
    if ref == 0.0:
        history.append(0.0)
    else:
        res = float(np.linalg.norm(res_vec)) / ref
        history.append(res)
        if res >= tol:
            z = preconditioner.apply(res_vec)
            p = z.copy()
            rz = float(res_vec @ z)
            rz_history.append(rz)
            converged = False
            while iterations < max_iter:
                ap = reduced_apply(partition_modified, p)
                alpha = rz / float(ap @ p)
                x += alpha * p
                res_vec -= alpha * ap
                iterations += 1
                res = float(np.linalg.norm(res_vec)) / ref
                history.append(res)
                if res < tol:
                    converged = True
                    break
                z = preconditioner.apply(res_vec)
                rz_new = float(res_vec @ z)
                rz_history.append(rz_new)
                p = z + (rz_new / rz) * p
                rz = rz_new

    d = recover_displacements(partition_modified, x, r, b_s=b_s)
    wall = time.perf_counter() - t0
    return SolveReport(method="sri", d=d, f_a=x, iterations=iterations,
                       residual_history=history, rz_history=rz_history,
                       flops_estimate=costmodel.flops_sri(n, q, iterations),
                       wall_time=wall, converged=converged)


def solve_fdp(partition_modified: SystemPartition, r: np.ndarray) -> SolveReport:
    """Direct reduced-system path via the low-rank update identity.

    Factorizes I + C_s K_Lb^-1 C_s^T K_La densely, recovers the
    additional-component forces in closed form and evaluates the displacement
    expression as matrix-vector chains.
    """
    n, q = partition_modified.n, partition_modified.q
    t0 = time.perf_counter()
    p_r = partition_modified.solve_c_b_t(r)
    z = partition_modified.k_lb_inv @ p_r
    if q == 0:
        d = partition_modified.solve_c_b(z)
        return SolveReport(method="fdp", d=d, f_a=np.zeros(0),
                           flops_estimate=costmodel.flops_fdp(n, 0),
                           wall_time=time.perf_counter() - t0)
    y = partition_modified.cs_t.T @ z
    gram = reduced_gram(partition_modified)
    s_inv = (partition_modified.k_la @ gram).T
    del gram
    s_inv += np.eye(q)
    try:
        lu, piv = sla.lu_factor(s_inv, overwrite_a=True)
    except np.linalg.LinAlgError as exc:
        raise InternalError(f"reduced update matrix is singular: {exc}") from exc
    u_a = sla.lu_solve((lu, piv), y)
    f_a = partition_modified.k_la @ u_a
    inner = z - partition_modified.k_lb_inv @ (partition_modified.cs_t @ f_a)
    d = partition_modified.solve_c_b(inner)
    wall = time.perf_counter() - t0
    return SolveReport(method="fdp", d=d, f_a=f_a,
                       flops_estimate=costmodel.flops_fdp(n, q),
                       wall_time=wall, converged=True)
