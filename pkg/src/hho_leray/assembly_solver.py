"""Global residual/Jacobian assembly, static condensation, Newton driver.

The discrete problem is: find a hybrid unknown u with prescribed boundary
face blocks such that for all zero-boundary test vectors v

    sum_T [ int_T sigma(., G u) . G v + h_T int_bdT S(., Du) Dv ] = int_Omega f v_T,

with G the reconstructed gradient and D the boundary difference.  The
residual and its linearization are accumulated element by element from
precomputed evaluation tensors (see kernels_*), the element blocks are
eliminated per element (static condensation), and the face-coupled Schur
complement is solved by a sparse direct factorization inside a damped
Newton loop.  For p < 2 the initial guess comes from the p = 2 linear
solve; if Newton stalls for p <= 1.5, a continuation in p (steps of 0.25)
is run from there.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .backend import get_kernels
from .flux import FluxModel, default_stab_model, eval_field, framing_constants
from .local_ops import HybridVector, LocalOperators, gather_local, project_face
from .polyquad import (element_basis, element_quadrature, face_basis,
                       face_quadrature, n_modes)


class NewtonError(RuntimeError):
    """Newton did not converge; carries the report gathered so far."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class SingularBlockError(RuntimeError):
    """A per-element Jacobian block or the condensed solve broke down."""


class _Stall(Exception):
    pass


@dataclass
class NewtonOptions:
    tol: float = 1e-9               # relative to the load norm
    maxit: int = 50                 # per continuation stage
    min_damping: float = 2.0 ** -12
    initial_guess: str = "linear"   # "linear" or "zero"
    quad_degree: Optional[int] = None
    eps: float = 1e-8               # Jacobian regularization floor
    backend: Optional[str] = None
    linear_solver: str = "direct"   # "direct" or "cg"
    continuation_tol: float = 1e-6
    continuation_step: float = 0.25


@dataclass
class NewtonReport:
    iterations: int = 0
    residual_norms: list = field(default_factory=list)
    damping_factors: list = field(default_factory=list)
    converged: bool = False
    stages: list = field(default_factory=list)   # (p, iterations) pairs
    load_norm: float = 0.0


class AssemblyData:
    """Precomputed evaluation tensors for one (mesh, k, model) triple.

    A (ne, nq, 2, nloc) evaluates the reconstructed gradient of a local
    coefficient vector at the element quadrature points; Dv (ne, 3*nqf,
    nloc) evaluates the boundary difference at the face quadrature points
    with weights wf already scaled by h_T.  Field values (mu, a, delta,
    zeta) are frozen at the same points.
    """

    def __init__(self, mesh, k, flux_model, stab_zeta, quad_degree=None):
        self.mesh = mesh
        self.k = k
        self.flux_model = flux_model
        self.quad_degree = quad_degree or 2 * (k + 1) + 2
        self.ops = LocalOperators(mesh, k)
        ops = self.ops
        ne, Nk, nloc = mesh.n_elements, ops.Nk, ops.nloc
        K = k + 1

        pts, w = element_quadrature(mesh, self.quad_degree)
        self.pts = pts
        self.w = w
        phi = element_basis(pts, mesh.centroids, mesh.h_elem, k)
        self.phi = phi
        self.A = np.einsum("eqm,ecmj->eqcj", phi, ops.G, optimize=True)
        self.mu_q = eval_field(flux_model.mu, pts)
        self.a_q = eval_field(flux_model.a, pts)
        self.delta_q = eval_field(flux_model.delta, pts)

        fpts_all, fw_all = face_quadrature(mesh, self.quad_degree)
        fid = mesh.elem_faces
        nqf = fpts_all.shape[1]
        fpts = fpts_all[fid]                                # (ne, 3, nqf, 2)
        psi = face_basis(fpts, mesh.face_mid[fid], mesh.face_tangent[fid],
                         mesh.face_len[fid], k)
        Dv = np.einsum("efqm,efmj->efqj", psi, ops.D, optimize=True)
        self.Dv = Dv.reshape(ne, 3 * nqf, nloc)
        self.wf = (fw_all[fid] * mesh.h_elem[:, None, None]).reshape(ne, -1)
        self.zeta_q = eval_field(stab_zeta, fpts.reshape(ne, 3 * nqf, 2))

        # free-face numbering and the scatter pattern of the condensed matrix
        free = ~mesh.is_boundary
        self.free = free
        self.n_free = int(free.sum())
        fidx = np.full(mesh.n_faces, -1, dtype=np.int64)
        fidx[free] = np.arange(self.n_free)
        gdof = np.where(free[fid][:, :, None],
                        fidx[fid][:, :, None] * K + np.arange(K)[None, None, :],
                        -1).reshape(ne, 3 * K)
        self.gdof = gdof
        rows = np.repeat(gdof[:, :, None], 3 * K, axis=2)
        cols = np.repeat(gdof[:, None, :], 3 * K, axis=1)
        self.pair_mask = (rows >= 0) & (cols >= 0)
        self.rows = rows[self.pair_mask]
        self.cols = cols[self.pair_mask]

    def gamma_array(self, gamma):
        return np.full(self.mesh.n_elements, float(gamma))


def build_assembly(mesh, k, flux_model, stab_zeta=0.0, quad_degree=None):
    return AssemblyData(mesh, k, flux_model, stab_zeta, quad_degree)


def element_residual(data, uloc, p=None, gamma=None, kern=None):
    """Per-element diffusion residual vectors (ne, nloc) at state uloc."""
    kern = kern or get_kernels()
    p = p if p is not None else data.flux_model.p
    if gamma is None:
        gamma = framing_constants(
            FluxModel(p=p, mu=data.flux_model.mu, a=data.flux_model.a))[0]
    garr = data.gamma_array(gamma)
    return (kern.flux_residual(data.A, data.w, data.delta_q, data.mu_q,
                               data.a_q, uloc, p)
            + kern.stab_residual(data.Dv, data.wf, data.zeta_q, garr, uloc, p))


def element_jacobian(data, uloc, p=None, gamma=None, eps=1e-8, kern=None):
    """Per-element Jacobian matrices (ne, nloc, nloc) at state uloc."""
    kern = kern or get_kernels()
    p = p if p is not None else data.flux_model.p
    if gamma is None:
        gamma = framing_constants(
            FluxModel(p=p, mu=data.flux_model.mu, a=data.flux_model.a))[0]
    garr = data.gamma_array(gamma)
    return (kern.flux_jacobian(data.A, data.w, data.delta_q, data.mu_q,
                               data.a_q, uloc, p, eps)
            + kern.stab_jacobian(data.Dv, data.wf, data.zeta_q, garr, uloc,
                                 p, eps))


def assemble_rhs(data, f):
    """Element load blocks int_T f phi (ne, Nk); face blocks are zero."""
    fv = f(data.pts)
    return np.einsum("eq,eqm,eq->em", data.w, data.phi, fv, optimize=True)


def apply_dirichlet(mesh, k, g, degree=None):
    """Hybrid-vector template with boundary face rows set to the trace
    projection of g (zero for g = None); returns (template, constrained)."""
    u = HybridVector.zeros(mesh, k)
    if g is not None:
        proj = project_face(mesh, k, g, degree)
        u.face[mesh.is_boundary] = proj[mesh.is_boundary]
    return u, mesh.is_boundary.copy()


def scatter_residual(data, res_loc, load=None):
    """Accumulate local residuals into global blocks.

    Returns (r_elem (ne, Nk), r_face (nf, k+1)); constrained face rows are
    zeroed (their equations are not part of the system).
    """
    mesh, Nk = data.mesh, data.ops.Nk
    K = data.k + 1
    r_elem = res_loc[:, :Nk].copy()
    if load is not None:
        r_elem -= load
    r_face = np.zeros((mesh.n_faces, K))
    np.add.at(r_face, mesh.elem_faces, res_loc[:, Nk:].reshape(-1, 3, K))
    r_face[mesh.is_boundary] = 0.0
    return r_elem, r_face


def _norm2(data, r_elem, r_face):
    return math.sqrt(float((r_elem ** 2).sum())
                     + float((r_face[data.free] ** 2).sum()))


def _normp(data, r_elem, r_face, pprime):
    s = float((np.abs(r_elem) ** pprime).sum()) \
        + float((np.abs(r_face[data.free]) ** pprime).sum())
    return s ** (1.0 / pprime)


@dataclass
class CondensedSystem:
    """Schur complement over free face dofs plus the element recovery data."""
    S: sp.csc_matrix
    rhs: np.ndarray
    X: np.ndarray     # (ne, Nk, 3(k+1)+1): element solves for JTF and r_T


def condense(data, Jloc, r_elem, r_face):
    """Eliminate element blocks from J d = -r; returns a CondensedSystem."""
    mesh, ops = data.mesh, data.ops
    Nk, K = ops.Nk, data.k + 1
    K3 = 3 * K
    JTT = Jloc[:, :Nk, :Nk]
    JTF = Jloc[:, :Nk, Nk:]
    JFT = Jloc[:, Nk:, :Nk]
    JFF = Jloc[:, Nk:, Nk:]
    aug = np.concatenate([JTF, r_elem[:, :, None]], axis=2)
    try:
        X = np.linalg.solve(JTT, aug)
    except np.linalg.LinAlgError:
        dets = np.abs(np.linalg.det(JTT))
        bad = int(np.argmin(dets))
        raise SingularBlockError(
            f"singular element Jacobian block on element {bad}") from None
    S_loc = JFF - JFT @ X[:, :, :K3]
    g_loc = (JFT @ X[:, :, K3:])[:, :, 0]

    b_glob = -r_face.copy()
    np.add.at(b_glob, mesh.elem_faces, g_loc.reshape(-1, 3, K))
    b = b_glob[data.free].ravel()

    ndof = data.n_free * K
    S = sp.coo_matrix((S_loc[data.pair_mask], (data.rows, data.cols)),
                      shape=(ndof, ndof)).tocsc()
    return CondensedSystem(S=S, rhs=b, X=X)


def solve_condensed(data, system, linear_solver="direct"):
    """Solve the condensed system; returns the face increment (nf, k+1)
    with zeros on constrained rows."""
    K = data.k + 1
    S, b = system.S, system.rhs
    if linear_solver == "cg":
        M = sp.diags(1.0 / S.diagonal())
        d_free, info = spla.cg(S, b, M=M, rtol=1e-12, atol=0.0,
                               maxiter=20 * max(S.shape[0], 1))
        if info != 0:
            raise SingularBlockError(f"cg failed to converge (info={info})")
    else:
        try:
            lu = spla.splu(S)
        except RuntimeError as exc:
            raise SingularBlockError(f"condensed factorization failed: {exc}") \
                from None
        d_free = lu.solve(b)
    if not np.all(np.isfinite(d_free)):
        bad = int(np.argwhere(~np.isfinite(d_free))[0, 0])
        face_ids = np.flatnonzero(data.free)
        raise SingularBlockError(
            f"non-finite condensed solution at face {face_ids[bad // K]}")
    d_face = np.zeros((data.mesh.n_faces, K))
    d_face[data.free] = d_free.reshape(data.n_free, K)
    return d_face


def recover(data, system, d_face):
    """Back-substitute the element increment from the face increment."""
    K3 = 3 * (data.k + 1)
    d_face_loc = d_face[data.mesh.elem_faces].reshape(-1, K3)
    return -(system.X[:, :, K3] + np.einsum(
        "eij,ej->ei", system.X[:, :, :K3], d_face_loc, optimize=True))


def condense_and_solve(data, Jloc, r_elem, r_face, linear_solver="direct"):
    """One condensed Newton step: J d = -r with element blocks eliminated.

    Returns (d_elem (ne, Nk), d_face (nf, k+1)); constrained face rows of
    d_face are zero.
    """
    system = condense(data, Jloc, r_elem, r_face)
    d_face = solve_condensed(data, system, linear_solver)
    return recover(data, system, d_face), d_face


def linear_local_stiffness(ops, mu=1.0, gamma=None):
    """Independent p = 2 local stiffness: mu sum_c G_c^T M G_c +
    gamma h_T sum_F D_F^T M_F D_F.  Built from the operator matrices, not
    the quadrature-point kernels."""
    if gamma is None:
        gamma = framing_constants(FluxModel(p=2.0, mu=mu))[0]
    Nk = ops.Nk
    Mk = ops.M[:, :Nk, :Nk]
    K = mu * np.einsum("ecmi,emn,ecnj->eij", ops.G, Mk, ops.G, optimize=True)
    K += gamma * ops.mesh.h_elem[:, None, None] * np.einsum(
        "efmi,efmn,efnj->eij", ops.D, ops.MF, ops.D, optimize=True)
    return K


def ah_bilinear(data, u, v, p=None, gamma=None, kern=None):
    """The discrete diffusion form a_h(u, v) for hybrid vectors u, v."""
    res = element_residual(data, gather_local(data.mesh, u), p, gamma, kern)
    return float((res * gather_local(data.mesh, v)).sum())


def _stage_gamma(flux_model, p_stage):
    return framing_constants(
        FluxModel(p=p_stage, mu=flux_model.mu, a=flux_model.a))[0]


def newton_solve(mesh, k, flux, stab=None, f=None, g=None, options=None):
    """Solve the discrete problem; returns (HybridVector, NewtonReport).

    flux is a FluxModel; stab a StabModel (defaults to gamma = sigma_hc
    with zeta = 0); f the source (None = 0); g the Dirichlet trace
    (None = homogeneous).
    """
    options = options or NewtonOptions()
    if stab is None:
        stab = default_stab_model(flux, 0.0)
    kern = get_kernels(options.backend)
    data = build_assembly(mesh, k, flux, stab.zeta, options.quad_degree)
    load = assemble_rhs(data, f) if f is not None else np.zeros(
        (mesh.n_elements, data.ops.Nk))
    load_norm = math.sqrt(float((load ** 2).sum()))
    denom = load_norm if load_norm > 1e-300 else 1.0

    report = NewtonReport(load_norm=load_norm)
    u, _ = apply_dirichlet(mesh, k, g, data.quad_degree)

    def run_stage(p_s, gamma_s, tol_s):
        pprime = p_s / (p_s - 1.0)
        garr = data.gamma_array(gamma_s)
        uloc = gather_local(mesh, u)
        res = (kern.flux_residual(data.A, data.w, data.delta_q, data.mu_q,
                                  data.a_q, uloc, p_s)
               + kern.stab_residual(data.Dv, data.wf, data.zeta_q, garr,
                                    uloc, p_s))
        r_elem, r_face = scatter_residual(data, res, load)
        norm2 = _norm2(data, r_elem, r_face)
        normp = _normp(data, r_elem, r_face, pprime)
        report.residual_norms.append(norm2)
        iters = 0
        while norm2 > tol_s * denom:
            if iters >= options.maxit:
                raise _Stall(f"no convergence in {options.maxit} iterations "
                             f"at p={p_s}")
            J = (kern.flux_jacobian(data.A, data.w, data.delta_q, data.mu_q,
                                    data.a_q, uloc, p_s, options.eps)
                 + kern.stab_jacobian(data.Dv, data.wf, data.zeta_q, garr,
                                      uloc, p_s, options.eps))
            d_elem, d_face = condense_and_solve(data, J, r_elem, r_face,
                                                options.linear_solver)
            t = 1.0
            accepted = False
            while t >= options.min_damping / 2.0:
                trial_elem = u.elem + t * d_elem
                trial_face = u.face + t * d_face
                uloc = np.concatenate(
                    [trial_elem,
                     trial_face[mesh.elem_faces].reshape(mesh.n_elements, -1)],
                    axis=1)
                res = (kern.flux_residual(data.A, data.w, data.delta_q,
                                          data.mu_q, data.a_q, uloc, p_s)
                       + kern.stab_residual(data.Dv, data.wf, data.zeta_q,
                                            garr, uloc, p_s))
                r_elem_t, r_face_t = scatter_residual(data, res, load)
                normp_t = _normp(data, r_elem_t, r_face_t, pprime)
                if normp_t < normp:
                    accepted = True
                    break
                t *= 0.5
            if not accepted:
                raise _Stall(f"line search stalled at p={p_s}")
            u.elem = trial_elem
            u.face = trial_face
            r_elem, r_face = r_elem_t, r_face_t
            normp = normp_t
            norm2 = _norm2(data, r_elem, r_face)
            iters += 1
            report.iterations += 1
            report.damping_factors.append(t)
            report.residual_norms.append(norm2)
        report.stages.append((p_s, iters))
        return iters

    p_target = flux.p
    try:
        if options.initial_guess == "linear" or p_target == 2.0:
            run_stage(2.0, _stage_gamma(flux, 2.0),
                      options.tol if p_target == 2.0 else options.continuation_tol)
        if p_target < 2.0:
            u_lin = u.copy()
            try:
                run_stage(p_target, stab.gamma, options.tol)
            except _Stall:
                if p_target > 1.5 + 1e-12:
                    raise
                u.elem = u_lin.elem.copy()
                u.face = u_lin.face.copy()
                p_s = 2.0 - options.continuation_step
                while p_s > p_target + 1e-12:
                    run_stage(p_s, _stage_gamma(flux, p_s),
                              options.continuation_tol)
                    p_s -= options.continuation_step
                run_stage(p_target, stab.gamma, options.tol)
    except _Stall as exc:
        report.converged = False
        raise NewtonError(str(exc), report) from None

    report.converged = True
    return u, report
