"""Local hybrid operators on a triangular mesh.

Each element T of a mesh carries the unknown pair (v_T, (v_F)_F): a
degree-k polynomial inside T and one degree-k polynomial per face.  This
module builds, for every element at once, the matrices realizing

* the gradient reconstruction G into vector polynomials of degree k,
  defined by duality against gradients of element basis functions with
  the boundary terms shifted onto the face unknowns,
* the potential reconstruction R into degree k+1, defined through the
  element stiffness problem with the mean pinned to the element mean,
* the boundary difference operator giving, on each face,
  h_T^{-1} [ pi_F(R v - v_F) - pi_T(R v - v_T)|_F ],

together with mass/stiffness matrices, projectors, the interpolator, and
the discrete W^{1,q} seminorm.

Local degree-of-freedom order: element modes first, then the three face
blocks in local edge order.
"""

import numpy as np

from .polyquad import (element_basis, element_quadrature, face_basis,
                       face_quadrature, monomial_exponents, n_modes)


class HybridVector:
    """Coefficients of a hybrid unknown: (ne, Nk) element block and
    (nf, k+1) face block."""

    __slots__ = ("elem", "face")

    def __init__(self, elem, face):
        self.elem = elem
        self.face = face

    @classmethod
    def zeros(cls, mesh, k):
        return cls(np.zeros((mesh.n_elements, n_modes(k))),
                   np.zeros((mesh.n_faces, k + 1)))

    def copy(self):
        return HybridVector(self.elem.copy(), self.face.copy())


def gather_local(mesh, vec):
    """Stack the element block and the three face blocks of each element:
    (ne, Nk + 3 (k+1))."""
    ne = mesh.n_elements
    return np.concatenate(
        [vec.elem, vec.face[mesh.elem_faces].reshape(ne, -1)], axis=1)


class LocalOperators:
    """Batched local operator matrices for one (mesh, k) pair.

    Attributes (ne = number of elements, N = dim P^k, N1 = dim P^{k+1},
    nloc = N + 3(k+1)):

    M : (ne, N1, N1) mass matrices of the degree k+1 element basis
    K1 : (ne, N1, N1) stiffness matrices of the degree k+1 element basis
    MF : (ne, 3, k+1, k+1) face mass matrices
    G : (ne, 2, N, nloc) gradient reconstruction, one block per component
    R : (ne, N1, nloc) potential reconstruction
    D : (ne, 3, k+1, nloc) boundary difference operator per local face
    int_phi1 : (ne, N1) integrals of the degree k+1 basis functions
    """

    def __init__(self, mesh, k):
        if k < 1:
            raise ValueError(f"polynomial degree k must be >= 1, got {k}")
        self.mesh = mesh
        self.k = k
        self.Nk = n_modes(k)
        self.N1 = n_modes(k + 1)
        self.nloc = self.Nk + 3 * (k + 1)
        self._build()

    def _build(self):
        mesh, k = self.mesh, self.k
        ne, Nk, N1, nloc = mesh.n_elements, self.Nk, self.N1, self.nloc
        nfb = k + 1
        qd = 2 * (k + 1)

        pts, w = element_quadrature(mesh, qd)
        phi1, dphi1 = element_basis(pts, mesh.centroids, mesh.h_elem, k + 1,
                                    grad=True)
        self.M = np.einsum("eq,eqi,eqj->eij", w, phi1, phi1, optimize=True)
        self.K1 = np.einsum("eq,eqic,eqjc->eij", w, dphi1, dphi1, optimize=True)
        self.int_phi1 = np.einsum("eq,eqi->ei", w, phi1, optimize=True)
        Mk = self.M[:, :Nk, :Nk]

        fpts_all, fw_all = face_quadrature(mesh, qd)
        fid = mesh.elem_faces
        nqf = fpts_all.shape[1]
        fpts = fpts_all[fid]                       # (ne, 3, nqf, 2)
        fw = fw_all[fid]                           # (ne, 3, nqf)
        tr1 = element_basis(fpts.reshape(ne, 3 * nqf, 2), mesh.centroids,
                            mesh.h_elem, k + 1).reshape(ne, 3, nqf, N1)
        psi = face_basis(fpts, mesh.face_mid[fid], mesh.face_tangent[fid],
                         mesh.face_len[fid], k)    # (ne, 3, nqf, k+1)
        self.MF = np.einsum("efq,efqi,efqj->efij", fw, psi, psi, optimize=True)

        # Gradient reconstruction: M_k G_c = B_c.
        trk = tr1[..., :Nk]
        B = np.zeros((ne, 2, Nk, nloc))
        B[:, :, :, :Nk] = (
            np.einsum("eq,eqjc,eqm->ecmj", w, dphi1[:, :, :Nk, :],
                      phi1[:, :, :Nk], optimize=True)
            - np.einsum("efq,efqj,efqm,efc->ecmj", fw, trk, trk,
                        mesh.normals, optimize=True))
        for f in range(3):
            col = Nk + f * nfb
            B[:, :, :, col:col + nfb] = np.einsum(
                "eq,eqj,eqm,ec->ecmj", fw[:, f], psi[:, f], trk[:, f],
                mesh.normals[:, f], optimize=True)
        MkB = np.broadcast_to(Mk[:, None], (ne, 2, Nk, Nk))
        self.G = np.linalg.solve(MkB, B)

        # Potential reconstruction: stiffness problem on the non-constant
        # modes, then the constant mode from the element mean.
        Gq = np.einsum("eqm,ecmj->eqcj", phi1[:, :, :Nk], self.G, optimize=True)
        C = np.einsum("eq,eqmc,eqcj->emj", w, dphi1, Gq, optimize=True)
        Rnc = np.linalg.solve(self.K1[:, 1:, 1:], C[:, 1:, :])
        mean_target = np.zeros((ne, nloc))
        mean_target[:, :Nk] = self.int_phi1[:, :Nk]
        R0 = (mean_target - np.einsum("em,emj->ej", self.int_phi1[:, 1:], Rnc,
                                      optimize=True)) / mesh.areas[:, None]
        self.R = np.concatenate([R0[:, None, :], Rnc], axis=1)

        # Boundary difference operator, one face block at a time.
        Q = np.linalg.solve(Mk, self.M[:, :Nk, :])          # pi_T^k on P^{k+1}
        QR = np.einsum("emn,enj->emj", Q, self.R, optimize=True)
        QR[:, :, :Nk] -= np.eye(Nk)[None]                   # pi_T(R v) - v_T
        self.D = np.empty((ne, 3, nfb, nloc))
        for f in range(3):
            Nf1 = np.einsum("eq,eqi,eqm->eim", fw[:, f], psi[:, f], tr1[:, f],
                            optimize=True)
            P1f = np.linalg.solve(self.MF[:, f], Nf1)       # pi_F on P^{k+1}
            blk = np.einsum("eim,emj->eij", P1f, self.R, optimize=True)
            col = Nk + f * nfb
            blk[:, :, col:col + nfb] -= np.eye(nfb)[None]   # pi_F(R v) - v_F
            blk -= np.einsum("eim,emj->eij", P1f[:, :, :Nk], QR, optimize=True)
            self.D[:, f] = blk / mesh.h_elem[:, None, None]

    def gradient(self, u_loc):
        """Coefficients of the reconstructed gradient: (ne, 2, Nk)."""
        return np.einsum("ecmj,ej->ecm", self.G, u_loc, optimize=True)

    def potential(self, u_loc):
        """Coefficients of the reconstructed potential: (ne, N1)."""
        return np.einsum("emj,ej->em", self.R, u_loc, optimize=True)

    def boundary_difference(self, u_loc):
        """Face-basis coefficients of the boundary difference: (ne, 3, k+1)."""
        return np.einsum("efij,ej->efi", self.D, u_loc, optimize=True)


def project_element(mesh, l, f, degree=None):
    """L2 projection of f onto degree-l element polynomials: (ne, N_l)."""
    degree = max(degree if degree is not None else 2 * l + 2, 2 * l)
    pts, w = element_quadrature(mesh, degree)
    vals = element_basis(pts, mesh.centroids, mesh.h_elem, l)
    fv = f(pts)
    M = np.einsum("eq,eqi,eqj->eij", w, vals, vals, optimize=True)
    b = np.einsum("eq,eqm,eq->em", w, vals, fv, optimize=True)
    return np.linalg.solve(M, b[..., None])[..., 0]


def project_face(mesh, l, f, degree=None):
    """L2 projection of f onto degree-l face polynomials: (nf, l+1)."""
    degree = max(degree if degree is not None else 2 * l + 2, 2 * l)
    pts, w = face_quadrature(mesh, degree)
    vals = face_basis(pts, mesh.face_mid, mesh.face_tangent, mesh.face_len, l)
    fv = f(pts)
    M = np.einsum("fq,fqi,fqj->fij", w, vals, vals, optimize=True)
    b = np.einsum("fq,fqm,fq->fm", w, vals, fv, optimize=True)
    return np.linalg.solve(M, b[..., None])[..., 0]


def interpolate(mesh, k, f, degree=None):
    """Hybrid interpolant: element and face L2 projections of f."""
    return HybridVector(project_element(mesh, k, f, degree),
                        project_face(mesh, k, f, degree))


def eval_element_poly(mesh, coeffs, points, grad=False):
    """Evaluate element polynomials with given coefficients at points
    (ne, nq, 2).  coeffs: (ne, N_l).  Returns (ne, nq) and optionally the
    gradient (ne, nq, 2)."""
    l = _degree_from_modes(coeffs.shape[1])
    if not grad:
        vals = element_basis(points, mesh.centroids, mesh.h_elem, l)
        return np.einsum("eqm,em->eq", vals, coeffs, optimize=True)
    vals, dvals = element_basis(points, mesh.centroids, mesh.h_elem, l, grad=True)
    return (np.einsum("eqm,em->eq", vals, coeffs, optimize=True),
            np.einsum("eqmc,em->eqc", dvals, coeffs, optimize=True))


def _degree_from_modes(n):
    l = 0
    while n_modes(l) < n:
        l += 1
    if n_modes(l) != n:
        raise ValueError(f"{n} is not a triangular basis dimension")
    return l


def seminorm_w1q(mesh, k, vec, q, degree=None):
    """Discrete W^{1,q} seminorm of a hybrid vector.

    Per element: ||grad v_T||^q_{L^q(T)} plus, for each face,
    h_F^{1-q} ||v_F - v_T||^q_{L^q(F)}.  Returns (value, per-element
    q-th powers).
    """
    if degree is None:
        degree = 2 * (k + 1) + 2
    ne = mesh.n_elements
    pts, w = element_quadrature(mesh, degree)
    _, dvals = element_basis(pts, mesh.centroids, mesh.h_elem, k, grad=True)
    gv = np.einsum("eqmc,em->eqc", dvals, vec.elem, optimize=True)
    contrib = np.einsum("eq,eq->e", w, np.hypot(gv[..., 0], gv[..., 1]) ** q,
                        optimize=True)

    fpts_all, fw_all = face_quadrature(mesh, degree)
    fid = mesh.elem_faces
    nqf = fpts_all.shape[1]
    fpts = fpts_all[fid]
    fw = fw_all[fid]
    trk = element_basis(fpts.reshape(ne, 3 * nqf, 2), mesh.centroids,
                        mesh.h_elem, k).reshape(ne, 3, nqf, n_modes(k))
    psi = face_basis(fpts, mesh.face_mid[fid], mesh.face_tangent[fid],
                     mesh.face_len[fid], k)
    jump = (np.einsum("efqm,efm->efq", psi, vec.face[fid], optimize=True)
            - np.einsum("efqm,em->efq", trk, vec.elem, optimize=True))
    hf = mesh.face_len[fid] ** (1.0 - q)
    contrib = contrib + np.einsum("ef,efq,efq->e", hf, fw, np.abs(jump) ** q,
                                  optimize=True)
    return float(contrib.sum() ** (1.0 / q)), contrib


def gradient_reconstruction(ops, u_loc):
    """Reconstructed-gradient coefficients for local vectors u_loc."""
    return ops.gradient(u_loc)


def potential_reconstruction(ops, u_loc):
    """Reconstructed-potential coefficients for local vectors u_loc."""
    return ops.potential(u_loc)


def boundary_residual(ops, u_loc):
    """Boundary-difference coefficients for local vectors u_loc."""
    return ops.boundary_difference(u_loc)


def seminorm_1ph(vec, mesh, k, q, degree=None):
    """Discrete W^{1,q} seminorm of a hybrid vector (scalar only)."""
    return seminorm_w1q(mesh, k, vec, q, degree)[0]
