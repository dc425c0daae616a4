"""Triangular meshes of polygonal domains.

A mesh stores vertices, elements (triangles, counterclockwise), and the
deduplicated edge table, together with the geometric quantities needed by
the local operators: areas, diameters, centroids, face midpoints/tangents/
lengths, and per-element outward unit normals.

All arrays are frozen after construction; a mesh is never mutated.
"""

import numpy as np


class MeshError(ValueError):
    """Raised for malformed mesh files or invalid mesh data."""


class Mesh:
    """Conforming triangular mesh.

    Attributes
    ----------
    vertices : (nv, 2) float array
    elements : (ne, 3) int array, counterclockwise vertex triples
    faces : (nf, 2) int array, vertex pairs sorted ascending
    elem_faces : (ne, 3) int array, global face id of local edges
        (0,1), (1,2), (2,0)
    face_elems : (nf, 2) int array, incident elements, -1 in the second
        slot for boundary faces
    is_boundary : (nf,) bool array
    areas, h_elem : (ne,) float arrays (area and diameter per element)
    centroids : (ne, 2) float array
    face_len, face_mid, face_tangent : face geometry; the tangent points
        from the lower-index vertex to the higher-index one, so every
        quantity attached to a face is single valued across the two
        elements sharing it
    normals : (ne, 3, 2) float array, outward unit normal per local edge
    """

    def __init__(self, vertices, elements):
        vertices = np.asarray(vertices, dtype=float)
        elements = np.asarray(elements, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] != 2:
            raise MeshError("vertices must be an (nv, 2) array")
        if elements.ndim != 2 or elements.shape[1] != 3:
            raise MeshError("elements must be an (ne, 3) array")
        if elements.size and (elements.min() < 0 or elements.max() >= len(vertices)):
            raise MeshError("element vertex index out of range")

        # Normalize orientation: flip negatively oriented triangles.
        v0 = vertices[elements[:, 0]]
        v1 = vertices[elements[:, 1]]
        v2 = vertices[elements[:, 2]]
        d1 = v1 - v0
        d2 = v2 - v0
        signed = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
        flip = signed < 0
        if np.any(flip):
            elements = elements.copy()
            elements[flip] = elements[flip][:, [0, 2, 1]]
            signed = np.abs(signed)
        areas = signed
        if np.any(areas <= 1e-14):
            bad = int(np.argmin(areas))
            raise MeshError(f"degenerate element {bad}: area {areas[bad]:.3e} <= 1e-14")

        self.vertices = vertices
        self.elements = elements
        self.areas = areas
        self.centroids = (vertices[elements[:, 0]] + vertices[elements[:, 1]]
                          + vertices[elements[:, 2]]) / 3.0

        e01 = vertices[elements[:, 1]] - vertices[elements[:, 0]]
        e12 = vertices[elements[:, 2]] - vertices[elements[:, 1]]
        e20 = vertices[elements[:, 0]] - vertices[elements[:, 2]]
        lengths = np.stack([np.hypot(*e01.T), np.hypot(*e12.T), np.hypot(*e20.T)], axis=1)
        self.h_elem = lengths.max(axis=1)

        # Deduplicated face table keyed on sorted vertex pairs.
        raw = elements[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2)
        raw_sorted = np.sort(raw, axis=1)
        faces, inverse, counts = np.unique(raw_sorted, axis=0,
                                           return_inverse=True, return_counts=True)
        if np.any(counts > 2):
            bad = int(np.argmax(counts))
            i, j = faces[bad]
            raise MeshError(f"non-manifold edge ({i}, {j}) shared by {counts[bad]} elements")
        self.faces = faces
        self.elem_faces = inverse.reshape(-1, 3)

        nf = len(faces)
        face_elems = np.full((nf, 2), -1, dtype=np.int64)
        order = np.argsort(inverse, kind="stable")
        elem_of_edge = order // 3
        slot = np.zeros(nf, dtype=np.int64)
        for edge, el in zip(inverse[order], elem_of_edge):
            face_elems[edge, slot[edge]] = el
            slot[edge] += 1
        self.face_elems = face_elems
        self.is_boundary = counts == 1

        fv = vertices[faces]
        dvec = fv[:, 1] - fv[:, 0]
        self.face_len = np.hypot(dvec[:, 0], dvec[:, 1])
        self.face_mid = 0.5 * (fv[:, 0] + fv[:, 1])
        self.face_tangent = dvec / self.face_len[:, None]

        # Outward normals per local edge: rotate the CCW travel direction
        # clockwise by 90 degrees.
        edges = np.stack([e01, e12, e20], axis=1)
        elens = lengths[:, :, None]
        self.normals = np.stack([edges[:, :, 1], -edges[:, :, 0]], axis=2) / elens

        for arr in (self.vertices, self.elements, self.areas, self.centroids,
                    self.h_elem, self.faces, self.elem_faces, self.face_elems,
                    self.is_boundary, self.face_len, self.face_mid,
                    self.face_tangent, self.normals):
            arr.flags.writeable = False

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_elements(self):
        return len(self.elements)

    @property
    def n_faces(self):
        return len(self.faces)

    @property
    def n_boundary_faces(self):
        return int(self.is_boundary.sum())

    @property
    def h(self):
        """Meshsize: largest element diameter."""
        return float(self.h_elem.max())


def build_structured_triangular(n):
    """Structured mesh of the unit square: n x n cells, each split into two
    triangles by the bottom-left to top-right diagonal.

    Every triangle has diameter sqrt(2)/n.
    """
    if n <= 0:
        raise ValueError(f"grid parameter must be positive, got {n}")
    xs = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(xs, xs, indexing="xy")
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="xy")
    i = i.ravel()
    j = j.ravel()
    v00 = j * (n + 1) + i
    v10 = j * (n + 1) + i + 1
    v01 = (j + 1) * (n + 1) + i
    v11 = (j + 1) * (n + 1) + i + 1
    lower = np.column_stack([v00, v10, v11])
    upper = np.column_stack([v00, v11, v01])
    elements = np.empty((2 * n * n, 3), dtype=np.int64)
    elements[0::2] = lower
    elements[1::2] = upper
    return Mesh(vertices, elements)


def load_mesh(path):
    """Read a mesh from a text file.

    Format: a header line ``nv ne``, then nv lines ``x y``, then ne lines
    ``i j k`` with 0-based counterclockwise vertex indices.  Blank lines and
    ``#`` comments are skipped.  Raises MeshError with a line number on
    malformed input.
    """
    with open(path) as fh:
        lines = fh.readlines()

    tokens = []
    for lineno, line in enumerate(lines, start=1):
        body = line.split("#", 1)[0].strip()
        if body:
            tokens.append((lineno, body.split()))

    if not tokens:
        raise MeshError(f"{path}: empty mesh file")

    lineno, header = tokens[0]
    if len(header) != 2:
        raise MeshError(f"{path}:{lineno}: header must be 'nv ne'")
    try:
        nv, ne = int(header[0]), int(header[1])
    except ValueError:
        raise MeshError(f"{path}:{lineno}: header must contain two integers") from None
    if nv < 3 or ne < 1:
        raise MeshError(f"{path}:{lineno}: need at least 3 vertices and 1 element")
    if len(tokens) != 1 + nv + ne:
        raise MeshError(f"{path}: expected {1 + nv + ne} data lines, found {len(tokens)}")

    vertices = np.empty((nv, 2))
    for row, (lineno, parts) in enumerate(tokens[1:1 + nv]):
        if len(parts) != 2:
            raise MeshError(f"{path}:{lineno}: vertex line must be 'x y'")
        try:
            vertices[row] = [float(parts[0]), float(parts[1])]
        except ValueError:
            raise MeshError(f"{path}:{lineno}: malformed vertex coordinates") from None

    elements = np.empty((ne, 3), dtype=np.int64)
    for row, (lineno, parts) in enumerate(tokens[1 + nv:]):
        if len(parts) != 3:
            raise MeshError(f"{path}:{lineno}: element line must be 'i j k'")
        try:
            elements[row] = [int(parts[0]), int(parts[1]), int(parts[2])]
        except ValueError:
            raise MeshError(f"{path}:{lineno}: malformed element indices") from None
        if elements[row].min() < 0 or elements[row].max() >= nv:
            raise MeshError(f"{path}:{lineno}: vertex index out of range [0, {nv})")
        if len(set(elements[row])) != 3:
            raise MeshError(f"{path}:{lineno}: repeated vertex in element")

    return Mesh(vertices, elements)


def save_mesh(mesh, path):
    """Write a mesh in the text format read by load_mesh."""
    with open(path, "w") as fh:
        fh.write(f"{mesh.n_vertices} {mesh.n_elements}\n")
        for x, y in mesh.vertices:
            fh.write(f"{float(x)!r} {float(y)!r}\n")
        for i, j, k in mesh.elements:
            fh.write(f"{i} {j} {k}\n")


def mesh_stats(mesh):
    """Summary statistics: counts, meshsize, angle and shape regularity proxies."""
    v = mesh.vertices[mesh.elements]
    angles = []
    for a in range(3):
        p0 = v[:, a]
        p1 = v[:, (a + 1) % 3]
        p2 = v[:, (a + 2) % 3]
        u1 = p1 - p0
        u2 = p2 - p0
        cosang = (u1 * u2).sum(axis=1) / (
            np.hypot(*u1.T) * np.hypot(*u2.T))
        angles.append(np.degrees(np.arccos(np.clip(cosang, -1.0, 1.0))))
    angles = np.stack(angles, axis=1)

    ratio = mesh.face_len[mesh.elem_faces] / mesh.h_elem[:, None]
    return {
        "n_vertices": mesh.n_vertices,
        "n_elements": mesh.n_elements,
        "n_faces": mesh.n_faces,
        "n_boundary_faces": mesh.n_boundary_faces,
        "h": mesh.h,
        "h_min": float(mesh.h_elem.min()),
        "min_angle_deg": float(angles.min()),
        "face_elem_ratio_min": float(ratio.min()),
        "face_elem_ratio_max": float(ratio.max()),
        "total_area": float(mesh.areas.sum()),
    }
