"""Quaternion and rotation-matrix helpers, dtype agnostic.

The matrix builders take any numeric type (float, mpf) and return nested
lists, so the solver can call them with numpy floats and the refiner with
mpmath values. R_hom is the homogeneous form: for a unit quaternion it is
the rotation matrix; for general q it is (q.q) times the rotation, which
keeps incidence equations polynomial.
"""
import numpy as np


def quat_hom_matrix(q):
    """(q.q) * R as a 3x3 nested list; rows of the homogeneous rotation."""
    w, x, y, z = q
    return [
        [w * w + x * x - y * y - z * z, 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), w * w - x * x + y * y - z * z, 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), w * w - x * x - y * y + z * z],
    ]


def quat_hom_jac(q):
    """d(quat_hom_matrix)/dq as a list of four 3x3 nested lists."""
    w, x, y, z = q
    dw = [[2 * w, -2 * z, 2 * y], [2 * z, 2 * w, -2 * x], [-2 * y, 2 * x, 2 * w]]
    dx = [[2 * x, 2 * y, 2 * z], [2 * y, -2 * x, -2 * w], [2 * z, 2 * w, -2 * x]]
    dy = [[-2 * y, 2 * x, 2 * w], [2 * x, 2 * y, 2 * z], [-2 * w, 2 * z, -2 * y]]
    dz = [[-2 * z, -2 * w, 2 * x], [2 * w, -2 * z, 2 * y], [2 * x, 2 * y, 2 * z]]
    return [dw, dx, dy, dz]


def rot2d(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def quat_rotation(q):
    """Normalized rotation matrix from a quaternion, numpy float."""
    q = np.asarray(q, float)
    return np.array(quat_hom_matrix(q)) / (q @ q)


def quat_from_matrix(R):
    """Unit quaternion (w, x, y, z) of a proper rotation matrix."""
    R = np.asarray(R, float)
    tr = np.trace(R)
    if tr > 0:
        S = np.sqrt(tr + 1.0) * 2
        q = np.array([S / 4, (R[2, 1] - R[1, 2]) / S,
                      (R[0, 2] - R[2, 0]) / S, (R[1, 0] - R[0, 1]) / S])
    else:
        i = int(np.argmax(np.diag(R)))
        if i == 0:
            S = np.sqrt(1 + R[0, 0] - R[1, 1] - R[2, 2]) * 2
            q = np.array([(R[2, 1] - R[1, 2]) / S, S / 4,
                          (R[0, 1] + R[1, 0]) / S, (R[0, 2] + R[2, 0]) / S])
        elif i == 1:
            S = np.sqrt(1 + R[1, 1] - R[0, 0] - R[2, 2]) * 2
            q = np.array([(R[0, 2] - R[2, 0]) / S, (R[0, 1] + R[1, 0]) / S,
                          S / 4, (R[1, 2] + R[2, 1]) / S])
        else:
            S = np.sqrt(1 + R[2, 2] - R[0, 0] - R[1, 1]) * 2
            q = np.array([(R[1, 0] - R[0, 1]) / S, (R[0, 2] + R[2, 0]) / S,
                          (R[1, 2] + R[2, 1]) / S, S / 4])
    return q / np.linalg.norm(q)


def euler_matrix(a, b, g):
    """Rz(g) Ry(b) Rz(a), the z-y-z chart used for the rotation grid."""
    ca, sa, cb, sb, cg, sg = np.cos(a), np.sin(a), np.cos(b), np.sin(b), np.cos(g), np.sin(g)
    Rz1 = np.array([[ca, -sa, 0], [sa, ca, 0], [0, 0, 1]])
    Ry = np.array([[cb, 0, sb], [0, 1, 0], [-sb, 0, cb]])
    Rz2 = np.array([[cg, -sg, 0], [sg, cg, 0], [0, 0, 1]])
    return Rz2 @ Ry @ Rz1


def axis_angle_matrix(v):
    """Rotation by |v| radians about direction v (numpy float)."""
    th = np.linalg.norm(v)
    if th < 1e-14:
        return np.eye(3)
    k = v / th
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + np.sin(th) * K + (1 - np.cos(th)) * (K @ K)
