# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kinematics kernels; signature-compatible with `_kin_py`.

Joint type codes: 0 = revolute, 1 = prismatic. All rotation matrices are
handled as row-major double[9] buffers internally.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, fabs, sin, sqrt

cnp.import_array()

REVOLUTE = 0
PRISMATIC = 1


cdef inline void _axis_rotation(double ax, double ay, double az, double angle,
                                double *r) noexcept nogil:
    # Rodrigues about a unit axis: I + sin*K + (1-cos)*K^2, K^2 = aa^T - I.
    cdef double s = sin(angle)
    cdef double c = 1.0 - cos(angle)
    r[0] = 1.0 + c * (ax * ax - 1.0)
    r[1] = -s * az + c * (ax * ay)
    r[2] = s * ay + c * (ax * az)
    r[3] = s * az + c * (ax * ay)
    r[4] = 1.0 + c * (ay * ay - 1.0)
    r[5] = -s * ax + c * (ay * az)
    r[6] = -s * ay + c * (ax * az)
    r[7] = s * ax + c * (ay * az)
    r[8] = 1.0 + c * (az * az - 1.0)


cdef inline void _mat_mul(const double *a, const double *b, double *out) noexcept nogil:
    cdef int i, j, k
    for i in range(3):
        for j in range(3):
            out[3 * i + j] = (a[3 * i] * b[j]
                              + a[3 * i + 1] * b[3 + j]
                              + a[3 * i + 2] * b[6 + j])


cdef inline void _mat_vec(const double *a, const double *v, double *out) noexcept nogil:
    cdef int i
    for i in range(3):
        out[i] = a[3 * i] * v[0] + a[3 * i + 1] * v[1] + a[3 * i + 2] * v[2]


cdef void _sweep(const cnp.int32_t[::1] jt, const double[:, ::1] ax,
                 const double[:, :, ::1] fr, const double[:, ::1] ft,
                 const double[::1] q, int upto,
                 double[:, ::1] rot_out, double[:, ::1] pos_out,
                 double[:, ::1] org_out, double[:, ::1] axis_out) noexcept nogil:
    """Chain walk up to joint index `upto` inclusive.

    rot_out rows are row-major 3x3 cumulative rotations after each joint's
    motion; pos_out the matching positions; org_out/axis_out the joint
    world origins and axes.
    """
    cdef double rot[9]
    cdef double tmp[9]
    cdef double loc[9]
    cdef double pos[3]
    cdef double vec[3]
    cdef double z[3]
    cdef int i, j
    for j in range(9):
        rot[j] = 0.0
    rot[0] = rot[4] = rot[8] = 1.0
    pos[0] = pos[1] = pos[2] = 0.0
    for i in range(upto + 1):
        _mat_vec(rot, &ft[i, 0], vec)
        for j in range(3):
            pos[j] += vec[j]
        _mat_mul(rot, &fr[i, 0, 0], tmp)
        for j in range(9):
            rot[j] = tmp[j]
        for j in range(3):
            org_out[i, j] = pos[j]
        _mat_vec(rot, &ax[i, 0], z)
        for j in range(3):
            axis_out[i, j] = z[j]
        if jt[i] == 0:
            _axis_rotation(ax[i, 0], ax[i, 1], ax[i, 2], q[i], loc)
            _mat_mul(rot, loc, tmp)
            for j in range(9):
                rot[j] = tmp[j]
        else:
            for j in range(3):
                pos[j] += q[i] * z[j]
        for j in range(9):
            rot_out[i, j] = rot[j]
        for j in range(3):
            pos_out[i, j] = pos[j]


def sweep(jt, ax, fr, ft, q):
    """Python-visible chain walk (mirrors `_kin_py.sweep`)."""
    cdef int n = jt.shape[0]
    rot = np.empty((n, 9))
    pos = np.empty((n, 3))
    org = np.empty((n, 3))
    axes = np.empty((n, 3))
    cdef double[:, ::1] rot_v = rot
    cdef double[:, ::1] pos_v = pos
    cdef double[:, ::1] org_v = org
    cdef double[:, ::1] ax_v = axes
    q = np.ascontiguousarray(q, dtype=np.float64)
    _sweep(jt, ax, fr, ft, q, n - 1, rot_v, pos_v, org_v, ax_v)
    return rot.reshape(n, 3, 3), pos, org, axes


def frame_pose(jt, ax, fr, ft, q, parent, frot, ftrans):
    cdef int n = jt.shape[0]
    cdef int par = parent
    q = np.ascontiguousarray(q, dtype=np.float64)
    out_rot = np.empty((3, 3))
    out_pos = np.empty(3)
    if par < 0:
        out_rot[:] = frot
        out_pos[:] = ftrans
        return out_rot, out_pos
    rot = np.empty((n, 9))
    pos = np.empty((n, 3))
    org = np.empty((n, 3))
    axes = np.empty((n, 3))
    cdef double[:, ::1] rot_v = rot
    cdef double[:, ::1] pos_v = pos
    _sweep(jt, ax, fr, ft, q, par, rot_v, pos_v, org, axes)
    cdef double[:, ::1] fr_v = np.ascontiguousarray(frot)
    cdef double[::1] ftr_v = np.ascontiguousarray(ftrans)
    cdef double[:, ::1] orot = out_rot
    cdef double[::1] opos = out_pos
    cdef double vec[3]
    _mat_mul(&rot_v[par, 0], &fr_v[0, 0], &orot[0, 0])
    _mat_vec(&rot_v[par, 0], &ftr_v[0], vec)
    opos[0] = vec[0] + pos_v[par, 0]
    opos[1] = vec[1] + pos_v[par, 1]
    opos[2] = vec[2] + pos_v[par, 2]
    return out_rot, out_pos


cdef void _jacobian(const cnp.int32_t[::1] jt, const double[:, ::1] ax,
                    const double[:, :, ::1] fr, const double[:, ::1] ft,
                    const double[::1] q, int parent,
                    const double[::1] ftrans,
                    double[:, ::1] rot_w, double[:, ::1] pos_w,
                    double[:, ::1] org_w, double[:, ::1] axis_w,
                    double[:, ::1] J) noexcept nogil:
    cdef int n = jt.shape[0]
    cdef int i, j
    cdef double pf[3]
    cdef double rel[3]
    cdef double vec[3]
    for i in range(6):
        for j in range(n):
            J[i, j] = 0.0
    if parent < 0:
        return
    _sweep(jt, ax, fr, ft, q, n - 1, rot_w, pos_w, org_w, axis_w)
    _mat_vec(&rot_w[parent, 0], &ftrans[0], vec)
    for j in range(3):
        pf[j] = vec[j] + pos_w[parent, j]
    for i in range(parent + 1):
        if jt[i] == 0:
            rel[0] = pf[0] - org_w[i, 0]
            rel[1] = pf[1] - org_w[i, 1]
            rel[2] = pf[2] - org_w[i, 2]
            J[0, i] = axis_w[i, 1] * rel[2] - axis_w[i, 2] * rel[1]
            J[1, i] = axis_w[i, 2] * rel[0] - axis_w[i, 0] * rel[2]
            J[2, i] = axis_w[i, 0] * rel[1] - axis_w[i, 1] * rel[0]
            J[3, i] = axis_w[i, 0]
            J[4, i] = axis_w[i, 1]
            J[5, i] = axis_w[i, 2]
        else:
            J[0, i] = axis_w[i, 0]
            J[1, i] = axis_w[i, 1]
            J[2, i] = axis_w[i, 2]


def jacobian(jt, ax, fr, ft, q, parent, frot, ftrans):
    cdef int n = jt.shape[0]
    q = np.ascontiguousarray(q, dtype=np.float64)
    J = np.zeros((6, n))
    rot = np.empty((n, 9))
    pos = np.empty((n, 3))
    org = np.empty((n, 3))
    axes = np.empty((n, 3))
    cdef double[:, ::1] J_v = J
    cdef double[::1] ftr_v = np.ascontiguousarray(ftrans)
    _jacobian(jt, ax, fr, ft, q, parent, ftr_v, rot, pos, org, axes, J_v)
    return J


cdef double _det_gram(double[:, ::1] J, const cnp.intp_t[::1] rows, int n,
                      double *gram) noexcept nogil:
    """det(J[rows] @ J[rows]^T) via Gaussian elimination with partial pivoting."""
    cdef int k = rows.shape[0]
    cdef int i, j, c, piv
    cdef double acc, amax, tmp, det, factor
    for i in range(k):
        for j in range(i, k):
            acc = 0.0
            for c in range(n):
                acc += J[rows[i], c] * J[rows[j], c]
            gram[i * k + j] = acc
            gram[j * k + i] = acc
    det = 1.0
    for c in range(k):
        piv = c
        amax = fabs(gram[c * k + c])
        for i in range(c + 1, k):
            if fabs(gram[i * k + c]) > amax:
                amax = fabs(gram[i * k + c])
                piv = i
        if amax == 0.0:
            return 0.0
        if piv != c:
            det = -det
            for j in range(k):
                tmp = gram[c * k + j]
                gram[c * k + j] = gram[piv * k + j]
                gram[piv * k + j] = tmp
        det *= gram[c * k + c]
        for i in range(c + 1, k):
            factor = gram[i * k + c] / gram[c * k + c]
            for j in range(c + 1, k):
                gram[i * k + j] -= factor * gram[c * k + j]
    return det


def manip_value(jt, ax, fr, ft, q, parent, frot, ftrans, rows):
    cdef int n = jt.shape[0]
    q = np.ascontiguousarray(q, dtype=np.float64)
    rows = np.ascontiguousarray(rows, dtype=np.intp)
    J = np.zeros((6, n))
    rot = np.empty((n, 9))
    pos = np.empty((n, 3))
    org = np.empty((n, 3))
    axes = np.empty((n, 3))
    cdef double[:, ::1] J_v = J
    cdef const double[::1] ftr_v = np.ascontiguousarray(ftrans)
    cdef const cnp.intp_t[::1] rows_v = rows
    cdef double gram[36]
    _jacobian(jt, ax, fr, ft, q, parent, ftr_v, rot, pos, org, axes, J_v)
    cdef double d = _det_gram(J_v, rows_v, n, gram)
    return sqrt(d) if d > 0.0 else 0.0


def manip_gradient(jt, ax, fr, ft, q, parent, frot, ftrans, h, rows):
    cdef int n = jt.shape[0]
    cdef int i
    cdef double m_plus, m_minus, d, qi
    cdef double hh = h
    rows = np.ascontiguousarray(rows, dtype=np.intp)
    qw = np.array(q, dtype=np.float64)
    grad = np.empty(n)
    J = np.zeros((6, n))
    rot = np.empty((n, 9))
    pos = np.empty((n, 3))
    org = np.empty((n, 3))
    axes = np.empty((n, 3))
    cdef double[::1] q_v = qw
    cdef double[::1] grad_v = grad
    cdef double[:, ::1] J_v = J
    cdef double[:, ::1] rot_v = rot
    cdef double[:, ::1] pos_v = pos
    cdef double[:, ::1] org_v = org
    cdef double[:, ::1] axes_v = axes
    cdef const double[::1] ftr_v = np.ascontiguousarray(ftrans)
    cdef const cnp.intp_t[::1] rows_v = rows
    cdef const cnp.int32_t[::1] jt_v = jt
    cdef const double[:, ::1] ax_v = ax
    cdef const double[:, :, ::1] fr_v = fr
    cdef const double[:, ::1] ft_v = ft
    cdef int par = parent
    cdef double gram[36]
    with nogil:
        for i in range(n):
            qi = q_v[i]
            q_v[i] = qi + hh
            _jacobian(jt_v, ax_v, fr_v, ft_v, q_v, par, ftr_v,
                      rot_v, pos_v, org_v, axes_v, J_v)
            d = _det_gram(J_v, rows_v, n, gram)
            m_plus = sqrt(d) if d > 0.0 else 0.0
            q_v[i] = qi - hh
            _jacobian(jt_v, ax_v, fr_v, ft_v, q_v, par, ftr_v,
                      rot_v, pos_v, org_v, axes_v, J_v)
            d = _det_gram(J_v, rows_v, n, gram)
            m_minus = sqrt(d) if d > 0.0 else 0.0
            q_v[i] = qi
            grad_v[i] = (m_plus - m_minus) / (2.0 * hh)
    return grad
