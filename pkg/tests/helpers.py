"""Shared independent oracles for the test suite.

Everything here is written from first principles (textbook element matrices,
direct quadrature, dense linear algebra) so the production code is always
checked against an implementation that does not share its code paths.
"""

import warnings

import numpy as np
from scipy.integrate import IntegrationWarning, quad


def truss_global_stiffness(young, area, length, angle):
    """Textbook bar stiffness (EA/L) v v^T with v = (-c, -s, c, s)."""
    c, s = np.cos(angle), np.sin(angle)
    v = np.array([-c, -s, c, s])
    return young * area / length * np.outer(v, v)


def eb_local_stiffness(young, area, inertia, length):
    """Textbook Euler-Bernoulli beam stiffness in local axes."""
    ea = young * area / length
    w1 = 12.0 * young * inertia / length**3
    w2 = 6.0 * young * inertia / length**2
    w3 = 4.0 * young * inertia / length
    w4 = 2.0 * young * inertia / length
    return np.array([
        [ea, 0, 0, -ea, 0, 0],
        [0, w1, w2, 0, -w1, w2],
        [0, w2, w3, 0, -w2, w4],
        [-ea, 0, 0, ea, 0, 0],
        [0, -w1, -w2, 0, w1, -w2],
        [0, w2, w4, 0, -w2, w3],
    ])


def beam_rotation(angle):
    """Global -> local transform of a two-node plane beam."""
    c, s = np.cos(angle), np.sin(angle)
    node = np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])
    t = np.zeros((6, 6))
    t[:3, :3] = node
    t[3:, 3:] = node
    return t


def graded_profile_moments(height, exponent, e_upper, e_lower):
    """Quadrature of the power-law modulus profile: int E(y) {1, y, y^2} dy."""
    def profile(y):
        return (e_upper - e_lower) * (y / height + 0.5) ** exponent + e_lower

    out = []
    with warnings.catch_warnings():
        # adaptive refinement near machine precision flags benign roundoff
        warnings.simplefilter("ignore", IntegrationWarning)
        for power in (0, 1, 2):
            val, _ = quad(lambda y: profile(y) * y**power, -height / 2.0, height / 2.0,
                          epsabs=0.0, epsrel=1e-13, limit=400)
            out.append(val)
    return tuple(out)


def dense_truss_solution(model):
    """Independent dense assembly and solve of a bar model (small n only)."""
    n = model.n
    k = np.zeros((n, n))
    for elem in model.elements:
        length, angle = model.geometry(elem)
        k_e = truss_global_stiffness(elem.material.elastic_modulus, elem.section.area,
                                     length, angle)
        dofs = np.concatenate([model.dof_map[elem.node_i], model.dof_map[elem.node_j]])
        for a in range(4):
            if dofs[a] < 0:
                continue
            for b in range(4):
                if dofs[b] >= 0:
                    k[dofs[a], dofs[b]] += k_e[a, b]
    return np.linalg.solve(k, model.load_vector())


def rel_err(actual, expected):
    expected = np.asarray(expected, dtype=float)
    scale = np.max(np.abs(expected))
    if scale == 0.0:
        return float(np.max(np.abs(np.asarray(actual))))
    return float(np.max(np.abs(np.asarray(actual) - expected)) / scale)
