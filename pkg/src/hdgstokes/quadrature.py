"""Quadrature rules: triangle rules of degree 4 and 5, Gauss rules on edges.

Triangle rules return barycentric coordinates and weights summing to 1
(multiply by the triangle area). Edge rules return parameters in (0, 1)
measured from the first endpoint and weights summing to 1 (multiply by
the edge length).
"""

import numpy as np


def tri_rule(degree):
    if degree <= 4:
        a1, w1 = 0.445948490915965, 0.223381589678011
        a2, w2 = 0.091576213509771, 0.109951743655322
        pts = [(1 - 2 * a1, a1, a1), (a1, 1 - 2 * a1, a1), (a1, a1, 1 - 2 * a1),
               (1 - 2 * a2, a2, a2), (a2, 1 - 2 * a2, a2), (a2, a2, 1 - 2 * a2)]
        w = [w1, w1, w1, w2, w2, w2]
    elif degree == 5:
        s15 = np.sqrt(15.0)
        b = (6 + s15) / 21
        c = (6 - s15) / 21
        wb = (155 + s15) / 1200
        wc = (155 - s15) / 1200
        pts = [(1 / 3, 1 / 3, 1 / 3),
               (1 - 2 * b, b, b), (b, 1 - 2 * b, b), (b, b, 1 - 2 * b),
               (1 - 2 * c, c, c), (c, 1 - 2 * c, c), (c, c, 1 - 2 * c)]
        w = [9 / 40, wb, wb, wb, wc, wc, wc]
    else:
        raise ValueError(f"no triangle rule of degree {degree}")
    return np.array(pts), np.array(w)


def edge_gauss(npts):
    """Gauss-Legendre nodes/weights mapped to (0, 1)."""
    if npts == 2:
        x = np.array([-1, 1]) / np.sqrt(3.0)
        w = np.array([1.0, 1.0])
    elif npts == 3:
        x = np.array([-np.sqrt(3 / 5), 0.0, np.sqrt(3 / 5)])
        w = np.array([5 / 9, 8 / 9, 5 / 9])
    elif npts == 4:
        r1 = np.sqrt(3 / 7 - 2 / 7 * np.sqrt(6 / 5))
        r2 = np.sqrt(3 / 7 + 2 / 7 * np.sqrt(6 / 5))
        x = np.array([-r2, -r1, r1, r2])
        w30 = np.sqrt(30.0)
        w = np.array([18 - w30, 18 + w30, 18 + w30, 18 - w30]) / 36
    else:
        raise ValueError(f"no edge rule with {npts} points")
    return (1 + x) / 2, w / 2


# BDM dof nodes: the 2-point Gauss parameters, measured from the lower vertex
BDM_NODES = edge_gauss(2)[0]
