"""Independent reference computations used by the tests.

Nothing here imports the simulator's geometry or channel code: LOS comes
from dense point sampling against axis-aligned boxes and losses from the
textbook closed forms written out directly.
"""
import math

import numpy as np

C = 299_792_458.0
N_SAMPLES = 10_000


def box_blocks(p, q, box, n=N_SAMPLES):
    """Dense-sampling test of segment p-q against box (x0, y0, x1, y1, z0, z1)."""
    p = np.asarray(p, float)
    q = np.asarray(q, float)
    t = np.linspace(0.0, 1.0, n + 2)[1:-1, None]
    pts = p + t * (q - p)
    x0, y0, x1, y1, z0, z1 = box
    inside = ((pts[:, 0] > x0) & (pts[:, 0] < x1) & (pts[:, 1] > y0) & (pts[:, 1] < y1)
              & (pts[:, 2] > z0) & (pts[:, 2] < z1))
    return bool(inside.any())


def los(p, q, boxes):
    return not any(box_blocks(p, q, b) for b in boxes)


def umi_los(d, fc=28.0, h_bs=10.0, h_ut=1.5):
    d = max(d, 1.0)
    d_bp = 4 * (h_bs - 1) * (h_ut - 1) * fc * 1e9 / 3e8
    if d < d_bp:
        return 32.4 + 21 * math.log10(d) + 20 * math.log10(fc)
    return 32.4 + 40 * math.log10(d) + 20 * math.log10(fc) - 9.5 * math.log10(d_bp ** 2 + (h_bs - h_ut) ** 2)


def umi_nlos(d, fc=28.0, h_bs=10.0, h_ut=1.5):
    d = max(d, 1.0)
    return max(umi_los(d, fc, h_bs, h_ut),
               35.3 * math.log10(d) + 22.4 + 21.3 * math.log10(fc) - 0.3 * (h_ut - 1.5))


def ris_radar(d1, d2, theta, a=0.5, b=0.5, fc=28.0, gt=1.0, gr=1.0):
    """Bistatic radar equation with a flat-plate cross-section."""
    lam = C / (fc * 1e9)
    sigma = 4 * math.pi * (a * b * math.cos(theta)) ** 2 / lam ** 2
    pr_pt = gt * gr * lam ** 2 * sigma / ((4 * math.pi) ** 3 * d1 ** 2 * d2 ** 2)
    return -10 * math.log10(pr_pt)


def far_field(a=0.5, b=0.5, fc=28.0):
    return 2 * max(a, b) ** 2 / (C / (fc * 1e9))


def enumerate_link(tx, rx, boxes, panels, fc=28.0):
    """All candidates ``(loss, order, kind, panel_id)`` for one link, best first.

    ``panels`` holds ``(id, position, unit normal, a, b)`` tuples.
    """
    tx = np.asarray(tx, float)
    rx = np.asarray(rx, float)
    d = float(np.linalg.norm(rx - tx))
    if los(tx, rx, boxes):
        cands = [(umi_los(d, fc), 0, "direct_los", None)]
    else:
        cands = [(umi_nlos(d, fc), 0, "direct_nlos", None)]
    for order, (pid, pos, n, a, b) in enumerate(sorted(panels, key=lambda x: x[0]), start=1):
        pos = np.asarray(pos, float)
        n = np.asarray(n, float)
        v1, v2 = tx - pos, rx - pos
        if not (n @ v1 > 0 and n @ v2 > 0):
            continue
        if not (los(tx, pos, boxes) and los(pos, rx, boxes)):
            continue
        d1, d2 = float(np.linalg.norm(v1)), float(np.linalg.norm(v2))
        ff = far_field(a, b, fc)
        if d1 < ff or d2 < ff:
            continue
        theta = math.acos(max(-1.0, min(1.0, float(n @ v1) / d1)))
        if theta >= math.pi / 2:
            continue  # grazing after rounding
        cands.append((ris_radar(d1, d2, theta, a, b, fc), order, "ris", pid))
    cands.sort(key=lambda c: (c[0], c[1]))
    return cands


def tilted_normal(panel_pos, align_to, downtilt_deg):
    phi = math.atan2(align_to[1] - panel_pos[1], align_to[0] - panel_pos[0])
    e = math.radians(downtilt_deg)
    return (math.cos(e) * math.cos(phi), math.cos(e) * math.sin(phi), -math.sin(e))
