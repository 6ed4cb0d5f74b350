"""Sequential convex clipping kernels, numba-compiled.

All kernels clip an axis-aligned square by a stack of half-planes
{p : n . p <= b} and return the surviving vertex buffer. Vertex order
stays counter-clockwise throughout.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _clip_pass(cur, k, nx, ny, b, out):
    m = 0
    for j in range(k):
        ax = cur[j, 0]
        ay = cur[j, 1]
        j2 = j + 1
        if j2 == k:
            j2 = 0
        bx = cur[j2, 0]
        by = cur[j2, 1]
        da = nx * ax + ny * ay - b
        db = nx * bx + ny * by - b
        if da <= 0.0:
            out[m, 0] = ax
            out[m, 1] = ay
            m += 1
            if db > 0.0:
                t = da / (da - db)
                out[m, 0] = ax + t * (bx - ax)
                out[m, 1] = ay + t * (by - ay)
                m += 1
        elif db <= 0.0:
            t = da / (da - db)
            out[m, 0] = ax + t * (bx - ax)
            out[m, 1] = ay + t * (by - ay)
            m += 1
    return m


@njit(cache=True)
def _clip_all(normals, offsets, cx, cy, half):
    ncon = normals.shape[0]
    cap = ncon + 8
    cur = np.empty((cap, 2))
    nxt = np.empty((cap, 2))
    cur[0, 0] = cx - half
    cur[0, 1] = cy - half
    cur[1, 0] = cx + half
    cur[1, 1] = cy - half
    cur[2, 0] = cx + half
    cur[2, 1] = cy + half
    cur[3, 0] = cx - half
    cur[3, 1] = cy + half
    k = 4
    for c in range(ncon):
        k = _clip_pass(cur, k, normals[c, 0], normals[c, 1], offsets[c], nxt)
        tmp = cur
        cur = nxt
        nxt = tmp
        if k == 0:
            break
    return cur, k


@njit(cache=True)
def clip_refined(normals, offsets, cx, cy, half):
    """Two-pass clip: the full box first, then a snug re-clip for precision.

    Returns (buffer, count, touched). touched=True means the result reached
    the box boundary, so it must not be trusted as a bounded polygon.
    Intersection points inherit roundoff from the segment endpoints they are
    computed on, so the second pass restarts from a box at the scale of the
    pass-1 result.
    """
    buf, k = _clip_all(normals, offsets, cx, cy, half)
    lim = 0.999 * half
    touched = False
    for j in range(k):
        if abs(buf[j, 0] - cx) > lim or abs(buf[j, 1] - cy) > lim:
            touched = True
    if touched or k < 3:
        return buf, k, touched
    xmin = buf[0, 0]
    xmax = buf[0, 0]
    ymin = buf[0, 1]
    ymax = buf[0, 1]
    for j in range(1, k):
        x = buf[j, 0]
        y = buf[j, 1]
        if x < xmin:
            xmin = x
        if x > xmax:
            xmax = x
        if y < ymin:
            ymin = y
        if y > ymax:
            ymax = y
    cx2 = 0.5 * (xmin + xmax)
    cy2 = 0.5 * (ymin + ymax)
    ext = xmax - xmin
    if ymax - ymin > ext:
        ext = ymax - ymin
    half2 = 0.75 * ext + 1e-6 * (1.0 + abs(cx2) + abs(cy2))
    buf2, k2 = _clip_all(normals, offsets, cx2, cy2, half2)
    return buf2, k2, False


@njit(cache=True)
def clip_refined_area(normals, offsets, cx, cy, half):
    """Area of the intersection; -1.0 signals that the box was touched."""
    buf, k, touched = clip_refined(normals, offsets, cx, cy, half)
    if touched:
        return -1.0
    if k < 3:
        return 0.0
    s = 0.0
    for j in range(k):
        j2 = j + 1
        if j2 == k:
            j2 = 0
        s += buf[j, 0] * buf[j2, 1] - buf[j, 1] * buf[j2, 0]
    area = 0.5 * s
    if area < 0.0:
        area = 0.0
    return area


@njit(cache=True)
def _area_box(normals, z_others, z, cur, nxt, cx, cy, half):
    """Single-pass clip area inside a snug caller-supplied box.

    The box must be known a priori to contain the cell; starting at the cell's
    own scale keeps intersection roundoff at machine precision, which is what
    earns the single pass. Touching the box rim returns -1.0.
    """
    ncon = normals.shape[0]
    cur[0, 0] = cx - half
    cur[0, 1] = cy - half
    cur[1, 0] = cx + half
    cur[1, 1] = cy - half
    cur[2, 0] = cx + half
    cur[2, 1] = cy + half
    cur[3, 0] = cx - half
    cur[3, 1] = cy + half
    k = 4
    flip = False
    for c in range(ncon):
        if flip:
            k = _clip_pass(nxt, k, normals[c, 0], normals[c, 1], z_others[c] - z, cur)
        else:
            k = _clip_pass(cur, k, normals[c, 0], normals[c, 1], z_others[c] - z, nxt)
        flip = not flip
        if k == 0:
            return 0.0
    buf = nxt if flip else cur
    lim = 0.999 * half
    for j in range(k):
        if abs(buf[j, 0] - cx) > lim or abs(buf[j, 1] - cy) > lim:
            return -1.0
    if k < 3:
        return 0.0
    s = 0.0
    for j in range(k):
        j2 = j + 1
        if j2 == k:
            j2 = 0
        s += buf[j, 0] * buf[j2, 1] - buf[j, 1] * buf[j2, 0]
    area = 0.5 * s
    if area < 0.0:
        area = 0.0
    return area


@njit(cache=True)
def rooted_bisect(normals, z_others, z_cur, step, z_min, target, tight, slack,
                  height_tol, cx, cy, half):
    """Expand a bracket downward from z_cur, then drive the cell area to the
    target with a safeguarded false-position search.

    The exit is asymmetric on purpose: undershooting the target area by up to
    slack is fine (the point sits too high and later updates can still lower
    it) but overshooting beyond the tight tolerance is not, because a
    monotone scheme can never raise a point again. Returns (z, status):
    status 0.0 on success, 1.0 when the bracket bottomed out at z_min with
    the area still short of target, -1.0 when a clip left the supplied box.
    Keeping the whole search in one call matters: the cost of a single small
    clip is dominated by call overhead, not arithmetic.
    """
    cap = normals.shape[0] + 8
    cur = np.empty((cap, 2))
    nxt = np.empty((cap, 2))
    z_lo = z_cur - step
    if z_lo < z_min:
        z_lo = z_min
    while True:
        area_lo = _area_box(normals, z_others, z_lo, cur, nxt, cx, cy, half)
        if area_lo < 0.0:
            return z_cur, -1.0
        if area_lo >= target:
            break
        if z_lo <= z_min:
            return z_lo, 1.0
        step *= 4.0
        z_lo = z_cur - step
        if z_lo < z_min:
            z_lo = z_min
    # false position with the Illinois safeguard; f = area - target is
    # decreasing in z, f(lo) >= 0 >= f(hi) throughout
    lo = z_lo
    hi = z_cur
    f_lo = area_lo - target
    f_hi = -target  # area(z_cur) < target whenever this stage is reached
    stale = 0
    for _ in range(200):
        if hi - lo <= height_tol:
            return hi, 0.0
        denom = f_lo - f_hi
        if denom > 0.0:
            zm = lo + (hi - lo) * (f_lo / denom)
        else:
            zm = 0.5 * (lo + hi)
        spread = hi - lo
        if zm <= lo + 0.01 * spread or zm >= hi - 0.01 * spread:
            zm = 0.5 * (lo + hi)
        area = _area_box(normals, z_others, zm, cur, nxt, cx, cy, half)
        if area < 0.0:
            return zm, -1.0
        d = area - target
        if -tight <= d <= tight or -slack <= d < 0.0:
            return zm, 0.0
        if d > 0.0:
            lo = zm
            f_lo = d
            stale = stale + 1 if stale > 0 else 1
            if stale >= 2:
                f_hi *= 0.5
        else:
            hi = zm
            f_hi = d
            stale = stale - 1 if stale < 0 else -1
            if stale <= -2:
                f_lo *= 0.5
    return hi, 0.0
