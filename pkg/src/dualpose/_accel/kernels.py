"""Hot numeric kernels, written once in a numba-compatible numpy subset.

`dualpose._accel` compiles the top-level kernels with `numba.njit` when the
numba backend is active; otherwise the very same functions run as plain
numpy. Helpers carry `register_jitable` so they are callable from both
worlds without duplication.
"""

import numpy as np

try:
    from numba.extending import register_jitable
except ImportError:  # pragma: no cover - numba is a hard dep, but stay importable
    def register_jitable(func=None, **kwargs):
        if func is None:
            return lambda f: f
        return func


@register_jitable
def _rodrigues_matrix(r):
    # R = I + a*K + b*K^2 with K = skew(r); Taylor branch keeps it exact at 0.
    x, y, z = r[0], r[1], r[2]
    t2 = x * x + y * y + z * z
    t = np.sqrt(t2)
    if t < 1e-6:
        a = 1.0 - t2 / 6.0
        b = 0.5 - t2 / 24.0
    else:
        a = np.sin(t) / t
        b = (1.0 - np.cos(t)) / t2
    R = np.empty((3, 3))
    R[0, 0] = 1.0 - b * (y * y + z * z)
    R[0, 1] = -a * z + b * x * y
    R[0, 2] = a * y + b * x * z
    R[1, 0] = a * z + b * x * y
    R[1, 1] = 1.0 - b * (x * x + z * z)
    R[1, 2] = -a * x + b * y * z
    R[2, 0] = -a * y + b * x * z
    R[2, 1] = a * x + b * y * z
    R[2, 2] = 1.0 - b * (x * x + y * y)
    return R


@register_jitable
def _rodrigues_right_jacobian(r):
    # Jr = I - b*K + c*K^2;  Exp(r + d) ~= Exp(r) Exp(Jr d)
    x, y, z = r[0], r[1], r[2]
    t2 = x * x + y * y + z * z
    t = np.sqrt(t2)
    if t < 1e-6:
        b = 0.5 - t2 / 24.0
        c = 1.0 / 6.0 - t2 / 120.0
    else:
        b = (1.0 - np.cos(t)) / t2
        c = (t - np.sin(t)) / (t2 * t)
    J = np.empty((3, 3))
    J[0, 0] = 1.0 - c * (y * y + z * z)
    J[0, 1] = b * z + c * x * y
    J[0, 2] = -b * y + c * x * z
    J[1, 0] = -b * z + c * x * y
    J[1, 1] = 1.0 - c * (x * x + z * z)
    J[1, 2] = b * x + c * y * z
    J[2, 0] = b * y + c * x * z
    J[2, 1] = -b * x + c * y * z
    J[2, 2] = 1.0 - c * (x * x + y * y)
    return J


@register_jitable
def _pnp_residuals(world, image, fx, fy, cx, cy, r, t, eps_depth, penalty):
    """Stacked reprojection residuals (pred - obs), penalized behind camera."""
    R = _rodrigues_matrix(r)
    cam = world @ R.T + t
    X = cam[:, 0]
    Y = cam[:, 1]
    Z = cam[:, 2]
    bad = Z <= eps_depth
    Zs = np.where(bad, 1.0, Z)
    rx = np.where(bad, penalty, fx * X / Zs + cx - image[:, 0])
    ry = np.where(bad, penalty, fy * Y / Zs + cy - image[:, 1])
    n = world.shape[0]
    res = np.empty(2 * n)
    res[0::2] = rx
    res[1::2] = ry
    return res


@register_jitable
def _residual_jacobian(world, image, fx, fy, cx, cy, r, t, eps_depth, penalty):
    R = _rodrigues_matrix(r)
    Jr = _rodrigues_right_jacobian(r)
    A = R @ Jr
    W = world @ R.T  # rotated points, cam = W + t
    X = W[:, 0] + t[0]
    Y = W[:, 1] + t[1]
    Z = W[:, 2] + t[2]
    bad = Z <= eps_depth
    Zs = np.where(bad, 1.0, Z)
    inv_z = 1.0 / Zs
    inv_z2 = inv_z * inv_z

    rx = np.where(bad, penalty, fx * X * inv_z + cx - image[:, 0])
    ry = np.where(bad, penalty, fy * Y * inv_z + cy - image[:, 1])

    n = world.shape[0]
    J = np.zeros((n, 2, 6))
    zero = np.zeros(n)
    gx = np.where(bad, zero, fx * inv_z)
    gy = np.where(bad, zero, fy * inv_z)
    hx = np.where(bad, zero, -fx * X * inv_z2)
    hy = np.where(bad, zero, -fy * Y * inv_z2)
    # d(cam)/d(r_k) = -(W x A[:, k]); chain through the projection.
    for k in range(3):
        a0, a1, a2 = A[0, k], A[1, k], A[2, k]
        dcx = -(W[:, 1] * a2 - W[:, 2] * a1)
        dcy = -(W[:, 2] * a0 - W[:, 0] * a2)
        dcz = -(W[:, 0] * a1 - W[:, 1] * a0)
        J[:, 0, k] = gx * dcx + hx * dcz
        J[:, 1, k] = gy * dcy + hy * dcz
    J[:, 0, 3] = gx
    J[:, 0, 5] = hx
    J[:, 1, 4] = gy
    J[:, 1, 5] = hy

    res = np.empty(2 * n)
    res[0::2] = rx
    res[1::2] = ry
    return res, J.reshape(2 * n, 6)


def pnp_residual_jacobian(world, image, fx, fy, cx, cy, r, t, eps_depth, penalty):
    """Residuals and their analytic Jacobian wrt (rodrigues, translation).

    Rows alternate x/y per point; columns are (r0, r1, r2, t0, t1, t2).
    Behind-camera points get penalty residuals and zero Jacobian rows.
    """
    return _residual_jacobian(world, image, fx, fy, cx, cy, r, t, eps_depth, penalty)


def lm_pnp(world, image, fx, fy, cx, cy, r0, t0,
           lam0, max_iter, step_tol, grad_tol, eps_depth, penalty):
    """Levenberg-Marquardt over a 6-dof (rodrigues, translation) state.

    Damping scales the normal-equation diagonal; rejected trials multiply
    the damping by 10, accepted ones divide it by 10. Returns the state,
    final cost, iteration count, a converged flag and the accepted-cost
    history (padded; `hist_len` entries are valid).
    """
    state = np.empty(6)
    state[:3] = r0
    state[3:] = t0
    res = _pnp_residuals(world, image, fx, fy, cx, cy, state[:3], state[3:],
                         eps_depth, penalty)
    cost = np.sum(res * res)
    hist = np.empty(max_iter + 1)
    hist[0] = cost
    hist_len = 1

    lam = lam0
    converged = False
    it = 0
    need_jac = True
    J = np.zeros((2 * world.shape[0], 6))
    g = np.zeros(6)
    JtJ = np.zeros((6, 6))
    while it < max_iter:
        it += 1
        if need_jac:
            res, J = _residual_jacobian(world, image, fx, fy, cx, cy,
                                        state[:3], state[3:], eps_depth, penalty)
            g = J.T @ res
            JtJ = J.T @ J
            if np.sqrt(np.sum(g * g)) < grad_tol:
                converged = True
                break
            need_jac = False
        H = JtJ.copy()
        for d in range(6):
            H[d, d] += lam * max(JtJ[d, d], 1e-12)
        step = np.linalg.solve(H, -g)
        if np.sqrt(np.sum(step * step)) < step_tol:
            converged = True
            break
        trial = state + step
        tres = _pnp_residuals(world, image, fx, fy, cx, cy, trial[:3], trial[3:],
                              eps_depth, penalty)
        tcost = np.sum(tres * tres)
        if tcost < cost:
            state = trial
            cost = tcost
            hist[hist_len] = cost
            hist_len += 1
            lam = max(lam * 0.1, 1e-12)
            need_jac = True
        else:
            lam = lam * 10.0
            if lam > 1e14:
                break
    rms = np.sqrt(cost / world.shape[0])
    return state[:3].copy(), state[3:].copy(), rms, it, converged, hist, hist_len


def smo_solve(K, y, c, tol, max_iter):
    """Pairwise dual ascent for the soft-margin SVM (maximal-violating pair,
    second-order working-set selection). Deterministic: ties resolve to the
    lowest index via argmax/argmin.

    Returns (alpha, G, iterations, gap) with G the gradient of the dual
    objective 0.5*a'Qa - e'a and gap the final KKT violation m - M.
    """
    n = y.shape[0]
    alpha = np.zeros(n)
    G = -np.ones(n)
    Kd = np.empty(n)
    for d in range(n):
        Kd[d] = K[d, d]
    pos = y > 0.0
    it = 0
    gap = np.inf
    while it < max_iter:
        yG = y * G
        up = (pos & (alpha < c)) | (~pos & (alpha > 0.0))
        low = (pos & (alpha > 0.0)) | (~pos & (alpha < c))
        up_vals = np.where(up, -yG, -np.inf)
        i = np.argmax(up_vals)
        m = up_vals[i]
        low_vals = np.where(low, -yG, np.inf)
        M = np.min(low_vals)
        gap = m - M
        if gap < tol:
            break
        it += 1

        Ki = K[i]
        grad_diff = m + yG
        quad = np.maximum(Kd[i] + Kd - 2.0 * Ki, 1e-12)
        score = np.where(low & (grad_diff > 0.0), grad_diff * grad_diff / quad, -np.inf)
        j = np.argmax(score)
        Kj = K[j]

        q = max(Kd[i] + Kd[j] - 2.0 * Ki[j], 1e-12)
        old_ai = alpha[i]
        old_aj = alpha[j]
        if y[i] != y[j]:
            delta = (-G[i] - G[j]) / q
            diff = old_ai - old_aj
            ai = old_ai + delta
            aj = old_aj + delta
            if diff > 0.0:
                if aj < 0.0:
                    aj = 0.0
                    ai = diff
            else:
                if ai < 0.0:
                    ai = 0.0
                    aj = -diff
            if diff > 0.0:
                if ai > c:
                    ai = c
                    aj = c - diff
            else:
                if aj > c:
                    aj = c
                    ai = c + diff
        else:
            delta = (G[i] - G[j]) / q
            s = old_ai + old_aj
            ai = old_ai - delta
            aj = old_aj + delta
            if s > c:
                if ai > c:
                    ai = c
                    aj = s - c
            else:
                if aj < 0.0:
                    aj = 0.0
                    ai = s
            if s > c:
                if aj > c:
                    aj = c
                    ai = s - c
            else:
                if ai < 0.0:
                    ai = 0.0
                    aj = s
        alpha[i] = ai
        alpha[j] = aj
        dai = ai - old_ai
        daj = aj - old_aj
        G = G + y * (y[i] * dai * Ki + y[j] * daj * Kj)
    return alpha, G, it, gap


def smo_solve_loops(K, y, c, tol, max_iter):
    """Loop form of smo_solve for the numba backend: same algorithm and the
    same tie-breaking (first index wins), without per-iteration temporaries."""
    n = y.shape[0]
    alpha = np.zeros(n)
    G = -np.ones(n)
    Kd = np.empty(n)
    for d in range(n):
        Kd[d] = K[d, d]
    it = 0
    gap = np.inf
    while it < max_iter:
        m = -np.inf
        i = -1
        M = np.inf
        for t in range(n):
            a_t = alpha[t]
            my_g = -y[t] * G[t]
            if y[t] > 0.0:
                in_up = a_t < c
                in_low = a_t > 0.0
            else:
                in_up = a_t > 0.0
                in_low = a_t < c
            if in_up and my_g > m:
                m = my_g
                i = t
            if in_low and my_g < M:
                M = my_g
        gap = m - M
        if gap < tol or i < 0:
            break
        it += 1

        Ki = K[i]
        kdi = Kd[i]
        best = -np.inf
        j = -1
        for t in range(n):
            a_t = alpha[t]
            if y[t] > 0.0:
                in_low = a_t > 0.0
            else:
                in_low = a_t < c
            if not in_low:
                continue
            grad_diff = m + y[t] * G[t]
            if grad_diff > 0.0:
                q_t = kdi + Kd[t] - 2.0 * Ki[t]
                if q_t < 1e-12:
                    q_t = 1e-12
                score = grad_diff * grad_diff / q_t
                if score > best:
                    best = score
                    j = t
        Kj = K[j]

        q = kdi + Kd[j] - 2.0 * Ki[j]
        if q < 1e-12:
            q = 1e-12
        old_ai = alpha[i]
        old_aj = alpha[j]
        if y[i] != y[j]:
            delta = (-G[i] - G[j]) / q
            diff = old_ai - old_aj
            ai = old_ai + delta
            aj = old_aj + delta
            if diff > 0.0:
                if aj < 0.0:
                    aj = 0.0
                    ai = diff
            else:
                if ai < 0.0:
                    ai = 0.0
                    aj = -diff
            if diff > 0.0:
                if ai > c:
                    ai = c
                    aj = c - diff
            else:
                if aj > c:
                    aj = c
                    ai = c + diff
        else:
            delta = (G[i] - G[j]) / q
            s = old_ai + old_aj
            ai = old_ai - delta
            aj = old_aj + delta
            if s > c:
                if ai > c:
                    ai = c
                    aj = s - c
            else:
                if aj < 0.0:
                    aj = 0.0
                    ai = s
            if s > c:
                if aj > c:
                    aj = c
                    ai = s - c
            else:
                if ai < 0.0:
                    ai = 0.0
                    aj = s
        alpha[i] = ai
        alpha[j] = aj
        s1 = y[i] * (ai - old_ai)
        s2 = y[j] * (aj - old_aj)
        for t in range(n):
            G[t] = G[t] + y[t] * (s1 * Ki[t] + s2 * Kj[t])
    return alpha, G, it, gap
