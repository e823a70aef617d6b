"""Compiled rollout loops.

The planner evaluates dozens of candidate rollouts per environment step, and
the per-step arrays are small enough that numpy dispatch overhead dominates.
These kernels run the same arithmetic as the reference numpy methods on
``BlendRolloutEngine`` / ``ActionRolloutEngine`` as explicit loops under
numba.  Keep them in sync with the reference implementations; a regression
test compares the two.
"""

import math

import numpy as np
from numba import njit

EPS_DIST = 1e-3
_LOG_2PI = math.log(2.0 * math.pi)


@njit(cache=True)
def dg(x):
    """Scalar digamma, x > 0: upward recurrence then the Stirling tail."""
    acc = 0.0
    while x < 10.0:
        acc -= 1.0 / x
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    tail = inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 / 132.0))))
    return acc + math.log(x) - 0.5 * inv - tail


@njit(cache=True)
def tg(x):
    """Scalar trigamma, x > 0."""
    acc = 0.0
    while x < 10.0:
        acc += 1.0 / (x * x)
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    return acc + inv * (1.0 + inv * (0.5 + inv * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 / 30.0)))))


@njit(cache=True)
def digamma_arr(x):
    out = np.empty_like(x)
    for i in range(x.size):
        out[i] = dg(x[i])
    return out


@njit(cache=True)
def trigamma_arr(x):
    out = np.empty_like(x)
    for i in range(x.size):
        out[i] = tg(x[i])
    return out


@njit(cache=True)
def inv_digamma_arr(y, x):
    """Newton solve of digamma(x) = y, elementwise; x holds the init."""
    for _ in range(50):
        done = True
        for i in range(y.size):
            f = dg(x[i]) - y[i]
            if abs(f) >= 1e-12:
                done = False
            xi = x[i] - f / tg(x[i])
            x[i] = xi if xi > 1e-300 else 1e-300
        if done:
            break
    return x


@njit(cache=True)
def avg_loglik(alpha, mean_log):
    a0 = 0.0
    s = 0.0
    for i in range(alpha.size):
        a0 += alpha[i]
        s += (alpha[i] - 1.0) * mean_log[i] - math.lgamma(alpha[i])
    return math.lgamma(a0) + s


@njit(cache=True)
def blend_rollout(q0, v0, betas, obs_traj, goal_traj, radii,
                  k_p, k_d, c_soft, w_goal, k_curl, w_curl, k_damp, w_damp,
                  k_rep, infl, w_far, w_near, rw, tw,
                  cw_goal, cw_col, cw_prox, c_infl, cw_ctrl,
                  dt, vmax, width, height, diag, particle_radius,
                  lambda_pi, z, stochastic,
                  scores, states, acts):
    B = betas.shape[0]
    H = acts.shape[0]
    m = radii.shape[0]
    for b in range(B):
        qx, qy = q0[0], q0[1]
        vx, vy = v0[0], v0[1]
        if b == 0:
            states[0, 0], states[0, 1] = qx, qy
            states[0, 2], states[0, 3] = vx, vy
        score = 0.0
        for t in range(H):
            gx, gy = goal_traj[t, 0], goal_traj[t, 1]
            dx_g, dy_g = gx - qx, gy - qy
            dn = math.sqrt(dx_g * dx_g + dy_g * dy_g)
            ax = k_p * dx_g / (dn + c_soft)
            ay = k_p * dy_g / (dn + c_soft)
            mgx, mgy = ax - k_d * vx, ay - k_d * vy
            cx_, cy_ = -k_curl * ay, k_curl * ax
            mdx, mdy = -k_damp * vx, -k_damp * vy

            b_g = betas[b, 0]
            b_c = betas[b, 1] - betas[b, 2]
            b_ci = betas[b, 1] + betas[b, 2]
            b_d = betas[b, 3]
            iso = b_g * w_goal + b_ci * w_curl + b_d * w_damp
            ex = b_g * w_goal * mgx + b_c * w_curl * cx_ + b_d * w_damp * mdx
            ey = b_g * w_goal * mgy + b_c * w_curl * cy_ + b_d * w_damp * mdy
            s00 = 0.0
            s01 = 0.0
            s11 = 0.0

            prox = 0.0
            hit = False
            for j in range(m):
                dx = qx - obs_traj[t, j, 0]
                dy = qy - obs_traj[t, j, 1]
                r = math.sqrt(dx * dx + dy * dy)
                surf = r - radii[j]
                if r <= radii[j] + particle_radius:
                    hit = True
                rel = 1.0 - surf / c_infl
                if rel > 0.0:
                    prox += rel * rel
                br = betas[b, 4]
                iso += br * w_far
                if surf < infl:
                    dist = surf if surf > EPS_DIST else EPS_DIST
                    rr = r if r > EPS_DIST else EPS_DIST
                    ux, uy = dx / rr, dy / rr
                    g = (1.0 - dist / infl) ** 2 * (infl / (dist + 1.0))
                    mscale = k_rep / (dist * dist)
                    w_eta = br * (w_far + w_near * g * rw) * mscale
                    ex += w_eta * ux
                    ey += w_eta * uy
                    iso += br * g * w_near * tw
                    an = (rw - tw) * w_near * br * g
                    s00 += an * ux * ux
                    s01 += an * ux * uy
                    s11 += an * uy * uy

            l00 = iso + s00
            l11 = iso + s11
            l01 = s01
            det = l00 * l11 - l01 * l01
            Ax = (l11 * ex - l01 * ey) / det
            Ay = (l00 * ey - l01 * ex) / det
            quad = 0.0
            if stochastic:
                sc00 = l11 / det
                sc01 = -l01 / det
                sc11 = l00 / det
                c00 = math.sqrt(sc00)
                c10 = sc01 / c00
                h2 = sc11 - c10 * c10
                c11 = math.sqrt(h2) if h2 > 1e-300 else math.sqrt(1e-300)
                rx = c00 * z[t, b, 0]
                ry = c10 * z[t, b, 0] + c11 * z[t, b, 1]
                Ax += rx
                Ay += ry
                quad = 0.5 * (l00 * rx * rx + 2.0 * l01 * rx * ry + l11 * ry * ry)

            gd = math.sqrt((qx - gx) ** 2 + (qy - gy) ** 2)
            cost = cw_goal * gd / diag
            outside = qx < 0.0 or qy < 0.0 or qx > width or qy > height
            if hit or outside:
                cost += cw_col
            cost += cw_prox * prox + cw_ctrl * (Ax * Ax + Ay * Ay)
            score -= cost
            if lambda_pi > 0.0:
                score += lambda_pi * (0.5 * math.log(det) - _LOG_2PI - quad)

            vx += Ax * dt
            vy += Ay * dt
            sp = math.sqrt(vx * vx + vy * vy)
            if sp > vmax:
                f = vmax / sp
                vx *= f
                vy *= f
            qx += vx * dt
            qy += vy * dt
            if b == 0:
                acts[t, 0], acts[t, 1] = Ax, Ay
                states[t + 1, 0], states[t + 1, 1] = qx, qy
                states[t + 1, 2], states[t + 1, 3] = vx, vy
        scores[b] = score


@njit(cache=True)
def action_rollout(q0, v0, actions, obs_traj, goal_traj, radii,
                   cw_goal, cw_col, cw_prox, c_infl, cw_ctrl,
                   dt, vmax, width, height, diag, particle_radius,
                   scores):
    B = actions.shape[0]
    H = actions.shape[1]
    m = radii.shape[0]
    for b in range(B):
        qx, qy = q0[0], q0[1]
        vx, vy = v0[0], v0[1]
        score = 0.0
        for t in range(H):
            Ax, Ay = actions[b, t, 0], actions[b, t, 1]
            gx, gy = goal_traj[t, 0], goal_traj[t, 1]
            prox = 0.0
            hit = False
            for j in range(m):
                dx = qx - obs_traj[t, j, 0]
                dy = qy - obs_traj[t, j, 1]
                r = math.sqrt(dx * dx + dy * dy)
                if r <= radii[j] + particle_radius:
                    hit = True
                rel = 1.0 - (r - radii[j]) / c_infl
                if rel > 0.0:
                    prox += rel * rel
            gd = math.sqrt((qx - gx) ** 2 + (qy - gy) ** 2)
            cost = cw_goal * gd / diag
            outside = qx < 0.0 or qy < 0.0 or qx > width or qy > height
            if hit or outside:
                cost += cw_col
            cost += cw_prox * prox + cw_ctrl * (Ax * Ax + Ay * Ay)
            score -= cost
            vx += Ax * dt
            vy += Ay * dt
            sp = math.sqrt(vx * vx + vy * vy)
            if sp > vmax:
                f = vmax / sp
                vx *= f
                vy *= f
            qx += vx * dt
            qy += vy * dt
        scores[b] = score
