"""Pure-Python trial and network kernels.

Reference implementation of the hot loops. The compiled core in ``_core.pyx``
is a statement-for-statement transcription of this module; keep the order of
floating-point operations identical in both so that results stay bit-equal
(the extension is built with FMA contraction disabled for the same reason).
"""

from __future__ import annotations

from math import atan2, cos, exp, fabs, fmod, pi, sin, sqrt

TWO_PI = 2.0 * pi

KIND_AGENT = 0
KIND_REPLICA = 1
KIND_OBJECT = 2


def wrap_angle(a):
    """Normalize an angle into [-pi, pi)."""
    a = fmod(a + pi, TWO_PI)
    if a < 0.0:
        a += TWO_PI
    return a - pi


def _sig(x):
    if x >= 0.0:
        return 1.0 / (1.0 + exp(-x))
    e = exp(x)
    return e / (1.0 + e)


def _sense(x, y, heading, radius, kinds, n_bodies, obs, fov, n_states):
    ox = x[obs]
    oy = y[obs]
    best = -1
    if fov <= 0.0:
        # Forward ray, unlimited range; nearest intersection wins.
        dx = cos(heading[obs])
        dy = sin(heading[obs])
        best_t = 0.0
        for b in range(n_bodies):
            if b == obs:
                continue
            mx = x[b] - ox
            my = y[b] - oy
            proj = mx * dx + my * dy
            c0 = mx * mx + my * my - radius[b] * radius[b]
            disc = proj * proj - c0
            if disc < 0.0:
                continue
            t = proj - sqrt(disc)
            if t <= 0.0:
                continue
            if best < 0 or t < best_t:
                best_t = t
                best = b
    else:
        # Angular sector of half-angle fov/2 about the heading; a body
        # qualifies when the bearing of its center lies strictly inside,
        # nearest center wins.
        half = 0.5 * fov
        best_d = 0.0
        for b in range(n_bodies):
            if b == obs:
                continue
            mx = x[b] - ox
            my = y[b] - oy
            delta = wrap_angle(atan2(my, mx) - heading[obs])
            if fabs(delta) >= half:
                continue
            d2 = mx * mx + my * my
            if best < 0 or d2 < best_d:
                best_d = d2
                best = b
    if best < 0:
        return 0
    if n_states == 2:
        return 1
    return 1 if kinds[best] == KIND_OBJECT else 2


def sense(x, y, heading, radius, kinds, obs, fov, n_states):
    """Sensor state seen by body ``obs``: 0 = nothing, else a kind code."""
    return _sense(x, y, heading, radius, kinds, len(kinds), obs, fov, n_states)


def _clamp1(v):
    if v > 1.0:
        return 1.0
    if v < -1.0:
        return -1.0
    return v


def _controller_output(is_net, params, h, state, hidden, ridx, scratch):
    """Wheel commands in [-1, 1] for one robot given its sensor state."""
    if is_net == 0:
        vl = _clamp1(params[2 * state])
        vr = _clamp1(params[2 * state + 1])
        return vl, vr
    # Single-input Elman network: weights packed row-major as
    # w_in (2 x h: input row then bias row), w_rec (h x h), w_out ((h+1) x 2).
    rec0 = 2 * h
    out0 = 2 * h + h * h
    xin = float(state)
    for k in range(h):
        acc = xin * params[k] + params[h + k]
        for m in range(h):
            acc += hidden[ridx, m] * params[rec0 + m * h + k]
        scratch[k] = _sig(acc)
    for k in range(h):
        hidden[ridx, k] = scratch[k]
    accl = params[out0 + h * 2]
    accr = params[out0 + h * 2 + 1]
    for m in range(h):
        accl += hidden[ridx, m] * params[out0 + m * 2]
        accr += hidden[ridx, m] * params[out0 + m * 2 + 1]
    vl = 2.0 * _sig(accl) - 1.0
    vr = 2.0 * _sig(accr) - 1.0
    return vl, vr


def _resolve_overlaps(x, y, heading, radius, mass, kinds, vlin, n_bodies,
                      overlap_tol, max_sweeps, mu_static, friction_unit):
    for _ in range(max_sweeps):
        resolved = 0
        for i in range(n_bodies - 1):
            for j in range(i + 1, n_bodies):
                dx = x[j] - x[i]
                dy = y[j] - y[i]
                rsum = radius[i] + radius[j]
                d2 = dx * dx + dy * dy
                if d2 >= rsum * rsum:
                    continue
                d = sqrt(d2)
                if d < 1e-12:
                    nx = 1.0
                    ny = 0.0
                    overlap = rsum
                else:
                    nx = dx / d
                    ny = dy / d
                    overlap = rsum - d
                if overlap <= overlap_tol:
                    continue
                ki = kinds[i]
                kj = kinds[j]
                if (ki == KIND_OBJECT) == (kj == KIND_OBJECT):
                    share_i = 0.5
                    share_j = 0.5
                else:
                    # Robot-object contact: the object yields only when the
                    # robot is actually driving into it and the push proxy
                    # (overlap x robot mass) beats the static-friction hold.
                    if kj == KIND_OBJECT:
                        rob = i
                        push = vlin[rob] * (cos(heading[rob]) * nx
                                            + sin(heading[rob]) * ny)
                        m_rob = mass[i]
                        m_obj = mass[j]
                    else:
                        rob = j
                        push = vlin[rob] * (-(cos(heading[rob]) * nx)
                                            - sin(heading[rob]) * ny)
                        m_rob = mass[j]
                        m_obj = mass[i]
                    moves = (push > 0.0
                             and overlap * m_rob > mu_static * m_obj * friction_unit)
                    if moves:
                        inv_o = 1.0 / m_obj
                        inv_r = 1.0 / m_rob
                        share_obj = inv_o / (inv_o + inv_r)
                    else:
                        share_obj = 0.0
                    if kj == KIND_OBJECT:
                        share_i = 1.0 - share_obj
                        share_j = share_obj
                    else:
                        share_i = share_obj
                        share_j = 1.0 - share_obj
                x[i] -= nx * overlap * share_i
                y[i] -= ny * overlap * share_i
                x[j] += nx * overlap * share_j
                y[j] += ny * overlap * share_j
                resolved += 1
        if resolved == 0:
            break


def run_trial(x, y, heading, radius, mass, kinds,
              a_is_net, a_params, a_h, a_fov,
              r_is_net, r_params, r_h, r_fov,
              n_states, control_steps, substeps, physics_dt,
              max_speed, axle, overlap_tol, max_sweeps,
              mu_static, friction_unit, sensor_delay,
              noise, traj, states, hidden, scratch,
              pending, pending_len):
    """Integrate one or more control cycles; pose arrays advance in place.

    ``noise`` holds the per-control-cycle wheel multipliers, pre-drawn in
    body order. ``traj`` receives poses at every control boundary, ``states``
    the sensor readings, ``hidden`` carries recurrent-controller state
    (zeroed by the caller at trial start). ``pending`` is the FIFO of sensed
    states not yet acted on (sensor latency); the new fill level is returned
    so stepping can be resumed cycle by cycle.
    """
    n_bodies = len(kinds)
    n_robots = states.shape[1]
    vlin = [0.0] * n_bodies
    vang = [0.0] * n_bodies
    cur = [0] * n_robots

    for b in range(n_bodies):
        traj[0, b, 0] = x[b]
        traj[0, b, 1] = y[b]
        traj[0, b, 2] = heading[b]

    for step in range(control_steps):
        ridx = 0
        for b in range(n_bodies):
            if kinds[b] == KIND_OBJECT:
                continue
            if kinds[b] == KIND_AGENT:
                state = _sense(x, y, heading, radius, kinds, n_bodies, b,
                               a_fov, n_states)
            else:
                state = _sense(x, y, heading, radius, kinds, n_bodies, b,
                               r_fov, n_states)
            states[step, ridx] = state
            cur[ridx] = state
            ridx += 1
        ridx = 0
        for b in range(n_bodies):
            if kinds[b] == KIND_OBJECT:
                continue
            if sensor_delay == 0 or pending_len == 0:
                state = cur[ridx]
            else:
                state = pending[0, ridx]
            if kinds[b] == KIND_AGENT:
                vl, vr = _controller_output(a_is_net, a_params, a_h, state,
                                            hidden, ridx, scratch)
            else:
                vl, vr = _controller_output(r_is_net, r_params, r_h, state,
                                            hidden, ridx, scratch)
            vl = vl * noise[step, ridx, 0]
            vr = vr * noise[step, ridx, 1]
            vlin[b] = 0.5 * (vl + vr) * max_speed
            vang[b] = (vr - vl) * max_speed / axle
            ridx += 1
        if sensor_delay > 0:
            if pending_len == sensor_delay:
                for d in range(sensor_delay - 1):
                    for r in range(n_robots):
                        pending[d, r] = pending[d + 1, r]
                for r in range(n_robots):
                    pending[sensor_delay - 1, r] = cur[r]
            else:
                for r in range(n_robots):
                    pending[pending_len, r] = cur[r]
                pending_len += 1

        for _ in range(substeps):
            for b in range(n_bodies):
                if kinds[b] == KIND_OBJECT:
                    continue
                v = vlin[b]
                w = vang[b]
                th = heading[b]
                th_new = th + w * physics_dt
                if fabs(w) > 1e-12:
                    r = v / w
                    x[b] += r * (sin(th_new) - sin(th))
                    y[b] -= r * (cos(th_new) - cos(th))
                else:
                    x[b] += v * physics_dt * cos(th)
                    y[b] += v * physics_dt * sin(th)
                heading[b] = wrap_angle(th_new)
            _resolve_overlaps(x, y, heading, radius, mass, kinds, vlin,
                              n_bodies, overlap_tol, max_sweeps,
                              mu_static, friction_unit)

        for b in range(n_bodies):
            traj[step + 1, b, 0] = x[b]
            traj[step + 1, b, 1] = y[b]
            traj[step + 1, b, 2] = heading[b]
    return pending_len


def elman_final_outputs(w_in, w_rec, w_out, samples, out):
    """Final-step output of an Elman net fed each sample sequence.

    ``w_in`` is (n_in+1, h) with the bias in the last row, ``w_rec`` (h, h),
    ``w_out`` (h+1, n_out) with the bias in the last row. Hidden state is
    zeroed before each sample. Only the first output unit is reported.
    """
    n_samples = samples.shape[0]
    n_steps = samples.shape[1]
    n_in = w_in.shape[0] - 1
    h = w_in.shape[1]
    hid = [0.0] * h
    new = [0.0] * h
    for s in range(n_samples):
        for k in range(h):
            hid[k] = 0.0
        for t in range(n_steps):
            for k in range(h):
                acc = w_in[n_in, k]
                for i in range(n_in):
                    acc += samples[s, t, i] * w_in[i, k]
                for m in range(h):
                    acc += hid[m] * w_rec[m, k]
                new[k] = _sig(acc)
            for k in range(h):
                hid[k] = new[k]
        acc = w_out[h, 0]
        for m in range(h):
            acc += hid[m] * w_out[m, 0]
        out[s] = _sig(acc)
