# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled trial and network kernels.

Statement-for-statement transcription of ``_pure``; keep the floating-point
operation order identical in both backends (built with -ffp-contract=off so
the compiler cannot fuse multiply-adds).
"""

from libc.math cimport atan2, cos, exp, fabs, fmod, sin, sqrt
from libc.stdlib cimport free, malloc

cdef double PI = 3.141592653589793
cdef double TWO_PI = 6.283185307179586

cdef long KIND_AGENT = 0
cdef long KIND_REPLICA = 1
cdef long KIND_OBJECT = 2


cdef inline double _wrap_angle(double a) nogil:
    a = fmod(a + PI, TWO_PI)
    if a < 0.0:
        a += TWO_PI
    return a - PI


def wrap_angle(double a):
    """Normalize an angle into [-pi, pi)."""
    return _wrap_angle(a)


cdef inline double _sig(double x) nogil:
    cdef double e
    if x >= 0.0:
        return 1.0 / (1.0 + exp(-x))
    e = exp(x)
    return e / (1.0 + e)


cdef long _sense_impl(double[:] x, double[:] y, double[:] heading,
                      double[:] radius, long[:] kinds, long n_bodies,
                      long obs, double fov, long n_states) nogil:
    cdef double ox = x[obs]
    cdef double oy = y[obs]
    cdef long best = -1
    cdef double dx, dy, mx, my, proj, c0, disc, t, best_t, half, delta, d2, best_d
    cdef long b
    if fov <= 0.0:
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
        half = 0.5 * fov
        best_d = 0.0
        for b in range(n_bodies):
            if b == obs:
                continue
            mx = x[b] - ox
            my = y[b] - oy
            delta = _wrap_angle(atan2(my, mx) - heading[obs])
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


def sense(double[:] x, double[:] y, double[:] heading, double[:] radius,
          long[:] kinds, long obs, double fov, long n_states):
    """Sensor state seen by body ``obs``: 0 = nothing, else a kind code."""
    return _sense_impl(x, y, heading, radius, kinds, kinds.shape[0], obs,
                       fov, n_states)


cdef inline double _clamp1(double v) nogil:
    if v > 1.0:
        return 1.0
    if v < -1.0:
        return -1.0
    return v


cdef void _controller_output(long is_net, double[:] params, long h,
                             long state, double[:, :] hidden, long ridx,
                             double[:] scratch, double* vl, double* vr) nogil:
    cdef long rec0, out0, k, m
    cdef double xin, acc, accl, accr
    if is_net == 0:
        vl[0] = _clamp1(params[2 * state])
        vr[0] = _clamp1(params[2 * state + 1])
        return
    rec0 = 2 * h
    out0 = 2 * h + h * h
    xin = <double>state
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
    vl[0] = 2.0 * _sig(accl) - 1.0
    vr[0] = 2.0 * _sig(accr) - 1.0


cdef void _resolve_overlaps(double[:] x, double[:] y, double[:] heading,
                            double[:] radius, double[:] mass, long[:] kinds,
                            double* vlin, long n_bodies, double overlap_tol,
                            long max_sweeps, double mu_static,
                            double friction_unit) nogil:
    cdef long sweep, i, j, resolved, ki, kj, rob
    cdef double dx, dy, rsum, d2, d, nx, ny, overlap
    cdef double push, m_rob, m_obj, inv_o, inv_r, share_obj, share_i, share_j
    cdef bint moves
    for sweep in range(max_sweeps):
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


def run_trial(double[:] x, double[:] y, double[:] heading, double[:] radius,
              double[:] mass, long[:] kinds,
              long a_is_net, double[:] a_params, long a_h, double a_fov,
              long r_is_net, double[:] r_params, long r_h, double r_fov,
              long n_states, long control_steps, long substeps,
              double physics_dt, double max_speed, double axle,
              double overlap_tol, long max_sweeps, double mu_static,
              double friction_unit, long sensor_delay,
              double[:, :, :] noise, double[:, :, :] traj,
              long[:, :] states, double[:, :] hidden, double[:] scratch,
              long[:, :] pending, long pending_len):
    """Integrate one or more control cycles; pose arrays advance in place."""
    cdef long n_bodies = kinds.shape[0]
    cdef long n_robots = states.shape[1]
    cdef double* vlin = <double*>malloc(n_bodies * sizeof(double))
    cdef double* vang = <double*>malloc(n_bodies * sizeof(double))
    cdef long* cur = <long*>malloc(n_robots * sizeof(long))
    cdef long b, step, sub, ridx, state, d, rr
    cdef double vl, vr, v, w, th, th_new, r
    if vlin == NULL or vang == NULL or cur == NULL:
        free(vlin)
        free(vang)
        free(cur)
        raise MemoryError()
    with nogil:
        for b in range(n_bodies):
            vlin[b] = 0.0
            vang[b] = 0.0
            traj[0, b, 0] = x[b]
            traj[0, b, 1] = y[b]
            traj[0, b, 2] = heading[b]

        for step in range(control_steps):
            ridx = 0
            for b in range(n_bodies):
                if kinds[b] == KIND_OBJECT:
                    continue
                if kinds[b] == KIND_AGENT:
                    state = _sense_impl(x, y, heading, radius, kinds,
                                        n_bodies, b, a_fov, n_states)
                else:
                    state = _sense_impl(x, y, heading, radius, kinds,
                                        n_bodies, b, r_fov, n_states)
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
                    _controller_output(a_is_net, a_params, a_h, state,
                                       hidden, ridx, scratch, &vl, &vr)
                else:
                    _controller_output(r_is_net, r_params, r_h, state,
                                       hidden, ridx, scratch, &vl, &vr)
                vl = vl * noise[step, ridx, 0]
                vr = vr * noise[step, ridx, 1]
                vlin[b] = 0.5 * (vl + vr) * max_speed
                vang[b] = (vr - vl) * max_speed / axle
                ridx += 1
            if sensor_delay > 0:
                if pending_len == sensor_delay:
                    for d in range(sensor_delay - 1):
                        for rr in range(n_robots):
                            pending[d, rr] = pending[d + 1, rr]
                    for rr in range(n_robots):
                        pending[sensor_delay - 1, rr] = cur[rr]
                else:
                    for rr in range(n_robots):
                        pending[pending_len, rr] = cur[rr]
                    pending_len += 1

            for sub in range(substeps):
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
                    heading[b] = _wrap_angle(th_new)
                _resolve_overlaps(x, y, heading, radius, mass, kinds, vlin,
                                  n_bodies, overlap_tol, max_sweeps,
                                  mu_static, friction_unit)

            for b in range(n_bodies):
                traj[step + 1, b, 0] = x[b]
                traj[step + 1, b, 1] = y[b]
                traj[step + 1, b, 2] = heading[b]
    free(vlin)
    free(vang)
    free(cur)
    return pending_len


def elman_final_outputs(double[:, :] w_in, double[:, :] w_rec,
                        double[:, :] w_out, double[:, :, :] samples,
                        double[:] out):
    """Final-step output of an Elman net fed each sample sequence."""
    cdef long n_samples = samples.shape[0]
    cdef long n_steps = samples.shape[1]
    cdef long n_in = w_in.shape[0] - 1
    cdef long h = w_in.shape[1]
    cdef double* hid = <double*>malloc(h * sizeof(double))
    cdef double* new = <double*>malloc(h * sizeof(double))
    cdef long s, t, k, i, m
    cdef double acc
    if hid == NULL or new == NULL:
        free(hid)
        free(new)
        raise MemoryError()
    with nogil:
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
    free(hid)
    free(new)
