"""Hot numeric kernels: body-state search, move evaluation, Lorenz integration.

Everything in this module operates on plain numpy arrays so it can be compiled
with numba's @njit. Setting CRUX_NUMBA=0 (or numba being unavailable) selects
the pure-Python fallback: the very same functions, undecorated, so both paths
run identical arithmetic. `benchmarks/bench_kernels.py` compares the two.

State encoding: a route's holds are indexed 0..n-1 in canonical (sorted-id)
order. A body state packs (lh, rh, lf, rf) in mixed radix, hands in [0, n),
feet in [0, n] where n means FREE (dangling):

    state = ((lh * n + rh) * (n + 1) + lf) * (n + 1) + rf

Move type codes follow crux.model.MOVE_TYPES order:
0 reach, 1 cross, 2 match, 3 high_step, 4 mantle, 5 dyno, 6 foot_swap.
"""

import math
import os

import numpy as np

_flag = os.environ.get("CRUX_NUMBA", "1").strip().lower()
NUMBA_REQUESTED = _flag not in ("0", "false", "no", "off")

if NUMBA_REQUESTED:
    try:
        from numba import njit as _njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        NUMBA_ENABLED = False
else:
    NUMBA_ENABLED = False

if NUMBA_ENABLED:
    def _jit(fn):
        return _njit(cache=True, fastmath=False)(fn)
else:
    def _jit(fn):
        return fn


# Search outcome codes.
OK = 0
UNREACHABLE = 1
NO_START = 2
TRUNCATED = 3

# Limb codes.
LH, RH, LF, RF = 0, 1, 2, 3

# Move type codes (mirror crux.model.MOVE_TYPES).
MT_REACH = 0
MT_CROSS = 1
MT_MATCH = 2
MT_HIGH_STEP = 3
MT_MANTLE = 4
MT_DYNO = 5
MT_FOOT_SWAP = 6
NUM_TYPES = 7

# Classification geometry thresholds.
DYNO_SPAN_FRACTION = 0.85          # hand move longer than this fraction of armSpan
MANTLE_FOOT_RADIUS = 0.30          # foot within this distance of the pressed hold, meters
HIGH_STEP_BAND_FRACTION = 0.60     # foot in the top fraction of the hand-foot band

KAPPA_DEFAULT = 4.0


@_jit
def _softplus(x):
    # log(1 + e^x), overflow-safe
    if x > 0.0:
        return x + math.log1p(math.exp(-x))
    return math.log1p(math.exp(x))


@_jit
def _panel_angle_at(y, pan_y0, pan_y1, pan_ang):
    for i in range(pan_y0.shape[0]):
        if pan_y0[i] <= y < pan_y1[i]:
            return pan_ang[i]
    return pan_ang[pan_ang.shape[0] - 1]


@_jit
def _com_y(lh, rh, lf, rf, hy, n):
    total = hy[lh] + hy[rh]
    cnt = 2
    if lf < n:
        total += hy[lf]
        cnt += 1
    if rf < n:
        total += hy[rf]
        cnt += 1
    return total / cnt


@_jit
def _classify_move(limb, frm, to, lh, rh, lf, rf, n, dmat, hx, hy,
                   arm_span, hand_foot, com_y):
    """First-match-wins move taxonomy; must stay total over legal moves."""
    if limb <= RH:  # hand move; hands are never FREE
        other = rh if limb == LH else lh
        if to == other:
            return MT_MATCH
        if limb == LH:
            if hx[to] > hx[other]:
                return MT_CROSS
        else:
            if hx[to] < hx[other]:
                return MT_CROSS
        if dmat[frm, to] > DYNO_SPAN_FRACTION * arm_span:
            return MT_DYNO
        # mantle: pressing up off a hold a foot is heeled on/near
        foot_near = False
        if lf < n and dmat[lf, frm] <= MANTLE_FOOT_RADIUS:
            foot_near = True
        if rf < n and dmat[rf, frm] <= MANTLE_FOOT_RADIUS:
            foot_near = True
        if foot_near and hy[frm] >= com_y and hy[to] > hy[frm]:
            return MT_MANTLE
        return MT_REACH
    # foot move
    if to < n:
        max_hand_y = hy[lh] if hy[lh] > hy[rh] else hy[rh]
        if hy[to] > max_hand_y - HIGH_STEP_BAND_FRACTION * hand_foot:
            return MT_HIGH_STEP
        other = rf if limb == LF else lf
        if other < n and to == other:
            return MT_FOOT_SWAP
    return MT_REACH


@_jit
def _edge_eval(limb, to, lh, rh, lf, rf, n, dmat, hx, hy, hdiff,
               pan_y0, pan_y1, pan_ang, wall_h,
               ability, arm_span, hand_foot, fear_sens, expo,
               kappa, exposure_weight, lambda_effort):
    """Cost, success probability and type of one limb relocation.

    The from-state is (lh, rh, lf, rf); `limb` moves to `to` (n = FREE).
    """
    if limb == LH:
        frm = lh
    elif limb == RH:
        frm = rh
    elif limb == LF:
        frm = lf
    else:
        frm = rf

    if frm >= n or to >= n:
        dist = 0.0  # FREE endpoint: lift or placement from dangling
    else:
        dist = dmat[frm, to]

    com = _com_y(lh, rh, lf, rf, hy, n)
    mtype = _classify_move(limb, frm, to, lh, rh, lf, rf, n, dmat, hx, hy,
                           arm_span, hand_foot, com)

    base = 0.0 if to >= n else hdiff[to]
    d_eff = base + 0.5 * (dist / arm_span) \
        + exposure_weight * (1.0 - NUM_TYPES * expo[mtype])
    if d_eff < base:
        d_eff = base

    angle = _panel_angle_at(com, pan_y0, pan_y1, pan_ang)
    over = angle - 90.0
    fear = 0.0
    if over > 0.0:
        fear = fear_sens * (over / 90.0) * (com / wall_h)

    t = kappa * (ability - d_eff - fear)
    cost_prob = _softplus(-t)  # == -ln(sigmoid(t)), always > 0
    cost = cost_prob + lambda_effort * (dist / arm_span)
    return cost, math.exp(-cost_prob), mtype


@_jit
def _hand_move_ok(t, other_hand, lf, rf, n, dmat, hy, hh, hf):
    if dmat[t, other_hand] > hh:
        return False
    top = hy[t] if hy[t] > hy[other_hand] else hy[other_hand]
    if lf < n:
        if dmat[lf, t] > hf or hy[lf] > top:
            return False
    if rf < n:
        if dmat[rf, t] > hf or hy[rf] > top:
            return False
    return True


@_jit
def _foot_move_ok(t, lh, rh, n, dmat, hy, hf):
    if dmat[t, lh] > hf or dmat[t, rh] > hf:
        return False
    top = hy[lh] if hy[lh] > hy[rh] else hy[rh]
    return hy[t] <= top


@_jit
def _state_feasible(lh, rh, lf, rf, n, dmat, hy, hh, hf):
    """Full BodyState feasibility: pairwise reach + feet-below-a-hand."""
    if lh != rh and dmat[lh, rh] > hh:
        return False
    top = hy[lh] if hy[lh] > hy[rh] else hy[rh]
    if lf < n:
        if dmat[lf, lh] > hf or dmat[lf, rh] > hf or hy[lf] > top:
            return False
    if rf < n:
        if dmat[rf, lh] > hf or dmat[rf, rh] > hf or hy[rf] > top:
            return False
    return True


@_jit
def _enumerate_starts(hand_pl, must_foot, n, dmat, hy, hfoot, hh, hf, out):
    """All feasible start states, packed, ascending. Returns the count."""
    n1 = n + 1
    cnt = 0
    for k in range(hand_pl.shape[0]):
        lh = hand_pl[k, 0]
        rh = hand_pl[k, 1]
        for lf in range(n1):
            if lf < n and hfoot[lf] == 0:
                continue
            for rf in range(n1):
                if rf < n and hfoot[rf] == 0:
                    continue
                if not _state_feasible(lh, rh, lf, rf, n, dmat, hy, hh, hf):
                    continue
                covered = True
                for j in range(must_foot.shape[0]):
                    m = must_foot[j]
                    if m != lf and m != rf:
                        covered = False
                        break
                if not covered:
                    continue
                if cnt < out.shape[0]:
                    out[cnt] = ((lh * n + rh) * n1 + lf) * n1 + rf
                cnt += 1
    if cnt > out.shape[0]:
        return -1
    # insertion sort: counts are tiny and numba-friendly
    for i in range(1, cnt):
        v = out[i]
        j = i - 1
        while j >= 0 and out[j] > v:
            out[j + 1] = out[j]
            j -= 1
        out[j + 1] = v
    return cnt


@_jit
def _heap_push(hc, ha, hs, hn, c, a, s):
    i = hn
    hc[i] = c
    ha[i] = a
    hs[i] = s
    while i > 0:
        p = (i - 1) >> 1
        if hc[p] > hc[i] or (hc[p] == hc[i] and ha[p] > ha[i]):
            hc[p], hc[i] = hc[i], hc[p]
            ha[p], ha[i] = ha[i], ha[p]
            hs[p], hs[i] = hs[i], hs[p]
            i = p
        else:
            break
    return hn + 1


@_jit
def _heap_pop(hc, ha, hs, hn):
    c = hc[0]
    a = ha[0]
    s = hs[0]
    hn -= 1
    if hn > 0:
        hc[0] = hc[hn]
        ha[0] = ha[hn]
        hs[0] = hs[hn]
        i = 0
        while True:
            l = 2 * i + 1
            r = l + 1
            best = i
            if l < hn and (hc[l] < hc[best] or (hc[l] == hc[best] and ha[l] < ha[best])):
                best = l
            if r < hn and (hc[r] < hc[best] or (hc[r] == hc[best] and ha[r] < ha[best])):
                best = r
            if best == i:
                break
            hc[best], hc[i] = hc[i], hc[best]
            ha[best], ha[i] = ha[i], ha[best]
            hs[best], hs[i] = hs[i], hs[best]
            i = best
    return c, a, s, hn


@_jit
def _search_core(n, dmat, hx, hy, hdiff, hhand, hfoot,
                 pan_y0, pan_y1, pan_ang, wall_h,
                 hand_pl, must_foot, finish,
                 ability, arm_span, hand_foot, fear_sens, expo,
                 kappa, exposure_weight, lambda_effort,
                 banned_limb, banned_hold,
                 dist, nmv, par, stamp, cstamp, ver,
                 out_states):
    """Least-cost path over packed body states (uniform-cost search).

    Ties broken by fewer moves, then smaller predecessor state key; the pop
    order (cost, moves, state) makes the result fully deterministic. Returns
    (status, total_cost, n_states_on_path); the path lands in out_states.
    """
    n1 = n + 1
    S = n * n * n1 * n1

    starts = np.empty(4 * n1 * n1, np.int64)
    ns = _enumerate_starts(hand_pl, must_foot, n, dmat, hy, hfoot,
                           arm_span, hand_foot, starts)
    if ns <= 0:
        return NO_START, 0.0, 0

    cap = 4096
    hc = np.empty(cap, np.float64)
    ha = np.empty(cap, np.int64)
    hs = np.empty(cap, np.int64)
    hn = 0

    for i in range(ns):
        s = starts[i]
        stamp[s] = ver
        cstamp[s] = 0
        dist[s] = 0.0
        nmv[s] = 0
        par[s] = -1
        hn = _heap_push(hc, ha, hs, hn, 0.0, s, s)

    goal = -1
    while hn > 0:
        c, a, s, hn = _heap_pop(hc, ha, hs, hn)
        m = a // S
        if stamp[s] != ver or cstamp[s] == ver:
            continue
        if c != dist[s] or m != nmv[s]:
            continue
        cstamp[s] = ver

        rf = s % n1
        lf = (s // n1) % n1
        rh = (s // (n1 * n1)) % n
        lh = s // (n1 * n1 * n)

        if lh == finish and rh == finish:
            goal = s
            break

        for limb in range(4):
            if limb <= RH:
                lo, hi = 0, n
            else:
                lo, hi = 0, n1  # feet may also go FREE (= n)
            for t in range(lo, hi):
                if limb == LH:
                    if t == lh or hhand[t] == 0:
                        continue
                    if not _hand_move_ok(t, rh, lf, rf, n, dmat, hy, arm_span, hand_foot):
                        continue
                    ns2 = ((t * n + rh) * n1 + lf) * n1 + rf
                elif limb == RH:
                    if t == rh or hhand[t] == 0:
                        continue
                    if not _hand_move_ok(t, lh, lf, rf, n, dmat, hy, arm_span, hand_foot):
                        continue
                    ns2 = ((lh * n + t) * n1 + lf) * n1 + rf
                elif limb == LF:
                    if t == lf:
                        continue
                    if t < n:
                        if hfoot[t] == 0 or not _foot_move_ok(t, lh, rh, n, dmat, hy, hand_foot):
                            continue
                    ns2 = ((lh * n + rh) * n1 + t) * n1 + rf
                else:
                    if t == rf:
                        continue
                    if t < n:
                        if hfoot[t] == 0 or not _foot_move_ok(t, lh, rh, n, dmat, hy, hand_foot):
                            continue
                    ns2 = ((lh * n + rh) * n1 + lf) * n1 + t
                if limb == banned_limb and t == banned_hold:
                    continue

                w, _p, _mt = _edge_eval(limb, t, lh, rh, lf, rf, n, dmat, hx, hy, hdiff,
                                        pan_y0, pan_y1, pan_ang, wall_h,
                                        ability, arm_span, hand_foot, fear_sens, expo,
                                        kappa, exposure_weight, lambda_effort)
                c2 = c + w
                m2 = m + 1
                if stamp[ns2] != ver:
                    stamp[ns2] = ver
                    cstamp[ns2] = 0
                    dist[ns2] = np.inf
                    nmv[ns2] = 0
                    par[ns2] = -1
                if cstamp[ns2] == ver:
                    continue
                if c2 < dist[ns2]:
                    dist[ns2] = c2
                    nmv[ns2] = m2
                    par[ns2] = s
                    hn0 = hn
                    if hn0 + 1 > hc.shape[0]:
                        hc2 = np.empty(hc.shape[0] * 2, np.float64)
                        ha2 = np.empty(hc.shape[0] * 2, np.int64)
                        hs2 = np.empty(hc.shape[0] * 2, np.int64)
                        hc2[:hn0] = hc[:hn0]
                        ha2[:hn0] = ha[:hn0]
                        hs2[:hn0] = hs[:hn0]
                        hc, ha, hs = hc2, ha2, hs2
                    hn = _heap_push(hc, ha, hs, hn, c2, m2 * S + ns2, ns2)
                elif c2 == dist[ns2]:
                    if m2 < nmv[ns2]:
                        nmv[ns2] = m2
                        par[ns2] = s
                        hn0 = hn
                        if hn0 + 1 > hc.shape[0]:
                            hc2 = np.empty(hc.shape[0] * 2, np.float64)
                            ha2 = np.empty(hc.shape[0] * 2, np.int64)
                            hs2 = np.empty(hc.shape[0] * 2, np.int64)
                            hc2[:hn0] = hc[:hn0]
                            ha2[:hn0] = ha[:hn0]
                            hs2[:hn0] = hs[:hn0]
                            hc, ha, hs = hc2, ha2, hs2
                        hn = _heap_push(hc, ha, hs, hn, c2, m2 * S + ns2, ns2)
                    elif m2 == nmv[ns2] and s < par[ns2]:
                        par[ns2] = s  # same priority: no re-push needed

    if goal < 0:
        return UNREACHABLE, 0.0, 0

    # walk parents; path length is nmv[goal] + 1 states
    length = nmv[goal] + 1
    if length > out_states.shape[0]:
        return TRUNCATED, dist[goal], 0
    s = goal
    for i in range(length - 1, -1, -1):
        out_states[i] = s
        s = par[s]
    return OK, dist[goal], length


@_jit
def _moved_limb(s0, s1, n):
    n1 = n + 1
    rf0 = s0 % n1
    lf0 = (s0 // n1) % n1
    rh0 = (s0 // (n1 * n1)) % n
    lh0 = s0 // (n1 * n1 * n)
    rf1 = s1 % n1
    lf1 = (s1 // n1) % n1
    rh1 = (s1 // (n1 * n1)) % n
    lh1 = s1 // (n1 * n1 * n)
    if lh0 != lh1:
        return LH, lh0, lh1
    if rh0 != rh1:
        return RH, rh0, rh1
    if lf0 != lf1:
        return LF, lf0, lf1
    return RF, rf0, rf1


@_jit
def _path_eval(states, length, n, dmat, hx, hy, hdiff,
               pan_y0, pan_y1, pan_ang, wall_h,
               ability, arm_span, hand_foot, fear_sens, expo,
               kappa, exposure_weight, lambda_effort,
               out_cost, out_prob, out_type, out_limb, out_from, out_to):
    """Re-evaluate each move along a packed-state path. Returns total cost."""
    n1 = n + 1
    total = 0.0
    for i in range(length - 1):
        s0 = states[i]
        s1 = states[i + 1]
        limb, frm, to = _moved_limb(s0, s1, n)
        rf = s0 % n1
        lf = (s0 // n1) % n1
        rh = (s0 // (n1 * n1)) % n
        lh = s0 // (n1 * n1 * n)
        c, p, mt = _edge_eval(limb, to, lh, rh, lf, rf, n, dmat, hx, hy, hdiff,
                              pan_y0, pan_y1, pan_ang, wall_h,
                              ability, arm_span, hand_foot, fear_sens, expo,
                              kappa, exposure_weight, lambda_effort)
        out_cost[i] = c
        out_prob[i] = p
        out_type[i] = mt
        out_limb[i] = limb
        out_from[i] = frm
        out_to[i] = to
        total += c
    return total


@_jit
def plan_kernel(n, dmat, hx, hy, hdiff, hhand, hfoot,
                pan_y0, pan_y1, pan_ang, wall_h,
                hand_pl, must_foot, finish,
                ability, arm_span, hand_foot, fear_sens, expo,
                kappa, exposure_weight, lambda_effort,
                banned_limb, banned_hold,
                out_states, out_cost, out_prob, out_type,
                out_limb, out_from, out_to):
    """One full plan for one climber. Returns (status, total_cost, n_states)."""
    n1 = n + 1
    S = n * n * n1 * n1
    dist = np.empty(S, np.float64)
    nmv = np.empty(S, np.int64)
    par = np.empty(S, np.int64)
    stamp = np.zeros(S, np.int64)
    cstamp = np.zeros(S, np.int64)
    status, cost, length = _search_core(
        n, dmat, hx, hy, hdiff, hhand, hfoot,
        pan_y0, pan_y1, pan_ang, wall_h,
        hand_pl, must_foot, finish,
        ability, arm_span, hand_foot, fear_sens, expo,
        kappa, exposure_weight, lambda_effort,
        banned_limb, banned_hold,
        dist, nmv, par, stamp, cstamp, 1,
        out_states)
    if status == OK:
        _path_eval(out_states, length, n, dmat, hx, hy, hdiff,
                   pan_y0, pan_y1, pan_ang, wall_h,
                   ability, arm_span, hand_foot, fear_sens, expo,
                   kappa, exposure_weight, lambda_effort,
                   out_cost, out_prob, out_type, out_limb, out_from, out_to)
    return status, cost, length


@_jit
def batch_profiles_kernel(n, dmat, hx, hy, hdiff, hhand, hfoot,
                          pan_y0, pan_y1, pan_ang, wall_h,
                          hand_pl, must_foot, finish,
                          abilities, arm_spans, hand_foots, fears, expos,
                          kappa, exposure_weight, lambda_effort,
                          out_status, out_cost, out_nmoves, out_probs):
    """Per-climber success profiles for one route.

    For climber i: plan their least-resistance beta and record its per-move
    success probabilities in out_probs[i, :out_nmoves[i]]. Workspace arrays
    are allocated once and version-stamped between climbers.
    """
    m = abilities.shape[0]
    n1 = n + 1
    S = n * n * n1 * n1
    dist = np.empty(S, np.float64)
    nmv = np.empty(S, np.int64)
    par = np.empty(S, np.int64)
    stamp = np.zeros(S, np.int64)
    cstamp = np.zeros(S, np.int64)
    maxp = out_probs.shape[1] + 1
    states = np.empty(maxp, np.int64)
    mcost = np.empty(maxp, np.float64)
    mtype = np.empty(maxp, np.int64)
    mlimb = np.empty(maxp, np.int64)
    mfrom = np.empty(maxp, np.int64)
    mto = np.empty(maxp, np.int64)
    mprob = np.empty(maxp, np.float64)

    for i in range(m):
        status, cost, length = _search_core(
            n, dmat, hx, hy, hdiff, hhand, hfoot,
            pan_y0, pan_y1, pan_ang, wall_h,
            hand_pl, must_foot, finish,
            abilities[i], arm_spans[i], hand_foots[i], fears[i], expos[i],
            kappa, exposure_weight, lambda_effort,
            -1, -1,
            dist, nmv, par, stamp, cstamp, i + 1,
            states)
        out_status[i] = status
        if status != OK:
            out_cost[i] = np.inf
            out_nmoves[i] = 0
            continue
        out_cost[i] = cost
        out_nmoves[i] = length - 1
        _path_eval(states, length, n, dmat, hx, hy, hdiff,
                   pan_y0, pan_y1, pan_ang, wall_h,
                   abilities[i], arm_spans[i], hand_foots[i], fears[i], expos[i],
                   kappa, exposure_weight, lambda_effort,
                   mcost, mprob, mtype, mlimb, mfrom, mto)
        for j in range(length - 1):
            out_probs[i, j] = mprob[j]


@_jit
def lorenz_kernel(x0, y0, z0, sigma, rho, beta, dt, steps, out):
    """Classic three-variable chaotic flow, 4th-order Runge-Kutta.

    Writes steps+1 samples (including the initial state) into out[(steps+1), 3].
    """
    x, y, z = x0, y0, z0
    out[0, 0] = x
    out[0, 1] = y
    out[0, 2] = z
    for i in range(steps):
        k1x = sigma * (y - x)
        k1y = x * (rho - z) - y
        k1z = x * y - beta * z

        ax = x + 0.5 * dt * k1x
        ay = y + 0.5 * dt * k1y
        az = z + 0.5 * dt * k1z
        k2x = sigma * (ay - ax)
        k2y = ax * (rho - az) - ay
        k2z = ax * ay - beta * az

        bx = x + 0.5 * dt * k2x
        by = y + 0.5 * dt * k2y
        bz = z + 0.5 * dt * k2z
        k3x = sigma * (by - bx)
        k3y = bx * (rho - bz) - by
        k3z = bx * by - beta * bz

        cx = x + dt * k3x
        cy = y + dt * k3y
        cz = z + dt * k3z
        k4x = sigma * (cy - cx)
        k4y = cx * (rho - cz) - cy
        k4z = cx * cy - beta * cz

        x += (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        y += (dt / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        z += (dt / 6.0) * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
        out[i + 1, 0] = x
        out[i + 1, 1] = y
        out[i + 1, 2] = z


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"
