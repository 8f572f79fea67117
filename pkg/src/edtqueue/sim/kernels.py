"""Compiled event loops.

The PU trajectory is held in a length-2 array ``traj = [state, remaining]``
where ``state`` is 1.0 while the PU is busy and ``remaining`` is the time
until its next switch.  Sojourns are drawn fresh at every switch, so the
trajectory is the exact alternating-exponential process.  Nothing here uses
``beta`` or any other derived quantity.
"""

from __future__ import annotations

import numpy as np
from numba import njit

EVENT_BUDGET = 1_000_000_000

# status codes returned by the kernels
OK = 0
BUDGET_EXHAUSTED = 1
TYPE1_SAW_BUSY = 2


@njit(cache=True, nogil=True)
def _switch(rng, traj, lam, mu):
    traj[0] = 1.0 - traj[0]
    traj[1] = rng.exponential(lam if traj[0] == 1.0 else mu)


@njit(cache=True, nogil=True)
def _advance(rng, traj, dt, lam, mu):
    """Move the trajectory forward by ``dt``; returns the number of switches."""
    events = 0
    while dt >= traj[1]:
        dt -= traj[1]
        _switch(rng, traj, lam, mu)
        events += 1
    traj[1] -= dt
    return events


@njit(cache=True, nogil=True)
def _serve(rng, traj, ttr, lam, mu, periodic, ts, oneshot, out):
    """Transmit one packet starting now.

    Writes ``out = [waiting time, transmission slots, sensing instants, events]``.
    Under continuous sensing the waiting time is the exact sum of busy
    sojourns; under periodic sensing it is ``senses * ts``.
    """
    wait = 0.0
    slots = 0
    senses = 0
    events = 0
    work = 0.0
    while True:
        if traj[0] == 1.0:
            if periodic:
                # the SU knows the PU is busy now; it senses at ts, 2 ts, ...
                while traj[0] == 1.0:
                    events += _advance(rng, traj, ts, lam, mu)
                    senses += 1
                    if events > EVENT_BUDGET:
                        out[3] = events
                        return BUDGET_EXHAUSTED
            else:
                wait += traj[1]
                _switch(rng, traj, lam, mu)
                events += 1
        slots += 1
        need = ttr - work
        if oneshot or traj[1] > need:
            events += _advance(rng, traj, need, lam, mu)
            break
        work += traj[1]
        _switch(rng, traj, lam, mu)
        events += 1
        if events > EVENT_BUDGET:
            out[3] = events
            return BUDGET_EXHAUSTED
    out[0] = senses * ts if periodic else wait
    out[1] = slots
    out[2] = senses
    out[3] = events
    return OK


@njit(cache=True, nogil=True)
def _start_state(rng, traj, lam, mu, init_mode):
    if init_mode == 1:
        busy = True
    elif init_mode == 2:
        busy = False
    else:
        busy = rng.random() < lam / (lam + mu)
    traj[0] = 1.0 if busy else 0.0
    traj[1] = rng.exponential(lam if busy else mu)


@njit(cache=True, nogil=True)
def edt_samples(rng, ttrs, lam, mu, periodic, ts, oneshot, init_mode,
                out_edt, out_busy, out_slots, out_senses):
    """One independent packet per entry of ``ttrs``; returns (status, index)."""
    traj = np.empty(2)
    res = np.empty(4)
    for i in range(ttrs.shape[0]):
        _start_state(rng, traj, lam, mu, init_mode)
        out_busy[i] = traj[0] == 1.0
        status = _serve(rng, traj, ttrs[i], lam, mu, periodic, ts, oneshot, res)
        if status != OK:
            return status, i
        out_edt[i] = res[0] + ttrs[i]
        out_slots[i] = np.int64(res[1])
        out_senses[i] = np.int64(res[2])
    return OK, -1


@njit(cache=True, nogil=True)
def queue_run(rng, n, psi, ttr, lam, mu, periodic, ts,
              arrival, start, departure, service, type1, busy_at_arrival):
    """FIFO queue over one continuous PU trajectory; returns (status, type-1 checks)."""
    traj = np.empty(2)
    res = np.empty(4)
    _start_state(rng, traj, lam, mu, 0)
    now = 0.0  # time up to which the trajectory has been generated
    t_arr = 0.0
    last_dep = 0.0
    checks = 0
    for i in range(n):
        t_arr += rng.exponential(psi)
        arrival[i] = t_arr
        if i > 0 and t_arr < last_dep:
            # the queue was nonempty: service starts at the previous departure
            type1[i] = True
            busy_at_arrival[i] = False
            checks += 1
            if traj[0] == 1.0:
                return TYPE1_SAW_BUSY, checks
            t0 = last_dep
        else:
            type1[i] = False
            _advance(rng, traj, t_arr - now, lam, mu)
            now = t_arr
            busy_at_arrival[i] = traj[0] == 1.0
            t0 = t_arr
        status = _serve(rng, traj, ttr, lam, mu, periodic, ts, False, res)
        if status != OK:
            return status, checks
        s = res[0] + ttr
        start[i] = t0
        service[i] = s
        last_dep = t0 + s
        departure[i] = last_dep
        now = last_dep
    return OK, checks
