# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Q-learning kernels: argmax, TD update, one-hot fill.

Contracts mirror qcore_py exactly; see that module for documentation.
"""

from libc.stdint cimport int64_t

IMPLEMENTATION = "compiled"


def best_action(double[::1] row):
    cdef Py_ssize_t i, best = 0
    cdef double best_value = row[0]
    for i in range(1, row.shape[0]):
        if row[i] > best_value:
            best_value = row[i]
            best = i
    return best


def row_max(double[::1] row):
    cdef Py_ssize_t i
    cdef double best = row[0]
    for i in range(1, row.shape[0]):
        if row[i] > best:
            best = row[i]
    return best


def td_update(double[::1] row, Py_ssize_t action, double reward,
              double[::1] next_row, double alpha, double gamma,
              bint terminal):
    cdef double target, value
    cdef Py_ssize_t i
    if terminal:
        target = reward
    else:
        target = next_row[0]
        for i in range(1, next_row.shape[0]):
            if next_row[i] > target:
                target = next_row[i]
        target = reward + gamma * target
    value = row[action] + alpha * (target - row[action])
    row[action] = value
    return value


def fill_onehot(double[::1] out, Py_ssize_t block_size, int64_t[::1] hot_slots):
    cdef Py_ssize_t i, w
    cdef int64_t slot
    for i in range(out.shape[0]):
        out[i] = 0.0
    for w in range(hot_slots.shape[0]):
        slot = hot_slots[w]
        if slot >= 0:
            out[w * block_size + slot] = 1.0
