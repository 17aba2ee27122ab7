"""Pure-Python twin of the compiled Q-learning kernels.

Same contracts as _qcore.pyx; selected at import when the extension is not
built or when TUTORENV_PURE_KERNELS is set. All functions take 1-D float64
arrays (Q rows, observation buffers) and int64 index arrays.
"""

IMPLEMENTATION = "pure"


def best_action(row):
    """Index of the maximum entry; lowest index wins ties."""
    best = 0
    best_value = row[0]
    for i in range(1, len(row)):
        v = row[i]
        if v > best_value:
            best_value = v
            best = i
    return best


def row_max(row):
    best = row[0]
    for i in range(1, len(row)):
        if row[i] > best:
            best = row[i]
    return best


def td_update(row, action, reward, next_row, alpha, gamma, terminal):
    """One-step temporal-difference update; returns the new Q value."""
    target = reward if terminal else reward + gamma * row_max(next_row)
    value = row[action] + alpha * (target - row[action])
    row[action] = value
    return value


def fill_onehot(out, block_size, hot_slots):
    """Zero the buffer, then set one slot per widget block.

    hot_slots holds the within-block slot for each block in order; a negative
    slot leaves that block all-zero.
    """
    for i in range(len(out)):
        out[i] = 0.0
    for w in range(len(hot_slots)):
        slot = hot_slots[w]
        if slot >= 0:
            out[w * block_size + slot] = 1.0
