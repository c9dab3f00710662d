# cython: language_level=3
# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Dinic max-flow on paired residual arcs.

Arcs are directed and come in reverse pairs: arc k and arc k ^ 1 connect
the same two nodes in opposite directions, so pushing f along k is
rescap[k] -= f, rescap[k ^ 1] += f. Residual capacities are float; an arc
is traversable while rescap > eps.
"""

import numpy as np


def max_flow(int n, int[::1] tail, int[::1] head, double[::1] rescap,
             int source, int sink, double eps):
    """Run Dinic to saturation; rescap is modified in place.

    Returns (flow_value, reach_sink) where reach_sink[u] == 1 iff u can
    still reach the sink in the residual network. The complement of
    reach_sink is the maximal source side of a minimum cut.
    """
    cdef Py_ssize_t m = tail.shape[0]
    if m & 1:
        raise ValueError("arcs must come in reverse pairs")

    ptr_np = np.zeros(n + 1, dtype=np.int32)
    order_np = np.empty(m, dtype=np.int32)
    level_np = np.empty(n, dtype=np.int32)
    itp_np = np.empty(n, dtype=np.int32)
    queue_np = np.empty(n, dtype=np.int32)
    path_np = np.empty(n + 1, dtype=np.int32)
    mask_np = np.zeros(n, dtype=np.uint8)

    cdef int[::1] ptr = ptr_np
    cdef int[::1] order = order_np
    cdef int[::1] level = level_np
    cdef int[::1] itp = itp_np
    cdef int[::1] queue = queue_np
    cdef int[::1] path = path_np
    cdef unsigned char[::1] mask = mask_np

    cdef Py_ssize_t a, idx
    cdef int u, v, w, qh, qt, plen, i, first_sat
    cdef double total = 0.0
    cdef double bottleneck

    with nogil:
        # CSR adjacency: order[ptr[u]:ptr[u+1]] lists arcs leaving u.
        for a in range(m):
            ptr[tail[a] + 1] += 1
        for u in range(n):
            ptr[u + 1] += ptr[u]
        for u in range(n):
            itp[u] = ptr[u]
        for a in range(m):
            u = tail[a]
            order[itp[u]] = <int> a
            itp[u] += 1

        while True:
            # BFS levels over residual arcs
            for u in range(n):
                level[u] = -1
            level[source] = 0
            queue[0] = source
            qh = 0
            qt = 1
            while qh < qt:
                u = queue[qh]
                qh += 1
                if u == sink:
                    break
                for idx in range(ptr[u], ptr[u + 1]):
                    a = order[idx]
                    v = head[a]
                    if level[v] < 0 and rescap[a] > eps:
                        level[v] = level[u] + 1
                        queue[qt] = v
                        qt += 1
            if level[sink] < 0:
                break

            # blocking flow with current-arc pointers
            for u in range(n):
                itp[u] = ptr[u]
            u = source
            plen = 0
            while True:
                if u == sink:
                    bottleneck = -1.0
                    for i in range(plen):
                        a = path[i]
                        if bottleneck < 0.0 or rescap[a] < bottleneck:
                            bottleneck = rescap[a]
                    total += bottleneck
                    first_sat = plen
                    for i in range(plen):
                        a = path[i]
                        rescap[a] -= bottleneck
                        rescap[a ^ 1] += bottleneck
                        if rescap[a] <= eps and i < first_sat:
                            first_sat = i
                    plen = first_sat
                    if plen == 0:
                        u = source
                    else:
                        u = tail[path[plen]]
                    continue
                # advance along an admissible arc
                v = -1
                while itp[u] < ptr[u + 1]:
                    a = order[itp[u]]
                    w = head[a]
                    if rescap[a] > eps and level[w] == level[u] + 1:
                        v = w
                        break
                    itp[u] += 1
                if v >= 0:
                    path[plen] = <int> a
                    plen += 1
                    u = v
                else:
                    if u == source:
                        break
                    level[u] = -2  # dead end for this phase
                    plen -= 1
                    u = tail[path[plen]]

        # nodes that can still reach the sink: reverse BFS from sink.
        # In-arcs of v are exactly the pairs of v's out-arcs.
        mask[sink] = 1
        queue[0] = sink
        qh = 0
        qt = 1
        while qh < qt:
            v = queue[qh]
            qh += 1
            for idx in range(ptr[v], ptr[v + 1]):
                a = order[idx]
                w = head[a]
                if mask[w] == 0 and rescap[a ^ 1] > eps:
                    mask[w] = 1
                    queue[qt] = w
                    qt += 1

    return total, mask_np
