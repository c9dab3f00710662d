"""Pure-Python fallback for the Dinic max-flow kernel.

Mirrors _maxflow.pyx operation for operation so both backends produce
identical floating-point results; only the execution speed differs.
"""

import numpy as np


def max_flow(n, tail, head, rescap, source, sink, eps):
    tail = list(tail)
    head = list(head)
    cap = list(rescap)
    m = len(tail)
    if m & 1:
        raise ValueError("arcs must come in reverse pairs")

    ptr = [0] * (n + 1)
    for a in range(m):
        ptr[tail[a] + 1] += 1
    for u in range(n):
        ptr[u + 1] += ptr[u]
    cursor = ptr[:-1].copy()
    order = [0] * m
    for a in range(m):
        u = tail[a]
        order[cursor[u]] = a
        cursor[u] += 1

    level = [0] * n
    itp = [0] * n
    path = [0] * (n + 1)
    total = 0.0

    while True:
        for u in range(n):
            level[u] = -1
        level[source] = 0
        queue = [source]
        qh = 0
        while qh < len(queue):
            u = queue[qh]
            qh += 1
            if u == sink:
                break
            for idx in range(ptr[u], ptr[u + 1]):
                a = order[idx]
                v = head[a]
                if level[v] < 0 and cap[a] > eps:
                    level[v] = level[u] + 1
                    queue.append(v)
        if level[sink] < 0:
            break

        for u in range(n):
            itp[u] = ptr[u]
        u = source
        plen = 0
        while True:
            if u == sink:
                bottleneck = min(cap[path[i]] for i in range(plen))
                total += bottleneck
                first_sat = plen
                for i in range(plen):
                    a = path[i]
                    cap[a] -= bottleneck
                    cap[a ^ 1] += bottleneck
                    if cap[a] <= eps and i < first_sat:
                        first_sat = i
                plen = first_sat
                u = source if plen == 0 else tail[path[plen]]
                continue
            v = -1
            a = -1
            while itp[u] < ptr[u + 1]:
                a = order[itp[u]]
                w = head[a]
                if cap[a] > eps and level[w] == level[u] + 1:
                    v = w
                    break
                itp[u] += 1
            if v >= 0:
                path[plen] = a
                plen += 1
                u = v
            else:
                if u == source:
                    break
                level[u] = -2
                plen -= 1
                u = tail[path[plen]]

    mask = np.zeros(n, dtype=np.uint8)
    mask[sink] = 1
    queue = [sink]
    qh = 0
    while qh < len(queue):
        v = queue[qh]
        qh += 1
        for idx in range(ptr[v], ptr[v + 1]):
            a = order[idx]
            w = head[a]
            if mask[w] == 0 and cap[a ^ 1] > eps:
                mask[w] = 1
                queue.append(w)

    rescap[:] = cap
    return total, mask
