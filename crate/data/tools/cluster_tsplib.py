#!/usr/bin/env python3
"""Build GTSP instance files from TSPLIB coordinate files.

Clustering follows the usual GTSP benchmark construction: ceil(n/5) clusters,
centers chosen farthest-first starting from the farthest pair of nodes, every
node assigned to its nearest center. Distances are the rounded TSPLIB
distances of the source instance. Ties are broken by the lowest index.

EUC_2D sources keep their coordinates; ATT sources are written as an
EXPLICIT FULL_MATRIX so the parser only needs the two edge-weight types.

usage: cluster_tsplib.py SOURCE.tsp OUT_DIR
"""

import math
import os
import sys


def read_tsplib(path):
    header = {}
    coords = []
    in_coords = False
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line == "EOF":
                break
            if line == "NODE_COORD_SECTION":
                in_coords = True
                continue
            if in_coords:
                _, x, y = line.split()[:3]
                coords.append((float(x), float(y)))
            else:
                key, _, value = line.partition(":")
                header[key.strip()] = value.strip()
    return header, coords


def nint(x):
    return int(x + 0.5)


def euc_2d(a, b):
    return nint(math.hypot(a[0] - b[0], a[1] - b[1]))


def att(a, b):
    xd, yd = a[0] - b[0], a[1] - b[1]
    r = math.sqrt((xd * xd + yd * yd) / 10.0)
    t = nint(r)
    return t + 1 if t < r else t


def cluster(dist, n):
    k = math.ceil(n / 5)
    best, pair = -1, None
    for i in range(n):
        for j in range(i + 1, n):
            if dist[i][j] > best:
                best, pair = dist[i][j], (i, j)
    centers = list(pair)
    nearest = [min(dist[v][c] for c in centers) for v in range(n)]
    while len(centers) < k:
        far, pick = -1, None
        for v in range(n):
            if v in centers:
                continue
            if nearest[v] > far:
                far, pick = nearest[v], v
        centers.append(pick)
        nearest = [min(nearest[v], dist[v][pick]) for v in range(n)]
    sets = [[] for _ in centers]
    for v in range(n):
        owner = min(range(k), key=lambda c: (dist[v][centers[c]], c))
        sets[owner].append(v + 1)
    return sets


def main():
    src, out_dir = sys.argv[1], sys.argv[2]
    header, coords = read_tsplib(src)
    n = len(coords)
    kind = header["EDGE_WEIGHT_TYPE"]
    metric = {"EUC_2D": euc_2d, "ATT": att}[kind]
    dist = [[metric(a, b) for b in coords] for a in coords]
    sets = cluster(dist, n)
    name = f"{len(sets)}{header['NAME']}"
    lines = [
        f"NAME: {name}",
        "TYPE: GTSP",
        f"COMMENT: {header.get('COMMENT', header['NAME'])}, clustered into {len(sets)} sets",
        f"DIMENSION: {n}",
        f"GTSP_SETS: {len(sets)}",
    ]
    if kind == "EUC_2D":
        lines.append("EDGE_WEIGHT_TYPE: EUC_2D")
        lines.append("NODE_COORD_SECTION")
        for i, (x, y) in enumerate(coords, start=1):
            lines.append(f"{i} {x:g} {y:g}")
    else:
        lines.append("EDGE_WEIGHT_TYPE: EXPLICIT")
        lines.append("EDGE_WEIGHT_FORMAT: FULL_MATRIX")
        lines.append("EDGE_WEIGHT_SECTION")
        for row in dist:
            lines.append(" ".join(str(d) for d in row))
    lines.append("GTSP_SET_SECTION")
    for sid, members in enumerate(sets, start=1):
        lines.append(" ".join(str(v) for v in [sid, *members, -1]))
    lines.append("EOF")
    path = os.path.join(out_dir, f"{name}.gtsp")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print(path)


if __name__ == "__main__":
    main()
