#!/usr/bin/env python3
"""Solve a sparse SDPA file written by `ssbound export` with cvxopt.

Prints one JSON object: {"status", "value", "primal", "dual"} where
`value` includes the objective constant from the file header.

Equalities are eliminated through an SVD parametrization of their
solution set, so dependent rows are allowed. Directions untouched by
every cone are dropped; the problem is reported unbounded if the
objective moves along one of them.

By default the first diagonal block is read back as equalities when the
header announces them; pass --as-inequalities to hand every block to the
solver verbatim.
"""

import argparse
import json
import sys

import numpy as np
from cvxopt import matrix, solvers

RANK_TOL = 1e-9


def read_sdpa(path):
    header = {}
    body = []
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if line.startswith("*"):
                parts = line[1:].split()
                if len(parts) >= 2:
                    header[parts[0]] = parts[1:]
            elif line:
                body.append(line)
    m = int(body[0])
    nblocks = int(body[1])
    sizes = [int(s) for s in body[2].split()]
    assert len(sizes) == nblocks
    cost = [float(s) for s in body[3].split()]
    entries = []
    for line in body[4:]:
        mat, blk, i, j, v = line.split()
        entries.append((int(mat), int(blk) - 1, int(i) - 1, int(j) - 1, float(v)))
    return header, m, sizes, cost, entries


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("path")
    ap.add_argument("--maximize", action="store_true")
    ap.add_argument("--as-inequalities", action="store_true")
    args = ap.parse_args()

    header, m, sizes, cost, entries = read_sdpa(args.path)
    constant = float(header.get("objective_constant", ["0"])[0])
    n_eq = int(header.get("equalities", ["0"])[0])
    eq_block = 0 if (n_eq > 0 and not args.as_inequalities) else None
    sign = -1.0 if args.maximize else 1.0

    # Linear rows: every diagonal block except the equality block.
    lin_offset = {}
    nlin = 0
    for b, d in enumerate(sizes):
        if d < 0 and b != eq_block:
            lin_offset[b] = nlin
            nlin += -d
    G_I, G_J, G_V = [], [], []
    h = [0.0] * nlin
    A_I, A_J, A_V = [], [], []
    beq = [0.0] * n_eq
    psd = {b: ([], [], [], [0.0] * (d * d)) for b, d in enumerate(sizes) if d > 0}

    for mat, blk, i, j, v in entries:
        d = sizes[blk]
        if blk == eq_block:
            if i % 2:
                continue
            if mat == 0:
                beq[i // 2] = v
            else:
                A_I.append(i // 2)
                A_J.append(mat - 1)
                A_V.append(v)
        elif d < 0:
            r = lin_offset[blk] + i
            # Sum x F - F0 >= 0  <=>  -F x <= -F0.
            if mat == 0:
                h[r] = -v
            else:
                G_I.append(r)
                G_J.append(mat - 1)
                G_V.append(-v)
        else:
            I, J, V, h0 = psd[blk]
            cells = {(i, j), (j, i)}
            for (p, q) in cells:
                if mat == 0:
                    h0[q * d + p] = -v
                else:
                    I.append(q * d + p)
                    J.append(mat - 1)
                    V.append(-v)

    A = np.zeros((n_eq if eq_block is not None else 0, m))
    for i, j, v in zip(A_I, A_J, A_V):
        A[i, j] += v
    b = np.array(beq[: A.shape[0]])
    G_rows = []
    h_rows = []
    if nlin:
        G = np.zeros((nlin, m))
        for i, j, v in zip(G_I, G_J, G_V):
            G[i, j] += v
        G_rows.append(G)
        h_rows.append(np.array(h))
    blocks = []
    for blk, (I, J, V, h0) in psd.items():
        d = sizes[blk]
        G = np.zeros((d * d, m))
        for i, j, v in zip(I, J, V):
            G[i, j] += v
        G_rows.append(G)
        h_rows.append(np.array(h0))
        blocks.append(d)

    # x = x0 + N z spans {x : A x = b}.
    x0 = np.zeros(m)
    N = np.eye(m)
    if A.shape[0]:
        x0 = np.linalg.lstsq(A, b, rcond=None)[0]
        if np.abs(A @ x0 - b).max(initial=0.0) > 1e-8 * max(1.0, np.abs(b).max(initial=0.0)):
            emit("primal infeasible", None, None, None)
            return
        _, sv, vt = np.linalg.svd(A, full_matrices=A.shape[0] < m)
        rank = int((sv > RANK_TOL * max(sv.max(initial=0.0), 1.0)).sum())
        N = vt[rank:].T
    cvec = sign * np.array(cost)
    G_all = np.vstack(G_rows) if G_rows else np.zeros((0, m))
    h_all = np.concatenate(h_rows) if h_rows else np.zeros(0)
    GN = G_all @ N
    # z = W w keeps only directions some cone constrains.
    if GN.shape[1]:
        _, sv, vt = np.linalg.svd(GN, full_matrices=GN.shape[0] < GN.shape[1])
        rank = int((sv > RANK_TOL * max(sv.max(initial=0.0), 1.0)).sum())
        W, free = vt[:rank].T, vt[rank:].T
    else:
        W, free = np.zeros((0, 0)), np.zeros((0, 0))
    cz = N.T @ cvec
    if free.size and np.abs(free.T @ cz).max() > 1e-9 * max(1.0, np.abs(cz).max()):
        emit("dual infeasible", None, None, None)
        return
    base = float(cvec @ x0)
    h_shift = h_all - G_all @ x0
    GW = GN @ W
    cw = W.T @ cz

    if GW.shape[1] == 0:
        feasible = bool(np.all(h_shift[:nlin] >= -1e-9)) and all(
            np.linalg.eigvalsh(h.reshape(d, d)).min() >= -1e-9
            for h, d in zip(split_psd(h_shift[nlin:], blocks), blocks)
        )
        status = "optimal" if feasible else "primal infeasible"
        value = constant + sign * base if feasible else None
        emit(status, value, base, base)
        return

    kwargs = {}
    if nlin:
        kwargs["Gl"] = matrix(GW[:nlin])
        kwargs["hl"] = matrix(h_shift[:nlin])
    if blocks:
        Gs, hs = [], []
        for G, h, d in zip(split_psd(GW[nlin:], blocks), split_psd(h_shift[nlin:], blocks), blocks):
            Gs.append(matrix(G))
            hs.append(matrix(h.reshape(d, d).T.copy()))
        kwargs["Gs"] = Gs
        kwargs["hs"] = hs

    solvers.options["show_progress"] = False
    solvers.options["abstol"] = 1e-10
    solvers.options["reltol"] = 1e-10
    solvers.options["feastol"] = 1e-10
    sol = solvers.sdp(matrix(cw), **kwargs)
    primal = sol["primal objective"]
    dual = sol["dual objective"]
    value = None
    if primal is not None:
        primal += base
        dual += base
        value = constant + sign * primal
    emit(sol["status"], value, primal, dual)


def split_psd(rows, blocks):
    out = []
    at = 0
    for d in blocks:
        out.append(rows[at : at + d * d])
        at += d * d
    return out


def emit(status, value, primal, dual):
    json.dump(
        {"status": status, "value": value, "primal": primal, "dual": dual},
        sys.stdout,
    )
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
