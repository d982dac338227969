"""Reader for the plain-text SDP format and a CVXPY reference solve."""
import sys

import cvxpy as cp
import numpy as np


def _matrix(lines, d):
    rows = []
    for line in lines:
        v = [float(t) for t in line.split()]
        rows.append([complex(v[2 * k], v[2 * k + 1]) for k in range(d)])
    return np.array(rows)


def read(path):
    lines = open(path).read().splitlines()
    assert lines[0] == "mdiqkd-sdp 1"
    hdr = {}
    i = 1
    while not lines[i].startswith("lambda"):
        k, *v = lines[i].split()
        hdr[k] = v
        i += 1
    d = int(hdr["dim"][0])
    lam = _matrix(lines[i + 1 : i + 1 + d], d)
    i += 1 + d

    def functional(i):
        scale = float(lines[i].split()[1])
        plus = _matrix(lines[i + 1 : i + 1 + d], d)
        minus = _matrix(lines[i + 1 + d : i + 1 + 2 * d], d)
        return (plus, minus, scale), i + 1 + 2 * d

    assert lines[i] == "objective"
    obj, i = functional(i + 1)
    eqs, ivs = [], []
    while i < len(lines) and lines[i].strip():
        head = lines[i].split()
        if head[0] == "equality":
            f, i = functional(i + 1)
            eqs.append((f, float(head[1])))
        elif head[0] == "interval":
            f, i = functional(i + 1)
            lo = None if head[1] == "none" else float(head[1])
            hi = None if head[2] == "none" else float(head[2])
            ivs.append((f, lo, hi))
        else:
            raise ValueError(lines[i])
    cap = None if hdr["cap"][0] == "none" else float(hdr["cap"][0])
    sb = tuple(float(v) for v in hdr["scale_bounds"])
    return dict(d=d, lam=lam, obj=obj, c0=float(hdr["objective_constant"][0]), eqs=eqs, ivs=ivs, cap=cap, sb=sb)


def solve(p, solver="CLARABEL", **opts):
    d = p["d"]
    gp = cp.Variable((d, d), hermitian=True)
    gm = cp.Variable((d, d), hermitian=True)
    s = cp.Variable()

    def ev(f):
        plus, minus, scale = f
        return cp.real(cp.trace(plus.conj().T @ gp) + cp.trace(minus.conj().T @ gm)) + scale * s

    cons = [gp >> 0, gm >> 0, s * p["lam"] - gp - gm >> 0, s >= p["sb"][0], s <= p["sb"][1]]
    for f, v in p["eqs"]:
        cons.append(ev(f) == v)
    for f, lo, hi in p["ivs"]:
        if lo is not None:
            cons.append(ev(f) >= lo)
        if hi is not None:
            cons.append(ev(f) <= hi)
    obj = p["c0"] + ev(p["obj"])
    if p["cap"] is not None:
        cons.append(obj <= p["cap"])
    prob = cp.Problem(cp.Maximize(obj), cons)
    prob.solve(solver=solver, **opts)
    return prob.value, prob.status


if __name__ == "__main__":
    p = read(sys.argv[1])
    for solver in sys.argv[2:] or ["CLARABEL"]:
        print(solver, solve(p, solver))
