"""Random Hermitian SDP fixtures with reference optima.

Writes crates/core/tests/fixtures/random_XX.sdp and reference.json. Each
problem is built around a strictly feasible point so that equalities and
intervals are consistent; the reference value is the CLARABEL optimum,
cross-checked against CVXOPT.
"""
import json
import os
import sys

import numpy as np

sys.path.insert(0, os.path.dirname(__file__))
import sdp_text  # noqa: E402

OUT = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "tests", "fixtures")


def herm(rng, d, scale=1.0):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (a + a.conj().T) / 2


def psd(rng, d, rank=None):
    rank = rank or d
    a = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    return a @ a.conj().T / rank


def num(v):
    return f"{v:.16e}"


def matrix(m):
    return "\n".join(" ".join(f"{num(z.real)} {num(z.imag)}" for z in row) for row in m)


def functional(f):
    plus, minus, scale = f
    return f"functional {num(scale)}\n{matrix(plus)}\n{matrix(minus)}"


def ev(f, gp, gm, s):
    plus, minus, scale = f
    return float(np.real(np.trace(plus.conj().T @ gp) + np.trace(minus.conj().T @ gm))) + scale * s


def generate(rng, k):
    d = int(rng.integers(2, 7))
    lam = psd(rng, d) + 0.1 * np.eye(d)
    sb = (1.0, 1.0) if k % 3 else (0.5, 2.0)
    s0 = float(np.mean(sb))
    # Strictly feasible point: G+ + G- = t s0 Λ with t < 1.
    w = psd(rng, d)
    root = np.linalg.cholesky(lam)
    mix = w / np.trace(w).real * d
    half = np.linalg.eigh(mix)
    u = half[1] @ np.diag(np.clip(half[0], 0.2, None)) @ half[1].conj().T
    u = u / np.linalg.eigvalsh(u).max()
    gp = 0.45 * s0 * root @ u @ root.conj().T
    gm = 0.45 * s0 * lam - gp * 0.5

    def rand_f():
        return (herm(rng, d), herm(rng, d), float(rng.normal()))
    obj = rand_f()
    eqs, ivs = [], []
    for _ in range(int(rng.integers(0, 3))):
        f = rand_f()
        eqs.append((f, ev(f, gp, gm, s0)))
    for _ in range(int(rng.integers(1, 4))):
        f = rand_f()
        v = ev(f, gp, gm, s0)
        kind = rng.integers(0, 3)
        lo = v - abs(rng.normal()) - 0.05 if kind != 2 else None
        hi = v + abs(rng.normal()) + 0.05 if kind != 1 else None
        ivs.append((f, lo, hi))
    c0 = float(rng.normal())
    cap = None
    if k % 4 == 0:
        cap = c0 + ev(obj, gp, gm, s0) + abs(rng.normal()) * 0.5
    return d, lam, obj, eqs, ivs, cap, sb, c0


def write(path, d, lam, obj, eqs, ivs, cap, sb, c0):
    out = [
        "mdiqkd-sdp 1",
        f"dim {d}",
        f"equalities {len(eqs)}",
        f"intervals {len(ivs)}",
        f"cap {num(cap) if cap is not None else 'none'}",
        f"scale_bounds {num(sb[0])} {num(sb[1])}",
        f"objective_constant {num(c0)}",
        "lambda",
        matrix(lam),
        "objective",
        functional(obj),
    ]
    for i, (f, v) in enumerate(eqs):
        out += [f"equality {num(v)} eq{i}", functional(f)]
    for i, (f, lo, hi) in enumerate(ivs):
        out += [f"interval {num(lo) if lo is not None else 'none'} {num(hi) if hi is not None else 'none'} iv{i}", functional(f)]
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")


def main(n=32, seed=20240611):
    rng = np.random.default_rng(seed)
    os.makedirs(OUT, exist_ok=True)
    refs = {}
    k = 0
    while len(refs) < n:
        prob = generate(rng, k)
        k += 1
        name = f"random_{len(refs):02d}.sdp"
        path = os.path.join(OUT, name)
        write(path, *prob)
        p = sdp_text.read(path)
        try:
            v2, st2 = sdp_text.solve(p, "CVXOPT", abstol=1e-9, reltol=1e-9, feastol=1e-9)
        except Exception:
            v2, st2 = None, "failed"
        v1, st1 = sdp_text.solve(p, "CLARABEL", tol_gap_abs=1e-11, tol_gap_rel=1e-11, tol_feas=1e-11)
        if st1 != "optimal" or st2 != "optimal" or abs(v1 - v2) > 1e-8 * max(1.0, abs(v1)):
            print("skip", k, st1, st2, v1, v2)
            os.remove(path)
            continue
        refs[name] = v1
        print(name, p["d"], v1, v2)
    with open(os.path.join(OUT, "reference.json"), "w") as fh:
        json.dump(refs, fh, indent=1, sort_keys=True)
        fh.write("\n")


if __name__ == "__main__":
    main()
