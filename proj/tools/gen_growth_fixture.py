#!/usr/bin/env python3
"""Generate the bundled neoclassical-growth coefficient fixture.

Second-order perturbation (Schmitt-Grohe & Uribe, 2004) of the one-sector
growth model with log utility, Cobb-Douglas production and an AR(1) log
productivity shock. The solution is rewritten as a quadratic law of motion for
x_t = (c_t, k_t, a_t) in levels, driven by x_{t-1} and the raw shock eps_t:

    x_t = d + E x_{t-1} + F eps_t + (I3 (x) x_{t-1}') G x_{t-1}
              + (I3 (x) x_{t-1}') H eps_t + (I3 (x) eps_t') J eps_t

Layout "row-major-output-blocks": for output equation i, G holds a 3x3 block
(row-major) so that the quadratic term is x' G_i x; H holds a 3-vector H_i with
term x' H_i eps; J holds the scalar J_i with term J_i eps^2.

The stored steady_state is the fixed point of the eps = 0 map (which includes
the second-order risk correction), found by Newton iteration.

A "tangent" block holds central finite-difference derivatives of every array
with respect to (alpha, rho, delta, sigma_eps) so the C++ side can offer a
first-order-in-theta coefficient provider around the calibration.

Usage: gen_growth_fixture.py [--out data/growth_fixture.json]
"""

import argparse
import json

import numpy as np
import sympy as sp
from scipy.linalg import ordqz

CALIBRATION = {"alpha": 1.0 / 3.0, "rho": 0.8, "delta": 0.05, "sigma_eps": 0.02}
BETA = 0.99
SIGMA_NU2 = 1e-8
TANGENT_PARAMS = ["alpha", "rho", "delta", "sigma_eps"]

_K, _A, _C, _KP, _AP, _CP = sp.symbols("K a c Kp ap cp")
_al, _be, _de, _rh = sp.symbols("alpha beta delta rho")
_EQS = sp.Matrix([
    1 / _C - _be / _CP * (_al * sp.exp(_AP) * _KP ** (_al - 1) + 1 - _de),
    _C + _KP - sp.exp(_A) * _K ** _al - (1 - _de) * _K,
    _AP - _rh * _A,
])
# v = (yp, y, xp, x) with y = c, x = (K, a)
_V = [_CP, _C, _KP, _AP, _K, _A]
_JAC = _EQS.jacobian(_V)
_HESS = [sp.hessian(_EQS[i], _V) for i in range(3)]
_JAC_F = sp.lambdify([_V, _al, _be, _de, _rh], _JAC, "numpy")
_HESS_F = [sp.lambdify([_V, _al, _be, _de, _rh], h, "numpy") for h in _HESS]


def solve(alpha, rho, delta, sigma_eps, beta=BETA):
    kbar = (alpha / (1.0 / beta - 1.0 + delta)) ** (1.0 / (1.0 - alpha))
    cbar = kbar ** alpha - delta * kbar
    point = [cbar, cbar, kbar, 0.0, kbar, 0.0]
    args = (alpha, beta, delta, rho)
    jac = np.array(_JAC_F(point, *args), dtype=float)
    fvv = np.array([np.array(h(point, *args), dtype=float) for h in _HESS_F])
    nx, ny = 2, 1
    fyp, fy, fxp, fx = jac[:, 0:1], jac[:, 1:2], jac[:, 2:4], jac[:, 4:6]

    # first order: A s' = B s with A = [fxp fyp], B = -[fx fy]
    amat = np.hstack([fxp, fyp])
    bmat = -np.hstack([fx, fy])
    s, t, _, _, _, z = ordqz(bmat, amat, sort="iuc", output="complex")
    z11, z21 = z[:nx, :nx], z[nx:, :nx]
    gx = np.real(z21 @ np.linalg.inv(z11))
    hx = np.real(z11 @ np.linalg.solve(t[:nx, :nx], s[:nx, :nx]) @ np.linalg.inv(z11))

    # second order in x: unknowns gxx (ny,nx,nx), hxx (nx,nx,nx)
    vx = np.vstack([gx @ hx, gx, hx, np.eye(nx)])
    qterm = np.einsum("emn,ma,nb->eab", fvv, vx, vx)
    nunk = ny * nx * nx + nx * nx * nx

    def unpack(vec):
        return vec[: ny * nx * nx].reshape(ny, nx, nx), vec[ny * nx * nx:].reshape(nx, nx, nx)

    def lin(vec):
        gxx, hxx = unpack(vec)
        out = np.einsum("ej,jcd,ca,db->eab", fyp, gxx, hx, hx)
        out += np.einsum("ej,jc,cab->eab", fyp, gx, hxx)
        out += np.einsum("ej,jab->eab", fy, gxx)
        out += np.einsum("ec,cab->eab", fxp, hxx)
        return out.ravel()

    mat = np.column_stack([lin(np.eye(nunk)[i]) for i in range(nunk)])
    gxx, hxx = unpack(np.linalg.solve(mat, -qterm.ravel()))

    # sigma-sigma terms with eta = (0, sigma_eps)
    eta = np.array([0.0, sigma_eps])
    w = np.concatenate([gx @ eta, [0.0], eta, [0.0, 0.0]])
    const = np.einsum("emn,m,n->e", fvv, w, w) + fyp[:, 0] * np.einsum("jcd,c,d->j", gxx, eta, eta)[0]
    smat = np.column_stack([(fyp @ gx + fxp), (fyp + fy)[:, 0]])
    sol = np.linalg.solve(smat, -const)
    hss, gss = sol[:nx], sol[nx:]

    # map to x_t = (c, k, a) in levels driven by z = (k_{t-1}-kbar, a_{t-1}, eps_t)
    mz = np.array([[1.0, 0.0, 0.0], [0.0, rho, 1.0]])
    lin_c = (gx @ mz)[0]
    quad_c = mz.T @ gxx[0] @ mz
    lin_k = (hx[0:1] @ mz)[0]
    quad_k = mz.T @ hxx[0] @ mz
    outputs = [
        (cbar, lin_c, quad_c, 0.5 * gss[0]),
        (kbar, lin_k, quad_k, 0.5 * hss[0]),
        (0.0, np.array([0.0, rho, 1.0]), np.zeros((3, 3)), 0.0),
    ]
    pick = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]])
    shift = np.array([-kbar, 0.0, 0.0])
    e3 = np.array([0.0, 0.0, 1.0])
    d = np.zeros(3)
    emat = np.zeros((3, 3))
    fvec = np.zeros(3)
    gblk = np.zeros((3, 3, 3))
    hblk = np.zeros((3, 3))
    jvec = np.zeros(3)
    for i, (ss, lvec, qmat, risk) in enumerate(outputs):
        d[i] = ss + lvec @ shift + 0.5 * shift @ qmat @ shift + risk
        emat[i] = lvec @ pick + shift @ qmat @ pick
        gblk[i] = 0.5 * pick.T @ qmat @ pick
        fvec[i] = lvec @ e3 + shift @ qmat @ e3
        hblk[i] = pick.T @ qmat @ e3
        jvec[i] = 0.5 * qmat[2, 2]

    def step(x):
        return d + emat @ x + np.array([x @ gblk[i] @ x for i in range(3)])

    x = np.array([cbar, kbar, 0.0])
    for _ in range(100):
        jac_step = emat + np.array([(gblk[i] + gblk[i].T) @ x for i in range(3)])
        dx = np.linalg.solve(np.eye(3) - jac_step, step(x) - x)
        x = x + dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    return {
        "d": d, "E": emat, "F": fvec, "G": gblk, "H": hblk, "J": jvec,
        "steady_state": x, "deterministic_steady_state": np.array([cbar, kbar, 0.0]),
    }


def flat(arr):
    return [float(v) for v in np.asarray(arr).ravel()]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="data/growth_fixture.json")
    args = parser.parse_args()

    base = solve(**CALIBRATION)
    keys = ["d", "E", "F", "G", "H", "J", "steady_state"]
    tangent = {k: [] for k in keys}
    for name in TANGENT_PARAMS:
        step = 1e-5 * max(abs(CALIBRATION[name]), 1e-3)
        up = dict(CALIBRATION)
        dn = dict(CALIBRATION)
        up[name] += step
        dn[name] -= step
        hi, lo = solve(**up), solve(**dn)
        for k in keys:
            tangent[k].append(flat((hi[k] - lo[k]) / (2.0 * step)))

    doc = {
        "format": "growth-coefficients/1",
        "dims": {"state": 3, "shock": 1},
        "layout": "row-major-output-blocks",
        "state_names": ["c", "k", "a"],
        "d": flat(base["d"]),
        "E": flat(base["E"]),
        "F": flat(base["F"]),
        "G": flat(base["G"]),
        "H": flat(base["H"]),
        "J": flat(base["J"]),
        "steady_state": flat(base["steady_state"]),
        "parameters": dict(CALIBRATION, beta=BETA, sigma_nu2=SIGMA_NU2),
        "tangent": {"parameters": TANGENT_PARAMS, **tangent},
        "generator": {
            "script": "tools/gen_growth_fixture.py",
            "method": "second-order perturbation, Schmitt-Grohe/Uribe; QZ first order",
            "state_units": "levels for c and k, log productivity for a",
            "deterministic_steady_state": flat(base["deterministic_steady_state"]),
        },
    }
    with open(args.out, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


if __name__ == "__main__":
    main()
