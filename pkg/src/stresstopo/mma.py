"""Method of Moving Asymptotes: rational subproblem and its dual solve.

One mma_update call builds the separable convex approximation around the
current iterate (asymptotes adapted by the sign-oscillation heuristic) and
solves it with a primal-dual interior-point iteration, following the
published algorithm.  Handles m >= 1 general constraints.
"""

from dataclasses import dataclass, field

import numpy as np


class SubproblemError(RuntimeError):
    """MMA subproblem solve failed to reach the required KKT residual."""


@dataclass
class MmaState:
    """Mutable optimizer state carried across outer iterations."""

    n: int
    move: float = 0.1
    asyinit: float = 0.5
    asyincr: float = 1.2
    asydecr: float = 0.7
    kkt_tol: float = 1e-9
    iter: int = 0
    low: np.ndarray = None
    upp: np.ndarray = None
    x_prev1: np.ndarray = None
    x_prev2: np.ndarray = None
    kkt_residual: float = field(default=np.nan, init=False)


def mma_update(state: MmaState, x, f0val, df0dx, fval, dfdx,
               xmin, xmax) -> np.ndarray:
    """One MMA iteration: returns the subproblem minimizer, mutates state.

    fval is the m-vector of constraint values (feasible when <= 0) and
    dfdx its (m, n) Jacobian.  The step respects the asymptote box, the
    move limit, and [xmin, xmax].
    """
    n = state.n
    x = np.asarray(x, dtype=float).ravel()
    df0dx = np.asarray(df0dx, dtype=float).ravel()
    fval = np.atleast_1d(np.asarray(fval, dtype=float))
    dfdx = np.atleast_2d(np.asarray(dfdx, dtype=float))
    xmin = np.broadcast_to(np.asarray(xmin, dtype=float), (n,))
    xmax = np.broadcast_to(np.asarray(xmax, dtype=float), (n,))
    if x.size != n or df0dx.size != n or dfdx.shape != (fval.size, n):
        raise ValueError("inconsistent dimensions in MMA update")

    state.iter += 1
    # Variables with xmin == xmax (e.g. pinned passive elements) are held
    # fixed and excluded from the subproblem, which requires alfa < beta.
    free = (xmax - xmin) > 1e-12
    xrange = np.maximum(xmax - xmin, 1e-5)
    if state.iter <= 2 or state.x_prev2 is None:
        low = x - state.asyinit * xrange
        upp = x + state.asyinit * xrange
    else:
        sign = (x - state.x_prev1) * (state.x_prev1 - state.x_prev2)
        factor = np.ones(n)
        factor[sign > 0.0] = state.asyincr
        factor[sign < 0.0] = state.asydecr
        low = x - factor * (state.x_prev1 - state.low)
        upp = x + factor * (state.upp - state.x_prev1)
        low = np.clip(low, x - 10.0 * xrange, x - 0.01 * xrange)
        upp = np.clip(upp, x + 0.01 * xrange, x + 10.0 * xrange)

    albefa = 0.1
    alfa = np.maximum.reduce([xmin, low + albefa * (x - low),
                              x - state.move * xrange])
    beta = np.minimum.reduce([xmax, upp - albefa * (upp - x),
                              x + state.move * xrange])

    # Rational approximation coefficients.
    raa0 = 1e-5
    ux1 = upp - x
    xl1 = x - low
    p0 = np.maximum(df0dx, 0.0)
    q0 = np.maximum(-df0dx, 0.0)
    pq0 = 0.001 * (p0 + q0) + raa0 / xrange
    p0 = (p0 + pq0) * ux1 ** 2
    q0 = (q0 + pq0) * xl1 ** 2
    P = np.maximum(dfdx, 0.0)
    Q = np.maximum(-dfdx, 0.0)
    PQ = 0.001 * (P + Q) + raa0 / xrange[None, :]
    P = (P + PQ) * ux1[None, :] ** 2
    Q = (Q + PQ) * xl1[None, :] ** 2

    xnew = np.where(free, x, xmin)
    if free.any():
        bf = (P[:, free] @ (1.0 / ux1[free])
              + Q[:, free] @ (1.0 / xl1[free]) - fval)
        xnew[free] = _subsolve(state, alfa[free], beta[free], low[free],
                               upp[free], p0[free], q0[free],
                               P[:, free], Q[:, free], bf)

    state.x_prev2 = state.x_prev1
    state.x_prev1 = x.copy()
    state.low = low
    state.upp = upp
    return xnew


def _subsolve(state, alfa, beta, low, upp, p0, q0, P, Q, b):
    """Primal-dual interior-point solve of the separable subproblem.

    Minimizes sum(p0/(u-x) + q0/(x-l)) + z + sum(c y + 0.5 y^2) subject to
    the linearized constraints with elastic variables y >= 0, z >= 0.
    """
    m = b.size
    n = alfa.size
    c = np.full(m, 1000.0)
    d = np.ones(m)
    a0 = 1.0
    a = np.zeros(m)
    epsimin = 1e-11

    x = 0.5 * (alfa + beta)
    y = np.ones(m)
    z = 1.0
    lam = np.ones(m)
    xsi = np.maximum(1.0 / (x - alfa), 1.0)
    eta = np.maximum(1.0 / (beta - x), 1.0)
    mu = np.maximum(1.0, 0.5 * c)
    zet = 1.0
    s = np.ones(m)

    def residual(epsi):
        ux1 = upp - x
        xl1 = x - low
        plam = p0 + lam @ P
        qlam = q0 + lam @ Q
        gvec = P @ (1.0 / ux1) + Q @ (1.0 / xl1)
        dpsi = plam / ux1 ** 2 - qlam / xl1 ** 2
        rx = dpsi - xsi + eta
        ry = c + d * y - mu - lam
        rz = a0 - zet - a @ lam
        rlam = gvec - a * z - y + s - b
        rxsi = xsi * (x - alfa) - epsi
        reta = eta * (beta - x) - epsi
        rmu = mu * y - epsi
        rzet = zet * z - epsi
        rs = lam * s - epsi
        res = np.concatenate([rx, ry, [rz], rlam, rxsi, reta, rmu,
                              [rzet], rs])
        return res, np.abs(res).max(), np.linalg.norm(res)

    epsi = 1.0
    while epsi > epsimin:
        _, resinf, _ = residual(epsi)
        inner = 0
        while resinf > 0.9 * epsi and inner < 500:
            inner += 1
            ux1 = upp - x
            xl1 = x - low
            plam = p0 + lam @ P
            qlam = q0 + lam @ Q
            GG = P / ux1[None, :] ** 2 - Q / xl1[None, :] ** 2
            dpsi = plam / ux1 ** 2 - qlam / xl1 ** 2
            delx = dpsi - epsi / (x - alfa) + epsi / (beta - x)
            dely = c + d * y - lam - epsi / y
            delz = a0 - a @ lam - epsi / z
            dellam = (P @ (1.0 / ux1) + Q @ (1.0 / xl1) - a * z - y - b
                      + epsi / lam)
            diagx = (2.0 * (plam / ux1 ** 3 + qlam / xl1 ** 3)
                     + xsi / (x - alfa) + eta / (beta - x))
            diagy = d + mu / y
            diaglam = s / lam
            diaglamyi = diaglam + 1.0 / diagy

            if m <= n:
                # Condense x; solve the (m+1) system in (dlam, dz).
                blam = dellam + dely / diagy - GG @ (delx / diagx)
                Alam = np.diag(diaglamyi) + (GG / diagx[None, :]) @ GG.T
                AA = np.zeros((m + 1, m + 1))
                AA[:m, :m] = Alam
                AA[:m, m] = a
                AA[m, :m] = a
                AA[m, m] = -zet / z
                bb = np.concatenate([blam, [delz]])
                sol = np.linalg.solve(AA, bb)
                dlam = sol[:m]
                dz = sol[m]
                dx = -delx / diagx - (dlam @ GG) / diagx
            else:
                dellamyi = dellam + dely / diagy
                Axx = np.diag(diagx) + (GG.T / diaglamyi[None, :]) @ GG
                azz = zet / z + a @ (a / diaglamyi)
                axz = -GG.T @ (a / diaglamyi)
                bx = delx + (dellamyi / diaglamyi) @ GG
                bz = delz - a @ (dellamyi / diaglamyi)
                AA = np.zeros((n + 1, n + 1))
                AA[:n, :n] = Axx
                AA[:n, n] = axz
                AA[n, :n] = axz
                AA[n, n] = azz
                sol = np.linalg.solve(AA, np.concatenate([-bx, [-bz]]))
                dx = sol[:n]
                dz = sol[n]
                dlam = (GG @ dx) / diaglamyi - dz * (a / diaglamyi) \
                    + dellamyi / diaglamyi

            dy = -dely / diagy + dlam / diagy
            dxsi = -xsi + epsi / (x - alfa) - (xsi * dx) / (x - alfa)
            deta = -eta + epsi / (beta - x) + (eta * dx) / (beta - x)
            dmu = -mu + epsi / y - (mu * dy) / y
            dzet = -zet + epsi / z - zet * dz / z
            ds = -s + epsi / lam - (s * dlam) / lam

            # Step length: stay strictly inside all positivity bounds.
            w = np.concatenate([y, [z], lam, xsi, eta, mu, [zet], s])
            dw = np.concatenate([dy, [dz], dlam, dxsi, deta, dmu, [dzet], ds])
            stepw = np.max(-1.01 * dw / w)
            stepx = np.max(np.concatenate([
                -1.01 * dx / (x - alfa), 1.01 * dx / (beta - x)]))
            step = 1.0 / np.maximum(np.maximum(stepw, stepx), 1.0)

            _, _, rn0 = residual(epsi)
            old = (x, y, z, lam, xsi, eta, mu, zet, s)
            accepted = False
            for _ in range(50):
                x = old[0] + step * dx
                y = old[1] + step * dy
                z = old[2] + step * dz
                lam = old[3] + step * dlam
                xsi = old[4] + step * dxsi
                eta = old[5] + step * deta
                mu = old[6] + step * dmu
                zet = old[7] + step * dzet
                s = old[8] + step * ds
                _, resinf, rn = residual(epsi)
                if rn < rn0:
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                x, y, z, lam, xsi, eta, mu, zet, s = old
                break
        epsi *= 0.1

    _, resinf, _ = residual(epsimin)
    state.kkt_residual = resinf
    # The interior-point iteration can stagnate at a small residual when a
    # constraint is inactive by a wide margin (lam -> 0 makes the condensed
    # Newton system stiff); the stagnated iterate is still a usable step,
    # so only divergence is treated as a failure.  The guard scales with
    # the constraint right-hand side and the elastic penalty, which set
    # the natural size of the residual entries.
    guard = max(state.kkt_tol, 1e-6 * (1.0 + np.abs(b).max() + c.max()))
    if not np.isfinite(x).all() or not resinf <= guard:
        raise SubproblemError(
            f"subproblem KKT residual {resinf:.3e} exceeds "
            f"{guard:.1e}; consider rescaling the constraints")
    return x
