"""Primal-dual interior-point solver for block-diagonal SDPs.

Infeasible-start path following with Nesterov-Todd scaling and a Mehrotra
predictor-corrector step.  Problem sizes here are small (blocks of dimension
up to a few dozen, around a thousand constraints), so everything is dense:
the Newton system is reduced to the Schur complement M[i,j] = <A_i, W A_j W>,
which is symmetric positive definite under NT scaling and solved by Cholesky.

The search direction solves
    A(dX) = rp,   A*(dy) + dZ = Rd,   dX + W dZ W = R Uc R
where W is the NT scaling point (W Z W = X), R = W^(1/2), and Uc comes from
the symmetrized complementarity linearization in the scaled space (a Lyapunov
solve against V = R^(-1) X R^(-1)).  The predictor uses Uc = -V.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sdp import SdpProblem, SdpSolution, standard_form


@dataclass
class SolverConfig:
    gap_tol: float = 1e-8
    feas_tol: float = 1e-8
    max_iter: int = 200
    step_frac: float = 0.98  # fraction of the step to the cone boundary
    mehrotra: bool = True
    sigma_fixed: float = 0.3  # centering when the corrector is disabled
    y_divergence: float = 1e10
    verbose: bool = False


class _BlockData:
    """Dense constraint data for one block, restricted to its active rows."""

    def __init__(self, kind, dim, rows, A, C):
        self.kind = kind  # "psd" | "diag"
        self.dim = dim
        self.rows = rows  # indices of constraints touching this block
        self.A = A  # (mb, n, n) or (mb, n)
        self.C = C  # (n, n) or (n,)


def _sym(m):
    return 0.5 * (m + m.T)


def _eig_psd_sqrt(mat):
    """Return (sqrt, inv sqrt) of a symmetric positive definite matrix."""
    w, q = np.linalg.eigh(mat)
    if w.min() <= 0:
        raise FloatingPointError("matrix lost positive definiteness")
    rw = np.sqrt(w)
    return (q * rw) @ q.T, (q / rw) @ q.T


def _max_step(x_chol, direction, frac):
    """Largest alpha <= 1 with X + alpha*dX staying in the cone (PSD block)."""
    s = np.linalg.solve(x_chol, np.linalg.solve(x_chol, direction).T)
    lam = np.linalg.eigvalsh(_sym(s)).min()
    if lam >= 0:
        return 1.0
    return min(1.0, frac / (-lam))


def _max_step_diag(x, dx, frac):
    neg = dx < 0
    if not neg.any():
        return 1.0
    return min(1.0, frac * float((x[neg] / -dx[neg]).min()))


class _Workspace:
    """Per-solve state: problem data in standard form plus iterates."""

    def __init__(self, p: SdpProblem):
        p.validate()
        blocks, objective, eqs = standard_form(p)
        self.block_meta = blocks
        self.m = len(eqs)
        if self.m == 0:
            raise ValueError("problem has no constraints")
        b = np.array([t.rhs for t in eqs])
        # Row scaling: normalize each constraint to unit Frobenius norm.
        norms = np.zeros(self.m)
        for i, t in enumerate(eqs):
            norms[i] = math.sqrt(
                sum(float(np.sum(np.asarray(c) ** 2)) for c in t.coeffs.values())
            )
        if (norms == 0).any():
            raise ValueError("constraint with identically zero coefficients")
        self.row_scale = norms
        self.b = b / norms
        self.data: dict[str, _BlockData] = {}
        for blk in blocks:
            rows = [i for i, t in enumerate(eqs) if blk.label in t.coeffs]
            if blk.kind == "psd":
                A = np.zeros((len(rows), blk.dim, blk.dim))
                for k, i in enumerate(rows):
                    A[k] = np.asarray(eqs[i].coeffs[blk.label]) / norms[i]
                C = np.asarray(objective.get(blk.label, np.zeros((blk.dim, blk.dim))), dtype=float)
                C = _sym(C.copy())
            else:
                A = np.zeros((len(rows), blk.dim))
                for k, i in enumerate(rows):
                    A[k] = np.asarray(eqs[i].coeffs[blk.label]) / norms[i]
                C = np.asarray(objective.get(blk.label, np.zeros(blk.dim)), dtype=float).copy()
            self.data[blk.label] = _BlockData(blk.kind, blk.dim, np.array(rows, dtype=int), A, C)
        self.total_dim = sum(blk.dim for blk in blocks)

    def apply_A(self, X):
        """A(X) over all blocks."""
        out = np.zeros(self.m)
        for lab, d in self.data.items():
            x = X[lab]
            if d.kind == "psd":
                out[d.rows] += np.einsum("kij,ij->k", d.A, x)
            else:
                out[d.rows] += d.A @ x
        return out

    def gram_factor(self):
        """Cholesky factor of A A^T for feasibility restoration (or None)."""
        G = np.zeros((self.m, self.m))
        for d in self.data.values():
            if len(d.rows) == 0:
                continue
            Ab = d.A.reshape(len(d.rows), -1)
            G[np.ix_(d.rows, d.rows)] += Ab @ Ab.T
        try:
            return np.linalg.cholesky(G)
        except np.linalg.LinAlgError:
            return None

    def restore(self, X, gram_chol, rp):
        """Minimum-norm correction moving X onto the affine constraint set."""
        lam = np.linalg.solve(gram_chol.T, np.linalg.solve(gram_chol, rp))
        out = {}
        for lab, d in self.data.items():
            corr = (
                np.einsum("k,kij->ij", lam[d.rows], d.A)
                if d.kind == "psd"
                else lam[d.rows] @ d.A
            )
            out[lab] = X[lab] + corr
        return out

    def apply_At(self, y):
        """A*(y) per block."""
        out = {}
        for lab, d in self.data.items():
            yb = y[d.rows]
            if d.kind == "psd":
                out[lab] = np.einsum("k,kij->ij", yb, d.A)
            else:
                out[lab] = yb @ d.A
        return out

    def inner(self, X, Y):
        return sum(float(np.sum(X[lab] * Y[lab])) for lab in X)


def solve(p: SdpProblem, gap_tol: float = 1e-8, feas_tol: float = 1e-8, **kwargs) -> SdpSolution:
    """Solve a block-diagonal SDP to the requested tolerances.

    Returns a solution with status "optimal" when the scaled duality gap and
    the primal/dual residuals all fall below their tolerances, and weaker
    statuses otherwise; never raises on numerical trouble.
    """
    cfg = SolverConfig(gap_tol=gap_tol, feas_tol=feas_tol, **kwargs)
    ws = _Workspace(p)
    m = ws.m

    # Initial iterates: scaled identities, sized from the problem data.
    bnorm = float(np.abs(ws.b).max()) if m else 1.0
    cnorm = max(
        (float(np.abs(d.C).max()) for d in ws.data.values()), default=1.0
    )
    xi_p = max(10.0, math.sqrt(ws.total_dim), 10.0 * bnorm)
    xi_d = max(10.0, math.sqrt(ws.total_dim), 10.0 * cnorm)
    X, Z = {}, {}
    for lab, d in ws.data.items():
        if d.kind == "psd":
            X[lab] = xi_p * np.eye(d.dim)
            Z[lab] = xi_d * np.eye(d.dim)
        else:
            X[lab] = xi_p * np.ones(d.dim)
            Z[lab] = xi_d * np.ones(d.dim)
    y = np.zeros(m)

    status = "numerical-failure"
    it = 0
    stall = 0
    best = None  # (score, X, Z, y, metrics)
    no_improve = 0
    gap_history: list[float] = []
    gram_chol = ws.gram_factor()
    for it in range(1, cfg.max_iter + 1):
        rp = ws.b - ws.apply_A(X)
        Aty = ws.apply_At(y)
        Rd = {}
        for lab, d in ws.data.items():
            Rd[lab] = d.C - Z[lab] - Aty[lab]
        gap = ws.inner(X, Z)
        mu = gap / ws.total_dim
        pobj = sum(float(np.sum(ws.data[lab].C * X[lab])) for lab in X)
        dobj = float(ws.b @ y)
        pinf = float(np.linalg.norm(rp)) / (1.0 + float(np.linalg.norm(ws.b)))
        dinf = max(
            float(np.linalg.norm(Rd[lab])) / (1.0 + float(np.linalg.norm(ws.data[lab].C)))
            for lab in Rd
        )
        relgap = gap / (1.0 + abs(pobj) + abs(dobj))
        gap_history.append(relgap)
        if cfg.verbose:
            print(f"  it {it:3d}  pobj {pobj:+.9e}  gap {relgap:.2e}  pinf {pinf:.2e}  dinf {dinf:.2e}")
        score = max(pinf / cfg.feas_tol, dinf / cfg.feas_tol, relgap / cfg.gap_tol)
        if best is None or score < best[0] * 0.98:
            best = (score, {k: v.copy() for k, v in X.items()}, {k: v.copy() for k, v in Z.items()}, y.copy(), (pobj, relgap, pinf, dinf))
            no_improve = 0
        else:
            no_improve += 1
        if pinf <= cfg.feas_tol and dinf <= cfg.feas_tol and relgap <= cfg.gap_tol:
            status = "optimal"
            break
        if no_improve >= 8:
            break  # stalled; classify from the best iterate below
        if float(np.abs(y).max(initial=0.0)) > cfg.y_divergence:
            status = "infeasible"
            break

        # NT scaling per block.
        try:
            scal = {}
            for lab, d in ws.data.items():
                if d.kind == "psd":
                    xs, _ = _eig_psd_sqrt(X[lab])
                    s_mat = _sym(xs @ Z[lab] @ xs)
                    _, s_isqrt = _eig_psd_sqrt(s_mat)
                    W = _sym(xs @ s_isqrt @ xs)
                    R, Rinv = _eig_psd_sqrt(W)
                    V = _sym(Rinv @ X[lab] @ Rinv)
                    lamV, QV = np.linalg.eigh(V)
                    scal[lab] = (W, R, Rinv, lamV, QV)
                else:
                    w = np.sqrt(X[lab] / Z[lab])
                    v = np.sqrt(X[lab] * Z[lab])
                    scal[lab] = (w, v)

            # Schur complement M[i,j] = <A_i, W A_j W>.
            M = np.zeros((m, m))
            for lab, d in ws.data.items():
                if len(d.rows) == 0:
                    continue
                if d.kind == "psd":
                    W = scal[lab][0]
                    B = np.einsum("ij,kjl,lm->kim", W, d.A, W, optimize=True)
                    Msub = d.A.reshape(len(d.rows), -1) @ B.reshape(len(d.rows), -1).T
                else:
                    w2 = scal[lab][0] ** 2
                    Msub = (d.A * w2) @ d.A.T
                M[np.ix_(d.rows, d.rows)] += Msub

            L = None
            shift = 0.0
            mnorm = float(np.abs(M).max())
            for attempt in range(4):
                try:
                    L = np.linalg.cholesky(M + shift * np.eye(m))
                    break
                except np.linalg.LinAlgError:
                    shift = mnorm * (1e-13 if attempt == 0 else shift / mnorm * 1e3)
            if L is None:
                status = "numerical-failure"
                break

            def schur_solve(rhs):
                x = np.linalg.solve(L.T, np.linalg.solve(L, rhs))
                # one step of iterative refinement; the Schur matrix turns
                # very ill-conditioned near convergence
                r = rhs - M @ x - shift * x
                return x + np.linalg.solve(L.T, np.linalg.solve(L, r))

            def newton(Rc):
                """Solve the Newton system for a given centrality target."""
                rhs = rp.copy()
                WRW = {}
                for lab, d in ws.data.items():
                    if d.kind == "psd":
                        W = scal[lab][0]
                        WRW[lab] = _sym(W @ Rd[lab] @ W)
                    else:
                        WRW[lab] = scal[lab][0] ** 2 * Rd[lab]
                    x = WRW[lab] - Rc[lab]
                    if d.kind == "psd":
                        rhs[d.rows] += np.einsum("kij,ij->k", d.A, x)
                    else:
                        rhs[d.rows] += d.A @ x
                dy = schur_solve(rhs)
                dZ, dX = {}, {}
                Atdy = ws.apply_At(dy)
                for lab, d in ws.data.items():
                    dZ[lab] = Rd[lab] - Atdy[lab]
                    if d.kind == "psd":
                        W = scal[lab][0]
                        dX[lab] = _sym(Rc[lab] - W @ dZ[lab] @ W)
                    else:
                        dX[lab] = Rc[lab] - scal[lab][0] ** 2 * dZ[lab]
                return dy, dX, dZ

            def step_lengths(dX, dZ):
                ap = ad = 1.0
                for lab, d in ws.data.items():
                    if d.kind == "psd":
                        ap = min(ap, _max_step(np.linalg.cholesky(X[lab]), dX[lab], cfg.step_frac))
                        ad = min(ad, _max_step(np.linalg.cholesky(Z[lab]), dZ[lab], cfg.step_frac))
                    else:
                        ap = min(ap, _max_step_diag(X[lab], dX[lab], cfg.step_frac))
                        ad = min(ad, _max_step_diag(Z[lab], dZ[lab], cfg.step_frac))
                return ap, ad

            # Predictor (affine) direction: Uc = -V, i.e. Rc = -X.
            Rc_aff = {lab: -X[lab] for lab in X}
            dy_a, dX_a, dZ_a = newton(Rc_aff)
            ap_a, ad_a = step_lengths(dX_a, dZ_a)

            if cfg.mehrotra:
                gap_aff = 0.0
                for lab in X:
                    gap_aff += float(
                        np.sum((X[lab] + ap_a * dX_a[lab]) * (Z[lab] + ad_a * dZ_a[lab]))
                    )
                sigma = min(0.9999, max(1e-6, (max(gap_aff, 0.0) / gap) ** 3))
            else:
                sigma = cfg.sigma_fixed

            # Corrector: Lyapunov solve in the scaled space per block.
            Rc = {}
            for lab, d in ws.data.items():
                if d.kind == "psd":
                    W, R, Rinv, lamV, QV = scal[lab]
                    Ea = _sym(Rinv @ dX_a[lab] @ Rinv)
                    Fa = _sym(R @ dZ_a[lab] @ R)
                    Wmat = sigma * mu * np.eye(d.dim) - QV @ np.diag(lamV**2) @ QV.T - _sym(Ea @ Fa)
                    Wh = QV.T @ Wmat @ QV
                    Uh = 2.0 * Wh / np.add.outer(lamV, lamV)
                    U = QV @ Uh @ QV.T
                    Rc[lab] = _sym(R @ U @ R)
                else:
                    w, v = scal[lab]
                    u = (sigma * mu - v * v - dX_a[lab] * dZ_a[lab]) / v
                    Rc[lab] = w * u
            dy, dX, dZ = newton(Rc)
            ap, ad = step_lengths(dX, dZ)
        except (FloatingPointError, np.linalg.LinAlgError):
            status = "numerical-failure"
            break

        # Apply the step, backtracking if roundoff pushed an iterate out of
        # the cone (the boundary fraction is computed from eigenvalues and
        # can overshoot by rounding when X or Z is very ill-conditioned).
        def _stays_pd(blocks_new):
            try:
                for lab, v in blocks_new.items():
                    if ws.data[lab].kind == "psd":
                        np.linalg.cholesky(v)
                    elif (v <= 0).any():
                        return False
                return True
            except np.linalg.LinAlgError:
                return False

        for _ in range(40):
            Xn = {lab: X[lab] + ap * dX[lab] for lab in X}
            if _stays_pd({lab: _sym(v) if ws.data[lab].kind == "psd" else v for lab, v in Xn.items()}):
                break
            ap *= 0.7
        else:
            ap = 0.0
        for _ in range(40):
            Zn = {lab: Z[lab] + ad * dZ[lab] for lab in Z}
            if _stays_pd({lab: _sym(v) if ws.data[lab].kind == "psd" else v for lab, v in Zn.items()}):
                break
            ad *= 0.7
        else:
            ad = 0.0

        if max(ap, ad) < 1e-10:
            stall += 1
            if stall >= 5:
                break
        else:
            stall = 0
        for lab in X:
            X[lab] = _sym(X[lab] + ap * dX[lab]) if ws.data[lab].kind == "psd" else X[lab] + ap * dX[lab]
            Z[lab] = _sym(Z[lab] + ad * dZ[lab]) if ws.data[lab].kind == "psd" else Z[lab] + ad * dZ[lab]
        y = y + ad * dy

        # Feasibility restoration: once the primal residual is small, snap X
        # onto the affine constraint set when that keeps it inside the cone.
        if gram_chol is not None:
            rp_now = ws.b - ws.apply_A(X)
            nrm = float(np.linalg.norm(rp_now))
            if 0.0 < nrm <= 1e-3 * (1.0 + float(np.linalg.norm(ws.b))):
                Xr = ws.restore(X, gram_chol, rp_now)
                ok = True
                try:
                    for lab, v in Xr.items():
                        if ws.data[lab].kind == "psd":
                            np.linalg.cholesky(_sym(v))
                        elif (v <= 0).any():
                            ok = False
                            break
                except np.linalg.LinAlgError:
                    ok = False
                if ok:
                    X = {
                        lab: _sym(v) if ws.data[lab].kind == "psd" else v
                        for lab, v in Xr.items()
                    }

    # Report the best iterate seen (later iterations can drift once the
    # Schur system degenerates).
    if best is not None and status not in ("optimal", "infeasible"):
        _, X, Z, y, (pobj, relgap, pinf, dinf) = best
        if pinf <= cfg.feas_tol and dinf <= cfg.feas_tol and relgap <= cfg.gap_tol:
            status = "optimal"
        elif pinf <= 1e3 * cfg.feas_tol and dinf <= 1e3 * cfg.feas_tol and relgap <= 1e3 * cfg.gap_tol:
            status = "near-optimal"
        else:
            status = "numerical-failure"

    pobj = sum(float(np.sum(ws.data[lab].C * X[lab])) for lab in X)
    gap = ws.inner(X, Z)
    relgap = gap / (1.0 + abs(pobj) + abs(float(ws.b @ y)))
    return SdpSolution(
        blocks={lab: x.copy() for lab, x in X.items()},
        y=y / ws.row_scale,
        objective=pobj,
        status=status,
        gap=relgap,
        iterations=it,
        dual_blocks={lab: z.copy() for lab, z in Z.items()},
        gap_history=gap_history,
    )
