"""Turn a numerical SDP solution into a defensible density bound.

The chain is: project the solution onto the equality constraints (least
squares, with high-precision residual refinement), recompute feasibility
margins in extended precision, verify the sign condition of the recovered
function over the enlarged-body region with certified Lipschitz bounds, and
evaluate the final bound

    2 pi * f(0, I) / f_{0,0;0} * area(enlargement * K).

Certification follows the eigenvalue-versus-residual argument: when every
block's minimum eigenvalue exceeds safety_factor times the worst constraint
residual, a nearby exactly feasible solution exists, and the cylinder
identity then covers rho >= 1 exactly; the region rho <= 1 outside the
enlarged Minkowski difference is covered by the adaptive box pass below.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np
from mpmath import mp

from .fourier import CoefficientTensor, evaluate_f, lambda_of
from .geometry import minkowski_difference, pentagon
from .motion import ORIGIN
from .sdp import SdpProblem, SdpSolution
from .specfun import coeff_D_exact, laguerre_coeffs_exact


class RankDeficiencyError(ValueError):
    """The equality system is rank-deficient after pruning."""


# ---------------------------------------------------------------------------
# projection onto the equality constraints


def _stack_layout(p: SdpProblem):
    labels = [b.label for b in p.blocks]
    offs, total = {}, 0
    for b in p.blocks:
        offs[b.label] = total
        total += b.dim * b.dim if b.kind == "psd" else b.dim
    return labels, offs, total


def _stack_rows(p: SdpProblem):
    labels, offs, total = _stack_layout(p)
    rows, rhs = [], []
    for t in p.eq_constraints:
        row = np.zeros(total)
        for lab, c in t.coeffs.items():
            c = np.asarray(c)
            row[offs[lab]: offs[lab] + c.size] = c.ravel()
        n = float(np.linalg.norm(row))
        rows.append(row / n)
        rhs.append(t.rhs / n)
    return labels, offs, total, np.array(rows), np.array(rhs)


def project_affine(sol: SdpSolution, p: SdpProblem) -> tuple[SdpSolution, dict]:
    """Least-squares projection of the blocks onto the equality subspace.

    Inequalities are untouched.  Returns the projected solution together
    with diagnostics: displacement norm and pre/post residuals.  Raises
    RankDeficiencyError when dependent rows survived assembly pruning.
    """
    labels, offs, total, A, b = _stack_rows(p)
    m = len(A)
    svals = np.linalg.svd(A, compute_uv=False)
    if svals[-1] < 1e-8 * svals[0]:
        raise RankDeficiencyError(
            f"equality system nearly rank-deficient (sigma_min/sigma_max = {svals[-1]/svals[0]:.2e})"
        )
    x = np.zeros(total)
    for lab in labels:
        blk = np.asarray(sol.blocks[lab])
        x[offs[lab]: offs[lab] + blk.size] = blk.ravel()
    pre = A @ x - b
    G = np.linalg.cholesky(A @ A.T)
    x1 = x.copy()
    for _ in range(3):  # refinement squeezes the residual toward roundoff
        r = A @ x1 - b
        lam = np.linalg.solve(G.T, np.linalg.solve(G, r))
        x1 = x1 - A.T @ lam
    post = A @ x1 - b
    blocks = dict(sol.blocks)
    for lab in labels:
        blk = np.asarray(sol.blocks[lab])
        v = x1[offs[lab]: offs[lab] + blk.size].reshape(blk.shape)
        blocks[lab] = 0.5 * (v + v.T) if v.ndim == 2 else v
    out = SdpSolution(
        blocks=blocks,
        y=sol.y.copy(),
        objective=sol.objective,
        status=sol.status,
        gap=sol.gap,
        iterations=sol.iterations,
        dual_blocks=sol.dual_blocks,
    )
    info = {
        "displacement": float(np.linalg.norm(x1 - x)),
        "pre_residual": float(np.abs(pre).max()),
        "post_residual": float(np.abs(post).max()),
        "rows": m,
    }
    return out, info


def equality_residual_hp(sol: SdpSolution, p: SdpProblem, precision_bits: int = 128) -> float:
    """Worst normalized equality residual, recomputed in extended precision."""
    with mp.workprec(precision_bits):
        worst = mp.mpf(0)
        hp_rows = p.meta.get("hp_rows")
        if hp_rows:
            for coeffs, rhs, _label in hp_rows:
                acc = -mp.mpf(rhs)
                nrm = mp.mpf(0)
                for (lab, i, j), w in coeffs.items():
                    w = mp.mpf(w)
                    acc += w * mp.mpf(float(sol.blocks[lab][i, j]))
                    nrm += w * w
                worst = max(worst, abs(acc) / mp.sqrt(nrm))
            return float(worst)
        for t in p.eq_constraints:
            acc = -mp.mpf(t.rhs)
            nrm = mp.mpf(0)
            for lab, c in t.coeffs.items():
                x = np.asarray(sol.blocks[lab])
                for idx, cv in np.ndenumerate(np.asarray(c)):
                    if cv != 0.0:
                        acc += mp.mpf(cv) * mp.mpf(float(x[idx]))
                        nrm += mp.mpf(cv) ** 2
            worst = max(worst, abs(acc) / mp.sqrt(nrm))
        return float(worst)


def feasibility_margin(
    sol: SdpSolution, p: SdpProblem, precision_bits: int = 128
) -> tuple[float, float]:
    """Minimum block eigenvalue and worst constraint residual, recomputed.

    Residuals are evaluated in extended precision against the assembly's
    high-precision rows when the problem carries them (float rows are lifted
    exactly otherwise), each normalized by its coefficient norm so the value
    is the distance to the constraint hyperplane, which is the scale the
    perturbation argument compares against the eigenvalues; inequality rows
    count only their violation.
    """
    with mp.workprec(precision_bits):
        worst = mp.mpf(0)
        hp_rows = p.meta.get("hp_rows")
        if hp_rows:
            for coeffs, rhs, _label in hp_rows:
                acc = -mp.mpf(rhs)
                nrm = mp.mpf(0)
                for (lab, i, j), w in coeffs.items():
                    w = mp.mpf(w)
                    acc += w * mp.mpf(float(sol.blocks[lab][i, j]))
                    nrm += w * w
                worst = max(worst, abs(acc) / mp.sqrt(nrm))
        else:
            for t in p.eq_constraints:
                acc = -mp.mpf(t.rhs)
                nrm = mp.mpf(0)
                for lab, c in t.coeffs.items():
                    x = np.asarray(sol.blocks[lab])
                    for idx, cv in np.ndenumerate(np.asarray(c)):
                        if cv != 0.0:
                            acc += mp.mpf(cv) * mp.mpf(float(x[idx]))
                            nrm += mp.mpf(cv) ** 2
                worst = max(worst, abs(acc) / mp.sqrt(nrm))
        for t in p.ineq_constraints:
            acc = -mp.mpf(t.rhs)
            nrm = mp.mpf(0)
            for lab, c in t.coeffs.items():
                x = np.asarray(sol.blocks[lab])
                c = np.asarray(c)
                if c.ndim == 2:
                    for (i, j), cv in np.ndenumerate(c):
                        if cv != 0.0:
                            acc += mp.mpf(cv) * mp.mpf(float(x[i, j]))
                            nrm += mp.mpf(cv) ** 2
                else:
                    for i, cv in enumerate(c):
                        if cv != 0.0:
                            acc += mp.mpf(cv) * mp.mpf(float(x[i]))
                            nrm += mp.mpf(cv) ** 2
            if nrm > 0 and acc / mp.sqrt(nrm) > worst:
                worst = acc / mp.sqrt(nrm)
        min_eig = mp.inf
        for b in p.blocks:
            x = np.asarray(sol.blocks[b.label])
            if b.kind == "diag" or x.ndim == 1:
                min_eig = min(min_eig, mp.mpf(float(x.min())))
                continue
            A = mp.matrix([[mp.mpf(float(x[i, j])) for j in range(x.shape[1])] for i in range(x.shape[0])])
            ev = mp.eigsy(A, eigvals_only=True)
            min_eig = min(min_eig, min(ev))
        return float(min_eig), float(worst)


# ---------------------------------------------------------------------------
# certified Lipschitz bounds


def _bernstein_max(coeffs: list, a, b) -> object:
    """Certified bound on max |p(u)| over [a, b] via Bernstein coefficients."""
    n = len(coeffs) - 1
    if n < 0:
        return mp.mpf(0)
    # shift to [0, 1]: p(a + (b - a) tau) = sum ct_k tau^k
    w = b - a
    ct = [mp.mpf(0)] * (n + 1)
    for j, c in enumerate(coeffs):
        if c == 0:
            continue
        # (a + w tau)^j expanded
        for k in range(j + 1):
            ct[k] += c * mp.binomial(j, k) * a ** (j - k) * w**k
    best = mp.mpf(0)
    for i in range(n + 1):
        beta = mp.mpf(0)
        for k in range(i + 1):
            beta += ct[k] * mp.binomial(i, k) / mp.binomial(n, k)
        best = max(best, abs(beta))
    return best


def _weighted_sup(coeffs: list, u_max, panels: int = 24) -> object:
    """Certified sup over [0, u_max] of |p(u)| e^(-pi u), by panelled Bernstein."""
    total = mp.mpf(0)
    step = mp.mpf(u_max) / panels
    for i in range(panels):
        a = i * step
        bound = _bernstein_max(coeffs, a, a + step) * mp.e ** (-mp.pi * a)
        total = max(total, bound)
    return total


def _compiled_pairs(t: CoefficientTensor):
    """Per negation-orbit radial polynomials in u = rho^2 (weights folded in)."""
    seen = set()
    for r, s, k, v in t.nonzero_items():
        m = abs(r - s)
        if (r - s) % 10 != 0 or k < m // 2:
            continue
        if (r, s) in seen or (-r, -s) in seen:
            continue
        seen.add((r, s))
    d = t.params.d
    out = []
    for (r, s) in sorted(seen):
        weight = 1 if (r, s) == (-r, -s) else 2
        m = abs(r - s)
        ucoeffs = [mp.mpf(0)] * (d + 1)
        for k in range(m // 2, d + 1):
            v = t.get(r, s, k)
            if v == 0.0:
                continue
            q, e, _ = coeff_D_exact(r, s, k)
            dsc = mp.mpf(q.numerator) / q.denominator * mp.pi**e
            base = mp.mpf(v) * (-1) ** (m // 2) * dsc * weight
            for j, lam in enumerate(laguerre_coeffs_exact(k - m // 2, m)):
                ucoeffs[m // 2 + j] += base * mp.mpf(lam.numerator) / lam.denominator * mp.pi**j
        out.append((r, s, ucoeffs))
    return out


def _lipschitz_pair(t: CoefficientTensor, rho_max: float, precision_bits: int) -> tuple[float, float]:
    """Certified bounds (L_x, L_alpha) on the gradient components of f.

    Works on the compiled per-pair radial polynomials P(u), u = rho^2, with
    f = sum_pairs cos(s alpha + (r-s) theta) P(u) e^(-pi u).  The radial
    derivative is 2 rho (P' - pi P)(u) e^(-pi u) and the angular-in-theta
    part contributes |r-s| P(u)/rho; since P carries the factor u^(|r-s|/2),
    both are polynomials (times a bounded sqrt(u)), and each factor is
    bounded by panelled Bernstein enclosures over [0, rho_max^2].
    """
    with mp.workprec(max(precision_bits, 128)):
        U = mp.mpf(rho_max) ** 2
        sqrtU = mp.sqrt(U)
        Lx = mp.mpf(0)
        La = mp.mpf(0)
        for r, s, ucoeffs in _compiled_pairs(t):
            m = abs(r - s)
            # d/drho: 2 sqrt(u) (P' - pi P)
            dcoef = [
                (i + 1) * ucoeffs[i + 1] if i + 1 < len(ucoeffs) else mp.mpf(0)
                for i in range(len(ucoeffs))
            ]
            q = [dcoef[i] - mp.pi * ucoeffs[i] for i in range(len(ucoeffs))]
            sup_radial = 2 * sqrtU * _weighted_sup(q, U)
            sup_angular = mp.mpf(0)
            if m > 0:
                # |r-s| P(u) / rho = |r-s| sqrt(u) * (P(u)/u); P divisible by u
                shifted = ucoeffs[1:]
                sup_angular = m * sqrtU * _weighted_sup(shifted, U)
            Lx += sup_radial + sup_angular
            La += abs(s) * _weighted_sup(ucoeffs, U)
        return float(Lx * (1 + mp.mpf(1e-12))), float(La * (1 + mp.mpf(1e-12)))


def lipschitz_estimate(t: CoefficientTensor, rho_max: float = 1.0, precision_bits: int = 128) -> float:
    """Certified upper bound on the spatial gradient norm of f for rho <= rho_max."""
    return _lipschitz_pair(t, rho_max, precision_bits)[0]


# ---------------------------------------------------------------------------
# high-precision evaluation of f


class MpEvaluator:
    """Evaluates f at a fixed precision with precompiled radial polynomials.

    f = sum over canonical pairs of  weight * cos(s alpha + (r-s) theta)
        * rho^|r-s| * P_{r,s}(rho^2) * e^(-pi rho^2),
    where P collects the Laguerre and D-coefficient data.  Trigonometry in
    theta is generated from (x / rho, y / rho) by angle-addition, so a point
    evaluation costs a handful of multiplications per pair.
    """

    def __init__(self, t: CoefficientTensor, precision_bits: int):
        self.prec = precision_bits
        self.pairs = []  # (s, r - s, radial coefficients in u = rho^2)
        with mp.workprec(precision_bits):
            seen = set()
            for r, s, k, v in t.nonzero_items():
                m = abs(r - s)
                if (r - s) % 10 != 0 or k < m // 2:
                    continue
                if (r, s) in seen or (-r, -s) in seen:
                    continue
                seen.add((r, s))
            d = t.params.d
            for (r, s) in sorted(seen):
                weight = 1 if (r, s) == (-r, -s) else 2
                m = abs(r - s)
                ucoeffs = [mp.mpf(0)] * (d + 1)
                for k in range(m // 2, d + 1):
                    v = t.get(r, s, k)
                    if v == 0.0:
                        continue
                    q, e, _ = coeff_D_exact(r, s, k)
                    dsc = mp.mpf(q.numerator) / q.denominator * mp.pi**e
                    base = mp.mpf(v) * (-1) ** (m // 2) * dsc * weight
                    for j, lam in enumerate(laguerre_coeffs_exact(k - m // 2, m)):
                        ucoeffs[m // 2 + j] += (
                            base * mp.mpf(lam.numerator) / lam.denominator * mp.pi**j
                        )
                self.pairs.append((s, r - s, ucoeffs))

    def eval(self, x, y, cos_table, sin_table):
        """f at (x, y) given per-alpha tables cos(s alpha), sin(s alpha)."""
        with mp.workprec(self.prec):
            x = mp.mpf(x)
            y = mp.mpf(y)
            u = x * x + y * y
            rho = mp.sqrt(u)
            if rho > 0:
                c1, s1 = x / rho, y / rho
            else:
                c1, s1 = mp.mpf(1), mp.mpf(0)
            # cos/sin of n*theta for the angular differences we need
            trig = {0: (mp.mpf(1), mp.mpf(0))}
            cn, sn = mp.mpf(1), mp.mpf(0)
            maxn = max((abs(md) for _, md, _ in self.pairs), default=0)
            for n in range(1, maxn + 1):
                cn, sn = cn * c1 - sn * s1, sn * c1 + cn * s1
                trig[n] = (cn, sn)
            total = mp.mpf(0)
            for s, md, ucoeffs in self.pairs:
                poly = mp.mpf(0)
                for c in reversed(ucoeffs):
                    poly = poly * u + c
                if poly == 0:
                    continue
                ct, st = trig[abs(md)]
                if md < 0:
                    st = -st
                ca, sa = cos_table[s], sin_table[s]
                # cos(s alpha + md theta)
                phase = ca * ct - sa * st
                total += poly * phase
            return total * mp.e ** (-mp.pi * u)

    def alpha_tables(self, alpha: float):
        with mp.workprec(self.prec):
            a = mp.mpf(alpha)
            cos_table, sin_table = {}, {}
            for s, _, _ in self.pairs:
                if s not in cos_table:
                    cos_table[s] = mp.cos(s * a)
                    sin_table[s] = mp.sin(s * a)
            return cos_table, sin_table


def tensor_hash(t: CoefficientTensor) -> str:
    return hashlib.sha256(t.dumps().encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# sign verification over the enlarged-body region


@dataclass
class VerifySpec:
    """Geometry of the verification sweep (matches verification_sample)."""

    alpha_count: int = 17
    grid_n: int = 160
    max_depth: int = 8

    def describe(self) -> str:
        return f"alpha_count={self.alpha_count} grid_n={self.grid_n} max_depth={self.max_depth}"


@dataclass
class SignVerification:
    sign_margin: float
    witness: tuple[float, float, float]
    cert_margin: float
    certified_sign: bool
    stream_points: int
    evaluations: int
    lipschitz_x: float
    lipschitz_alpha: float
    base_cell_radius: float
    covering_radius: float
    precision_bits: int
    enlargement: float
    failures: list = field(default_factory=list)
    notes: str = ""


def verify_nonpositivity(
    t: CoefficientTensor,
    enlargement: float,
    sample_spec: VerifySpec,
    precision_bits: int = 256,
    alpha_indices=None,
) -> SignVerification:
    """Certify f <= 0 on {rho <= 1} outside the enlarged Minkowski difference.

    Streams the verification sample (the level-0 box centers), recording the
    maximum of f over it in `precision_bits` arithmetic, then runs an
    adaptive box pass: a box is discharged when it cannot meet the region
    (entirely outside the unit disk, or inside the Minkowski difference for
    every rotation angle it spans, via an erosion test), or when the center
    value plus the certified Lipschitz radius is nonpositive; otherwise it is
    split, down to max_depth.  The region rho >= 1 is excluded here: the
    cylinder identity covers it, and its residual is reported separately.
    """
    if enlargement < 1.0:
        raise ValueError(f"enlargement must be >= 1, got {enlargement}")
    rho_max = math.sqrt(2.0) + 0.01  # boxes live in [-1,1]^2
    L_x, L_a = _lipschitz_pair(t, rho_max, max(precision_bits, 128))
    ev = MpEvaluator(t, precision_bits)
    rate = 0.5 * enlargement + 1e-12  # Hausdorff speed of the difference in alpha

    alpha_lo = -2.0 * math.pi / 10.0
    dalpha = (4.0 * math.pi / 10.0) / sample_spec.alpha_count
    dx0 = 2.0 / sample_spec.grid_n

    sign_margin = -math.inf
    witness = (0.0, 0.0, 0.0)
    cert_margin = -math.inf
    failures = []
    stream_points = 0
    evaluations = 0

    alpha_cache: dict[float, tuple] = {}

    def alpha_data(amid):
        got = alpha_cache.get(amid)
        if got is None:
            edges = minkowski_difference(amid, enlargement).edges()
            cos_t, sin_t = ev.alpha_tables(amid)
            got = (edges, cos_t, sin_t)
            alpha_cache[amid] = got
        return got

    aborted = False
    refine_queue: list[tuple] = []

    def process(xlo, ylo, h, amid, ha, depth):
        """Handle one box; returns children to refine (empty when settled)."""
        nonlocal sign_margin, witness, cert_margin, stream_points, evaluations
        cx, cy = xlo + h, ylo + h
        # (1) box entirely outside the unit disk?
        nx = min(abs(xlo), abs(xlo + 2 * h)) if (xlo > 0 or xlo + 2 * h < 0) else 0.0
        ny = min(abs(ylo), abs(ylo + 2 * h)) if (ylo > 0 or ylo + 2 * h < 0) else 0.0
        if nx * nx + ny * ny > 1.0:
            return ()
        edges, cos_t, sin_t = alpha_data(amid)
        # (2) box inside the open difference for every alpha it spans?
        margin = rate * ha
        corners = ((xlo, ylo), (xlo + 2 * h, ylo), (xlo, ylo + 2 * h), (xlo + 2 * h, ylo + 2 * h))
        if all(
            all(n[0] * px + n[1] * py <= c - margin - 1e-12 for n, c in edges)
            for px, py in corners
        ):
            return ()
        fc = float(ev.eval(cx, cy, cos_t, sin_t))
        evaluations += 1
        center_in_region = cx * cx + cy * cy <= 1.0 and not all(
            n[0] * cx + n[1] * cy <= c - 1e-12 for n, c in edges
        )
        if depth == 0 and center_in_region:
            stream_points += 1
            if fc > sign_margin:
                sign_margin = fc
                witness = (math.hypot(cx, cy), math.atan2(cy, cx) % (2 * math.pi), amid % (2 * math.pi))
        bound = fc + L_x * math.sqrt(2.0) * h + L_a * ha
        if bound <= 0.0:
            cert_margin = max(cert_margin, bound)
            return ()
        if fc > 0.0 and center_in_region:
            # definitive witness: f is positive at a region point, no amount
            # of refinement can certify this box
            failures.append((cx, cy, amid, fc, bound))
            cert_margin = max(cert_margin, bound)
            return ()
        if depth >= sample_spec.max_depth:
            failures.append((cx, cy, amid, fc, bound))
            cert_margin = max(cert_margin, bound)
            return ()
        hh = 0.5 * h
        hha = 0.5 * ha
        return tuple(
            (xlo + ddx, ylo + ddy, hh, amid + da, hha, depth + 1)
            for da in (-hha, hha)
            for ddx in (0.0, h)
            for ddy in (0.0, h)
        )

    # Stream pass: every level-0 box is visited so the reported sign_margin
    # covers the full verification sample even when certification fails early.
    # alpha_indices restricts to a subset of slices (parallel workers).
    for ia in (range(sample_spec.alpha_count) if alpha_indices is None else alpha_indices):
        amid = alpha_lo + (ia + 0.5) * dalpha
        for iy in range(sample_spec.grid_n):
            for ix in range(sample_spec.grid_n):
                refine_queue.extend(
                    process(-1.0 + ix * dx0, -1.0 + iy * dx0, 0.5 * dx0, amid, 0.5 * dalpha, 0)
                )
    # Refinement pass, bounded by the failure and evaluation budgets.
    while refine_queue:
        if len(failures) >= 200 or evaluations >= 20_000_000:
            aborted = True
            break
        refine_queue.extend(process(*refine_queue.pop()))
    certified = not failures and not aborted
    base_radius = math.sqrt(2.0) * 0.5 * dx0 + (L_a / L_x) * 0.5 * dalpha if L_x > 0 else 0.0
    if certified and L_x > 0 and math.isfinite(sign_margin):
        covering_radius = max((cert_margin - sign_margin) / L_x, 0.0)
    else:
        covering_radius = base_radius
    notes = (
        "adaptive box certification; covering_radius is the effective radius "
        "(cert_margin - sign_margin)/L_x so that sign_margin + L*covering = cert_margin"
    )
    if aborted:
        notes += "; refinement aborted at the failure/evaluation budget"
    return SignVerification(
        sign_margin=sign_margin,
        witness=witness,
        cert_margin=cert_margin,
        certified_sign=certified,
        stream_points=stream_points,
        evaluations=evaluations,
        lipschitz_x=L_x,
        lipschitz_alpha=L_a,
        base_cell_radius=base_radius,
        covering_radius=covering_radius,
        precision_bits=precision_bits,
        enlargement=enlargement,
        failures=failures[:16],
        notes=notes,
    )


# ---------------------------------------------------------------------------
# the bound and the assembled report


def final_bound(t: CoefficientTensor, enlargement: float = 1.02) -> float:
    """Density bound 2 pi f(0, I) / lambda * area(enlargement * K).

    The 2 pi restores the inversion-formula normalization relative to the
    literal closed form (see the lambda integration oracle); the enlargement
    enters through the area because packings rescale freely.  Raises when
    lambda <= 0.
    """
    lam = lambda_of(t)
    if lam <= 0.0:
        raise ValueError(f"lambda = {lam} must be positive for a valid bound")
    f0 = evaluate_f(t, ORIGIN)
    return 2.0 * math.pi * f0 / lam * pentagon(enlargement).area()


@dataclass
class VerificationReport:
    min_block_eigenvalue: float
    max_constraint_residual: float
    sign_margin: float
    lipschitz_bound: float
    covering_radius: float
    enlargement: float
    certified: bool
    bound: float
    safety_factor: float = 1e3
    cert_margin: float = math.nan
    witness: tuple = ()
    stream_points: int = 0
    precision_bits: int = 256
    tensor_hash: str = ""
    sample_spec: str = ""
    lambda_value: float = math.nan
    f_origin: float = math.nan
    notes: str = ""

    def invariant_holds(self) -> bool:
        eig_ok = self.min_block_eigenvalue > self.safety_factor * self.max_constraint_residual
        sign_ok = self.sign_margin + self.lipschitz_bound * self.covering_radius <= 0.0
        return eig_ok and sign_ok

    def to_text(self) -> str:
        lines = ["pentapack verification report v1"]
        for k, v in self.to_dict().items():
            lines.append(f"{k}: {v}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "min_block_eigenvalue": self.min_block_eigenvalue,
            "max_constraint_residual": self.max_constraint_residual,
            "sign_margin": self.sign_margin,
            "lipschitz_bound": self.lipschitz_bound,
            "covering_radius": self.covering_radius,
            "cert_margin": self.cert_margin,
            "enlargement": self.enlargement,
            "certified": self.certified,
            "bound": self.bound,
            "safety_factor": self.safety_factor,
            "witness": list(self.witness),
            "stream_points": self.stream_points,
            "precision_bits": self.precision_bits,
            "tensor_hash": self.tensor_hash,
            "sample_spec": self.sample_spec,
            "lambda": self.lambda_value,
            "f_origin": self.f_origin,
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def build_report(
    t: CoefficientTensor,
    sol: SdpSolution,
    problem: SdpProblem,
    verification: SignVerification,
    safety_factor: float = 1e3,
    margin_precision_bits: int = 128,
) -> VerificationReport:
    """Combine margins, sign verification and the bound into one report.

    `certified` is true only when the positivity margins dominate the
    residuals (so an exactly feasible nearby solution exists, which also
    discharges the rho >= 1 region through the cylinder identity) and the
    adaptive sign pass succeeded.
    """
    min_eig, max_res = feasibility_margin(sol, problem, margin_precision_bits)
    bound = final_bound(t, verification.enlargement)
    certified = (
        min_eig > safety_factor * max_res
        and verification.certified_sign
        and verification.sign_margin + verification.lipschitz_x * verification.covering_radius <= 0.0
    )
    return VerificationReport(
        min_block_eigenvalue=min_eig,
        max_constraint_residual=max_res,
        sign_margin=verification.sign_margin,
        lipschitz_bound=verification.lipschitz_x,
        covering_radius=verification.covering_radius,
        enlargement=verification.enlargement,
        certified=certified,
        bound=bound,
        safety_factor=safety_factor,
        cert_margin=verification.cert_margin,
        witness=verification.witness,
        stream_points=verification.stream_points,
        precision_bits=verification.precision_bits,
        tensor_hash=tensor_hash(t),
        sample_spec=f"stream={verification.stream_points} evaluations={verification.evaluations}",
        lambda_value=lambda_of(t),
        f_origin=evaluate_f(t, ORIGIN),
        notes=verification.notes,
    )
