"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Criterion 1 exercises the full published-configuration pipeline; the others
check the supporting machinery at their stated tolerances.  Run with
`pytest tests/test_acceptance.py -v -s` to see every line.
"""

import math

import numpy as np
import pytest

from pentapack.certify import (
    VerifySpec,
    equality_residual_hp,
    project_affine,
    verify_nonpositivity,
)
from pentapack.fourier import (
    CoefficientTensor,
    ModelParams,
    evaluate_f,
    evaluate_f_quadrature,
    random_positive_tensor,
)
from pentapack.geometry import (
    constraint_sample,
    copies_disjoint,
    copies_disjoint_sat,
    minkowski_difference,
    pentagon,
)
from pentapack.motion import MotionPoint, compose, from_polar, invert, to_polar
from pentapack.pipeline import RunConfig, run_all
from pentapack.sdp import Block, LinearTerm, SdpProblem, SdpSolution
from pentapack.sdpa import export_sdpa, import_solution, parse_sdpa
from pentapack.solver import solve
from pentapack.sos import assemble_problem_A, block_specs, realize_basis, recover_tensor
from pentapack.specfun import (
    hankel_closed_form,
    hankel_integral_oracle,
    kummer_1f1,
    laguerre,
    pochhammer,
)
from pentapack.theta import (
    FiniteGraph,
    brute_force_alpha,
    complete_graph,
    empty_graph,
    petersen_graph,
    theta_prime_bound,
)

CONSTRUCTION_DENSITY = (5 - math.sqrt(5)) / 3  # best known pentagon packing


def report_line(num: int, ok: bool, detail: str) -> str:
    line = f"ACCEPTANCE {num}: {'PASS' if ok else 'FAIL'} — {detail}"
    print(line)
    return line


@pytest.fixture(scope="session")
def paper_run(tmp_path_factory):
    """The full pipeline at the published configuration (N=5, d=11, ...)."""
    cfg = RunConfig(verify_alpha_count=17, verify_grid_n=96, verify_max_depth=4)
    outdir = tmp_path_factory.mktemp("paper")
    report = run_all(cfg, outdir)
    return cfg, outdir, report


def test_criterion_1_headline_reproduction(paper_run):
    cfg, outdir, report = paper_run
    count = len(constraint_sample(cfg.alpha_count, cfg.grid_n, cfg.enlargement))
    count_ok = 450 <= count <= 650
    bound_ok = 0.975 <= report.bound <= 0.985
    above_construction = report.bound > CONSTRUCTION_DENSITY
    ok = count_ok and bound_ok and above_construction and report.certified
    report_line(
        1,
        ok,
        f"bound={report.bound:.5f} (corridor [0.975, 0.985]: {bound_ok}), "
        f"sample={count} (corridor [450, 650]: {count_ok}), "
        f"above construction {CONSTRUCTION_DENSITY:.5f}: {above_construction}, "
        f"certified={report.certified} (sign_margin={report.sign_margin:.2e})",
    )
    assert count_ok, f"sample count {count} outside [450, 650]"
    assert bound_ok, f"bound {report.bound} outside [0.975, 0.985]"
    assert above_construction
    # Honest red, by measurement: the optimizer's f is positive (~+6e-4) in
    # slivers along the facet supporting lines between sample grid nodes, so
    # the sign verification rightly refuses to certify at enlargement 1.02;
    # pinning the slivers with facet-line samples provably pushes the
    # certified bound to >= 0.998, outside this criterion's corridor (see the
    # README).  The corridor clauses above all pass; this final clause records
    # that the certification requirement and the bound corridor are
    # incompatible at this model size.
    assert report.certified, (
        f"sign verification found a positive witness (sign_margin="
        f"{report.sign_margin:.3e} at {report.witness}); a fully certified "
        "bound at enlargement 1.02 is provably >= 0.998 with this ansatz"
    )


def test_criterion_2_special_function_identities():
    worst_hankel = 0.0
    for m in (0, 2, 4, 6, 8, 10):
        for k in range(12):
            for rho in (0.1, 0.5, 1.0, 2.0):
                got = hankel_integral_oracle(m, 0, k, rho)
                want = hankel_closed_form(m, 0, k, rho)
                worst_hankel = max(worst_hankel, abs(got - want))
    worst_kl = 0.0
    rng = np.random.default_rng(90)
    for n in range(21):
        for m in (0, 5, 17, 40):
            x = float(rng.uniform(0, 5))
            lhs = kummer_1f1(-n, m + 1, x)
            rhs = math.factorial(n) / pochhammer(m + 1, n) * laguerre(n, m, x)
            worst_kl = max(worst_kl, abs(lhs - rhs) / max(1.0, abs(rhs)))
    ok = worst_hankel <= 1e-9 and worst_kl <= 1e-12
    report_line(2, ok, f"hankel err={worst_hankel:.2e} (tol 1e-9), kummer-laguerre err={worst_kl:.2e} (tol 1e-12)")
    assert worst_hankel <= 1e-9
    assert worst_kl <= 1e-12


def test_criterion_3_inversion_formula_consistency():
    rng = np.random.default_rng(91)
    worst = 0.0
    for _ in range(5):
        t = random_positive_tensor(ModelParams(2, 3), rng)
        for _ in range(100):
            p = MotionPoint(rng.uniform(0, 2), rng.uniform(0, 2 * math.pi), rng.uniform(0, 2 * math.pi))
            worst = max(worst, abs(evaluate_f(t, p) - evaluate_f_quadrature(t, p)))
    ok = worst <= 1e-8
    report_line(3, ok, f"closed form vs inversion quadrature: max err={worst:.2e} (tol 1e-8)")
    assert worst <= 1e-8


def _random_structured_blocks(params, specs, rng):
    """Random PSD Q blocks, block-diagonal across the r-classes of each I_j.

    Keeping the cross-class sub-blocks zero makes the recovered tensor
    satisfy the structural zeros exactly while phi(a) stays a sum of squares.
    """
    blocks = {}
    for bs in specs:
        Q = np.zeros((bs.dim, bs.dim))
        if bs.family == "Q":
            groups = {}
            for pos, (l, r) in enumerate(bs.index):
                groups.setdefault(r, []).append(pos)
            for pos_list in groups.values():
                G = rng.standard_normal((len(pos_list), len(pos_list))) / len(pos_list)
                Q[np.ix_(pos_list, pos_list)] = G @ G.T
        blocks[bs.label] = Q
    return blocks


def test_criterion_4_positive_type_gram():
    rng = np.random.default_rng(92)
    params = ModelParams(5, 5)
    specs = block_specs(params)
    worst = 0.0
    for _ in range(50):
        blocks = _random_structured_blocks(params, specs, rng)
        sol = SdpSolution(blocks=blocks, y=np.zeros(1), objective=0.0, status="optimal", gap=0.0, iterations=0)
        t = recover_tensor(sol, params)
        motions = [
            from_polar(MotionPoint(rng.uniform(0, 1.5), rng.uniform(0, 2 * math.pi), rng.uniform(0, 2 * math.pi)))
            for _ in range(20)
        ]
        G = np.array(
            [[evaluate_f(t, to_polar(compose(invert(mj), mi))) for mj in motions] for mi in motions]
        )
        worst = min(worst, float(np.linalg.eigvalsh(0.5 * (G + G.T)).min()))
    ok = worst >= -1e-8
    report_line(4, ok, f"min Gram eigenvalue over 50 trials: {worst:.2e} (tol -1e-8)")
    assert worst >= -1e-8


def test_criterion_5_sos_sdp_correctness(paper_run):
    cfg, outdir, report = paper_run
    # (a) recovered tensor reproduces sigma coefficients (random PSD blocks)
    params = ModelParams(5, 5)
    rng = np.random.default_rng(93)
    blocks = {}
    for bs in block_specs(params):
        G = rng.standard_normal((bs.dim, bs.dim))
        blocks[bs.label] = G @ G.T
    sol = SdpSolution(blocks=blocks, y=np.zeros(1), objective=0.0, status="optimal", gap=0.0, iterations=0)
    t = recover_tensor(sol, params)
    bco = realize_basis(params.d)
    sigma_err = 0.0
    from pentapack.polynomials import conv

    for r, s in [(0, 0), (5, 5), (5, -5)]:
        sig = np.zeros(params.d + 1)
        for bs in block_specs(params):
            if bs.family != "Q" or bs.j != r % 10:
                continue
            pos = {idx: i for i, idx in enumerate(bs.index)}
            for l in range(params.d // 2 + 1):
                for lp in range(params.d // 2 + 1):
                    prod = conv(bco[l], bco[lp])
                    if bs.i == 1:
                        prod = [0.0] + prod
                    q = blocks[bs.label][pos[(l, r)], pos[(lp, s)]]
                    for k, c in enumerate(prod[: params.d + 1]):
                        sig[k] += c * q
        for k in range(params.d + 1):
            sigma_err = max(sigma_err, abs(t.get(r, s, k) - sig[k]) / max(1.0, abs(sig[k])))

    # (b) projection: a ~1e-9 perturbation of the refined solution projects
    # back to equality residual <= 1e-12
    problem = assemble_problem_A(cfg.params, constraint_sample(cfg.alpha_count, cfg.grid_n, cfg.enlargement))
    refined = import_solution(
        (outdir / "refine.sol").read_text().split("\n", 2)[2],
        __import__("pentapack.sos", fromlist=["assemble_feasibility_variant"]).assemble_feasibility_variant(
            problem, report.f_origin, margin=cfg.refine_margin
        ),
    )
    rng2 = np.random.default_rng(94)
    noisy_blocks = {}
    for lab, b in refined.blocks.items():
        noise = rng2.standard_normal(b.shape)
        if b.ndim == 2:
            noise = 0.5 * (noise + noise.T)
        noisy_blocks[lab] = b + 1e-9 * noise
    noisy = SdpSolution(blocks=noisy_blocks, y=refined.y, objective=refined.objective,
                        status="optimal", gap=0.0, iterations=0)
    pre = equality_residual_hp(noisy, problem)
    projected, _info = project_affine(noisy, problem)
    post = equality_residual_hp(projected, problem)

    # (c) cylinder nonpositivity on the pipeline's tensor
    tensor = CoefficientTensor.loads((outdir / "tensor.txt").read_text().split("\n", 2)[2])
    rng3 = np.random.default_rng(95)
    cyl = -math.inf
    for _ in range(10_000):
        p = MotionPoint(rng3.uniform(1.0, 3.0), rng3.uniform(0, 2 * math.pi), rng3.uniform(0, 2 * math.pi))
        cyl = max(cyl, evaluate_f(tensor, p))

    ok = sigma_err <= 1e-12 and pre > 1e-11 and post <= 1e-12 and cyl <= 1e-9
    report_line(
        5,
        ok,
        f"sigma err={sigma_err:.2e} (tol 1e-12); projection {pre:.1e} -> {post:.1e} "
        f"(tol 1e-12); cylinder max f={cyl:.2e} (tol 1e-9)",
    )
    assert sigma_err <= 1e-12
    assert pre > 1e-11  # the perturbation is visible before projection
    assert post <= 1e-12
    assert cyl <= 1e-9


def test_criterion_6_solver_units():
    rng = np.random.default_rng(96)
    # (a) lambda_max
    A = rng.standard_normal((3, 3))
    A = 0.5 * (A + A.T)
    n = 3
    blocks = [Block("S", n, "psd"), Block("t", 2, "diag")]
    eqs = []
    for i in range(n):
        for j in range(i, n):
            E = np.zeros((n, n))
            E[i, j] = E[j, i] = 0.5 if i != j else 1.0
            tvec = -np.array([1.0, -1.0]) if i == j else np.zeros(2)
            eqs.append(LinearTerm({"S": E, "t": tvec}, -A[i, j]))
    p = SdpProblem(blocks, {"t": np.array([1.0, -1.0])}, eqs, [])
    sol = solve(p)
    lam_err = abs(sol.objective - np.linalg.eigvalsh(A).max())

    # (b) embedded vs external on a 50-constraint medium instance
    cvxpy = pytest.importorskip("cvxpy")
    n, m = 6, 50
    mats = []
    for _ in range(m):
        B = rng.standard_normal((n, n))
        mats.append(0.5 * (B + B.T))
    eqs = [LinearTerm({"X": B}, float(np.trace(B))) for B in mats]
    C = rng.standard_normal((n, n))
    C = 0.5 * (C + C.T)
    med = SdpProblem([Block("X", n, "psd")], {"X": C}, eqs, [])
    ours = solve(med)
    Xv = cvxpy.Variable((n, n), PSD=True)
    cons = [cvxpy.sum(cvxpy.multiply(B, Xv)) == t.rhs for B, t in zip(mats, eqs)]
    prob = cvxpy.Problem(cvxpy.Minimize(cvxpy.sum(cvxpy.multiply(C, Xv))), cons)
    prob.solve(solver=cvxpy.CLARABEL)
    ext_err = abs(ours.objective - prob.value)

    # (c) export/import roundtrip byte-identical
    text = export_sdpa(med)
    roundtrip = export_sdpa(parse_sdpa(text)) == text

    ok = lam_err <= 1e-8 and ext_err <= 1e-6 and roundtrip
    report_line(
        6,
        ok,
        f"lambda_max err={lam_err:.2e} (tol 1e-8); embedded-vs-external err={ext_err:.2e} "
        f"(tol 1e-6); sdpa roundtrip byte-identical={roundtrip}",
    )
    assert lam_err <= 1e-8
    assert ext_err <= 1e-6
    assert roundtrip


def test_criterion_7_finite_theta_soundness():
    rng = np.random.default_rng(97)
    violations = 0
    for _ in range(200):
        n = int(rng.integers(2, 13))
        a = rng.random((n, n)) < float(rng.uniform(0.15, 0.7))
        a = np.triu(a, 1)
        g = FiniteGraph(a | a.T)
        if theta_prime_bound(g) < brute_force_alpha(g) - 1e-6:
            violations += 1
    tight_err = 0.0
    for g, alpha in [
        (complete_graph(5), 1),
        (empty_graph(6), 6),
        (FiniteGraph.from_edges(7, [(i, 3 + j) for i in range(3) for j in range(4)]), 4),
    ]:
        tight_err = max(tight_err, abs(theta_prime_bound(g) - alpha))
    pet = brute_force_alpha(petersen_graph())
    ok = violations == 0 and tight_err <= 1e-5 and pet == 4
    report_line(
        7,
        ok,
        f"soundness violations={violations}/200; perfect-family err={tight_err:.1e} "
        f"(tol 1e-5); petersen alpha={pet}",
    )
    assert violations == 0
    assert tight_err <= 1e-5
    assert pet == 4


def test_criterion_8_geometry():
    rng = np.random.default_rng(98)
    worst_norm = 0.0
    for alpha in rng.uniform(0, 2 * math.pi, 10_000):
        M = minkowski_difference(alpha, 1.0)
        worst_norm = max(worst_norm, float(np.linalg.norm(M.vertices, axis=1).max()))
    disagreements = 0
    cases = 0
    for alpha in rng.uniform(0, 2 * math.pi, 200):
        pts = rng.uniform(-1.3, 1.3, (500, 2))
        M = minkowski_difference(alpha, 1.0)
        for x in pts:
            cases += 1
            if copies_disjoint(x, alpha) != copies_disjoint_sat(x, alpha):
                d = max(nv @ x - c for nv, c in M.edges())
                if abs(d) > 1e-9:  # disagreement beyond boundary roundoff
                    disagreements += 1
    ok = worst_norm <= 1.0 + 1e-12 and disagreements == 0 and cases == 100_000
    report_line(
        8,
        ok,
        f"max Minkowski vertex norm={worst_norm:.12f} (<= 1); separating-axis "
        f"disagreements={disagreements}/{cases}",
    )
    assert worst_norm <= 1.0 + 1e-12
    assert disagreements == 0


def test_criterion_9_desk_scale_verification(paper_run):
    cfg, outdir, _report = paper_run
    tensor = CoefficientTensor.loads((outdir / "tensor.txt").read_text().split("\n", 2)[2])
    spec = VerifySpec(alpha_count=9, grid_n=320, max_depth=0)
    hi = verify_nonpositivity(tensor, cfg.enlargement, spec, 256)
    lo = verify_nonpositivity(tensor, cfg.enlargement, spec, 128)
    ok = (
        hi.stream_points >= 1e5
        and hi.stream_points == lo.stream_points
        and abs(hi.sign_margin - lo.sign_margin) <= 1e-10
    )
    report_line(
        9,
        ok,
        f"stream={hi.stream_points} points at 256 bits; sign_margin "
        f"{hi.sign_margin:.6e} vs 128-bit {lo.sign_margin:.6e} "
        f"(diff {abs(hi.sign_margin - lo.sign_margin):.1e}, tol 1e-10)",
    )
    assert hi.stream_points >= 1e5
    assert abs(hi.sign_margin - lo.sign_margin) <= 1e-10
