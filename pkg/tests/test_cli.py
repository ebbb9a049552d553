import json

import pytest

from pentapack.cli import main
from pentapack.pipeline import (
    RunConfig,
    run_all,
    step_bound,
    step_generate,
    step_project,
    step_refine,
    step_sample,
    step_solve,
    step_verify,
)

# Small configuration exercising every stage quickly.
TINY = dict(
    d=5,
    alpha_count=3,
    grid_n=16,
    verify_alpha_count=5,
    verify_grid_n=24,
    verify_max_depth=3,
    precision_bits=192,
)


@pytest.fixture(scope="module")
def tiny_run(tmp_path_factory):
    cfg = RunConfig(**TINY)
    outdir = tmp_path_factory.mktemp("all")
    report = run_all(cfg, outdir)
    return cfg, outdir, report


def test_pipeline_produces_report(tiny_run):
    cfg, outdir, report = tiny_run
    assert (outdir / "report.json").exists()
    data = json.loads((outdir / "report.json").read_text().split("\n", 2)[2])
    assert data["bound"] == pytest.approx(report.bound)
    assert 0 < report.bound < 1.2
    assert report.lambda_value == pytest.approx(1.0, abs=1e-6)


def test_stepwise_equals_all_byte_for_byte(tiny_run, tmp_path):
    cfg, outdir, _report = tiny_run
    step_sample(cfg, tmp_path)
    step_generate(cfg, tmp_path)
    step_solve(cfg, tmp_path)
    step_refine(cfg, tmp_path)
    step_project(cfg, tmp_path)
    step_verify(cfg, tmp_path)
    step_bound(cfg, tmp_path)
    for name in ("sample.txt", "problem.dat-s", "tensor.txt", "report.txt", "report.json"):
        assert (tmp_path / name).read_bytes() == (outdir / name).read_bytes(), name


def test_artifacts_reject_config_mismatch(tiny_run, tmp_path):
    cfg, outdir, _report = tiny_run
    other = RunConfig(**{**TINY, "grid_n": 18})
    step_sample(cfg, tmp_path)
    step_generate(cfg, tmp_path)
    step_solve(cfg, tmp_path)
    with pytest.raises(ValueError):
        step_refine(other, tmp_path)


def test_report_refuses_to_certify_unsoundly(tiny_run):
    _cfg, _outdir, report = tiny_run
    if report.certified:
        assert report.invariant_holds()
    else:
        # the invariant clause or the sign pass must genuinely fail
        assert (
            not report.invariant_holds()
            or report.sign_margin + report.lipschitz_bound * report.covering_radius > 0
            or report.min_block_eigenvalue <= report.safety_factor * report.max_constraint_residual
            or report.cert_margin > 0
        )


def test_cli_theta_c5(capsys):
    assert main(["theta", "--graph", "c5"]) == 0
    out = capsys.readouterr().out
    assert "alpha = 2" in out
    assert "2.236" in out


def test_cli_sample_plot_data(tmp_path, capsys):
    rc = main(["sample", "--out", str(tmp_path), "--plot-data"])
    assert rc == 0
    assert (tmp_path / "sample.txt").exists()
    header = (tmp_path / "minkowski_vertices.csv").read_text().splitlines()[2]
    assert header == "alpha,vx,vy"
    assert (tmp_path / "fig1_set.csv").read_text().splitlines()[2] == "x1,x2,alpha"
    assert "452 points" in capsys.readouterr().out


def test_cli_unknown_graph_errors(capsys):
    assert main(["theta", "--graph", "nonsense"]) == 1
    assert "error:" in capsys.readouterr().err


def test_cli_config_file(tmp_path, capsys):
    cfgfile = tmp_path / "cfg.json"
    cfgfile.write_text(RunConfig(**TINY).to_json())
    rc = main(["sample", "--config", str(cfgfile), "--out", str(tmp_path / "o")])
    assert rc == 0
    assert (tmp_path / "o" / "sample.txt").exists()


def test_scratch_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("PENTAPACK_SCRATCH", str(tmp_path / "scratch"))
    from pentapack.pipeline import default_outdir

    assert default_outdir() == tmp_path / "scratch"


def test_verify_threads_matches_single(tiny_run, tmp_path):
    """Chunked parallel verification merges to the same result."""
    import shutil
    from dataclasses import replace

    cfg, outdir, _report = tiny_run
    for name in ("sample.txt", "problem.dat-s", "problem.manifest.txt", "solve.sol",
                 "solve.meta.json", "refine.sol", "refine.meta.json", "projected.sol",
                 "projected.meta.json", "tensor.txt"):
        shutil.copy(outdir / name, tmp_path / name)
    single = json.loads((outdir / "verify.json").read_text().split("\n", 2)[2])
    # threads changes the config hash, so rewrite artifact headers to match
    cfg2 = replace(cfg, threads=2)
    for name in ("solve.meta.json", "tensor.txt"):
        body = (tmp_path / name).read_text().split("\n", 2)[2]
        kind = {"solve.meta.json": "solve-meta", "tensor.txt": "tensor"}[name]
        (tmp_path / name).write_text(
            f"# pentapack-artifact v1 {kind}\n# config {cfg2.config_hash()}\n" + body
        )
    v = step_verify(cfg2, tmp_path)
    assert v.stream_points == single["stream_points"]
    assert v.sign_margin == pytest.approx(single["sign_margin"], abs=1e-14)
    assert v.certified_sign == single["certified_sign"]


def test_external_file_solver_roundtrip(tiny_run, tmp_path):
    """The external-solver path: export, solve elsewhere, import the file."""
    cfg, outdir, _report = tiny_run
    # reuse the embedded solution file as the "external" solution
    sol_file = outdir / "solve.sol"
    body = sol_file.read_text().split("\n", 2)[2]
    ext = tmp_path / "external.sol"
    ext.write_text(body)
    step_sample(cfg, tmp_path)
    sol = step_solve(cfg, tmp_path, import_path=str(ext))
    meta = json.loads((outdir / "solve.meta.json").read_text().split("\n", 2)[2])
    assert sol.objective == pytest.approx(meta["objective"], abs=1e-9)
