"""SDPA sparse-format export/import and the solution text format.

The exported .dat-s file encodes the problem in the usual convention, where
a reader solves

    max tr(F0 Y)  s.t.  tr(Fi Y) = c_i,  Y >= 0 block-diagonal,

so the writer emits F0 = -C (our problems minimize), Fi = A_i and c = b with
inequalities already rewritten through the slack block.  An external solver's
optimal Y is then exactly our primal X, and its objective is the negative of
ours.  Entry lines are "matno blockno i j value" with 1-based indices,
i <= j, and diagonal blocks flagged by a negative dimension.  Ordering and
float repr are canonical, so export -> parse -> export is byte-identical.

Solution files follow the classic layout: one line with the dual vector y,
then entries "1 blk i j v" for the dual slack matrix and "2 blk i j v" for
the primal matrix.
"""

from __future__ import annotations

import numpy as np

from .sdp import Block, LinearTerm, SdpProblem, SdpSolution, standard_form


class MalformedFileError(ValueError):
    pass


class DimensionMismatchError(ValueError):
    pass


def export_sdpa(p: SdpProblem) -> str:
    """Serialize a problem (inequalities via slacks) to SDPA sparse format."""
    p.validate()
    blocks, objective, eqs = standard_form(p)
    lines = ['"pentapack sdpa export v1']
    lines.append(f"{len(eqs)}")
    lines.append(f"{len(blocks)}")
    lines.append(" ".join(str(b.dim if b.kind == "psd" else -b.dim) for b in blocks))
    lines.append(" ".join(repr(float(t.rhs)) for t in eqs))

    def emit(matno, coeffs, negate=False):
        out = []
        for bno, blk in enumerate(blocks, start=1):
            if blk.label not in coeffs:
                continue
            mat = np.asarray(coeffs[blk.label], dtype=float)
            if blk.kind == "psd":
                idx = [(i, j) for i in range(blk.dim) for j in range(i, blk.dim)]
            else:
                idx = [(i, i) for i in range(blk.dim)]
            for i, j in idx:
                v = float(mat[i, j]) if blk.kind == "psd" else float(mat[i])
                if v != 0.0:
                    if negate:
                        v = -v
                    out.append(f"{matno} {bno} {i + 1} {j + 1} {v!r}")
        return out

    lines += emit(0, objective, negate=True)
    for idx, t in enumerate(eqs, start=1):
        lines += emit(idx, t.coeffs)
    return "\n".join(lines) + "\n"


def parse_sdpa(text: str) -> SdpProblem:
    """Parse SDPA sparse format back into a problem (equalities only)."""
    rows = []
    for ln in text.splitlines():
        ln = ln.strip()
        if not ln or ln[0] in '"*':
            continue
        rows.append(ln)
    if len(rows) < 4:
        raise MalformedFileError("truncated SDPA file")
    try:
        m = int(rows[0])
        nblocks = int(rows[1])
        dims = [int(v) for v in rows[2].replace(",", " ").split()]
        rhs = [float(v) for v in rows[3].replace(",", " ").split()]
    except ValueError as e:
        raise MalformedFileError(f"bad SDPA header: {e}") from e
    if len(dims) != nblocks:
        raise MalformedFileError("block count does not match dimension list")
    if len(rhs) != m:
        raise MalformedFileError("right-hand side length does not match m")
    blocks = [
        Block(f"B{i + 1}" if d > 0 else f"D{i + 1}", abs(d), "psd" if d > 0 else "diag")
        for i, d in enumerate(dims)
    ]
    mats: list[dict[str, np.ndarray]] = [dict() for _ in range(m + 1)]
    for ln in rows[4:]:
        parts = ln.split()
        if len(parts) != 5:
            raise MalformedFileError(f"bad entry line: {ln!r}")
        matno, bno, i, j, val = int(parts[0]), int(parts[1]), int(parts[2]), int(parts[3]), float(parts[4])
        if not (0 <= matno <= m and 1 <= bno <= nblocks):
            raise MalformedFileError(f"entry indices out of range: {ln!r}")
        blk = blocks[bno - 1]
        if not (1 <= i <= j <= blk.dim):
            raise MalformedFileError(f"matrix indices out of range: {ln!r}")
        store = mats[matno]
        if blk.label not in store:
            store[blk.label] = (
                np.zeros((blk.dim, blk.dim)) if blk.kind == "psd" else np.zeros(blk.dim)
            )
        if blk.kind == "psd":
            store[blk.label][i - 1, j - 1] = val
            store[blk.label][j - 1, i - 1] = val
        else:
            if i != j:
                raise MalformedFileError("off-diagonal entry in diagonal block")
            store[blk.label][i - 1] = val
    objective = {lab: -mat for lab, mat in mats[0].items()}
    eqs = [LinearTerm(mats[k], rhs[k - 1], f"row[{k}]") for k in range(1, m + 1)]
    return SdpProblem(blocks, objective, eqs, [])


def export_solution(sol: SdpSolution, p: SdpProblem) -> str:
    """Serialize a solution in the dual-vector-then-entries layout."""
    blocks, _, eqs = standard_form(p)
    if len(sol.y) != len(eqs):
        raise DimensionMismatchError("dual vector length does not match problem")
    lines = ['"pentapack solution v1', " ".join(repr(float(v)) for v in sol.y)]

    def emit(matno, source):
        out = []
        for bno, blk in enumerate(blocks, start=1):
            if source is None or blk.label not in source:
                continue
            mat = np.asarray(source[blk.label])
            if blk.kind == "psd":
                for i in range(blk.dim):
                    for j in range(i, blk.dim):
                        v = float(mat[i, j])
                        if v != 0.0:
                            out.append(f"{matno} {bno} {i + 1} {j + 1} {v!r}")
            else:
                for i in range(blk.dim):
                    v = float(mat[i])
                    if v != 0.0:
                        out.append(f"{matno} {bno} {i + 1} {i + 1} {v!r}")
        return out

    lines += emit(1, sol.dual_blocks)
    lines += emit(2, sol.blocks)
    lines.append('"end')
    return "\n".join(lines) + "\n"


def import_solution(text: str, p: SdpProblem) -> SdpSolution:
    """Parse a solution file and map blocks back onto the problem's labels.

    Matrices are symmetrized as (M + M^T)/2; the objective is recomputed
    from the imported primal blocks.
    """
    blocks, objective, eqs = standard_form(p)
    raw = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not raw or raw[0] != '"pentapack solution v1' or raw[-1] != '"end':
        raise MalformedFileError("missing solution header or terminator (truncated file?)")
    rows = [ln for ln in raw if ln[0] not in '"*']
    if not rows:
        raise MalformedFileError("empty solution file")
    try:
        y = np.array([float(v) for v in rows[0].split()])
    except ValueError as e:
        raise MalformedFileError(f"bad dual vector line: {e}") from e
    if len(y) != len(eqs):
        raise DimensionMismatchError(
            f"dual vector has {len(y)} entries, problem has {len(eqs)} constraints"
        )
    prim: dict[str, np.ndarray] = {}
    dual: dict[str, np.ndarray] = {}
    for blk in blocks:
        zero = np.zeros((blk.dim, blk.dim)) if blk.kind == "psd" else np.zeros(blk.dim)
        prim[blk.label] = zero.copy()
        dual[blk.label] = zero.copy()
    for ln in rows[1:]:
        parts = ln.split()
        if len(parts) != 5:
            raise MalformedFileError(f"bad entry line: {ln!r}")
        matno, bno, i, j, val = int(parts[0]), int(parts[1]), int(parts[2]), int(parts[3]), float(parts[4])
        if matno not in (1, 2):
            raise MalformedFileError(f"unknown matrix number {matno}")
        if not (1 <= bno <= len(blocks)):
            raise DimensionMismatchError(f"block number out of range: {ln!r}")
        blk = blocks[bno - 1]
        if not (1 <= i <= blk.dim and 1 <= j <= blk.dim):
            raise DimensionMismatchError(f"matrix indices out of range: {ln!r}")
        target = prim if matno == 2 else dual
        if blk.kind == "psd":
            target[blk.label][i - 1, j - 1] = val
            target[blk.label][j - 1, i - 1] = val
        else:
            if i != j:
                raise MalformedFileError("off-diagonal entry in diagonal block")
            target[blk.label][i - 1] = val
    # Guard against files with inconsistent (i, j)/(j, i) duplicates.
    for blk in blocks:
        if blk.kind == "psd":
            prim[blk.label] = 0.5 * (prim[blk.label] + prim[blk.label].T)
            dual[blk.label] = 0.5 * (dual[blk.label] + dual[blk.label].T)
    pobj = 0.0
    for lab, c in objective.items():
        pobj += float(np.sum(np.asarray(c) * prim[lab]))
    return SdpSolution(
        blocks=prim, y=y, objective=pobj, status="imported", gap=float("nan"), iterations=0, dual_blocks=dual
    )
