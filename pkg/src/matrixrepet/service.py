"""HTTP facade over the library.

Every measurement is a stateless POST; matrices travel as row-major
cell lists, trees as base64 blobs.  Library errors surface as HTTP 400
with a machine-readable code: "format", "inconclusive" or
"invalid_attractor".  The CLI is a thin client of this app.
"""

from __future__ import annotations

import base64
import binascii
import time
from typing import Literal, Optional

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field, model_validator

from . import __version__
from .attractor import (
    Attractor,
    gamma_exact,
    gamma_greedy,
    reduce_string_to_matrix,
    verify_attractor,
)
from .blocktree import bt_stats, build_bt, build_gamma_bt, deserialize, serialize
from .delta import delta_profile_fast, delta_profile_naive
from .errors import (
    InconclusiveError,
    InvalidAttractorError,
    MatrixFormatError,
    TreeFormatError,
)
from .generators import FamilySpec, gen_nonmono
from .hashing import DEFAULT_SEED
from .matrix import MAX_ALPHABET, Matrix


class MatrixPayload(BaseModel):
    rows: int = Field(ge=1)
    cols: int = Field(ge=1)
    cells: list[int]

    @model_validator(mode="after")
    def _check(self):
        if len(self.cells) != self.rows * self.cols:
            raise ValueError(f"expected {self.rows * self.cols} cells, got {len(self.cells)}")
        return self

    def to_matrix(self) -> Matrix:
        arr = np.array(self.cells, dtype=np.int64).reshape(self.rows, self.cols)
        m = Matrix(arr)
        if m.sigma > MAX_ALPHABET:
            raise MatrixFormatError(f"alphabet has {m.sigma} symbols, limit {MAX_ALPHABET}")
        return m

    @classmethod
    def from_matrix(cls, m: Matrix) -> "MatrixPayload":
        return cls(rows=m.rows, cols=m.cols, cells=m.data.ravel().tolist())


class DeltaRequest(BaseModel):
    matrix: MatrixPayload
    method: Literal["fast", "naive"] = "fast"
    seed: Optional[int] = None
    threads: int = Field(default=1, ge=1)
    paranoid: bool = False


class GammaRequest(BaseModel):
    matrix: MatrixPayload
    mode: Literal["exact", "greedy"] = "greedy"
    budget: Optional[int] = Field(default=None, ge=1)
    allow_large: bool = False
    seed: Optional[int] = None


class VerifyRequest(BaseModel):
    matrix: MatrixPayload
    positions: list[tuple[int, int]]
    seed: Optional[int] = None


class ReduceRequest(BaseModel):
    s: str = Field(min_length=1)


class GenRequest(BaseModel):
    family: str
    n: int = Field(ge=1)
    sigma: int = Field(default=2, ge=1)
    seed: int = 0
    perm: Optional[list[int]] = None


class BuildRequest(BaseModel):
    matrix: MatrixPayload
    k: int = Field(default=2, ge=2)
    leaf_side: Optional[int] = Field(default=None, ge=1)
    shallow: bool = False
    attractor: Optional[list[tuple[int, int]]] = None
    seed: Optional[int] = None


class TreeRequest(BaseModel):
    tree: str  # base64


class AccessRequest(TreeRequest):
    i: int = Field(ge=1)
    j: int = Field(ge=1)


class BenchRequest(BaseModel):
    family: str
    sizes: list[int]
    sigma: int = Field(default=2, ge=1)
    seed: int = 0
    k: int = Field(default=2, ge=2)
    leaf_side: Optional[int] = Field(default=None, ge=1)


class RunReport(BaseModel):
    command: str
    input: str
    version: str
    seed: int
    timing_ms: Optional[float] = None
    output: dict


app = FastAPI(title="matrixrepet", version=__version__)


@app.exception_handler(MatrixFormatError)
@app.exception_handler(TreeFormatError)
@app.exception_handler(ValueError)
@app.exception_handler(IndexError)
async def _format_error(request: Request, exc: Exception):
    if isinstance(exc, InvalidAttractorError):
        detail = {"code": "invalid_attractor", "message": str(exc)}
        if exc.witness is not None:
            k, anchor = exc.witness
            detail["witness"] = {"k": k, "anchor": list(anchor)}
        return JSONResponse(status_code=400, content={"detail": detail})
    return JSONResponse(
        status_code=400, content={"detail": {"code": "format", "message": str(exc)}}
    )


@app.exception_handler(InconclusiveError)
async def _inconclusive_error(request: Request, exc: InconclusiveError):
    return JSONResponse(
        status_code=400, content={"detail": {"code": "inconclusive", "message": str(exc)}}
    )


def _seed_of(req_seed: Optional[int]) -> int:
    return DEFAULT_SEED if req_seed is None else req_seed


def _describe(m: Matrix) -> str:
    return f"matrix {m.rows}x{m.cols} sigma={m.sigma}"


def _report(command: str, desc: str, seed: int, t0: float, output: dict) -> RunReport:
    return RunReport(
        command=command,
        input=desc,
        version=__version__,
        seed=seed,
        timing_ms=round((time.perf_counter() - t0) * 1000.0, 3),
        output=output,
    )


def _decode_tree(b64: str):
    try:
        blob = base64.b64decode(b64.encode("ascii"), validate=True)
    except (binascii.Error, UnicodeEncodeError) as exc:
        raise TreeFormatError(f"tree is not valid base64: {exc}") from exc
    return deserialize(blob)


@app.get("/health")
async def health():
    return {"status": "ok", "version": __version__}


@app.post("/delta", response_model=RunReport)
async def delta_endpoint(req: DeltaRequest):
    t0 = time.perf_counter()
    m = req.matrix.to_matrix()
    seed = _seed_of(req.seed)
    if req.method == "fast":
        profile = delta_profile_fast(m, seed=seed, paranoid=req.paranoid)
    else:
        profile = delta_profile_naive(m, seed=seed, threads=req.threads)
    out = {"method": req.method, "profile": profile.as_dict()}
    return _report("delta", _describe(m), seed, t0, out)


@app.post("/gamma", response_model=RunReport)
async def gamma_endpoint(req: GammaRequest):
    t0 = time.perf_counter()
    m = req.matrix.to_matrix()
    seed = _seed_of(req.seed)
    if req.mode == "exact":
        kwargs = {"seed": seed, "allow_large": req.allow_large}
        if req.budget is not None:
            kwargs["budget"] = req.budget
        attractor = gamma_exact(m, **kwargs)
    else:
        attractor = gamma_greedy(m, seed=seed)
    out = {
        "mode": req.mode,
        "size": attractor.size,
        "positions": [list(p) for p in attractor.sorted()],
    }
    return _report("gamma", _describe(m), seed, t0, out)


@app.post("/verify", response_model=RunReport)
async def verify_endpoint(req: VerifyRequest):
    t0 = time.perf_counter()
    m = req.matrix.to_matrix()
    seed = _seed_of(req.seed)
    ok, witness = verify_attractor(m, Attractor.of(req.positions), seed=seed)
    out = {"valid": ok, "size": len(set(req.positions))}
    if witness is not None:
        out["witness"] = {"k": witness[0], "anchor": list(witness[1])}
    return _report("verify", _describe(m), seed, t0, out)


@app.post("/reduce", response_model=RunReport)
async def reduce_endpoint(req: ReduceRequest):
    t0 = time.perf_counter()
    m = reduce_string_to_matrix(req.s)
    out = {"matrix": MatrixPayload.from_matrix(m).model_dump()}
    return _report("reduce", f"string len={len(req.s)}", DEFAULT_SEED, t0, out)


@app.post("/gen", response_model=RunReport)
async def gen_endpoint(req: GenRequest):
    t0 = time.perf_counter()
    if req.family == "nonmono":
        w, wb = gen_nonmono(req.n)
        out = {"w": w, "wb": wb}
        return _report("gen", f"family=nonmono n={req.n}", req.seed, t0, out)
    spec = FamilySpec(
        family=req.family,
        n=req.n,
        sigma=req.sigma,
        seed=req.seed,
        perm=tuple(req.perm) if req.perm else (),
    )
    m = spec.make()
    out = {"matrix": MatrixPayload.from_matrix(m).model_dump()}
    return _report("gen", f"family={req.family} n={req.n}", req.seed, t0, out)


@app.post("/build", response_model=RunReport)
async def build_endpoint(req: BuildRequest):
    t0 = time.perf_counter()
    m = req.matrix.to_matrix()
    seed = _seed_of(req.seed)
    if req.attractor is not None and req.shallow:
        raise MatrixFormatError("shallow and attractor builds are mutually exclusive")
    if req.attractor is not None:
        tree = build_gamma_bt(
            m, Attractor.of(req.attractor), k=req.k, leaf_side=req.leaf_side, seed=seed
        )
    else:
        tree = build_bt(m, k=req.k, leaf_side=req.leaf_side, shallow=req.shallow, seed=seed)
    blob = serialize(tree)
    out = {
        "tree": base64.b64encode(blob).decode("ascii"),
        "bytes": len(blob),
        "stats": bt_stats(tree).as_dict(),
    }
    return _report("build", _describe(m), seed, t0, out)


@app.post("/access", response_model=RunReport)
async def access_endpoint(req: AccessRequest):
    t0 = time.perf_counter()
    tree = _decode_tree(req.tree)
    symbol, visits = tree.access_traced(req.i, req.j)
    out = {"i": req.i, "j": req.j, "symbol": symbol, "visits_per_level": visits}
    return _report("access", f"tree n={tree.n}", tree.seed, t0, out)


@app.post("/stats", response_model=RunReport)
async def stats_endpoint(req: TreeRequest):
    t0 = time.perf_counter()
    tree = _decode_tree(req.tree)
    out = {"stats": bt_stats(tree).as_dict()}
    return _report("stats", f"tree n={tree.n}", tree.seed, t0, out)


@app.post("/bench", response_model=RunReport)
async def bench_endpoint(req: BenchRequest):
    t0 = time.perf_counter()
    rows = []
    for n in req.sizes:
        spec = FamilySpec(family=req.family, n=n, sigma=req.sigma, seed=req.seed)
        m = spec.make()
        profile = delta_profile_naive(m)
        attractor = gamma_greedy(m)
        tree = build_bt(m, k=req.k, leaf_side=req.leaf_side)
        stats = bt_stats(tree)
        rows.append(
            {
                "n": n,
                "delta2d_num": profile.delta.numerator,
                "delta2d_den": profile.delta.denominator,
                "delta2d": float(profile.delta),
                "gamma_greedy": attractor.size,
                "max_marked_per_level": max(l.marked for l in stats.levels),
                "total_nodes": stats.total_nodes,
            }
        )
    out = {"family": req.family, "rows": rows}
    return _report("bench", f"family={req.family} sizes={req.sizes}", req.seed, t0, out)
