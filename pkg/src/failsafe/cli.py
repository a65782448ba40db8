"""Command-line surface.

Modes
-----
truncated   answer failure queries clipped at the core radius (``>=R`` token)
full        exact answers via core + fallback (``INF`` for disconnected)
spt         emit the consistent shortest-path forests
verify      cross-check every query against the brute-force oracle
bench       preprocessing/query timings, fallback counter, backend comparison

Graph files: header ``n m M`` then ``u v w`` lines, 1-indexed, ``#``
comments.  Query files: ``u v E a b`` or ``u v V f`` per line.  Identical
(config, inputs, seed) produce byte-identical output; bench timing lines
(prefixed ``time_``) are the one documented exception.

Exit codes: 0 ok, 1 usage, 2 parse/validation, 3 verification mismatch.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import _backend
from .algebraic_dso import preprocess
from .consistent_spt import DEFAULT_HITTING_C, build_spt
from .errors import (
    FailsafeError,
    GraphParseError,
    GraphValidationError,
    InvalidQueryError,
)
from .full_dso import DEFAULT_ALPHA, build_full, radius_for
from .graph import INF, EdgeFailure, Failure, VertexFailure, parse_graph, replacement_distance
from .ring import DEFAULT_MODULUS, check_modulus

SEED_ENV_VAR = "FAILSAFE_SEED"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_MISMATCH = 3


@dataclass
class RunConfig:
    mode: str
    radius: int | None = None
    alpha: float | None = None
    seed: int | None = None
    prime: int | None = None
    block_size: int | None = None
    hitting_c: float = DEFAULT_HITTING_C
    fmt: str = "tsv"
    out: str | None = None


@dataclass(frozen=True)
class QueryRecord:
    u: int
    v: int
    failure: Failure

    @property
    def token(self) -> str:
        return str(self.failure)


def parse_queries(source) -> list[QueryRecord]:
    """Parse ``u v E a b`` / ``u v V f`` lines (1-indexed, '#' comments)."""
    if isinstance(source, str):
        source = io.StringIO(source)
    records = []
    for lineno, raw in enumerate(source, start=1):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        parts = text.split()
        try:
            if len(parts) == 5 and parts[2].upper() == "E":
                u, v, a, b = int(parts[0]), int(parts[1]), int(parts[3]), int(parts[4])
                records.append(QueryRecord(u - 1, v - 1, EdgeFailure(a - 1, b - 1)))
            elif len(parts) == 4 and parts[2].upper() == "V":
                u, v, f = int(parts[0]), int(parts[1]), int(parts[3])
                records.append(QueryRecord(u - 1, v - 1, VertexFailure(f - 1)))
            else:
                raise ValueError
        except ValueError:
            raise GraphParseError(
                "query must be 'u v E a b' or 'u v V f'", line=lineno
            ) from None
    return records


def _resolve_seed(config: RunConfig) -> int:
    if config.seed is not None:
        return config.seed
    env = os.environ.get(SEED_ENV_VAR)
    return int(env) if env else 0


def _core_radius(config: RunConfig, g) -> int:
    if config.radius is not None:
        return config.radius
    alpha = config.alpha if config.alpha is not None else DEFAULT_ALPHA
    return radius_for(g.n, g.M, alpha)


def _answer_token(answer: int, radius: int | None) -> str:
    if answer >= INF:
        return "INF"
    if radius is not None and answer == radius:
        return f">={radius}"
    return str(answer)


def _emit_answers(results, radius, config, out):
    """results: list of (QueryRecord, answer int)."""
    if config.fmt == "json":
        payload = []
        for q, ans in results:
            token = _answer_token(ans, radius)
            payload.append(
                {
                    "u": q.u + 1,
                    "v": q.v + 1,
                    "failure": q.token,
                    "answer": ans if token == str(ans) else token,
                    "truncated": radius is not None and ans == radius,
                }
            )
        out.write(json.dumps(payload, indent=2) + "\n")
    else:
        for q, ans in results:
            out.write(f"{q.u + 1} {q.v + 1} {q.token} {_answer_token(ans, radius)}\n")


def _run_queries(answer_fn, queries, err):
    results = []
    skipped = 0
    for q in queries:
        try:
            results.append((q, answer_fn(q)))
        except InvalidQueryError as exc:
            skipped += 1
            err.write(f"warning: skipping invalid query {q.u + 1} {q.v + 1} {q.token}: {exc}\n")
    return results, skipped


def _mode_truncated(config, g, queries, out, err):
    radius = _core_radius(config, g)
    modulus = config.prime if config.prime is not None else DEFAULT_MODULUS
    dso = preprocess(g, radius, seed=_resolve_seed(config), modulus=modulus)
    results, _ = _run_queries(lambda q: dso.query(q.u, q.v, q.failure), queries, err)
    _emit_answers(results, radius, config, out)
    return EXIT_OK


def _mode_full(config, g, queries, out, err):
    modulus = config.prime if config.prime is not None else DEFAULT_MODULUS
    fd = build_full(
        g,
        alpha=config.alpha if config.alpha is not None else DEFAULT_ALPHA,
        seed=_resolve_seed(config),
        radius=config.radius,
        modulus=modulus,
        hitting_c=config.hitting_c,
        block_size=config.block_size,
    )
    results, _ = _run_queries(lambda q: fd.query(q.u, q.v, q.failure), queries, err)
    _emit_answers(results, None, config, out)
    return EXIT_OK


def _forest_lines(forests):
    n = forests.dist.shape[0]
    tin, tout = [], []
    for root in range(n):
        for u in range(n):
            p = int(forests.parent_in[root, u])
            if p >= 0:
                tin.append(f"{root + 1} {u + 1} {p + 1}")
    for root in range(n):
        for v in range(n):
            p = int(forests.parent_out[root, v])
            if p >= 0:
                tout.append(f"{root + 1} {v + 1} {p + 1}")
    return tin, tout


def _mode_spt(config, g, out, err):
    forests = build_spt(
        g,
        seed=_resolve_seed(config),
        hitting_c=config.hitting_c,
        block_size=config.block_size,
    )
    tin, tout = _forest_lines(forests)
    if config.out:
        with open(config.out + ".tin.tsv", "w") as fh:
            fh.write("\n".join(tin) + "\n")
        with open(config.out + ".tout.tsv", "w") as fh:
            fh.write("\n".join(tout) + "\n")
        out.write(f"wrote {len(tin)} incoming-tree rows to {config.out}.tin.tsv\n")
        out.write(f"wrote {len(tout)} outgoing-tree rows to {config.out}.tout.tsv\n")
    else:
        out.write("# T_IN root vertex parent\n")
        for line in tin:
            out.write(line + "\n")
        out.write("# T_OUT root vertex parent\n")
        for line in tout:
            out.write(line + "\n")
    return EXIT_OK


def _mode_verify(config, g, queries, out, err):
    seed = _resolve_seed(config)
    modulus = config.prime if config.prime is not None else DEFAULT_MODULUS
    if config.radius is not None:
        radius = config.radius
        dso = preprocess(g, radius, seed=seed, modulus=modulus)
        answer_fn = lambda q: dso.query(q.u, q.v, q.failure)
        expect_fn = lambda q: min(replacement_distance(g, q.u, q.v, q.failure), radius)
        token_radius = radius
    else:
        fd = build_full(
            g,
            alpha=config.alpha if config.alpha is not None else DEFAULT_ALPHA,
            seed=seed,
            modulus=modulus,
            hitting_c=config.hitting_c,
            block_size=config.block_size,
        )
        answer_fn = lambda q: fd.query(q.u, q.v, q.failure)
        expect_fn = lambda q: replacement_distance(g, q.u, q.v, q.failure)
        token_radius = None

    mismatches = 0
    checked = 0
    for q in queries:
        try:
            got = answer_fn(q)
            expected = expect_fn(q)
        except InvalidQueryError as exc:
            err.write(f"warning: skipping invalid query {q.u + 1} {q.v + 1} {q.token}: {exc}\n")
            continue
        checked += 1
        status = "ok" if got == expected else "MISMATCH"
        if got != expected:
            mismatches += 1
        out.write(
            f"{q.u + 1} {q.v + 1} {q.token} "
            f"{_answer_token(got, token_radius)} {_answer_token(expected, token_radius)} {status}\n"
        )
    out.write(f"verified {checked} queries, {mismatches} mismatches\n")
    return EXIT_MISMATCH if mismatches else EXIT_OK


def _bench_kernels(out):
    """Time the hot kernels under each backend on synthetic data."""
    rng = np.random.default_rng(0)
    p = np.uint64(DEFAULT_MODULUS)
    a = rng.integers(0, DEFAULT_MODULUS, size=256, dtype=np.uint64)
    b = rng.integers(0, DEFAULT_MODULUS, size=256, dtype=np.uint64)
    ma = rng.integers(0, DEFAULT_MODULUS, size=(16, 16, 64), dtype=np.uint64)
    mb = rng.integers(0, DEFAULT_MODULUS, size=(16, 16, 64), dtype=np.uint64)
    da = rng.integers(1, 100, size=(128, 128)).astype(np.int64)
    current = _backend.active().NAME
    try:
        for name in ("numba", "numpy"):
            try:
                kern = _backend.use(name)
            except ImportError:
                out.write(f"backend_{name}_unavailable\n")
                continue
            kern.conv_truncated(a, b, p)  # warm up JIT before timing
            t0 = time.perf_counter()
            for _ in range(20):
                kern.conv_truncated(a, b, p)
            t1 = time.perf_counter()
            kern.matmul_schoolbook(ma, mb, p)
            t2 = time.perf_counter()
            kern.matmul_schoolbook(ma, mb, p)
            t3 = time.perf_counter()
            kern.min_plus(da, da, INF)
            t4 = time.perf_counter()
            kern.min_plus(da, da, INF)
            t5 = time.perf_counter()
            out.write(f"time_{name}_conv_r256_x20={t1 - t0:.6f}s\n")
            out.write(f"time_{name}_matmul_16x16_r64={t3 - t2:.6f}s\n")
            out.write(f"time_{name}_minplus_128={t5 - t4:.6f}s\n")
    finally:
        _backend.use(current)


def _mode_bench(config, g, queries, out, err):
    out.write(f"bench n={g.n} m={g.m} M={g.M} backend={_backend.active().NAME}\n")
    t0 = time.perf_counter()
    modulus = config.prime if config.prime is not None else DEFAULT_MODULUS
    fd = build_full(
        g,
        alpha=config.alpha if config.alpha is not None else DEFAULT_ALPHA,
        seed=_resolve_seed(config),
        radius=config.radius,
        modulus=modulus,
        hitting_c=config.hitting_c,
        block_size=config.block_size,
    )
    t1 = time.perf_counter()
    out.write(f"core_radius={fd.radius}\n")
    out.write(f"time_preprocess={t1 - t0:.6f}s\n")
    answered = 0
    t2 = time.perf_counter()
    for q in queries:
        try:
            fd.query(q.u, q.v, q.failure)
            answered += 1
        except InvalidQueryError:
            pass
    t3 = time.perf_counter()
    out.write(f"queries_answered={answered}\n")
    out.write(f"time_queries={t3 - t2:.6f}s\n")
    if answered:
        out.write(f"time_per_query={(t3 - t2) / answered:.9f}s\n")
    out.write(f"fallback_count={fd.fallback_count}\n")
    _bench_kernels(out)
    return EXIT_OK


def run(config: RunConfig, graph_path: str, query_path: str | None = None,
        stdout=None, stderr=None) -> int:
    """Execute one CLI invocation; returns the process exit code."""
    out = stdout if stdout is not None else sys.stdout
    err = stderr if stderr is not None else sys.stderr

    if config.mode in ("truncated", "full", "verify", "bench") and query_path is None:
        err.write(f"error: mode {config.mode} requires a query file\n")
        return EXIT_USAGE
    if config.radius is not None and config.alpha is not None:
        err.write("error: give at most one of --radius / --alpha\n")
        return EXIT_USAGE
    if config.prime is not None:
        try:
            check_modulus(config.prime)
        except ValueError as exc:
            err.write(f"error: {exc}\n")
            return EXIT_USAGE

    try:
        with open(graph_path) as fh:
            g = parse_graph(fh)
    except OSError as exc:
        err.write(f"error: cannot read graph file: {exc}\n")
        return EXIT_PARSE
    except (GraphParseError, GraphValidationError) as exc:
        err.write(f"error: {graph_path}: {exc}\n")
        return EXIT_PARSE

    queries = None
    if query_path is not None:
        try:
            with open(query_path) as fh:
                queries = parse_queries(fh)
        except OSError as exc:
            err.write(f"error: cannot read query file: {exc}\n")
            return EXIT_PARSE
        except GraphParseError as exc:
            err.write(f"error: {query_path}: {exc}\n")
            return EXIT_PARSE

    buffer = io.StringIO()
    try:
        if config.mode == "truncated":
            code = _mode_truncated(config, g, queries, buffer, err)
        elif config.mode == "full":
            code = _mode_full(config, g, queries, buffer, err)
        elif config.mode == "spt":
            code = _mode_spt(config, g, buffer, err)
        elif config.mode == "verify":
            code = _mode_verify(config, g, queries, buffer, err)
        elif config.mode == "bench":
            code = _mode_bench(config, g, queries, buffer, err)
        else:
            err.write(f"error: unknown mode {config.mode}\n")
            return EXIT_USAGE
    except ValueError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    except FailsafeError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_PARSE

    text = buffer.getvalue()
    if config.out and config.mode != "spt":
        with open(config.out, "w") as fh:
            fh.write(text)
    else:
        out.write(text)
    return code


class _Parser(argparse.ArgumentParser):
    # Usage problems exit 1 (argparse defaults to 2, which we reserve for
    # input parse errors).
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="failsafe",
        description="Fault-tolerant distance oracle toolkit.",
    )
    parser.add_argument("--mode", required=True,
                        choices=["truncated", "full", "spt", "verify", "bench"])
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--radius", type=int, help="truncation radius for the core")
    group.add_argument("--alpha", type=float,
                       help=f"radius exponent, r = ceil(M * n^alpha) (default {DEFAULT_ALPHA})")
    parser.add_argument("--seed", type=int, default=None,
                        help=f"PRNG seed (falls back to ${SEED_ENV_VAR}, then 0)")
    parser.add_argument("--prime", type=int, default=None, help="field modulus override")
    parser.add_argument("--block-size", type=int, default=None,
                        help="witness block size (default ceil(n^0.5286))")
    parser.add_argument("--hitting-c", type=float, default=DEFAULT_HITTING_C,
                        help="hitting-set constant")
    parser.add_argument("--format", dest="fmt", choices=["tsv", "json"], default="tsv")
    parser.add_argument("--out", default=None, help="write output to this path")
    parser.add_argument("graph", help="graph file")
    parser.add_argument("queries", nargs="?", default=None, help="query file")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    config = RunConfig(
        mode=args.mode,
        radius=args.radius,
        alpha=args.alpha,
        seed=args.seed,
        prime=args.prime,
        block_size=args.block_size,
        hitting_c=args.hitting_c,
        fmt=args.fmt,
        out=args.out,
    )
    return run(config, args.graph, args.queries)


if __name__ == "__main__":
    sys.exit(main())
