"""Regenerate the bundled NETLIB fixtures.

The fixtures are written from the NETLIB conversions shipped in the scipy
source distribution (``benchmarks/benchmarks/linprog_benchmark_files``),
which store each problem as ``c, A_ub, b_ub, A_eq, b_eq, bounds``. Each is
emitted as fixed-format MPS with ``E`` rows for the equalities and ``L``
rows for the inequalities, then gzipped into ``src/dualpath/data/netlib``.

Usage::

    python tools/make_netlib_fixtures.py /path/to/linprog_benchmark_files
"""

import argparse
import gzip
import sys
import warnings
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "dualpath" / "data"
NNZ_LIMIT = 10_000


def field_line(*fields):
    starts = (1, 4, 14, 24, 39, 49)
    line = ""
    for text, start in zip(fields, starts):
        line = line.ljust(start) + text
    return line.rstrip()


def num(v):
    # full precision always wins over column alignment
    s = repr(float(v))
    if s.endswith(".0"):
        s = s[:-1]
    return s


def to_mps(name, d):
    c = d["c"]
    n = len(c)
    A_ub, b_ub, A_eq, b_eq = d["A_ub"], d["b_ub"], d["A_eq"], d["b_eq"]
    rows = [("E", f"E{i}") for i in range(len(b_eq))] + [("L", f"L{i}") for i in range(len(b_ub))]
    A = np.vstack([A_eq.reshape(-1, n), A_ub.reshape(-1, n)])
    b = np.concatenate([b_eq, b_ub])
    out = [f"NAME          {name}", "ROWS", field_line(" N", "COST")]
    out += [field_line(" " + t, r) for t, r in rows]
    out.append("COLUMNS")
    for j in range(n):
        cname = f"C{j}"
        if c[j] != 0:
            out.append(field_line("", cname, "COST", num(c[j])))
        for i in np.flatnonzero(A[:, j]):
            out.append(field_line("", cname, rows[i][1], num(A[i, j])))
    out.append("RHS")
    for i in np.flatnonzero(b):
        out.append(field_line("", "RHS", rows[i][1], num(b[i])))
    out.append("BOUNDS")
    if d["bounds"].shape[0]:
        for j, (lo, hi) in enumerate(d["bounds"][0]):
            cname = f"C{j}"
            lo = -np.inf if lo is None else float(lo)
            hi = np.inf if hi is None else float(hi)
            if lo == hi:
                out.append(field_line("FX", "BND", cname, num(lo)))
                continue
            if lo == -np.inf and hi == np.inf:
                out.append(field_line("FR", "BND", cname))
                continue
            if lo == -np.inf:
                out.append(field_line("MI", "BND", cname))
            elif lo != 0:
                out.append(field_line("LO", "BND", cname, num(lo)))
            if hi != np.inf:
                out.append(field_line("UP", "BND", cname, num(hi)))
    out.append("ENDATA")
    return "\n".join(out) + "\n"


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("src", type=Path)
    ap.add_argument("--extra", nargs="*", default=["FIT1D"],
                    help="problems bundled despite exceeding the nonzero limit")
    args = ap.parse_args(argv)
    warnings.filterwarnings("ignore", message=".*Python 2.*")

    (OUT / "netlib").mkdir(parents=True, exist_ok=True)
    small = []
    for f in sorted(args.src.glob("*.npz")):
        d = np.load(f, allow_pickle=True)
        if "A_ub" not in d.files:
            continue
        name = f.stem
        nnz = int(np.count_nonzero(d["A_ub"]) + np.count_nonzero(d["A_eq"]))
        if nnz >= NNZ_LIMIT and name not in args.extra:
            continue
        if nnz < NNZ_LIMIT:
            small.append((nnz, name))
        text = to_mps(name, d)
        with gzip.GzipFile(OUT / "netlib" / f"{name}.mps.gz", "wb", mtime=0) as fh:
            fh.write(text.encode("ascii"))
        print(f"{name:10s} nnz={nnz}", file=sys.stderr)

    lines = ["# NETLIB problems with fewer than 10,000 constraint nonzeros, by nonzeros.",
             "# Generated by tools/make_netlib_fixtures.py."]
    lines += [f"{name:10s} # nnz={nnz}" for nnz, name in sorted(small)]
    (OUT / "netlib_small.txt").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
