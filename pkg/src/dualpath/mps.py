"""MPS reading/writing and NETLIB retrieval.

Both fixed-column and whitespace-delimited MPS are accepted. Inequality rows
are turned into equalities with one slack column each, so the result is
always a standard-form :class:`~dualpath.problem.LinearProgram`:

* ``L`` row ``a'x <= b``  ->  ``a'x + t = b`` with ``t`` in ``[0, inf)``
* ``G`` row ``a'x >= b``  ->  ``a'x + t = b`` with ``t`` in ``(-inf, 0]``

A RANGES entry ``R`` bounds the slack instead of adding a row: ``L`` gives
``t`` in ``[0, |R|]``, ``G`` gives ``[-|R|, 0]``, and an ``E`` row gets a
slack in ``[-R, 0]`` (``R > 0``) or ``[0, |R|]`` (``R < 0``).
"""

from __future__ import annotations

import gzip
import importlib.resources
import logging
import os
import urllib.error
import urllib.request
from pathlib import Path

import numpy as np

from .problem import LinearProgram

__all__ = [
    "MpsError",
    "FetchError",
    "RetriableFetchError",
    "UnknownProblemError",
    "CorruptDownloadError",
    "MpsDocument",
    "read_mps",
    "parse_mps",
    "write_mps",
    "fetch_netlib",
    "load_netlib",
    "bundled_netlib_names",
    "pinned_netlib_list",
    "default_cache_dir",
    "DEFAULT_NETLIB_URL",
]

logger = logging.getLogger(__name__)

DEFAULT_NETLIB_URL = "https://www.netlib.org/lp/data"

_SECTIONS = ("NAME", "ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS", "ENDATA", "OBJSENSE")
_BOUND_TYPES = ("UP", "LO", "FX", "FR", "MI", "PL", "BV")
# 1-based fixed-format field columns: type, name1, name2, value1, name3, value2
_FIXED_FIELDS = ((1, 3), (4, 12), (14, 22), (24, 36), (39, 47), (49, 61))


class MpsError(ValueError):
    """Malformed MPS input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class FetchError(RuntimeError):
    pass


class RetriableFetchError(FetchError):
    """Network failure with no cached copy; retrying later may succeed."""


class UnknownProblemError(FetchError):
    pass


class CorruptDownloadError(FetchError):
    pass


class MpsDocument:
    """Raw contents of an MPS file, before conversion to standard form."""

    def __init__(self):
        self.name = ""
        self.rows: dict[str, str] = {}          # row name -> N/E/L/G, in file order
        self.objective: str | None = None
        self.columns: dict[str, dict[str, float]] = {}
        self.rhs: dict[str, float] = {}
        self.ranges: dict[str, float] = {}
        self.bounds: list[tuple[str, str, str, float]] = []  # (type, set, column, value)

    def to_linear_program(self) -> LinearProgram:
        if self.objective is None:
            raise MpsError("no objective (N) row declared")
        cons = [r for r, t in self.rows.items() if t != "N"]
        row_index = {r: i for i, r in enumerate(cons)}
        col_names = list(self.columns)
        n0 = len(col_names)

        rows, cols, vals = [], [], []
        c = np.zeros(n0)
        for j, cname in enumerate(col_names):
            for rname, v in self.columns[cname].items():
                if rname == self.objective:
                    c[j] += v
                elif rname in row_index:
                    rows.append(row_index[rname])
                    cols.append(j)
                    vals.append(v)
                # entries on secondary N rows are ignored

        b = np.array([self.rhs.get(r, 0.0) for r in cons])
        offset = -self.rhs.get(self.objective, 0.0)

        lower = np.zeros(n0)
        upper = np.full(n0, np.inf)
        col_index = {cname: j for j, cname in enumerate(col_names)}
        for btype, _, cname, v in self.bounds:
            j = col_index[cname]
            if btype == "UP":
                upper[j] = v
                if v < 0 and lower[j] == 0:
                    lower[j] = -np.inf
            elif btype == "LO":
                lower[j] = v
            elif btype == "FX":
                lower[j] = upper[j] = v
            elif btype == "FR":
                lower[j], upper[j] = -np.inf, np.inf
            elif btype == "MI":
                lower[j] = -np.inf
            elif btype == "PL":
                upper[j] = np.inf
            elif btype == "BV":
                lower[j], upper[j] = 0.0, 1.0

        # slack columns
        s_lo, s_up, s_names = [], [], []
        for rname in cons:
            rtype = self.rows[rname]
            rng = self.ranges.get(rname)
            if rtype == "E" and rng is None:
                continue
            if rtype == "L":
                lo, hi = 0.0, (np.inf if rng is None else abs(rng))
            elif rtype == "G":
                lo, hi = (-np.inf if rng is None else -abs(rng)), 0.0
            elif rng > 0:
                lo, hi = -rng, 0.0
            else:
                lo, hi = 0.0, -rng
            rows.append(row_index[rname])
            cols.append(n0 + len(s_names))
            vals.append(1.0)
            s_lo.append(lo)
            s_up.append(hi)
            s_names.append(f"_slack_{rname}")

        n = n0 + len(s_names)
        return LinearProgram(
            np.concatenate([c, np.zeros(len(s_names))]),
            (np.array(rows, dtype=int), np.array(cols, dtype=int), np.array(vals, dtype=float)),
            b,
            np.concatenate([lower, s_lo]),
            np.concatenate([upper, s_up]),
            name=self.name or "mps",
            offset=offset,
            shape=(len(cons), n),
            col_names=col_names + s_names,
            row_names=cons,
        )


def _number(token: str, lineno: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise MpsError(f"malformed numeric field {token!r}", lineno) from None


def _fixed_fields(line: str) -> list[str]:
    out = []
    for a, b in _FIXED_FIELDS:
        out.append(line[a - 1:b].strip())
    while out and not out[-1]:
        out.pop()
    return out


def _split(line: str, expected: tuple[int, ...]) -> list[str]:
    """Tokenize a data line, falling back to fixed columns when the
    whitespace split has an unexpected field count (names with blanks)."""
    tokens = line.split()
    if len(tokens) in expected:
        return tokens
    fields = _fixed_fields(line)
    if len(fields) > 1 and not fields[0] and len(fields) - 1 in expected:
        return fields[1:]
    if len(fields) in expected:
        return fields
    return tokens


def read_mps(text: str) -> MpsDocument:
    """Parse MPS text into an :class:`MpsDocument` without standardizing it."""
    doc = MpsDocument()
    section = None
    seen_end = False
    rhs_set = range_set = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.startswith("*"):
            continue
        if not line[0].isspace():
            head = line.split()
            key = head[0].upper()
            if key not in _SECTIONS:
                raise MpsError(f"unknown section {head[0]!r}", lineno)
            section = key
            if key == "NAME":
                doc.name = line[4:].strip() if len(head) > 1 else ""
            elif key == "ENDATA":
                seen_end = True
                break
            elif key == "OBJSENSE" and len(head) > 1 and head[1].upper() in ("MAX", "MAXIMIZE"):
                raise MpsError("maximization is not supported", lineno)
            continue

        if section == "ROWS":
            tok = _split(line, (2,))
            if len(tok) != 2:
                raise MpsError("ROWS entry needs a type and a name", lineno)
            rtype, rname = tok[0].upper(), tok[1]
            if rtype not in ("N", "E", "L", "G"):
                raise MpsError(f"unknown row type {tok[0]!r}", lineno)
            if rname in doc.rows:
                raise MpsError(f"duplicate row {rname!r}", lineno)
            doc.rows[rname] = rtype
            if rtype == "N" and doc.objective is None:
                doc.objective = rname
        elif section == "COLUMNS":
            if "'MARKER'" in line:
                continue
            tok = _split(line, (3, 5))
            if len(tok) not in (3, 5):
                raise MpsError("COLUMNS entry needs 3 or 5 fields", lineno)
            col = doc.columns.setdefault(tok[0], {})
            for rname, val in zip(tok[1::2], tok[2::2]):
                if rname not in doc.rows:
                    raise MpsError(f"undeclared row {rname!r}", lineno)
                col[rname] = col.get(rname, 0.0) + _number(val, lineno)
        elif section in ("RHS", "RANGES"):
            tok = _split(line, (2, 3, 4, 5))
            if len(tok) in (2, 4):  # set name omitted
                tok = [""] + tok
            if len(tok) not in (3, 5):
                raise MpsError(f"{section} entry needs 3 or 5 fields", lineno)
            setname = tok[0]
            if section == "RHS":
                rhs_set = setname if rhs_set is None else rhs_set
                if setname != rhs_set:
                    continue
            else:
                range_set = setname if range_set is None else range_set
                if setname != range_set:
                    continue
            target = doc.rhs if section == "RHS" else doc.ranges
            for rname, val in zip(tok[1::2], tok[2::2]):
                if rname not in doc.rows:
                    raise MpsError(f"undeclared row {rname!r}", lineno)
                if section == "RANGES" and doc.rows[rname] == "N":
                    raise MpsError(f"range on objective row {rname!r}", lineno)
                target[rname] = _number(val, lineno)
        elif section == "BOUNDS":
            tok = _split(line, (3, 4))
            if not tok:
                continue
            btype = tok[0].upper()
            if btype not in _BOUND_TYPES:
                raise MpsError(f"unknown bound type {tok[0]!r}", lineno)
            needs_value = btype not in ("FR", "MI", "PL", "BV")
            if len(tok) == 4:
                bset, cname, val = tok[1], tok[2], _number(tok[3], lineno)
            elif len(tok) == 3 and needs_value:
                bset, cname, val = "", tok[1], _number(tok[2], lineno)
            elif len(tok) == 3:
                bset, cname, val = tok[1], tok[2], 0.0
            elif len(tok) == 2 and not needs_value:
                bset, cname, val = "", tok[1], 0.0
            else:
                raise MpsError("malformed BOUNDS entry", lineno)
            if cname not in doc.columns:
                raise MpsError(f"undeclared column {cname!r}", lineno)
            doc.bounds.append((btype, bset, cname, val))
        elif section == "NAME":
            raise MpsError("data line before ROWS", lineno)
        elif section == "OBJSENSE":
            if line.split()[0].upper() in ("MAX", "MAXIMIZE"):
                raise MpsError("maximization is not supported", lineno)
        else:
            raise MpsError("data line outside of any section", lineno)

    if not seen_end:
        raise MpsError("missing ENDATA")
    return doc


def parse_mps(text: str) -> LinearProgram:
    """Parse MPS text into a standard-form :class:`LinearProgram`."""
    return read_mps(text).to_linear_program()


def _fmt(v: float) -> str:
    return repr(float(v))


def write_mps(lp: LinearProgram, fixed: bool = False) -> str:
    """Serialize a standard-form LP as MPS (all rows ``E``).

    Free format by default; ``fixed=True`` lays fields out on the classic
    column grid, which requires names of at most 8 characters.
    """
    n, m = lp.n, lp.m_eq
    cnames = lp.col_names or [f"X{j}" for j in range(n)]
    rnames = lp.row_names or [f"R{i}" for i in range(m)]

    def fields(*f: str) -> str:
        if not fixed:
            return " " + "  ".join(f)
        widths = (2, 8, 8, 12, 8, 12)
        starts = (1, 4, 14, 24, 39, 49)
        line = ""
        for text, width, start in zip(f, widths, starts):
            if len(text) > width:
                raise ValueError(f"field {text!r} too wide for fixed MPS")
            line = line.ljust(start) + text
        return line

    out = [f"NAME          {lp.name}", "ROWS", fields("N", "OBJ")]
    out += [fields("E", r) for r in rnames]
    out.append("COLUMNS")
    A = lp.A.tocsc()
    for j in range(n):
        entries = []
        if lp.c[j] != 0:
            entries.append(("OBJ", lp.c[j]))
        lo, hi = A.indptr[j], A.indptr[j + 1]
        entries += [(rnames[i], v) for i, v in zip(A.indices[lo:hi], A.data[lo:hi])]
        for rname, v in entries:
            out.append(fields("", cnames[j], rname, _fmt(v)))
        if not entries:
            out.append(fields("", cnames[j], "OBJ", _fmt(0.0)))
    out.append("RHS")
    for i in range(m):
        if lp.b[i] != 0:
            out.append(fields("", "RHS", rnames[i], _fmt(lp.b[i])))
    if lp.offset != 0:
        out.append(fields("", "RHS", "OBJ", _fmt(-lp.offset)))
    out.append("BOUNDS")
    for j in range(n):
        lo, hi = lp.lower[j], lp.upper[j]
        if lo == hi:
            out.append(fields("FX", "BND", cnames[j], _fmt(lo)))
            continue
        if lo == -np.inf and hi == np.inf:
            out.append(fields("FR", "BND", cnames[j]))
            continue
        if lo == -np.inf:
            out.append(fields("MI", "BND", cnames[j]))
        elif lo != 0:
            out.append(fields("LO", "BND", cnames[j], _fmt(lo)))
        if hi != np.inf:
            out.append(fields("UP", "BND", cnames[j], _fmt(hi)))
    out.append("ENDATA")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# NETLIB


def default_cache_dir() -> Path:
    env = os.environ.get("DUALPATH_CACHE")
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "dualpath"


def _data_dir():
    return importlib.resources.files("dualpath") / "data"


def bundled_netlib_names() -> list[str]:
    """Names of the NETLIB problems shipped with the package."""
    d = _data_dir() / "netlib"
    return sorted(p.name[: -len(".mps.gz")] for p in d.iterdir() if p.name.endswith(".mps.gz"))


def pinned_netlib_list() -> list[str]:
    """The pinned small-NETLIB list used for batch experiments."""
    text = (_data_dir() / "netlib_small.txt").read_text()
    return [ln.split("#")[0].strip() for ln in text.splitlines() if ln.split("#")[0].strip()]


def _decode(payload: bytes, name: str) -> str:
    if not payload:
        raise CorruptDownloadError(f"{name}: empty download")
    if payload[:2] == b"\x1f\x8b":
        try:
            payload = gzip.decompress(payload)
        except OSError as exc:
            raise CorruptDownloadError(f"{name}: bad gzip stream") from exc
    try:
        text = payload.decode("ascii")
    except UnicodeDecodeError as exc:
        raise CorruptDownloadError(f"{name}: not an MPS text file") from exc
    if "ROWS" not in text or "ENDATA" not in text:
        raise CorruptDownloadError(
            f"{name}: downloaded file is not plain MPS; point DUALPATH_NETLIB_URL at a "
            "mirror serving uncompressed or gzipped MPS"
        )
    return text


def _download(name: str, base_url: str) -> bytes:
    url = f"{base_url.rstrip('/')}/{name}.mps"
    logger.info("downloading %s", url)
    try:
        with urllib.request.urlopen(url, timeout=60) as resp:
            return resp.read()
    except urllib.error.HTTPError as exc:
        if exc.code == 404:
            raise UnknownProblemError(f"unknown NETLIB problem {name!r}") from exc
        raise RetriableFetchError(f"{name}: HTTP {exc.code}") from exc
    except urllib.error.URLError as exc:
        if isinstance(exc.reason, FileNotFoundError):
            raise UnknownProblemError(f"unknown NETLIB problem {name!r}") from exc
        raise RetriableFetchError(f"{name}: {exc.reason}") from exc
    except OSError as exc:
        raise RetriableFetchError(f"{name}: {exc}") from exc


def fetch_netlib(name: str, cache_dir=None, base_url: str | None = None,
                 use_bundled: bool = True) -> str:
    """Return the MPS text of NETLIB problem ``name``.

    Lookup order is the cache (``<cache_dir>/<NAME>.mps``), then the copy
    bundled with the package, then ``base_url`` (default
    ``$DUALPATH_NETLIB_URL``). Anything not served from the cache is written
    to it. A per-file lock keeps concurrent callers from downloading twice.
    """
    from filelock import FileLock

    name = name.strip().upper()
    if not name or "/" in name or name.startswith("."):
        raise UnknownProblemError(f"invalid NETLIB name {name!r}")
    cache = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    cache.mkdir(parents=True, exist_ok=True)
    target = cache / f"{name}.mps"
    with FileLock(str(cache / f".{name}.lock")):
        if target.exists() and target.stat().st_size > 0:
            return target.read_text()
        payload = None
        if use_bundled:
            res = _data_dir() / "netlib" / f"{name}.mps.gz"
            if res.is_file():
                payload = res.read_bytes()
        if payload is None:
            base = base_url or os.environ.get("DUALPATH_NETLIB_URL", DEFAULT_NETLIB_URL)
            payload = _download(name, base)
        text = _decode(payload, name)
        tmp = target.with_suffix(".mps.part")
        tmp.write_text(text)
        tmp.replace(target)
        return text


def load_netlib(name: str, cache_dir=None, **kwargs) -> LinearProgram:
    lp = parse_mps(fetch_netlib(name, cache_dir, **kwargs))
    lp.name = name.upper()
    return lp
