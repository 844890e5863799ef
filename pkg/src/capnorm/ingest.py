"""
Reading and writing tower data.

Two formats are supported:

* transcripts, i.e. the text printed by the PARI/GP filtration programs
  ("CK1=[12,4]=[4,4]", "h_1^[(S-1)^1]=[0,2]", "norm in K1/K of the
  component 1 of CK1:[2,2]", verdict lines). Prose between the recognised
  lines is skipped.
* the canonical format, a versioned line-oriented text file. Its grammar is
  in docs/canonical_format.md.

Transcripts print full class-group orders; only p-parts are kept, and
generators whose p-part is trivial are dropped together with their columns.
"""

from __future__ import annotations

import math
import re
import warnings

from .errors import CanonicalizationWarning, IngestError, ModuleError
from .padic import is_prime, valuation
from .pmodule import Kind, make_module
from .tower import LayerRecord, TowerData, validate_tower

__all__ = [
    "FORMAT_VERSION",
    "check_printed_powers",
    "load",
    "parse_canonical",
    "parse_transcript",
    "parse_verdict",
    "sniff_format",
    "to_canonical",
]

FORMAT_VERSION = 1
MAGIC = "capnorm-tower"

_HEADER_KV = re.compile(r"(\w+)=(\[[^\]]*\]|\S+)")
_STRUCT = re.compile(r"^CK(\d+)=\[([^\]]*)\](?:=\[([^\]]*)\])?")
_ACTION = re.compile(r"h_(\d+)\^\[\(S-1\)\^(\d+)\]=\[([^\]]*)\]")
_NORM = re.compile(r"norm in K(\d+)/K of the component (\d+) of CK(\d+):\[([^\]]*)\]")
_VERDICT = re.compile(r"^(Complete|Incomplete|No) capitulation\b")
_TRIPLE = re.compile(r"^(Complete|Incomplete|No) capitulation(?:\s*\([^)]*\))?\s*,\s*m\(K\d+\)=(\d+)\s*,\s*e\(K\d+\)=(\d+)")
_KINDS = {"Complete": Kind.COMPLETE, "Incomplete": Kind.PARTIAL, "No": Kind.NONE}


def parse_verdict(line: str):
    """(Kind, m, e) from a printed verdict line, or None if the line has no m/e."""
    mt = _TRIPLE.match(line.strip())
    if not mt:
        return None
    return _KINDS[mt.group(1)], int(mt.group(2)), int(mt.group(3))


def _ints(text: str, lineno=None) -> list[int]:
    text = text.strip()
    if not text:
        return []
    try:
        return [int(tok) for tok in text.split(",")]
    except ValueError:
        raise IngestError(f"non-integer token in [{text}]", lineno) from None


# shared normalisation ---------------------------------------------------------

def _sort_generators(p, orders, D, norms, powers, where):
    """Reorder generators so that orders are non-increasing (stable), permuting D consistently."""
    r = len(orders)
    perm = sorted(range(r), key=lambda j: -orders[j])
    if perm == list(range(r)):
        return orders, D, norms, powers
    warnings.warn(f"{where}: orders {list(orders)} not non-increasing; generators reordered", CanonicalizationWarning, stacklevel=3)
    pos = {old: new for new, old in enumerate(perm)}
    orders = [orders[j] for j in perm]
    if D is not None:
        D = [[D[a][b] for b in perm] for a in perm]
    if norms is not None:
        norms = [[norms[a][b] for b in perm] for a in perm]
    powers = [(i, pos[j], [vec[b] for b in perm]) for i, j, vec in powers]
    return orders, D, norms, powers


def _build_layer(p, n, orders, D, norms, powers, label, verdicts, where):
    orders, D, norms, powers = _sort_generators(p, list(orders), D, norms, list(powers), where)
    moduli = [p**k for k in orders]

    def red(v):
        return tuple(int(x) % q for x, q in zip(v, moduli))

    module = None
    if D is not None:
        try:
            module = make_module(p, orders, D, N=n)
        except ModuleError as exc:
            raise IngestError(f"{where}: {exc}") from None
    powers = tuple(sorted((i, j, red(vec)) for i, j, vec in powers))
    return LayerRecord(
        n=n,
        orders=tuple(orders),
        module=module,
        printed_norms=None if norms is None else tuple(red(v) for v in norms),
        label=label,
        verdicts=tuple(verdicts),
        printed_powers=powers,
    )


# transcripts --------------------------------------------------------------------

def _infer_p(header, numbers, p):
    if p is not None:
        return p
    if "p" in header:
        return int(header["p"])
    g = 0
    for x in numbers:
        if x > 1:
            g = math.gcd(g, x)
    primes = [q for q in range(2, g + 1) if g % q == 0 and is_prime(q)] if g > 1 else []
    if len(primes) != 1:
        raise IngestError("cannot infer p: give p= in the header or pass p explicitly")
    return primes[0]


def parse_transcript(text: str, p: int | None = None) -> TowerData:
    """Parse PARI transcript text into a validated TowerData."""
    lines = text.replace("\r\n", "\n").replace("\r", "\n").split("\n")
    header = {}
    header_line = ""
    blocks = []
    cur = None
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line:
            continue
        mt = _STRUCT.match(line)
        is_layer = mt is not None and int(mt.group(1)) >= 1
        if not blocks and not is_layer:
            # everything before the first layer is header
            found = _HEADER_KV.findall(line)
            if found:
                header_line = " ".join(filter(None, [header_line, " ".join(line.split())]))
                header.update(found)
            continue
        if is_layer:
            listed = _ints(mt.group(2), lineno)
            bracket = _ints(mt.group(3), lineno) if mt.group(3) is not None else None
            cur = dict(n=int(mt.group(1)), listed=listed, bracket=bracket, label=mt.group(0),
                       actions={}, norms={}, verdicts=[], line=lineno)
            blocks.append(cur)
            continue
        acts = _ACTION.findall(line)
        norm = _NORM.search(line)
        if (acts or norm) and cur is None:
            raise IngestError("action or norm data before any CKn line", lineno)
        for j, i, vec in acts:
            key = (int(i), int(j))
            v = _ints(vec, lineno)
            if cur["actions"].get(key, v) != v:
                raise IngestError(f"conflicting rows for h_{j}^[(S-1)^{i}]", lineno)
            cur["actions"][key] = v
        if norm:
            kn, j, ck, vec = norm.groups()
            if int(kn) != cur["n"] or int(ck) != cur["n"]:
                raise IngestError(f"norm line for K{kn} inside the block of K{cur['n']}", lineno)
            v = _ints(vec, lineno)
            if cur["norms"].get(int(j), v) != v:
                raise IngestError(f"conflicting norm lines for component {j}", lineno)
            cur["norms"][int(j)] = v
        elif cur is not None and _VERDICT.match(line):
            cur["verdicts"].append(line)
    if not blocks:
        raise IngestError("no layers found")
    if "CK0" not in header:
        raise IngestError("no header line with CK0=[...]")
    base_listed = _ints(header["CK0"].strip("[]"))
    numbers = base_listed + [x for b in blocks for x in b["listed"] + (b["bracket"] or [])]
    p = _infer_p(header, numbers, p)

    def pparts(listed, where):
        if any(x <= 0 for x in listed):
            raise IngestError(f"{where}: class-group orders must be positive")
        return [valuation(x, p) for x in listed]

    base = sorted((v for v in pparts(base_listed, "CK0") if v), reverse=True)
    layers = []
    for b in blocks:
        n = b["n"]
        where = f"layer {n} (line {b['line']})"
        vals = pparts(b["listed"], where)
        kept = [j for j, v in enumerate(vals) if v > 0]
        orders = [vals[j] for j in kept]
        if b["bracket"] is not None and b["bracket"] != [p**v for v in orders]:
            raise IngestError(f"{where}: p-part {b['bracket']} does not match {b['listed']}")
        width = len(b["listed"])
        for key, v in list(b["actions"].items()) + [((0, j), v) for j, v in b["norms"].items()]:
            j = key[1]
            if len(v) == len(kept) != width:
                # vector printed on the p-part generators only: widen it
                full = [0] * width
                for t, x in zip(kept, v):
                    full[t] = x
                v = full
                (b["actions"] if key[0] else b["norms"])[key if key[0] else j] = v
            if len(v) != width:
                raise IngestError(f"{where}: vector of length {len(v)} for {width} generators")
            if not 1 <= j <= width:
                raise IngestError(f"{where}: generator index {j} out of range")
        have = {j for (i, j) in b["actions"] if i == 1}
        need = {j + 1 for j in kept}
        if have & need:
            missing = sorted(need - have)
            if missing:
                raise IngestError(f"{where}: missing h_j^[(S-1)^1] rows for j={missing}; sigma is underdetermined")
            D = [[b["actions"][(1, j + 1)][t] for t in kept] for j in kept]
        elif not kept:
            D = []
        else:
            D = None
        norms = None
        if b["norms"]:
            missing = sorted(need - set(b["norms"]))
            if missing:
                raise IngestError(f"{where}: missing norm lines for components {missing}")
            for j, v in b["norms"].items():
                if j not in need and any(v[t] % p ** vals[t] for t in kept):
                    raise IngestError(f"{where}: norm of dropped component {j} is not trivial")
            norms = [[b["norms"][j + 1][t] for t in kept] for j in kept]
        powers = []
        for (i, j), v in b["actions"].items():
            if i >= 2 and j in need:
                powers.append((i, kept.index(j - 1), [v[t] for t in kept]))
        layers.append(_build_layer(p, n, orders, D, norms, powers, b["label"], b["verdicts"], where))
    layers.sort(key=lambda rec: rec.n)
    declared = max(int(header.get("Nn", 0)), int(header.get("N", 0)))
    tower = TowerData(
        p=p,
        N=max(declared, len(layers)),
        ell=int(header["ell"]) if "ell" in header else None,
        r=int(header["r"]) if "r" in header else None,
        base_orders=tuple(base),
        layers=tuple(layers),
        tag=header_line,
    )
    return validate_tower(tower)


def check_printed_powers(rec: LayerRecord) -> list:
    """Printed (S-1)^i rows (i >= 2) that disagree with D^i: (i, j, printed, computed), j 1-based."""
    if rec.module is None:
        return []
    bad = []
    for i, j, vec in rec.printed_powers:
        got = rec.module.act(rec.module.generator(j), rec.module.power(i))
        if tuple(vec) != got:
            bad.append((i, j + 1, tuple(vec), got))
    return bad


# canonical format ---------------------------------------------------------------

def _opt(x):
    return "-" if x is None else str(x)


def _row(x):
    return " ".join(str(v) for v in x)


def to_canonical(tower: TowerData) -> str:
    out = [f"{MAGIC} {FORMAT_VERSION}", f"p {tower.p}", f"N {tower.N}", f"ell {_opt(tower.ell)}",
           f"r {_opt(tower.r)}", f"base {_row(tower.base_orders)}".rstrip()]
    if tower.tag:
        out.append(f"tag {tower.tag}")
    for rec in tower.layers:
        out.append(f"layer {rec.n}")
        if rec.label:
            out.append(f"  label {rec.label}")
        out.append(f"  orders {_row(rec.orders)}".rstrip())
        if rec.module is None:
            out.append("  sigma none")
        else:
            out.extend(f"  D {_row(row)}" for row in rec.module.D)
        if rec.printed_norms is not None:
            out.extend(f"  norm {_row(v)}".rstrip() for v in rec.printed_norms)
        out.extend(f"  power {i} {j + 1} {_row(v)}".rstrip() for i, j, v in rec.printed_powers)
        out.extend(f"  verdict {v}" for v in rec.verdicts)
        out.append("end")
    return "\n".join(out) + "\n"


def _int_field(tok, lineno, what, optional=False):
    if optional and tok == "-":
        return None
    try:
        return int(tok)
    except ValueError:
        raise IngestError(f"{what}: expected an integer, got {tok!r}", lineno) from None


def parse_canonical(text: str) -> TowerData:
    lines = text.replace("\r\n", "\n").replace("\r", "\n").split("\n")
    items = [(i, ln.strip()) for i, ln in enumerate(lines, 1)]
    items = [(i, ln) for i, ln in items if ln and not ln.startswith("#")]
    if not items:
        raise IngestError("empty canonical file")
    lineno, first = items[0]
    parts = first.split()
    if len(parts) != 2 or parts[0] != MAGIC:
        raise IngestError(f"expected header '{MAGIC} {FORMAT_VERSION}'", lineno)
    if _int_field(parts[1], lineno, "version") != FORMAT_VERSION:
        raise IngestError(f"unsupported format version {parts[1]}", lineno)
    head = {}
    layers = []
    cur = None
    for lineno, ln in items[1:]:
        key, _, rest = ln.partition(" ")
        rest = rest.strip()
        if cur is None:
            if key in ("p", "N"):
                head[key] = _int_field(rest, lineno, key)
            elif key in ("ell", "r"):
                head[key] = _int_field(rest, lineno, key, optional=True)
            elif key == "base":
                head["base"] = [_int_field(t, lineno, "base") for t in rest.split()]
            elif key == "tag":
                head["tag"] = rest
            elif key == "layer":
                cur = dict(n=_int_field(rest, lineno, "layer"), orders=None, D=[], sigma=True,
                           norms=None, powers=[], label="", verdicts=[], line=lineno)
            else:
                raise IngestError(f"unknown field {key!r} in header", lineno)
            continue
        if key == "end":
            layers.append(cur)
            cur = None
        elif key == "label":
            cur["label"] = rest
        elif key == "orders":
            cur["orders"] = [_int_field(t, lineno, "orders") for t in rest.split()]
        elif key == "D":
            cur["D"].append([_int_field(t, lineno, "D") for t in rest.split()])
        elif key == "sigma":
            if rest != "none":
                raise IngestError("only 'sigma none' is allowed", lineno)
            cur["sigma"] = False
        elif key == "norm":
            cur["norms"] = (cur["norms"] or []) + [[_int_field(t, lineno, "norm") for t in rest.split()]]
        elif key == "power":
            vals = [_int_field(t, lineno, "power") for t in rest.split()]
            if len(vals) < 2:
                raise IngestError("power needs i, j and a vector", lineno)
            cur["powers"].append((vals[0], vals[1] - 1, vals[2:]))
        elif key == "verdict":
            cur["verdicts"].append(rest)
        else:
            raise IngestError(f"unknown field {key!r} in layer block", lineno)
    if cur is not None:
        raise IngestError(f"layer {cur['n']} is not closed by 'end'", cur["line"])
    for req in ("p", "N"):
        if req not in head:
            raise IngestError(f"missing required field {req!r}")
    p = head["p"]
    if not is_prime(p):
        raise IngestError(f"p={p} is not prime")
    out = []
    for b in layers:
        where = f"layer {b['n']} (line {b['line']})"
        orders = b["orders"]
        if orders is None:
            raise IngestError(f"{where}: missing 'orders'")
        if any(k < 1 for k in orders):
            raise IngestError(f"{where}: orders are p-exponents and must be >= 1")
        r = len(orders)
        if not b["sigma"] and b["D"]:
            raise IngestError(f"{where}: 'sigma none' together with D rows")
        D = b["D"] if b["sigma"] else None
        if D is not None and (len(D) != r or any(len(row) != r for row in D)):
            raise IngestError(f"{where}: D must be {r} rows of {r} entries")
        norms = b["norms"]
        if norms is not None and (len(norms) != r or any(len(v) != r for v in norms)):
            raise IngestError(f"{where}: need {r} norm vectors of length {r}")
        for i, j, v in b["powers"]:
            if not 0 <= j < r or len(v) != r or i < 2:
                raise IngestError(f"{where}: malformed power row ({i}, {j + 1})")
        out.append(_build_layer(p, b["n"], orders, D, norms, b["powers"], b["label"], b["verdicts"], where))
    base = head.get("base", [])
    if any(a < b for a, b in zip(base, base[1:])):
        warnings.warn("base orders not non-increasing; sorted", CanonicalizationWarning, stacklevel=2)
        base = sorted(base, reverse=True)
    tower = TowerData(p, head["N"], head.get("ell"), head.get("r"), tuple(base),
                      tuple(sorted(out, key=lambda rec: rec.n)), head.get("tag", ""))
    return validate_tower(tower)


def sniff_format(text: str) -> str:
    for ln in text.splitlines():
        ln = ln.strip()
        if ln and not ln.startswith("#"):
            return "canonical" if ln.startswith(MAGIC) else "transcript"
    return "transcript"


def load(text: str, fmt: str | None = None, p: int | None = None) -> TowerData:
    fmt = fmt or sniff_format(text)
    if fmt == "canonical":
        return parse_canonical(text)
    if fmt == "transcript":
        return parse_transcript(text, p)
    raise ValueError(f"unknown format {fmt!r}")
