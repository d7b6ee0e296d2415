#!/usr/bin/env python3
"""Solve a CPLEX-LP text model with scipy's HiGHS MILP interface.

Usage: solve_lp.py model.lp
Prints the optimal objective value on stdout.
"""

import re
import sys

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

TOKEN = re.compile(
    r"<=|>=|=<|=>|=|\+|-|:|[A-Za-z_][A-Za-z0-9_]*|[0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?"
)
SECTIONS = {
    "maximize": "objective",
    "minimize": "objective",
    "subject to": "constraints",
    "bounds": "bounds",
    "binaries": "binaries",
    "generals": "generals",
    "end": "end",
}


def split_sections(text):
    sections = {}
    current = None
    maximize = True
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("\\"):
            continue
        key = line.lower()
        if key in SECTIONS:
            current = SECTIONS[key]
            if key == "minimize":
                maximize = False
            sections.setdefault(current, [])
            continue
        if current is None:
            raise ValueError(f"content before the first section: {line!r}")
        sections[current].append(line)
    return sections, maximize


def tokens_of(lines):
    return TOKEN.findall(" ".join(lines))


def is_number(tok):
    return bool(re.fullmatch(r"[0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?", tok))


def parse_expression(toks, pos):
    """Parses sign/coefficient/variable terms; returns ({var: coeff}, next_pos)."""
    terms = {}
    sign = 1.0
    coeff = None
    while pos < len(toks):
        tok = toks[pos]
        if tok in ("<=", ">=", "=<", "=>", "=", ":"):
            break
        if tok == "+":
            sign, coeff = 1.0, None
        elif tok == "-":
            sign, coeff = -1.0, None
        elif is_number(tok):
            if coeff is not None:
                break  # a bare number after a finished term: the rhs
            coeff = float(tok)
        else:
            value = sign * (1.0 if coeff is None else coeff)
            terms[tok] = terms.get(tok, 0.0) + value
            sign, coeff = 1.0, None
        pos += 1
    return terms, pos


def parse_constraints(lines):
    toks = tokens_of(lines)
    out = []
    pos = 0
    while pos < len(toks):
        if pos + 1 < len(toks) and toks[pos + 1] == ":":
            pos += 2  # constraint name
        terms, pos = parse_expression(toks, pos)
        rel = toks[pos]
        pos += 1
        sign = 1.0
        if toks[pos] == "-":
            sign, pos = -1.0, pos + 1
        elif toks[pos] == "+":
            pos += 1
        rhs = sign * float(toks[pos])
        pos += 1
        out.append((terms, rel, rhs))
    return out


def parse_bounds(lines):
    bounds = {}
    for line in lines:
        toks = TOKEN.findall(line)
        # form: lo <= var <= hi
        if len(toks) == 5 and toks[1] in ("<=", "=<") and toks[3] in ("<=", "=<"):
            bounds[toks[2]] = (float(toks[0]), float(toks[4]))
        else:
            raise ValueError(f"unsupported bound line: {line!r}")
    return bounds


def main():
    if len(sys.argv) != 2:
        print(__doc__, file=sys.stderr)
        return 2
    with open(sys.argv[1], "r", encoding="utf-8") as f:
        sections, maximize = split_sections(f.read())

    obj_toks = tokens_of(sections.get("objective", []))
    pos = 0
    if len(obj_toks) >= 2 and obj_toks[1] == ":":
        pos = 2
    objective, pos = parse_expression(obj_toks, pos)
    constraints = parse_constraints(sections.get("constraints", []))
    bounds = parse_bounds(sections.get("bounds", []))
    binaries = set(tokens_of(sections.get("binaries", [])))
    generals = set(tokens_of(sections.get("generals", [])))

    names = []
    index = {}

    def var_id(name):
        if name not in index:
            index[name] = len(names)
            names.append(name)
        return index[name]

    for name in objective:
        var_id(name)
    for terms, _, _ in constraints:
        for name in terms:
            var_id(name)
    for name in list(bounds) + sorted(binaries) + sorted(generals):
        var_id(name)

    nvar = len(names)
    c = np.zeros(nvar)
    for name, coeff in objective.items():
        c[index[name]] = -coeff if maximize else coeff

    rows, lbs, ubs = [], [], []
    for terms, rel, rhs in constraints:
        row = np.zeros(nvar)
        for name, coeff in terms.items():
            row[index[name]] = coeff
        rows.append(row)
        if rel in ("<=", "=<"):
            lbs.append(-np.inf)
            ubs.append(rhs)
        elif rel in (">=", "=>"):
            lbs.append(rhs)
            ubs.append(np.inf)
        else:
            lbs.append(rhs)
            ubs.append(rhs)

    lo = np.full(nvar, -np.inf)
    hi = np.full(nvar, np.inf)
    integrality = np.zeros(nvar)
    for name in binaries:
        i = index[name]
        lo[i], hi[i], integrality[i] = 0.0, 1.0, 1
    for name in generals:
        integrality[index[name]] = 1
    for name, (blo, bhi) in bounds.items():
        i = index[name]
        lo[i], hi[i] = blo, bhi

    res = milp(
        c=c,
        constraints=LinearConstraint(np.array(rows), np.array(lbs), np.array(ubs)),
        integrality=integrality,
        bounds=Bounds(lo, hi),
    )
    if not res.success:
        print(f"solver failed: {res.message}", file=sys.stderr)
        return 1
    value = (-res.fun if maximize else res.fun) + 0.0
    print(f"{value:.15g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
