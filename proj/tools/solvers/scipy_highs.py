#!/usr/bin/env python3
"""External MILP backend bridge: solves a gridshed LP dump with HiGHS via scipy.

usage: scipy_highs.py PROBLEM.lp SOLUTION.txt RELATIVE_GAP TIME_LIMIT_S

TIME_LIMIT_S <= 0 means no limit. Reads the LP subset written by
gridshed::milp::write_lp and writes

  status optimal|feasible|limit_hit|infeasible|unbounded|numerical_failure
  objective <value>
  bound <value>
  nodes <count>
  <variable name> <value>     (one line per variable)

Exit code 0 whenever a solution file was written.
"""
import re
import sys

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse import coo_matrix

NUMBER = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$|^[+-]?inf$")


def parse_terms(tokens):
    """Returns ({name: coef}, constant) for a token list like ['-', '2', 'x', '+', '3']."""
    terms, constant = {}, 0.0
    sign, i = 1.0, 0
    while i < len(tokens):
        tok = tokens[i]
        if tok in ("+", "-"):
            sign = -1.0 if tok == "-" else 1.0
            i += 1
            continue
        if NUMBER.match(tok):
            coef = sign * float(tok)
            if i + 1 < len(tokens) and tokens[i + 1] not in ("+", "-") and not NUMBER.match(tokens[i + 1]):
                name = tokens[i + 1]
                terms[name] = terms.get(name, 0.0) + coef
                i += 2
            else:
                constant += coef
                i += 1
        else:
            terms[tok] = terms.get(tok, 0.0) + sign
            i += 1
        sign = 1.0
    return terms, constant


def parse_lp(text):
    sense, objective, constant = None, {}, 0.0
    rows, bounds, binaries = [], {}, []
    section = None
    for raw in text.splitlines():
        line = raw.split("\\", 1)[0].strip()
        if not line:
            continue
        key = line.lower()
        if key in ("maximize", "minimize"):
            sense, section = key, "objective"
            continue
        if key == "subject to":
            section = "rows"
            continue
        if key in ("bounds", "binaries", "end"):
            section = key
            continue
        if section == "objective":
            body = line.split(":", 1)[1] if ":" in line else line
            objective, constant = parse_terms(body.split())
        elif section == "rows":
            _, body = line.split(":", 1)
            m = re.match(r"(.*?)\s*(<=|>=|=)\s*(\S+)$", body.strip())
            terms, _ = parse_terms(m.group(1).split())
            rows.append((terms, m.group(2), float(m.group(3))))
        elif section == "bounds":
            parts = line.split()
            if len(parts) == 3 and parts[1] == "=":
                bounds[parts[0]] = (float(parts[2]), float(parts[2]))
            elif len(parts) == 5 and parts[1] == "<=" and parts[3] == "<=":
                bounds[parts[2]] = (float(parts[0]), float(parts[4]))
            else:
                raise ValueError(f"unsupported bound line: {line}")
        elif section == "binaries":
            binaries.extend(line.split())
    return sense, objective, constant, rows, bounds, binaries


def main(argv):
    problem_path, solution_path, gap, time_limit = argv[1], argv[2], float(argv[3]), float(argv[4])
    sense, objective, constant, rows, bounds, binaries = parse_lp(open(problem_path).read())
    names = list(dict.fromkeys(list(bounds) + binaries))
    index = {n: i for i, n in enumerate(names)}
    n = len(names)
    c = np.zeros(n)
    for name, coef in objective.items():
        c[index[name]] += coef
    if sense == "maximize":
        c = -c
    lo, hi = np.zeros(n), np.ones(n)
    for name, (a, b) in bounds.items():
        lo[index[name]], hi[index[name]] = a, b
    integrality = np.zeros(n)
    for name in binaries:
        integrality[index[name]] = 1
    r_idx, c_idx, vals, row_lo, row_hi = [], [], [], [], []
    for r, (terms, op, rhs) in enumerate(rows):
        for name, coef in terms.items():
            r_idx.append(r)
            c_idx.append(index[name])
            vals.append(coef)
        row_lo.append(rhs if op in (">=", "=") else -np.inf)
        row_hi.append(rhs if op in ("<=", "=") else np.inf)
    options = {"mip_rel_gap": gap, "presolve": True}
    if time_limit > 0:
        options["time_limit"] = time_limit
    constraints = []
    if rows:
        a = coo_matrix((vals, (r_idx, c_idx)), shape=(len(rows), n)).tocsr()
        constraints = [LinearConstraint(a, row_lo, row_hi)]
    res = milp(c, constraints=constraints, integrality=integrality, bounds=Bounds(lo, hi), options=options)

    to_problem = (lambda v: -v + constant) if sense == "maximize" else (lambda v: v + constant)
    has_x = res.x is not None
    if res.status == 0:
        status = "optimal"
    elif res.status == 1:
        status = "limit_hit"
    elif res.status == 2:
        status = "infeasible"
    elif res.status == 3:
        status = "unbounded"
    else:
        status = "numerical_failure"
    bound = getattr(res, "mip_dual_bound", None)
    with open(solution_path, "w") as out:
        out.write(f"status {status}\n")
        out.write(f"objective {repr(to_problem(res.fun)) if has_x else 'nan'}\n")
        out.write(f"bound {repr(to_problem(bound)) if bound is not None and np.isfinite(bound) else 'nan'}\n")
        out.write(f"nodes {int(getattr(res, 'mip_node_count', 0) or 0)}\n")
        if has_x:
            for name, value in zip(names, res.x):
                out.write(f"{name} {repr(float(value))}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
