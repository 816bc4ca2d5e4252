#!/usr/bin/env python3
"""Independent high-accuracy oracle for the fixed solver test instances.

Reads instance_<id>.txt files produced by export-oracle-instances, solves
    min ||Z||_* subject to ||A(Z) - b||_q <= eta,  Z symmetric
with cvxpy/Clarabel at tight tolerances, and writes oracle_<id>.txt reference
solutions for tests/data/.

Usage: solve_oracle.py <instance-dir> <output-dir>
"""

import glob
import os
import re
import sys

import cvxpy as cp
import numpy as np


def solve_instance(path: str) -> np.ndarray:
    with open(path) as fh:
        header = fh.readline().split()
        n, m, q_text, eta = int(header[0]), int(header[1]), header[2], float(header[3])
        rows = [fh.readline().split() for _ in range(m)]
        vectors = np.array(rows, dtype=float)
        b = np.array([float(fh.readline()) for _ in range(m)])

    z = cp.Variable((n, n), symmetric=True)
    measurements = cp.hstack([cp.quad_form(vectors[j], z) for j in range(m)])
    residual = measurements - b
    q = {"1": 1, "2": 2, "inf": "inf"}[q_text]
    constraints = [cp.norm(residual, q) <= eta]
    problem = cp.Problem(cp.Minimize(cp.normNuc(z)), constraints)
    problem.solve(solver=cp.CLARABEL, tol_gap_abs=1e-10, tol_gap_rel=1e-10,
                  tol_feas=1e-10, verbose=False)
    if problem.status not in ("optimal", "optimal_inaccurate"):
        raise RuntimeError(f"{path}: solver status {problem.status}")
    print(f"{os.path.basename(path)}: status={problem.status} "
          f"objective={problem.value:.12g}")
    return np.asarray(z.value)


def main() -> None:
    instance_dir, output_dir = sys.argv[1], sys.argv[2]
    os.makedirs(output_dir, exist_ok=True)
    for path in sorted(glob.glob(os.path.join(instance_dir, "instance_*.txt"))):
        instance_id = re.search(r"instance_(\d+)", path).group(1)
        solution = solve_instance(path)
        out_path = os.path.join(output_dir, f"oracle_{instance_id}.txt")
        with open(out_path, "w") as fh:
            fh.write(f"{solution.shape[0]}\n")
            for row in solution:
                fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")


if __name__ == "__main__":
    main()
