"""Timing comparison of the compiled (gmpy2) and pure-Python integer
backends on representative workloads.

Runs each workload in a subprocess with LCPFORGE_BACKEND forced, so the
import-time backend choice is exercised exactly as users hit it.

Usage: python3 benchmarks/bench_backend.py [--repeat N]
"""

import argparse
import json
import os
import subprocess
import sys

WORKLOADS = {
    "char_poly_deg5": """
from lcpforge.polynomials import real_subfield_minpoly
from lcpforge.intlinalg import companion, char_poly
a = companion(real_subfield_minpoly(11))
for _ in range(60):
    char_poly(a)
""",
    "unit_matrix_powers": """
from lcpforge.constructions import make_dmatrix
dm = make_dmatrix(3)
m = dm.matrices[0]
acc = m
for _ in range(200):
    acc = acc * m
""",
    "field_elem_products": """
from lcpforge.numberfield import field_new
from lcpforge.polynomials import real_subfield_minpoly
field = field_new(real_subfield_minpoly(11))
x = field.gen()
acc = field.one()
for _ in range(4000):
    acc = acc * x + field.from_rational(3)
""",
    "rank2_certificate": """
from lcpforge.constructions import make_rank_n_lcp
make_rank_n_lcp(2, 128, seed=0)
""",
}

_RUNNER = """
import time
t0 = time.perf_counter()
{body}
print(time.perf_counter() - t0)
"""


def run_workload(name, backend, repeat):
    env = dict(os.environ, LCPFORGE_BACKEND=backend)
    env["PYTHONPATH"] = os.pathsep.join(
        p for p in (os.path.join(_ROOT, "src"), env.get("PYTHONPATH")) if p
    )
    best = None
    for _ in range(repeat):
        out = subprocess.run(
            [sys.executable, "-c", _RUNNER.format(body=WORKLOADS[name])],
            capture_output=True,
            text=True,
            env=env,
            check=True,
        )
        elapsed = float(out.stdout.strip())
        best = elapsed if best is None else min(best, elapsed)
    return best


_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=3,
                        help="runs per workload; the best time is kept")
    parser.add_argument("--json", action="store_true",
                        help="emit machine-readable results")
    args = parser.parse_args()

    results = {}
    for name in WORKLOADS:
        row = {}
        for backend in ("gmpy2", "python"):
            try:
                row[backend] = run_workload(name, backend, args.repeat)
            except subprocess.CalledProcessError as exc:
                sys.stderr.write(
                    "%s/%s failed:\n%s\n" % (name, backend, exc.stderr)
                )
                row[backend] = None
        results[name] = row

    if args.json:
        print(json.dumps(results, indent=2))
        return

    print("%-24s %12s %12s %9s" % ("workload", "gmpy2 (s)", "python (s)", "speedup"))
    for name, row in results.items():
        fast, slow = row["gmpy2"], row["python"]
        if fast and slow:
            print("%-24s %12.4f %12.4f %8.2fx" % (name, fast, slow, slow / fast))
        else:
            print("%-24s %12s %12s" % (name, fast, slow))


if __name__ == "__main__":
    main()
