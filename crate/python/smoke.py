"""Smoke test for the pyfracobs extension module."""

import math

import pyfracobs as fo


def main():
    assert abs(fo.kernel_constant(0.5) - 1.0 / math.pi) < 1e-12

    op = fo.Operator(0.0, 1.0, 10, 0.5)
    x = op.nodes()
    psi = [0.5 - 8.0 * (xi - 0.5) ** 2 for xi in x]
    f = [0.2] * op.n
    problem = fo.Problem(op, psi, f)

    oracle = fo.brute_force_oracle(problem)
    for method in ("psor", "pg", "activeset", "penalty"):
        sol = fo.solve(problem, method)
        assert sol.converged, method
        diff = max(abs(a - b) for a, b in zip(sol.u, oracle.u))
        assert diff < 1e-7, (method, diff)
        assert fo.check_kkt(problem, sol.u)["passed"], method

    sol, u_eps = fo.solve_penalty(problem, epsilon=1e-2)
    assert all(-1e-9 <= e - u <= 1e-2 + 1e-9 for e, u in zip(u_eps, sol.u))

    reports = fo.run_suite(problem, oracle.u, seed=1)
    gated = [r for r in reports if r["asserted"] and not r["inconclusive"]]
    assert all(r["passed"] for r in gated), [r["check"] for r in gated if not r["passed"]]

    try:
        fo.Operator(0.0, 1.0, 4, 1.5)
    except ValueError:
        pass
    else:
        raise AssertionError("order 1.5 accepted")

    print(f"pyfracobs smoke: ok ({len(reports)} reports, {oracle.iterations} oracle candidates)")


if __name__ == "__main__":
    main()
