import itertools

import numpy as np
import pytest

from infoacq import lp


def feasible(prog, x, tol=1e-7):
    if np.any(x < prog.lower - tol) or np.any(x > prog.upper + tol):
        return False
    for row, rel, b in zip(prog.a, prog.relations, prog.rhs):
        v = row @ x
        if rel == lp.LESS and v > b + tol:
            return False
        if rel == lp.GREATER and v < b - tol:
            return False
        if rel == lp.EQUAL and abs(v - b) > tol:
            return False
    return True


def vertex_oracle(prog):
    """Enumerate active-constraint vertices; None when nothing is feasible."""
    n = prog.n_vars
    planes = [(prog.a[i], prog.rhs[i]) for i in range(prog.a.shape[0])]
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        planes.append((e, prog.lower[j]))
        if np.isfinite(prog.upper[j]):
            planes.append((e, prog.upper[j]))
    best = None
    for combo in itertools.combinations(range(len(planes)), n):
        a = np.array([planes[i][0] for i in combo])
        b = np.array([planes[i][1] for i in combo])
        if abs(np.linalg.det(a)) < 1e-10:
            continue
        x = np.linalg.solve(a, b)
        if feasible(prog, x):
            v = float(prog.objective @ x)
            if best is None or v > best:
                best = v
    return best


def random_feasible_program(rng, n=None, m=None):
    n = n or int(rng.integers(1, 7))
    m = m or int(rng.integers(1, 7))
    a = rng.normal(size=(m, n))
    lower = np.zeros(n)
    upper = rng.uniform(0.5, 3.0, size=n)
    x0 = rng.uniform(0, 1, size=n) * upper
    rels, rhs = [], []
    for i in range(m):
        v = a[i] @ x0
        choice = rng.integers(0, 3)
        if choice == 0:
            rels.append(lp.LESS)
            rhs.append(v + rng.uniform(0.05, 1.0))
        elif choice == 1:
            rels.append(lp.GREATER)
            rhs.append(v - rng.uniform(0.05, 1.0))
        else:
            rels.append(lp.EQUAL)
            rhs.append(v)
    return lp.LinearProgram(
        objective=rng.normal(size=n),
        a=a,
        relations=tuple(rels),
        rhs=np.array(rhs),
        lower=lower,
        upper=upper,
    )


class TestExamples:
    def test_simple_maximize(self):
        prog = lp.LinearProgram(
            objective=np.array([1.0]),
            a=np.array([[1.0]]),
            relations=(lp.LESS,),
            rhs=np.array([1.0]),
            lower=np.array([0.0]),
            upper=np.array([2.0]),
        )
        out = lp.solve(prog)
        assert out.status == lp.OPTIMAL
        assert out.value == pytest.approx(1.0)
        np.testing.assert_allclose(out.x, [1.0])

    def test_infeasible(self):
        prog = lp.LinearProgram(
            objective=np.array([1.0]),
            a=np.array([[1.0]]),
            relations=(lp.GREATER,),
            rhs=np.array([3.0]),
            lower=np.array([0.0]),
            upper=np.array([1.0]),
        )
        assert lp.solve(prog).status == lp.INFEASIBLE

    def test_simplex_edge(self):
        prog = lp.LinearProgram(
            objective=np.array([1.0, 1.0]),
            a=np.array([[1.0, 1.0]]),
            relations=(lp.LESS,),
            rhs=np.array([1.0]),
            lower=np.zeros(2),
            upper=np.ones(2),
        )
        assert lp.solve(prog).value == pytest.approx(1.0)

    def test_unbounded(self):
        prog = lp.LinearProgram(
            objective=np.array([1.0]),
            a=np.zeros((0, 1)),
            relations=(),
            rhs=np.zeros(0),
            lower=np.array([0.0]),
            upper=np.array([np.inf]),
        )
        assert lp.solve(prog).status == lp.UNBOUNDED

    def test_equality_constraint(self):
        prog = lp.LinearProgram(
            objective=np.array([1.0, 0.0]),
            a=np.array([[1.0, 1.0]]),
            relations=(lp.EQUAL,),
            rhs=np.array([1.0]),
            lower=np.zeros(2),
            upper=np.ones(2),
        )
        out = lp.solve(prog)
        assert out.value == pytest.approx(1.0)
        np.testing.assert_allclose(out.x, [1.0, 0.0], atol=1e-8)

    def test_dimension_mismatch(self):
        with pytest.raises(lp.DimensionError):
            lp.LinearProgram(
                objective=np.array([1.0]),
                a=np.array([[1.0, 2.0]]),
                relations=(lp.LESS,),
                rhs=np.array([1.0]),
                lower=np.array([0.0]),
                upper=np.array([1.0]),
            )

    def test_requires_finite_lower_bound(self):
        with pytest.raises(lp.DimensionError):
            lp.LinearProgram(
                objective=np.array([1.0]),
                a=np.zeros((0, 1)),
                relations=(),
                rhs=np.zeros(0),
                lower=np.array([-np.inf]),
                upper=np.array([1.0]),
            )


class TestAgainstVertexOracle:
    def test_random_programs(self):
        rng = np.random.default_rng(42)
        checked = 0
        for _ in range(60):
            prog = random_feasible_program(rng)
            expected = vertex_oracle(prog)
            out = lp.solve(prog)
            if expected is None:
                # feasible by construction, so a vertex must exist
                pytest.fail("oracle found no vertex for a feasible program")
            assert out.status == lp.OPTIMAL
            scale = max(1.0, abs(expected))
            assert out.value == pytest.approx(expected, abs=1e-6 * scale)
            checked += 1
        assert checked == 60

    def test_infeasible_detection(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            n = int(rng.integers(1, 5))
            a = rng.normal(size=(2, n))
            a[1] = a[0]
            x0 = rng.uniform(0, 1, size=n)
            v = a[0] @ x0
            prog = lp.LinearProgram(
                objective=rng.normal(size=n),
                a=a,
                relations=(lp.LESS, lp.GREATER),
                rhs=np.array([v - 0.5, v + 0.5]),
                lower=np.zeros(n),
                upper=np.ones(n),
            )
            assert lp.solve(prog).status == lp.INFEASIBLE


class TestDeterminism:
    def test_identical_runs(self):
        rng = np.random.default_rng(5)
        prog = random_feasible_program(rng, n=4, m=4)
        first = lp.solve(prog)
        second = lp.solve(prog)
        assert first.status == second.status
        np.testing.assert_array_equal(first.x, second.x)
        assert first.value == second.value
