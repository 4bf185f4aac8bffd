import numpy as np
import pytest

import critflow as cf
from oracles import lp_vertex_enumeration_oracle


def test_single_variable_max():
    # max x s.t. x <= 3 as min -x
    p = cf.LpProblem(c=[-1.0], a=[[1.0]], rel=["<="], b=[3.0])
    s = cf.solve_lp(p)
    assert s.x[0] == pytest.approx(3.0, abs=1e-9)
    assert s.objective == pytest.approx(-3.0, abs=1e-9)


def test_degenerate_optimum_face():
    # min x+y s.t. x+y >= 2, x,y in [0,2]: any optimal vertex gives 2
    p = cf.LpProblem(c=[1.0, 1.0], a=[[1.0, 1.0]], rel=[">="], b=[2.0],
                     upper=[2.0, 2.0])
    s = cf.solve_lp(p)
    assert s.objective == pytest.approx(2.0, abs=1e-9)
    assert s.x.sum() == pytest.approx(2.0, abs=1e-9)


def _random_feasible_lp(rng, n, m):
    a = rng.uniform(-1, 1, (m, n))
    x0 = rng.uniform(0, 1, n)
    rels = [rng.choice(["<=", ">=", "="]) for _ in range(m)]
    b = a @ x0
    for i, r in enumerate(rels):
        slackness = rng.uniform(0, 0.5)
        if r == "<=":
            b[i] += slackness
        elif r == ">=":
            b[i] -= slackness
    c = rng.uniform(-1, 1, n)
    return cf.LpProblem(c=c, a=a, rel=rels, b=b, upper=np.full(n, 2.0))


def test_random_lps_match_vertex_enumeration():
    rng = np.random.default_rng(2024)
    for trial in range(10):
        n = int(rng.integers(3, 6))
        m = int(rng.integers(2, 6))
        p = _random_feasible_lp(rng, n, m)
        got = cf.solve_lp(p).objective
        want = lp_vertex_enumeration_oracle(p)
        assert got == pytest.approx(want, rel=1e-6, abs=1e-8), f"trial {trial}"


def test_infeasible_detected():
    p = cf.LpProblem(c=[1.0], a=[[1.0]], rel=["<="], b=[-1.0])
    with pytest.raises(cf.LpInfeasibleError):
        cf.solve_lp(p)
    p = cf.LpProblem(c=[1.0, 1.0], a=[[1.0, 1.0], [1.0, 1.0]],
                     rel=["=", "="], b=[3.0, 4.0], upper=[9.0, 9.0])
    with pytest.raises(cf.LpInfeasibleError):
        cf.solve_lp(p)


def test_unbounded_detected():
    p = cf.LpProblem(c=[-1.0, 0.0], a=[[0.0, 1.0]], rel=["<="], b=[1.0])
    with pytest.raises(cf.LpUnboundedError):
        cf.solve_lp(p)


def test_iteration_limit_reports_basis():
    p = cf.LpProblem(c=[-1.0, -1.0], a=[[1.0, 2.0], [2.0, 1.0]],
                     rel=["<=", "<="], b=[4.0, 4.0])
    with pytest.raises(cf.LpIterationLimitError) as exc:
        cf.solve_lp(p, max_iters=1)
    assert exc.value.basis is not None


def test_equality_rows_and_shifted_bounds():
    # min x+2y s.t. x+y = 5, 1 <= x <= 4, 0 <= y <= 10 -> x=4, y=1
    p = cf.LpProblem(c=[1.0, 2.0], a=[[1.0, 1.0]], rel=["="], b=[5.0],
                     lower=[1.0, 0.0], upper=[4.0, 10.0])
    s = cf.solve_lp(p)
    assert s.x == pytest.approx([4.0, 1.0], abs=1e-9)


def test_solver_deterministic():
    rng = np.random.default_rng(5)
    p = _random_feasible_lp(rng, 5, 4)
    a = cf.solve_lp(p)
    b = cf.solve_lp(p)
    assert np.array_equal(a.x, b.x)


def test_bad_problem_shapes_rejected():
    with pytest.raises(ValueError):
        cf.LpProblem(c=[1.0, 1.0], a=[[1.0]], rel=["<="], b=[1.0])
    with pytest.raises(ValueError):
        cf.LpProblem(c=[1.0], a=[[1.0]], rel=["<>"], b=[1.0])
    with pytest.raises(ValueError):
        cf.LpProblem(c=[1.0], a=[[1.0]], rel=["<="], b=[1.0],
                     lower=[2.0], upper=[1.0])


def test_lp_text_dump(tmp_path):
    p = cf.LpProblem(c=[1.0, 0.5], a=[[1.0, 1.0]], rel=["<="], b=[2.0],
                     upper=[1.0, np.inf], var_names=["U", "r0"])
    text = cf.lp_to_text(p, name="demo")
    for token in ["Minimize", "Subject To", "Bounds", "End", "U", "r0"]:
        assert token in text
    path = tmp_path / "p.lp"
    cf.dump_lp(p, path)
    assert path.read_text().startswith("\\ lp")
