from fractions import Fraction

import numpy as np
import pytest

from symword.matcore import geometric_mean, inverse, matrix_power, random_pd
from symword.reducer import Equation, EquationError, reduce_fully
from symword.solver import (
    CLOSED_FORM_ABA,
    CLOSED_FORM_POWER,
    NEWTON,
    ReductionRequired,
    SolveOptions,
    dispersion,
    fixed_point_map,
    fixed_point_scale,
    linearize,
    newton_solve,
    solve,
    solve_aba,
    solve_power,
    split_outer_a,
    uniqueness_probe,
    unvec,
    vec,
    verify,
)
from symword.wordlang import WordExpr, evaluate, parse_word, shape

from conftest import random_symmetric_word

F = Fraction


def rel(x, y):
    return np.linalg.norm(np.asarray(x) - np.asarray(y)) / np.linalg.norm(np.asarray(y))


def test_options_validated():
    for bad in ({"tol": 0}, {"max_iters": 0}, {"starts": 0}, {"max_halvings": -1}):
        with pytest.raises(ValueError):
            SolveOptions(**bad)


def test_vec_is_column_major():
    x = np.arange(4.0).reshape(2, 2)
    assert list(vec(x)) == [0.0, 2.0, 1.0, 3.0]
    assert np.array_equal(unvec(vec(x), 2), x)


class TestSolvePower:
    def test_square(self):
        assert np.allclose(solve_power(2, np.diag([4.0, 9.0])).array, np.diag([2.0, 3.0]))

    def test_inverse(self):
        p = random_pd(4, 3, 10.0)
        assert rel(solve_power(-1, p).array, np.linalg.inv(p.array)) <= 1e-12

    def test_three_halves(self):
        p = random_pd(5, 4, 30.0)
        a = solve_power(F(3, 2), p)
        assert verify(Equation(parse_word("A^(3/2)"), np.eye(5), p), a) <= 1e-10

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            solve_power(0, np.eye(2))


class TestSolveABA:
    def test_identity_b(self):
        p = random_pd(4, 5, 20.0)
        assert rel(solve_aba(np.eye(4), p).array, matrix_power(p, 0.5).array) <= 1e-12

    def test_scalar(self):
        assert solve_aba([[2.0]], [[8.0]]).array[0, 0] == pytest.approx(2.0, rel=1e-14)

    @pytest.mark.parametrize("n", range(1, 9))
    def test_random_against_geometric_mean(self, n):
        b, p = random_pd(n, (n, 0), 50.0), random_pd(n, (n, 1), 50.0)
        a = solve_aba(b, p)
        assert verify(Equation(parse_word("ABA"), b, p), a) <= 1e-10
        assert rel(a.array, geometric_mean(inverse(b), p).array) <= 1e-9

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            solve_aba(np.eye(2), np.eye(3))


class TestLinearize:
    def test_aba_system(self, rng):
        a0, b, p = random_pd(3, 1).array, random_pd(3, 2), random_pd(3, 3)
        sys = linearize(parse_word("ABA"), a0, b, p)
        d = rng.standard_normal((3, 3))
        d = d + d.T
        bb = b.array
        assert rel(unvec(sys.operator @ vec(d), 3), a0 @ bb @ d + d @ bb @ a0) <= 1e-12
        assert rel(np.asarray(sys.constant), a0 @ bb @ a0) <= 1e-12
        assert rel(unvec(sys.rhs, 3), p.array - a0 @ bb @ a0) <= 1e-12

    def test_square(self, rng):
        a0 = random_pd(4, 7).array
        d = rng.standard_normal((4, 4))
        sys = linearize(parse_word("A^2"), a0, np.eye(4))
        assert rel(unvec(sys.operator @ vec(d), 4), a0 @ d + d @ a0) <= 1e-12

    def test_fractional_exponent_rejected(self):
        with pytest.raises(ReductionRequired, match="reduc"):
            linearize(parse_word("A^(1/2) B A^(1/2)"), np.eye(2), np.eye(2))

    def test_finite_difference_order(self, rng):
        for i in range(20):
            w = random_symmetric_word(rng, max_class=3, max_den=1, a_positive=True, max_num=3)
            if not w.letters("A"):
                continue
            n = int(rng.integers(2, 5))
            a0, b = random_pd(n, (i, 0), 3.0), random_pd(n, (i, 1), 3.0)
            d = rng.standard_normal((n, n))
            d = (d + d.T) / np.linalg.norm(d)
            kd = unvec(linearize(w, a0, b).operator @ vec(d), n)
            base = np.asarray(evaluate(w, a0, b))

            def remainder(h):
                moved = np.asarray(evaluate(w, a0.array + h * d, b))
                return np.linalg.norm((moved - base) / h - kd)

            assert 5 <= remainder(1e-4) / remainder(1e-5) <= 20


def scalar_solution(w, b, p):
    sh = shape(w)
    return (p * b ** (-float(sh.s_b_total))) ** (1 / float(sh.s_a))


class TestNewton:
    def test_matches_closed_form(self):
        for i in range(10):
            n = 2 + i % 5
            b, p = random_pd(n, (i, 0), 10.0), random_pd(n, (i, 1), 10.0)
            rep = newton_solve(Equation(parse_word("ABA"), b, p), SolveOptions(tol=1e-13))
            assert rep.converged and rep.method == NEWTON
            assert rel(rep.solution.array, solve_aba(b, p).array) <= 1e-8
            assert rep.residual_history[-1] == rep.relative_residual

    def test_hard_word(self):
        b, p = random_pd(4, 1, 10.0), random_pd(4, 2, 10.0)
        eq = Equation(parse_word("A^2 B A B A^2"), b, p)
        rep = newton_solve(eq, SolveOptions(tol=1e-12))
        assert rep.converged and rep.iterations <= 100
        assert verify(eq, rep.solution) <= 1e-8

    def test_diagonal_oracle(self, rng):
        w = parse_word("A^2 B A^3 B^-1 A^3 B A^2")
        bd, pd_ = rng.uniform(0.5, 3.0, 4), rng.uniform(0.5, 3.0, 4)
        rep = newton_solve(Equation(w, np.diag(bd), np.diag(pd_)), SolveOptions(tol=1e-13))
        a = rep.solution.array
        assert np.allclose(a, np.diag(np.diag(a)), atol=1e-12)
        assert np.allclose(np.diag(a), scalar_solution(w, bd, pd_), rtol=1e-10, atol=0)

    def test_requires_reduction(self):
        with pytest.raises(ReductionRequired):
            newton_solve(Equation(parse_word("A^(1/2) B A^(1/2)"), np.eye(2), np.eye(2)))

    def test_real_closure(self):
        b, p = random_pd(4, 8, 10.0, real=True), random_pd(4, 9, 10.0, real=True)
        a = newton_solve(Equation(parse_word("A^2 B A B A^2"), b, p)).solution.array
        assert not np.iscomplexobj(a) or np.abs(a.imag).max() <= 1e-10 * np.linalg.norm(a, 2)

    def test_failure_is_reported(self):
        b, p = random_pd(3, 1, 10.0), random_pd(3, 2, 10.0)
        rep = newton_solve(Equation(parse_word("A^2 B A B A^2"), b, p), SolveOptions(max_iters=1, starts=2))
        assert not rep.converged and rep.starts_used == 2
        assert rep.best_iterate is not None


class TestSolve:
    def test_half_power_word(self):
        b, p = random_pd(4, 3, 10.0), random_pd(4, 4, 10.0)
        eq = Equation(parse_word("A^(1/2) B A B A^(1/2)"), b, p)
        rep = solve(eq)
        assert rep.converged and rep.method == CLOSED_FORM_ABA and len(rep.trail) == 2
        assert rep.relative_residual <= 1e-8 and verify(eq, rep.solution) == rep.relative_residual

    def test_pure_power(self):
        p = random_pd(3, 5)
        rep = solve(Equation(parse_word("A^3"), np.eye(3), p))
        assert rep.method == CLOSED_FORM_POWER
        assert rel(rep.solution.array, matrix_power(p, 1 / 3).array) <= 1e-12

    def test_newton_dispatch(self):
        eq = Equation(parse_word("B A^2 B A B A^2 B"), random_pd(3, 6, 10.0), random_pd(3, 7, 10.0))
        rep = solve(eq)
        assert rep.method == NEWTON and rep.converged and rep.relative_residual <= 1e-10

    def test_scalar_oracle(self, rng):
        for _ in range(50):
            w = random_symmetric_word(rng, a_positive=True)
            if not w.letters("A"):
                continue
            b, p = rng.uniform(0.2, 5.0, 2)
            rep = solve(Equation(w, [[b]], [[p]]))
            assert rep.solution.array[0, 0] == pytest.approx(scalar_solution(w, b, p), rel=1e-12)

    def test_reduced_and_original_agree(self):
        b, p = random_pd(3, 11, 10.0), random_pd(3, 12, 10.0)
        eq = Equation(parse_word("B^2 A^(1/2) B A B A^2 B A B A^(1/2) B^2"), b, p)
        reduced, _ = reduce_fully(eq)
        direct = newton_solve(reduced, SolveOptions(tol=1e-12))
        full = solve(eq)
        assert direct.relative_residual <= 1e-8 and full.relative_residual <= 1e-8

    def test_mixed_sign_rejected(self):
        with pytest.raises(EquationError, match="A-positive"):
            solve(Equation(parse_word("A^-1 B A^2 B A^-1"), np.eye(2), np.eye(2)))


class TestVerify:
    def test_exact(self):
        b, p = random_pd(3, 1), random_pd(3, 2)
        assert verify(Equation(parse_word("ABA"), b, p), solve_aba(b, p)) <= 1e-12

    def test_perturbed(self):
        b, p = random_pd(3, 1), random_pd(3, 2)
        a = solve_aba(b, p).array + 1e-3 * np.eye(3)
        assert verify(Equation(parse_word("ABA"), b, p), a) > 1e-6

    def test_identity_word(self):
        assert verify(Equation(parse_word("A^2"), np.eye(2), np.eye(2)), np.eye(2)) == 0.0


class TestUniqueness:
    def test_aba(self):
        rep = uniqueness_probe(Equation(parse_word("ABA"), random_pd(3, 1, 10.0), random_pd(3, 2, 10.0)))
        assert rep.n_converged == 8 and rep.dispersion <= 1e-6

    def test_hard_word(self):
        rep = uniqueness_probe(Equation(parse_word("A^2 B A B A^2"), random_pd(3, 3, 10.0), random_pd(3, 4, 10.0)))
        assert rep.n_converged >= 1 and rep.dispersion <= 1e-6

    def test_scalar(self):
        # starts differ only by where each run crosses tol
        eq = Equation(parse_word("A^2 B A B A^2"), [[2.0]], [[3.0]])
        rep = uniqueness_probe(eq, SolveOptions(tol=1e-14))
        assert rep.n_converged == 8 and rep.dispersion <= 1e-13

    def test_dispersion_helper(self):
        assert dispersion([np.eye(2)]) == 0.0
        assert dispersion([np.eye(2), 2 * np.eye(2)]) == pytest.approx(0.5)


class TestFixedPoint:
    def test_split(self):
        assert split_outer_a(parse_word("A^2 B A B A^2")) == parse_word("A B A B A")
        assert split_outer_a(parse_word("A^3")) == parse_word("A")
        with pytest.raises(ValueError):
            split_outer_a(parse_word("B A B"))

    @pytest.mark.parametrize("k", [1, 10, 100])
    def test_scalar_is_one(self, k):
        eq = Equation(parse_word("A^2 B A B A^2"), [[3.0]], [[0.7]])
        for x in (0.0, 0.3, 1.0):
            assert fixed_point_map([[x]], eq, k).array[0, 0] == pytest.approx(1.0, abs=1e-14)

    def test_bound(self, rng):
        eq = Equation(parse_word("A B^-1 A^2 B^-1 A"), random_pd(4, 1, 5.0), random_pd(4, 2, 5.0))
        for _ in range(20):
            x = random_pd(4, int(rng.integers(10**6)), 10.0).array
            x = x / np.linalg.eigvalsh(x)[-1] * rng.uniform(0, 1)
            f = fixed_point_map(x, eq, 10).array
            w = np.linalg.eigvalsh(f)
            assert w[0] > 0 and w[-1] <= 1 + 1e-12

    def test_identity_cross_check(self):
        eq = Equation(parse_word("A A A"), np.eye(3), np.eye(3))
        k = 1
        y = np.eye(3) * (1 + 1 / k)
        s_inv = np.linalg.inv(np.asarray(evaluate(split_outer_a(eq.word), y, eq.B)))
        scale = fixed_point_scale(np.eye(3), eq, k)
        direct = matrix_power(s_inv, 0.5).array / scale
        via_mean = geometric_mean(eq.P, s_inv).array / scale
        got = fixed_point_map(np.eye(3), eq, k).array
        assert rel(got, direct) <= 1e-12 and rel(got, via_mean) <= 1e-12

    def test_random_matches_geometric_mean(self, rng):
        eq = Equation(parse_word("A^2 B A^(1/2) B A^2"), random_pd(4, 5, 5.0), random_pd(4, 6, 5.0))
        x = random_pd(4, 7, 10.0).array
        x = x / np.linalg.eigvalsh(x)[-1]
        y = x + np.eye(4) / 10
        s_inv = np.linalg.inv(np.asarray(evaluate(split_outer_a(eq.word), y, eq.B)))
        want = geometric_mean(eq.P, (s_inv + s_inv.conj().T) / 2).array / fixed_point_scale(x, eq, 10)
        assert rel(fixed_point_map(x, eq, 10).array, want) <= 1e-10

    def test_precondition(self):
        eq = Equation(parse_word("ABA"), np.eye(2), np.eye(2))
        with pytest.raises(ValueError):
            fixed_point_map(2 * np.eye(2), eq, 1)
        with pytest.raises(ValueError):
            fixed_point_map(np.diag([1.0, -0.1]), eq, 1)
        with pytest.raises(ValueError):
            fixed_point_map(np.eye(2), eq, 0)


def test_word_expr_unused_guard():
    with pytest.raises(EquationError):
        Equation(WordExpr(), np.eye(2), np.eye(2))
