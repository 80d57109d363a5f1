import numpy as np
import pytest

from absfw.tape import (
    TapeBuilder,
    EvaluationError,
    evaluate,
    abs_linearize,
    directional_fd,
    tape_to_text,
    tape_from_text,
)
from absfw.plmodel import delta_eval, eval_pl



class TestEvaluate:
    def test_three_kink_max_at_zero(self, three_kink_max):
        rec = evaluate(three_kink_max, [0.0])
        np.testing.assert_allclose(rec.z, [1.0, 2.0, 3.0])
        assert rec.y == pytest.approx(1.0)

    def test_three_kink_max_at_minus_half(self, three_kink_max):
        rec = evaluate(three_kink_max, [-0.5])
        np.testing.assert_allclose(rec.z, [0.5, 0.0, 0.5])
        assert rec.y == pytest.approx(0.0)

    def test_three_kink_matches_max(self, three_kink_max):
        for x in np.linspace(-3, 3, 41):
            rec = evaluate(three_kink_max, [x])
            assert rec.y == pytest.approx(max(0.0, x, 2 * x + 1), abs=1e-14)

    def test_pure_smooth_square(self, square_tape):
        rec = evaluate(square_tape, [3.0])
        assert square_tape.num_switch == 0
        assert rec.y == pytest.approx(9.0)

    def test_abs_values_match_switching(self, three_kink_max):
        rec = evaluate(three_kink_max, [0.7])
        for node, slot in three_kink_max.switch_index.items():
            assert rec.values[node] == pytest.approx(abs(rec.z[slot]))

    def test_mifflin_value(self, mifflin2_tape):
        assert evaluate(mifflin2_tape, [-1.8, 1.8]).y == pytest.approx(
            1.8 + 2 * 5.48 + 1.75 * 5.48
        )

    def test_overflow_reports_node(self):
        tb = TapeBuilder(1)
        (x,) = tb.inputs()
        tape = tb.build(tb.exp(tb.square(tb.exp(x))))
        with pytest.raises(EvaluationError):
            evaluate(tape, [100.0])


class TestAbsLinearize:
    def test_abs_x_structure(self, abs_tape):
        form = abs_linearize(abs_tape, [1.0])
        assert form.s == 1
        np.testing.assert_allclose(form.c, [1.0])
        np.testing.assert_allclose(form.Z, [[1.0]])
        fbar = evaluate(abs_tape, [1.0]).y
        assert delta_eval(form, fbar, [0.5]) == pytest.approx(0.5)
        assert delta_eval(form, fbar, [-3.0]) == pytest.approx(1.0)

    def test_mifflin_delta(self, mifflin2_tape):
        xbar = np.array([-1.8, 1.8])
        form = abs_linearize(mifflin2_tape, xbar)
        fbar = evaluate(mifflin2_tape, xbar).y
        assert delta_eval(form, fbar, [0.1, 0.0]) == pytest.approx(-1.45)

    def test_smooth_square_gradient(self, square_tape):
        form = abs_linearize(square_tape, [3.0])
        fbar = evaluate(square_tape, [3.0]).y
        assert delta_eval(form, fbar, [1.0]) == pytest.approx(6.0)
        np.testing.assert_allclose(form.a, [6.0])

    def test_strict_lower_triangularity(self, three_kink_max):
        form = abs_linearize(three_kink_max, [0.3])
        assert np.all(np.triu(form.M) == 0)
        assert np.all(np.triu(form.L) == 0)

    def test_consistency_at_zero(self, mifflin2_tape):
        for xbar in ([0.2, -1.4], [-1.8, 1.8], [1.0, 0.0]):
            fbar = evaluate(mifflin2_tape, xbar).y
            form = abs_linearize(mifflin2_tape, xbar)
            value, _ = eval_pl(form, np.zeros(2))
            assert abs(value - fbar) <= 1e-12 * (1 + abs(fbar))

    def test_value_row_example(self, three_kink_max):
        # y = 0.25*(3x+1+|z3|): slope 0.75 on dx plus 0.25 on |z3|
        form = abs_linearize(three_kink_max, [0.0])
        np.testing.assert_allclose(form.a, [0.75])
        np.testing.assert_allclose(form.babs, [0.0, 0.0, 0.25])
        np.testing.assert_allclose(form.c, [1.0, 1.0, 0.0])

    def test_model_matches_function_on_pl_tape(self, three_kink_max):
        # the tape is already piecewise linear, so the model is exact
        form = abs_linearize(three_kink_max, [0.25])
        fbar = evaluate(three_kink_max, [0.25]).y
        for dx in np.linspace(-2, 2, 17):
            exact = evaluate(three_kink_max, [0.25 + dx]).y
            assert delta_eval(form, fbar, [dx]) == pytest.approx(exact - fbar, abs=1e-12)


class TestDirectionalFd:
    def test_abs_at_kink_right(self, abs_tape):
        assert directional_fd(abs_tape, [0.0], [1.0], 1e-6) == pytest.approx(1.0)

    def test_abs_at_kink_left(self, abs_tape):
        assert directional_fd(abs_tape, [0.0], [-1.0], 1e-6) == pytest.approx(1.0)

    def test_square_slope(self, square_tape):
        assert directional_fd(square_tape, [3.0], [1.0], 1e-6) == pytest.approx(6.0, abs=1e-5)

    def test_rejects_bad_step(self, abs_tape):
        with pytest.raises(ValueError):
            directional_fd(abs_tape, [0.0], [1.0], 0.0)


class TestSmoothCollapse:
    def test_gradient_matches_central_differences(self, rng):
        from absfw.randgen import random_tape
        from absfw.plmodel import eval_pl

        checked = 0
        for _ in range(12):
            tape = random_tape(rng, 3, n_ops=14, p_abs=0.0)
            assert tape.num_switch == 0
            xbar = rng.uniform(-1, 1, size=3)
            form = abs_linearize(tape, xbar)
            h = 1e-6
            for k in range(3):
                e = np.zeros(3)
                e[k] = h
                fd = (evaluate(tape, xbar + e).y - evaluate(tape, xbar - e).y) / (2 * h)
                assert form.a[k] == pytest.approx(fd, rel=1e-6, abs=1e-6)
                checked += 1
            # the increment is exactly the gradient pairing when s = 0
            dx = rng.uniform(-0.5, 0.5, size=3)
            assert eval_pl(form, dx)[0] - eval_pl(form, np.zeros(3))[0] == pytest.approx(
                form.a @ dx, rel=1e-12, abs=1e-12
            )
        assert checked == 36


class TestSerialization:
    def test_round_trip_three_kink(self, three_kink_max):
        text = tape_to_text(three_kink_max)
        back = tape_from_text(text)
        assert back.num_inputs == three_kink_max.num_inputs
        assert back.num_switch == three_kink_max.num_switch
        for x in (-1.3, 0.0, 0.7772, 1 / 3):
            assert evaluate(back, [x]).y == evaluate(three_kink_max, [x]).y

    def test_round_trip_bit_exact_constants(self):
        tb = TapeBuilder(1)
        (x,) = tb.inputs()
        tape = tb.build(0.1 * x + (2.0 / 3.0))
        back = tape_from_text(tape_to_text(tape))
        consts = [nd.value for nd in back.nodes if nd.op in ("const", "scale")]
        assert 0.1 in consts and 2.0 / 3.0 in consts

    def test_header(self, mifflin2_tape):
        head = tape_to_text(mifflin2_tape).splitlines()[0]
        assert head == "n=2 s=1"

    def test_output_must_be_last_node(self):
        from absfw.tape import TapeError

        tb = TapeBuilder(1)
        (x,) = tb.inputs()
        y = tb.square(x)
        tb.abs(x)  # dead node recorded after the output
        with pytest.raises(TapeError):
            tape_to_text(tb.build(y))

    def test_malformed_text_rejected(self):
        from absfw.tape import TapeError

        with pytest.raises(TapeError):
            tape_from_text("not a header\n0 input 0\n")
        with pytest.raises(TapeError):
            tape_from_text("n=1 s=0\n0 frobnicate 0\n")


class TestBuilderHelpers:
    def test_max_identity(self):
        tb = TapeBuilder(2)
        u, v = tb.inputs()
        tape = tb.build(tb.max_(u, v))
        for a, b in [(-2.0, 5.0), (3.0, 1.5), (0.0, 0.0)]:
            assert evaluate(tape, [a, b]).y == pytest.approx(max(a, b))

    def test_min_identity(self):
        tb = TapeBuilder(2)
        u, v = tb.inputs()
        tape = tb.build(tb.min_(u, v))
        assert evaluate(tape, [4.0, -1.0]).y == pytest.approx(-1.0)

    def test_max_list_balanced(self):
        tb = TapeBuilder(3)
        xs = tb.inputs()
        tape = tb.build(tb.max_list([tb.square(x) for x in xs]))
        assert evaluate(tape, [1.0, -3.0, 2.0]).y == pytest.approx(9.0)

    def test_three_kink_from_max_helpers(self):
        tb = TapeBuilder(1)
        (x,) = tb.inputs()
        tape = tb.build(tb.max_(tb.max_(x, 2.0 * x + 1.0), tb.const(0.0)))
        for xv in np.linspace(-2, 1, 13):
            assert evaluate(tape, [xv]).y == pytest.approx(max(0.0, xv, 2 * xv + 1))
