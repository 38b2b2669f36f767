import pathlib

import numpy as np
import pytest

import cpm

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def binary_registry(n):
    reg = cpm.Registry()
    for i in range(n):
        reg.add(f"X{i + 1}", 2)
    return reg


def test_compose_right_chain():
    reg = binary_registry(3)
    p1 = cpm.Factor([0, 1], [0.1, 0.2, 0.3, 0.4], reg)
    p2 = cpm.Factor([1, 2], [0.2, 0.3, 0.25, 0.25], reg)
    joint = cpm.compose_right(p1, p2)
    assert joint.scope == [0, 1, 2]
    np.testing.assert_allclose(
        joint.values.ravel(), [0.04, 0.06, 0.1, 0.1, 0.12, 0.18, 0.2, 0.2], atol=1e-15
    )
    assert cpm.max_abs_diff(cpm.marginal(joint, [0, 1]), p1) <= 1e-12


def test_factor_accepts_any_variable_order():
    reg = binary_registry(2)
    reg2 = cpm.Registry()
    reg2.add("A", 2)
    reg2.add("B", 3)
    f = cpm.Factor([1, 0], np.array([[0.05, 0.10], [0.15, 0.20], [0.25, 0.25]]), reg2)
    assert f.scope == [0, 1]
    assert f.values.shape == (2, 3)
    assert f.values[1, 2] == 0.25
    assert len(reg) == 2


def test_dominance_error_carries_step():
    reg = binary_registry(3)
    seq = cpm.Sequence(reg)
    seq.add(cpm.Factor([0, 1], [0.25] * 4, reg))
    seq.add(cpm.Factor([1, 2], [0.5, 0.5, 0.0, 0.0], reg))
    with pytest.raises(cpm.DominanceError) as info:
        cpm.compose_sequence_right(seq)
    assert info.value.step == 2
    assert info.value.kind == "DominanceViolation"


def test_eliminate_matches_oracle_marginal():
    seq = cpm.read_model(str(FIXTURES / "x1_elimination.cpm"))
    result = cpm.eliminate_variable(seq, "X1", keep_residual=True)
    truth = cpm.marginalize_out(cpm.oracle_joint(seq), 0)
    assert cpm.max_abs_diff(cpm.compose_sequence_right(result.reduced), truth) <= 1e-10
    assert result.stats.touched == [0, 2]
    assert result.residual is not None


def test_perfect_fixture_and_ipfp():
    seq = cpm.gen_perfect_fixture(seed=5, num_vars=5)
    report = cpm.is_perfect(seq, method="both")
    assert report["verdict"] is True
    run = cpm.ipfp_run(seq)
    assert run.converged and run.cycles_used == 1
    assert cpm.max_abs_diff(run.first_cycle, cpm.compose_sequence_left(seq)) <= 1e-10

    broken = cpm.gen_nonperfect_fixture(seed=5, num_vars=5)
    assert cpm.is_perfect(broken)["verdict"] is False


def test_round_trip_and_parse_error():
    seq = cpm.gen_perfect_fixture(seed=2)
    text = cpm.serialize_model(seq)
    assert cpm.serialize_model(cpm.parse_model(text)) == text
    with pytest.raises(cpm.ParseError) as info:
        cpm.parse_model("cpm 1\nvar X1 2\ndist P X1\n0.5 abc\nend\n")
    assert info.value.line == 4
    assert isinstance(info.value, cpm.CpmError)


def test_chain_joint_is_refused():
    chain = cpm.make_binary_chain(26)
    with pytest.raises(cpm.CpmError) as info:
        cpm.compose_sequence_right(chain)
    assert info.value.kind == "TooLarge"
    assert cpm.eliminate_variable(chain, "X13").stats.peak_entries <= 8
