import itertools
import os
from pathlib import Path

import pytest

import tnnforge as tf

DATA = Path(os.environ.get("FORGE_DATA_DIR", Path(__file__).resolve().parents[2] / "data"))


def as_int(bits):
    return sum(b << i for i, b in enumerate(bits))


def test_exact_popcount_counts_bits():
    pc = tf.build_exact_pc(6)
    assert pc.input_count == 6
    assert pc.output_count == tf.popcount_width(6) == 3
    for bits in itertools.product([0, 1], repeat=6):
        assert as_int(pc.evaluate(list(bits))) == sum(bits)


def test_truncation_error_and_area():
    exact = tf.build_exact_pc(8)
    trunc = tf.build_truncated_pc(8, 1)
    err = tf.arithmetic_error(trunc, exact)
    assert err["mae"] == 0.5
    assert err["wcae"] == 1
    assert tf.area(trunc) < tf.area(exact) == 63


def test_netlist_json_round_trip():
    pc = tf.build_exact_pc(5)
    assert tf.Netlist.from_json(pc.to_json()) == pc
    assert "endmodule" in pc.to_verilog()


def test_cgp_respects_tau():
    net, meta = tf.cgp_search(tf.build_exact_pc(5), tau=0.5, iterations=500, rng_seed=3)
    assert meta["mae"] <= 0.5
    assert tf.area(net) <= tf.area(tf.build_exact_pc(5))
    assert tf.arithmetic_error(net, tf.build_exact_pc(5))["mae"] == meta["mae"]


def test_exact_pcc_is_error_free():
    pcc = tf.assemble_pcc(tf.build_exact_pc(4), tf.build_exact_pc(3))
    assert pcc.n_pos == 4 and pcc.n_neg == 3
    report = tf.pcc_error(pcc)
    assert report["mde"] == 0.0
    assert report["wcde"] == 0


def test_fig2_model_inference_matches_netlist():
    model = tf.load_model(str(DATA / "fig2" / "model.json"))
    net = tf.generate_exact_netlist(model)
    for bits in itertools.product([0, 1], repeat=3):
        onehot = net.evaluate(list(bits))
        assert onehot.index(1) == tf.infer_exact(model, list(bits))


def test_errors_map_to_python_exceptions():
    with pytest.raises(tf.ValidationError):
        tf.build_truncated_pc(4, 3)
    with pytest.raises(tf.IoError):
        tf.load_model(str(DATA / "does_not_exist.json"))
    assert issubclass(tf.IoError, tf.ForgeError)
