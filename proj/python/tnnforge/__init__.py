"""Python access to the forge circuit toolkit."""

import json

from . import _core
from ._core import (
    ForgeError,
    IoError,
    Netlist,
    PccCircuit,
    ResourceError,
    TnnModel,
    ValidationError,
    area,
    assemble_pcc,
    build_comparator,
    build_exact_pc,
    build_truncated_pc,
    generate_exact_netlist,
    infer_exact,
    load_model,
    model_from_json,
    popcount_width,
    set_threads,
)


def arithmetic_error(approx, exact, evaluator="AUTO"):
    return json.loads(_core.arithmetic_error(approx, exact, evaluator))


def cgp_search(seed, tau, metric="MAE", iterations=10000, rng_seed=1):
    netlist, meta = _core.cgp_search(seed, tau, metric, iterations, rng_seed)
    return netlist, json.loads(meta)


def pcc_error(pcc, samples=0, seed=1):
    return json.loads(_core.pcc_error(pcc, samples, seed))


def run_pipeline(config_path, out_dir=""):
    return json.loads(_core.run_pipeline(str(config_path), str(out_dir)))
