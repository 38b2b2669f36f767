"""Composition of low-dimensional discrete distributions."""

from ._core import (
    CpmError,
    DominanceError,
    EliminationResult,
    EliminationStats,
    Factor,
    IpfpRun,
    ParseError,
    Registry,
    Sequence,
    anticipate,
    compose_left,
    compose_right,
    compose_sequence_left,
    compose_sequence_right,
    eliminate_variable,
    eliminate_variables,
    gen_nonperfect_fixture,
    gen_perfect_fixture,
    ipfp_run,
    is_consistent,
    is_perfect,
    make_binary_chain,
    marginal,
    marginalize_out,
    max_abs_diff,
    oracle_joint,
    parse_model,
    read_model,
    serialize_model,
)

__all__ = [name for name in dir() if not name.startswith("_")]
