"""Packaged ground-truth SEMs and the alternative DAGs they are compared against."""

from __future__ import annotations

import warnings

from .graph import Dag
from .scm import DiscreteOnSquare, ExpOnSquare, InvGammaOnSquare, PointMass, ScmSpec, UniformOnLambda

CHAIN = Dag.parse("p=3; edges=1->2,2->3")
# risk-equal alternative to the chain when only node 1 is non-Gaussian
CHAIN_ALT = Dag.parse("p=3; edges=1->2,1->3,3->2")
COMPLETE = Dag.parse("p=3; edges=1->2,1->3,2->3")
# same skeleton as COMPLETE with 2 and 3 swapped; keeps node 1 a source
COMPLETE_ALT = Dag.parse("p=3; edges=1->2,1->3,3->2")

_LAMBDA_1 = UniformOnLambda(0.2, 0.4)
_T3 = InvGammaOnSquare(1.5, 1.5)


def study1() -> ScmSpec:
    """Chain 1->2->3; node 1 uniform-scale mixture, node 2 N(0, 0.25), node 3 t_3."""
    return ScmSpec(
        CHAIN,
        {(0, 1): 2.5, (1, 2): 1.8},
        (_LAMBDA_1, PointMass.from_variance(0.25), _T3),
        name="study1",
    )


def study2() -> ScmSpec:
    """As study 1 with node 3 Gaussian N(0, 0.16); only node 1 is non-Gaussian."""
    return ScmSpec(
        CHAIN,
        {(0, 1): 2.5, (1, 2): 1.8},
        (_LAMBDA_1, PointMass.from_variance(0.25), PointMass.from_variance(0.16)),
        name="study2",
    )


def study3() -> ScmSpec:
    """Complete DAG with 1->3 (2.2) added to study 2."""
    return ScmSpec(
        COMPLETE,
        {(0, 1): 2.5, (1, 2): 1.8, (0, 2): 2.2},
        (_LAMBDA_1, PointMass.from_variance(0.25), PointMass.from_variance(0.16)),
        name="study3",
    )


def chain_unit_gaussian() -> ScmSpec:
    """Chain with non-Gaussian node 1 and unit-variance Gaussian nodes 2 and 3."""
    return ScmSpec(
        CHAIN,
        {(0, 1): 2.5, (1, 2): 1.8},
        (_LAMBDA_1, PointMass(1.0), PointMass(1.0)),
        name="chain_unit_gaussian",
    )


def complete_unit_gaussian() -> ScmSpec:
    """Complete DAG with non-Gaussian node 1 and unit-variance Gaussian nodes 2 and 3."""
    return ScmSpec(
        COMPLETE,
        {(0, 1): 2.5, (1, 2): 1.8, (0, 2): 2.2},
        (_LAMBDA_1, PointMass(1.0), PointMass(1.0)),
        name="complete_unit_gaussian",
    )


def four_node() -> ScmSpec:
    """Four nodes: 3->2 (1.5), 3->1 (-3.2), node 4 isolated; nodes 2-4 non-Gaussian.

    Node 3 has t_2 errors, whose scale has infinite second moment.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        t2 = InvGammaOnSquare(1.0, 1.0)
    return ScmSpec(
        Dag.parse("p=4; edges=3->2,3->1"),
        {(2, 1): 1.5, (2, 0): -3.2},
        (
            PointMass.from_variance(2.8),
            ExpOnSquare(2.0),
            t2,
            DiscreteOnSquare((1.0, 4.0), (0.75, 0.25)),
        ),
        name="four_node",
    )


def twelve_node_dag() -> Dag:
    return Dag.parse(
        "p=12; edges=8->4,4->3,3->2,2->1,8->7,2->6,8->6,1->5,2->5,"
        "8->9,6->7,7->9,6->9,5->12,5->11,11->10,9->10,12->11"
    )


TWELVE_NODE_NONGAUSSIAN = frozenset({0, 1, 2, 4, 9})


def single_nongaussian_middle(dag_text: str) -> ScmSpec:
    """Three-node DAG with only node 2 non-Gaussian and unequal Gaussian variances."""
    dag = Dag.parse(dag_text)
    coeffs = {e: c for e, c in zip(dag.edges(), (1.5, -1.2))}
    return ScmSpec(dag, coeffs, (PointMass(1.0), ExpOnSquare(2.0), PointMass.from_variance(0.5)), name=dag_text)


MIDDLE_NONGAUSSIAN_DAGS = ("p=3; edges=1->2,2->3", "p=3; edges=1->2,3->2", "p=3; edges=2->1,2->3")

PACKAGED = {
    "study1": study1,
    "study2": study2,
    "study3": study3,
    "chain_unit_gaussian": chain_unit_gaussian,
    "complete_unit_gaussian": complete_unit_gaussian,
    "four_node": four_node,
}

# the five specs on which risk identities and class agreement are checked
CORE_SPECS = ("study1", "study2", "study3", "chain_unit_gaussian", "complete_unit_gaussian")


def get_spec(name: str) -> ScmSpec:
    try:
        return PACKAGED[name]()
    except KeyError:
        raise ValueError(f"unknown spec {name!r}; choose from {sorted(PACKAGED)}") from None
