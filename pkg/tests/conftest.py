import pytest

from knaplp.instance import KnapsackInstance, Sense


def running(sense: str = "packing", c=(1, 1), d=(1, 1)) -> KnapsackInstance:
    return KnapsackInstance(Sense(sense), [[2, 3]], [4], c, d)


@pytest.fixture
def packing_example():
    return running("packing")


@pytest.fixture
def covering_example():
    return running("covering")
