"""Shared meshes, decompositions and ensembles (dense eigh is the slow part)."""

import pytest

from sobolab import (EnsembleSpec, build, constant_potential, decompose,
                     generate_ensemble)

TWO_PI = "6.283185307179586"


@pytest.fixture(scope="session")
def torus2():
    return build(f"torus:n=2,res=32,L={TWO_PI}")


@pytest.fixture(scope="session")
def torus2_dec0(torus2):
    return decompose(torus2, constant_potential(torus2, 0.0))


@pytest.fixture(scope="session")
def torus2_dec1(torus2):
    return decompose(torus2, constant_potential(torus2, 1.0))


@pytest.fixture(scope="session")
def torus2_unit():
    return build("torus:n=2,res=32,L=1")


@pytest.fixture(scope="session")
def torus2_unit_dec1(torus2_unit):
    return decompose(torus2_unit, constant_potential(torus2_unit, 1.0))


@pytest.fixture(scope="session")
def torus2_fit():
    return build(f"torus:n=2,res=56,L={TWO_PI}")


@pytest.fixture(scope="session")
def torus2_fit_dec1(torus2_fit):
    return decompose(torus2_fit, constant_potential(torus2_fit, 1.0))


@pytest.fixture(scope="session")
def torus3():
    return build(f"torus:n=3,res=14,L={TWO_PI}")


@pytest.fixture(scope="session")
def torus3_dec1(torus3):
    return decompose(torus3, constant_potential(torus3, 1.0))


@pytest.fixture(scope="session")
def torus3_coarse():
    return build(f"torus:n=3,res=10,L={TWO_PI}")


@pytest.fixture(scope="session")
def torus3_coarse_dec1(torus3_coarse):
    return decompose(torus3_coarse, constant_potential(torus3_coarse, 1.0))


@pytest.fixture(scope="session")
def sphere3():
    return build("sphere:r=1,subdiv=3")


@pytest.fixture(scope="session")
def sphere3_dec0(sphere3):
    return decompose(sphere3, constant_potential(sphere3, 0.0))


@pytest.fixture(scope="session")
def sphere3_dec1(sphere3):
    return decompose(sphere3, constant_potential(sphere3, 1.0))


@pytest.fixture(scope="session")
def torus2_members(torus2, torus2_dec1):
    spec = EnsembleSpec(seed=42, size=200, generator="mixed")
    return generate_ensemble(torus2, spec, dec=torus2_dec1)


@pytest.fixture(scope="session")
def torus3_members(torus3, torus3_dec1):
    spec = EnsembleSpec(seed=42, size=200, generator="mixed")
    return generate_ensemble(torus3, spec, dec=torus3_dec1)


@pytest.fixture(scope="session")
def sphere3_members(sphere3, sphere3_dec1):
    spec = EnsembleSpec(seed=42, size=100, generator="mixed")
    return generate_ensemble(sphere3, spec, dec=sphere3_dec1)
