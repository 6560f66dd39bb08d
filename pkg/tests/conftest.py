import os
import sys
from fractions import Fraction

import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from src.services.cohomology_service import CohomologyService
from src.services.form_service import FormService
from src.services.graph_service import GraphService
from src.services.harmonic_service import HarmonicService
from src.services.local_pullback_service import LocalPullbackService
from src.services.quotient_service import QuotientService
from src.services.tropical_service import TropicalService
from src.utils import graph_builders
from src.utils.random_corpus import make_rng

ORDER = 3


@pytest.fixture
def graph_service():
    return GraphService()


@pytest.fixture
def form_service():
    return FormService(ORDER)


@pytest.fixture
def harmonic_service(graph_service, form_service):
    return HarmonicService(ORDER, graph_service, form_service)


@pytest.fixture
def cohomology_service(graph_service, form_service, harmonic_service):
    return CohomologyService(ORDER, graph_service, form_service, harmonic_service)


@pytest.fixture
def quotient_service(graph_service, harmonic_service, cohomology_service):
    return QuotientService(ORDER, graph_service, harmonic_service, cohomology_service)


@pytest.fixture
def tropical_service(form_service, harmonic_service):
    return TropicalService(ORDER, form_service, harmonic_service)


@pytest.fixture
def local_service(form_service, tropical_service):
    return LocalPullbackService(ORDER, form_service, tropical_service)


@pytest.fixture
def rng():
    return make_rng(20240607)


# golden graphs


@pytest.fixture
def boundary_segment():
    return graph_builders.segment(1)


@pytest.fixture
def closed_segment():
    return graph_builders.segment(1, boundary=False, name="closed")


@pytest.fixture
def circle():
    return graph_builders.cycle(2, [1, 1])


@pytest.fixture
def theta():
    return graph_builders.theta()


@pytest.fixture
def tripod():
    return graph_builders.star(3)


@pytest.fixture
def weighted_circle():
    return graph_builders.cycle(3, [1, Fraction(1, 2), 2], [1, 2, 3], name="wcycle")
