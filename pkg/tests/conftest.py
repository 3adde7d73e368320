import pytest

from nctopos.fincat import omega_presheaf
from nctopos.digraph import demo_classifier, digraph_site, loops_presheaf
from nctopos.topol import enumerate_nc_lawvere


@pytest.fixture(scope="session")
def site():
    return digraph_site()


@pytest.fixture(scope="session")
def omega(site):
    return omega_presheaf(site)


@pytest.fixture(scope="session")
def loops(site):
    return loops_presheaf(site)


@pytest.fixture(scope="session")
def hp():
    """The fused demo classifier (13 elements, 4 tops at E)."""
    return demo_classifier("coordinate")


@pytest.fixture(scope="session")
def hp_unfused():
    return demo_classifier("none")


@pytest.fixture(scope="session")
def nclts(hp):
    return enumerate_nc_lawvere(hp)
