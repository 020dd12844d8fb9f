import pytest

from hardydirac import PotentialPair, parse_pair
from hardydirac.verify import standard_pair_gallery


@pytest.fixture(scope="session")
def coulomb_pair() -> PotentialPair:
    return parse_pair("coulomb:1", "coulomb:1")


@pytest.fixture(scope="session")
def shell_coulomb_pair() -> PotentialPair:
    return parse_pair("shell:1@1", "coulomb:1")


@pytest.fixture(scope="session")
def pair_gallery():
    return standard_pair_gallery()
