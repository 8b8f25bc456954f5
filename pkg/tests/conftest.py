import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite",
    derandomize=True,
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

# The fifteen p-values of the 1995 Benjamini-Hochberg multiple-endpoint
# example (myocardial infarction study), in the published order.
BH95_PVALUES = (
    0.0001, 0.0004, 0.0019, 0.0095, 0.0201, 0.0278, 0.0298, 0.0344,
    0.0459, 0.3240, 0.4262, 0.5719, 0.6528, 0.7590, 1.000,
)


@pytest.fixture(scope="session")
def bh95():
    return np.array(BH95_PVALUES)
