import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from universal_efc.panel import ExportPanel
from universal_efc.taxonomy import parse_taxonomy

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def tree():
    return parse_taxonomy()


def make_panel(values, countries=None, activities=None, years=None):
    values = np.asarray(values, dtype=float)
    c, a, y = values.shape
    return ExportPanel(countries or [f"C{i:02d}" for i in range(c)],
                       activities or [f"A{j:02d}" for j in range(a)],
                       years or list(range(2000, 2000 + y)), values)


def write_text(path, text):
    path.write_text(text, encoding="utf-8")
    return path
