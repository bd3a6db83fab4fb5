import pytest

from randsum import distributions as dist
from randsum import index_laws as il
from randsum.scheme import Constant, DoubleArrayScheme, IndexRule, RateRule, Theorem4


def make_scheme(shape=dist.Normal(), variances=Constant(1.0), index=il.Geometric(0.1),
                alpha=0.0, mode=Theorem4(), **kw):
    """Scheme with a fixed index law (or an IndexRule) and constant alpha."""
    rule = index if isinstance(index, IndexRule) else IndexRule("fixed", fixed=index)
    alpha = alpha if isinstance(alpha, RateRule) else RateRule(float(alpha))
    return DoubleArrayScheme(shape, variances, rule, alpha, mode, **kw)


@pytest.fixture
def scheme_factory():
    return make_scheme
