import pytest

from combdrive import CombParams, kernels


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    kernels.warmup()


@pytest.fixture(scope="session")
def ref_params():
    """Reference configuration used throughout the sweeps."""
    return CombParams(zeta1=0.2, zeta2=0.4, zeta3=0.6, zeta4=0.8,
                      L=1.0, l1=1.0, l2=4.0, l3=5.0, alpha=2.0, n=8)
