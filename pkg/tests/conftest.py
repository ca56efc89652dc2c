import pytest

from pdmplab import models


def small_morris_lecar(K: int = 2) -> models.MorrisLecarSpec:
    """Gently-rated channel parameters used across the suite."""
    return models.MorrisLecarSpec(
        C=1.0, I=0.5, g1=1.0, g2=1.0, g3=0.5,
        V1=0.4, V2=0.6, V3=0.2, c1=0.02, c2=0.02,
        Vp1=0.3, Vp2=0.5, Vpp1=1.0, Vpp2=1.0, K=K)


ZOO_SPECS = {
    "storage": models.StorageSpec(1.0, 1.0),
    "bandit": models.BanditSpec(p=0.7, q=0.3, g=0.5),
    "tcp": models.TcpSpec(1.0),
    "aimd": models.AimdSpec(rate_kind="constant", rate_value=1.0, nu_kind="uniform"),
    "switched-linear": models.SwitchedLinearSpec(alpha=0.5, r=1.0),
    "dim1": models.Dim1Spec(alpha0=1.0, alpha1=2.0, lambda0=0.8, lambda1=1.3),
    "planar-rotation": models.PlanarRotationSpec(lambda0=1.0, lambda1=2.0),
    "telegraph": models.TelegraphSpec(a=1.0, b=2.0),
    "morris-lecar": small_morris_lecar(),
}


@pytest.fixture(scope="session")
def zoo():
    return {name: models.build_model(spec) for name, spec in ZOO_SPECS.items()}
