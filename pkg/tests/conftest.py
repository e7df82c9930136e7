import pytest

from scrollres import DEFAULT_PRIME
from scrollres.plane_curve import construct_nodal_octic, sample_smooth_points
from scrollres.resolution import SliceContext, betti_table
from scrollres.scroll import CoxPoly, canonical_coordinates, pencil_from_node


@pytest.fixture(scope="session")
def model():
    return construct_nodal_octic(DEFAULT_PRIME, seed=1)


@pytest.fixture(scope="session")
def sample_pool(model):
    return sample_smooth_points(model, 200, seed=11)


@pytest.fixture(scope="session")
def coords(model):
    return canonical_coordinates(model, pencil_from_node(model))


@pytest.fixture(scope="session")
def slice_ctx(model, coords):
    return SliceContext(model, coords)


@pytest.fixture(scope="session")
def betti_data(slice_ctx):
    table, steps = betti_table(slice_ctx, collect_steps=True)
    return table, steps


@pytest.fixture(scope="session")
def generator_polys(betti_data):
    _, steps = betti_data
    p = DEFAULT_PRIME
    return [
        CoxPoly(p, {mono: c for (_z, mono), c in g.items()})
        for g in steps[0].gens
    ]


@pytest.fixture(scope="session")
def nonic_chain():
    from scrollres.pipeline import build_chain

    return build_chain(DEFAULT_PRIME, 1)


@pytest.fixture(scope="session")
def nonic_k3(nonic_chain):
    from scrollres.k3_syzygy import linear_syzygy_space

    basis = linear_syzygy_space(nonic_chain.steps, DEFAULT_PRIME)
    return {"basis": basis, "gens": nonic_chain.generator_polys[:6]}


@pytest.fixture(scope="session")
def nonic_net(nonic_chain):
    from scrollres.quartic_net import quartic_net, residual_image

    img = residual_image(
        nonic_chain.model, nonic_chain.coords, nonic_chain.ctx.points(0, 60)
    )
    return quartic_net(img, DEFAULT_PRIME)


@pytest.fixture(scope="session")
def gamma_samples(nonic_k3, nonic_net):
    from scrollres.k3_syzygy import pencil_member, syzygy_rank, syzygy_scheme, surface_from_syzygy
    from scrollres.quartic_net import image_quartic

    samples = []
    for lam, mu in [(1, m) for m in range(16)] + [(0, 1)]:
        member = pencil_member(nonic_k3["basis"], lam, mu)
        if syzygy_rank(member) != 4:
            continue
        surface = surface_from_syzygy(syzygy_scheme(member, nonic_k3["gens"]))
        _fvec, coords3 = image_quartic(surface, nonic_net)
        samples.append(((lam, mu), tuple(int(v) for v in coords3)))
    return samples
