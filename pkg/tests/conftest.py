import pytest

from reggecx.assembly import Assembler
from reggecx.mesh import generate_mesh

MESHES = {
    "tet": ("tet", None),
    "two_tet": ("two_tet", None),
    "box2": ("box", (2, 2, 2)),
    "tunnel": ("tunnel", None),
    "cavity": ("cavity", None),
    "box3": ("box", (3, 3, 3)),
}

_cache = {}


def get_mesh(name):
    if name not in _cache:
        kind, params = MESHES[name]
        _cache[name] = generate_mesh(kind, params)
    return _cache[name]


_asm = {}


def get_assembler(name):
    if name not in _asm:
        _asm[name] = Assembler(get_mesh(name))
    return _asm[name]


@pytest.fixture(params=["tet", "two_tet", "box2"])
def small(request):
    return get_assembler(request.param)


@pytest.fixture(params=["tet", "two_tet", "box2", "tunnel", "cavity"])
def any_mesh(request):
    return get_assembler(request.param)
