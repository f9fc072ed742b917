from __future__ import annotations

import pytest

from modgrow import reference_modules as rm
from modgrow.backends import SyntheticBackend
from modgrow.registry import ExecutionRegistry, builtin_library, register
from modgrow.scene import ImageHandle, SceneGraph, SceneObject


@pytest.fixture()
def backend():
    return SyntheticBackend()


@pytest.fixture()
def builtin_lib():
    return builtin_library()


@pytest.fixture()
def full_lib(builtin_lib):
    lib = builtin_lib
    for name in rm.FIXTURE_SOURCES:
        lib = register(lib, rm.fixture_record(name))
    return lib


@pytest.fixture()
def full_registry(full_lib):
    return ExecutionRegistry(full_lib)


def make_scene(*objects, width=640, height=480):
    return SceneGraph(width=width, height=height, objects=tuple(objects))


def obj(oid, name, box, depth=0.5, tags=(), **attributes):
    return SceneObject(
        id=oid, name=name, box=tuple(box), attributes=dict(attributes), depth=depth,
        tags=tuple(tags),
    )


@pytest.fixture()
def coat_scene():
    return make_scene(
        obj("c", "coat", (200, 150, 380, 330), thickness="thick", color="black"),
    )


@pytest.fixture()
def coat_image(coat_scene):
    return ImageHandle.of_scene(coat_scene)


@pytest.fixture()
def purse_scene():
    # purse strictly left of the person
    return make_scene(
        obj("p", "person", (300, 100, 420, 400), depth=0.5),
        obj("u", "purse", (80, 250, 160, 330), depth=0.4, color="brown"),
    )
