import json
import math

import pytest

from lambline.errors import InvalidArgumentError
from lambline.materials import (
    ELECTRODES,
    ElectrodeMaterial,
    MaterialSet,
    builtin_electrode,
    builtin_linbo3,
    effective_longitudinal_velocity,
    electrode_from_json,
    longitudinal_velocity,
    material_set_from_json,
    material_to_json,
    shear_velocity,
    stiffen,
)


def test_builtin_constants():
    short, open_ = builtin_linbo3()
    assert short.c11 == 2.03e11
    assert short.c44 == 0.60e11
    assert short.rho == 4700.0
    assert open_.c11 == 2.19e11
    assert open_.c44 == 0.95e11
    assert open_.rho == 4700.0
    assert short.c11 > short.c44
    assert open_.c11 > open_.c44


def test_longitudinal_velocity_short_matches_tabulated():
    short, _ = builtin_linbo3()
    assert longitudinal_velocity(short) == pytest.approx(6572.0, abs=1.0)


def test_longitudinal_velocity_open_computed_vs_override():
    _, open_ = builtin_linbo3()
    # computed value from the constants differs from the tabulated 6795
    assert longitudinal_velocity(open_) == pytest.approx(math.sqrt(2.19e11 / 4700.0), rel=1e-12)
    assert longitudinal_velocity(open_) == pytest.approx(6826.1, abs=0.2)
    assert effective_longitudinal_velocity(open_) == 6795.0


def test_velocity_scaling():
    short, _ = builtin_linbo3()
    scaled = MaterialSet("x", c11=4 * short.c11, c44=4 * short.c44, rho=short.rho)
    assert longitudinal_velocity(scaled) == pytest.approx(2 * longitudinal_velocity(short), rel=1e-12)
    denser = MaterialSet("y", c11=short.c11, c44=short.c44, rho=4 * short.rho)
    assert shear_velocity(denser) == pytest.approx(0.5 * shear_velocity(short), rel=1e-12)


def test_shear_velocities():
    short, open_ = builtin_linbo3()
    assert shear_velocity(short) == pytest.approx(math.sqrt(0.60e11 / 4700.0), rel=1e-12)
    assert shear_velocity(short) == pytest.approx(3573.0, abs=0.2)
    assert shear_velocity(open_) == pytest.approx(4495.9, abs=0.2)


def test_stiffening_speeds_waves():
    short, open_ = builtin_linbo3()
    assert longitudinal_velocity(open_) >= longitudinal_velocity(short)
    assert shear_velocity(open_) >= shear_velocity(short)


def test_stiffen_reproduces_open_c44():
    # e15 and eps11^S of LiNbO3: the stiffened shear constant should land on
    # the built-in open-set value within 1%
    c44_s = stiffen(0.60e11, 3.7, 3.92e-10)
    assert c44_s == pytest.approx(0.95e11, rel=0.01)


def test_stiffen_properties():
    assert stiffen(1e11, 0.0, 1e-10) == 1e11
    vals = [stiffen(1e11, e, 3e-10) for e in (0.0, 0.5, 1.0, 2.0, 4.0)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    # even in e_eff, always >= input
    assert stiffen(1e11, -2.0, 3e-10) == stiffen(1e11, 2.0, 3e-10)
    assert stiffen(1e11, 1.0, 1e-9) >= 1e11


def test_stiffen_rejects_bad_permittivity():
    with pytest.raises(InvalidArgumentError):
        stiffen(1e11, 1.0, 0.0)
    with pytest.raises(InvalidArgumentError):
        stiffen(1e11, 1.0, -1e-10)


def test_material_invariants_enforced():
    with pytest.raises(InvalidArgumentError):
        MaterialSet("bad", c11=1e10, c44=2e10, rho=1000.0)  # c44 > c11
    with pytest.raises(InvalidArgumentError):
        MaterialSet("bad", c11=2e10, c44=1e10, rho=-1.0)
    with pytest.raises(InvalidArgumentError):
        ElectrodeMaterial("bad", rho=2700.0, v_s=6000.0, v_l=3000.0, resistivity=1e-8)


def test_serialization_bit_exact():
    short, open_ = builtin_linbo3()
    for m in (short, open_):
        rt = material_set_from_json(material_to_json(m))
        assert rt == m
        # bit-exact floats through JSON
        for field in ("c11", "c44", "rho"):
            assert getattr(rt, field).hex() == getattr(m, field).hex()
    for e in ELECTRODES.values():
        assert electrode_from_json(material_to_json(e)) == e


def test_builtin_electrodes():
    al = builtin_electrode("al")
    assert al.rho == 2700.0
    assert al.resistivity == 2.65e-8
    assert al.resistivity_scale == 3.0
    assert al.sheet_resistivity == pytest.approx(7.95e-8, rel=1e-12)
    au = builtin_electrode("Au")
    assert au.rho == 19300.0
    with pytest.raises(InvalidArgumentError):
        builtin_electrode("unobtainium")


def test_json_roundtrip_preserves_override():
    _, open_ = builtin_linbo3()
    rt = material_set_from_json(material_to_json(open_))
    assert rt.v_l_override == 6795.0
    assert json.loads(material_to_json(open_))["v_l_override"] == 6795.0
