import random
import shutil

import pytest

from entailment_parser import parse_entailment

HAVE_Z3 = shutil.which('z3') is not None
Z3_BACKEND = "smtlib:z3 -in -smt2"

requires_z3 = pytest.mark.skipif(not HAVE_Z3, reason="z3 not on PATH")

SEC2_TEXT = 'c < e : lseg(a,b) * lseg(a,c) * next(c,d) * lseg(d,e) |- lseg(b,c) * lseg(c,e)'


@pytest.fixture
def sec2():
    return parse_entailment(SEC2_TEXT)


@pytest.fixture
def rng():
    return random.Random(20240917)


@pytest.fixture(params=['internal', pytest.param(Z3_BACKEND, marks=[requires_z3, pytest.mark.smtlib])])
def backend(request):
    return request.param
