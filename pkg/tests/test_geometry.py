import json

import pytest

from bergman.errors import DegenerateCurvatureError, TruncationInsufficientError
from bergman.geometry import (
    GeometryJet,
    flat_potential,
    fs_product_potential,
    identity_suite,
    jet_from_potential,
    lambda_scalars,
    parse_potential,
    potential_to_dict,
    random_potential,
    validate_jet,
)
from bergman.scalars import ExactScalar, rat
from bergman.series import Series


def allzero(t):
    if isinstance(t, ExactScalar):
        return t.is_zero()
    return all(allzero(x) for x in t)


def test_potential_parsing_roundtrip():
    data = {
        "z1 zb1": [{"pi_pow": 1, "re": "1", "im": "0"}],
        "z1^2 zb2": [{"pi_pow": 2, "re": "1/3", "im": "-1/2"}],
        "z2 zb1^2": [{"pi_pow": 2, "re": "1/3", "im": "1/2"}],
    }
    phi = parse_potential(data, 2)
    assert phi.coeff((1, 0, 1, 0)) == ExactScalar.pi(1)
    assert phi.coeff((2, 0, 0, 1)) == ExactScalar.rational("1/3", "-1/2", 2)
    again = parse_potential(potential_to_dict(phi), 2)
    assert again == phi
    with pytest.raises(ValueError):
        parse_potential({"w1": "1"}, 2)
    with pytest.raises(ValueError):
        parse_potential({"z3": "1"}, 2)


def test_hessian_normalization_enforced():
    phi = parse_potential({"z1 zb1": [{"pi_pow": 1, "re": "2", "im": "0"}]}, 1)
    with pytest.raises(DegenerateCurvatureError):
        jet_from_potential(phi, n=1, q=0)
    # wrong sign pattern for the declared signature
    with pytest.raises(DegenerateCurvatureError):
        jet_from_potential(fs_product_potential(2, 1), n=2, q=2)
    # non-real potential
    bad = parse_potential({"z1 zb1": [{"pi_pow": 1, "re": "1", "im": "0"}],
                           "z1^2 zb1": [{"pi_pow": 2, "re": "1", "im": "0"}]}, 1)
    with pytest.raises(DegenerateCurvatureError):
        jet_from_potential(bad, n=1, q=0)


def test_truncation_guard():
    phi = flat_potential(1, 0).truncate(3)
    with pytest.raises(TruncationInsufficientError):
        jet_from_potential(phi, n=1, q=0)


def test_signature_index_bounds():
    with pytest.raises(ValueError):
        jet_from_potential(flat_potential(1, 1), n=1, q=2)
    with pytest.raises(ValueError):
        jet_from_potential(flat_potential(1, 0), n=1, q=-1)


def test_flat_jet_is_flat(jet_cache):
    jet = jet_cache("flat", 2, 1)
    for name in ("dRL1", "dRL2", "RTX", "RB", "Tas", "covTas", "dTas",
                 "nablaXJ", "nablaBJ", "nablaB2J", "SB", "trRT10"):
        assert allzero(getattr(jet, name)), name
    assert jet.rX.is_zero()
    assert validate_jet(jet).ok
    assert identity_suite(jet).ok


def test_fs_scalar_curvature(jet_cache):
    jet = jet_cache("fs", 1, 0)
    assert jet.rX == ExactScalar.pi(1, 8)
    # the sign-flipped factor carries the same induced metric
    assert jet_cache("fs", 1, 1).rX == ExactScalar.pi(1, 8)
    assert jet_cache("fs", 2, 1).rX == ExactScalar.pi(1, 16)


@pytest.mark.parametrize("kind,n,q,seed", [
    ("fs", 1, 0, 0), ("fs", 2, 1, 0), ("fs", 3, 2, 0),
    ("random", 1, 0, 21), ("random", 1, 1, 22),
    ("random", 2, 0, 23), ("random", 2, 1, 24), ("random", 2, 2, 25),
])
def test_pipeline_jets_validate(jet_cache, kind, n, q, seed):
    jet = jet_cache(kind, n, q, seed)
    rep = validate_jet(jet)
    assert rep.ok, rep.failures()
    rep = identity_suite(jet)
    assert rep.ok, rep.failures()


def test_definite_signature_is_torsion_free(jet_cache):
    for n, q, seed in [(1, 0, 31), (2, 0, 32), (2, 2, 33), (1, 1, 34)]:
        jet = jet_cache("random", n, q, seed)
        assert jet.is_torsion_free()
    # a mixed-signature random jet generically is not
    assert not jet_cache("random", 2, 1, 7).is_torsion_free()


def test_mixed_signature_jets_have_live_tensors(jet_cache):
    """The cross-check batch must actually exercise every formula block."""
    jet = jet_cache("random", 2, 1, 7)
    assert not allzero(jet.Tas)
    assert not allzero(jet.dTas)
    assert not allzero(jet.dRL1)
    assert not allzero(jet.dRL2)
    assert not allzero(jet.nablaBJ)
    assert jet.nablaBJ != jet.nablaXJ


def test_corrupted_jet_is_rejected(jet_cache):
    jet = jet_cache("random", 2, 1, 7)
    body = jet.to_json()
    broken = json.loads(json.dumps(body, default=str))
    # symmetrize one curvature slot pair: breaks the antisymmetry checks
    broken["RTX"][0][1] = broken["RTX"][1][0]
    bad = GeometryJet.from_json(broken)
    rep = validate_jet(bad)
    assert not rep.ok
    names = [name for name, _ in rep.failures()]
    assert any("riemann" in name for name in names)


def test_jet_json_roundtrip(jet_cache):
    jet = jet_cache("random", 2, 1, 13)
    clone = GeometryJet.from_json(json.loads(json.dumps(jet.to_json(), default=str)))
    assert clone.jet_id == jet.jet_id
    assert clone.RTX == jet.RTX
    assert clone.dRL2 == jet.dRL2
    assert clone.RE == jet.RE
    assert clone.rX == jet.rX


def test_lambda_scalars_vanish_without_torsion(jet_cache):
    lam = lambda_scalars(jet_cache("fs", 2, 1))
    assert lam.contracted_divergence.is_zero()
    assert lam.double_contraction.is_zero()
    # the 2-form aggregate still carries curvature
    assert not all(v.is_zero() for row in lam.p_form for v in row)


def test_lambda_scalars_nontrivial_on_torsion(jet_cache):
    lam = lambda_scalars(jet_cache("random", 2, 1, 7))
    assert not lam.contracted_divergence.is_zero()
    assert not lam.double_contraction.is_zero()
    assert lam.contracted_divergence.is_real()
    assert lam.double_contraction.is_real()


def test_structure_derivative_consistency(jet_cache):
    """First curvature derivatives are the structure-map derivatives in disguise."""
    jet = jet_cache("random", 2, 1, 7)
    dim = 2 * jet.n
    m2pi = ExactScalar.rational(0, -2, 1)
    for k in range(dim):
        for a in range(dim):
            for b in range(dim):
                assert jet.dRL1[k][a][b] == m2pi * jet.nablaXJ[k][a][b]


def test_random_potential_is_seed_stable():
    a = random_potential(2, 1, 99)
    b = random_potential(2, 1, 99)
    c = random_potential(2, 1, 100)
    assert a == b
    assert a != c
    conj = a.conj()
    assert conj == a  # reality of the generated potential


def test_aux_twist_enters_curvature(jet_cache):
    jet = jet_cache("random", 2, 1, 7, rk_e=2, twist=("1/2", "-1/3"))
    assert jet.rk_e == 2
    # the first adapted direction is conjugated (q = 1), flipping the 2-form sign
    m = jet.RE[0][2]
    assert m[0][0] == ExactScalar.pi(1, "-1/2")
    assert m[1][1] == ExactScalar.pi(1, "-1/2")
    assert m[0][1].is_zero()
    m = jet.RE[1][3]
    assert m[0][0] == ExactScalar.pi(1, "-1/3")
    assert validate_jet(jet).ok


def test_series_basics():
    s = Series(2, 3, {(1, 0): rat(2), (0, 2): rat(1)})
    t = Series.var(2, 3, 0)
    assert (s * t).coeff((2, 0)) == rat(2)
    assert s.diff(1).coeff((0, 1)) == rat(2)
    u = s.compose([Series.var(2, 3, 1), Series.var(2, 3, 0)])
    assert u.coeff((0, 1)) == rat(2)
    assert u.coeff((2, 0)) == rat(1)
