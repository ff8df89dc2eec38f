"""Plan-level semantics and structural validation."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import PO_PLAN, purchase_order_instance
from wspkit.core import (
    ADA,
    AtLeast,
    AtMost,
    AuthorisationFunction,
    BoD,
    Instance,
    InvariantError,
    SUAL,
    SoD,
    WL,
    is_authorised,
    is_eligible,
    is_ui,
    is_valid,
    violated_constraints,
)


def test_purchase_order_plan_is_valid(po_instance):
    assert is_valid(PO_PLAN, po_instance)


def test_purchase_order_plan_variant_valid(po_instance):
    # same plan with the last step moved to another authorised user
    assert is_valid((0, 1, 0, 3, 2, 5), po_instance)


def test_authorisation_rejects_wrong_user(po_instance):
    assert not is_authorised((0, 1, 0, 3, 2, 0), po_instance.auth)
    assert not is_valid((0, 1, 0, 3, 2, 0), po_instance)


def test_eligibility_per_constraint():
    assert is_eligible((0, 1), SoD(0, 1))
    assert not is_eligible((1, 1), SoD(0, 1))
    assert is_eligible((2, 2), BoD(0, 1))
    assert not is_eligible((2, 3), BoD(0, 1))
    assert is_eligible((0, 0, 1), AtMost(2, (0, 1, 2)))
    assert not is_eligible((0, 1, 2), AtMost(2, (0, 1, 2)))
    assert is_eligible((0, 1, 2), AtLeast(3, (0, 1, 2)))
    assert not is_eligible((0, 0, 2), AtLeast(3, (0, 1, 2)))


def test_sual_semantics():
    c = SUAL((0, 1, 2), 1, frozenset({5}))
    assert is_eligible((5, 5, 5), c)        # one user, a super user
    assert not is_eligible((4, 4, 4), c)    # one user, not a super user
    assert is_eligible((3, 4, 3), c)        # two users exceed h=1: unrestricted


def test_wl_semantics():
    c = WL((0, 1), (frozenset({0, 1}), frozenset({2})))
    assert is_eligible((0, 1), c)
    assert is_eligible((2, 2), c)
    assert not is_eligible((0, 2), c)


def test_ada_semantics():
    c = ADA(0, 1, frozenset({0}), frozenset({1}))
    assert is_eligible((0, 1), c)       # triggered, requirement met
    assert not is_eligible((0, 2), c)   # triggered, requirement broken
    assert is_eligible((2, 2), c)       # not triggered


def test_is_ui_split():
    assert is_ui(SoD(0, 1))
    assert is_ui(BoD(0, 1))
    assert is_ui(AtMost(1, (0, 1)))
    assert is_ui(AtLeast(1, (0, 1)))
    assert not is_ui(SUAL((0, 1), 1, frozenset({0})))
    assert not is_ui(WL((0, 1), (frozenset({0}),)))
    assert not is_ui(ADA(0, 1, frozenset({0}), frozenset({1})))


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_ui_constraints_ignore_user_identity(data):
    """Renaming users never changes a user-independent constraint's verdict."""
    k = data.draw(st.integers(2, 6))
    n = data.draw(st.integers(2, 6))
    plan = tuple(data.draw(st.integers(0, n - 1)) for _ in range(k))
    perm = data.draw(st.permutations(list(range(n))))
    renamed = tuple(perm[u] for u in plan)
    s1, s2 = data.draw(st.permutations(list(range(k))))[:2]
    scope = tuple(sorted(data.draw(
        st.sets(st.integers(0, k - 1), min_size=2, max_size=k))))
    r = data.draw(st.integers(1, len(scope)))
    for c in (SoD(s1, s2), BoD(s1, s2), AtMost(r, scope), AtLeast(r, scope)):
        assert is_eligible(plan, c) == is_eligible(renamed, c)


def test_nonui_constraints_can_depend_on_identity():
    """For each catalogue kind outside the user-independent set there are two
    plans with the same grouping but different verdicts."""
    sual = SUAL((0, 1), 1, frozenset({0}))
    assert is_eligible((0, 0), sual) and not is_eligible((1, 1), sual)
    wl = WL((0, 1), (frozenset({0}), frozenset({1})))
    assert is_eligible((0, 0), wl) and not is_eligible((2, 2), wl)
    ada = ADA(0, 1, frozenset({0}), frozenset({1}))
    assert is_eligible((0, 1), ada) and not is_eligible((0, 2), ada)


def test_constraint_validation_errors():
    with pytest.raises(InvariantError):
        SoD(1, 1)
    with pytest.raises(InvariantError):
        BoD(2, 2)
    with pytest.raises(InvariantError):
        AtMost(1, (3,))  # single-step counting scope is vacuous
    with pytest.raises(InvariantError):
        AtLeast(1, (3,))
    with pytest.raises(InvariantError):
        AtMost(0, (0, 1))
    with pytest.raises(InvariantError):
        AtMost(3, (0, 1))
    with pytest.raises(InvariantError):
        AtMost(1, (0, 0, 1))  # repeated scope step
    with pytest.raises(InvariantError):
        SUAL((0, 1), 2, frozenset({0}))  # h must stay below |scope|
    with pytest.raises(InvariantError):
        SUAL((0, 1), 0, frozenset({0}))
    with pytest.raises(InvariantError):
        SUAL((0, 1), 1, frozenset())
    with pytest.raises(InvariantError):
        WL((0, 1), (frozenset({0, 1}), frozenset({1, 2})))  # overlapping teams
    with pytest.raises(InvariantError):
        WL((0, 1), ())
    with pytest.raises(InvariantError):
        ADA(0, 0, frozenset({0}), frozenset({1}))
    with pytest.raises(InvariantError):
        ADA(0, 1, frozenset(), frozenset({1}))


def test_instance_validation_errors():
    auth = AuthorisationFunction.from_lists([[0], [1]], 2)
    with pytest.raises(InvariantError):
        Instance(2, 2, auth, (SoD(0, 2),))  # step out of range
    with pytest.raises(InvariantError):
        Instance(2, 2, auth, (SUAL((0, 1), 1, frozenset({5})),))  # user out of range
    with pytest.raises(InvariantError):
        Instance(3, 2, auth, ())  # k mismatch
    with pytest.raises(InvariantError):
        Instance(2, 3, auth, ())  # n mismatch


def test_authorisation_function_helpers():
    a = AuthorisationFunction.from_lists([[2, 0], [1]], 3)
    assert a.users(0) == (0, 2)
    assert a.allows(0, 2) and not a.allows(0, 1)
    assert a.to_lists() == [[0, 2], [1]]
    assert AuthorisationFunction.total(2, 3).users(1) == (0, 1, 2)
    with pytest.raises(InvariantError):
        AuthorisationFunction(2, (0b100,))  # user 2 outside [0, 2)


def test_empty_authorised_set_is_legal():
    a = AuthorisationFunction.from_lists([[], [0]], 2)
    assert a.users(0) == ()
    assert not is_authorised((0, 0), a)


def test_plan_shape_errors(po_instance):
    with pytest.raises(InvariantError):
        is_valid((0, 1, 0), po_instance)  # too short
    with pytest.raises(InvariantError):
        is_valid((0, 1, 0, 3, 2, 9), po_instance)  # user out of range


def test_violated_constraints_reporting(po_instance):
    bad = (0, 0, 0, 3, 2, 4)  # breaks SoD(0, 1) only
    broken = violated_constraints(bad, po_instance)
    assert broken == [SoD(0, 1)]


def test_instance_constraint_partition():
    inst = purchase_order_instance()
    assert len(inst.ui_constraints()) == 5
    assert inst.nonui_constraints() == ()
