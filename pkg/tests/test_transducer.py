import json
import random

import pytest
from hypothesis import given, strategies as st

from helpers import elements, points
from thompsonv.cantor import point, random_point, words_of_length
from thompsonv.transducer import (
    DegenerateOutput,
    DepthExceeded,
    Transducer,
    apply_point,
    apply_word,
    compose,
    cone_image,
    conjugate_v_element,
    identity_machine,
    is_identity,
    letter_swap,
    load_machine,
    minimize,
    paper_h,
    parity_machine,
    preimage_point,
    state_images,
    synchronizing_level,
)
from thompsonv.velement import (
    X0,
    X1,
    apply_point as v_apply,
    compose as v_compose,
    deferment,
    is_order_preserving,
    support,
)

H = paper_h()
Z = "1100"


def z_prime():
    out, state = apply_word(H, Z + "00")
    assert out.endswith("010") and state == "q0"
    return out[:-3]


def test_apply_word_examples():
    assert apply_word(H, "11") == ("11", "q2")
    assert apply_word(H, "00", "q1") == ("010", "q0")
    for q in H.states:
        assert apply_word(H, "", q) == ("", q)


def test_apply_point_examples():
    assert apply_point(H, point("", "0")) == point("", "10")
    assert apply_point(H, point("", "1")) == point("", "1")
    zp = z_prime()
    assert apply_point(H, point(Z + "00", "0")).in_cone(zp + "010")


@given(points(), st.integers(0, 12))
def test_point_image_extends_word_image(k, n):
    out, _ = apply_word(H, k.prefix(n))
    assert apply_point(H, k).in_cone(out)


def test_degenerate_output_detected():
    T = Transducer.from_table("a", {("a", "0"): ("", "a"), ("a", "1"): ("1", "a")})
    with pytest.raises(DegenerateOutput):
        apply_point(T, point("1", "0"))


def test_synchronizing_levels():
    assert synchronizing_level(H, 10) == 2
    assert synchronizing_level(identity_machine(), 5) == 0
    assert synchronizing_level(parity_machine(), 30) is None


def test_composition():
    assert is_identity(compose(H, H), 12)
    assert not is_identity(H, 12)
    assert is_identity(compose(letter_swap(), letter_swap()), 8)
    T = compose(H, identity_machine())
    for n in range(9):
        for w in words_of_length(n):
            assert apply_word(T, w)[0] == apply_word(H, w)[0]


def test_minimize_merges_equivalent_states():
    T = Transducer.from_table("a", {
        ("a", "0"): ("0", "b"), ("a", "1"): ("1", "a"),
        ("b", "0"): ("0", "a"), ("b", "1"): ("1", "b"),
    })
    assert len(minimize(T).states) == 1


def test_json_round_trip_and_builtins():
    doc = json.loads(H.to_json())
    assert {t["state"] for t in doc["transitions"]} == {"q0", "q1", "q2"}
    again = Transducer.from_json(H.to_json())
    for w in words_of_length(6):
        assert apply_word(again, w) == apply_word(H, w)
    assert load_machine("paper-h") == H
    with pytest.raises(ValueError):
        Transducer.from_table("a", {("a", "0"): ("0", "a")})


def test_state_images():
    im = state_images(H)
    assert im["q0"] == ("",) and im["q2"] == ("",)
    assert im["q1"] == ("0", "11")


def test_preimage_examples():
    zp = z_prime()
    assert preimage_point(H, point(zp + "010", "0")) == point(Z + "00", "10")
    assert cone_image(H, Z + "00") == (zp + "010",)


@given(points())
def test_preimage_inverts(k):
    assert preimage_point(H, apply_point(H, k)) == k
    # h has order two
    assert apply_point(H, apply_point(H, k)) == k


def test_example_element_a():
    a = deferment(X0, Z + "00")
    assert v_apply(a, point(Z + "00", "10")) == point(Z + "0001", "10")
    ah = conjugate_v_element(H, a)
    zp = z_prime()
    assert support(ah).cone_closure() == (zp + "010",)
    assert not is_order_preserving(ah)
    # the least point of the support cone is moved
    m = point(zp + "010", "0")
    assert v_apply(ah, m) != m


def test_identity_machine_conjugation_is_trivial():
    for g in (X0, X1, deferment(X0, "01")):
        assert conjugate_v_element(identity_machine(), g) == g


def test_non_synchronizing_conjugation_is_inconclusive():
    with pytest.raises(DepthExceeded):
        conjugate_v_element(parity_machine(), X0, depth_bound=6)


@pytest.mark.parametrize("g", [X0, X1, deferment(X0, "1100"), deferment(X1, "01")])
def test_conjugation_equivariance(g):
    gh = conjugate_v_element(H, g)
    rng = random.Random(str(g))
    for _ in range(200):
        k = random_point(rng, 8, 5)
        assert apply_point(H, v_apply(g, k)) == v_apply(gh, apply_point(H, k))


@given(elements(max_depth=4), elements(max_depth=4))
def test_conjugation_is_an_action(f, g):
    assert conjugate_v_element(H, v_compose(f, g), samples=8) == \
        v_compose(conjugate_v_element(H, f, samples=8), conjugate_v_element(H, g, samples=8))
