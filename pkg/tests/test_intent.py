import pytest

from cartassist.clients import MockResponder
from cartassist.intent import General, Navigate, ProductInfo, classify_intent


def test_where_is_maps_to_product_info():
    assert classify_intent("where is the milk") == ProductInfo("milk")


def test_price_questions_map_to_product_info():
    assert classify_intent("how much is the soap?") == ProductInfo("soap")
    assert classify_intent("price of instant noodles") == ProductInfo("instant noodles")


def test_take_me_maps_to_navigate():
    assert classify_intent("take me to the dairy section") == Navigate("dairy section")


def test_guide_and_go_to_map_to_navigate():
    assert classify_intent("guide me to the bakery") == Navigate("bakery")
    assert classify_intent("go to snacks") == Navigate("snacks")


def test_surroundings_question_wants_images():
    intent = classify_intent("what's around me right now")
    assert isinstance(intent, General)
    assert intent.wants_images


def test_plain_question_is_general_without_images():
    intent = classify_intent("is this store open on sundays")
    assert isinstance(intent, General)
    assert not intent.wants_images


def test_empty_text_rejected():
    with pytest.raises(ValueError):
        classify_intent("   ")


def test_responder_override_constrained_labels():
    override = MockResponder(replies=["NAVIGATE"])
    intent = classify_intent("the bakery would be nice", responder=override)
    assert isinstance(intent, Navigate)
    assert "label" not in override.last_prompt.lower() or override.calls == 1


def test_responder_failure_falls_back_to_rules():
    failing = MockResponder(fail=True)
    assert classify_intent("where is the milk", responder=failing) == ProductInfo("milk")


def test_responder_gibberish_falls_back_to_rules():
    noisy = MockResponder(replies=["I think this is about cheese"])
    assert classify_intent("where is the milk", responder=noisy) == ProductInfo("milk")
