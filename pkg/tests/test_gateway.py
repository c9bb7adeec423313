import json

import pytest

from findesk.errors import CassetteMiss, ProviderError, UnparseableAfterRepair
from findesk.gateway import (
    Cassette,
    Completion,
    FieldSpec,
    Gateway,
    Prompt,
    extract_json_block,
    fingerprint,
    parse_structured,
)

SCHEMA = {
    "trend": FieldSpec("enum", choices=("Up", "Down")),
    "confidence": FieldSpec("number", lo=0.0, hi=1.0),
}


def counting_provider(responses):
    calls = {"n": 0}

    def provider(prompt):
        calls["n"] += 1
        return Completion(text=responses[min(calls["n"] - 1, len(responses) - 1)])

    return provider, calls


def test_record_then_replay_no_network():
    prompt = Prompt(system="s", user="u")
    provider, calls = counting_provider(["hello"])
    cassette = Cassette()
    Gateway(provider=provider, cassette=cassette, mode="record").complete(prompt)
    replay = Gateway(cassette=cassette, mode="replay")
    assert replay.complete(prompt).text == "hello"
    assert calls["n"] == 1  # replay made no provider call


def test_replay_miss():
    gw = Gateway(cassette=Cassette(), mode="replay")
    with pytest.raises(CassetteMiss):
        gw.complete(Prompt(system="s", user="unseen"))


def test_fingerprint_dedupes_repeat_recordings():
    prompt = Prompt(system="s", user="u")
    provider, calls = counting_provider(["a", "b"])
    cassette = Cassette()
    gw = Gateway(provider=provider, cassette=cassette, mode="record")
    first = gw.complete(prompt).text
    second = gw.complete(prompt).text
    assert first == second == "a"
    assert len(cassette) == 1
    assert calls["n"] == 1


def test_fingerprint_stability_and_distinctness():
    a = Prompt(system="s", user="u", temperature=0.0)
    b = Prompt(system="s", user="u", temperature=0.0)
    assert fingerprint(a) == fingerprint(b)
    assert fingerprint(a) != fingerprint(Prompt(system="s", user="u2"))
    assert fingerprint(a) != fingerprint(Prompt(system="s", user="u", temperature=0.5))


def test_cassette_disk_roundtrip(tmp_path):
    path = tmp_path / "c.json"
    cassette = Cassette(path=path)
    completion = Completion(text="t", token_logprobs=(("Up", -0.3),), prompt_tokens=5)
    cassette.put("fp", completion)
    again = Cassette(path=path)
    assert again.get("fp") == completion


def test_retry_on_transient_then_success():
    attempts = {"n": 0}

    def flaky(prompt):
        attempts["n"] += 1
        if attempts["n"] < 3:
            raise ProviderError(503, "busy")
        return Completion(text="ok")

    slept = []
    gw = Gateway(provider=flaky, mode="passthrough", sleep=slept.append)
    assert gw.complete(Prompt(system="s", user="u")).text == "ok"
    assert slept == [1.0, 2.0]


def test_retry_gives_up_after_max():
    def always_busy(prompt):
        raise ProviderError(503, "busy")

    gw = Gateway(provider=always_busy, mode="passthrough", sleep=lambda s: None)
    with pytest.raises(ProviderError):
        gw.complete(Prompt(system="s", user="u"))
    assert gw.calls_made == 4  # initial + 3 retries


def test_nontransient_error_not_retried():
    calls = {"n": 0}

    def unauthorized(prompt):
        calls["n"] += 1
        raise ProviderError(401, "no")

    gw = Gateway(provider=unauthorized, mode="passthrough", sleep=lambda s: None)
    with pytest.raises(ProviderError):
        gw.complete(Prompt(system="s", user="u"))
    assert calls["n"] == 1


def test_parse_structured_plain_and_fenced():
    assert parse_structured('{"trend":"Up","confidence":0.7}', SCHEMA) == \
        {"trend": "Up", "confidence": 0.7}
    wrapped = 'Sure!\n```json\n{"trend": "Down", "confidence": 0.2}\n```\nthanks'
    assert parse_structured(wrapped, SCHEMA)["trend"] == "Down"
    prose = 'I think {"trend": "Up", "confidence": 0.9} is right'
    assert parse_structured(prose, SCHEMA)["confidence"] == 0.9


def test_parse_structured_range_violation():
    with pytest.raises(ValueError):
        parse_structured('{"trend":"Up","confidence":1.3}', SCHEMA)


def test_structured_repair_then_failure():
    provider, calls = counting_provider(['not json', '{"trend":"Up","confidence":1.3}'])
    gw = Gateway(provider=provider, mode="passthrough")
    with pytest.raises(UnparseableAfterRepair):
        gw.complete_structured(Prompt(system="s", user="u"), SCHEMA)
    assert calls["n"] == 2  # one repair re-prompt, then give up


def test_structured_repair_succeeds():
    provider, calls = counting_provider(["garbage", '{"trend":"Up","confidence":0.5}'])
    gw = Gateway(provider=provider, mode="passthrough")
    parsed = gw.complete_structured(Prompt(system="s", user="u"), SCHEMA)
    assert parsed == {"trend": "Up", "confidence": 0.5}


def test_logprobs_must_be_nonpositive():
    with pytest.raises(ValueError):
        Completion(text="x", token_logprobs=(("Up", 0.2),))


def test_extract_json_block_nested():
    text = 'prefix {"a": {"b": "}"}, "c": 1} suffix'
    assert json.loads(extract_json_block(text)) == {"a": {"b": "}"}, "c": 1}
