"""Key material, pools, and XOR primitives."""

import random

import pytest

from starqkd.errors import (
    InsufficientAuthKey,
    InsufficientKey,
    KeyAlreadyConsumed,
    LengthMismatch,
    WrongProvenance,
)
from starqkd.keycore import (
    AuthBudget,
    KeyMaterial,
    KeyPool,
    Provenance,
    mix_keys,
    otp_decrypt,
    otp_encrypt,
    xor_bytes,
)


def make_key(bits: bytes, provenance=Provenance.QUANTUM, key_id="k") -> KeyMaterial:
    return KeyMaterial(id=key_id, bits=bits, bit_length=8 * len(bits), provenance=provenance)


def test_xor_bytes_known_values():
    assert xor_bytes(b"\xff", b"\x0f") == b"\xf0"
    assert xor_bytes(b"\x00\x00", b"\xab\xcd") == b"\xab\xcd"
    with pytest.raises(LengthMismatch):
        xor_bytes(b"\x00", b"\x00\x00")


def test_otp_zero_key_is_identity():
    key = make_key(bytes(4))
    assert otp_encrypt(key, b"\xde\xad\xbe\xef") == b"\xde\xad\xbe\xef"


def test_otp_known_byte():
    key = make_key(b"\x0f")
    assert otp_encrypt(key, b"\xff") == b"\xf0"


def test_otp_round_trip_with_receiver_copy():
    rng = random.Random(101)
    for _ in range(50):
        n = rng.randint(1, 64)
        pad = rng.randbytes(n)
        msg = rng.randbytes(n)
        sender = make_key(pad, key_id="s")
        receiver = make_key(pad, key_id="r")
        ct = otp_encrypt(sender, msg)
        assert otp_decrypt(receiver, ct) == msg
        assert sender.consumed and receiver.consumed


def test_otp_consumes_and_rejects_reuse():
    key = make_key(bytes(8))
    otp_encrypt(key, b"hi")
    with pytest.raises(KeyAlreadyConsumed):
        otp_encrypt(key, b"hi")


def test_otp_short_key_fails_without_consuming():
    key = make_key(bytes(2))
    with pytest.raises(InsufficientKey):
        otp_encrypt(key, b"abc")
    assert not key.consumed
    # still usable for a message it can cover
    assert otp_encrypt(key, b"ab") == b"ab"


def test_key_material_validates_shape():
    with pytest.raises(ValueError):
        KeyMaterial(id="bad", bits=b"\x00", bit_length=0, provenance=Provenance.QUANTUM)
    with pytest.raises(ValueError):
        KeyMaterial(id="bad", bits=b"\x00", bit_length=16, provenance=Provenance.QUANTUM)
    # 12 bits fit in 2 bytes
    KeyMaterial(id="ok", bits=b"\x0f\xff", bit_length=12, provenance=Provenance.QUANTUM)


def test_mix_keys_zero_quantum_returns_master_bits():
    k_m = make_key(b"\xaa\xbb", provenance=Provenance.MASTER, key_id="m")
    k_q = make_key(bytes(2), key_id="q")
    mixed = mix_keys(k_m, k_q)
    assert mixed.bits == k_m.bits
    assert mixed.provenance is Provenance.DERIVED
    assert k_q.consumed
    assert not k_m.consumed


def test_mix_keys_known_value_and_involution():
    k_m = make_key(b"\xaa", provenance=Provenance.MASTER, key_id="m")
    mixed = mix_keys(k_m, make_key(b"\x0f", key_id="q1"))
    assert mixed.bits == b"\xa5"
    again = mix_keys(mixed, make_key(b"\x0f", key_id="q2"))
    assert again.bits == k_m.bits


def test_mix_keys_differs_from_master_iff_quantum_nonzero():
    rng = random.Random(77)
    for _ in range(200):
        n = rng.randint(1, 16)
        master = make_key(rng.randbytes(n), provenance=Provenance.MASTER)
        qbits = rng.randbytes(n)
        mixed = mix_keys(master, make_key(qbits))
        if any(qbits):
            assert mixed.bits != master.bits
        else:
            assert mixed.bits == master.bits


def test_mix_keys_preconditions():
    k_m = make_key(bytes(2), provenance=Provenance.MASTER)
    with pytest.raises(LengthMismatch):
        mix_keys(k_m, make_key(bytes(3)))
    with pytest.raises(WrongProvenance):
        mix_keys(k_m, make_key(bytes(2), provenance=Provenance.SESSION))
    spent = make_key(bytes(2))
    spent.mark_consumed()
    with pytest.raises(KeyAlreadyConsumed):
        mix_keys(k_m, spent)
    # relayed material is acceptable
    mix_keys(k_m, make_key(bytes(2), provenance=Provenance.RELAYED))


def test_pool_deposit_and_draw_accounting():
    pool = KeyPool(link_id="a")
    pool.deposit(10)
    assert pool.available_bits == 10
    assert pool.total_generated_bits == 10
    km = pool.draw(4, Provenance.QUANTUM)
    assert km.bit_length == 4
    assert pool.available_bits == 6
    assert pool.total_consumed_bits == 4
    assert pool.total_generated_bits == pool.available_bits + pool.total_consumed_bits


def test_pool_draw_failure_changes_nothing():
    pool = KeyPool(link_id="a")
    pool.deposit(50)
    with pytest.raises(InsufficientKey):
        pool.draw(51, Provenance.QUANTUM)
    assert pool.available_bits == 50
    assert pool.total_consumed_bits == 0
    pool.draw(30, Provenance.QUANTUM)
    pool.draw(20, Provenance.QUANTUM)
    assert pool.available_bits == 0
    assert pool.total_consumed_bits == 50
    with pytest.raises(InsufficientKey):
        pool.draw(1, Provenance.QUANTUM)


def test_pool_rejects_zero_quantities():
    pool = KeyPool(link_id="a")
    with pytest.raises(ValueError):
        pool.deposit(0)
    with pytest.raises(ValueError):
        pool.deposit(-3)
    pool.deposit(8)
    with pytest.raises(ValueError):
        pool.draw(0, Provenance.QUANTUM)


def test_pool_draws_are_deterministic_per_seed():
    a = KeyPool(link_id="x", rng=random.Random(5))
    b = KeyPool(link_id="x", rng=random.Random(5))
    a.deposit(256)
    b.deposit(256)
    ka = a.draw(64, Provenance.QUANTUM)
    kb = b.draw(64, Provenance.QUANTUM)
    assert ka.bits == kb.bits
    assert ka.id == kb.id


def test_pool_conservation_over_random_sequences():
    rng = random.Random(20260822)
    pool = KeyPool(link_id="p", rng=random.Random(1))
    drawn = []
    for _ in range(2000):
        op = rng.random()
        if op < 0.5:
            pool.deposit(rng.randint(1, 500))
        elif op < 0.9:
            n = rng.randint(1, 400)
            if pool.available_bits >= n:
                drawn.append(pool.draw(n, Provenance.QUANTUM))
            else:
                with pytest.raises(InsufficientKey):
                    pool.draw(n, Provenance.QUANTUM)
        elif drawn:
            km = drawn.pop()
            if not km.consumed:
                km.mark_consumed()
        pool.assert_conservation()
    assert pool.total_generated_bits == pool.available_bits + pool.total_consumed_bits


def test_fill_ratio():
    pool = KeyPool(link_id="a", target_bits=1000)
    assert pool.fill_ratio == 0.0
    pool.deposit(250)
    assert pool.fill_ratio == 0.25


def test_auth_budget_exact_costs():
    budget = AuthBudget(reserved_bits=128, tag_cost_bits=128)
    assert budget.consume(1) == 128
    assert budget.reserved_bits == 0
    budget = AuthBudget(reserved_bits=1000, tag_cost_bits=128)
    budget.consume(3)
    assert budget.reserved_bits == 616
    with pytest.raises(InsufficientAuthKey):
        budget.consume(5)
    assert budget.reserved_bits == 616


def test_auth_budget_two_messages_on_one_tag_of_reserve():
    budget = AuthBudget(reserved_bits=128, tag_cost_bits=128)
    with pytest.raises(InsufficientAuthKey):
        budget.consume(2)
    assert budget.reserved_bits == 128


def test_auth_budget_deposit():
    budget = AuthBudget(reserved_bits=0, tag_cost_bits=64)
    budget.deposit(128)
    budget.consume(2)
    assert budget.reserved_bits == 0
    with pytest.raises(ValueError):
        budget.deposit(0)
