"""Exact behaviour of the fault injector state machine and fault types."""

import math
import struct

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from faultbench import faults

DT = 1e-3


def make_injector(fault_type, event=None, effect=None, enabled=True, dt=DT):
    spec = faults.FaultSpec(
        name="x",
        target_signal="sig",
        fault_type=fault_type,
        event=event or faults.FailureProbability(p=0.0),
        effect=effect or faults.InfiniteTime(),
        enabled=enabled,
    )
    return faults.Injector(spec, dt, in_signal="sig")


def drive(inj, inputs, triggers=None, seed=1):
    rng = np.random.default_rng(seed)
    triggers = triggers or [False] * len(inputs)
    outs, trigs = [], []
    for k, (x, tr) in enumerate(zip(inputs, triggers)):
        y, t = inj.step(float(x), k * inj.dt, tr, rng)
        outs.append(y)
        trigs.append(t)
    return outs, trigs


# --------------------------------------------------------------------------
# fault types


def test_stuck_at_holds_last_correct_value():
    inj = make_injector(faults.StuckAt(), event=faults.FailureProbability(0.0))
    # force activation at the 2nd step via trigger
    outs, _ = drive(inj, [1.0, 2.0, 3.0], triggers=[False, True, True])
    assert outs == [1.0, 1.0, 1.0]


def test_stuck_at_window_constancy():
    inj = make_injector(faults.StuckAt(), effect=faults.ConstantTime(duration=5 * DT))
    inputs = [0.5, 1.5, 2.5, 3.5, 4.5, 5.5, 6.5, 7.5]
    triggers = [False, False, True, False, False, False, False, False]
    outs, _ = drive(inj, inputs, triggers)
    assert outs[:2] == [0.5, 1.5]
    assert outs[2:7] == [1.5] * 5  # held at last pre-activation input
    assert outs[7] == 7.5


def test_package_drop_replaces_value():
    inj = make_injector(faults.PackageDrop(replacement=0.0))
    outs, _ = drive(inj, [3.0, 4.0], triggers=[True, True])
    assert outs == [0.0, 0.0]


def test_bias_is_additive():
    inj = make_injector(faults.Bias(offset=0.5))
    outs, _ = drive(inj, [2.0], triggers=[True])
    assert outs == [2.5]


@given(x=st.floats(-1e6, 1e6, allow_nan=False), offset=st.floats(-1e3, 1e3))
def test_bias_exactness(x, offset):
    inj = make_injector(faults.Bias(offset=offset))
    outs, _ = drive(inj, [x], triggers=[True])
    assert outs[0] == x + offset


@given(x=st.floats(-1e6, 1e6, allow_nan=False), pct=st.floats(0.0, 200.0),
       seed=st.integers(0, 2**31))
def test_noise_boundedness(x, pct, seed):
    inj = make_injector(faults.Noise(boundary_pct=pct))
    outs, _ = drive(inj, [x] * 5, triggers=[True] * 5, seed=seed)
    bound = abs(x) * pct / 100.0
    for y in outs:
        assert abs(y - x) <= bound


def test_time_delay_holds_then_replays():
    delay = 3 * DT
    inj = make_injector(faults.TimeDelay(delay=delay))
    inputs = [float(i) for i in range(10)]
    # activation at step 4
    triggers = [False] * 4 + [True] + [False] * 5
    outs, _ = drive(inj, inputs, triggers)
    assert outs[:4] == [0.0, 1.0, 2.0, 3.0]
    # hold phase: last armed input was 3.0
    assert outs[4:7] == [3.0, 3.0, 3.0]
    # replay phase: x(k - 3)
    assert outs[7:] == [4.0, 5.0, 6.0]


def test_bit_flip_sign_bit():
    inj = make_injector(faults.BitFlip(n_bits=1, bit_positions=(63,)))
    outs, _ = drive(inj, [1.0], triggers=[True])
    assert outs == [-1.0]


def test_bit_flip_mantissa_errors_small():
    # brute force over all 52 mantissa-bit flips of 100.0, via an independent
    # uint64 view of the float
    rel_errors = []
    for bit in range(52):
        raw = np.array([100.0]).view(np.uint64)
        raw ^= np.uint64(1 << bit)
        flipped = float(raw.view(np.float64)[0])
        rel_errors.append(abs(flipped - 100.0) / 100.0)
        assert faults.flip_bits(100.0, 1 << bit) == flipped
    assert max(rel_errors) < 0.5
    assert sorted(rel_errors)[len(rel_errors) // 2] < 1e-3  # typical flip is tiny


@given(x=st.floats(allow_nan=False, allow_infinity=False),
       mask=st.integers(0, 2**64 - 1))
def test_bit_flip_involution(x, mask):
    once = faults.flip_bits(x, mask)
    twice = faults.flip_bits(once, mask)
    assert struct.pack("<d", twice) == struct.pack("<d", x)


def test_bit_flip_random_positions_fixed_within_window():
    inj = make_injector(faults.BitFlip(n_bits=2, bit_positions="random"),
                        effect=faults.ConstantTime(duration=4 * DT))
    x = 7.25
    outs, _ = drive(inj, [x] * 6, triggers=[True] + [False] * 5)
    faulty = outs[:4]
    assert len(set(faulty)) == 1  # same mask for the whole window
    assert faulty[0] != x
    assert outs[4:] == [x, x]


# --------------------------------------------------------------------------
# identity invariants


@given(xs=st.lists(st.floats(-1e9, 1e9), min_size=1, max_size=50),
       seed=st.integers(0, 2**31))
@settings(max_examples=60)
def test_identity_when_disabled(xs, seed):
    inj = make_injector(faults.Noise(boundary_pct=50.0),
                        event=faults.FailureProbability(1.0), enabled=False)
    outs, trigs = drive(inj, xs, seed=seed)
    assert outs == [float(x) for x in xs]
    assert not any(trigs)


@given(xs=st.lists(st.floats(-1e9, 1e9), min_size=1, max_size=50))
def test_identity_when_armed(xs):
    inj = make_injector(faults.Bias(offset=123.0), event=faults.FailureProbability(0.0))
    outs, trigs = drive(inj, xs)
    assert outs == [float(x) for x in xs]
    assert not any(trigs)


def test_identity_between_exposures():
    inj = make_injector(faults.Bias(offset=10.0), effect=faults.ConstantTime(2 * DT))
    inputs = [1.0] * 9
    triggers = [False, True, False, False, False, True, False, False, False]
    outs, trigs = drive(inj, inputs, triggers)
    assert outs == [1.0, 11.0, 11.0, 1.0, 1.0, 11.0, 11.0, 1.0, 1.0]
    assert trigs == [False, True, True, False, False, True, True, False, False]


# --------------------------------------------------------------------------
# effects: exposure windows


def test_constant_time_window_exact_length():
    for duration_steps in (1, 2, 50, 250):
        inj = make_injector(faults.Bias(offset=1.0),
                            effect=faults.ConstantTime(duration_steps * DT))
        n = duration_steps + 10
        outs, _ = drive(inj, [0.0] * n, triggers=[True] + [False] * (n - 1))
        assert sum(1 for y in outs if y != 0.0) == duration_steps
        assert all(y == 1.0 for y in outs[:duration_steps])


def test_once_single_sample_never_rearms():
    inj = make_injector(faults.Bias(offset=1.0), event=faults.FailureProbability(1.0),
                        effect=faults.Once())
    outs, trigs = drive(inj, [0.0] * 10)
    assert outs[0] == 1.0
    assert outs[1:] == [0.0] * 9  # expired despite p = 1
    assert trigs == [True] + [False] * 9


def test_infinite_time_until_end():
    inj = make_injector(faults.Bias(offset=1.0), effect=faults.InfiniteTime())
    outs, trigs = drive(inj, [0.0] * 20, triggers=[False, True] + [False] * 18)
    assert outs[0] == 0.0
    assert outs[1:] == [1.0] * 19
    assert all(trigs[1:])


def test_rearming_after_constant_time():
    inj = make_injector(faults.Bias(offset=1.0), event=faults.FailureProbability(1.0),
                        effect=faults.ConstantTime(3 * DT))
    outs, _ = drive(inj, [0.0] * 9)
    # p = 1: re-activates on the first armed step after each window
    assert outs == [1.0] * 9


def test_zero_duration_window_is_a_no_op():
    inj = make_injector(faults.Bias(offset=1.0), event=faults.FailureProbability(1.0),
                        effect=faults.ConstantTime(0.0))
    outs, trigs = drive(inj, [5.0] * 10)
    assert outs == [5.0] * 10
    assert not any(trigs)


# --------------------------------------------------------------------------
# events


def test_sample_activation_time_degenerate_sigma():
    rng = np.random.default_rng(0)
    ev = faults.MeanTimeToFailure(mttf=1.0, sigma=0.0)
    for t_now in (0.0, 0.5, 3.25):
        assert faults.sample_activation_time(ev, t_now, rng, DT) == t_now + 1.0


def test_sample_activation_time_truncated_at_dt():
    rng = np.random.default_rng(42)
    ev = faults.MeanTimeToFailure(mttf=0.0005, sigma=0.01)
    samples = [faults.sample_activation_time(ev, 0.0, rng, DT) for _ in range(2000)]
    assert min(samples) >= DT


def test_mttf_fires_at_scheduled_step():
    inj = make_injector(faults.Bias(offset=1.0),
                        event=faults.MeanTimeToFailure(mttf=5 * DT, sigma=0.0),
                        effect=faults.ConstantTime(2 * DT))
    outs, _ = drive(inj, [0.0] * 12)
    # armed at step 0, scheduled 5 steps later
    assert outs == [0.0] * 5 + [1.0, 1.0] + [0.0] * 5


def test_sample_exposure_values():
    rng = np.random.default_rng(0)
    assert faults.sample_exposure(faults.Once(), rng, DT) == DT
    assert faults.sample_exposure(faults.ConstantTime(0.25), rng, DT) == 0.25
    assert math.isinf(faults.sample_exposure(faults.InfiniteTime(), rng, DT))
    assert faults.sample_exposure(faults.MeanTimeToRepair(mttr=0.2, sigma=0.0), rng, DT) == 0.2


def test_sample_exposure_mttr_truncated():
    rng = np.random.default_rng(7)
    eff = faults.MeanTimeToRepair(mttr=0.001, sigma=0.05)
    samples = [faults.sample_exposure(eff, rng, DT) for _ in range(2000)]
    assert min(samples) >= DT


def test_constant_time_250_steps_at_1ms():
    # a 0.25 s window is exactly 250 erroneous samples at dt = 1 ms
    inj = make_injector(faults.PackageDrop(0.0), effect=faults.ConstantTime(0.25))
    n = 300
    outs, _ = drive(inj, [1.0] * n, triggers=[True] + [False] * (n - 1))
    assert sum(1 for y in outs if y == 0.0) == 250
