import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from atomqke import BlackmanWaveform, Pulse, ValidationError, area, duration_for_angle
from atomqke.waveform import (
    TWO_PI,
    ideal_duration_ns,
    midpoint_areas,
    sample_envelope,
)


class TestDurationForAngle:
    def test_full_rotation_at_channel_max(self):
        # 2*pi at 62.83 rad/us: 238.1 ns before quantization
        assert ideal_duration_ns(TWO_PI, 62.83) == pytest.approx(238.10, abs=0.01)
        assert duration_for_angle(TWO_PI, 62.83) == 239

    def test_full_rotation_at_conservative_amplitude(self):
        assert ideal_duration_ns(TWO_PI, 5.42) == pytest.approx(2760.14, abs=0.01)
        assert duration_for_angle(TWO_PI, 5.42) == 2761

    def test_half_rotation(self):
        assert ideal_duration_ns(math.pi, 62.83) == pytest.approx(119.05, abs=0.01)

    def test_clock_multiple(self):
        assert duration_for_angle(1.0, 5.0, clock_period=4) % 4 == 0

    def test_domain(self):
        with pytest.raises(ValidationError):
            duration_for_angle(0.0, 5.0)
        with pytest.raises(ValidationError):
            duration_for_angle(TWO_PI + 0.1, 5.0)
        with pytest.raises(ValidationError):
            duration_for_angle(1.0, -5.0)

    @given(
        st.floats(min_value=0.01, max_value=TWO_PI),
        st.floats(min_value=0.01, max_value=TWO_PI),
        st.floats(min_value=0.5, max_value=62.83),
    )
    def test_monotone_in_theta(self, t1, t2, amp):
        lo, hi = sorted([t1, t2])
        assert duration_for_angle(lo, amp) <= duration_for_angle(hi, amp)

    @given(
        st.floats(min_value=0.01, max_value=TWO_PI),
        st.floats(min_value=0.5, max_value=62.0),
        st.floats(min_value=0.01, max_value=0.83),
    )
    def test_antitone_in_amplitude(self, theta, amp, bump):
        assert duration_for_angle(theta, amp + bump) <= duration_for_angle(theta, amp)


class TestEnvelope:
    def test_endpoints_vanish(self):
        w = BlackmanWaveform(amplitude=10.0, duration=100)
        samples = sample_envelope(w)
        assert abs(samples[0]) <= 1e-12 * w.amplitude
        assert abs(samples[-1]) <= 1e-12 * w.amplitude

    def test_midpoint_is_peak(self):
        w = BlackmanWaveform(amplitude=10.0, duration=100)
        samples = sample_envelope(w)
        assert samples[50] == pytest.approx(10.0)

    def test_nonnegative_and_bounded(self):
        w = BlackmanWaveform(amplitude=7.0, duration=251)
        samples = sample_envelope(w)
        assert samples.min() >= -1e-12
        assert samples.max() <= 7.0 + 1e-12

    def test_too_short_for_clock(self):
        w = BlackmanWaveform(amplitude=1.0, duration=5)
        with pytest.raises(ValidationError):
            sample_envelope(w, clock_period=4)


class TestArea:
    def test_trapezoid_matches_closed_form(self):
        w = BlackmanWaveform(amplitude=62.83, duration=150)
        assert area(w) == pytest.approx(w.area, rel=1e-3)

    def test_area_at_published_duration(self):
        # 0.2381 us at the channel maximum is a full 2*pi rotation
        w = BlackmanWaveform(amplitude=62.83, duration=238)
        assert area(w) == pytest.approx(TWO_PI, rel=5e-3)

    def test_doubling_duration_doubles_area(self):
        w1 = BlackmanWaveform(amplitude=5.0, duration=300)
        w2 = BlackmanWaveform(amplitude=5.0, duration=600)
        assert area(w2) == pytest.approx(2 * area(w1), rel=1e-9)

    def test_from_area_is_exact_after_quantization(self):
        for theta in np.linspace(math.pi / 16, TWO_PI, 13):
            for amp in (5.42, 62.83):
                w = BlackmanWaveform.from_area(theta, amp)
                assert w.amplitude <= amp + 1e-12
                assert w.area == pytest.approx(theta, rel=1e-12)
                assert area(w) == pytest.approx(theta, rel=5e-3)

    def test_round_trip_through_duration(self):
        for theta in np.linspace(math.pi / 16, TWO_PI, 9):
            for amp in (5.42, 62.83):
                w = BlackmanWaveform.from_area(theta, amp)
                assert area(w) == pytest.approx(theta, rel=5e-3)

    def test_midpoint_sum_recovers_area(self):
        w = BlackmanWaveform.from_area(1.234, 62.83)
        assert midpoint_areas(w, 1.0).sum() == pytest.approx(1.234, rel=1e-12)
        with pytest.raises(ValidationError):
            midpoint_areas(w, 0.7)


class TestPulse:
    def test_phase_normalized(self):
        w = BlackmanWaveform(amplitude=1.0, duration=10)
        p = Pulse(waveform=w, phase=TWO_PI + 1.0, post_phase_shift=-1.0)
        assert p.phase == pytest.approx(1.0)
        assert p.post_phase_shift == pytest.approx(TWO_PI - 1.0)

    def test_json_round_trip(self):
        p = Pulse(BlackmanWaveform(amplitude=3.5, duration=64), phase=0.25,
                  post_phase_shift=1.5)
        data = p.to_json()
        assert data["waveform"] == {"kind": "blackman", "A": 3.5, "T_ns": 64}
        assert data["detuning"] == 0.0
        back = Pulse.from_json(data)
        assert back == p

    def test_rejects_unknown_waveform_kind(self):
        with pytest.raises(ValidationError):
            BlackmanWaveform.from_json({"kind": "square", "A": 1.0, "T_ns": 10})
