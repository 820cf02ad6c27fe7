"""Domain types: validation, serialization round-trips, rollout history."""

from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from featfade.domain import (
    Example,
    FadingSchedule,
    FeatureId,
    FeatureKind,
    GuardrailVerdict,
    HistoryEntry,
    LoggedExample,
    MetricPoint,
    Rollout,
    RolloutPolicy,
    RolloutState,
    ScheduleMode,
    parse_json,
    to_json,
)
from featfade.errors import ConfigError

fractions = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)
feature_names = st.from_regex(r"[a-z][a-z0-9_]{0,15}", fullmatch=True)
kinds = st.sampled_from(list(FeatureKind))


@st.composite
def schedules(draw):
    return FadingSchedule(
        start_day=draw(st.integers(min_value=0, max_value=500)),
        rate_per_day=draw(fractions),
        initial_coverage=draw(fractions),
        target_coverage=draw(fractions),
        mode=draw(st.sampled_from(list(ScheduleMode))),
    )


@st.composite
def policies(draw):
    names = draw(st.lists(feature_names, min_size=1, max_size=4, unique=True))
    return RolloutPolicy(
        features=tuple(FeatureId(n, draw(kinds)) for n in names),
        schedule=draw(schedules()),
        max_daily_ne_increase=draw(st.floats(min_value=1e-6, max_value=10)),
        max_cumulative_ne_increase=draw(st.floats(min_value=1e-6, max_value=10)),
        max_duration_days=draw(st.integers(min_value=1, max_value=1000)),
    )


feature_values = st.one_of(
    st.integers(min_value=0, max_value=10_000),
    st.floats(allow_nan=False, allow_infinity=False, width=64),
    st.tuples(*[st.floats(allow_nan=False, allow_infinity=False, width=64)] * 8),
)


@st.composite
def examples(draw):
    features = draw(
        st.dictionaries(feature_names, feature_values, min_size=0, max_size=6)
    )
    return Example(
        request_id=draw(st.integers(min_value=0, max_value=2**64 - 1)),
        features=features,
        label=draw(st.sampled_from([0, 1])),
        day=draw(st.integers(min_value=0, max_value=1000)),
    )


class TestValidation:
    def test_empty_feature_name_rejected(self):
        with pytest.raises(ValueError):
            FeatureId("", FeatureKind.DENSE)

    @pytest.mark.parametrize("field,value", [
        ("rate_per_day", 1.5),
        ("rate_per_day", -0.1),
        ("initial_coverage", 2.0),
        ("target_coverage", -1.0),
    ])
    def test_schedule_fractions_bounded(self, field, value):
        kwargs = dict(
            start_day=0, rate_per_day=0.1, initial_coverage=1.0, target_coverage=0.0
        )
        kwargs[field] = value
        with pytest.raises(ValueError):
            FadingSchedule(**kwargs)

    def test_policy_requires_features(self):
        with pytest.raises(ValueError):
            RolloutPolicy(
                features=(),
                schedule=FadingSchedule(0, 0.1, 1.0, 0.0),
                max_daily_ne_increase=0.1,
                max_cumulative_ne_increase=0.1,
                max_duration_days=10,
            )

    def test_policy_thresholds_strictly_positive(self, sparse_feature):
        with pytest.raises(ValueError):
            RolloutPolicy(
                features=(sparse_feature,),
                schedule=FadingSchedule(0, 0.1, 1.0, 0.0),
                max_daily_ne_increase=0.0,
                max_cumulative_ne_increase=0.1,
                max_duration_days=10,
            )

    def test_example_label_binary(self):
        with pytest.raises(ValueError):
            Example(request_id=1, features={}, label=2, day=0)

    def test_metric_point_ne_nonnegative(self):
        with pytest.raises(ValueError):
            MetricPoint(
                day=1, ne=-0.1, mean_prediction=0.5, mean_label=0.5,
                coverage_snapshot={},
            )


class TestRoundTrips:
    @given(schedules())
    def test_schedule_round_trip(self, sched):
        assert FadingSchedule.from_dict(sched.to_dict()) == sched

    @given(policies())
    def test_policy_round_trip(self, policy):
        assert RolloutPolicy.from_dict(policy.to_dict()) == policy

    @given(examples())
    def test_example_round_trip(self, example):
        via_json = Example.from_dict(parse_json(to_json(example)))
        assert via_json == example

    @given(examples(), st.dictionaries(feature_names, fractions, max_size=4))
    def test_logged_example_round_trip(self, example, coverages):
        logged = LoggedExample(
            request_id=example.request_id,
            features=example.features,
            label=example.label,
            day=example.day,
            effective_coverage_snapshot=coverages,
        )
        assert LoggedExample.from_dict(parse_json(to_json(logged))) == logged

    @given(policies(), st.integers(min_value=0, max_value=100))
    def test_rollout_round_trip(self, policy, day):
        rollout = Rollout(
            id="ro-0001",
            policy=policy,
            state=RolloutState.ACTIVE,
            paused_days_accumulated=2,
            created_day=day,
            history=[
                HistoryEntry(day, "created", "operator"),
                HistoryEntry(day + 1, "Pending->Active", "schedule"),
            ],
        )
        assert Rollout.from_dict(parse_json(to_json(rollout))) == rollout

    def test_metric_point_round_trip(self):
        point = MetricPoint(
            day=7,
            ne=0.81234,
            mean_prediction=0.21,
            mean_label=0.2,
            coverage_snapshot={"sparse_00": 0.6},
            guardrail_verdict=GuardrailVerdict.PAUSED,
        )
        assert MetricPoint.from_dict(parse_json(to_json(point))) == point


def test_parse_json_reports_file_and_line():
    with pytest.raises(ConfigError, match=r"conf\.json:2:"):
        parse_json('{\n  "bad": ,\n}', "conf.json")


def test_history_grows_on_every_transition(sparse_feature):
    from featfade.control_plane import ControlPlane

    plane = ControlPlane([sparse_feature])
    from conftest import make_policy

    rollout = plane.create_rollout(make_policy([sparse_feature], start_day=1))
    lengths = [len(rollout.history)]
    plane.advance_day()  # Pending -> Active
    lengths.append(len(rollout.history))
    plane.pause(rollout.id)
    lengths.append(len(rollout.history))
    plane.resume(rollout.id)
    lengths.append(len(rollout.history))
    plane.rollback(rollout.id)
    lengths.append(len(rollout.history))
    assert lengths == sorted(lengths) and len(set(lengths)) == len(lengths)
