import itertools

import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_output
from govcore.epistemic import (
    CoherenceFlag,
    JudgmentSignals,
    MechanicalSignals,
    StepEpistemicState,
    WorkflowEpistemicRecord,
    assess_step,
    compute_mechanical,
    compute_overall,
    detect_flags,
)
from govcore.errors import TriggerParseError
from govcore.primitives.kinds import PrimitiveKind
from govcore.triggers import evaluate_gate_trigger


def state_with(overall=0.8, flags=(), judgment=None, confidence=0.9, kind=PrimitiveKind.VERIFY):
    return StepEpistemicState(
        step_id="s1",
        kind=kind,
        mechanical=MechanicalSignals(rule_coverage=overall),
        judgment=judgment,
        flags=list(flags),
        overall=overall,
        warranted=overall >= 0.5 and not any(f.severity == "critical" for f in flags),
        confidence=confidence,
    )


# -- mechanical signals -----------------------------------------------------------

def test_retrieve_complete_sources():
    output = make_output(
        "retrieve",
        data={"a": "x", "b": "y", "c": "z", "d": "w"},
        sources_queried=["a", "b", "c", "d"],
    )
    signals = compute_mechanical(PrimitiveKind.RETRIEVE, output)
    assert signals.evidence_completeness == 1.0


def test_retrieve_partial_sources():
    output = make_output(
        "retrieve", data={"a": "x", "b": ""}, sources_queried=["a", "b", "c", "d"]
    )
    signals = compute_mechanical(PrimitiveKind.RETRIEVE, output)
    assert signals.evidence_completeness == 0.25  # oracle: 1 of 4 returned data


def test_verify_rule_coverage_half():
    # oracle: 3 checked / 6 applicable = 0.5
    output = make_output("verify", rules_checked=["R1", "R2", "R3"])
    signals = compute_mechanical(
        PrimitiveKind.VERIFY, output,
        {"rules": ["R1", "R2", "R3", "R4", "R5", "R6"]},
    )
    assert signals.rule_coverage == 0.5


def test_zero_denominator_scores_zero_with_note():
    output = make_output("retrieve", data={}, sources_queried=[])
    signals = compute_mechanical(PrimitiveKind.RETRIEVE, output)
    assert signals.evidence_completeness == 0.0
    assert any("zero denominator" in n for n in signals.notes)


def test_classify_alternative_separation():
    # oracle: 0.9 - 0.6 = 0.3
    output = make_output(
        "classify", confidence=0.9,
        alternative_categories=[["other", 0.6], ["third", 0.1]],
    )
    signals = compute_mechanical(PrimitiveKind.CLASSIFY, output)
    assert signals.alternative_separation == pytest.approx(0.3)
    assert signals.citation_rate == 1.0


def test_citation_rate_counts_cited_sentences():
    # oracle: 1 cited sentence of 2
    output = make_output(
        "deliberate",
        warrant="The criteria are met [plan_criteria]. This sentence asserts freely.",
    )
    signals = compute_mechanical(PrimitiveKind.DELIBERATE, output)
    assert signals.citation_rate == 0.5


def test_every_kind_yields_at_least_one_signal():
    for kind in PrimitiveKind:
        output = make_output(kind.value)
        context = {"rules": ["R1", "R2"]} if kind is PrimitiveKind.VERIFY else {}
        signals = compute_mechanical(kind, output, context)
        assert signals.present(), kind


def test_mechanical_invariant_under_judgment_fields():
    base = make_output("deliberate")
    changed = make_output("deliberate", reasoning_quality=0.1, outcome_certainty=0.2)
    assert compute_mechanical(PrimitiveKind.DELIBERATE, base) == compute_mechanical(
        PrimitiveKind.DELIBERATE, changed
    )


# -- flags ------------------------------------------------------------------------

COMPAT = {"criteria_not_met": {"UPHOLD", "PARTIAL"}}


def record_of(*states):
    record = WorkflowEpistemicRecord()
    for state in states:
        record.add(state)
    return record


def test_cd_mismatch_fires():
    classify = make_output("classify", category="criteria_not_met")
    deliberate = make_output("deliberate", recommended_action="OVERTURN")
    record = record_of(state_with(kind=PrimitiveKind.CLASSIFY))
    record.steps[0].step_id = "classify_1"
    flags = detect_flags(
        record, "deliberate_1", PrimitiveKind.DELIBERATE, deliberate,
        {"classify_1": classify}, COMPAT,
    )
    cd = [f for f in flags if f.kind == "CD_MISMATCH"]
    assert len(cd) == 1
    assert cd[0].penalty == -0.20 and cd[0].severity == "critical"
    assert cd[0].source_steps == ("classify_1", "deliberate_1")


def test_cd_compatible_no_flag():
    classify = make_output("classify", category="criteria_not_met")
    deliberate = make_output("deliberate", recommended_action="UPHOLD")
    record = record_of(state_with(kind=PrimitiveKind.CLASSIFY))
    record.steps[0].step_id = "classify_1"
    flags = detect_flags(
        record, "deliberate_1", PrimitiveKind.DELIBERATE, deliberate,
        {"classify_1": classify}, COMPAT,
    )
    assert not [f for f in flags if f.kind == "CD_MISMATCH"]


def test_vd_tension_fires():
    verify = make_output(
        "verify", conforms=False,
        violations=[{"rule_id": "R9", "description": "notice missing"}],
    )
    deliberate = make_output(
        "deliberate", outcome_certainty=0.9,
        warrant="Proceeding confidently on the merits [clinical_record].",
    )
    record = record_of(state_with(kind=PrimitiveKind.VERIFY, confidence=0.9))
    record.steps[0].step_id = "verify_1"
    flags = detect_flags(
        record, "deliberate_1", PrimitiveKind.DELIBERATE, deliberate,
        {"verify_1": verify}, {},
    )
    vd = [f for f in flags if f.kind == "VD_TENSION"]
    assert len(vd) == 1
    assert vd[0].penalty == -0.25 and vd[0].severity == "critical"


def test_vd_tension_suppressed_when_violations_cited():
    verify = make_output(
        "verify", conforms=False,
        violations=[{"rule_id": "R9", "description": "notice missing"}],
    )
    deliberate = make_output(
        "deliberate", outcome_certainty=0.9,
        warrant="R9 violation acknowledged and addressed [regulatory_framework].",
    )
    record = record_of(state_with(kind=PrimitiveKind.VERIFY))
    record.steps[0].step_id = "verify_1"
    flags = detect_flags(
        record, "deliberate_1", PrimitiveKind.DELIBERATE, deliberate,
        {"verify_1": verify}, {},
    )
    assert not [f for f in flags if f.kind == "VD_TENSION"]


def test_vd_tension_requires_high_certainty():
    verify = make_output(
        "verify", conforms=False,
        violations=[{"rule_id": "R9", "description": "notice missing"}],
    )
    deliberate = make_output(
        "deliberate", outcome_certainty=0.6,
        warrant="Proceeding cautiously [clinical_record].",
    )
    record = record_of(state_with(kind=PrimitiveKind.VERIFY))
    record.steps[0].step_id = "verify_1"
    flags = detect_flags(
        record, "deliberate_1", PrimitiveKind.DELIBERATE, deliberate,
        {"verify_1": verify}, {},
    )
    assert not [f for f in flags if f.kind == "VD_TENSION"]


def test_confidence_drop_fires():
    # oracle: 0.95 - 0.55 = 0.40 > 0.30
    record = record_of(state_with(confidence=0.95))
    output = make_output("investigate", confidence=0.55)
    flags = detect_flags(
        record, "investigate_1", PrimitiveKind.INVESTIGATE, output, {}, {}
    )
    drop = [f for f in flags if f.kind == "CONFIDENCE_DROP"]
    assert len(drop) == 1
    assert drop[0].penalty == -0.10 and drop[0].severity == "warning"


def test_confidence_drop_threshold_not_crossed():
    record = record_of(state_with(confidence=0.8))
    output = make_output("investigate", confidence=0.55)  # 0.25 <= 0.3
    flags = detect_flags(
        record, "investigate_1", PrimitiveKind.INVESTIGATE, output, {}, {}
    )
    assert not flags


def test_confidence_drop_needs_predecessor():
    output = make_output("investigate", confidence=0.1)
    flags = detect_flags(
        WorkflowEpistemicRecord(), "investigate_1", PrimitiveKind.INVESTIGATE,
        output, {}, {},
    )
    assert not [f for f in flags if f.kind == "CONFIDENCE_DROP"]


# -- overall / warranted -------------------------------------------------------------

def test_overall_identity_case():
    overall, warranted = compute_overall(
        MechanicalSignals(citation_rate=1.0), None, []
    )
    assert overall == 1.0 and warranted


def test_overall_blend_and_multiplier():
    # oracle by hand: base = 0.6*0.8 + 0.4*0.5 = 0.68; multiplier 0.9 -> 0.612
    overall, warranted = compute_overall(
        MechanicalSignals(citation_rate=0.8),
        JudgmentSignals(reasoning_quality=0.5, outcome_certainty=0.5),
        [CoherenceFlag.make("CONFIDENCE_DROP", ("a", "b"))],
    )
    assert overall == pytest.approx(0.612)
    assert warranted


def test_critical_flag_forces_unwarranted_despite_high_score():
    overall, warranted = compute_overall(
        MechanicalSignals(citation_rate=1.0, rule_coverage=1.0),
        JudgmentSignals(reasoning_quality=1.0, outcome_certainty=1.0),
        [CoherenceFlag.make("VD_TENSION", ("a", "b"))],
    )
    assert overall == pytest.approx(0.75)
    assert not warranted


def test_warranted_rule_exhaustive_grid():
    """warranted iff overall >= 0.5 and no critical flag, over the full grid."""
    flag_kinds = ["CD_MISMATCH", "VD_TENSION", "CONFIDENCE_DROP"]
    for tenths in range(11):
        for subset_size in range(4):
            for subset in itertools.combinations(flag_kinds, subset_size):
                flags = [CoherenceFlag.make(k, ("a", "b")) for k in subset]
                base = tenths / 10
                multiplier = max(0.0, min(1.0, 1 + sum(f.penalty for f in flags)))
                overall, warranted = compute_overall(
                    MechanicalSignals(citation_rate=base), None, flags
                )
                assert overall == pytest.approx(base * multiplier)
                critical = any(f.severity == "critical" for f in flags)
                assert warranted == (overall >= 0.5 and not critical)


@given(
    base=st.integers(0, 10).map(lambda n: n / 10),
    subset=st.lists(
        st.sampled_from(["CD_MISMATCH", "VD_TENSION", "CONFIDENCE_DROP"]),
        unique=True, max_size=3,
    ),
)
@settings(max_examples=200, deadline=None)
def test_overall_monotone_nonincreasing_in_flags(base, subset):
    flags = [CoherenceFlag.make(k, ("a", "b")) for k in subset]
    with_flags, _ = compute_overall(MechanicalSignals(citation_rate=base), None, flags)
    without, _ = compute_overall(MechanicalSignals(citation_rate=base), None, [])
    assert with_flags <= without


def test_compute_overall_requires_a_signal():
    with pytest.raises(ValueError):
        compute_overall(MechanicalSignals(), None, [])


# -- trigger DSL ---------------------------------------------------------------------

def test_trigger_simple_comparison():
    assert evaluate_gate_trigger("overall < 0.5", state_with(overall=0.4))
    assert not evaluate_gate_trigger("overall < 0.5", state_with(overall=0.6))


def test_trigger_has_flag_and_conjunction():
    state = state_with(
        overall=0.8,
        flags=[CoherenceFlag.make("VD_TENSION", ("a", "b"))],
        judgment=JudgmentSignals(reasoning_quality=0.9, outcome_certainty=0.8),
    )
    assert evaluate_gate_trigger(
        "has_flag(VD_TENSION) and outcome_certainty > 0.7", state
    )
    assert not evaluate_gate_trigger(
        "has_flag(CD_MISMATCH) and outcome_certainty > 0.7", state
    )


def test_trigger_parse_error_position():
    with pytest.raises(TriggerParseError) as exc:
        evaluate_gate_trigger("overall <", state_with())
    assert exc.value.position == 2


def test_trigger_not_and_parens():
    state = state_with(overall=0.9)
    assert evaluate_gate_trigger("not (overall < 0.5)", state)
    assert evaluate_gate_trigger("overall >= 0.9 or overall < 0.1", state)


def test_trigger_absent_signal_is_false():
    assert not evaluate_gate_trigger("reasoning_quality > 0.1", state_with())


def test_trigger_rejects_garbage():
    with pytest.raises(TriggerParseError):
        evaluate_gate_trigger("overall ! 3", state_with())
    with pytest.raises(TriggerParseError):
        evaluate_gate_trigger("overall < 0.5 extra", state_with())


# -- assess_step integration ---------------------------------------------------------

def test_assess_step_combines_layers():
    record = WorkflowEpistemicRecord()
    output = make_output("verify")
    state = assess_step(
        "verify_1", PrimitiveKind.VERIFY, output, record, {},
        step_context={"rules": ["R1", "R2"]},
    )
    assert state.judgment is not None
    assert state.warranted
    assert state.signal_value("rule_coverage") == 1.0


def test_record_label_progression():
    record = record_of(state_with(overall=0.9))
    assert record.label() == "SUPPORTED"
    record = record_of(state_with(overall=0.6))
    assert record.label() == "DEGRADED"
    bad = state_with(overall=0.9, flags=[CoherenceFlag.make("VD_TENSION", ("a", "b"))])
    record = record_of(bad)
    assert record.label() == "INSUFFICIENT"
