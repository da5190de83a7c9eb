import itertools
import json

import pytest

from aslkit.analysis import Binding, analyze_adaptation, derive_offered_sls
from aslkit.customize import (
    Candidate,
    EnumerationCapError,
    build_descriptor,
    dominates,
    enumerate_bindings,
    prune_dominated,
    tailor,
)
from aslkit.parser import parse
from aslkit.pretty import format_program
from aslkit.resources import ResourceDemand
from aslkit.serialize import canonical_json, report_to_json, sha256_hex
from aslkit.sls import Level
from aslkit.validate import validate
from progen import random_program

ADAPT_KEYWORDS = ("adaptable", "alternative", "adapts")


def make_candidate(energy: int, sls: dict) -> Candidate:
    report_demand = ResourceDemand(additive={"Energy": energy})
    from aslkit.analysis import DemandReport

    return Candidate(
        Binding({}), DemandReport({"S.m": report_demand}, frozenset()), dict(sls)
    )


class TestEnumerate:
    def test_connection_cross_product_order(self, connection_program):
        keys = [b.key() for b in enumerate_bindings(connection_program)]
        assert keys == [
            "Connection.connect=Bluetooth,Connection.send=Bluetooth",
            "Connection.connect=Bluetooth,Connection.send=Wifi",
            "Connection.connect=Wifi,Connection.send=Bluetooth",
            "Connection.connect=Wifi,Connection.send=Wifi",
        ]

    def test_no_adaptable_methods_yields_single_empty_binding(self):
        p = parse("class C { fn m() { } }")
        bindings = enumerate_bindings(p)
        assert len(bindings) == 1
        assert bindings[0].key() == "plain"

    def test_counts_multiply_per_method(self):
        p = parse(
            "adaptable class C { adaptable fn a(); adaptable fn b(); adaptable fn c(); }"
            "alternative X adapts C { fn a() { } fn b() { } fn c() { } }"
            "alternative Y adapts C { fn a() { } fn c() { } }"
            "alternative Z adapts C { fn c() { } }"
        )
        assert validate(p) == []
        # a has 2 definers, b has 1, c has 3.
        assert len(enumerate_bindings(p)) == 6

    def test_matches_brute_force_nested_loops(self, connection_program):
        expected = [
            Binding({("Connection", "connect"): c, ("Connection", "send"): s})
            for c in ("Bluetooth", "Wifi")
            for s in ("Bluetooth", "Wifi")
        ]
        assert enumerate_bindings(connection_program) == expected

    def test_cap_exceeded(self, connection_program):
        with pytest.raises(EnumerationCapError):
            enumerate_bindings(connection_program, cap=3)


class TestPruning:
    def test_heavier_identical_sls_removed(self, schema):
        light = make_candidate(1, {"Speed": Level.LOW, "Cost": Level.LOW})
        heavy = make_candidate(5, {"Speed": Level.LOW, "Cost": Level.LOW})
        assert prune_dominated([heavy, light], schema) == [light]

    def test_single_candidate_unchanged(self, schema):
        only = make_candidate(3, {"Speed": Level.LOW, "Cost": Level.LOW})
        assert prune_dominated([only], schema) == [only]

    def test_incomparable_pair_both_kept(self, schema):
        bt = make_candidate(1, {"Speed": Level.LOW, "Cost": Level.LOW})
        wf = make_candidate(1, {"Speed": Level.HIGH, "Cost": Level.HIGH})
        assert prune_dominated([bt, wf], schema) == [bt, wf]

    def test_equal_candidates_both_survive(self, schema):
        a = make_candidate(2, {"Speed": Level.LOW, "Cost": Level.LOW})
        b = make_candidate(2, {"Speed": Level.LOW, "Cost": Level.LOW})
        assert prune_dominated([a, b], schema) == [a, b]

    def test_sls_dominance_requires_all_dimensions(self, schema):
        better_speed = make_candidate(1, {"Speed": Level.HIGH, "Cost": Level.HIGH})
        better_cost = make_candidate(1, {"Speed": Level.LOW, "Cost": Level.LOW})
        assert not dominates(better_speed, better_cost, schema)
        assert not dominates(better_cost, better_speed, schema)

    def test_survivors_keep_canonical_order(self, schema):
        c1 = make_candidate(1, {"Speed": Level.HIGH, "Cost": Level.LOW})
        c2 = make_candidate(1, {"Speed": Level.HIGH, "Cost": Level.HIGH})
        c3 = make_candidate(9, {"Speed": Level.LOW, "Cost": Level.HIGH})
        assert prune_dominated([c2, c1, c3], schema) == [c1]


class TestTailor:
    def test_wifi_tailoring_is_plain(self, connection_program):
        binding = Binding(
            {("Connection", "send"): "Wifi", ("Connection", "connect"): "Wifi"}
        )
        tailored = tailor(connection_program, binding)
        for kw in ADAPT_KEYWORDS:
            assert kw not in tailored.source
        plain = parse(tailored.source)
        assert plain.is_plain()
        assert validate(plain) == []
        cls = plain.find_class("Connection")
        assert sorted(m.name for m in cls.methods) == ["connect", "send"]
        assert "WiFiAdapter" in tailored.source

    def test_plain_program_tailors_to_canonical_self(self):
        p = parse("service S;\nclass C { fn m() { use GPS; } }")
        tailored = tailor(p, Binding({}))
        assert tailored.source == format_program(p)

    def test_deterministic_bytes_and_digest(self, connection_program):
        binding = enumerate_bindings(connection_program)[1]
        a = tailor(connection_program, binding)
        b = tailor(connection_program, binding)
        assert a.source == b.source
        assert a.digest == b.digest == sha256_hex(a.source.encode())

    @pytest.mark.parametrize("seed", range(30))
    def test_semantic_preservation(self, seed):
        program = random_program(seed, max_stmts=30)
        for binding in enumerate_bindings(program)[:4]:
            original = analyze_adaptation(program, binding)
            tailored = tailor(program, binding)
            plain = parse(tailored.source)
            assert validate(plain) == []
            reanalyzed = analyze_adaptation(
                plain, Binding({}), entry_points=list(tailored.entry_points)
            )
            assert canonical_json(report_to_json(reanalyzed)) == canonical_json(
                report_to_json(original)
            )


class TestDescriptor:
    def test_connection_descriptor_contains_published_sls_pair(self, connection_descriptor):
        offers = [
            {k: v.label() for k, v in alt.offered_sls.items()}
            for alt in connection_descriptor.alternatives
        ]
        assert {"Speed": "Low", "Cost": "Low"} in offers
        assert {"Speed": "High", "Cost": "High"} in offers
        keys = [alt.alternative_key for alt in connection_descriptor.alternatives]
        assert len(keys) == len(set(keys))

    def test_vacuous_program(self, schema, rules):
        p = parse("service Empty;")
        desc = build_descriptor(p, schema, rules)
        assert len(desc.alternatives) == 1
        alt = desc.alternatives[0]
        assert alt.alternative_key == "plain"
        assert alt.demand_report.per_entry_point == {}

    def test_descriptor_is_deterministic(self, connection_program, schema, rules):
        a = build_descriptor(connection_program, schema, rules)
        b = build_descriptor(connection_program, schema, rules)
        assert a.canonical() == b.canonical()

    def test_pruning_agrees_with_brute_force_dominance(
        self, connection_program, schema, rules
    ):
        full = build_descriptor(connection_program, schema, rules, prune=False)
        pruned = build_descriptor(connection_program, schema, rules, prune=True)
        candidates = []
        for binding in enumerate_bindings(connection_program):
            report = analyze_adaptation(connection_program, binding)
            candidates.append(Candidate(binding, report, derive_offered_sls(report, rules)))
        expected_keys = [
            c.binding.key()
            for c in candidates
            if not any(o is not c and dominates(o, c, schema) for o in candidates)
        ]
        assert [a.alternative_key for a in pruned.alternatives] == expected_keys
        assert len(full.alternatives) == 4

    def test_descriptor_json_round_trips_canonically(self, connection_descriptor):
        doc = connection_descriptor.to_json()
        assert json.loads(connection_descriptor.canonical()) == json.loads(
            canonical_json(doc)
        )
        assert doc["functionality"]["entry_points"] == [
            "Connection.connect",
            "Connection.send",
        ]
        for alt in doc["alternatives"]:
            assert alt["artifact_digest"] == sha256_hex(alt["artifact"].encode())


class TestPruningSoundness:
    @pytest.mark.parametrize("seed", range(20))
    def test_pruned_candidates_are_covered(self, seed, schema, rules):
        import random

        from aslkit.resources import ResourceSupply, fits as fits_fn
        from aslkit.sls import satisfies

        program = random_program(seed, max_stmts=25)
        candidates = []
        for binding in enumerate_bindings(program):
            report = analyze_adaptation(program, binding)
            candidates.append(Candidate(binding, report, derive_offered_sls(report, rules)))
        survivors = prune_dominated(candidates, schema)
        rng = random.Random(seed)
        for _ in range(30):
            supply = ResourceSupply(
                {n: rng.randint(0, 60) for n in ("Energy", "Net", "Memory", "Disk")},
                frozenset(n for n in ("WiFi", "BT", "GPS", "Cam") if rng.random() < 0.5),
            )
            requested = {
                d: Level(rng.randint(0, 2)) for d in schema.names if rng.random() < 0.5
            }
            for cand in candidates:
                ok = cand.report.fits(supply) and satisfies(
                    cand.offered_sls, requested, schema
                )
                if ok:
                    assert any(
                        s.report.fits(supply) and satisfies(s.offered_sls, requested, schema)
                        for s in survivors
                    ), f"seed={seed} uncovered candidate {cand.binding.key()}"
