import json
import math

import numpy as np
import pytest

from agreeclust.agreement import Params
from agreeclust.evaluation import gen_gnp, gen_planted
from agreeclust.mpc import (MPC_ROUNDS, MpcCapViolation, MpcConfig, MpcConfigError,
                            MpcRoutingError, communication_budget, plan_resource_audit,
                            run_mpc_pipeline, shuffle)
from agreeclust.pipeline import run_inmem_pipeline
from agreeclust.sketch import build_sketches

from conftest import k_complete, path_graph


class TestConfig:
    def test_validation(self):
        with pytest.raises(MpcConfigError):
            MpcConfig(num_machines=0)
        with pytest.raises(MpcConfigError):
            MpcConfig(num_machines=2, delta=1.0)
        with pytest.raises(MpcConfigError):
            MpcConfig(num_machines=2, enforcement="panic")

    def test_resolved_cap(self):
        assert MpcConfig(num_machines=2, delta=0.9).resolved_cap(100) == math.ceil(100 ** 0.9)
        assert MpcConfig(num_machines=2, memory_cap=7).resolved_cap(100) == 7

    def test_strict_rejects_undersized_fleet(self, valid_params):
        g = gen_gnp(100, 0.4, seed=1)
        cfg = MpcConfig(num_machines=2, delta=0.51, enforcement="strict")
        with pytest.raises(MpcConfigError):
            run_mpc_pipeline(g, valid_params, cfg, mode="sketch")

    def test_audit_records_undersized_fleet(self, valid_params):
        g = gen_gnp(100, 0.4, seed=1)
        cfg = MpcConfig(num_machines=2, delta=0.51, enforcement="audit")
        _, trace = run_mpc_pipeline(g, valid_params, cfg, mode="sketch")
        assert any(v["kind"] == "capacity" for v in trace.violations)


class TestShuffle:
    def test_empty_outboxes(self):
        cfg = MpcConfig(num_machines=3, memory_cap=10)
        inboxes = shuffle([[], [], []], cfg)
        assert inboxes == [[], [], []]

    def test_all_to_one_receive_load(self):
        num = 5
        cfg = MpcConfig(num_machines=num, memory_cap=1000)
        outboxes = [[(("m", 0), (i,))] for i in range(num)]
        inboxes = shuffle(outboxes, cfg)
        assert len(inboxes[0]) == num
        assert all(not box for box in inboxes[1:])

    def test_strict_sender_overflow_names_machine_and_round(self):
        cap = 16
        cfg = MpcConfig(num_machines=2, enforcement="strict", memory_cap=cap)
        outboxes = [[(("m", 1), tuple(range(cap)))], []]  # cap + 1 words out
        with pytest.raises(MpcCapViolation) as err:
            shuffle(outboxes, cfg, label="overload")
        assert "machine 0" in str(err.value)
        assert "round 1" in str(err.value)
        assert err.value.info["kind"] == "sent"

    def test_strict_receiver_overflow(self):
        # three senders stay under the cap individually but overload one inbox
        cap = 16
        cfg = MpcConfig(num_machines=3, enforcement="strict", memory_cap=cap)
        outboxes = [[(("m", 0), tuple(range(7)))] for _ in range(3)]
        with pytest.raises(MpcCapViolation) as err:
            shuffle(outboxes, cfg, label="fan-in")
        assert err.value.info["kind"] == "recv"
        assert err.value.info["machine"] == 0
        assert err.value.info["words"] == 24

    def test_audit_records_instead_of_raising(self):
        from agreeclust.mpc import MpcTrace
        cap = 4
        cfg = MpcConfig(num_machines=2, enforcement="audit", memory_cap=cap)
        trace = MpcTrace(num_machines=2, memory_cap=cap)
        shuffle([[(("m", 0), (1, 2, 3, 4))], []], cfg, trace=trace)
        kinds = {v["kind"] for v in trace.violations}
        assert kinds == {"sent", "recv"}

    def test_malformed_key_rejected_by_pipeline_router(self):
        from agreeclust.mpc import Router
        router = Router(n=4, m=3, num_machines=10)
        cfg = MpcConfig(num_machines=10, memory_cap=10)
        with pytest.raises(MpcRoutingError):
            shuffle([[(("x", 1), (1,))]] + [[]] * 9, cfg, router=router)
        with pytest.raises(MpcRoutingError):
            router(())


class TestPipeline:
    def test_clique_one_cluster_fixed_rounds(self, valid_params):
        g = k_complete(4)
        cl, trace = run_mpc_pipeline(g, valid_params,
                                     MpcConfig(num_machines=2, delta=0.9), mode="sketch")
        assert cl.num_clusters == 1
        assert trace.rounds == MPC_ROUNDS

    def test_path_singletons_same_rounds(self, valid_params):
        cl, trace = run_mpc_pipeline(path_graph(3), valid_params,
                                     MpcConfig(num_machines=2, delta=0.9), mode="sketch")
        assert cl.num_clusters == 3
        assert trace.rounds == MPC_ROUNDS

    @pytest.mark.parametrize("mode", ["exact", "sketch"])
    def test_machine_count_replay_equivalence(self, valid_params, mode):
        g = gen_gnp(500, 0.1, seed=23)
        base = run_inmem_pipeline(g, valid_params, mode).clustering
        for machines in (2, 4, 8):
            cl, trace = run_mpc_pipeline(
                g, valid_params, MpcConfig(num_machines=machines, delta=0.9), mode=mode)
            assert cl.same_partition(base)
            assert trace.rounds == MPC_ROUNDS

    def test_deterministic_across_runs(self, valid_params):
        g = gen_planted(5, 12, 1.0, 0.01, seed=3)
        cfg = MpcConfig(num_machines=4, delta=0.9)
        a, _ = run_mpc_pipeline(g, valid_params, cfg, mode="sketch")
        b, _ = run_mpc_pipeline(g, valid_params, cfg, mode="sketch")
        assert np.array_equal(a.assignment, b.assignment)

    def test_round_count_independent_of_input(self, valid_params):
        rounds = set()
        for g in (k_complete(4), path_graph(7), gen_gnp(60, 0.2, seed=2),
                  gen_planted(3, 10, 1.0, 0.0, seed=1)):
            for machines in (2, 7):
                _, trace = run_mpc_pipeline(
                    g, valid_params, MpcConfig(num_machines=machines, delta=0.9))
                rounds.add(trace.rounds)
        assert rounds == {MPC_ROUNDS}

    def test_trace_json_schema(self, valid_params):
        _, trace = run_mpc_pipeline(k_complete(4), valid_params,
                                    MpcConfig(num_machines=2, delta=0.9))
        payload = json.loads(json.dumps(trace.to_json()))
        assert payload["rounds"] == MPC_ROUNDS
        assert len(payload["per_round"]) == MPC_ROUNDS
        for rec in payload["per_round"]:
            assert {"sent_max", "recv_max", "resident_max"} <= set(rec)
        assert payload["total_words"] > 0


class TestResourceAudit:
    def test_planned_config_has_zero_violations(self, valid_params):
        g = gen_gnp(350, 5 / 350, seed=41)
        cfg = plan_resource_audit(g, valid_params, mode="sketch")
        assert cfg.delta < 1.0
        cl, trace = run_mpc_pipeline(g, valid_params, cfg, mode="sketch")
        assert trace.violations == []
        # the cap dominates max degree plus the largest sketch
        cap = cfg.resolved_cap(g.n)
        sketches = build_sketches(g, valid_params)
        sketch_words = max(2 + s.samples_at_level.size + s.samples_at_next.size
                           for s in sketches)
        assert cap >= int(g.degrees.max()) + sketch_words
        assert cl.same_partition(run_inmem_pipeline(g, valid_params, "sketch").clustering)

    def test_total_communication_within_budget(self, valid_params):
        g = gen_gnp(300, 6 / 300, seed=4)
        cfg = plan_resource_audit(g, valid_params, mode="sketch")
        _, trace = run_mpc_pipeline(g, valid_params, cfg, mode="sketch")
        _, budget = communication_budget(g, valid_params)
        assert trace.total_words <= budget

    def test_infeasible_input_reported(self, valid_params):
        dense = gen_planted(10, 20, 1.0, 0.005, seed=2)  # peak load reaches n
        with pytest.raises(ValueError, match="sublinear"):
            plan_resource_audit(dense, valid_params, mode="sketch")
