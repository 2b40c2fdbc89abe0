import itertools
import os
import shutil
import tempfile
import unittest

from src.mtl.netlist import eval_netlist, iter_vectors, parse_bench
from src.mtl.tlgsynth import (
    MTL_BIASES,
    MTL_MAPPING,
    MTL_WEIGHTS,
    ROLE_BUFFER,
    SynthesisError,
    TlgGate,
    check_stage_discipline,
    decompose,
    evaluate_network,
    evaluate_network_batch,
    load_network,
    map_tlg,
    network_from_dict,
    network_from_json,
    network_signal_values,
    network_to_dict,
    network_to_json,
    pipeline,
    save_network,
    synthesis_stats,
    synthesize,
    tlg_eval,
    weight_levels,
)
from tests.create_test_files import (
    AND_BENCH,
    C17_BENCH,
    DIAMOND_BENCH,
    PASSTHROUGH_BENCH,
    WIDE_BENCH,
    chain_bench,
    ripple_adder_bench,
)


def single_gate(func: str, arity: int):
    names = [f"i{k}" for k in range(arity)]
    text = "".join(f"INPUT({n})\n" for n in names) + f"OUTPUT(y)\ny = {func}({', '.join(names)})\n"
    return parse_bench(text, name=f"{func.lower()}{arity}")


class TestDecompose(unittest.TestCase):

    def assertEquivalent(self, original, decomposed):
        for vector in iter_vectors(len(original.inputs)):
            self.assertEqual(eval_netlist(original, vector), eval_netlist(decomposed, vector), vector)

    def test_and4_becomes_three_ands(self):
        result = decompose(single_gate("AND", 4), 2)
        self.assertEqual(len(result.gates), 3)
        self.assertTrue(all(g.func == "AND" and len(g.fanins) == 2 for g in result.gates))

    def test_nand2_unchanged(self):
        netlist = single_gate("NAND", 2)
        self.assertEqual(decompose(netlist, 2).gates, netlist.gates)

    def test_nor3(self):
        netlist = single_gate("NOR", 3)
        result = decompose(netlist, 2)
        self.assertEqual([g.func for g in result.gates], ["OR", "NOR"])
        self.assertEqual(result.gates[0].fanins, ("i0", "i1"))
        self.assertEqual(result.gates[1].fanins, (result.gates[0].id, "i2"))
        self.assertEquivalent(netlist, result)

    def test_bounds_and_equivalence(self):
        netlist = parse_bench(WIDE_BENCH)
        for bound in (2, 3, 4):
            result = decompose(netlist, bound)
            self.assertTrue(all(len(g.fanins) <= bound for g in result.gates))
            self.assertEquivalent(netlist, result)

    def test_minimal_gate_count(self):
        for n in range(2, 12):
            for bound in (2, 3, 4):
                result = decompose(single_gate("OR", n), bound)
                self.assertEqual(len(result.gates), -(-(n - 1) // (bound - 1)), (n, bound))

    def test_parity_bound(self):
        result = decompose(single_gate("XOR", 4), 4, parity_fanin=2)
        self.assertEqual(len(result.gates), 3)

    def test_bad_bound(self):
        with self.assertRaises(SynthesisError):
            decompose(single_gate("AND", 2), 1)


class TestMapping(unittest.TestCase):

    def test_alphabet(self):
        for func, (weights, bias) in MTL_MAPPING.items():
            self.assertTrue(all(w in MTL_WEIGHTS for w in weights), func)
            self.assertIn(bias, MTL_BIASES)

    def test_and_weights(self):
        network = map_tlg(single_gate("AND", 2))
        gate = network.gates[0]
        self.assertEqual((gate.weights, gate.bias), ((2, 2), -3))
        self.assertEqual(tlg_eval(gate, (1, 1)), 1)
        self.assertEqual(tlg_eval(gate, (1, 0)), 0)

    def test_buf_and_not(self):
        buf = map_tlg(single_gate("BUF", 1)).gates[0]
        self.assertEqual((buf.weights, buf.bias), ((2,), -1))
        self.assertEqual([tlg_eval(buf, (x,)) for x in (0, 1)], [0, 1])
        inv = map_tlg(single_gate("NOT", 1)).gates[0]
        self.assertEqual([tlg_eval(inv, (x,)) for x in (0, 1)], [1, 0])

    def test_truth_tables(self):
        for func in ("AND", "OR", "NAND", "NOR", "XOR", "XNOR"):
            netlist = single_gate(func, 2)
            network = map_tlg(netlist)
            for vector in itertools.product((0, 1), repeat=2):
                with self.subTest(func=func, vector=vector):
                    self.assertEqual(evaluate_network(network, vector), eval_netlist(netlist, vector))

    def test_xor_cluster(self):
        network = map_tlg(single_gate("XOR", 2))
        self.assertEqual([g.id for g in network.gates], ["y_or", "y_nand", "y"])
        xnor = map_tlg(single_gate("XNOR", 2))
        self.assertEqual([g.id for g in xnor.gates], ["y_or", "y_nand", "y_xor", "y"])
        self.assertEqual(xnor.gates[-1].weights, (-2,))

    def test_rejects_wide_gate(self):
        with self.assertRaises(SynthesisError):
            map_tlg(single_gate("AND", 3))

    def test_tlg_eval_cases(self):
        self.assertEqual(tlg_eval(TlgGate("o", ("a", "b"), (2, 2), -1), (0, 1)), 1)
        self.assertEqual(tlg_eval(TlgGate("n", ("a", "b"), (-2, -2), 1), (0, 0)), 1)
        self.assertEqual(tlg_eval(TlgGate("g", ("a", "b"), (2, 2), -3), (1, 0)), 0)

    def test_even_sum_is_corrupt(self):
        with self.assertRaises(SynthesisError):
            tlg_eval(TlgGate("g", ("a", "b"), (2, 2), -2), (1, 0))

    def test_resolution_is_one_quarter(self):
        for func, (weights, bias) in MTL_MAPPING.items():
            if len(weights) != 2:
                continue
            sums = [sum(w * x for w, x in zip(weights, v)) for v in itertools.product((0, 1), repeat=2)]
            smallest = min(abs(s + bias) for s in sums)
            largest = max(abs(s) for s in sums)
            self.assertEqual(smallest / largest, 0.25, func)


class TestPipeline(unittest.TestCase):

    def test_skip_edge_gets_one_buffer(self):
        netlist = parse_bench("INPUT(a)\nOUTPUT(g2)\ng1 = NOT(a)\ng2 = AND(a, g1)")
        network = synthesize(netlist)
        self.assertEqual(network.buffer_count, 1)
        self.assertEqual(network.depth, 2)
        self.assertEqual(set(network.stages[0]), {"a_b0", "g1"})
        check_stage_discipline(network)

    def test_aligned_chain_needs_no_buffers(self):
        network = synthesize(parse_bench(chain_bench(5)))
        self.assertEqual(network.buffer_count, 0)
        self.assertEqual(network.depth, 5)

    def test_c17(self):
        netlist = parse_bench(C17_BENCH, name="c17")
        network = synthesize(netlist)
        self.assertEqual(network.logic_count, 6)
        self.assertEqual(network.buffer_count, 3)
        self.assertEqual(network.depth, 3)
        for vector in iter_vectors(5):
            self.assertEqual(evaluate_network(network, vector), eval_netlist(netlist, vector))

    def test_shared_buffer_chains(self):
        netlist = parse_bench(DIAMOND_BENCH)
        network = synthesize(netlist)
        buffers = sorted(g.id for g in network.gates if g.role == ROLE_BUFFER)
        self.assertEqual(buffers, ["a_b0", "a_b1", "out_b2"])
        self.assertEqual(network.output_drivers["out"], "out_b2")
        for vector in iter_vectors(2):
            self.assertEqual(evaluate_network(network, vector), eval_netlist(netlist, vector))

    def test_xor_beside_raw_input(self):
        netlist = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(z)\nx = XOR(a, b)\nz = AND(x, a)")
        network = synthesize(netlist)
        self.assertEqual(network.depth, 3)
        self.assertEqual(network.buffer_count, 2)
        for vector in iter_vectors(2):
            self.assertEqual(evaluate_network(network, vector), eval_netlist(netlist, vector))

    def test_passthrough(self):
        network = synthesize(parse_bench(PASSTHROUGH_BENCH))
        self.assertEqual(network.depth, 0)
        self.assertEqual(evaluate_network(network, (1, 0)), (0, 1))

    def test_single_and(self):
        network = synthesize(parse_bench(AND_BENCH))
        self.assertEqual((network.logic_count, network.buffer_count, network.depth), (1, 0, 1))

    def test_discipline_violation_detected(self):
        data = network_to_dict(synthesize(parse_bench(DIAMOND_BENCH)))
        data["gates"] = [g for g in data["gates"] if g["id"] != "a_b1"]
        data["stages"] = [[i for i in s if i != "a_b1"] for s in data["stages"]]
        for gate in data["gates"]:
            gate["fanins"] = ["a_b0" if f == "a_b1" else f for f in gate["fanins"]]
        with self.assertRaises(SynthesisError):
            network_from_dict(data)


class TestSynthesize(unittest.TestCase):

    def test_equivalence_on_fixtures(self):
        for text in (C17_BENCH, WIDE_BENCH, DIAMOND_BENCH, ripple_adder_bench(3)):
            netlist = parse_bench(text)
            vectors = list(iter_vectors(len(netlist.inputs)))
            expected = [eval_netlist(netlist, v) for v in vectors]
            for bound in (2, 3, 4):
                network = synthesize(netlist, bound)
                got = [tuple(row) for row in evaluate_network_batch(network, vectors).tolist()]
                self.assertEqual(got, expected, (netlist.name, bound))

    def test_odd_sums_everywhere(self):
        netlist = parse_bench(ripple_adder_bench(3))
        network = synthesize(netlist)
        values = network_signal_values(network, list(iter_vectors(len(netlist.inputs))))
        for gate in network.gates:
            total = gate.bias + sum(w * values[f] for w, f in zip(gate.weights, gate.fanins))
            self.assertTrue(((total % 2) == 1).all(), gate.id)

    def test_counts_do_not_grow_with_fanin(self):
        for text in (C17_BENCH, WIDE_BENCH, ripple_adder_bench(4)):
            netlist = parse_bench(text)
            counts = [synthesize(netlist, k).logic_count for k in (2, 3, 4)]
            self.assertEqual(counts, sorted(counts, reverse=True), counts)

    def test_wide_fanin_is_logical_only(self):
        netlist = parse_bench(WIDE_BENCH)
        self.assertTrue(synthesize(netlist, 2).mappable)
        self.assertFalse(synthesize(netlist, 3).mappable)
        self.assertFalse(synthesize(netlist, 4).mappable)
        self.assertEqual(weight_levels(synthesize(netlist, 2))["weight_levels"], [2])
        self.assertEqual(weight_levels(synthesize(netlist, 4))["weight_levels"], [1])

    def test_unsupported_bound(self):
        with self.assertRaises(SynthesisError):
            synthesize(parse_bench(AND_BENCH), 5)

    def test_stats(self):
        stats = synthesis_stats(synthesize(parse_bench(C17_BENCH, name="c17")))
        self.assertEqual(stats["logic_gates"], 6)
        self.assertEqual(stats["buffers"], 3)
        self.assertEqual(stats["stages"], 3)
        self.assertEqual(stats["fanout_edges"], 15)
        self.assertEqual(stats["threshold_levels"], [3])


class TestSerialization(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.test_data_dir = tempfile.mkdtemp(prefix="mtl_tlg_")

    @classmethod
    def tearDownClass(cls):
        shutil.rmtree(cls.test_data_dir, ignore_errors=True)

    def test_json_round_trip(self):
        network = synthesize(parse_bench(C17_BENCH, name="c17"))
        self.assertEqual(network_from_json(network_to_json(network)), network)
        path = save_network(network, os.path.join(self.test_data_dir, "c17.json"))
        self.assertEqual(load_network(path), network)

    def test_json_lists_fanout(self):
        data = network_to_dict(synthesize(parse_bench(C17_BENCH)))
        self.assertEqual(sorted(data["fanout"]["11"]), ["16", "19"])

    def test_buffer_count_follows_gates(self):
        data = network_to_dict(synthesize(parse_bench(C17_BENCH)))
        self.assertEqual(data["buffer_count"], 3)
        data["buffer_count"] = 99
        self.assertEqual(network_from_dict(data).buffer_count, 3)
        del data["buffer_count"]
        self.assertEqual(network_from_dict(data).buffer_count, 3)

    def test_corrupt_files(self):
        with self.assertRaises(SynthesisError):
            network_from_json("{not json")
        data = network_to_dict(synthesize(parse_bench(AND_BENCH)))
        data["gates"][0]["bias"] = 0
        with self.assertRaises(SynthesisError):
            network_from_dict(data)
        del data["inputs"]
        with self.assertRaises(SynthesisError):
            network_from_dict(data)


if __name__ == "__main__":
    unittest.main()
