import json
import os
import shutil
import tempfile
import unittest

from src.mtl.analogsim import all_vectors, random_vectors
from src.mtl.config import DeviceParams, find_benchmark
from src.mtl.interconnect import route
from src.mtl.netlist import load_bench, parse_bench
from src.mtl.report import (
    BaselineEntry,
    BaselineError,
    compare_baseline,
    comparison_table,
    find_baseline,
    gate_energy,
    load_baseline,
    network_report,
    sweep_table,
)
from src.mtl.tlgsynth import SynthesisError, synthesize
from tests.create_test_files import AND_BENCH, BUF_BENCH, C17_BENCH, WIDE_BENCH, random_bench

DEFAULTS = DeviceParams()
FJ = 1e-15


def build_report(text, params=DEFAULTS, name="n"):
    netlist = parse_bench(text, name=name)
    network = synthesize(netlist)
    _, nets = route(network, params)
    vectors = all_vectors(len(netlist.inputs))
    return network_report(netlist, network, nets, params, vectors)


class TestBaseline(unittest.TestCase):

    def test_table_reproduction(self):
        entries = load_baseline()
        self.assertEqual([e.name for e in entries], ["c432", "c499", "c880", "c1355", "c1908"])
        for entry in entries:
            result = compare_baseline(entry)
            self.assertAlmostEqual(result["energy_reduction_pct"], entry.published_energy_reduction, delta=0.1)
            self.assertAlmostEqual(result["edp_reduction_pct"], entry.published_edp_reduction, delta=0.1)

    def test_c432_and_c1908(self):
        c432 = BaselineEntry("c432", lut_delay=10.1, lut_energy=17362.56, mtl_delay=2, mtl_energy=510)
        result = compare_baseline(c432)
        self.assertAlmostEqual(result["energy_reduction_pct"], 97.06, places=2)
        self.assertAlmostEqual(result["edp_reduction_pct"], 99.42, places=2)
        c1908 = BaselineEntry("c1908", lut_delay=11.55, lut_energy=56930.13, mtl_delay=2, mtl_energy=1350)
        result = compare_baseline(c1908)
        self.assertAlmostEqual(result["energy_reduction_pct"], 97.63, places=2)
        self.assertAlmostEqual(result["edp_reduction_pct"], 99.59, places=2)

    def test_identical_numbers(self):
        same = BaselineEntry("x", lut_delay=5.0, lut_energy=100.0, mtl_delay=5.0, mtl_energy=100.0)
        result = compare_baseline(same)
        self.assertAlmostEqual(result["energy_reduction_pct"], 0.0)
        self.assertAlmostEqual(result["edp_reduction_pct"], 0.0)
        self.assertAlmostEqual(result["energy_ratio"], 1.0)

    def test_non_positive_baseline(self):
        with self.assertRaises(BaselineError):
            BaselineEntry("x", lut_delay=0.0, lut_energy=100.0, mtl_delay=2.0, mtl_energy=1.0)
        with self.assertRaises(BaselineError):
            BaselineEntry("x", lut_delay=1.0, lut_energy=-1.0, mtl_delay=2.0, mtl_energy=1.0)

    def test_comparison_table(self):
        table = comparison_table(load_baseline())
        self.assertEqual(len(table), 5)
        row = table.set_index("benchmark").loc["c432"]
        self.assertEqual(row["energy_reduction_pct"], 97.06)
        self.assertEqual(row["inputs"], 36)

    def test_report_replaces_mtl_numbers(self):
        entry = find_baseline("c432", load_baseline())
        report = build_report(C17_BENCH, name="c432")
        result = compare_baseline(entry, report)
        self.assertAlmostEqual(result["mtl_energy_fJ"], report.total_energy / FJ)
        self.assertAlmostEqual(result["mtl_delay_ns"], 2.0)
        self.assertIsNone(find_baseline("c17", load_baseline()))

    def test_bad_baseline_files(self):
        directory = tempfile.mkdtemp(prefix="mtl_report_")
        try:
            path = os.path.join(directory, "broken.json")
            with open(path, "w", encoding="utf-8") as f:
                f.write("{")
            with self.assertRaises(BaselineError):
                load_baseline(path)
            with open(path, "w", encoding="utf-8") as f:
                json.dump({"name": "c17"}, f)
            with self.assertRaises(BaselineError):
                load_baseline(path)
            with self.assertRaises(OSError):
                load_baseline(os.path.join(directory, "missing.json"))
        finally:
            shutil.rmtree(directory, ignore_errors=True)


class TestGateEnergy(unittest.TestCase):

    def test_and_gate(self):
        network = synthesize(parse_bench(AND_BENCH))
        energy = gate_energy(network, DEFAULTS, all_vectors(2))["y"]
        self.assertGreater(energy["summation"], 0.5 * FJ)
        self.assertLess(energy["summation"], 0.7 * FJ)
        self.assertAlmostEqual(energy["summation"], 0.5989583333 * FJ, places=24)
        self.assertAlmostEqual(energy["divider"], 0.6 * FJ, places=24)
        self.assertAlmostEqual(energy["total"], energy["summation"] + energy["divider"], places=30)

    def test_zero_delta_v(self):
        network = synthesize(parse_bench(AND_BENCH))
        energy = gate_energy(network, DEFAULTS.with_overrides(delta_v=0.0), all_vectors(2))["y"]
        self.assertEqual(energy["summation"], 0.0)

    def test_empty_sample(self):
        network = synthesize(parse_bench(AND_BENCH))
        with self.assertRaises(ValueError):
            gate_energy(network, DEFAULTS, [])


class TestNetworkReport(unittest.TestCase):

    def test_single_buffer(self):
        report = build_report(BUF_BENCH)
        self.assertEqual(report.gate_count, 1)
        self.assertEqual(report.fanouts, 1)
        self.assertAlmostEqual(report.total_energy, report.energy_per_gate + 20e-18, places=30)
        self.assertAlmostEqual(report.latency, 2e-9)
        self.assertAlmostEqual(report.throughput_period, 2e-9)

    def test_components(self):
        report = build_report(C17_BENCH)
        parts = (report.summation_energy, report.divider_energy, report.interconnect_energy)
        self.assertTrue(all(p >= 0 for p in parts))
        self.assertEqual(report.total_energy, sum(parts))
        self.assertEqual(report.gate_count, 9)
        self.assertEqual(report.stages, 3)
        self.assertAlmostEqual(report.latency, 3 * DEFAULTS.t_clk)
        self.assertAlmostEqual(report.edp, report.total_energy * DEFAULTS.t_clk)
        self.assertEqual(len(report.gate_frame()), 9)

    def test_per_gate_energy_band(self):
        for text in (C17_BENCH, WIDE_BENCH):
            report = build_report(text)
            self.assertGreaterEqual(report.energy_per_gate, 0.8 * FJ)
            self.assertLessEqual(report.energy_per_gate, 1.6 * FJ)
            self.assertLess(report.interconnect_share, 0.05)

    def test_divider_linearity(self):
        with_divider = build_report(C17_BENCH)
        without = build_report(C17_BENCH, DEFAULTS.with_overrides(p_div=0.0))
        self.assertAlmostEqual(
            with_divider.total_energy - without.total_energy, with_divider.gate_count * 0.6 * FJ, places=27
        )

    def test_to_dict(self):
        data = build_report(C17_BENCH).to_dict()
        self.assertEqual(data["gate_count"], 9)
        self.assertAlmostEqual(data["throughput_period_ns"], 2.0)
        self.assertAlmostEqual(
            data["total_energy_fJ"],
            data["summation_energy_fJ"] + data["divider_energy_fJ"] + data["interconnect_energy_fJ"],
        )
        self.assertGreater(data["current_stats_uA"]["maximum"], data["current_stats_uA"]["average"])

    def test_rejects_logical_only(self):
        netlist = parse_bench(WIDE_BENCH)
        with self.assertRaises(SynthesisError):
            network_report(netlist, synthesize(netlist, 3), [], DEFAULTS, all_vectors(6))


class TestSweep(unittest.TestCase):

    def test_c17(self):
        table = sweep_table(parse_bench(C17_BENCH))
        self.assertEqual(table["max_fanin"].tolist(), [2, 3, 4])
        self.assertEqual(table["logic_gates"].tolist(), [6, 6, 6])
        self.assertEqual(table["logical_only"].tolist(), [False, True, True])
        self.assertEqual(table["weight_levels"].tolist(), ["2", "1", "1"])

    def test_monotone_on_wide_gates(self):
        counts = sweep_table(parse_bench(WIDE_BENCH))["logic_gates"].tolist()
        self.assertEqual(counts, sorted(counts, reverse=True))
        self.assertGreater(counts[0], counts[-1])



class TestC432SizedEnergy(unittest.TestCase):

    def test_energy_scale(self):
        netlist = parse_bench(random_bench(), name="rand432")
        network = synthesize(netlist)
        _, nets = route(network, DEFAULTS)
        report = network_report(netlist, network, nets, DEFAULTS, random_vectors(len(netlist.inputs), 256, 0))
        self.assertEqual(report.gate_count, network.logic_count + network.buffer_count)
        self.assertGreaterEqual(report.energy_per_gate, 0.8 * FJ)
        self.assertLessEqual(report.energy_per_gate, 1.6 * FJ)
        self.assertLess(report.interconnect_share, 0.05)
        self.assertAlmostEqual(report.throughput_period, 2e-9)

    def test_sweep_is_monotone(self):
        counts = sweep_table(parse_bench(random_bench(seed=7)))["logic_gates"].tolist()
        self.assertEqual(counts, sorted(counts, reverse=True))
        self.assertGreater(counts[0], counts[-1])


@unittest.skipUnless(find_benchmark("c432"), "c432.bench not available")
class TestBenchmarkEnergy(unittest.TestCase):

    def test_c432_against_published_energy(self):
        netlist = load_bench(find_benchmark("c432"))
        network = synthesize(netlist)
        _, nets = route(network, DEFAULTS)
        report = network_report(netlist, network, nets, DEFAULTS, random_vectors(len(netlist.inputs), 256, 0))
        self.assertGreater(report.total_energy, 510 * FJ / 2)
        self.assertLess(report.total_energy, 510 * FJ * 2)
        self.assertEqual(report.throughput_period, 2e-9)

    def test_interconnect_share_on_benchmarks(self):
        for name in ("c432", "c499", "c880", "c1355", "c1908"):
            path = find_benchmark(name)
            if path is None:
                continue
            netlist = load_bench(path)
            network = synthesize(netlist)
            _, nets = route(network, DEFAULTS)
            report = network_report(netlist, network, nets, DEFAULTS, random_vectors(len(netlist.inputs), 64, 0))
            self.assertLess(report.interconnect_share, 0.05, name)
            counts = sweep_table(netlist)["logic_gates"].tolist()
            self.assertEqual(counts, sorted(counts, reverse=True), name)


if __name__ == "__main__":
    unittest.main()
