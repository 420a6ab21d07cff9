import csv
import random

import pytest

from focansim.energy import (
    EnergyLedger,
    PowerModel,
    accumulate,
    cpu_power,
    network_energy,
    report,
    write_report_csv,
)
from focansim.topology import CommType, Medium


class TestCpuPower:
    def test_idle_draw(self):
        assert cpu_power(0.0, PowerModel()) == 105.0

    def test_full_draw(self):
        assert cpu_power(1.0, PowerModel()) == 195.0

    def test_midpoint(self):
        assert cpu_power(0.5, PowerModel()) == 150.0

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            cpu_power(-0.1, PowerModel())
        with pytest.raises(ValueError):
            cpu_power(1.1, PowerModel())

    def test_model_invariants(self):
        with pytest.raises(ValueError):
            PowerModel(p_idle_w=200.0, p_max_w=195.0)
        with pytest.raises(ValueError):
            PowerModel(nic_wired_j_per_bit=-1.0)


class TestNetworkEnergy:
    def test_zero_bits_zero_joules(self):
        assert network_energy(0, Medium.WIRED, PowerModel()) == 0.0

    def test_wired_megabit_hand_computed(self):
        model = PowerModel(nic_wired_j_per_bit=5e-8)
        assert network_energy(1e6, Medium.WIRED, model) == pytest.approx(5e-8 * 1e6)

    def test_linearity_in_bits(self):
        model = PowerModel()
        assert network_energy(2e6, Medium.WIRELESS, model) == pytest.approx(
            2 * network_energy(1e6, Medium.WIRELESS, model)
        )

    def test_split_between_attributed_fns(self):
        ledger = EnergyLedger(model=PowerModel(nic_wired_j_per_bit=5e-8))
        total = ledger.charge_network(1e6, Medium.WIRED, CommType.SECONDARY, "f0", "f1", 0.0)
        assert total == pytest.approx(0.05)
        assert ledger.net_j[("f0", CommType.SECONDARY)] == pytest.approx(0.025)
        assert ledger.net_j[("f1", CommType.SECONDARY)] == pytest.approx(0.025)

    def test_unattributed_half_preserved(self):
        ledger = EnergyLedger()
        total = ledger.charge_network(1e6, Medium.WIRELESS, CommType.PRIMARY, "f0", None, 0.0)
        assert ledger.unattributed_net_j == pytest.approx(total / 2)
        assert ledger.net_total_j == pytest.approx(total)


class TestAccumulate:
    def test_idle_fn_for_1000s(self):
        ledger = EnergyLedger()
        accumulate(ledger, {"f0": 0.0}, 1000.0, start_s=0.0)
        assert ledger.cpu_j["f0"] == pytest.approx(105_000.0, rel=1e-12)

    def test_two_idle_fns_for_1s(self):
        ledger = EnergyLedger()
        accumulate(ledger, {"f0": 0.0, "f1": 0.0}, 1.0)
        assert ledger.cpu_total_j == pytest.approx(210.0)

    def test_full_load_10s(self):
        ledger = EnergyLedger()
        accumulate(ledger, {"f0": 1.0}, 10.0)
        assert ledger.cpu_j["f0"] == pytest.approx(1950.0)

    def test_zero_interval_rejected(self):
        with pytest.raises(ValueError):
            EnergyLedger().charge_cpu("f0", 0.0, 0.0, 0.0)

    def test_monotone_over_time(self):
        ledger = EnergyLedger()
        rng = random.Random(1)
        last_total = 0.0
        t = 0.0
        for _ in range(50):
            dt = rng.uniform(0.1, 5.0)
            accumulate(ledger, {"f0": rng.random()}, dt, start_s=t)
            t += dt
            assert ledger.total_j >= last_total
            last_total = ledger.total_j

    def test_per_round_buckets_sum_to_total(self):
        ledger = EnergyLedger(round_s=1.0)
        rng = random.Random(2)
        t = 0.0
        for _ in range(40):
            dt = rng.uniform(0.05, 3.0)
            accumulate(ledger, {"f0": rng.random()}, dt, start_s=t)
            ledger.charge_network(
                rng.uniform(0, 1e6), Medium.WIRED, CommType.SECONDARY, "f0", "f1", t
            )
            t += dt
        assert sum(ledger.per_round_j.values()) == pytest.approx(ledger.total_j, rel=1e-9)

    def test_bounds_for_any_workload(self):
        ledger = EnergyLedger()
        rng = random.Random(3)
        horizon = 0.0
        for _ in range(30):
            dt = rng.uniform(0.1, 2.0)
            accumulate(ledger, {"f0": rng.random()}, dt, start_s=horizon)
            horizon += dt
        avg_power = ledger.cpu_j["f0"] / horizon
        assert 105.0 <= avg_power <= 195.0


class TestReport:
    def test_idle_only_run_reports_105w(self):
        ledger = EnergyLedger()
        accumulate(ledger, {"f0": 0.0}, 1000.0)
        rows = report(ledger, run_id="r", horizon_s=1000.0)
        fn_rows = [r for r in rows if r.fn_id == "f0"]
        assert fn_rows[0].avg_power_w == pytest.approx(105.0)

    def test_empty_ledger_reports_nothing(self):
        rows = report(EnergyLedger(), run_id="r", horizon_s=10.0)
        assert rows == []

    def test_class_rows_sum_to_network_total(self):
        ledger = EnergyLedger()
        rng = random.Random(5)
        classes = list(CommType)
        for i in range(60):
            ledger.charge_network(
                rng.uniform(1, 1e6),
                rng.choice([Medium.WIRED, Medium.WIRELESS]),
                rng.choice(classes),
                f"f{i % 3}",
                f"f{(i + 1) % 3}",
                rng.uniform(0, 100),
            )
        rows = report(ledger, run_id="r", horizon_s=100.0)
        class_sum = sum(r.net_j for r in rows if r.comm_type)
        assert class_sum == pytest.approx(ledger.net_total_j, rel=1e-9)

    def test_conservation_against_charge_log(self):
        ledger = EnergyLedger()
        rng = random.Random(6)
        t = 0.0
        for _ in range(100):
            dt = rng.uniform(0.01, 2.0)
            accumulate(ledger, {"f0": rng.random(), "f1": rng.random()}, dt, start_s=t)
            ledger.charge_network(
                rng.uniform(0, 1e7), Medium.WIRELESS, CommType.PRIMARY, "f0", None, t
            )
            t += dt
        assert ledger.total_j == pytest.approx(sum(ledger.charge_log), rel=1e-9)

    def test_csv_roundtrip_and_format(self, tmp_path):
        ledger = EnergyLedger()
        accumulate(ledger, {"f0": 0.25}, 10.0)
        ledger.charge_network(1e6, Medium.WIRED, CommType.SECONDARY, "f0", "f1", 1.0)
        rows = report(ledger, run_id="run-1", horizon_s=10.0)
        path = tmp_path / "energy.csv"
        write_report_csv(rows, path)
        with open(path, newline="") as fh:
            parsed = list(csv.DictReader(fh))
        assert parsed[0]["run_id"] == "run-1"
        fn_row = next(r for r in parsed if r["fn_id"] == "f0")
        assert "." in fn_row["cpu_j"] and len(fn_row["cpu_j"].split(".")[1]) == 6
        round_rows = [r for r in parsed if r["round_index"] != ""]
        assert round_rows, "per-round rows must be present"
