"""Config file parsing: schema, overrides, and line-numbered diagnostics."""

import math
import textwrap

import pytest

from csmalink import ConfigError, load_config, parse_config

BASE = """\
schema_version = 1
seed = 7
order = 64
plan.kind = address-bit
plan.address_positions = 3, 2
snr.mode = symbol
snr.start_db = 0
snr.stop_db = 4
snr.step_db = 2
stop.min_symbols = 10000
stop.min_errors = 10
stop.symbol_cap = 10000
"""


def write(tmp_path, text, name="exp.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestHappyPath:
    """Well-formed files load into experiment configs."""

    def test_single_run(self, tmp_path):
        loaded = load_config(write(tmp_path, BASE))
        assert loaded.single
        config = loaded.single_run()
        assert config.order == 64
        assert config.seed == 7
        assert config.plan.address_positions == (3, 2)
        assert config.sweep.points() == (0.0, 2.0, 4.0)
        assert config.stop.min_symbols == 10_000

    def test_defaults_fill_unset_keys(self, tmp_path):
        text = "schema_version = 1\norder = 16\nplan.kind = single-user\n"
        config = load_config(write(tmp_path, text)).single_run()
        assert config.sweep.points()[0] == 0.0
        assert config.stop.min_symbols == 200_000
        assert config.geometry.fft_size == 256
        assert config.schedule.kind == "round-robin"

    def test_inf_snr(self, tmp_path):
        text = BASE.replace("snr.start_db = 0", "snr.start_db = inf")
        text = text.replace("snr.stop_db = 4", "snr.stop_db = inf")
        config = load_config(write(tmp_path, text)).single_run()
        assert config.sweep.points() == (math.inf,)

    def test_comments_and_blanks_ignored(self, tmp_path):
        text = "# header\n\n" + BASE + "\n  # trailing comment\n"
        assert load_config(write(tmp_path, text)).single

    def test_geometry_keys(self, tmp_path):
        text = BASE + textwrap.dedent("""\
            geometry.subcarriers = 6
            geometry.symbols_per_slot = 7
            geometry.fft_size = 128
            geometry.subcarrier_offset = 8
            geometry.cp_length = 16
        """)
        geometry = load_config(write(tmp_path, text)).single_run().geometry
        assert geometry.subcarriers == 6
        assert geometry.symbols_per_slot == 7
        assert geometry.fft_size == 128

    def test_weighted_schedule_keys(self, tmp_path):
        text = BASE.replace("plan.address_positions = 3, 2",
                            "plan.address_positions = 3, 2\n"
                            "schedule.kind = weighted\n"
                            "schedule.weights = 2, 1, 1, 1")
        schedule = load_config(write(tmp_path, text)).single_run().schedule
        assert schedule.kind == "weighted"
        assert schedule.weights == (2, 1, 1, 1)


class TestMultiRun:
    """run.<name>.* sections produce named experiment variants."""

    def test_overrides_merge_over_base(self, tmp_path):
        text = BASE + textwrap.dedent("""\
            run.narrow.snr.stop_db = 2
            run.wide.snr.stop_db = 8
            run.wide.seed = 99
        """)
        loaded = load_config(write(tmp_path, text))
        assert not loaded.single
        assert list(loaded.runs) == ["narrow", "wide"]
        assert loaded.runs["narrow"].sweep.stop_db == 2.0
        assert loaded.runs["narrow"].seed == 7
        assert loaded.runs["wide"].sweep.stop_db == 8.0
        assert loaded.runs["wide"].seed == 99

    def test_run_can_change_plan_kind(self, tmp_path):
        text = BASE + textwrap.dedent("""\
            run.solo.plan.kind = single-user
            run.solo.order = 16
            run.split.plan.kind = address-bit
        """)
        loaded = load_config(write(tmp_path, text))
        assert len(loaded.runs["solo"].plan.build(16).users) == 1
        assert loaded.runs["split"].order == 64

    def test_single_run_accessor_rejects_multi(self, tmp_path):
        text = BASE + "run.a.seed = 1\nrun.b.seed = 2\n"
        loaded = load_config(write(tmp_path, text))
        with pytest.raises(ConfigError, match="--run"):
            loaded.single_run()


class TestLookupFiles:
    """lookup_file paths resolve relative to the config file."""

    def test_relative_resolution(self, tmp_path):
        (tmp_path / "pair.map").write_text(
            "1,0,00\n1,1,01\n2,0,10\n2,1,11\n"
        )
        text = ("schema_version = 1\norder = 4\n"
                "plan.kind = lookup-table\nplan.lookup_file = pair.map\n")
        config = load_config(write(tmp_path, text)).single_run()
        plan = config.plan.build(4)
        assert len(plan.users) == 2
        assert plan.users[0].codewords == (0, 1)

    def test_missing_lookup_file(self, tmp_path):
        text = ("schema_version = 1\norder = 4\n"
                "plan.kind = lookup-table\nplan.lookup_file = absent.map\n")
        with pytest.raises(ConfigError, match="absent.map"):
            load_config(write(tmp_path, text))

    def test_lookup_width_must_match_order(self, tmp_path):
        (tmp_path / "pair.map").write_text("1,0,00\n1,1,01\n")
        text = ("schema_version = 1\norder = 16\n"
                "plan.kind = lookup-table\nplan.lookup_file = pair.map\n")
        with pytest.raises(ConfigError, match="order"):
            load_config(write(tmp_path, text))


class TestDiagnostics:
    """Errors carry the file path and the offending line number."""

    def test_missing_schema_version(self, tmp_path):
        with pytest.raises(ConfigError, match="schema_version"):
            load_config(write(tmp_path, "order = 16\nplan.kind = single-user\n"))

    def test_wrong_schema_version(self, tmp_path):
        text = BASE.replace("schema_version = 1", "schema_version = 2")
        with pytest.raises(ConfigError, match="schema_version"):
            load_config(write(tmp_path, text))

    def test_schema_version_not_per_run(self, tmp_path):
        text = BASE + "run.x.schema_version = 1\n"
        with pytest.raises(ConfigError, match="schema_version"):
            load_config(write(tmp_path, text))

    def test_unknown_key_names_line(self, tmp_path):
        text = BASE + "snr.start = 3\n"
        with pytest.raises(ConfigError, match=":13:"):
            load_config(write(tmp_path, text))

    def test_duplicate_key_rejected(self, tmp_path):
        text = BASE + "seed = 8\n"
        with pytest.raises(ConfigError, match="duplicate"):
            load_config(write(tmp_path, text))

    def test_missing_equals_sign(self, tmp_path):
        text = BASE + "stop.min_errors 5\n"
        with pytest.raises(ConfigError, match=":13:"):
            load_config(write(tmp_path, text))

    def test_bad_integer_value(self, tmp_path):
        text = BASE.replace("seed = 7", "seed = seven")
        with pytest.raises(ConfigError, match="seed"):
            load_config(write(tmp_path, text))

    def test_bad_float_value(self, tmp_path):
        text = BASE.replace("snr.start_db = 0", "snr.start_db = zero")
        with pytest.raises(ConfigError, match="snr.start_db"):
            load_config(write(tmp_path, text))

    def test_semantic_error_names_run(self, tmp_path):
        text = BASE + "run.bad.plan.address_positions = 3, 9\n"
        with pytest.raises(ConfigError, match="bad"):
            load_config(write(tmp_path, text))

    def test_plan_kind_required(self, tmp_path):
        text = "schema_version = 1\norder = 16\n"
        with pytest.raises(ConfigError, match="plan.kind"):
            load_config(write(tmp_path, text))

    def test_order_required(self, tmp_path):
        text = "schema_version = 1\nplan.kind = single-user\n"
        with pytest.raises(ConfigError, match="order"):
            load_config(write(tmp_path, text))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(str(tmp_path / "nope.cfg"))

    def test_parse_config_reports_source_name(self):
        with pytest.raises(ConfigError, match="sweep.cfg"):
            parse_config("schema_version = 1\nbogus = 1\n", path="sweep.cfg")


class TestShippedFixtures:
    """Packaged example configs stay loadable."""

    @pytest.mark.parametrize("name", [
        "shared_vs_exclusive.cfg", "user_scaling.cfg", "mapping_variants.cfg",
    ])
    def test_fixture_loads(self, name):
        import csmalink
        import os
        path = os.path.join(os.path.dirname(csmalink.__file__), "fixtures", name)
        loaded = load_config(path)
        assert loaded.runs
        for config in loaded.runs.values():
            config.plan.build(config.order)
