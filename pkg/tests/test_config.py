"""
Tests for YAML experiment specs
"""

import pytest
import yaml

from noma_access.access.simulator import DetectionMode, Scheme
from noma_access.errors import ConfigError
from noma_access.harness.config import (
    DEFAULT_CONFIG,
    deep_merge,
    load_spec,
    parse_preset,
    validate_config,
)
from noma_access.phy.detection_table import TableOverflow


def write_yaml(tmp_path, config, name='config.yaml'):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(config))
    return path


class TestDefaults:
    def test_default_spec(self):
        spec = load_spec()
        assert spec.slot_count == 4
        assert [c.device_count for c in spec.clusters] == [8, 8]
        assert spec.scheme is Scheme.A
        assert spec.detection_mode is DetectionMode.PHYSICAL
        assert spec.lambda_values[0] == 0.1
        assert spec.network_label == '4;8+8'

    def test_defaults_validate(self):
        validate_config(DEFAULT_CONFIG)


class TestPresets:
    @pytest.mark.parametrize('preset, expected', [
        ('4;8+8', (4, [8, 8])),
        ('{8;16+16}', (8, [16, 16])),
        ('2; 3 + 1', (2, [3, 1])),
        ('4;5', (4, [5])),
    ])
    def test_parse(self, preset, expected):
        assert parse_preset(preset) == expected

    def test_malformed(self):
        with pytest.raises(ConfigError, match='network.preset'):
            parse_preset('four slots')

    def test_preset_overrides_explicit_sizes(self, tmp_path):
        path = write_yaml(tmp_path, {'network': {'preset': '16;32+32', 'slot_count': 2}})
        spec = load_spec(path)
        assert spec.slot_count == 16
        assert [c.device_count for c in spec.clusters] == [32, 32]


class TestValidation:
    def test_field_is_named(self, tmp_path):
        path = write_yaml(tmp_path, {'network': {'slot_count': 0}})
        with pytest.raises(ConfigError) as excinfo:
            load_spec(path)
        assert excinfo.value.field == 'network.slot_count'

    def test_unknown_key(self, tmp_path):
        path = write_yaml(tmp_path, {'agent': {'gamma': 0.9}})
        with pytest.raises(ConfigError, match='gamma'):
            load_spec(path)

    def test_lambda_out_of_range(self):
        with pytest.raises(ConfigError) as excinfo:
            load_spec(overrides={'access': {'lambda_values': [0.5, 1.5]}})
        assert excinfo.value.field == 'access.lambda_values[1]'

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match='not found'):
            load_spec(tmp_path / 'absent.yaml')

    def test_invalid_yaml(self, tmp_path):
        path = tmp_path / 'broken.yaml'
        path.write_text('network: [unclosed\n')
        with pytest.raises(ConfigError, match='invalid YAML'):
            load_spec(path)

    def test_distances_cover_clusters(self):
        with pytest.raises(ConfigError, match='center_distances'):
            load_spec(overrides={'network': {'devices_per_cluster': [4, 4, 4]}})

    def test_lambda_switch_needs_both_fields(self):
        with pytest.raises(ConfigError, match='lambda_after'):
            load_spec(overrides={'experiment': {'lambda_switch_frame': 100}})

    def test_table_mode_three_clusters(self):
        overrides = {
            'network': {'devices_per_cluster': [2, 2, 2], 'center_distances': [300, 600, 900]},
            'access': {'detection_mode': 'table'},
        }
        with pytest.raises(ConfigError, match='detection_mode'):
            load_spec(overrides=overrides)

    def test_negative_phy_value(self):
        with pytest.raises(ConfigError, match='phy.tx_power'):
            load_spec(overrides={'phy': {'tx_power': -1}})

    def test_unknown_overflow_policy(self):
        with pytest.raises(ConfigError) as excinfo:
            load_spec(overrides={'access': {'table_overflow': 'clip'}})
        assert excinfo.value.field == 'access.table_overflow'


class TestSpec:
    def test_overrides_win_over_file(self, tmp_path):
        path = write_yaml(tmp_path, {'experiment': {'frames': 500, 'master_seed': 4}})
        spec = load_spec(path, {'experiment': {'frames': 50}})
        assert spec.frames == 50
        assert spec.master_seed == 4

    def test_hash_tracks_content(self):
        assert load_spec().spec_sha256 == load_spec().spec_sha256
        assert load_spec().spec_sha256 != load_spec(overrides={'experiment': {'master_seed': 1}}).spec_sha256

    def test_replication_seeds(self):
        spec = load_spec(overrides={'experiment': {'replications': 3, 'master_seed': 9}})
        seeds = spec.replication_seeds()
        assert len(set(seeds)) == 3
        assert seeds == load_spec(overrides={'experiment': {'replications': 3, 'master_seed': 9}}).replication_seeds()

    def test_sim_config(self):
        spec = load_spec(overrides={'access': {'scheme': 'B'}, 'agent': {'update_interval': 4}})
        config = spec.sim_config(0.7, frames=10)
        assert config.arrival_prob == 0.7
        assert config.scheme is Scheme.B
        assert config.update_interval == 4
        assert config.frames == 10

    def test_table_overflow_reaches_the_run(self):
        assert load_spec().table_overflow is TableOverflow.ERROR
        spec = load_spec(overrides={'access': {'detection_mode': 'table', 'table_overflow': 'saturate'}})
        config = spec.sim_config(1.0)
        assert config.detection_mode is DetectionMode.TABLE
        assert config.table_overflow is TableOverflow.SATURATE

    def test_deep_merge_keeps_siblings(self):
        merged = deep_merge({'a': {'b': 1, 'c': 2}}, {'a': {'c': 3}})
        assert merged == {'a': {'b': 1, 'c': 3}}
