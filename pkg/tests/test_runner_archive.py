# -*- coding: utf-8 -*-
import json
import logging
import queue
import threading
from pathlib import Path

import pytest

from exporter.archive import ArchiveError, make_header, merge_archives, read_archive, write_archive
from generator.preprocessor import ExpansionTooLarge
from threads import runner as runner_module
from threads.runner import ExperimentRunner, run_gts
from utils.config import ExperimentConfig, load_config, parse_shard, save_config
from utils.errors import ConfigError

REPO_ROOT = Path(__file__).resolve().parent.parent

FAMILY = "offmut{M[t=T] M[t=T,w=0] M[t=T,w=0] M[t=U,w=0] M[t=V,w=0]}"


def _config(tmp_path, name, **settings):
    gts = tmp_path / "family.gts"
    gts.write_text(FAMILY + "\n", encoding='utf-8')
    config = ExperimentConfig(gts_path=str(gts), archive_path=str(tmp_path / f"{name}.jsonl"))
    config.settings.update({'processes': 1, 'enable_prefetcher': False, **settings})
    return config.validate()


# Config


def test_parse_shard():
    assert parse_shard("1/4") == (1, 4)
    for bad in ("4/4", "x/2", "1/0", "3"):
        with pytest.raises(ConfigError):
            parse_shard(bad)


def test_load_json_config():
    config = load_config(REPO_ROOT / "experiments" / "prev_bus.json")
    assert config.settings['enable_prefetcher'] is False
    assert config.settings['replacement_policy'] == 'lru'
    assert config.resolve(config.gts_path) == (REPO_ROOT / "experiments" / "prev_bus.gts").resolve()


def test_load_toml_config():
    pytest.importorskip("tomllib")
    config = load_config(REPO_ROOT / "experiments" / "pf_linemut.toml")
    assert config.geometry.num_sets == 16
    assert config.settings['store_pins'] == {'t1': 5}
    assert config.settings['classification_key'] == 'prefetch-count'


def test_overrides_and_defaults():
    config = load_config(None, {'root_seed': 7, 'shard': None})
    assert config.settings['root_seed'] == 7
    assert config.shard == (0, 1)


def test_unknown_settings_are_ignored(tmp_path, caplog):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({'settings': {'colour': 'blue', 'root_seed': 3}}), encoding='utf-8')
    with caplog.at_level(logging.WARNING):
        config = load_config(path)
    assert 'colour' not in config.settings
    assert config.settings['root_seed'] == 3
    assert "colour" in caplog.text


@pytest.mark.parametrize("settings", [
    {'class_threshold': 0.4},
    {'class_threshold': 1.5},
    {'replacement_policy': 'plru'},
    {'classification_key': 'speed'},
    {'shard': '2/2'},
    {'geometry': {'num_sets': 100}},
    {'tested_ranges': {'n1': [5, 1]}},
])
def test_invalid_settings(tmp_path, settings):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({'settings': settings}), encoding='utf-8')
    with pytest.raises(ConfigError):
        load_config(path)


def test_missing_and_broken_config(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{settings: ", encoding='utf-8')
    with pytest.raises(ConfigError):
        load_config(broken)


def test_save_config_round_trip(tmp_path):
    config = load_config(None, {'root_seed': 11})
    save_config(config, tmp_path / "saved.json")
    assert load_config(tmp_path / "saved.json").settings == config.settings


# Runner


def test_run_without_gts_path():
    with pytest.raises(ConfigError):
        ExperimentRunner(ExperimentConfig()).run()


def test_run_with_missing_gts_file(tmp_path):
    config = ExperimentConfig(gts_path=str(tmp_path / "nope.gts"))
    with pytest.raises(ConfigError):
        ExperimentRunner(config).run()


def test_expansion_cap():
    with pytest.raises(ExpansionTooLarge):
        run_gts(FAMILY, {'expansion_cap': 100})


def test_run_writes_archive(tmp_path):
    result = ExperimentRunner(_config(tmp_path, "full")).run()
    assert result['status'] == 'ok'
    assert result['stats']['testcases'] == 16
    archive = read_archive(result['archive'])
    assert len(archive.records) == 16
    assert archive.header['family']['gts'] == [FAMILY]
    assert archive.settings['enable_prefetcher'] is False
    ids = [r.testcase_id for r in archive.records]
    assert ids == sorted(ids)


def test_cancelled_run_writes_no_archive(tmp_path):
    cancel = threading.Event()
    cancel.set()
    config = _config(tmp_path, "cancelled")
    result = ExperimentRunner(config, cancel_event=cancel).run()
    assert result['status'] == "cancelled"
    assert result['archive'] is None
    assert result['errors'] == ["run cancelled after 0 of 16 testcases"]
    assert not Path(config.archive_path).exists()


class _CancelAfterFirstBatch(queue.Queue):
    def __init__(self, event):
        super().__init__()
        self.event = event

    def put(self, item, block=True, timeout=None):
        super().put(item, block, timeout)
        if item[1][1].startswith("Executed"):
            self.event.set()


def test_run_cancelled_between_batches(tmp_path, monkeypatch):
    monkeypatch.setattr(runner_module, 'BATCH_SIZE', 4)
    cancel = threading.Event()
    config = _config(tmp_path, "partial")
    runner = ExperimentRunner(config, progress_queue=_CancelAfterFirstBatch(cancel), cancel_event=cancel)
    result = runner.run()
    assert result['status'] == "cancelled"
    assert result['stats']['executed'] == 4
    assert result['errors'][-1] == "run cancelled after 4 of 16 testcases"
    assert not Path(config.archive_path).exists()


def _body(path):
    lines = Path(path).read_bytes().splitlines()
    return json.loads(lines[0])['family'], lines[1:]


def test_runs_are_byte_identical(tmp_path):
    first = ExperimentRunner(_config(tmp_path, "a")).run()
    second = ExperimentRunner(_config(tmp_path, "b")).run()
    assert _body(first['archive']) == _body(second['archive'])


def test_merged_shards_equal_single_run(tmp_path):
    full = ExperimentRunner(_config(tmp_path, "full")).run()['archive']
    shards = [ExperimentRunner(_config(tmp_path, f"shard{k}", shard=f"{k}/3")).run()['archive'] for k in range(3)]
    assert sum(len(read_archive(p).records) for p in shards) == 16
    merged = tmp_path / "merged.jsonl"
    assert merge_archives(shards, merged) == 16
    assert _body(merged) == _body(full)


def test_merge_rejects_duplicates(tmp_path):
    path = ExperimentRunner(_config(tmp_path, "full")).run()['archive']
    with pytest.raises(ArchiveError):
        merge_archives([path, path], tmp_path / "merged.jsonl")


def test_merge_rejects_other_family(tmp_path):
    records = run_gts("M[t=a]", {'processes': 1})
    a = tmp_path / "a.jsonl"
    b = tmp_path / "b.jsonl"
    write_archive(a, make_header({}, {'gts': ["M[t=a]"]}), records)
    write_archive(b, make_header({}, {'gts': ["M[t=b]"]}), [])
    with pytest.raises(ArchiveError):
        merge_archives([a, b], tmp_path / "merged.jsonl")
    with pytest.raises(ArchiveError):
        merge_archives([], tmp_path / "merged.jsonl")


def test_read_archive_errors(tmp_path):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("", encoding='utf-8')
    with pytest.raises(ArchiveError):
        read_archive(empty)

    wrong = tmp_path / "wrong.jsonl"
    wrong.write_text(json.dumps({'kind': 'other'}) + "\n", encoding='utf-8')
    with pytest.raises(ArchiveError):
        read_archive(wrong)

    newer = tmp_path / "newer.jsonl"
    newer.write_text(json.dumps(dict(make_header({}, {}), schema_version=99)) + "\n", encoding='utf-8')
    with pytest.raises(ArchiveError):
        read_archive(newer)

    bad_record = tmp_path / "bad.jsonl"
    bad_record.write_text(json.dumps(make_header({}, {})) + "\n{\"testcase_id\": 1}\n", encoding='utf-8')
    with pytest.raises(ArchiveError):
        read_archive(bad_record)

    with pytest.raises(ArchiveError):
        read_archive(tmp_path / "absent.jsonl")


def test_run_grid_tags_records_with_point(tmp_path):
    runner = ExperimentRunner(_config(tmp_path, "grid"))
    records = runner.run_grid("(M[t=t1,s=s1])^{{{D},t+=1}}", [{'D': 1}, {'D': 3}])
    assert sorted(len(r.load_addresses) for r in records) == [1, 3]
    assert sorted(r.params['D'] for r in records) == [1, 3]
