# -*- coding: utf-8 -*-
import json
from pathlib import Path

import pytest

import main as cli
from exporter.archive import read_archive

REPO_ROOT = Path(__file__).resolve().parent.parent
PREFETCH_LT = REPO_ROOT / "fixtures" / "prefetch.lt.json"


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def run_cli(workdir, *argv):
    return cli.main(['--log-file', str(workdir / "plumber.log"), *map(str, argv)])


def _gts(workdir, text, name="family.gts"):
    path = workdir / name
    path.write_text(text + "\n", encoding='utf-8')
    return path


def test_run_writes_archive(workdir):
    gts = _gts(workdir, "offmut{M[t=T] M[t=T,w=0] M[t=T,w=0] M[t=U,w=0] M[t=V,w=0]}")
    archive = workdir / "out" / "bus.jsonl"
    assert run_cli(workdir, 'run', '--gts', gts, '--output', archive, '--processes', 1) == cli.EXIT_OK
    assert len(read_archive(archive).records) == 16
    assert run_cli(workdir, 'report', archive, '--output', workdir / "report.txt") == cli.EXIT_OK
    assert (workdir / "report.txt").is_file()


def test_run_missing_gts(workdir):
    assert run_cli(workdir, 'run', '--gts', workdir / "absent.gts") == cli.EXIT_CONFIG


def test_run_bad_gts(workdir):
    gts = _gts(workdir, "shuffle{M M")
    assert run_cli(workdir, 'run', '--gts', gts, '--processes', 1) == cli.EXIT_CONFIG


def test_run_expansion_cap(workdir):
    gts = _gts(workdir, "shuffle{M[t=a] M[t=b] M[t=c] M[t=d] M[t=e] M[t=f]}")
    config = workdir / "small.json"
    config.write_text(json.dumps({'settings': {'expansion_cap': 100, 'processes': 1}}), encoding='utf-8')
    assert run_cli(workdir, 'run', '--config', config, '--gts', gts) == cli.EXIT_EXPANSION


def test_analyze_without_mutation_is_degenerate(workdir):
    gts = _gts(workdir, "M[t=a] M[t=a] M[t=b]")
    archive = workdir / "plain.jsonl"
    assert run_cli(workdir, 'run', '--gts', gts, '--output', archive, '--processes', 1) == cli.EXIT_OK
    assert run_cli(workdir, 'analyze', archive, '--output-dir', workdir / "analysis") == cli.EXIT_DEGENERATE
    assert (workdir / "analysis" / "plain.lt.json").is_file()


def test_analyze_missing_archive(workdir):
    assert run_cli(workdir, 'analyze', workdir / "absent.jsonl") == cli.EXIT_IO


def test_match_broken_listing(workdir):
    listing = workdir / "broken.lst"
    listing.write_text("1000: ldr x1, [x2, #8]\nnot an instruction\n?? also not\n", encoding='utf-8')
    assert run_cli(workdir, 'match', listing, PREFETCH_LT) == cli.EXIT_LISTING


def test_match_schema_mismatch(workdir):
    listing = workdir / "ok.lst"
    listing.write_text("1000: ldr x1, [x2, #8]\n", encoding='utf-8')
    doc = json.loads(PREFETCH_LT.read_text(encoding='utf-8'))
    doc['schema_version'] = 99
    lt = workdir / "future.lt.json"
    lt.write_text(json.dumps(doc), encoding='utf-8')
    assert run_cli(workdir, 'match', listing, lt) == cli.EXIT_CONFIG


def test_match_with_simulated_programs(workdir):
    listing = workdir / "sample.lst"
    listing.write_text("SECTION f\n1000: ldr x1, [x2, #8]\n1004: ldr x4, [x2, x5]\n1008: ldr x6, [x2, #16]\n",
                       encoding='utf-8')
    candidates = workdir / "candidates.json"
    code = run_cli(workdir, 'match', listing, PREFETCH_LT, '--simulate', 40, '--candidates', candidates)
    assert code == cli.EXIT_OK
    assert len(json.loads(candidates.read_text(encoding='utf-8'))) == 1


def test_channel(workdir):
    assert run_cli(workdir, 'channel', '--name', 'PRF_IS', '--bits', 32) == cli.EXIT_OK
    assert run_cli(workdir, 'channel', '--name', 'PR_XX') == cli.EXIT_CONFIG


def test_bp_experiment(workdir, capsys):
    assert run_cli(workdir, 'bp-experiment', '--x', 8, '--trials', 32) == cli.EXIT_OK
    assert "spy misprediction rate" in capsys.readouterr().out
    assert run_cli(workdir, 'bp-experiment', '--x', 8, '--trials', 0) == cli.EXIT_CONFIG
