import io
import json

import pandas as pd
import pytest

import config
from models.errors import InvalidTextError, ParameterError
from models.harness import DEFAULT_SETTINGS, RunSpec, csv_columns, emit, run, run_entry


def rows_by_name(entry):
    return {row['name']: row for row in entry['rows']}


def test_empty_corpus_passes():
    report = run(RunSpec())
    assert report.entries == []
    assert report.passed
    assert json.loads(emit(report))['entries'] == []


def test_worst_case_entry():
    spec = RunSpec(inputs=('worst_case:16',), encodings=('naive', 'incremental'), ks=(0, 1))
    report = run(spec)
    (entry,) = report.entries
    assert entry['success']
    assert entry['config'] == 'repair'
    assert (entry['n'], entry['sigma']) == (64, 17)
    assert entry['stats']['n_nonterminals'] == 16
    rows = rows_by_name(entry)
    assert rows['repair.worst_case_incremental']['pass']
    assert rows['repair.frequency_monotone']['pass']
    assert rows['repair.distinct_expansions']['pass']
    assert rows['repair.weakly_nonredundant']['pass']
    assert rows['grammar.expansion_sum']['pass']
    assert rows['coders.round_trip[incremental]']['pass']
    assert rows['coders.formula_bound[naive]']['pass']
    assert 'coders.formula_bound[incremental]' not in rows
    assert len(rows) == len(entry['rows'])


def test_gdb_entry_with_parser():
    entry = run_entry('gdb:2,1,1', 'lz78', RunSpec(ks=(0, 2)))
    assert entry['success']
    rows = rows_by_name(entry)
    for name in ('debruijn.db1', 'debruijn.db2', 'debruijn.db3', 'debruijn.entropy_ok',
                 'debruijn.phrase_length', 'debruijn.lower_bound',
                 'textcore.cyclic_sandwich_lower[k=2]', 'parsing.k_cost_le_k_entropy[k=2]'):
        assert rows[name]['pass'], name
    assert entry['stats']['certificate']['passed']
    assert entry['stats']['kind'] == 'gdb'
    assert entry['stats']['params'] == '2,1,1'


def test_offset_parse_rows():
    entry = run_entry('sample32', 'offset-parse', RunSpec(ks=(1,), offset_lengths=(2, 4)))
    rows = rows_by_name(entry)
    assert 'parsing.mean_entropy[l=2]' in rows
    assert 'parsing.mean_entropy[l=4]' in rows
    assert 'parsing.lengths_entropy[l=4]' in rows
    assert 'debruijn.lower_bound' not in rows


def test_failure_is_isolated():
    spec = RunSpec(inputs=('random:64,2,1', 'sample16'), algorithms=('greedy',),
                   settings={'GREEDY_MAX_LENGTH': 32})
    report = run(spec)
    passed, failed = report.entries
    assert failed['input'] == 'random:64,2,1'
    assert not failed['success']
    assert 'exceeds' in failed['error']
    assert passed['success']
    assert not report.passed


def test_validation():
    with pytest.raises(ParameterError):
        run(RunSpec(ks=(-1,)))
    with pytest.raises(ParameterError):
        run(RunSpec(algorithms=('zip',)))
    with pytest.raises(InvalidTextError):
        run(RunSpec(inputs=('no/such/file.txt',)))


def test_json_is_stable():
    report = run(RunSpec(inputs=('sample16',), algorithms=('repair', 'lz78'), ks=(0, 1)))
    text = emit(report)
    data = json.loads(text)
    assert data['schema_version'] == 1
    assert [entry['config'] for entry in data['entries']] == ['lz78', 'repair']
    assert json.dumps(data, indent=2) == text


def test_csv_layout():
    ks = (0, 1)
    report = run(RunSpec(inputs=('sample16', 'worst_case:8'), ks=ks))
    frame = pd.read_csv(io.StringIO(emit(report, 'csv')))
    assert list(frame.columns) == csv_columns(ks)
    assert len(frame) == 2
    assert list(frame['input']) == ['sample16', 'worst_case:8']
    with pytest.raises(ParameterError):
        emit(report, 'xml')


def test_workers_give_same_entries():
    spec = dict(inputs=('sample16', 'sample32'), algorithms=('repair', 'lz78'), ks=(0, 1))
    serial = run(RunSpec(**spec))
    parallel = run(RunSpec(workers=2, **spec))
    assert parallel.entries == serial.entries


def test_settings_come_from_config():
    assert DEFAULT_SETTINGS == {name: getattr(config, name) for name in DEFAULT_SETTINGS}
    spec = RunSpec(settings={'REPAIR_MAX_LENGTH': 10})
    assert spec.settings['REPAIR_MAX_LENGTH'] == 10
    assert spec.settings['ENCODING_SLACK'] == config.ENCODING_SLACK
    assert spec.tolerance == config.ABS_TOL
    assert spec.ks == config.DEFAULT_K
