import json
from pathlib import Path

import pytest

from run_prover import EXIT_ERROR, EXIT_INVALID, EXIT_VALID, run_cli

CORPUS = Path(__file__).parent / 'corpus'


def test_prove_valid_file(capsys):
    assert run_cli(['prove', str(CORPUS / 'sec2.ent')]) == EXIT_VALID
    assert capsys.readouterr().out == 'valid\n'


def test_prove_invalid_file(capsys):
    assert run_cli(['prove', str(CORPUS / 'bad.ent')]) == EXIT_INVALID
    assert capsys.readouterr().out == 'invalid\n'


def test_prove_prints_witness(capsys):
    assert run_cli(['prove', str(CORPUS / 'bad.ent'), '--counterexample']) == EXIT_INVALID
    assert capsys.readouterr().out.splitlines() == [
        'invalid',
        'stack: a=0 b=1',
        'heap: 0 -> 2, 2 -> 1',
    ]


def test_missing_file(capsys):
    assert run_cli(['prove', 'nosuchfile.ent']) == EXIT_ERROR
    assert 'error:' in capsys.readouterr().err


def test_unknown_flag():
    assert run_cli(['prove', '--frobnicate', str(CORPUS / 'sec2.ent')]) == EXIT_ERROR


def test_syntax_error_file(tmp_path, capsys):
    path = tmp_path / 'broken.ent'
    path.write_text('emp |- emp\nlseg(a,b) |- rev(a,b)\n')
    assert run_cli(['prove', str(path)]) == EXIT_ERROR
    assert 'line 2' in capsys.readouterr().err


def test_bad_backend(capsys):
    assert run_cli(['prove', str(CORPUS / 'sec2.ent'), '--backend', 'cvc9']) == EXIT_ERROR
    assert 'unknown backend' in capsys.readouterr().err


def test_json_report_schema(capsys):
    assert run_cli(['prove', str(CORPUS / 'bad.ent'), '--json', '--counterexample']) == EXIT_INVALID
    report = json.loads(capsys.readouterr().out)
    assert set(report) == {'verdict', 'witness', 'stats', 'input'}
    assert set(report['stats']) == {'loop_iterations', 'match_calls', 'solver_checks', 'wall_time_ms'}
    assert report['verdict'] == 'invalid'
    assert report['input'].endswith('bad.ent:1')
    assert all(v >= 0 for v in report['stats'].values())


def test_json_report_without_witness(capsys):
    run_cli(['prove', str(CORPUS / 'sec2.ent'), '--json'])
    report = json.loads(capsys.readouterr().out)
    assert set(report) == {'verdict', 'stats', 'input'}


@pytest.mark.parametrize('jobs', ['1', '4'])
def test_regression_corpus(capsys, jobs):
    assert run_cli(['prove', str(CORPUS / 'regression.ent'), '--json', '--jobs', jobs]) == EXIT_INVALID
    reports = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
    expected = {}
    for number, raw in enumerate((CORPUS / 'regression.ent').read_text().splitlines(), start=1):
        if '# valid' in raw or '# invalid' in raw:
            expected[number] = raw.rsplit('#', 1)[1].strip()
    assert [int(r['input'].rsplit(':', 1)[1]) for r in reports] == sorted(expected)
    for r in reports:
        assert r['verdict'] == expected[int(r['input'].rsplit(':', 1)[1])], r['input']


def test_oracle_command(tmp_path, capsys):
    path = tmp_path / 'small.ent'
    path.write_text('next(x,y) |- lseg(x,y)\nx != y : next(x,y) |- lseg(x,y)\n')
    code = run_cli(['oracle', str(path), '--stack-domain', '3', '--extra-locs', '2', '--max-cells', '4'])
    assert code == EXIT_INVALID
    out = capsys.readouterr().out.splitlines()
    assert out[0].endswith(':1: invalid')
    assert out[-1].endswith(':2: valid')


def test_bench_json(capsys):
    assert run_cli(['bench', '--clones', '3', '--json', str(CORPUS / 'clones_base.ent')]) == EXIT_VALID
    doc = json.loads(capsys.readouterr().out)
    assert [row['match_calls'] for row in doc['rows']] == [7, 13, 19]
    assert doc['fit']['slope'] == pytest.approx(6.0)


def test_selftest(capsys):
    assert run_cli(['selftest']) == EXIT_VALID
    out = capsys.readouterr().out
    assert 'ok   well-formedness is x = z & x != w' in out
    assert '10/10 worked examples passed' in out


def test_fuzz_is_seeded(capsys):
    assert run_cli(['fuzz', '--count', '10', '--seed', '5']) == EXIT_VALID
    first = capsys.readouterr().out.splitlines()[-1]
    run_cli(['fuzz', '--count', '10', '--seed', '5'])
    second = capsys.readouterr().out.splitlines()[-1]
    assert first.split('(')[0] == second.split('(')[0]
