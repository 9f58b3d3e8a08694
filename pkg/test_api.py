import pytest

from api import __version__, create_app
from conftest import SEC2_TEXT


@pytest.fixture
def client():
    app = create_app('internal')
    app.config['TESTING'] = True
    return app.test_client()


def test_health(client):
    response = client.get('/api/health')
    assert response.status_code == 200
    assert response.get_json() == {'status': 'ok', 'backend': 'internal', 'version': __version__}


def test_prove_valid(client):
    response = client.post('/api/prove', json={'entailment': SEC2_TEXT})
    assert response.status_code == 200
    body = response.get_json()
    assert body['verdict'] == 'valid'
    assert 'witness' not in body
    assert body['stats']['loop_iterations'] >= 1


def test_prove_invalid_with_witness(client):
    response = client.post('/api/prove', json={'entailment': 'lseg(a,b) |- next(a,b)',
                                               'counterexample': True})
    body = response.get_json()
    assert body['verdict'] == 'invalid'
    assert body['witness'] == 'stack: a=0 b=1\nheap: 0 -> 2, 2 -> 1'


def test_missing_entailment(client):
    response = client.post('/api/prove', json={})
    assert response.status_code == 400


def test_syntax_error(client):
    response = client.post('/api/prove', json={'entailment': 'lseg(a,b) |- rev(a,b)'})
    assert response.status_code == 400
    body = response.get_json()
    assert body['line'] == 1 and body['column'] == 14


def test_backend_error_is_reported(client):
    response = client.post('/api/prove', json={'entailment': 'x + y = 3 : emp |- emp'})
    assert response.status_code == 500
    assert response.get_json()['error'].startswith('UnsupportedFragmentError')


def test_wrong_method_keeps_http_status(client):
    assert client.get('/api/prove').status_code == 405
