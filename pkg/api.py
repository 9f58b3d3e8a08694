import logging
import os
import traceback

from flask import Flask, jsonify, request
from flask_cors import CORS
from werkzeug.exceptions import HTTPException

from entailment_engine import prove
from entailment_parser import EntailmentSyntaxError, parse_entailment
from formulas import free_vars
from run_prover import RunReport
from theory_backend import DEFAULT_BACKEND
from verdicts import format_witness

__version__ = '1.0.0'

logging.basicConfig(level=os.getenv('LSEG_LOG_LEVEL', 'INFO').upper())
logger = logging.getLogger(__name__)


def create_app(backend: str = DEFAULT_BACKEND) -> Flask:
    app = Flask(__name__)
    CORS(app)
    app.config['BACKEND'] = backend

    @app.errorhandler(EntailmentSyntaxError)
    def handle_syntax_error(e):
        return jsonify({'error': str(e), 'line': e.line, 'column': e.column}), 400

    @app.errorhandler(Exception)
    def handle_exception(e):
        if isinstance(e, HTTPException):
            return e
        logger.error(f"--- Exception in API ---\n{traceback.format_exc()}")
        return jsonify({'error': f"{type(e).__name__}: {e}"}), 500

    @app.route('/api/prove', methods=['POST'])
    def prove_entailment():
        data = request.get_json(silent=True) or {}
        text = data.get('entailment', '')
        if not text:
            return jsonify({'error': 'Please provide an entailment.'}), 400
        e = parse_entailment(text)
        verdict = prove(e, app.config['BACKEND'], counterexample=bool(data.get('counterexample')))
        witness = None
        if verdict.witness is not None:
            witness = format_witness(verdict.witness, free_vars(e))
        report = RunReport(verdict.label, verdict.stats.to_dict(), 'request', witness)
        logger.info(f"{text} -> {verdict.label}")
        return jsonify(report.to_json())

    @app.route('/api/health', methods=['GET'])
    def health():
        return jsonify({'status': 'ok', 'backend': str(app.config['BACKEND']), 'version': __version__})

    return app


app = create_app()

if __name__ == '__main__':
    port = int(os.environ.get("PORT", 5000))
    app.run(host="0.0.0.0", port=port)
