from pathlib import Path

import pytest

from entailment_engine import prove
from entailment_parser import clone_entailment, parse_file
from formulas import free_vars
from semantics_oracle import oracle_decide, refutes

CORPUS = Path(__file__).parent / 'corpus' / 'regression.ent'


# Load corpus with expected verdicts
def load_corpus(path=CORPUS):
    return [p for p in parse_file(path) if p.expected]


def check_line(parsed, backend='internal'):
    """Prover verdict, oracle verdict and whether any witness refutes the entailment."""
    verdict = prove(parsed.entailment, backend)
    oracle = oracle_decide(parsed.entailment)
    witness_ok = True
    for v in (verdict, oracle):
        if v.witness is not None:
            witness_ok = witness_ok and refutes(v.witness.stack, v.witness.heap, parsed.entailment)
    return verdict.label, oracle.label, witness_ok


def _corpus_params():
    for p in load_corpus():
        marks = [pytest.mark.slow] if len(free_vars(p.entailment)) > 4 else []
        yield pytest.param(p, id=f"line{p.line}", marks=marks)


@pytest.mark.parametrize('parsed', list(_corpus_params()))
def test_corpus_line(parsed):
    proved, oracle, witness_ok = check_line(parsed)
    assert proved == parsed.expected
    assert oracle == parsed.expected
    assert witness_ok


@pytest.mark.parametrize('k', [2, 3])
def test_clones_keep_corpus_verdicts(k):
    for parsed in load_corpus():
        assert prove(clone_entailment(parsed.entailment, k), counterexample=False).label == parsed.expected


@pytest.mark.slow
@pytest.mark.parametrize('k', [4, 5])
def test_clones_keep_corpus_verdicts_large(k):
    test_clones_keep_corpus_verdicts(k)


if __name__ == '__main__':
    print("🔹 Loading corpus...")
    lines = load_corpus()

    correct = 0
    failed = []

    print("🔹 Checking prover against oracle...")
    for parsed in lines:
        proved, oracle, witness_ok = check_line(parsed)
        if proved == oracle == parsed.expected and witness_ok:
            correct += 1
        else:
            failed.append({'line': parsed.line, 'text': parsed.text, 'prove': proved,
                           'oracle': oracle, 'witness_ok': witness_ok})

    total = len(lines)
    accuracy = correct / total if total else 0
    print(f"\n✅ Final Agreement: {accuracy:.2%} ({correct}/{total})")

    with open('accuracy_report.txt', 'w', encoding='utf-8') as f:
        f.write(f"Total entailments tested: {total}\n")
        f.write(f"Agreeing: {correct}\n")
        f.write(f"Disagreeing: {total - correct}\n\n")
        if failed:
            f.write("Failed entailments:\n")
            for fail in failed:
                f.write(f"Line {fail['line']}: {fail['text']}\n")
                f.write(f"Prove: {fail['prove']}\n")
                f.write(f"Oracle: {fail['oracle']}\n")
                f.write(f"Witness verified: {fail['witness_ok']}\n\n")
        else:
            f.write("All entailments agree!\n")

    print("\n📄 Detailed report written to accuracy_report.txt")
