#!/usr/bin/env python3
"""Brute-force tally of the end-to-end fixture, independent of the C++ code.

Reads corpus.jsonl (labels) and manifest.tsv (scripted response per doc, bias
and arm) and writes expected_report.json: the report `evaluate --against
labels --run-id e2e-fixture` must print.
"""
import hashlib
import json
import re
from decimal import Decimal, ROUND_HALF_UP
from pathlib import Path

HERE = Path(__file__).resolve().parent
RUN_ID = "e2e-fixture"
BIASES = ["straw-man", "false-causality", "circular-reasoning", "mirror-imaging",
          "confirmation-bias", "hidden-assumption"]
ARMS = [("ours", "structured"), ("mixtral-basic", "basic"), ("llama-basic", "basic")]
VERDICTS = ["present", "absent", "unclear"]
HEADER = {"yes": "present", "no": "absent", "unclear": "unclear"}
WORDS = {
    "present": {"yes", "present", "detected"},
    "absent": {"no", "absent", "none"},
    "unclear": {"unclear", "ambiguous", "uncertain"},
}


def parse(response):
    lines = [l for l in response.split("\n") if l.strip()]
    if lines:
        m = re.fullmatch(r"\s*verdict:\s*(yes|no|unclear)\s*", lines[0], re.IGNORECASE)
        if m:
            return HEADER[m.group(1).lower()]
    tokens = set(re.findall(r"[a-z0-9]+", response[:200].lower()))
    hits = [v for v in VERDICTS if tokens & WORDS[v]]
    return hits[0] if len(hits) == 1 else None


def pct(correct, total):
    return str((Decimal(100 * correct) / Decimal(total)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def main():
    labels = {}
    for line in open(HERE / "corpus.jsonl", encoding="utf-8"):
        rec = json.loads(line)
        labels[hashlib.sha256(rec["text"].encode("utf-8")).hexdigest()] = rec["labels"]

    rows = []
    with open(HERE / "manifest.tsv", encoding="utf-8") as f:
        next(f)
        for line in f:
            doc_id, bias, arm, response = line.rstrip("\n").split("\t")
            rows.append((doc_id, bias, arm, json.loads(response)))

    arms = []
    for arm, mode in ARMS:
        mine = [r for r in rows if r[2] == arm]
        correct = {b: 0 for b in BIASES}
        incorrect = {b: 0 for b in BIASES}
        unparseable = {b: 0 for b in BIASES}
        dist = {b: {v: 0 for v in VERDICTS} for b in BIASES}
        for doc_id, bias, _, response in mine:
            verdict = parse(response)
            if verdict is None:
                unparseable[bias] += 1
            else:
                dist[bias][verdict] += 1
            if verdict == labels[doc_id][bias]:
                correct[bias] += 1
            else:
                incorrect[bias] += 1
        tc, ti = sum(correct.values()), sum(incorrect.values())
        arms.append({
            "backend_id": arm,
            "prompt_mode": mode,
            "judged": len(mine),
            "unparseable": sum(unparseable.values()),
            "errored": 0,
            "rows": [{"bias": b, "correct": correct[b], "incorrect": incorrect[b],
                      "accuracy": pct(correct[b], correct[b] + incorrect[b]), "unparseable": unparseable[b]}
                     for b in BIASES if correct[b] + incorrect[b]],
            "totals": {"correct": tc, "incorrect": ti, "accuracy": pct(tc, tc + ti)},
            "distribution": dist,
        })

    report = {"run_id": RUN_ID, "source": "labels", "auto_judged": True, "level": "document",
              "arms": arms, "warnings": []}
    with open(HERE / "expected_report.json", "w", encoding="utf-8") as f:
        f.write(json.dumps(report, indent=2, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
