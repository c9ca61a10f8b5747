#!/usr/bin/env python3
"""Builds chat_request.json from the straw-man structured prompt golden.

The body is serialized here, independently of the C++ serializer, with the
canonical field order model, messages, temperature, max_tokens.
"""
import json
from pathlib import Path

HERE = Path(__file__).resolve().parent
golden = (HERE.parent / "prompts" / "straw-man.structured.txt").read_text(encoding="utf-8")
_, rest = golden.split("### system\n", 1)
system, user = rest.split("\n### user\n", 1)
assert user.endswith("\n")
body = {
    "model": "mixtral-8x7b-instruct",
    "messages": [{"role": "system", "content": system}, {"role": "user", "content": user[:-1]}],
    "temperature": 0.0,
    "max_tokens": 512,
}
(HERE / "chat_request.json").write_text(json.dumps(body, ensure_ascii=False), encoding="utf-8")
