"""Reference external adapter: extractive-lead summaries over the wire.

Run as ``python -m sumloop.adapters.stdio_demo`` to serve the protocol
on stdin/stdout, or with ``--tcp PORT`` to accept one local TCP
connection with identical framing. FIT builds a vocabulary from the
labeled summaries; PREDICT joins the first ``--k`` patient turns and
scores the out-of-vocabulary fraction.

``--misbehave`` deliberately breaks the contract (for conformance
tests): ``misorder`` reverses prediction items, ``positive-ll`` emits a
positive log-likelihood, ``duplicate-id`` duplicates the first item,
``die-mid-fit`` prints a stray progress line and exits mid-FIT,
``die-silent`` exits without responding.
"""

from __future__ import annotations

import argparse
import socket
import sys

from ..textutil import tokenize
from ..wire import decode_message, encode_message

MISBEHAVIORS = ("none", "misorder", "positive-ll", "duplicate-id", "die-mid-fit", "die-silent")


def _lead_summary(turns: list[dict], k: int) -> str:
    patient = [t["text"] for t in turns if t.get("speaker") == "patient"]
    lead = patient[:k] if patient else [t["text"] for t in turns[:k]]
    return " ".join(lead)


def serve(read_line, write_line, k: int, misbehave: str) -> None:
    vocabularies: dict[str, frozenset[str]] = {}
    while True:
        line = read_line()
        if not line:
            return
        line = line.strip()
        if not line:
            continue
        request = decode_message(line)
        op = request["op"]
        run_id = request.get("run_id")
        if op == "fit":
            if misbehave == "die-mid-fit":
                write_line('{"op":"progress","note":"fitting"}')
                sys.exit(1)
            if misbehave == "die-silent":
                sys.exit(1)
            vocab = frozenset(
                token
                for sample in request["samples"]
                for token in tokenize(sample.get("summary") or "")
            )
            vocabularies[run_id] = vocab
            write_line(encode_message({"op": "fit_done", "run_id": run_id}))
        elif op == "predict":
            vocab = vocabularies.get(run_id)
            if vocab is None:
                write_line(encode_message({"op": "error", "message": f"no fit for run {run_id}"}))
                continue
            items = []
            for sample in request["samples"]:
                summary = _lead_summary(sample["turns"], k)
                tokens = tokenize(summary)
                token_count = max(1, len(tokens))
                fraction = (
                    sum(1 for t in tokens if t not in vocab) / len(tokens) if tokens else 0.0
                )
                items.append(
                    {
                        "id": sample["id"],
                        "summary": summary,
                        "log_likelihood": -fraction * token_count,
                        "token_count": token_count,
                    }
                )
            if misbehave == "misorder":
                items.reverse()
            elif misbehave == "positive-ll" and items:
                items[0]["log_likelihood"] = 1.0
            elif misbehave == "duplicate-id" and items:
                items.append(items[0])
            write_line(encode_message({"op": "predictions", "run_id": run_id, "items": items}))
        else:
            write_line(encode_message({"op": "error", "message": f"unknown op {op!r}"}))


def _serve_stdio(k: int, misbehave: str) -> None:
    serve(sys.stdin.readline, lambda s: print(s, flush=True), k, misbehave)


def _serve_tcp(port: int, k: int, misbehave: str) -> None:
    with socket.create_server(("127.0.0.1", port)) as server:
        while True:
            conn, _ = server.accept()
            with conn, conn.makefile("r", encoding="utf-8") as reader:
                def write_line(s: str) -> None:
                    conn.sendall((s + "\n").encode("utf-8"))

                serve(reader.readline, write_line, k, misbehave)


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(description="Extractive-lead wire adapter.")
    parser.add_argument("--k", type=int, default=2, help="Patient turns to join per summary.")
    parser.add_argument("--tcp", type=int, metavar="PORT", help="Serve one TCP connection instead of stdio.")
    parser.add_argument("--misbehave", choices=MISBEHAVIORS, default="none", help=argparse.SUPPRESS)
    args = parser.parse_args(argv)
    if args.tcp:
        _serve_tcp(args.tcp, args.k, args.misbehave)
    else:
        _serve_stdio(args.k, args.misbehave)


if __name__ == "__main__":
    main()
