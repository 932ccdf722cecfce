#!/usr/bin/env python3
"""Convert a DSTC-2 distribution into the JSONL dialog format.

Expects the original layout: a data directory of session folders, each with
log.json (system side) and label.json (user transcriptions and goal labels),
plus a flist file naming the sessions of a split, one relative path per line.

Output is one dialog per line:

    {"dialog_id": "...", "turns": [{"system": "...", "user": "...",
                                    "gold": {"food": "thai", ...}}]}

Goal labels are taken verbatim from each turn's "goal-labels" block, which is
already cumulative in DSTC-2. Slots the user has not constrained yet are
simply absent; the tracker reads absent slots as None.
"""

import argparse
import json
from pathlib import Path


def convert_session(session_dir: Path) -> dict:
    log = json.loads((session_dir / "log.json").read_text())
    label = json.loads((session_dir / "label.json").read_text())

    turns = []
    for log_turn, label_turn in zip(log["turns"], label["turns"]):
        turns.append(
            {
                "system": log_turn["output"].get("transcript", ""),
                "user": label_turn.get("transcription", ""),
                "gold": dict(label_turn.get("goal-labels", {})),
            }
        )
    return {"dialog_id": log.get("session-id", session_dir.name), "turns": turns}


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--data-dir", required=True, type=Path,
                        help="root of the unpacked session folders")
    parser.add_argument("--flist", required=True, type=Path,
                        help="split file listing session paths relative to --data-dir")
    parser.add_argument("--out", required=True, type=Path,
                        help="JSONL file to write")
    args = parser.parse_args()

    sessions = [line.strip() for line in args.flist.read_text().splitlines()
                if line.strip()]
    with args.out.open("w") as out:
        for rel in sessions:
            dialog = convert_session(args.data_dir / rel)
            out.write(json.dumps(dialog) + "\n")
    print(f"wrote {len(sessions)} dialogs to {args.out}")


if __name__ == "__main__":
    main()
