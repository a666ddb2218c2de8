"""Regenerates the scripted advisor responses.

Needs prompts and a rule-engine draft produced by the CLI for the fixture passport:
  tsp --config data/fixtures/config.json derive --passport data/fixtures/passport.json \
      --backend scripted --fixtures /nonexistent --emit-prompts PROMPTS --out DRAFT
  python3 generate.py PROMPTS DRAFT
"agree" echoes the engine decisions with citations taken from each prompt. "conflict" is
the same except that AC-7 keeps its baseline, which the engine refines.
"""
import json
import pathlib
import re
import sys

HERE = pathlib.Path(__file__).parent

PROSE = {
    "AC-2": "Privileged operator accounts make prompt deprovisioning essential; the termination procedure supports an 8-hour bound.",
    "AC-7": "Administrative accounts on the HMI require lockout in addition to notification.",
    "IR-6": "The 2-hour reporting window already matches the sector requirement.",
    "IR-3": "Annual testing remains adequate for the documented incident process.",
    "AC-17": "Vendor and technician remote sessions warrant managed access points and control of privileged remote commands.",
    "AC-19(5)": "Field tablets process plant data and must be encrypted and controlled.",
}


def cited(prompt_text):
    return re.findall(r"chunk_id=(c-[0-9a-f]{16})", prompt_text)[:2]


def draft(record, chunk_ids):
    return {
        "control_id": record["control_id"],
        "decision": record["decision"],
        "target_params": record["target_params"],
        "enhancements": record["enhancements"],
        "rationale": PROSE[record["control_id"]],
        "cited_chunk_ids": chunk_ids,
        "confidence": 0.8,
    }


def response(d):
    return ("Assessment of " + d["control_id"] + " follows.\n\n```tsp-draft\n" +
            json.dumps([d], indent=2) + "\n```\n")


def main(prompts_dir, draft_path):
    profile = json.loads(pathlib.Path(draft_path).read_text(encoding="utf-8"))
    for variant in ("agree", "conflict"):
        out = HERE / variant
        out.mkdir(exist_ok=True)
        for rec in profile["records"]:
            if rec["decision"] == "Add":
                continue
            prompt = (pathlib.Path(prompts_dir) / f"control-{rec['control_id']}.prompt.txt").read_text(encoding="utf-8")
            d = draft(rec, cited(prompt))
            if variant == "conflict" and rec["control_id"] == "AC-7":
                d["decision"] = "Keep"
                d["target_params"] = {"max_attempts": "3 consecutive invalid attempts",
                                      "lockout_action": "Notify responsible administrator"}
                d["rationale"] = "Notification alone is sufficient for a staffed control room."
            (out / f"control-{rec['control_id']}.txt").write_text(response(d), encoding="utf-8")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
