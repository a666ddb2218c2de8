"""Regenerates the synthetic regulatory corpus. Output is fixed by the seed."""
import json
import pathlib
import random

HERE = pathlib.Path(__file__).parent
rng = random.Random(20250101)

TOPICS = {
    "AC-2": ["account management", "terminated users", "account review", "privileged accounts"],
    "AC-2(5)": ["inactivity logout", "session lock", "idle sessions"],
    "AC-7": ["unsuccessful logon attempts", "account lockout", "administrator notification"],
    "AC-17": ["remote access", "remote sessions", "remote maintenance"],
    "AC-17(3)": ["managed access control points", "jump hosts"],
    "AC-17(4)": ["privileged remote commands", "remote administration"],
    "AC-19": ["mobile devices", "tablet configuration"],
    "AC-19(5)": ["mobile device encryption", "full-device encryption"],
    "IR-6": ["incident reporting", "reporting deadlines", "regulator notification"],
    "IR-3": ["incident response testing", "tabletop exercises"],
    "IA-2": ["user authentication", "multifactor authentication"],
    "SC-7": ["boundary protection", "network segmentation", "external interfaces"],
    "CA-3": ["information exchange agreements", "interconnection security"],
    "CP-2": ["contingency planning", "plan review", "recovery objectives"],
}
SUBJECTS = ["The operator", "The system owner", "Each organization", "The administrator", "The supplier",
            "The security officer", "The plant manager"]
VERBS = ["shall document", "must review", "shall implement", "should verify", "shall record", "must restrict",
         "shall test", "must approve"]
QUALIFIERS = ["at least annually", "within 2 hours", "within 24 hours", "every 90 days", "before commissioning",
              "after each significant change", "on a quarterly basis", "within 8 hours after termination"]
ASIDES = ["e.g. for contractor accounts", "i.e. without undue delay", "cf. the national guidance", "vs. the baseline",
          "see Art. 12 of the order", "per Sec. 4 of the annex"]
FRAMEWORKS = ["Order No. 239", "the industrial control systems directive", "the critical infrastructure act",
              "the sector regulation", "the national technical requirements"]


def sentence(cid, topic):
    s = f"{rng.choice(SUBJECTS)} {rng.choice(VERBS)} {topic} {rng.choice(QUALIFIERS)}"
    roll = rng.random()
    if roll < 0.3:
        s += f" ({rng.choice(ASIDES)})"
    elif roll < 0.6:
        s += f" as required by {cid}"
    if rng.random() < 0.2:
        s += f" under {rng.choice(FRAMEWORKS)}"
    return s + rng.choice([".", ".", ".", "!", "?"] if rng.random() < 0.1 else ["."])


def paragraph(cid, topics, n):
    return " ".join(sentence(cid, rng.choice(topics)) for _ in range(n))


def document(i):
    ids = rng.sample(sorted(TOPICS), 5)
    lines = [f"# Guidance document {i:02d}", "", f"Page {i}", ""]
    lines.append(paragraph(ids[0], TOPICS[ids[0]], 3))
    lines.append("")
    for cid in ids:
        lines += [f"## Measures for {cid}", ""]
        for sub in range(rng.randint(2, 3)):
            lines += [f"### {cid} clause {sub + 1}", ""]
            for _ in range(rng.randint(2, 3)):
                lines.append(paragraph(cid, TOPICS[cid], rng.randint(3, 6)))
                lines.append("")
        lines += [f"Page {i}", ""]
    return "\n".join(lines)


def main():
    manifest = []
    docs = HERE / "docs"
    docs.mkdir(exist_ok=True)
    for i in range(1, 41):
        doc_id = f"guide-{i:02d}"
        path = f"docs/{doc_id}.md"
        (HERE / path).write_text(document(i), encoding="utf-8")
        manifest.append({"doc_id": doc_id, "title": f"Guidance document {i:02d}",
                         "date": f"20{18 + i % 7}-{1 + i % 12:02d}-{1 + i % 28:02d}", "path": path})
    (HERE / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
