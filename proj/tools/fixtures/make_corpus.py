#!/usr/bin/env python3
"""Generate the unlabeled NER training corpus from templated prose.

Slot fillers come from the gazetteers, so weak labels cover every name.
Output is deterministic for a given seed.
"""
import argparse
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parents[2]

SENTENCES = [
    "Analysts attribute the campaign to {actor}.",
    "{actor} used {technique} to reach the finance department.",
    "The operators behind {actor} deploy {malware} after initial access.",
    "{malware} downloads {malware2} from a staging server.",
    "In several incidents {actor} relied on {tool} for {technique}.",
    "{tool} was used by {actor} to move between hosts.",
    "Victims running {software} were the primary target.",
    "{actor} exploited a flaw in {software} during the intrusion.",
    "The loader installs {malware} and then launches {tool}.",
    "We observed {technique} followed by {technique2} within hours.",
    "{malware} communicates with its controller every ten minutes.",
    "Incident responders recovered {tool} and {tool2} from the file server.",
    "The group is also tracked as {actor} by other vendors.",
    "{malware} targets hosts running {software}.",
    "Researchers linked {malware} to {actor} based on shared code.",
    "The attackers leveraged {tool} together with {technique}.",
    "A patched version of {software} blocks the exploit chain.",
    "{actor} has a long history of {technique} against governments.",
    "The second stage drops {malware} into a temporary folder.",
    "Defenders should hunt for {tool} on servers running {software}.",
    "Reports describe {malware} as a modular banking trojan.",
    "{actor} distributed {malware} through compromised update servers.",
    "Operators used {technique} to harvest passwords before deploying {malware}.",
    "Our telemetry shows {tool} running alongside {malware} on the same machines.",
    "The intrusion began with {technique} and ended with {malware} on every endpoint.",
    "Unlike earlier waves, {actor} avoided {tool} this time.",
    "Customers of {software} received an emergency advisory.",
    "{malware} spread to {software} systems inside the network.",
    "The sample contacts {ip} over port 443.",
    "Indicators include the domain {domain} and the hash {md5}.",
    "The dropper writes {path} and sets a run key.",
    "A phishing lure pointed users to {url}.",
    "Stolen data was sent to {email} in small batches.",
    "The report covers activity between March and June.",
    "Security teams should review firewall logs for unusual traffic.",
    "The campaign targeted energy companies in several countries.",
    "Most infections were reported by small and medium businesses.",
    "The attackers remained undetected for several weeks.",
    "Network defenders should apply the latest patches.",
    "Several of the lures referenced upcoming elections.",
]

IPS = ["192.0.2.{}", "198.51.100.{}", "203.0.113.{}"]
TLDS = ["com", "net", "org", "info"]
WORDS = ["update", "cdn", "secure", "login", "portal", "mail", "files", "sync", "cloud", "office"]


def load(name):
    lines = (ROOT / "gazetteers" / name).read_text().splitlines()
    return [l.strip() for l in lines if l.strip() and not l.startswith("#")]


def fill(template, rng, lists):
    def pick(key):
        return rng.choice(lists[key])

    values = {
        "actor": pick("actors"), "malware": pick("malware"), "malware2": pick("malware"),
        "tool": pick("tools"), "tool2": pick("tools"), "technique": pick("techniques"),
        "technique2": pick("techniques"), "software": pick("software"),
        "ip": rng.choice(IPS).format(rng.randint(1, 254)),
        "domain": f"{rng.choice(WORDS)}-{rng.choice(WORDS)}.{rng.choice(TLDS)}",
        "md5": "".join(rng.choice("0123456789abcdef") for _ in range(32)),
        "path": "C:\\Users\\Public\\" + rng.choice(WORDS) + ".exe",
        "url": f"http://{rng.choice(WORDS)}.{rng.choice(TLDS)}/{rng.choice(WORDS)}.php",
        "email": f"{rng.choice(WORDS)}@{rng.choice(WORDS)}-{rng.choice(WORDS)}.{rng.choice(TLDS)}",
    }
    text = template.format(**values)
    return text[0].upper() + text[1:]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--docs", type=int, default=1200)
    ap.add_argument("--seed", type=int, default=20240611)
    ap.add_argument("--out", type=Path, default=ROOT / "training" / "corpus.txt")
    args = ap.parse_args()
    rng = random.Random(args.seed)
    lists = {k: load(f"{k}.txt") for k in ("actors", "malware", "tools", "techniques", "software")}
    docs = []
    for _ in range(args.docs):
        n = rng.randint(3, 6)
        docs.append(" ".join(fill(rng.choice(SENTENCES), rng, lists) for _ in range(n)))
    args.out.write_text("\n\n".join(docs) + "\n")
    print(f"wrote {len(docs)} documents to {args.out}")


if __name__ == "__main__":
    main()
