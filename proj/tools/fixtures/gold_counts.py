#!/usr/bin/env python3
"""Derive expected per-type node and per-verb edge counts from fixtures/gold.json."""
import argparse
import json
import re
import sys
from collections import Counter
from pathlib import Path

ROOT = Path(__file__).resolve().parents[2]
CASE_SENSITIVE = {"FilePath", "Registry"}
REPORT_TYPE = {"Malware": "ReportMalware", "Vulnerability": "ReportVulnerability", "Attack": "ReportAttack"}
ALL_TYPES = ["ReportMalware", "ReportVulnerability", "ReportAttack", "Vendor", "ThreatActor", "Technique", "Tool",
             "Software", "FileName", "FilePath", "IP", "URL", "Email", "Domain", "Registry", "HashMD5",
             "HashSHA1", "HashSHA256"]


def norm(text, etype):
    out = re.sub(r"\s+", " ", text).strip()
    return out if etype in CASE_SENSITIVE else out.lower()


def counts(gold):
    nodes = set()
    edges = set()
    for i, rep in enumerate(gold["reports"]):
        rtype = REPORT_TYPE[rep["kind"]]
        report = (rtype, norm(rep["title"], rtype))
        nodes.add(report)
        vendor = ("Vendor", norm(rep["vendor"], "Vendor"))
        nodes.add(vendor)
        edges.add((i, report, vendor, "REPORTED_BY"))
        by_surface = {}
        for etype, surface in rep["entities"]:
            node = (etype, norm(surface, etype))
            nodes.add(node)
            by_surface[surface] = node
            if node != report:
                edges.add((i, report, node, "CONTAINS"))
        for head, verb, tail in rep["relations"]:
            h, t = by_surface[head], by_surface[tail]
            if h != t:
                edges.add((i, h, t, verb))
    node_types = Counter(t for t, _ in nodes)
    verbs = Counter(e[3] for e in edges)
    return {
        "reports": len(gold["reports"]),
        "filtered": dict(sorted(Counter(f["rule"] for f in gold["filtered"]).items())),
        "nodes": len(nodes),
        "edges": len(edges),
        "nodes_by_type": {t: node_types.get(t, 0) for t in ALL_TYPES},
        "edges_by_verb": dict(sorted(verbs.items())),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--gold", default=ROOT / "fixtures" / "gold.json", type=Path)
    ap.add_argument("--out", default=ROOT / "fixtures" / "gold_counts.json", type=Path)
    ap.add_argument("--check", action="store_true", help="fail when --out differs from the derived counts")
    args = ap.parse_args()
    result = counts(json.loads(args.gold.read_text()))
    text = json.dumps(result, indent=2) + "\n"
    if args.check:
        if not args.out.exists() or json.loads(args.out.read_text()) != result:
            sys.stderr.write(f"{args.out} is stale; rerun without --check\n")
            return 1
        print("gold counts up to date")
        return 0
    args.out.write_text(text)
    sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
