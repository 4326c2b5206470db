#!/usr/bin/env python3
"""Regenerates the bundled synthetic corpus under data/synthetic.

Output is a pure function of --seed. Filler text is checked against every
bundled vocabulary so that the only term occurrences are the planted ones.
"""
import argparse
import json
import random
import re
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent

FILLER = {
    "case_law": [
        "The court reviewed the record and the briefs submitted by both parties.",
        "Counsel for the appellant argued that the instructions given to the jury were incomplete.",
        "We review questions of statutory interpretation de novo.",
        "The trial judge denied the motion without a written opinion.",
        "The appellee responds that any error was harmless in light of the evidence.",
        "Nothing in the legislative history suggests a different reading of the provision.",
        "The parties stipulated to the relevant facts before the hearing.",
        "On remand, the lower court shall reconsider the sentence in light of this opinion.",
        "The witness testified that she had seen the vehicle leave the parking lot.",
        "We have jurisdiction over this appeal under the applicable statute.",
        "The judgment of the district court is affirmed in part and reversed in part.",
        "The standard of review for evidentiary rulings is abuse of discretion.",
    ],
    "contracts": [
        "The parties agree to negotiate in good faith any amendment to this document.",
        "Notices shall be delivered in writing to the addresses set out below.",
        "This document shall be governed by the laws of the State of Delaware.",
        "Each party shall bear its own costs in connection with the negotiation hereof.",
        "Headings are for convenience only and shall not affect interpretation.",
        "The recitals form part of this document and are binding on the parties.",
        "Capitalized terms used but not defined herein have the meanings given to them in the schedule.",
        "This document may be executed in counterparts, each of which shall be deemed an original.",
    ],
    "echr": [
        "The applicant was born in 1961 and lives in Ankara.",
        "The Government contested that argument.",
        "The Court reiterates that it is not its task to take the place of the domestic courts.",
        "The facts of the case, as submitted by the parties, may be summarised as follows.",
        "The domestic proceedings lasted more than seven years at two levels of jurisdiction.",
        "The Court considers that the complaint raises serious issues of fact and law.",
        "The applicant did not lodge an appeal against the decision of the regional court.",
        "The Court notes that the parties disagreed on the scope of the domestic review.",
    ],
    "legislation": [
        "Member States shall bring into force the laws necessary to comply with this Directive.",
        "The Commission shall be assisted by a committee composed of national representatives.",
        "This Regulation shall enter into force on the twentieth day following its publication.",
        "The competent authorities shall cooperate closely and exchange relevant information.",
        "The measures provided for in this Directive are in accordance with the opinion of the committee.",
        "Nothing in this Part shall be construed as limiting the powers of the Minister.",
        "The Governor in Council may make regulations for carrying out the purposes of this Act.",
        "Every person who contravenes a provision of this Part is liable on summary conviction to a fine.",
    ],
}

CASE_TEMPLATES = [
    "The defendant was charged with {t} and pleaded not guilty at arraignment.",
    "At trial the prosecution relied heavily on evidence of {t} found during the search.",
    "The jury returned a verdict of guilty on the count of {t}.",
    "A person commits the offense of {t} when the statutory elements are proved beyond a reasonable doubt.",
    "The court explained the doctrine of {t} in some detail before turning to the facts.",
    "Appellant contends that the evidence was insufficient to establish {t}.",
    "{T} was the central issue presented to the panel.",
]

CONTRACT_TEMPLATE = (
    'This {t} Agreement is entered into this {day}th day of {month} {year} by and between '
    '{a} (the "{ra}") and {b} (the "{rb}").'
)
MONTHS = ["January", "February", "March", "April", "May", "June", "July", "August",
          "September", "October", "November", "December"]
PARTIES = ["Northwind Holdings LLC", "Blue Harbor Inc.", "Granite Peak Partners", "Eastfield Corp.",
           "Silver Lake Ventures", "Redwood Analytics Ltd.", "Summit Freight Co.", "Harper & Lowe LLP"]
ROLES = [("Company", "Contractor"), ("Lender", "Borrower"), ("Purchaser", "Seller"),
         ("Licensor", "Licensee"), ("Employer", "Executive"), ("Supplier", "Customer")]

ECHR_TEMPLATES = [
    "The applicant complained under {t} of the Convention about the conduct of the authorities.",
    "The Court finds that there has been a violation of {t} of the Convention.",
    "Relying on {t} of the Convention, the applicant alleged that the domestic remedies were ineffective.",
    "The Government submitted that the complaint under {t} was manifestly unfounded.",
]


def load_terms(name):
    doc = json.loads((ROOT / "data" / "vocab" / f"{name}.json").read_text())
    return [l["surface"] for l in doc["labels"]]


def check_clean(sentences, vocabs):
    for s in sentences:
        for name, terms in vocabs.items():
            flags = re.IGNORECASE if name in ("crime_charges_us", "terminology_us") else 0
            for t in terms:
                if re.search(r"(?<!\w)" + re.escape(t) + r"(?!\w)", s, flags):
                    raise SystemExit(f"filler sentence contains term {t!r} of {name}: {s}")


def filler(rng, kind, n):
    return " ".join(rng.choice(FILLER[kind]) for _ in range(n))


def split_field(rng):
    r = rng.random()
    if r < 0.3:
        return "test"
    if r < 0.5:
        return "train"
    return None  # left to the keyed-hash assignment


def make_docs(rng, prefix, count, paragraph_fn):
    docs = []
    for i in range(count):
        paragraphs = [paragraph_fn(rng) for _ in range(rng.randint(3, 7))]
        doc = {"id": f"{prefix}-{i:04d}", "text": "\n\n".join(paragraphs)}
        split = split_field(rng)
        if split:
            doc["split"] = split
        docs.append(doc)
    return docs


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=20230517)
    ap.add_argument("--out", type=Path, default=ROOT / "data" / "synthetic")
    args = ap.parse_args()

    vocabs = {n: load_terms(n) for n in
              ("crime_charges_us", "terminology_us", "contract_types", "echr_articles")}
    check_clean([s for group in FILLER.values() for s in group], vocabs)
    rng = random.Random(args.seed)
    us_terms = vocabs["crime_charges_us"] + vocabs["terminology_us"]

    def case_paragraph(rng):
        text = filler(rng, "case_law", rng.randint(2, 4))
        roll = rng.random()
        if roll < 0.55:
            t = rng.choice(us_terms)
            s = rng.choice(CASE_TEMPLATES)
            planted = s.replace("{T}", t[0].upper() + t[1:]).replace("{t}", t)
            pos = rng.randint(0, 1)
            text = planted + " " + text if pos == 0 else text + " " + planted
        elif roll < 0.62:
            a, b = rng.sample(vocabs["crime_charges_us"], 2)
            text += f" The indictment alleged both {a} and {b}."
        return text

    def contract_paragraph(rng):
        if rng.random() < 0.5:
            ra, rb = rng.choice(ROLES)
            a, b = rng.sample(PARTIES, 2)
            return CONTRACT_TEMPLATE.format(
                t=rng.choice(vocabs["contract_types"]), day=rng.randint(4, 20),
                month=rng.choice(MONTHS), year=rng.randint(1998, 2021), a=a, b=b, ra=ra, rb=rb)
        return filler(rng, "contracts", rng.randint(2, 4))

    def echr_paragraph(rng):
        text = filler(rng, "echr", rng.randint(2, 4))
        if rng.random() < 0.6:
            text += " " + rng.choice(ECHR_TEMPLATES).format(t=rng.choice(vocabs["echr_articles"]))
        return text

    def legislation_paragraph(rng):
        return filler(rng, "legislation", rng.randint(2, 5))

    subcorpora = [
        ("eu_legislation", "eu-leg", 60, legislation_paragraph, "EU", "legislation"),
        ("ecthr_case_law", "ecthr", 40, echr_paragraph, "CoE", "case law"),
        ("us_case_law", "us-case", 120, case_paragraph, "US", "case law"),
        ("us_contracts", "us-contract", 80, contract_paragraph, "US", "contracts"),
        ("canadian_legislation", "ca-leg", 15, legislation_paragraph, "Canada", "legislation"),
    ]
    args.out.mkdir(parents=True, exist_ok=True)
    entries = []
    for sid, prefix, count, fn, juris, dtype in subcorpora:
        docs = make_docs(rng, prefix, count, fn)
        path = args.out / f"{sid}.jsonl"
        with path.open("w", encoding="utf-8", newline="\n") as f:
            for d in docs:
                f.write(json.dumps(d, ensure_ascii=False, sort_keys=True) + "\n")
        entries.append({"subcorpus_id": sid, "path": path.name,
                        "jurisdiction": juris, "doc_type": dtype})
    manifest = {"version": "synthetic-1", "entries": entries}
    (args.out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


if __name__ == "__main__":
    main()
