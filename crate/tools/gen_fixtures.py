#!/usr/bin/env python3
"""Generate the synthetic news corpus and synonym database used by tests.

Output is fully determined by SEED, so re-running reproduces the checked-in
fixtures byte for byte.

    python3 tools/gen_fixtures.py crates/core/tests/fixtures
"""

import json
import random
import sys
from pathlib import Path

SEED = 20240611

SUBJECTS = [
    "the agency", "the council", "the governor", "the company", "local officials",
    "the committee", "the senator", "investigators", "the mayor", "the board",
    "researchers", "the union", "federal regulators", "the court", "the ministry",
]
VERBS = [
    "announced", "approved", "rejected", "delayed", "criticized", "defended",
    "launched", "reviewed", "expanded", "cancelled", "proposed", "questioned",
]
OBJECTS = [
    "a new budget plan", "the housing proposal", "an emergency program",
    "the tax measure", "a safety report", "the transit project",
    "a hiring freeze", "the climate policy", "an education initiative",
    "the trade agreement", "a water contract", "the election rules",
]
PLACES = [
    "in Denver", "across the state", "near the border", "in the capital",
    "on Tuesday", "last week", "earlier this month", "after a long debate",
    "during the hearing", "before the vote",
]
REASONS = [
    "citing rising costs", "amid growing protests", "after months of talks",
    "despite strong opposition", "following a public outcry",
    "as pressure mounted", "to calm worried residents",
]
QUOTES = [
    "This decision will help working families",
    "We cannot ignore the evidence any longer",
    "The plan was rushed and poorly explained",
    "Our priority is the safety of every resident",
    "Nobody expected the costs to grow this fast",
    "We will keep fighting for a fair outcome",
]
SPEAKERS = [
    "Dr. Ellen Park", "Mr. James Ortiz", "Sen. Maria Lopez", "Gov. Alan Reed",
    "Ms. Priya Shah", "Prof. Tom Becker",
]
DETAILS = [
    "The measure would cost about $4.5 million over three years.",
    "Critics said the report ignored several important warnings.",
    "Supporters argued that the change was long overdue.",
    "The final vote is expected early next month.",
    "Residents packed the small hall to voice their concerns.",
    "Several members left the meeting before it ended.",
    "The proposal drew sharp criticism from business groups.",
    "Officials did not respond to repeated requests for comment.",
    "Analysts warned that the cuts could hurt rural schools.",
    "The decision surprised many longtime observers.",
]

# Machine-style text reuses a small set of fluent, generic sentences.
MACHINE_SENTENCES = [
    "The new policy is expected to have a significant impact on the community.",
    "Many people believe that this is an important step forward.",
    "The decision comes at a time when the country is facing many challenges.",
    "Experts say that the plan could help to improve the economy.",
    "It is important to note that the situation is still developing.",
    "The government has said that it will continue to monitor the situation.",
    "This is a major change that will affect many people across the country.",
    "The announcement was made during a press conference on Monday.",
    "Officials said that the program will be expanded in the coming months.",
    "The report also found that the number of cases has increased.",
    "Many residents have expressed concern about the new rules.",
    "The company said that it is committed to working with the community.",
]

SYNONYMS = {
    "agency": ["bureau", "office", "department"],
    "council": ["assembly", "board", "panel"],
    "governor": ["chief_executive", "administrator"],
    "company": ["firm", "business", "corporation"],
    "officials": ["authorities", "administrators"],
    "committee": ["panel", "commission"],
    "announced": ["declared", "revealed", "stated"],
    "approved": ["endorsed", "passed", "backed"],
    "rejected": ["refused", "dismissed", "turned_down"],
    "delayed": ["postponed", "deferred", "held_up"],
    "criticized": ["faulted", "condemned", "attacked"],
    "defended": ["supported", "justified"],
    "launched": ["started", "began", "introduced"],
    "reviewed": ["examined", "assessed", "studied"],
    "expanded": ["extended", "enlarged", "broadened"],
    "cancelled": ["scrapped", "called_off", "dropped"],
    "proposed": ["suggested", "offered", "put_forward"],
    "questioned": ["challenged", "doubted", "disputed"],
    "budget": ["spending_plan", "allocation"],
    "plan": ["scheme", "strategy", "program"],
    "proposal": ["plan", "offer", "motion"],
    "program": ["scheme", "plan", "initiative"],
    "measure": ["bill", "step", "act"],
    "report": ["study", "account", "review"],
    "project": ["undertaking", "venture", "scheme"],
    "freeze": ["stop_dead", "halt", "suspension"],
    "policy": ["strategy", "approach", "rule"],
    "initiative": ["effort", "program", "plan"],
    "agreement": ["deal", "pact", "accord"],
    "contract": ["deal", "agreement"],
    "rules": ["regulations", "guidelines", "laws"],
    "costs": ["expenses", "prices", "charges"],
    "protests": ["demonstrations", "rallies"],
    "months": ["weeks", "seasons"],
    "talks": ["negotiations", "discussions"],
    "opposition": ["resistance", "objection"],
    "outcry": ["uproar", "protest"],
    "pressure": ["strain", "stress"],
    "worried": ["anxious", "concerned", "nervous"],
    "residents": ["locals", "citizens", "inhabitants"],
    "decision": ["ruling", "choice", "verdict"],
    "families": ["households", "homes"],
    "evidence": ["proof", "data"],
    "rushed": ["hurried", "hasty"],
    "explained": ["described", "clarified"],
    "priority": ["concern", "focus"],
    "safety": ["security", "protection"],
    "expected": ["anticipated", "predicted"],
    "fighting": ["battling", "struggling", "pushing"],
    "fair": ["just", "equitable", "reasonable"],
    "outcome": ["result", "conclusion"],
    "cost": ["price", "expense"],
    "critics": ["detractors", "opponents"],
    "ignored": ["overlooked", "disregarded", "neglected"],
    "important": ["significant", "crucial", "key"],
    "warnings": ["alerts", "cautions"],
    "supporters": ["backers", "advocates", "proponents"],
    "argued": ["claimed", "contended", "maintained"],
    "change": ["shift", "alteration", "adjustment"],
    "overdue": ["late", "belated"],
    "final": ["last", "concluding"],
    "vote": ["ballot", "poll"],
    "packed": ["crowded", "filled", "jammed"],
    "small": ["little", "tiny", "modest"],
    "hall": ["auditorium", "room", "chamber"],
    "concerns": ["worries", "fears", "doubts"],
    "members": ["delegates", "participants"],
    "meeting": ["session", "gathering"],
    "ended": ["finished", "concluded", "closed"],
    "sharp": ["harsh", "severe", "pointed"],
    "criticism": ["censure", "disapproval"],
    "business": ["commercial", "trade"],
    "groups": ["organizations", "associations"],
    "respond": ["reply", "answer"],
    "repeated": ["continual", "frequent"],
    "requests": ["appeals", "petitions"],
    "comment": ["remark", "statement"],
    "analysts": ["experts", "observers"],
    "warned": ["cautioned", "alerted"],
    "cuts": ["reductions", "decreases"],
    "hurt": ["harm", "damage", "injure"],
    "rural": ["country", "provincial"],
    "schools": ["academies", "colleges"],
    "surprised": ["astonished", "shocked", "startled"],
    "longtime": ["veteran", "seasoned"],
    "observers": ["watchers", "spectators"],
    "significant": ["major", "substantial", "notable"],
    "impact": ["effect", "influence"],
    "community": ["neighborhood", "public", "society"],
    "believe": ["think", "feel"],
    "step": ["move", "measure"],
    "forward": ["ahead", "onward"],
    "country": ["nation", "land"],
    "facing": ["confronting", "meeting"],
    "challenges": ["difficulties", "problems", "obstacles"],
    "experts": ["specialists", "authorities"],
    "improve": ["boost", "strengthen", "enhance"],
    "economy": ["market", "financial_system"],
    "situation": ["circumstances", "state_of_affairs"],
    "developing": ["evolving", "unfolding"],
    "government": ["administration", "state"],
    "continue": ["keep", "persist"],
    "monitor": ["watch", "track", "observe"],
    "major": ["big", "large", "serious"],
    "affect": ["influence", "touch"],
    "people": ["citizens", "persons", "individuals"],
    "announcement": ["declaration", "statement"],
    "press": ["media", "news"],
    "conference": ["briefing", "meeting"],
    "found": ["discovered", "determined"],
    "number": ["count", "total"],
    "cases": ["instances", "incidents"],
    "increased": ["grown", "risen", "climbed"],
    "expressed": ["voiced", "stated"],
    "concern": ["worry", "unease"],
    "committed": ["dedicated", "devoted"],
    "working": ["cooperating", "collaborating"],
    "emergency": ["crisis", "urgent"],
    "housing": ["lodging", "residential"],
    "transit": ["transport", "transportation"],
    "climate": ["environmental", "weather"],
    "education": ["schooling", "teaching"],
    "trade": ["commerce", "business"],
    "water": ["supply"],
    "election": ["electoral", "voting"],
    "hearing": ["session", "inquiry"],
    "debate": ["discussion", "argument"],
    "border": ["frontier", "boundary"],
    "capital": ["seat_of_government"],
    "state": ["province", "region"],
    "rising": ["climbing", "mounting", "growing"],
    "growing": ["mounting", "increasing", "rising"],
    "strong": ["fierce", "firm", "powerful"],
    "public": ["popular", "civic"],
    "calm": ["soothe", "reassure", "settle"],
    "mounted": ["grew", "increased"],
}


def human_article(rng, idx):
    sentences = []
    for _ in range(rng.randint(5, 8)):
        kind = rng.random()
        if kind < 0.45:
            s = "{} {} {} {}, {}.".format(
                rng.choice(SUBJECTS), rng.choice(VERBS), rng.choice(OBJECTS),
                rng.choice(PLACES), rng.choice(REASONS))
            s = s[0].upper() + s[1:]
        elif kind < 0.65:
            s = '"{}," said {}.'.format(rng.choice(QUOTES), rng.choice(SPEAKERS))
        else:
            s = rng.choice(DETAILS)
        sentences.append(s)
    return " ".join(sentences)


def machine_article(rng, idx):
    k = rng.randint(5, 8)
    picks = [rng.choice(MACHINE_SENTENCES) for _ in range(k)]
    if rng.random() < 0.5:
        s = "{} {} {} {}.".format(
            rng.choice(SUBJECTS), rng.choice(VERBS), rng.choice(OBJECTS), rng.choice(PLACES))
        picks.insert(rng.randint(0, len(picks)), s[0].upper() + s[1:])
    return " ".join(picks)


def main(out_dir):
    rng = random.Random(SEED)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = []
    for i in range(60):
        records.append({"id": "h%03d" % i, "label": "human", "text": human_article(rng, i)})
    for i in range(60):
        records.append({"id": "m%03d" % i, "label": "gpt3", "text": machine_article(rng, i)})
    header = {"labels": ["human", "gpt3"]}

    def dump(path, rows):
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(json.dumps(header) + "\n")
            for r in rows:
                f.write(json.dumps(r, ensure_ascii=False) + "\n")

    dump(out / "corpus.jsonl", records)
    small = [r for r in records if r["id"] < "h010"] + [r for r in records if "m" <= r["id"] < "m010"]
    dump(out / "corpus20.jsonl", small)

    with open(out / "synonyms.tsv", "w", encoding="utf-8", newline="\n") as f:
        f.write("# lemma<TAB>comma-separated synonyms\n")
        for lemma in sorted(SYNONYMS):
            f.write("%s\t%s\n" % (lemma, ",".join(SYNONYMS[lemma])))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "crates/core/tests/fixtures")
