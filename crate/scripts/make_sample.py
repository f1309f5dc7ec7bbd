"""Writes the synthetic sample run under data/sample/.

The dataset has the shape of the released fact-labelled set (71 questions,
249 labelled answers with the same label counts) but every text is
generated from the topic table below. Output is fully determined by SEED.

    python3 scripts/make_sample.py [--out data/sample]
"""
import argparse
import datetime as dt
import json
import pathlib
import random

SEED = 2016

LABEL_COUNTS = {
    "FactTrue": 128,
    "FactFalse": 22,
    "PartiallyTrue": 38,
    "ConditionallyTrue": 16,
    "ResponderUnsure": 26,
    "NonFactual": 19,
}
N_QUESTIONS = 71

TOPICS = [
    {
        "key": "family-visa",
        "category": "Visas and Permits",
        "subject": "Family visa salary",
        "questions": [
            "What is the minimum salary to sponsor my wife on a family visa?",
            "How much salary do I need for a family residence visa for my kids?",
            "Is there a salary limit to bring my family on a residence visa?",
        ],
        "fact": "the minimum salary for a family residence visa is 10000 riyals per month",
        "wrong": "the minimum salary for a family residence visa is 4000 riyals per month",
        "extra_wrong": "and the visa is issued the same day at the airport",
        "condition": "if your contract says you get family accommodation",
        "source": ("https://www.moi.gov.qa/family-residence", "Family residence visa requirements"),
    },
    {
        "key": "driving-license",
        "category": "Cars",
        "subject": "Driving license transfer",
        "questions": [
            "Can I convert my Indian driving license to a Qatari license without a test?",
            "Do I need a driving test if I have a license from my home country?",
            "How do I transfer my driving license from abroad?",
        ],
        "fact": "licenses from the listed countries can be transferred after an eye test at the traffic department",
        "wrong": "every foreign license can be used in Qatar for five years without transfer",
        "extra_wrong": "and the transfer costs nothing",
        "condition": "if your license is from one of the listed countries",
        "source": ("https://www.moi.gov.qa/traffic-license", "Traffic department license transfer"),
    },
    {
        "key": "weekend",
        "category": "Working in Qatar",
        "subject": "Official weekend",
        "questions": [
            "Which days are the weekend for government offices here?",
            "Are government offices open on Saturday?",
            "What is the official weekend in Qatar?",
        ],
        "fact": "the official weekend for government offices is Friday and Saturday",
        "wrong": "the official weekend for government offices is Thursday and Friday",
        "extra_wrong": "and banks close on Sunday",
        "condition": "if you work in the public sector",
        "source": ("https://www.gov.qa/working-hours", "Government working hours"),
    },
    {
        "key": "exit-permit",
        "category": "Qatar Living Lounge",
        "subject": "Exit permit",
        "questions": [
            "Do I need an exit permit from my sponsor to travel on vacation?",
            "Is an exit permit still required to leave the country?",
            "My sponsor refuses to give an exit permit, what can I do?",
        ],
        "fact": "the exit permit is issued through the ministry portal and the sponsor must approve it",
        "wrong": "the exit permit was cancelled for all workers last year",
        "extra_wrong": "and it is valid for one year",
        "condition": "if you are sponsored by a private company",
        "source": ("https://www.moi.gov.qa/exit-permit", "Exit permit services"),
    },
    {
        "key": "health-card",
        "category": "Health and Fitness",
        "subject": "Health card fee",
        "questions": [
            "How much does the health card cost for residents?",
            "What is the fee to renew the Hamad health card?",
            "Where do I get a health card and how much is it?",
        ],
        "fact": "the health card costs 100 riyals and is renewed with the residence permit",
        "wrong": "the health card is free for every resident",
        "extra_wrong": "and it covers private hospitals",
        "condition": "if you hold a valid residence permit",
        "source": ("https://www.hamad.qa/health-card", "Health card services"),
    },
    {
        "key": "school-fees",
        "category": "Education",
        "subject": "School fee allowance",
        "questions": [
            "Does the government pay school fees for expat children?",
            "Is there an education allowance for private schools?",
            "Who pays the school fees for my kids in private schools?",
        ],
        "fact": "school fees for expat children are paid by the family unless the employment contract includes an education allowance",
        "wrong": "the government pays private school fees for every expat child",
        "extra_wrong": "and the books are free",
        "condition": "if your employer offers an education allowance in the contract",
        "source": ("https://www.edu.gov.qa/private-schools", "Private school fees"),
    },
    {
        "key": "national-day",
        "category": "Qatari Culture",
        "subject": "National day date",
        "questions": [
            "When is Qatar national day celebrated?",
            "Is national day a public holiday and on which date?",
            "What date are the national day celebrations on the corniche?",
        ],
        "fact": "national day is celebrated on 18 December and is a public holiday",
        "wrong": "national day is celebrated on 3 September and is a public holiday",
        "extra_wrong": "and the holiday lasts one week",
        "condition": "if the date falls on a working day",
        "source": ("https://www.gov.qa/national-day", "National day"),
    },
    {
        "key": "bank-loan",
        "category": "Investment and Finance",
        "subject": "Personal loan limit",
        "questions": [
            "How much personal loan can an expat get from a bank?",
            "Is there a limit on personal loans for expats?",
            "What is the maximum personal loan for foreigners?",
        ],
        "fact": "the central bank limits personal loans for expats to 400000 riyals",
        "wrong": "there is no limit on personal loans for expats",
        "extra_wrong": "and no salary transfer is required",
        "condition": "if your salary is transferred to the lending bank",
        "source": ("https://www.qcb.gov.qa/personal-loans", "Central bank personal loan rules"),
    },
    {
        "key": "alcohol-permit",
        "category": "Qatar Living Lounge",
        "subject": "Liquor permit",
        "questions": [
            "How can I get a liquor permit as a resident?",
            "What do I need to apply for an alcohol permit?",
            "Is a salary certificate needed for the liquor permit?",
        ],
        "fact": "the liquor permit needs a salary certificate and a deposit at the distribution company",
        "wrong": "any visitor can buy alcohol in supermarkets without a permit",
        "extra_wrong": "and the deposit is returned after a month",
        "condition": "if you are a non muslim resident",
        "source": ("https://www.qdc.qa/permit", "Distribution company permit"),
    },
    {
        "key": "metro",
        "category": "Moving to Qatar",
        "subject": "Metro opening",
        "questions": [
            "When will the Doha metro open for passengers?",
            "Is the metro running yet?",
            "Which metro line opens first?",
        ],
        "fact": "the red line of the metro opens first and the network is planned for the next years",
        "wrong": "the metro already runs every line today",
        "extra_wrong": "and rides are free",
        "condition": "if construction stays on schedule",
        "source": ("https://www.qr.com.qa/metro", "Rail project status"),
    },
    {
        "key": "rent-deposit",
        "category": "Salary and Allowances",
        "subject": "Rent deposit",
        "questions": [
            "How much deposit do landlords ask for an apartment?",
            "Is the rent deposit refundable when I leave?",
            "What is the usual deposit for a flat?",
        ],
        "fact": "landlords usually ask for one month of rent as a refundable deposit",
        "wrong": "landlords ask for one year of rent as a deposit that is never returned",
        "extra_wrong": "and the municipality keeps the deposit",
        "condition": "if the contract is registered with the municipality",
        "source": ("https://www.mme.gov.qa/tenancy", "Tenancy contracts"),
    },
    {
        "key": "working-hours",
        "category": "Working in Qatar",
        "subject": "Ramadan working hours",
        "questions": [
            "How many hours do we work during Ramadan?",
            "Are working hours reduced in Ramadan for private companies?",
            "What are the Ramadan working hours by labour law?",
        ],
        "fact": "the labour law limits work during Ramadan to 36 hours per week",
        "wrong": "the labour law does not change working hours during Ramadan",
        "extra_wrong": "and overtime is forbidden",
        "condition": "if you work for a private company under the labour law",
        "source": ("https://www.adlsa.gov.qa/ramadan-hours", "Labour law working hours"),
    },
]

CONFIDENT = [
    "{Fact}.",
    "I checked last month and {fact}.",
    "According to the ministry website {fact}.",
    "{Fact}, I did it myself in 2015.",
    "Yes, {fact}. The official page explains it.",
]
WRONG = [
    "{Wrong}.",
    "A friend told me that {wrong}.",
    "As far as I know {wrong}.",
    "{Wrong}, everyone knows that.",
]
UNSURE = [
    "I am not sure, maybe {fact}? Perhaps someone else knows.",
    "I think {fact} but I might be wrong.",
    "Not sure about this, possibly {wrong}.",
    "Maybe {fact}, please check with the ministry.",
]
OPINION = [
    "Good luck with everything, this country is wonderful.",
    "Why would you want to do that? Honestly I hate this process.",
    "Welcome to Doha! You will love it here.",
    "This forum is full of the same question every week.",
]
CHATTER = [
    "lol same question again",
    "Search the forum first please.",
    "Thanks, very helpful!",
    "bump",
    "Anyone?",
]
FIRST = ["ahmed", "maria", "john", "priya", "omar", "fatima", "li", "sara", "raj", "noor", "mike", "anna"]


def cap(s):
    return s[0].upper() + s[1:]


def fill(template, topic):
    return template.format(
        fact=topic["fact"],
        Fact=cap(topic["fact"]),
        wrong=topic["wrong"],
        Wrong=cap(topic["wrong"]),
    )


def answer_text(label, topic, rng):
    if label == "FactTrue":
        return fill(rng.choice(CONFIDENT), topic)
    if label == "FactFalse":
        return fill(rng.choice(WRONG), topic)
    if label == "PartiallyTrue":
        return cap(topic["fact"]) + " " + topic["extra_wrong"] + "."
    if label == "ConditionallyTrue":
        return cap(topic["condition"]) + " then " + topic["fact"] + "."
    if label == "ResponderUnsure":
        return fill(rng.choice(UNSURE), topic)
    return rng.choice(OPINION)


def iso(t):
    return t.strftime("%Y-%m-%dT%H:%M:%SZ")


class Users:
    def __init__(self, rng):
        self.rng = rng
        self.names = [f"{n}{i}" for n in FIRST for i in range(1, 9)]
        self.reliable = set(self.names[: len(self.names) // 2])

    def pick(self, reliable):
        pool = [u for u in self.names if (u in self.reliable) == reliable]
        return self.rng.choice(pool)


def make_thread(qid, topic, labels, users, rng, start, n_chatter):
    t = start
    question = {
        "id": qid,
        "subject": topic["subject"],
        "body": rng.choice(topic["questions"]),
        "category": topic["category"],
        "timestamp": iso(t),
        "user_id": users.pick(rng.random() < 0.5),
    }
    kinds = [("labelled", l) for l in labels] + [("chatter", None)] * n_chatter
    rng.shuffle(kinds)
    answers = []
    for pos, (kind, label) in enumerate(kinds, start=1):
        t += dt.timedelta(minutes=rng.randint(5, 600))
        if kind == "chatter":
            body = rng.choice(CHATTER)
            goodness = rng.choice(["Bad", "Bad", "PotentiallyUseful"])
            user = users.pick(False)
        else:
            body = answer_text(label, topic, rng)
            goodness = "Good" if label else rng.choice(["Bad", "PotentiallyUseful"])
            user = users.pick(label == "FactTrue" and rng.random() < 0.8)
        a = {
            "id": f"{qid}_C{pos}",
            "body": body,
            "timestamp": iso(t),
            "user_id": user,
            "thread_position": pos,
            "goodness": goodness,
        }
        if label:
            a["fact_label"] = label
        answers.append(a)
    return {"question": question, "answers": answers}


def dataset(rng, users):
    labels = [l for l, n in LABEL_COUNTS.items() for _ in range(n)]
    rng.shuffle(labels)
    total = len(labels)
    per_thread = [total // N_QUESTIONS] * N_QUESTIONS
    for i in range(total - sum(per_thread)):
        per_thread[i] += 1
    rng.shuffle(per_thread)
    threads = []
    start = dt.datetime(2015, 3, 1, 7, 0)
    k = 0
    for i in range(N_QUESTIONS):
        topic = TOPICS[i % len(TOPICS)]
        chunk = labels[k : k + per_thread[i]]
        k += per_thread[i]
        start += dt.timedelta(hours=rng.randint(20, 200))
        threads.append(make_thread(f"Q{1000 + i}", topic, chunk, users, rng, start, rng.randint(0, 2)))
    return threads


def trusted_post(topic, variant):
    words = topic["fact"].split()
    half = len(words) // 2
    first, second = " ".join(words[:half]), " ".join(words[half:])
    subject = topic["subject"].lower()
    return [
        f"{topic['subject']}? {cap(topic['fact'])}. Ask the office for the form.",
        f"People ask about {subject} every week. The rule is clear: {first}.",
        f"{cap(second)}, the office confirmed. Bring your passport and a copy of your {subject} papers.",
        f"Short answer: {words[-1]}. Long answer: {topic['fact']}, {topic['condition']}.",
    ][variant % 4]


def forum(rng, users):
    """Unlabelled history threads; trusted authors restate each fact."""
    threads = []
    start = dt.datetime(2014, 1, 5, 9, 0)
    trusted = ["moderator1", "moderator2"]
    for i in range(180):
        topic = TOPICS[i % len(TOPICS)]
        start += dt.timedelta(hours=rng.randint(10, 60))
        labels = rng.choices(["FactTrue", "FactFalse", "ResponderUnsure", "NonFactual"], [5, 2, 2, 1], k=3)
        t = make_thread(f"F{5000 + i}", topic, labels, users, rng, start, 1)
        for a in t["answers"]:
            if a.pop("fact_label", None) not in ("FactTrue", None):
                a["goodness"] = rng.choice(["Good", "Bad", "PotentiallyUseful"])
        if i % 5 == 0:
            m = i // 5
            last = dt.datetime.strptime(t["answers"][-1]["timestamp"], "%Y-%m-%dT%H:%M:%SZ")
            t["answers"].append(
                {
                    "id": f"{t['question']['id']}_C{len(t['answers']) + 1}",
                    "body": trusted_post(topic, m + m // 12),
                    "timestamp": iso(last + dt.timedelta(hours=2)),
                    "user_id": trusted[i % 2],
                    "thread_position": len(t["answers"]) + 1,
                    "goodness": "Good",
                }
            )
        threads.append(t)
    return threads


def pages():
    out = []
    for topic in TOPICS:
        url, title = topic["source"]
        out.append(
            {
                "url": url,
                "title": title,
                "text": f"{title}. Official information for residents of Qatar. {cap(topic['fact'])}. "
                f"Applications are handled online. Contact the office for details.",
            }
        )
        out.append(
            {
                "url": f"https://www.expatblog.example/{topic['key']}",
                "title": f"{topic['subject']} rumours",
                "text": f"People in Qatar keep saying that {topic['wrong']}. Nobody has confirmed it.",
            }
        )
    return out


def embeddings(threads, rng, dim, name_seed):
    words = sorted(
        {
            w.strip(".,?!").lower()
            for t in threads
            for text in [t["question"]["body"]] + [a["body"] for a in t["answers"]]
            for w in text.split()
        }
        - {""}
    )
    r = random.Random(name_seed)
    lines = [f"{len(words)} {dim}"]
    for w in words:
        lines.append(w + " " + " ".join(f"{r.gauss(0, 1):.4f}" for _ in range(dim)))
    return "\n".join(lines) + "\n"


CONFIG = """seed = 42
output_dir = "../../runs/sample"

[data]
dataset = "dataset.jsonl"
forum_dump = "forum.jsonl"

[resources]
embeddings_general = "embeddings_general.txt"
embeddings_domain = "embeddings_domain.txt"
trusted_authors = "trusted_authors.txt"

[search]
web = {{ kind = "{web_kind}", {web_arg} }}
forum = {{ kind = "{forum_kind}"{forum_arg} }}
hq_k = 5

[model]
lambda = 0.01
epochs = 20

[record]
web = {{ kind = "local", pages = "pages.jsonl" }}
forum = {{ kind = "forum_dump" }}
web_out = "fixtures/web.jsonl"
forum_out = "fixtures/forum.jsonl"
"""


def write_jsonl(path, rows):
    with open(path, "w") as f:
        for r in rows:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="data/sample")
    out = pathlib.Path(ap.parse_args().out)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(SEED)
    users = Users(rng)
    ds = dataset(rng, users)
    fm = forum(rng, users)
    write_jsonl(out / "dataset.jsonl", ds)
    write_jsonl(out / "forum.jsonl", fm)
    write_jsonl(out / "pages.jsonl", pages())
    (out / "trusted_authors.txt").write_text("# authors whose posts count as high quality\nmoderator1\nmoderator2\n")
    (out / "embeddings_general.txt").write_text(embeddings(ds + fm, rng, 10, 1))
    (out / "embeddings_domain.txt").write_text(embeddings(ds + fm, rng, 12, 2))
    (out / "config.toml").write_text(
        CONFIG.format(web_kind="local", web_arg='pages = "pages.jsonl"', forum_kind="forum_dump", forum_arg="")
    )
    (out / "config.fixtures.toml").write_text(
        CONFIG.format(
            web_kind="fixture",
            web_arg='path = "fixtures/web.jsonl", strict = true',
            forum_kind="fixture",
            forum_arg=', path = "fixtures/forum.jsonl", strict = true',
        ).replace("runs/sample", "runs/sample-fixtures")
    )


if __name__ == "__main__":
    main()
