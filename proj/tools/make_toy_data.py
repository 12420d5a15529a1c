#!/usr/bin/env python3
"""Regenerates data/toy: small synthetic corpora in every task format.

Output is deterministic; rerun after editing and commit the result.
"""
import json
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "data" / "toy"

FILLER = ["really", "quite", "today", "again", "mostly", "still", "later", "perhaps", "once", "often"]


def write(name, spec, rows):
    (OUT / f"{name}.spec.json").write_text(json.dumps(spec, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    with open(OUT / f"{name}.jsonl", "w", encoding="utf-8") as f:
        for r in rows:
            f.write(json.dumps(r, ensure_ascii=False, sort_keys=True) + "\n")


def topics(rng):
    vocab = {
        "astronomy": ["telescope", "orbit", "comet", "nebula"],
        "cooking": ["oven", "recipe", "simmer", "garlic"],
        "finance": ["bond", "equity", "dividend", "ledger"],
        "gardening": ["compost", "seedling", "trowel", "mulch"],
        "music": ["chord", "tempo", "violin", "chorus"],
        "sailing": ["keel", "harbor", "jib", "tide"],
    }
    rows = []
    for label, words in vocab.items():
        for i in range(100):
            picks = rng.sample(words, 2) + rng.sample(FILLER, 2)
            rng.shuffle(picks)
            rows.append({"example_id": f"{label[:3]}-{i:03d}", "text_a": "A note about " + " ".join(picks) + ".",
                         "label": label})
    spec = {
        "dataset_id": "toy_topics",
        "task_format": "document",
        "transfer_types": ["class", "pretraining"],
        "phase": "meta_test",
        "labels_train": ["archery", "baking", "chess", "diving", "fencing", "golf"],
        "labels_val": ["hiking", "juggling", "knitting", "origami", "pottery"],
        "labels_test": list(vocab),
        "expected_test_example_count": len(rows),
    }
    write("toy_topics", spec, rows)


def nli(rng):
    subjects = ["The dog", "A child", "The chef", "Two hikers", "A pianist", "The crowd"]
    actions = ["is running", "is eating", "is sleeping", "is singing", "is reading"]
    rows = []
    n = 0
    for label in ["contradiction", "entailment", "neutral"]:
        for _ in range(100):
            s = rng.choice(subjects)
            a = rng.choice(actions)
            if label == "entailment":
                b = f"{s} {a} {rng.choice(FILLER)}"
            elif label == "contradiction":
                b = f"{s} {rng.choice([x for x in actions if x != a])}"
            else:
                b = f"{s} {a} near the river"
            rows.append({"example_id": f"nli-{n:04d}", "text_a": f"{s} {a}.", "text_b": b.lower(), "label": label})
            n += 1
    spec = {
        "dataset_id": "toy_nli",
        "task_format": "sentence_pair",
        "transfer_types": ["domain", "pretraining"],
        "phase": "meta_test",
        "labels_train": [],
        "labels_val": [],
        "labels_test": ["contradiction", "entailment", "neutral"],
        "expected_test_example_count": len(rows),
        "choice_surface": {"entailment": "Yes", "contradiction": "No", "neutral": "Maybe"},
    }
    write("toy_nli", spec, rows)


def relation(rng):
    people = ["Ada Lovelace", "Miguel Ángel", "Søren Kierkegaard", "Grace Hopper", "Jean Sibelius"]
    works = ["the Analytical Notes", "Fear and Trembling", "Finlandia", "the COBOL report", "La Piedad"]
    templates = {
        "composer": "{h} wrote the score of {t}.",
        "screenwriter": "{h} drafted the script for {t}.",
        "distributor": "{h} shipped copies of {t} abroad.",
        "main subject": "{h} is the topic of {t}.",
        "characters": "{h} appears as a figure in {t}.",
        "platform": "{h} released {t} on a console.",
    }
    rows = []
    for label, tmpl in templates.items():
        for i in range(60):
            h, t = rng.choice(people), rng.choice(works)
            text = tmpl.format(h=h, t=t)
            hs = text.index(h)
            ts = text.index(t)
            rows.append({"example_id": f"rel-{label.replace(' ', '_')}-{i:02d}", "text_a": text,
                         "mention_spans": [[hs, hs + len(h)], [ts, ts + len(t)]], "label": label})
    spec = {
        "dataset_id": "toy_relation",
        "task_format": "relation_classification",
        "transfer_types": ["class", "pretraining"],
        "phase": "meta_test",
        "labels_train": ["architect", "child", "father", "mother", "sibling", "spouse"],
        "labels_val": ["developer", "director", "performer", "publisher", "original network"],
        "labels_test": list(templates),
        "expected_test_example_count": len(rows),
    }
    write("toy_relation", spec, rows)


def entity(rng):
    names = {
        "location": ["Zürich", "Lagos", "Kyoto", "Québec"],
        "organization": ["UNICEF", "Siemens", "the Red Cross", "Toyota"],
        "other": ["Esperanto", "the Olympics", "Buddhism", "Brexit"],
        "person": ["Amélie Mauresmo", "Chinua Achebe", "Yo-Yo Ma", "Greta Thunberg"],
    }
    frames = ["Reporters mentioned {m} twice.", "Yesterday {m} made headlines.", "Nobody expected {m} here."]
    rows = []
    for label, ms in names.items():
        for i in range(60):
            m = rng.choice(ms)
            text = rng.choice(frames).format(m=m)
            s = text.index(m)
            rows.append({"example_id": f"ent-{label[:3]}-{i:02d}", "text_a": text, "mention_spans": [[s, s + len(m)]],
                         "label": label})
    spec = {
        "dataset_id": "toy_entity",
        "task_format": "entity_typing",
        "transfer_types": ["pretraining", "task"],
        "phase": "meta_test",
        "labels_train": [],
        "labels_val": [],
        "labels_test": list(names),
        "expected_test_example_count": len(rows),
    }
    write("toy_entity", spec, rows)


def sentiment(rng):
    good = ["lovely", "delightful", "superb", "charming"]
    bad = ["dull", "clumsy", "tedious", "awful"]
    rows = []
    for label, words in [("negative", bad), ("positive", good)]:
        for i in range(100):
            rows.append({"example_id": f"sen-{label[:3]}-{i:03d}",
                         "text_a": f"The film was {rng.choice(FILLER)} {rng.choice(words)}.", "label": label})
    spec = {
        "dataset_id": "toy_sentiment",
        "task_format": "single_text",
        "transfer_types": ["domain", "pretraining"],
        "phase": "meta_test",
        "labels_train": [],
        "labels_val": [],
        "labels_test": ["negative", "positive"],
        "expected_test_example_count": len(rows),
    }
    write("toy_sentiment", spec, rows)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for i, make in enumerate([topics, nli, relation, entity, sentiment]):
        make(random.Random(1000 + i))


if __name__ == "__main__":
    main()
