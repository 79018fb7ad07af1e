"""Regenerate the bundled sample data in src/gerner/data/."""
import os
import random

OUT = os.path.join(os.path.dirname(__file__), "..", "src", "gerner", "data")

PER = [[("Angela", "Angela", "NE"), ("Merkel", "Merkel", "NE")],
       [("Goethe", "Goethe", "NE")],
       [("Helmut", "Helmut", "NE"), ("Kohl", "Kohl", "NE")],
       [("Clara", "Clara", "NE"), ("Schumann", "Schumann", "NE")],
       [("Schiller", "Schiller", "NE")]]
LOC = [[("Berlin", "Berlin", "NE")], [("Frankfurt", "Frankfurt", "NE")],
       [("Hamburg", "Hamburg", "NE")], [("Bayern", "Bayern", "NE")],
       [("Leipzig", "Leipzig", "NE")]]
ORG = [[("Siemens", "Siemens", "NE")], [("Deutsche", "deutsch", "ADJA"), ("Bahn", "Bahn", "NN")],
       [("Bundestag", "Bundestag", "NN")], [("Universität", "Universität", "NN"),
                                           ("Leipzig", "Leipzig", "NE")]]
MISC = [[("Oktoberfest", "Oktoberfest", "NN")], [("Deutsch", "Deutsch", "NN")],
        [("Tatort", "Tatort", "NE")]]
ENTS = {"PER": PER, "LOC": LOC, "ORG": ORG, "MISC": MISC}

W = {
    "besuchte": ("besuchen", "VVFIN"), "sagte": ("sagen", "VVFIN"), "ist": ("sein", "VAFIN"),
    "sind": ("sein", "VAFIN"), "liegt": ("liegen", "VVFIN"), "arbeitet": ("arbeiten", "VVFIN"),
    "lobte": ("loben", "VVFIN"), "der": ("der", "ART"), "die": ("der", "ART"), "das": ("der", "ART"),
    "den": ("der", "ART"), "Kinder": ("Kind", "NN"), "Stadt": ("Stadt", "NN"),
    "Firma": ("Firma", "NN"), "Jahr": ("Jahr", "NN"), "Besucher": ("Besucher", "NN"),
    "kleine": ("klein", "ADJA"), "große": ("groß", "ADJA"), "mutiger": ("mutig", "ADJD"),
    "schön": ("schön", "ADJD"), "in": ("in", "APPR"), "mit": ("mit", "APPR"), "für": ("für", "APPR"),
    "heute": ("heute", "ADV"), "gestern": ("gestern", "ADV"), "und": ("und", "KON"),
    ".": (".", "$."), ",": (",", "$,"), "sehr": ("sehr", "ADV"), "viele": ("viel", "PIAT"),
}

TEMPLATES = [
    "PER besuchte gestern LOC .",
    "PER sagte , die Kinder sind mutiger .",
    "ORG arbeitet in LOC .",
    "die große Stadt LOC ist sehr schön .",
    "heute lobte PER die Firma ORG .",
    "das MISC ist für viele Besucher schön .",
    "PER und PER besuchte das MISC in LOC .",
    "die kleine Firma ORG liegt in LOC .",
    "gestern sagte PER , das Jahr ist schön .",
    "viele Kinder sind in LOC mit PER .",
]


def sentence(rng, template):
    rows = []
    for slot in template.split():
        if slot in ENTS:
            name = rng.choice(ENTS[slot])
            for j, (form, lemma, pos) in enumerate(name):
                rows.append((form, lemma, pos, ("B-" if j == 0 else "I-") + slot))
        else:
            lemma, pos = W[slot]
            rows.append((slot, lemma, pos, "O"))
    return rows


def main():
    rng = random.Random(2019)
    with open(os.path.join(OUT, "sample.conll"), "w", encoding="utf-8") as fh:
        fh.write("# synthetic sample: form lemma pos ne\n")
        for i in range(100):
            for row in sentence(rng, TEMPLATES[rng.randrange(len(TEMPLATES))]):
                fh.write(" ".join(row) + "\n")
            fh.write("\n")
    with open(os.path.join(OUT, "sample_raw.txt"), "w", encoding="utf-8") as fh:
        for i in range(200):
            rows = sentence(rng, TEMPLATES[rng.randrange(len(TEMPLATES))])
            text = " ".join(r[0] for r in rows).replace(" .", ".").replace(" ,", ",")
            fh.write(text + "\n")


if __name__ == "__main__":
    main()
