"""
Toy data tool

Small closed corpora for exercising the whole pipeline at desk scale:

  - toy_corpus():    50 SOV -> SVO sentence pairs (romanised Urdu-like source,
                     English target) with trees, alignments and semantic tags
                     touching every grafting case
  - toy_heldout():   held-out sources with two references each
  - semantic_demo(): a tiny corpus where an entity NP and a common NP
                     reorder differently around "ka"
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

from semgraft.services.textio import write_lines
from semgraft.tools.semtags import SemanticTag, TagKind, format_standoff
from semgraft.tools.treebank import Span

logger = logging.getLogger(__name__)

# ---------- lexicon ----------
PERSONS = {"ali": "Ali", "sara": "Sara", "ahmed": "Ahmed", "zara": "Zara", "bilal": "Bilal"}
GPES = {"lahore": "Lahore", "karachi": "Karachi", "lubnan": "Lebanon", "pakistan": "Pakistan"}
COMMON_SUBJECTS = {"admi": "man", "aurat": "woman", "larka": "boy", "larki": "girl", "ustad": "teacher"}
OBJECTS = {"roti": "bread", "pani": "water", "kitab": "book", "seb": "apple", "khat": "letter", "doodh": "milk"}
VERBS = {"khata": "eats", "peeta": "drinks", "parhta": "reads", "likhta": "writes", "dekhta": "sees"}
ABILITIES = {"tair": "swim", "daur": "run", "gaa": "sing"}
FULL_NAMES = {
    ("imran", "khan"): ("Imran", "Khan"),
    ("nawaz", "sharif"): ("Nawaz", "Sharif"),
    ("benazir", "bhutto"): ("Benazir", "Bhutto"),
    ("abdul", "sattar"): ("Abdul", "Sattar"),
    ("mehdi", "hassan"): ("Mehdi", "Hassan"),
    ("noor", "jehan"): ("Noor", "Jehan"),
    ("arfa", "karim"): ("Arfa", "Karim"),
}

NE, TRIG, TARG = TagKind.NAMED_ENTITY, TagKind.MODALITY_TRIGGER, TagKind.MODALITY_TARGET

TagSpec = Tuple[int, int, TagKind, str]


@dataclass
class ToyCorpus:
    source: List[str] = field(default_factory=list)
    target: List[str] = field(default_factory=list)
    alignment: List[str] = field(default_factory=list)
    trees: List[str] = field(default_factory=list)
    tags: List[SemanticTag] = field(default_factory=list)

    def add(self, source: str, target: str, alignment: str, tree: str, tags: Sequence[TagSpec] = ()):
        sid = len(self.source)
        self.source.append(source)
        self.target.append(target)
        self.alignment.append(alignment)
        self.trees.append(tree)
        self.tags.extend(SemanticTag(sid, Span(s, e), kind, label) for s, e, kind, label in tags)

    def tags_by_sentence(self) -> Dict[int, List[SemanticTag]]:
        grouped: Dict[int, List[SemanticTag]] = {}
        for tag in self.tags:
            grouped.setdefault(tag.sentence_id, []).append(tag)
        return grouped

    def __len__(self) -> int:
        return len(self.source)


@dataclass
class HeldOut:
    source: List[str] = field(default_factory=list)
    references: List[List[str]] = field(default_factory=list)


# ---------- sentence templates ----------
def _simple_svo(subject_tree: str, verb: str, obj: str) -> str:
    return f"(S {subject_tree} (VP (VBZ {verb}) (NP (NN {obj}))))"


def _common_clause(corpus: ToyCorpus, s: str, o: str, v: str):
    corpus.add(
        f"{s} {o} {v}", f"{COMMON_SUBJECTS[s]} {VERBS[v]} {OBJECTS[o]}", "0-0 1-2 2-1",
        _simple_svo(f"(NP (NN {COMMON_SUBJECTS[s]}))", VERBS[v], OBJECTS[o]),
    )


def _person_clause(corpus: ToyCorpus, p: str, o: str, v: str):
    corpus.add(
        f"{p} {o} {v}", f"{PERSONS[p]} {VERBS[v]} {OBJECTS[o]}", "0-0 1-2 2-1",
        _simple_svo(f"(NP (NNP {PERSONS[p]}))", VERBS[v], OBJECTS[o]),
        [(0, 1, NE, "PERSON")],
    )


def _sees_place(corpus: ToyCorpus, p: str, g: str):
    corpus.add(
        f"{p} {g} dekhta", f"{PERSONS[p]} sees {GPES[g]}", "0-0 1-2 2-1",
        f"(S (NP (NNP {PERSONS[p]})) (VP (VBZ sees) (NP (NNP {GPES[g]}))))",
        [(0, 1, NE, "PERSON"), (2, 3, NE, "GPE")],
    )


def _titled_name(corpus: ToyCorpus, name: Tuple[str, str], o: str, v: str):
    first, last = FULL_NAMES[name]
    corpus.add(
        f"ustad {name[0]} {name[1]} {o} {v}",
        f"teacher {first} {last} {VERBS[v]} {OBJECTS[o]}",
        "0-0 1-1 2-2 3-4 4-3",
        f"(S (NP (NN teacher) (NNP {first}) (NNP {last})) (VP (VBZ {VERBS[v]}) (NP (NN {OBJECTS[o]}))))",
        [(0, 1, NE, "OCCUPATION"), (1, 3, NE, "PERSON")],
    )


def _today_clause(corpus: ToyCorpus, p: str, o: str, v: str):
    corpus.add(
        f"{p} aaj {o} {v}",
        f"{PERSONS[p]} {VERBS[v]} {OBJECTS[o]} today",
        "0-0 1-3 2-2 3-1",
        f"(S (NP (NNP {PERSONS[p]})) (VP (VBZ {VERBS[v]}) (NP (NN {OBJECTS[o]})) (NP (NN today))))",
        [
            (0, 1, NE, "PERSON"),
            (3, 4, NE, "DATE"),
            (3, 4, NE, "TIME"),
            (0, 2, NE, "ORGANIZATION"),
            (1, 3, TRIG, "Firm_Belief"),
        ],
    )


def _able_clause(corpus: ToyCorpus, p: str, a: str):
    corpus.add(
        f"{p} {a} sakta",
        f"{PERSONS[p]} is able to {ABILITIES[a]}",
        "0-0 1-3 1-4 2-1 2-2",
        f"(S (NP (NNP {PERSONS[p]})) (VP (VBZ is) (ADJP (JJ able) (S (VP (TO to) (VP (VB {ABILITIES[a]})))))))",
        [(0, 1, NE, "PERSON"), (2, 3, TRIG, "Able"), (3, 5, TARG, "Able")],
    )


def _want_clause(corpus: ToyCorpus, p: str, o: str):
    corpus.add(
        f"{p} {o} khana chahta",
        f"{PERSONS[p]} wants to eat {OBJECTS[o]}",
        "0-0 1-4 2-2 2-3 3-1",
        f"(S (NP (NNP {PERSONS[p]})) (VP (VBZ wants) (S (VP (TO to) (VP (VB eat) (NP (NN {OBJECTS[o]})))))))",
        [(0, 1, NE, "PERSON"), (1, 2, TRIG, "Want"), (2, 5, TARG, "Want")],
    )


def toy_corpus() -> ToyCorpus:
    corpus = ToyCorpus()
    for s, o, v in [
        ("admi", "roti", "khata"), ("aurat", "pani", "peeta"), ("larka", "kitab", "parhta"),
        ("larki", "khat", "likhta"), ("ustad", "kitab", "parhta"), ("admi", "seb", "khata"),
        ("aurat", "doodh", "peeta"), ("larka", "khat", "likhta"),
    ]:
        _common_clause(corpus, s, o, v)
    for p, o, v in [
        ("ali", "roti", "khata"), ("sara", "pani", "peeta"), ("ahmed", "kitab", "parhta"),
        ("zara", "khat", "likhta"), ("bilal", "seb", "khata"), ("ali", "doodh", "peeta"),
        ("sara", "kitab", "parhta"),
    ]:
        _person_clause(corpus, p, o, v)
    for p, g in [
        ("ali", "lahore"), ("sara", "karachi"), ("ahmed", "lubnan"), ("zara", "pakistan"),
        ("bilal", "lahore"), ("ali", "karachi"), ("sara", "lubnan"),
    ]:
        _sees_place(corpus, p, g)
    for name, (o, v) in zip(FULL_NAMES, [
        ("roti", "khata"), ("pani", "peeta"), ("kitab", "parhta"), ("khat", "likhta"),
        ("seb", "khata"), ("doodh", "peeta"), ("kitab", "parhta"),
    ]):
        _titled_name(corpus, name, o, v)
    for p, o, v in [
        ("ali", "roti", "khata"), ("sara", "pani", "peeta"), ("ahmed", "kitab", "parhta"),
        ("zara", "khat", "likhta"), ("bilal", "seb", "khata"), ("ali", "doodh", "peeta"),
        ("zara", "kitab", "parhta"),
    ]:
        _today_clause(corpus, p, o, v)
    for p, a in [
        ("ali", "tair"), ("sara", "daur"), ("ahmed", "gaa"), ("zara", "tair"),
        ("bilal", "daur"), ("ali", "gaa"), ("sara", "tair"),
    ]:
        _able_clause(corpus, p, a)
    for p, o in [
        ("ali", "roti"), ("sara", "seb"), ("ahmed", "roti"), ("zara", "seb"),
        ("bilal", "roti"), ("ali", "seb"), ("sara", "roti"),
    ]:
        _want_clause(corpus, p, o)
    return corpus


def toy_heldout() -> HeldOut:
    rows = [
        ("larki seb khata", ["girl eats apple", "the girl eats an apple"]),
        ("bilal pani peeta", ["Bilal drinks water", "Bilal drinks some water"]),
        ("zara lahore dekhta", ["Zara sees Lahore", "Zara sees Lahore"]),
        ("ahmed aaj seb khata", ["Ahmed eats apple today", "today Ahmed eats an apple"]),
        ("bilal tair sakta", ["Bilal is able to swim", "Bilal can swim"]),
        ("zara roti khana chahta", ["Zara wants to eat bread", "Zara would like to eat bread"]),
        ("admi kitab parhta", ["man reads book", "the man reads a book"]),
        ("ahmed karachi dekhta", ["Ahmed sees Karachi", "Ahmed is seeing Karachi"]),
    ]
    return HeldOut([src for src, _ in rows], [refs for _, refs in rows])


def semantic_demo() -> Tuple[ToyCorpus, HeldOut]:
    """
    Common nouns reorder around "ka" (X ka Y -> Y of X); a GPE does not
    (X ka Y -> X Y). Only a grammar whose nonterminals carry the GPE tag can
    tell the two apart on an unseen city.
    """
    corpus = ToyCorpus()
    for place, head in [("shehr", "mayor"), ("gaon", "mayor"), ("shehr", "police")]:
        place_en = {"shehr": "city", "gaon": "village"}[place]
        corpus.add(
            f"{place} ka {head}", f"{head} of {place_en}", "0-2 1-1 2-0",
            f"(NP (NP (NN {head})) (PP (IN of) (NP (NN {place_en}))))",
        )
    corpus.add(
        "lahore ka mayor", "Lahore mayor", "0-0 2-1",
        "(NP (NP (NNP Lahore)) (NN mayor))", [(0, 1, NE, "GPE")],
    )
    corpus.add("karachi", "Karachi", "0-0", "(NP (NNP Karachi))", [(0, 1, NE, "GPE")])
    return corpus, HeldOut(["karachi ka mayor"], [["Karachi mayor"]])


# ---------- files ----------
def write_corpus(directory: Union[str, Path], prefix: str, corpus: ToyCorpus, heldout: HeldOut) -> Dict[str, Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    files = {
        "source": directory / f"{prefix}.src",
        "target": directory / f"{prefix}.tgt",
        "align": directory / f"{prefix}.align",
        "trees": directory / f"{prefix}.trees",
        "tags": directory / f"{prefix}.tags",
        "test_source": directory / f"{prefix}.test.src",
    }
    write_lines(files["source"], corpus.source)
    write_lines(files["target"], corpus.target)
    write_lines(files["align"], corpus.alignment)
    write_lines(files["trees"], corpus.trees)
    write_lines(files["tags"], format_standoff(corpus.tags))
    write_lines(files["test_source"], heldout.source)
    n_refs = max(len(refs) for refs in heldout.references)
    for r in range(n_refs):
        ref_path = directory / f"{prefix}.test.ref{r}"
        write_lines(ref_path, [refs[r] if r < len(refs) else refs[0] for refs in heldout.references])
        files[f"ref{r}"] = ref_path
    files["config"] = write_pipeline_config(directory / f"{prefix}.cfg", files, directory / f"{prefix}_out")
    return files


def write_pipeline_config(path: Path, files: Dict[str, Path], output_dir: Path) -> Path:
    """A ready-to-run `pipeline --config` file for a written corpus."""
    refs = ",".join(str(p.resolve()) for name, p in sorted(files.items()) if name.startswith("ref"))
    lines = [f"{key}={files[key].resolve()}" for key in ("source", "target", "align", "trees", "tags", "test_source")]
    lines += [f"references={refs}", f"output_dir={output_dir.resolve()}", "modes=hiero,samt,samt+sem"]
    write_lines(path, lines)
    return path


def write_toy(directory: Union[str, Path]) -> Dict[str, Dict[str, Path]]:
    """Write the toy corpus and the semantic demo corpus under `directory`."""
    written = {
        "toy": write_corpus(directory, "toy", toy_corpus(), toy_heldout()),
        "demo": write_corpus(directory, "demo", *semantic_demo()),
    }
    logger.info("[TOY] wrote toy and demo corpora to %s", directory)
    return written
